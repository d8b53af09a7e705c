//! Geometry of the square lattice: vertices, adjacency, growing clusters and
//! the strip region used by restricted percolation.

mod cluster;
mod polyomino;
mod strip;

pub use cluster::{BoundaryEdge, Cluster};
pub use polyomino::{fixed_polyomino_count, min_boundary, MIN_BOUNDARY_CAP};
pub use strip::{strip_contains, StripRegion};

use std::fmt;

use thiserror::Error;

/// Tolerance on the Euclidean norm of a direction vector.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("vertex {0} is already a member of the cluster")]
    AlreadyMember(Vertex),
    #[error("vertex {0} lies outside the cluster's region")]
    OutsideRegion(Vertex),
    #[error("direction ({0}, {1}) is not a unit vector")]
    NotUnit(f64, f64),
    #[error("scale must be positive")]
    ZeroScale,
    #[error("coordinate of {0} overflows the lattice range")]
    Overflow(String),
    #[error("min_boundary is only available for 1..={MIN_BOUNDARY_CAP} cells, got {0}")]
    PolyominoTooLarge(usize),
    #[error("strip half-width {0} is below 1")]
    StripTooNarrow(f64),
}

/// A point of the square lattice.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
}

impl Vertex {
    pub const ORIGIN: Vertex = Vertex { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Vertex { x, y }
    }

    /// The neighbor one unit away in direction `dir`.
    ///
    /// Panics if the step leaves the `i32` coordinate range.
    #[inline]
    pub fn step(self, dir: Direction) -> Vertex {
        let (dx, dy) = dir.offset();
        match (self.x.checked_add(dx), self.y.checked_add(dy)) {
            (Some(x), Some(y)) => Vertex { x, y },
            _ => panic!("lattice coordinate overflow stepping {dir:?} from {self}"),
        }
    }

    /// The four neighbors in E, N, W, S order.
    #[inline]
    pub fn neighbors(self) -> [Vertex; 4] {
        Direction::ALL.map(|d| self.step(d))
    }

    pub fn l1_distance(self, other: Vertex) -> u64 {
        (self.x as i64 - other.x as i64).unsigned_abs()
            + (self.y as i64 - other.y as i64).unsigned_abs()
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl From<(i32, i32)> for Vertex {
    fn from((x, y): (i32, i32)) -> Self {
        Vertex { x, y }
    }
}

/// Free-function form of [`Vertex::neighbors`].
pub fn neighbors(v: Vertex) -> [Vertex; 4] {
    v.neighbors()
}

/// Lattice directions, in the fixed order used everywhere in the crate.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Direction {
    East = 0,
    North = 1,
    West = 2,
    South = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::East,
        Direction::North,
        Direction::West,
        Direction::South,
    ];

    #[inline]
    pub const fn offset(self) -> (i32, i32) {
        match self {
            Direction::East => (1, 0),
            Direction::North => (0, 1),
            Direction::West => (-1, 0),
            Direction::South => (0, -1),
        }
    }

    #[inline]
    pub const fn opposite(self) -> Direction {
        match self {
            Direction::East => Direction::West,
            Direction::North => Direction::South,
            Direction::West => Direction::East,
            Direction::South => Direction::North,
        }
    }

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }
}

/// The lattice point whose coordinates are the integer parts of `n * v`.
///
/// Integer part means floor, for negative coordinates too.
pub fn integer_part_vector(v: (f64, f64), n: u64) -> Result<Vertex, LatticeError> {
    let norm = v.0.hypot(v.1);
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(LatticeError::NotUnit(v.0, v.1));
    }
    if n == 0 {
        return Err(LatticeError::ZeroScale);
    }
    let scale = n as f64;
    let coord = |c: f64| -> Result<i32, LatticeError> {
        let f = (scale * c).floor();
        if f < i32::MIN as f64 || f > i32::MAX as f64 {
            return Err(LatticeError::Overflow(format!("{scale}*{c}")));
        }
        Ok(f as i32)
    };
    Ok(Vertex::new(coord(v.0)?, coord(v.1)?))
}
