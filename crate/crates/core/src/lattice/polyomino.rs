//! Exhaustive enumeration of fixed polyominoes (connected cell sets up to
//! translation) for the edge-isoperimetric minimum.

use std::collections::HashSet;
use std::sync::OnceLock;

use super::LatticeError;

/// Largest cell count for which [`min_boundary`] enumerates.
pub const MIN_BOUNDARY_CAP: usize = 12;

/// Cells are packed as `x * STRIDE + y` after translating the bounding box
/// to the origin. Polyominoes of at most 12 cells fit in 12x12.
const STRIDE: i16 = 16;

type Shape = Vec<i16>;

struct Table {
    min_boundary: Vec<usize>,
    counts: Vec<usize>,
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| enumerate(MIN_BOUNDARY_CAP))
}

fn unpack(c: i16) -> (i16, i16) {
    (c.div_euclid(STRIDE), c.rem_euclid(STRIDE))
}

fn normalize(cells: &mut [(i16, i16)]) -> Shape {
    let min_x = cells.iter().map(|c| c.0).min().unwrap();
    let min_y = cells.iter().map(|c| c.1).min().unwrap();
    let mut s: Shape = cells
        .iter()
        .map(|&(x, y)| (x - min_x) * STRIDE + (y - min_y))
        .collect();
    s.sort_unstable();
    s
}

fn perimeter(shape: &Shape) -> usize {
    let set: HashSet<(i16, i16)> = shape.iter().map(|&c| unpack(c)).collect();
    set.iter()
        .map(|&(x, y)| {
            [(x + 1, y), (x, y + 1), (x - 1, y), (x, y - 1)]
                .iter()
                .filter(|n| !set.contains(n))
                .count()
        })
        .sum()
}

/// Grow every polyomino of size k by one cell in all ways; deduplicate by
/// translation-normalized signature.
fn enumerate(max_cells: usize) -> Table {
    let mut min_boundary = vec![0, 4];
    let mut counts = vec![0, 1];
    let mut level: HashSet<Shape> = HashSet::from([vec![0]]);
    for _ in 2..=max_cells {
        let mut next: HashSet<Shape> = HashSet::with_capacity(level.len() * 4);
        for shape in &level {
            let cells: Vec<(i16, i16)> = shape.iter().map(|&c| unpack(c)).collect();
            for &(x, y) in &cells {
                for n in [(x + 1, y), (x, y + 1), (x - 1, y), (x, y - 1)] {
                    if cells.contains(&n) {
                        continue;
                    }
                    let mut grown = cells.clone();
                    grown.push(n);
                    next.insert(normalize(&mut grown));
                }
            }
        }
        min_boundary.push(next.iter().map(perimeter).min().unwrap());
        counts.push(next.len());
        level = next;
    }
    Table {
        min_boundary,
        counts,
    }
}

/// Minimum number of boundary edges over all polyominoes of `n` cells.
pub fn min_boundary(n: usize) -> Result<usize, LatticeError> {
    if n == 0 || n > MIN_BOUNDARY_CAP {
        return Err(LatticeError::PolyominoTooLarge(n));
    }
    Ok(table().min_boundary[n])
}

/// Number of fixed polyominoes with `n` cells.
pub fn fixed_polyomino_count(n: usize) -> Result<usize, LatticeError> {
    if n == 0 || n > MIN_BOUNDARY_CAP {
        return Err(LatticeError::PolyominoTooLarge(n));
    }
    Ok(table().counts[n])
}
