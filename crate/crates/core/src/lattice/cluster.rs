use super::{Direction, LatticeError, StripRegion, Vertex};

use std::cell::RefCell;

/// Slot value: no boundary edge enters this cell from that side. Slots
/// otherwise hold `position + 1` in the edge array.
const NO_EDGE: u32 = 0;
/// Marker in slot 0 of a member cell.
const MEMBER: u32 = u32::MAX;

/// A directed boundary edge, stored by its head (the outside vertex) and the
/// direction from the head back to the member tail.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Edge {
    head: Vertex,
    back: Direction,
}

/// A boundary edge as seen from outside: `from` is a member, `to` is not.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryEdge {
    pub from: Vertex,
    pub to: Vertex,
}

impl From<Edge> for BoundaryEdge {
    fn from(e: Edge) -> Self {
        BoundaryEdge {
            from: e.head.step(e.back),
            to: e.head,
        }
    }
}

/// Per-vertex slots. All-zero is the empty cell.
type Cell = [u32; 4];

const EMPTY_CELL: Cell = [NO_EDGE; 4];

thread_local! {
    // Freshly mapped pages are expensive to fault in, so grid buffers are
    // recycled within a thread instead of returned to the allocator.
    static BUFFERS: RefCell<Vec<Vec<Cell>>> = const { RefCell::new(Vec::new()) };
}

const POOLED_BUFFERS: usize = 3;

/// A zeroed buffer of `len` cells, reusing a pooled allocation if possible.
fn take_buffer(len: usize) -> Vec<Cell> {
    let reused = BUFFERS.with(|pool| {
        let mut pool = pool.borrow_mut();
        let pick = pool
            .iter()
            .enumerate()
            .filter(|(_, b)| b.capacity() >= len)
            .min_by_key(|(_, b)| b.capacity())
            .map(|(i, _)| i);
        pick.map(|i| pool.swap_remove(i))
    });
    match reused {
        Some(mut buf) => {
            buf.clear();
            buf.resize(len, EMPTY_CELL);
            buf
        }
        None => vec![EMPTY_CELL; len],
    }
}

fn return_buffer(buf: Vec<Cell>) {
    if buf.capacity() == 0 {
        return;
    }
    BUFFERS.with(|pool| {
        let mut pool = pool.borrow_mut();
        pool.push(buf);
        if pool.len() > POOLED_BUFFERS {
            let smallest = pool
                .iter()
                .enumerate()
                .min_by_key(|(_, b)| b.capacity())
                .map(|(i, _)| i)
                .unwrap();
            pool.swap_remove(smallest);
        }
    });
}

/// Dense cell storage over a bounding box that grows on demand.
struct Grid {
    min_x: i64,
    min_y: i64,
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl Clone for Grid {
    fn clone(&self) -> Self {
        let mut cells = take_buffer(self.cells.len());
        cells.copy_from_slice(&self.cells);
        Grid { cells, ..*self }
    }
}

impl Drop for Grid {
    fn drop(&mut self) {
        return_buffer(std::mem::take(&mut self.cells));
    }
}

impl Grid {
    fn around(v: Vertex, radius: i64) -> Self {
        let side = (2 * radius + 1) as usize;
        Grid {
            min_x: v.x as i64 - radius,
            min_y: v.y as i64 - radius,
            width: side,
            height: side,
            cells: take_buffer(side * side),
        }
    }

    #[inline]
    fn index(&self, v: Vertex) -> Option<usize> {
        let dx = v.x as i64 - self.min_x;
        let dy = v.y as i64 - self.min_y;
        if dx < 0 || dy < 0 || dx >= self.width as i64 || dy >= self.height as i64 {
            None
        } else {
            Some(dy as usize * self.width + dx as usize)
        }
    }

    #[inline]
    fn get(&self, v: Vertex) -> Cell {
        self.index(v).map_or(EMPTY_CELL, |i| self.cells[i])
    }

    /// Mutable access; `v` must be inside the box (see `cover`).
    #[inline]
    fn get_mut(&mut self, v: Vertex) -> &mut Cell {
        let i = self.index(v).expect("grid cell outside allocated box");
        &mut self.cells[i]
    }

    /// Ensure the box contains `v` and its four neighbors.
    fn cover(&mut self, v: Vertex) {
        let (x, y) = (v.x as i64, v.y as i64);
        let max_x = self.min_x + self.width as i64 - 1;
        let max_y = self.min_y + self.height as i64 - 1;
        if x - 1 >= self.min_x && x + 1 <= max_x && y - 1 >= self.min_y && y + 1 <= max_y {
            return;
        }
        let slack_x = (self.width as i64).max(8) / 2;
        let slack_y = (self.height as i64).max(8) / 2;
        let new_min_x = if x - 1 < self.min_x {
            x - 1 - slack_x
        } else {
            self.min_x
        };
        let new_max_x = if x + 1 > max_x {
            x + 1 + slack_x
        } else {
            max_x
        };
        let new_min_y = if y - 1 < self.min_y {
            y - 1 - slack_y
        } else {
            self.min_y
        };
        let new_max_y = if y + 1 > max_y {
            y + 1 + slack_y
        } else {
            max_y
        };
        let width = (new_max_x - new_min_x + 1) as usize;
        let height = (new_max_y - new_min_y + 1) as usize;
        let mut cells = take_buffer(width * height);
        let off_x = (self.min_x - new_min_x) as usize;
        let off_y = (self.min_y - new_min_y) as usize;
        for row in 0..self.height {
            let src = &self.cells[row * self.width..(row + 1) * self.width];
            let start = (row + off_y) * width + off_x;
            cells[start..start + self.width].copy_from_slice(src);
        }
        let old = std::mem::replace(&mut self.cells, cells);
        return_buffer(old);
        self.min_x = new_min_x;
        self.min_y = new_min_y;
        self.width = width;
        self.height = height;
    }

    fn members(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c[0] == MEMBER)
            .map(move |(i, _)| {
                Vertex::new(
                    (self.min_x + (i % self.width) as i64) as i32,
                    (self.min_y + (i / self.width) as i64) as i32,
                )
            })
    }
}

/// A finite set of lattice vertices together with the multiset of directed
/// edges leaving it.
///
/// Boundary edges live in a flat array so a uniformly random edge is one
/// index draw away; each outside vertex records where its incoming edges
/// sit in that array, so removal is a swap-remove. When a region is set,
/// vertices outside it are never counted as boundary heads.
#[derive(Clone)]
pub struct Cluster {
    grid: Grid,
    edges: Vec<Edge>,
    size: usize,
    region: Option<StripRegion>,
}

impl Cluster {
    pub fn singleton(v: Vertex) -> Self {
        Self::build(v, None)
    }

    /// A singleton whose growth is confined to `region`.
    pub fn singleton_in(v: Vertex, region: StripRegion) -> Result<Self, LatticeError> {
        if !region.contains(v) {
            return Err(LatticeError::OutsideRegion(v));
        }
        Ok(Self::build(v, Some(region)))
    }

    fn build(v: Vertex, region: Option<StripRegion>) -> Self {
        let mut c = Cluster {
            grid: Grid::around(v, 32),
            edges: Vec::new(),
            size: 0,
            region,
        };
        c.insert(v);
        c
    }

    /// Rebuild a cluster from a vertex list (first vertex seeds it).
    pub fn from_vertices(
        vertices: &[Vertex],
        region: Option<StripRegion>,
    ) -> Result<Self, LatticeError> {
        let (&first, rest) = vertices
            .split_first()
            .expect("from_vertices needs at least one vertex");
        let mut c = match region {
            Some(r) => Cluster::singleton_in(first, r)?,
            None => Cluster::singleton(first),
        };
        for &w in rest {
            c.add_vertex(w)?;
        }
        Ok(c)
    }

    pub fn region(&self) -> Option<&StripRegion> {
        self.region.as_ref()
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        self.grid.get(v)[0] == MEMBER
    }

    /// Whether `v` may ever join this cluster.
    #[inline]
    pub fn admits(&self, v: Vertex) -> bool {
        self.region.as_ref().is_none_or(|r| r.contains(v))
    }

    /// Number of directed edges from a member to a non-member.
    #[inline]
    pub fn boundary_count(&self) -> usize {
        self.edges.len()
    }

    /// The `i`-th boundary edge in storage order.
    #[inline]
    pub fn boundary_edge(&self, i: usize) -> BoundaryEdge {
        self.edges[i].into()
    }

    /// Head (outside endpoint) of the `i`-th boundary edge.
    #[inline]
    pub fn boundary_head(&self, i: usize) -> Vertex {
        self.edges[i].head
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = BoundaryEdge> + '_ {
        self.edges.iter().map(|&e| e.into())
    }

    /// Members in row-major order of the storage box.
    pub fn members(&self) -> Vec<Vertex> {
        self.grid.members().collect()
    }

    /// Add `w` to the cluster, updating the boundary in O(1).
    pub fn add_vertex(&mut self, w: Vertex) -> Result<(), LatticeError> {
        if self.contains(w) {
            return Err(LatticeError::AlreadyMember(w));
        }
        if !self.admits(w) {
            return Err(LatticeError::OutsideRegion(w));
        }
        self.insert(w);
        Ok(())
    }

    fn insert(&mut self, w: Vertex) {
        self.grid.cover(w);
        let width = self.grid.width as isize;
        let wi = self.grid.index(w).expect("covered vertex");
        // swap-removes may relocate other edges into w, so re-read each slot
        for side in 0..4 {
            let slot = self.grid.cells[wi][side];
            if slot != NO_EDGE {
                self.remove_edge(slot as usize - 1);
            }
        }
        self.grid.cells[wi] = [MEMBER, NO_EDGE, NO_EDGE, NO_EDGE];
        self.size += 1;
        for dir in Direction::ALL {
            let (dx, dy) = dir.offset();
            let ui = (wi as isize + dx as isize + dy as isize * width) as usize;
            if self.grid.cells[ui][0] == MEMBER {
                continue;
            }
            let u = w.step(dir);
            if !self.admits(u) {
                continue;
            }
            let back = dir.opposite();
            let slot = self.edges.len() as u32 + 1;
            assert!(slot < MEMBER, "boundary edge count exceeds u32");
            self.edges.push(Edge { head: u, back });
            self.grid.cells[ui][back.index()] = slot;
        }
    }

    #[inline]
    fn remove_edge(&mut self, pos: usize) {
        let moved = self.edges.pop().expect("remove from empty boundary");
        if pos < self.edges.len() {
            self.edges[pos] = moved;
            self.grid.get_mut(moved.head)[moved.back.index()] = pos as u32 + 1;
        }
    }

    /// Boundary recomputed from scratch by scanning every member's
    /// neighbors, sorted.
    pub fn recompute_boundary(&self) -> Vec<BoundaryEdge> {
        let mut out: Vec<BoundaryEdge> = self
            .grid
            .members()
            .flat_map(|m| m.neighbors().into_iter().map(move |n| (m, n)))
            .filter(|&(_, n)| !self.contains(n) && self.admits(n))
            .map(|(from, to)| BoundaryEdge { from, to })
            .collect();
        out.sort_unstable();
        out
    }

    /// Incrementally maintained boundary, sorted.
    pub fn sorted_boundary(&self) -> Vec<BoundaryEdge> {
        let mut out: Vec<BoundaryEdge> = self.boundary_edges().collect();
        out.sort_unstable();
        out
    }

    /// Check the positional index against the edge array.
    pub fn index_is_consistent(&self) -> bool {
        let indexed = self.edges.iter().enumerate().all(|(i, e)| {
            self.grid.get(e.head)[e.back.index()] == i as u32 + 1 && !self.contains(e.head)
        });
        let slot_count: usize = self
            .grid
            .cells
            .iter()
            .filter(|c| c[0] != MEMBER)
            .map(|c| c.iter().filter(|&&s| s != NO_EDGE).count())
            .sum();
        indexed && slot_count == self.edges.len()
    }
}

impl std::fmt::Debug for Cluster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Cluster")
            .field("size", &self.size)
            .field("boundary_count", &self.edges.len())
            .field("region", &self.region)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: i32, y: i32) -> Vertex {
        Vertex::new(x, y)
    }

    fn square(k: i32) -> Cluster {
        let verts: Vec<Vertex> = (0..k).flat_map(|y| (0..k).map(move |x| v(x, y))).collect();
        Cluster::from_vertices(&verts, None).unwrap()
    }

    #[test]
    fn singleton_has_four_boundary_edges() {
        let c = Cluster::singleton(v(0, 0));
        assert_eq!(c.boundary_count(), 4);
        assert_eq!(c.size(), 1);
    }

    #[test]
    fn small_shapes() {
        let mut c = Cluster::singleton(v(0, 0));
        c.add_vertex(v(1, 0)).unwrap();
        assert_eq!(c.boundary_count(), 6);

        let mut c = Cluster::singleton(v(0, 0));
        for w in [v(0, 1), v(1, 0), v(1, 1)] {
            c.add_vertex(w).unwrap();
        }
        assert_eq!(c.boundary_count(), 8);

        let tromino = Cluster::from_vertices(&[v(0, 0), v(1, 0), v(2, 0)], None).unwrap();
        assert_eq!(tromino.boundary_count(), 8);
    }

    #[test]
    fn squares_have_perimeter_4k() {
        for k in 1..=4 {
            assert_eq!(square(k).boundary_count(), 4 * k as usize);
        }
    }

    #[test]
    fn re_adding_member_is_an_error() {
        let mut c = Cluster::singleton(v(0, 0));
        assert_eq!(
            c.add_vertex(v(0, 0)),
            Err(LatticeError::AlreadyMember(v(0, 0)))
        );
    }

    #[test]
    fn hole_edges_count() {
        // ring of 8 around a hole: 12 outer + 4 inner
        let ring: Vec<Vertex> = (0..3)
            .flat_map(|y| (0..3).map(move |x| v(x, y)))
            .filter(|&w| w != v(1, 1))
            .collect();
        let c = Cluster::from_vertices(&ring, None).unwrap();
        assert_eq!(c.boundary_count(), 16);
    }

    #[test]
    fn grid_grows_far_from_origin() {
        let mut c = Cluster::singleton(v(0, 0));
        for x in 1..200 {
            c.add_vertex(v(x, 0)).unwrap();
        }
        for y in 1..150 {
            c.add_vertex(v(0, -y)).unwrap();
        }
        assert_eq!(c.size(), 349);
        assert_eq!(c.sorted_boundary(), c.recompute_boundary());
        assert!(c.index_is_consistent());
    }

    #[test]
    fn region_excludes_outside_heads() {
        let strip = StripRegion::new(v(0, 0), v(10, 0), 1.0).unwrap();
        let mut c = Cluster::singleton_in(v(0, 0), strip).unwrap();
        assert_eq!(c.boundary_count(), 4);
        c.add_vertex(v(0, 1)).unwrap();
        // (0,2) and (-1,1) lie outside the strip; (1,0), (-1,0), (0,-1), (1,1) remain
        assert_eq!(c.boundary_count(), 4);
        assert_eq!(
            c.add_vertex(v(0, 2)),
            Err(LatticeError::OutsideRegion(v(0, 2)))
        );
        assert_eq!(c.sorted_boundary(), c.recompute_boundary());
    }

    fn random_growth(choices: &[usize]) -> Cluster {
        let mut c = Cluster::singleton(v(0, 0));
        for &k in choices {
            let head = c.boundary_head(k % c.boundary_count());
            c.add_vertex(head).unwrap();
        }
        c
    }

    proptest! {
        #[test]
        fn incremental_boundary_matches_rescan(choices in proptest::collection::vec(any::<usize>(), 0..300)) {
            let c = random_growth(&choices);
            prop_assert_eq!(c.sorted_boundary(), c.recompute_boundary());
            prop_assert!(c.index_is_consistent());
            prop_assert_eq!(c.size(), choices.len() + 1);
        }

        #[test]
        fn rebuild_is_identical(choices in proptest::collection::vec(any::<usize>(), 0..200)) {
            let c = random_growth(&choices);
            let mut members = c.members();
            // any order of a connected set rebuilds the same state
            members.sort();
            let rebuilt = Cluster::from_vertices(&members, None).unwrap();
            prop_assert_eq!(rebuilt.sorted_boundary(), c.sorted_boundary());
            prop_assert_eq!(rebuilt.size(), c.size());
        }
    }
}
