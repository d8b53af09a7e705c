use super::{LatticeError, Vertex};

/// The set of lattice points within `half_width` of the segment from
/// `origin` to `target` (a stadium: the end caps are half-discs).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct StripRegion {
    origin: Vertex,
    target: Vertex,
    half_width: f64,
}

impl StripRegion {
    /// Half-widths below 1 are rejected: the target must stay connected.
    pub fn new(origin: Vertex, target: Vertex, half_width: f64) -> Result<Self, LatticeError> {
        if !(half_width >= 1.0) {
            return Err(LatticeError::StripTooNarrow(half_width));
        }
        Ok(StripRegion {
            origin,
            target,
            half_width,
        })
    }

    pub fn origin(&self) -> Vertex {
        self.origin
    }

    pub fn target(&self) -> Vertex {
        self.target
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Distance from `v` to the segment is at most the half-width.
    pub fn contains(&self, v: Vertex) -> bool {
        let (ox, oy) = (self.origin.x as i64, self.origin.y as i64);
        let (dx, dy) = (self.target.x as i64 - ox, self.target.y as i64 - oy);
        let (px, py) = (v.x as i64 - ox, v.y as i64 - oy);
        let hw2 = self.half_width * self.half_width;
        let len2 = (dx * dx + dy * dy) as i128;
        let dot = (px * dx + py * dy) as i128;
        if len2 == 0 || dot <= 0 {
            return ((px * px + py * py) as f64) <= hw2;
        }
        if dot >= len2 {
            let (qx, qy) = (px - dx, py - dy);
            return ((qx * qx + qy * qy) as f64) <= hw2;
        }
        let cross = (px as i128) * (dy as i128) - (py as i128) * (dx as i128);
        ((cross * cross) as f64) <= hw2 * len2 as f64
    }
}

/// Free-function form of [`StripRegion::contains`].
pub fn strip_contains(s: &StripRegion, v: Vertex) -> bool {
    s.contains(v)
}
