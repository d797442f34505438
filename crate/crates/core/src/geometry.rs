//! Oriented rectangle overlap by the separating-axis test.

use crate::types::{VehicleSpec, VehicleState};

/// A vehicle footprint: centre, heading and half extents.
#[derive(Debug, Clone, Copy)]
pub struct Obb {
    pub cx: f64,
    pub cy: f64,
    /// Unit heading vector.
    pub axis: (f64, f64),
    pub half_len: f64,
    pub half_wid: f64,
}

impl Obb {
    pub fn of(s: &VehicleState, spec: &VehicleSpec) -> Self {
        let (sin, cos) = s.yaw.sin_cos();
        Self {
            cx: s.x,
            cy: s.y,
            axis: (cos, sin),
            half_len: 0.5 * spec.length,
            half_wid: 0.5 * spec.width,
        }
    }

    fn normal(&self) -> (f64, f64) {
        (-self.axis.1, self.axis.0)
    }

    /// Half-width of the projection onto unit axis `n`.
    fn radius_on(&self, n: (f64, f64)) -> f64 {
        let (ax, ay) = self.axis;
        let (nx, ny) = self.normal();
        self.half_len * (ax * n.0 + ay * n.1).abs() + self.half_wid * (nx * n.0 + ny * n.1).abs()
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        let (ax, ay) = self.axis;
        let (nx, ny) = self.normal();
        let l = (ax * self.half_len, ay * self.half_len);
        let w = (nx * self.half_wid, ny * self.half_wid);
        [
            (self.cx + l.0 + w.0, self.cy + l.1 + w.1),
            (self.cx + l.0 - w.0, self.cy + l.1 - w.1),
            (self.cx - l.0 - w.0, self.cy - l.1 - w.1),
            (self.cx - l.0 + w.0, self.cy - l.1 + w.1),
        ]
    }

    /// Whether a point lies inside (or on the boundary of) the rectangle.
    pub fn contains(&self, p: (f64, f64)) -> bool {
        let d = (p.0 - self.cx, p.1 - self.cy);
        let (nx, ny) = self.normal();
        (d.0 * self.axis.0 + d.1 * self.axis.1).abs() <= self.half_len
            && (d.0 * nx + d.1 * ny).abs() <= self.half_wid
    }

    /// Touching boundaries count as overlap.
    pub fn overlaps(&self, other: &Obb) -> bool {
        let t = (other.cx - self.cx, other.cy - self.cy);
        [self.axis, self.normal(), other.axis, other.normal()]
            .into_iter()
            .all(|n| {
                let dist = (t.0 * n.0 + t.1 * n.1).abs();
                dist <= self.radius_on(n) + other.radius_on(n)
            })
    }
}
