//! Signed measures made of point atoms and constant-density line segments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FrameMap, Rect, Square};
use crate::par;

/// Point mass at `(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub t: f64,
    pub x: f64,
    pub weight: f64,
}

/// Straight segment from `start` to `end` (as `(t, x)` pairs, `start.0 < end.0`) carrying
/// `density` units of mass per unit of `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: (f64, f64),
    pub end: (f64, f64),
    pub density: f64,
}

impl Segment {
    pub fn new(start: (f64, f64), end: (f64, f64), density: f64) -> Result<Self> {
        if !(end.0 > start.0) {
            return Err(Error::InvalidField(format!(
                "segment must advance in t: {start:?} -> {end:?}"
            )));
        }
        if !density.is_finite() {
            return Err(Error::InvalidField("non-finite segment density".into()));
        }
        Ok(Segment { start, end, density })
    }

    pub fn t_extent(&self) -> f64 {
        self.end.0 - self.start.0
    }

    pub fn mass(&self) -> f64 {
        self.density * self.t_extent()
    }

    fn slope(&self) -> f64 {
        (self.end.1 - self.start.1) / (self.end.0 - self.start.0)
    }

    /// Sub-interval `[a, b]` of `t` on which the segment lies inside the given box
    /// (boundary included; the measure does not see the difference).
    fn clip(&self, r: &Rect) -> Option<(f64, f64)> {
        let mut a = self.start.0.max(r.t_min);
        let mut b = self.end.0.min(r.t_max);
        let s = self.slope();
        let x0 = self.start.1 - s * self.start.0;
        if s == 0.0 {
            if x0 < r.x_min || x0 > r.x_max {
                return None;
            }
        } else {
            let ta = (r.x_min - x0) / s;
            let tb = (r.x_max - x0) / s;
            a = a.max(ta.min(tb));
            b = b.min(ta.max(tb));
        }
        (b > a).then_some((a, b))
    }

    fn at(&self, t: f64) -> (f64, f64) {
        (t, self.start.1 + self.slope() * (t - self.start.0))
    }
}

/// Finite signed measure on a bounding rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub bounds: Rect,
    pub atoms: Vec<Atom>,
    pub segments: Vec<Segment>,
}

impl DiscreteMeasure {
    pub fn zero(bounds: Rect) -> Self {
        DiscreteMeasure { bounds, atoms: Vec::new(), segments: Vec::new() }
    }

    pub fn new(bounds: Rect, atoms: Vec<Atom>, segments: Vec<Segment>) -> Result<Self> {
        let slack = 1e-12 * bounds.scale();
        let inside = |t: f64, x: f64| {
            t >= bounds.t_min - slack
                && t <= bounds.t_max + slack
                && x >= bounds.x_min - slack
                && x <= bounds.x_max + slack
        };
        for a in &atoms {
            if !a.weight.is_finite() {
                return Err(Error::InvalidField("non-finite atom weight".into()));
            }
            if !inside(a.t, a.x) {
                return Err(Error::InvalidField(format!("atom at ({}, {}) outside bounds", a.t, a.x)));
            }
        }
        for s in &segments {
            if !inside(s.start.0, s.start.1) || !inside(s.end.0, s.end.1) {
                return Err(Error::InvalidField("segment leaves the bounding rectangle".into()));
            }
        }
        Ok(DiscreteMeasure { bounds, atoms, segments })
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.weight == 0.0) && self.segments.iter().all(|s| s.density == 0.0)
    }

    /// Mass of the open square `q`. Atoms on the boundary of `q` are excluded.
    pub fn square_mass(&self, q: &Square) -> f64 {
        let atoms = par::ordered_sum(
            self.atoms
                .iter()
                .filter(|a| q.contains(a.t, a.x))
                .map(|a| a.weight),
        );
        atoms + self.segment_mass_in(&q.rect())
    }

    /// Mass of the closed rectangle `r`.
    pub fn rect_mass(&self, r: &Rect) -> f64 {
        let atoms = par::ordered_sum(
            self.atoms
                .iter()
                .filter(|a| r.contains(a.t, a.x))
                .map(|a| a.weight),
        );
        atoms + self.segment_mass_in(r)
    }

    fn segment_mass_in(&self, r: &Rect) -> f64 {
        par::ordered_sum(
            self.segments
                .iter()
                .filter_map(|s| s.clip(r).map(|(a, b)| s.density * (b - a))),
        )
    }

    pub fn total_mass(&self) -> f64 {
        par::ordered_sum(self.atoms.iter().map(|a| a.weight))
            + par::ordered_sum(self.segments.iter().map(Segment::mass))
    }

    pub fn total_variation(&self) -> f64 {
        par::ordered_sum(self.atoms.iter().map(|a| a.weight.abs()))
            + par::ordered_sum(self.segments.iter().map(|s| s.mass().abs()))
    }

    pub fn positive_part(&self) -> DiscreteMeasure {
        DiscreteMeasure {
            bounds: self.bounds,
            atoms: self.atoms.iter().copied().filter(|a| a.weight > 0.0).collect(),
            segments: self.segments.iter().copied().filter(|s| s.density > 0.0).collect(),
        }
    }

    pub fn abs(&self) -> DiscreteMeasure {
        DiscreteMeasure {
            bounds: self.bounds,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { weight: a.weight.abs(), ..*a })
                .collect(),
            segments: self
                .segments
                .iter()
                .map(|s| Segment { density: s.density.abs(), ..*s })
                .collect(),
        }
    }

    /// Restriction to the closed rectangle `r`, with segments clipped.
    pub fn restrict(&self, r: &Rect) -> DiscreteMeasure {
        DiscreteMeasure {
            bounds: *r,
            atoms: self.atoms.iter().copied().filter(|a| r.contains(a.t, a.x)).collect(),
            segments: self
                .segments
                .iter()
                .filter_map(|s| {
                    s.clip(r).map(|(a, b)| Segment {
                        start: s.at(a),
                        end: s.at(b),
                        density: s.density,
                    })
                })
                .collect(),
        }
    }

    /// Push-forward under a dilation. Production measures are divergences, so masses
    /// scale like length: atom weights pick up the factor while line densities per
    /// unit `t` stay the same.
    pub fn map_frame(&self, map: &FrameMap) -> DiscreteMeasure {
        let p = |(t, x): (f64, f64)| map.point(t, x);
        DiscreteMeasure {
            bounds: map.to,
            atoms: self
                .atoms
                .iter()
                .map(|a| {
                    let (t, x) = map.point(a.t, a.x);
                    Atom { t, x, weight: a.weight * map.factor }
                })
                .collect(),
            segments: self
                .segments
                .iter()
                .map(|s| Segment { start: p(s.start), end: p(s.end), density: s.density })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: DiscreteMeasure = serde_json::from_str(s)?;
        DiscreteMeasure::new(m.bounds, m.atoms, m.segments)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn atom(t: f64, x: f64, weight: f64) -> Atom {
        Atom { t, x, weight }
    }

    #[test]
    fn atom_at_center_counts() {
        let m = DiscreteMeasure::new(Rect::unit(), vec![atom(0.5, 0.5, 5.0)], vec![]).unwrap();
        let q = Square::new((0.5, 0.5), 0.1).unwrap();
        assert_eq!(m.square_mass(&q), 5.0);
    }

    #[test]
    fn atom_on_edge_is_excluded() {
        let m = DiscreteMeasure::new(Rect::unit(), vec![atom(0.5, 0.75, 5.0)], vec![]).unwrap();
        let q = Square::new((0.5, 0.5), 0.25).unwrap();
        assert_eq!(m.square_mass(&q), 0.0);
    }

    #[test]
    fn stationary_line_through_square() {
        let s = Segment::new((0.0, 0.5), (1.0, 0.5), 2.0 / 3.0).unwrap();
        let m = DiscreteMeasure::new(Rect::unit(), vec![], vec![s]).unwrap();
        let q = Square::new((0.5, 0.5), 0.25).unwrap();
        assert_relative_eq!(m.square_mass(&q), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(m.total_variation(), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn slanted_segment_is_clipped_by_x_edges() {
        // x = t, square (0.4, 0.6) × (0.45, 0.55): inside while t ∈ (0.45, 0.55)
        let s = Segment::new((0.0, 0.0), (1.0, 1.0), 1.0).unwrap();
        let m = DiscreteMeasure::new(Rect::unit(), vec![], vec![s]).unwrap();
        let q = Square::new((0.5, 0.5), 0.1).unwrap();
        assert_relative_eq!(m.square_mass(&q), 0.2, epsilon = 1e-15);
        let r = Rect::new(0.4, 0.6, 0.45, 0.55);
        assert_relative_eq!(m.rect_mass(&r), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn positive_part_and_variation() {
        let m = DiscreteMeasure::new(
            Rect::unit(),
            vec![atom(0.2, 0.2, 1.0), atom(0.3, 0.3, -2.0)],
            vec![],
        )
        .unwrap();
        assert_eq!(m.total_variation(), 3.0);
        let p = m.positive_part();
        assert_eq!(p.atoms, vec![atom(0.2, 0.2, 1.0)]);
        let neg = DiscreteMeasure::new(Rect::unit(), vec![atom(0.3, 0.3, -2.0)], vec![]).unwrap();
        assert!(neg.positive_part().is_zero());
        assert_eq!(neg.positive_part().total_variation(), 0.0);
    }

    #[test]
    fn rejects_atoms_outside_bounds() {
        assert!(DiscreteMeasure::new(Rect::unit(), vec![atom(2.0, 0.5, 1.0)], vec![]).is_err());
        assert!(Segment::new((0.5, 0.0), (0.5, 1.0), 1.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = DiscreteMeasure::new(
            Rect::unit(),
            vec![atom(0.25, 0.75, -0.125)],
            vec![Segment::new((0.0, 0.5), (1.0, 0.5), 2.0 / 3.0).unwrap()],
        )
        .unwrap();
        let text = m.to_json().unwrap();
        assert!(text.contains("\"atoms\"") && text.contains("\"segments\""));
        assert_eq!(DiscreteMeasure::from_json(&text).unwrap(), m);
    }

    #[test]
    fn dilation_scales_atoms_not_line_densities() {
        let m = DiscreteMeasure::new(
            Rect::unit(),
            vec![atom(0.5, 0.5, 1.0)],
            vec![Segment::new((0.0, 0.5), (1.0, 0.5), 0.5).unwrap()],
        )
        .unwrap();
        let map = FrameMap::between(Rect::unit(), Rect::centered()).unwrap();
        let big = m.map_frame(&map);
        assert_relative_eq!(big.total_variation(), 2.0 * m.total_variation(), epsilon = 1e-15);
        assert_eq!(big.atoms[0].t, 0.0);
    }
}
