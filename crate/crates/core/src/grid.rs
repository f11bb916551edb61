//! Rectangular node grids in `(t, x)`, sampled fields and open squares.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Closed axis-aligned rectangle `[t_min, t_max] × [x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Rect {
    pub fn new(t_min: f64, t_max: f64, x_min: f64, x_max: f64) -> Self {
        Rect { t_min, t_max, x_min, x_max }
    }

    pub fn unit() -> Self {
        Rect::new(0.0, 1.0, 0.0, 1.0)
    }

    /// The centred square `Q_1 = (-1, 1)²`.
    pub fn centered() -> Self {
        Rect::new(-1.0, 1.0, -1.0, 1.0)
    }

    pub fn width_t(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn width_x(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn contains(&self, t: f64, x: f64) -> bool {
        t >= self.t_min && t <= self.t_max && x >= self.x_min && x <= self.x_max
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.t_min >= self.t_min
            && other.t_max <= self.t_max
            && other.x_min >= self.x_min
            && other.x_max <= self.x_max
    }

    /// `ℓ∞` distance from `(t, x)` to the complement, zero outside.
    pub fn inner_distance(&self, t: f64, x: f64) -> f64 {
        let d = (t - self.t_min)
            .min(self.t_max - t)
            .min(x - self.x_min)
            .min(self.x_max - x);
        d.max(0.0)
    }

    pub fn is_square(&self) -> bool {
        ((self.width_t() - self.width_x()).abs()) <= 1e-12 * self.width_t().abs().max(1.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.t_min + self.t_max),
            0.5 * (self.x_min + self.x_max),
        )
    }

    pub fn scale(&self) -> f64 {
        self.width_t().abs().max(self.width_x().abs()).max(1.0)
    }
}

/// Node grid: `nt × nx` nodes spanning a rectangle, node `j` of the t-axis at
/// `t_min + j·(t_max − t_min)/(nt − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub nt: usize,
    pub nx: usize,
}

impl GridSpec {
    pub fn new(rect: Rect, nt: usize, nx: usize) -> Result<Self> {
        let spec = GridSpec {
            t_min: rect.t_min,
            t_max: rect.t_max,
            x_min: rect.x_min,
            x_max: rect.x_max,
            nt,
            nx,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn unit(n: usize) -> Result<Self> {
        GridSpec::new(Rect::unit(), n, n)
    }

    pub fn centered(n: usize) -> Result<Self> {
        GridSpec::new(Rect::centered(), n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t_min, self.t_max, self.x_min, self.x_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if self.t_max <= self.t_min || self.x_max <= self.x_min {
            return Err(Error::InvalidGrid(format!(
                "empty rectangle t ∈ [{}, {}], x ∈ [{}, {}]",
                self.t_min, self.t_max, self.x_min, self.x_max
            )));
        }
        if self.nt < 2 || self.nx < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 nodes per axis, got {}×{}",
                self.nt, self.nx
            )));
        }
        Ok(())
    }

    pub fn rect(&self) -> Rect {
        Rect::new(self.t_min, self.t_max, self.x_min, self.x_max)
    }

    pub fn len(&self) -> usize {
        self.nt * self.nx
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.nt - 1) as f64
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    /// Largest spacing of the two axes.
    pub fn mesh(&self) -> f64 {
        self.dt().max(self.dx())
    }

    #[inline]
    pub fn t(&self, j: usize) -> f64 {
        if j + 1 == self.nt {
            self.t_max
        } else {
            self.t_min + j as f64 * self.dt()
        }
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    #[inline]
    pub fn index(&self, j: usize, i: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn node(&self, k: usize) -> (usize, usize) {
        (k / self.nx, k % self.nx)
    }

    pub fn point(&self, j: usize, i: usize) -> (f64, f64) {
        (self.t(j), self.x(i))
    }

    /// Doubles the number of intervals on both axes.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            nt: 2 * (self.nt - 1) + 1,
            nx: 2 * (self.nx - 1) + 1,
            ..*self
        }
    }

    /// Grid of cell midpoints: same spacing, one node fewer per axis, inset by half a
    /// cell. Requires at least two intervals per axis.
    pub fn cell_centers(&self) -> Result<GridSpec> {
        let (ht, hx) = (0.5 * self.dt(), 0.5 * self.dx());
        let r = self.rect();
        GridSpec::new(
            Rect::new(r.t_min + ht, r.t_max - ht, r.x_min + hx, r.x_max - hx),
            self.nt - 1,
            self.nx - 1,
        )
    }

    /// Same node counts on another rectangle.
    pub fn with_rect(&self, rect: Rect) -> Result<GridSpec> {
        GridSpec::new(rect, self.nt, self.nx)
    }

    /// Node-index ranges `(j_lo..=j_hi, i_lo..=i_hi)` of nodes strictly inside the open
    /// rectangle, or `None` when no node qualifies.
    pub fn nodes_inside_open(&self, r: &Rect) -> Option<(usize, usize, usize, usize)> {
        let (j0, j1) = open_index_range(r.t_min, r.t_max, self.t_min, self.dt(), self.nt)?;
        let (i0, i1) = open_index_range(r.x_min, r.x_max, self.x_min, self.dx(), self.nx)?;
        Some((j0, j1, i0, i1))
    }
}

fn open_index_range(lo: f64, hi: f64, origin: f64, h: f64, n: usize) -> Option<(usize, usize)> {
    // first index with coordinate > lo, last with coordinate < hi
    let mut a = ((lo - origin) / h).floor().max(-1.0) as i64 + 1;
    let mut b = ((hi - origin) / h).ceil() as i64 - 1;
    let coord = |k: i64| origin + k as f64 * h;
    while a > 0 && coord(a - 1) > lo {
        a -= 1;
    }
    while a < n as i64 && coord(a) <= lo {
        a += 1;
    }
    b = b.min(n as i64 - 1);
    while b + 1 < n as i64 && coord(b + 1) < hi {
        b += 1;
    }
    while b >= 0 && coord(b) >= hi {
        b -= 1;
    }
    if a > b || b < 0 || a >= n as i64 {
        None
    } else {
        Some((a as usize, b as usize))
    }
}

/// Quadrature weights `∫_a^b φ_k(s) ds` of the piecewise-linear hat functions on a
/// uniform axis, so `Σ w_k f_k` integrates the linear interpolant of `f` over `[a, b]`.
pub fn interval_weights(origin: f64, h: f64, n: usize, a: f64, b: f64) -> Vec<(usize, f64)> {
    let mut w = vec![0.0; n];
    let lo = a.max(origin);
    let hi = b.min(origin + (n - 1) as f64 * h);
    if hi <= lo {
        return Vec::new();
    }
    let first = (((lo - origin) / h).floor().max(0.0) as usize).min(n - 2);
    let last = (((hi - origin) / h).ceil() as usize).clamp(first + 1, n - 1);
    for k in first..last {
        let c0 = origin + k as f64 * h;
        let c1 = c0 + h;
        let s0 = lo.max(c0);
        let s1 = hi.min(c1);
        if s1 <= s0 {
            continue;
        }
        // ∫ (c1 - s)/h and ∫ (s - c0)/h over [s0, s1]
        let len = s1 - s0;
        let mid = 0.5 * (s0 + s1);
        w[k] += len * (c1 - mid) / h;
        w[k + 1] += len * (mid - c0) / h;
    }
    w.into_iter()
        .enumerate()
        .filter(|(_, v)| *v != 0.0)
        .collect()
}

/// Node-sampled real function, row-major with `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values for a {}×{} grid, got {}",
                spec.len(),
                spec.nt,
                spec.nx,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at index {k}")));
        }
        Ok(ScalarField { spec, values })
    }

    pub fn constant(spec: GridSpec, c: f64) -> Result<Self> {
        ScalarField::new(spec, vec![c; spec.len()])
    }

    /// Evaluates `f(t, x)` at every node, rows in parallel.
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        spec.validate()?;
        let mut values = vec![0.0; spec.len()];
        par::fill_rows(&mut values, spec.nx, |j, row| {
            let t = spec.t(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(t, spec.x(i));
            }
        });
        ScalarField::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let nx = self.spec.nx;
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            spec: self.spec,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if self.spec != other.spec {
            return Err(Error::InvalidField("grids differ".into()));
        }
        Ok(ScalarField {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        par::ordered_max(self.values.iter().map(|v| v.abs())).max(0.0)
    }

    /// Same values relabelled on another rectangle. Burgers' equation is invariant under
    /// translations and dilations `(t, x) ↦ λ(t, x)`, so a weak solution stays one.
    pub fn relabel(&self, rect: Rect) -> Result<ScalarField> {
        Ok(ScalarField {
            spec: self.spec.with_rect(rect)?,
            values: self.values.clone(),
        })
    }

    /// Integral over `rect` of the bilinear interpolant of the field.
    pub fn integrate_over(&self, rect: &Rect) -> f64 {
        integrate_nodes(&self.spec, rect, |j, i| self.get(j, i))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x,value")?;
        for j in 0..self.spec.nt {
            let t = self.spec.t(j);
            for i in 0..self.spec.nx {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", t, self.spec.x(i), self.get(j, i))?;
            }
        }
        Ok(())
    }

    /// Reads the `t,x,value` format written by [`ScalarField::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<ScalarField> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty csv".into()))??;
        if header.trim() != "t,x,value" {
            return Err(Error::Parse(format!("unexpected header {header:?}")));
        }
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 columns", n + 2)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", n + 2)))
            };
            rows.push((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?));
        }
        if rows.len() < 4 {
            return Err(Error::Parse("too few rows for a grid".into()));
        }
        let t0 = rows[0].0;
        let nx = rows.iter().take_while(|r| r.0 == t0).count();
        if nx < 2 || !rows.len().is_multiple_of(nx) {
            return Err(Error::Parse("rows do not form a rectangular grid".into()));
        }
        let nt = rows.len() / nx;
        let last = rows[rows.len() - 1];
        let spec = GridSpec::new(Rect::new(t0, last.0, rows[0].1, last.1), nt, nx)?;
        ScalarField::new(spec, rows.into_iter().map(|r| r.2).collect())
    }
}

/// `Σ w_j w_i f(j, i)` with tensor hat-function weights over `rect`.
pub fn integrate_nodes(spec: &GridSpec, rect: &Rect, f: impl Fn(usize, usize) -> f64) -> f64 {
    let wt = interval_weights(spec.t_min, spec.dt(), spec.nt, rect.t_min, rect.t_max);
    let wx = interval_weights(spec.x_min, spec.dx(), spec.nx, rect.x_min, rect.x_max);
    par::ordered_sum(wt.iter().map(|&(j, a)| {
        a * par::ordered_sum(wx.iter().map(|&(i, b)| b * f(j, i)))
    }))
}

/// Open square `Q_r(z) = (t − r, t + r) × (x − r, x + r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub center: (f64, f64),
    pub radius: f64,
}

impl Square {
    pub fn new(center: (f64, f64), radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::precondition("square", format!("radius must be positive, got {radius}")));
        }
        Ok(Square { center, radius })
    }

    #[inline]
    pub fn contains(&self, t: f64, x: f64) -> bool {
        (t - self.center.0).abs() < self.radius && (x - self.center.1).abs() < self.radius
    }

    /// Bounds of the square as a (closed) rectangle.
    pub fn rect(&self) -> Rect {
        Rect::new(
            self.center.0 - self.radius,
            self.center.0 + self.radius,
            self.center.1 - self.radius,
            self.center.1 + self.radius,
        )
    }
}

/// Affine map between a square domain and the unit square `(0, 1)²` or the centred
/// square `(-1, 1)²`. Values of a field are unchanged; lengths scale by `factor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMap {
    pub factor: f64,
    pub from: Rect,
    pub to: Rect,
}

impl FrameMap {
    pub fn between(from: Rect, to: Rect) -> Result<Self> {
        if !from.is_square() || !to.is_square() {
            return Err(Error::precondition("frame map", "both rectangles must be squares"));
        }
        Ok(FrameMap { factor: to.width_t() / from.width_t(), from, to })
    }

    pub fn point(&self, t: f64, x: f64) -> (f64, f64) {
        (
            self.to.t_min + (t - self.from.t_min) * self.factor,
            self.to.x_min + (x - self.from.x_min) * self.factor,
        )
    }

    pub fn field(&self, f: &ScalarField) -> Result<ScalarField> {
        if f.spec().rect() != self.from {
            return Err(Error::precondition("frame map", "field does not live on the source rectangle"));
        }
        f.relabel(self.to)
    }
}
