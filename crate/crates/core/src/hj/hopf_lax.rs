use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Rect, ScalarField};
use crate::par;

/// Samples of a function on the parabolic boundary of a grid rectangle: the initial
/// row and both lateral columns. Corners are shared with the initial row.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub spec: GridSpec,
    pub initial: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl BoundaryData {
    pub fn from_field(h: &ScalarField) -> Self {
        let spec = *h.spec();
        BoundaryData {
            spec,
            initial: h.row(0).to_vec(),
            left: (0..spec.nt).map(|j| h.get(j, 0)).collect(),
            right: (0..spec.nt).map(|j| h.get(j, spec.nx - 1)).collect(),
        }
    }

    /// Lipschitz constants of the initial row and of the lateral columns.
    pub fn lipschitz(&self) -> (f64, f64) {
        let s = &self.spec;
        let lip = |v: &[f64], h: f64| {
            v.windows(2).map(|w| (w[1] - w[0]).abs() / h).fold(0.0, f64::max)
        };
        (
            lip(&self.initial, s.dx()),
            lip(&self.left, s.dt()).max(lip(&self.right, s.dt())),
        )
    }
}

/// The Hopf-Lax viscosity solution together with the minimising boundary points.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscositySolution {
    pub h_bar: ScalarField,
    /// `(s*, y*)` per node; boundary nodes point at themselves.
    pub argmin: Vec<(f64, f64)>,
    pub boundary: BoundaryData,
}

impl ViscositySolution {
    /// Writes `t,x,h_bar,s,y` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let spec = self.h_bar.spec();
        writeln!(w, "t,x,h_bar,s,y")?;
        for j in 0..spec.nt {
            for i in 0..spec.nx {
                let (s, y) = self.argmin[spec.index(j, i)];
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    spec.t(j),
                    spec.x(i),
                    self.h_bar.get(j, i),
                    s,
                    y
                )?;
            }
        }
        Ok(())
    }

    /// Largest discrete `|∂ₓ h̄|` over neighbouring nodes.
    pub fn max_x_slope(&self) -> f64 {
        let spec = self.h_bar.spec();
        let dx = spec.dx();
        par::ordered_max(par::map_range(spec.nt, |j| {
            self.h_bar
                .row(j)
                .windows(2)
                .map(|w| (w[1] - w[0]).abs() / dx)
                .fold(0.0, f64::max)
        }))
    }
}

/// Minimum of `a + m·(y − y0) + (x − y)²/(2T)` over `y ∈ [y0, y1]`.
fn initial_cell(x: f64, t: f64, y0: f64, y1: f64, a: f64, m: f64) -> (f64, f64) {
    let y = (x - m * t).clamp(y0, y1);
    let d = x - y;
    (a + m * (y - y0) + d * d / (2.0 * t), y)
}

/// Minimum of `a + m·(s − s0) + d²/(2(t − s))` over `s ∈ [s0, s1]` for `d ≠ 0`; the cost
/// is convex in `s` and `s1 ≤ t` is allowed because the stationary point lies below `t`.
fn lateral_cell(d: f64, t: f64, s0: f64, s1: f64, a: f64, m: f64) -> (f64, f64) {
    let s = if m < 0.0 { (t - d.abs() / (-2.0 * m).sqrt()).clamp(s0, s1) } else { s0 };
    (a + m * (s - s0) + d * d / (2.0 * (t - s)), s)
}

/// `h̄(t, x) = min { h(s, y) + (x − y)²/(2(t − s)) : (s, y) ∈ ∂₀Q, s < t }` where `h` on
/// the parabolic boundary is the piecewise-linear interpolant of the samples. Each
/// boundary cell is minimised in closed form, so affine data are reproduced exactly.
/// Ties go to the earliest cell: initial row first, then the lateral columns by
/// increasing `s`, left before right. Nodes on the parabolic boundary keep their value.
pub fn hopf_lax(boundary: &BoundaryData, spec: &GridSpec) -> Result<ViscositySolution> {
    spec.validate()?;
    if boundary.spec != *spec {
        return Err(Error::precondition("hopf_lax", "boundary data sampled on a different grid"));
    }
    let (nt, nx) = (spec.nt, spec.nx);
    let (dt, dx) = (spec.dt(), spec.dx());
    let slopes = |v: &[f64], h: f64| -> Vec<f64> { v.windows(2).map(|w| (w[1] - w[0]) / h).collect() };
    let m0 = slopes(&boundary.initial, dx);
    let ml = slopes(&boundary.left, dt);
    let mr = slopes(&boundary.right, dt);
    let rows = par::map_range(nt, |j| {
        let t = spec.t(j);
        let mut vals = Vec::with_capacity(nx);
        let mut args = Vec::with_capacity(nx);
        for i in 0..nx {
            let x = spec.x(i);
            if j == 0 {
                vals.push(boundary.initial[i]);
                args.push((t, x));
                continue;
            }
            if i == 0 || i == nx - 1 {
                vals.push(if i == 0 { boundary.left[j] } else { boundary.right[j] });
                args.push((t, x));
                continue;
            }
            let mut best = f64::INFINITY;
            let mut arg = (f64::NAN, f64::NAN);
            let elapsed = t - spec.t_min;
            for (k, &m) in m0.iter().enumerate() {
                let (v, y) = initial_cell(x, elapsed, spec.x(k), spec.x(k + 1), boundary.initial[k], m);
                if v < best {
                    best = v;
                    arg = (spec.t_min, y);
                }
            }
            for k in 0..j {
                let (s0, s1) = (spec.t(k), spec.t(k + 1));
                for (edge, vals, m) in [(spec.x_min, &boundary.left, &ml), (spec.x_max, &boundary.right, &mr)] {
                    let (v, s) = lateral_cell(x - edge, t, s0, s1, vals[k], m[k]);
                    if v < best {
                        best = v;
                        arg = (s, edge);
                    }
                }
            }
            vals.push(best);
            args.push(arg);
        }
        (vals, args)
    });
    let mut values = Vec::with_capacity(spec.len());
    let mut argmin = Vec::with_capacity(spec.len());
    for (v, a) in rows {
        values.extend(v);
        argmin.extend(a);
    }
    Ok(ViscositySolution {
        h_bar: ScalarField::new(*spec, values)?,
        argmin,
        boundary: boundary.clone(),
    })
}

/// `ζ = ∂ₓ h̄` by central differences, one-sided on the lateral edges.
pub fn entropy_solution_from(v: &ViscositySolution) -> Result<ScalarField> {
    let spec = *v.h_bar.spec();
    if spec.nt < 16 || spec.nx < 16 {
        return Err(Error::InvalidGrid("entropy solution needs at least 16×16 nodes".into()));
    }
    let dx = spec.dx();
    let nx = spec.nx;
    let mut out = vec![0.0; spec.len()];
    par::fill_rows(&mut out, nx, |j, row| {
        let h = v.h_bar.row(j);
        row[0] = (h[1] - h[0]) / dx;
        row[nx - 1] = (h[nx - 1] - h[nx - 2]) / dx;
        for i in 1..nx - 1 {
            row[i] = (h[i + 1] - h[i - 1]) / (2.0 * dx);
        }
    });
    ScalarField::new(spec, out)
}

/// Recomputes the Hopf-Lax solution on an inner sub-grid from the boundary trace of
/// `v` and returns the largest deviation from `v` there.
pub fn idempotence_defect(v: &ViscositySolution) -> Result<f64> {
    let spec = *v.h_bar.spec();
    let j0 = (spec.nt - 1) / 4;
    let i0 = (spec.nx - 1) / 4;
    let i1 = 3 * (spec.nx - 1) / 4;
    if i1 <= i0 + 1 || spec.nt - j0 < 3 {
        return Err(Error::InvalidGrid("grid too small for a sub-square".into()));
    }
    let sub = GridSpec::new(
        Rect::new(spec.t(j0), spec.t_max, spec.x(i0), spec.x(i1)),
        spec.nt - j0,
        i1 - i0 + 1,
    )?;
    let vals: Vec<f64> = (j0..spec.nt)
        .flat_map(|j| (i0..=i1).map(move |i| (j, i)))
        .map(|(j, i)| v.h_bar.get(j, i))
        .collect();
    let inner = ScalarField::new(sub, vals)?;
    let again = hopf_lax(&BoundaryData::from_field(&inner), &sub)?;
    Ok(par::ordered_max(
        inner
            .values()
            .iter()
            .zip(again.h_bar.values())
            .map(|(a, b)| (a - b).abs()),
    )
    .max(0.0))
}
