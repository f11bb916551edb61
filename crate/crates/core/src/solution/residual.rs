use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::par;

/// `C∞` bump `exp(−1/(1 − s²))` on `(−1, 1)` and its derivative.
fn bump(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let d = 1.0 - s * s;
    let b = (-1.0 / d).exp();
    (b, -2.0 * s * b / (d * d))
}

/// Nodes in the support of a bump of radius `rho` centred at `c` on a uniform axis,
/// with the bump value, its derivative in the physical variable and the quadrature
/// weight.
fn axis_profile(origin: f64, h: f64, n: usize, c: f64, rho: f64) -> Vec<(usize, f64, f64, f64)> {
    let lo = (((c - rho - origin) / h).floor().max(0.0)) as usize;
    let hi = ((((c + rho - origin) / h).ceil()) as usize).min(n - 1);
    (lo..=hi)
        .filter_map(|k| {
            let s = (origin + k as f64 * h - c) / rho;
            let (b, db) = bump(s);
            let w = if k == 0 || k == n - 1 { 0.5 * h } else { h };
            (b != 0.0 || db != 0.0).then_some((k, b, db / rho, w))
        })
        .collect()
}

/// Largest normalised weak-form defect `|∫ u ∂ₜφ + (u²/2) ∂ₓφ| / ∫|∇φ|` over tensor
/// bumps at three scales and a lattice of interior translates, by the trapezoid rule.
pub fn weak_residual(field: &ScalarField) -> Result<f64> {
    let spec = *field.spec();
    if spec.nt < 8 || spec.nx < 8 {
        return Err(Error::InvalidGrid(format!(
            "weak residual needs at least 8×8 nodes, got {}×{}",
            spec.nt, spec.nx
        )));
    }
    let rect = spec.rect();
    let width = rect.width_t().min(rect.width_x());
    let mesh = spec.mesh();
    let mut tests: Vec<(f64, f64, f64)> = Vec::new();
    for (level, div) in [4.0, 8.0, 16.0].into_iter().enumerate() {
        let rho = width / div;
        if level > 0 && rho < 2.0 * mesh {
            break;
        }
        let step = 0.5 * rho;
        let count = |len: f64| ((len - 2.0 * rho) / step + 1e-9).floor() as usize + 1;
        for a in 0..count(rect.width_t()) {
            for b in 0..count(rect.width_x()) {
                tests.push((rect.t_min + rho + a as f64 * step, rect.x_min + rho + b as f64 * step, rho));
            }
        }
    }
    let values = field.values();
    let nx = spec.nx;
    let defects = par::map_slice(&tests, |&(tc, xc, rho)| {
        let pt = axis_profile(spec.t_min, spec.dt(), spec.nt, tc, rho);
        let px = axis_profile(spec.x_min, spec.dx(), spec.nx, xc, rho);
        let mut integral = 0.0;
        let mut norm = 0.0;
        for &(j, bt, dbt, wt) in &pt {
            let row = &values[j * nx..(j + 1) * nx];
            for &(i, bx, dbx, wx) in &px {
                let u = row[i];
                let w = wt * wx;
                let (gt, gx) = (dbt * bx, bt * dbx);
                integral += w * (u * gt + 0.5 * u * u * gx);
                norm += w * gt.hypot(gx);
            }
        }
        if norm > 0.0 {
            integral.abs() / norm
        } else {
            0.0
        }
    });
    Ok(par::ordered_max(defects).max(0.0))
}
