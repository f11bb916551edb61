use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::par;

/// Discrete Lipschitz constants `(Lip_t, Lip_x)` from neighbouring differences.
pub fn lipschitz_constants(f: &ScalarField) -> (f64, f64) {
    let spec = f.spec();
    let (dt, dx) = (spec.dt(), spec.dx());
    let lx = par::ordered_max(par::map_range(spec.nt, |j| {
        f.row(j).windows(2).map(|w| (w[1] - w[0]).abs() / dx).fold(0.0, f64::max)
    }));
    let lt = par::ordered_max(par::map_range(spec.nt - 1, |j| {
        f.row(j)
            .iter()
            .zip(f.row(j + 1))
            .map(|(a, b)| (b - a).abs() / dt)
            .fold(0.0, f64::max)
    }));
    (lt.max(0.0), lx.max(0.0))
}

/// `f_ρ(z) = max_w f(w) − |z − w|²/(2ρ)` over all nodes `w`.
///
/// Along grid lines `f(w) ≤ f(z) + Lip·|z − w|` with `Lip² = Lip_t² + Lip_x²`, so
/// nodes farther than `2ρ·Lip` can never beat `w = z` and are skipped.
pub fn sup_convolution(f: &ScalarField, rho: f64) -> Result<ScalarField> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::precondition("sup_convolution", format!("rho must be positive, got {rho}")));
    }
    let spec = *f.spec();
    let (lt, lx) = lipschitz_constants(f);
    let reach = 2.0 * rho * lt.hypot(lx) * (1.0 + 1e-12);
    let (dt, dx) = (spec.dt(), spec.dx());
    let kt = ((reach / dt).floor() as usize).min(spec.nt - 1);
    let kx = ((reach / dx).floor() as usize).min(spec.nx - 1);
    let inv = 1.0 / (2.0 * rho);
    // |z − w|² depends only on the index offsets
    let wt: Vec<f64> = (0..=kt).map(|a| (a as f64 * dt).powi(2) * inv).collect();
    let wx: Vec<f64> = (0..=kx).map(|b| (b as f64 * dx).powi(2) * inv).collect();
    let nx = spec.nx;
    let mut out = vec![0.0; spec.len()];
    par::fill_rows(&mut out, nx, |j, row| {
        let j_lo = j.saturating_sub(kt);
        let j_hi = (j + kt).min(spec.nt - 1);
        for (i, o) in row.iter_mut().enumerate() {
            let i_lo = i.saturating_sub(kx);
            let i_hi = (i + kx).min(nx - 1);
            let mut best = f64::NEG_INFINITY;
            for jj in j_lo..=j_hi {
                let pt = wt[jj.abs_diff(j)];
                let src = f.row(jj);
                for ii in i_lo..=i_hi {
                    let v = src[ii] - pt - wx[ii.abs_diff(i)];
                    if v > best {
                        best = v;
                    }
                }
            }
            *o = best;
        }
    });
    ScalarField::new(spec, out)
}

const DIRECTIONS: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];
const STRIDES: [i64; 3] = [1, 2, 4];

/// Visits every midpoint configuration `(mid, a = mid − k·d, b = mid + k·d)` inside
/// the grid and reduces `g(f(mid), f(a), f(b), |a − b|²)` by maximum.
fn midpoint_max(f: &ScalarField, g: impl Fn(f64, f64, f64, f64) -> f64 + Sync + Send) -> f64 {
    let spec = *f.spec();
    let (nt, nx) = (spec.nt as i64, spec.nx as i64);
    let (dt, dx) = (spec.dt(), spec.dx());
    let rows = par::map_range(spec.nt, |j| {
        let j = j as i64;
        let mut best = f64::NEG_INFINITY;
        for (dj, di) in DIRECTIONS {
            for k in STRIDES {
                let (sj, si) = (k * dj, k * di);
                if j - sj < 0 || j + sj >= nt {
                    continue;
                }
                let d2 = (2.0 * sj as f64 * dt).powi(2) + (2.0 * si as f64 * dx).powi(2);
                for i in si.abs()..nx - si.abs() {
                    let m = f.get(j as usize, i as usize);
                    let a = f.get((j - sj) as usize, (i - si) as usize);
                    let b = f.get((j + sj) as usize, (i + si) as usize);
                    best = best.max(g(m, a, b, d2));
                }
            }
        }
        best
    });
    par::ordered_max(rows)
}

/// `max f(mid) − (f(a) + f(b))/2 − |a − b|²/(8r)` over axis and diagonal midpoint
/// triples with strides 1, 2 and 4. Nonpositive (up to rounding) when `f` is
/// `(1/r)`-semiconvex on these triples.
pub fn semiconvexity_defect(f: &ScalarField, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::precondition("semiconvexity_defect", "r must be positive"));
    }
    Ok(midpoint_max(f, |m, a, b, d2| m - 0.5 * (a + b) - d2 / (8.0 * r)))
}

/// Largest directional second difference `(f(a) + f(b) − 2f(mid))/|b − mid|²`, an upper
/// bound on the Hessian when `f` is semiconcave.
pub fn max_second_difference(f: &ScalarField) -> f64 {
    midpoint_max(f, |m, a, b, d2| (a + b - 2.0 * m) / (0.25 * d2))
}

/// Cell-area sum, over nodes at `ℓ∞` distance more than `margin` from the grid edge, of
/// the positive part of the largest directional second difference (stride 1). For a
/// semiconcave function this controls `∫ |∇²f|` on the inner square.
pub fn hessian_mass(f: &ScalarField, margin: f64) -> f64 {
    let spec = *f.spec();
    let r = spec.rect();
    let (dt, dx) = (spec.dt(), spec.dx());
    let area = dt * dx;
    let rows = par::map_range(spec.nt, |j| {
        if j == 0 || j + 1 == spec.nt {
            return 0.0;
        }
        let mut sum = 0.0;
        for i in 1..spec.nx - 1 {
            let (t, x) = spec.point(j, i);
            if r.inner_distance(t, x) <= margin {
                continue;
            }
            let m = f.get(j, i);
            let mut worst: f64 = 0.0;
            for (dj, di) in DIRECTIONS {
                let a = f.get((j as i64 - dj) as usize, (i as i64 - di) as usize);
                let b = f.get((j as i64 + dj) as usize, (i as i64 + di) as usize);
                let h2 = (dj as f64 * dt).powi(2) + (di as f64 * dx).powi(2);
                worst = worst.max((a + b - 2.0 * m) / h2);
            }
            sum += worst * area;
        }
        sum
    });
    par::ordered_sum(rows)
}
