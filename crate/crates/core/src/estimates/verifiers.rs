use crate::error::{Error, Result};
use crate::grid::{integrate_nodes, interval_weights, GridSpec, Rect, ScalarField};
use crate::hj::{entropy_solution_from, hopf_lax, reconstruct_potential, BoundaryData, Potential, ViscositySolution};
use crate::measure::DiscreteMeasure;
use crate::par;
use crate::solution::max_upward_slope;

use super::{mesh_tolerance, number, EstimateReport};

pub const ERRORVISC_CEILING: f64 = 2.0;
pub const ERRORENTROPY_CEILING: f64 = 4.0;
pub const QUARTIC_CEILING: f64 = 16.0;
pub const TIME_TRANSFER_CEILING: f64 = 8.0;

/// Ceiling on `max/min` of a constant measured on a grid and on its refinement.
const STABILITY_CEILING: f64 = 1.2;

fn positive_mass(mu: &DiscreteMeasure, rect: &Rect) -> f64 {
    mu.restrict(rect).positive_part().total_mass()
}

fn same_rect(a: &Rect, b: &Rect) -> bool {
    let tol = 1e-12 * a.scale();
    (a.t_min - b.t_min).abs() <= tol
        && (a.t_max - b.t_max).abs() <= tol
        && (a.x_min - b.x_min).abs() <= tol
        && (a.x_max - b.x_max).abs() <= tol
}

fn require_centered(op: &'static str, spec: &GridSpec) -> Result<()> {
    if same_rect(&spec.rect(), &Rect::centered()) {
        Ok(())
    } else {
        Err(Error::precondition(op, "field must live on the centred square (-1, 1)²"))
    }
}

/// `sup |h − h̄|` over rows with `t ≤ t₁` against `μ₊(Q)^{1/8}`, reusing a potential and
/// its Hopf-Lax solution.
pub fn errorvisc_from(
    potential: &Potential,
    visc: &ViscositySolution,
    mu: &DiscreteMeasure,
    t1: f64,
) -> Result<EstimateReport> {
    let spec = *potential.h.spec();
    if !(t1 > spec.t_min && t1 < spec.t_max) {
        return Err(Error::precondition("verify_errorvisc", format!("t1 = {t1} outside the open time range")));
    }
    let cutoff = t1 + 1e-12 * spec.rect().scale();
    let rows: Vec<usize> = (0..spec.nt).filter(|&j| spec.t(j) <= cutoff).collect();
    let lhs = par::ordered_max(par::map_slice(&rows, |&j| {
        potential
            .h
            .row(j)
            .iter()
            .zip(visc.h_bar.row(j))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }))
    .max(0.0);
    let mu_plus = positive_mass(mu, &spec.rect());
    let report = EstimateReport::new(
        "errorvisc",
        lhs,
        mu_plus.powf(0.125),
        ERRORVISC_CEILING,
        mesh_tolerance(&spec, potential.lipschitz),
    );
    Ok(report
        .with_grid(&spec)
        .with_meta("t1", t1)
        .with_meta("mu_plus_mass", number(mu_plus))
        .with_meta("lipschitz", number(potential.lipschitz)))
}

pub fn verify_errorvisc(u: &ScalarField, mu: &DiscreteMeasure, t1: f64) -> Result<EstimateReport> {
    let p = reconstruct_potential(u)?;
    let v = hopf_lax(&BoundaryData::from_field(&p.h), u.spec())?;
    errorvisc_from(&p, &v, mu, t1)
}

/// `∫_{Q_{3/4}} |u − ζ|` against `(1 + |μ|(Q₁))^{1/5} μ₊(Q₁)^{1/64}` for a given
/// entropy solution `ζ` on the centred square.
pub fn errorentropy_from(u: &ScalarField, zeta: &ScalarField, mu: &DiscreteMeasure) -> Result<EstimateReport> {
    let spec = *u.spec();
    require_centered("verify_errorentropy", &spec)?;
    if zeta.spec() != u.spec() {
        return Err(Error::precondition("verify_errorentropy", "u and zeta on different grids"));
    }
    let inner = Rect::new(-0.75, 0.75, -0.75, 0.75);
    let lhs = integrate_nodes(&spec, &inner, |j, i| (u.get(j, i) - zeta.get(j, i)).abs());
    let q1 = Rect::centered();
    let restricted = mu.restrict(&q1);
    let total = restricted.total_variation();
    let plus = restricted.positive_part().total_mass();
    let rhs = (1.0 + total).powf(0.2) * plus.powf(1.0 / 64.0);
    let report = EstimateReport::new(
        "errorentropy",
        lhs,
        rhs,
        ERRORENTROPY_CEILING,
        mesh_tolerance(&spec, u.max_abs()),
    );
    Ok(report
        .with_grid(&spec)
        .with_meta("mu_abs_mass", number(total))
        .with_meta("mu_plus_mass", number(plus)))
}

/// Builds `ζ = ∂ₓ h̄` from the potential of `u` and compares.
pub fn verify_errorentropy(u: &ScalarField, mu: &DiscreteMeasure) -> Result<EstimateReport> {
    require_centered("verify_errorentropy", u.spec())?;
    let p = reconstruct_potential(u)?;
    let v = hopf_lax(&BoundaryData::from_field(&p.h), u.spec())?;
    let zeta = entropy_solution_from(&v)?;
    errorentropy_from(u, &zeta, mu)
}

/// `max_ξ ∫_{Q_{3/4}} (u(· + ξ) − u)⁴` over grid shifts with `|ξ|∞ ≤ r/4`, against
/// `r(1 + |μ|(Q₁)) + μ₊(Q₁)^{1/8}/r`, with `μ` given in the centred frame.
///
/// `u` may live on any grid inside `(−1, 1)²` that covers `Q_{3/4}` widened by `r/4`.
/// Node-centred grids put stationary fronts at `x = 0` on a node, whose trace average
/// makes the quartic integrand converge only like `1/k` in the shift length `k`; the
/// cell-centred grid from [`GridSpec::cell_centers`] avoids that.
pub fn quartic_compactness(u: &ScalarField, mu: &DiscreteMeasure, r: f64) -> Result<EstimateReport> {
    let spec = *u.spec();
    if !(r > 0.0 && r < 0.125) {
        return Err(Error::precondition("quartic_compactness", format!("r = {r} outside (0, 1/8)")));
    }
    let min = 4.0 * spec.mesh();
    if r < min * (1.0 - 1e-9) {
        return Err(Error::EmptyShiftSet { r, min });
    }
    let reach = 0.25 * r * (1.0 + 1e-9);
    let grid = spec.rect();
    let slack = 1e-12;
    let needed = 0.75 + 0.25 * r;
    if !(Rect::centered().contains_rect(&grid)
        && grid.t_min <= -needed + slack
        && grid.t_max >= needed - slack
        && grid.x_min <= -needed + slack
        && grid.x_max >= needed - slack)
    {
        return Err(Error::precondition(
            "quartic_compactness",
            "grid must lie in (-1, 1)² and cover Q_{3/4} widened by r/4",
        ));
    }
    let kt = (reach / spec.dt()).floor() as i64;
    let kx = (reach / spec.dx()).floor() as i64;
    let wt = interval_weights(spec.t_min, spec.dt(), spec.nt, -0.75, 0.75);
    let wx = interval_weights(spec.x_min, spec.dx(), spec.nx, -0.75, 0.75);
    let fits = |w: &[(usize, f64)], k: i64, n: usize| {
        let lo = w.first().map_or(0, |p| p.0) as i64;
        let hi = w.last().map_or(0, |p| p.0) as i64;
        lo - k >= 0 && hi + k < n as i64
    };
    if !fits(&wt, kt, spec.nt) || !fits(&wx, kx, spec.nx) {
        return Err(Error::precondition("quartic_compactness", "shifted window leaves the grid"));
    }
    let shifts: Vec<(i64, i64)> = (-kt..=kt)
        .flat_map(|a| (-kx..=kx).map(move |b| (a, b)))
        .filter(|&s| s != (0, 0))
        .collect();
    let values = par::map_slice(&shifts, |&(a, b)| {
        par::ordered_sum(wt.iter().map(|&(j, cj)| {
            let src = u.row((j as i64 + a) as usize);
            let base = u.row(j);
            cj * par::ordered_sum(wx.iter().map(|&(i, ci)| {
                let d = src[(i as i64 + b) as usize] - base[i];
                ci * d * d * d * d
            }))
        }))
    });
    let mut best = 0.0;
    let mut arg = (0, 0);
    for (s, &v) in shifts.iter().zip(&values) {
        if v > best {
            best = v;
            arg = *s;
        }
    }
    let q1 = Rect::centered();
    let restricted = mu.restrict(&q1);
    let total = restricted.total_variation();
    let plus = restricted.positive_part().total_mass();
    let rhs = r * (1.0 + total) + plus.powf(0.125) / r;
    let report = EstimateReport::new("quartic_compactness", best, rhs, QUARTIC_CEILING, 0.0);
    Ok(report
        .with_grid(&spec)
        .with_meta("r", r)
        .with_meta("shift", vec![arg.0 as f64 * spec.dt(), arg.1 as f64 * spec.dx()])
        .with_meta("shift_count", shifts.len())
        .with_meta("mu_abs_mass", number(total))
        .with_meta("mu_plus_mass", number(plus)))
}

/// `max [(ζ(t,x) − ζ(t,y))/(x − y) − 1/(t − t_origin)]` over rows with `t > t_origin`
/// and node pairs at least `4·mesh` apart. `−∞` when no row qualifies.
pub fn oleinik_defect(zeta: &ScalarField, t_origin: f64) -> f64 {
    let spec = *zeta.spec();
    let gap = ((4.0 * spec.mesh() / spec.dx()) - 1e-9).ceil().max(1.0) as usize;
    par::ordered_max(par::map_range(spec.nt, |j| {
        let dt = spec.t(j) - t_origin;
        if dt <= 0.0 {
            return f64::NEG_INFINITY;
        }
        max_upward_slope(zeta, j, gap) - 1.0 / dt
    }))
}

/// Smooth cutoff `exp(−1/(1 − s²))` on `(−1, 1)`.
fn cutoff(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Mean of `|a − b|` over all ordered pairs drawn from `values`.
fn mean_pair_distance(values: &mut [f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mut s = 0.0;
    for (k, v) in values.iter().enumerate() {
        s += v * (2.0 * k as f64 - (n as f64 - 1.0));
    }
    2.0 * s / (n * n) as f64
}

struct Window {
    center: (f64, f64),
    lhs: f64,
    d: f64,
}

/// Compares the time increments of the spatial moments `∫ u(t, x) η_r(x − x₀) dx`
/// (with `η_r = r⁻¹η(·/r)` for the standard bump `η`) against the spatial oscillation
/// `D(r) = ⨍_t ⨍_x ⨍_y |u(t,x) − u(t,y)|` on the same window. Windows are centred on a
/// lattice of spacing `r` with `[t₀ − r, t₀ + r] × [x₀ − r, x₀ + r]` inside the grid;
/// the moment is compared at all row pairs with `|s − t| ≤ r`. The reported pair is the
/// window with the largest ratio.
pub fn time_transfer_check(u: &ScalarField, r: f64) -> Result<EstimateReport> {
    let spec = *u.spec();
    if !(r >= 8.0 * spec.mesh() * (1.0 - 1e-9)) {
        return Err(Error::precondition("time_transfer_check", format!("r = {r} below 8·mesh")));
    }
    let rect = spec.rect();
    let slack = 1e-12 * rect.scale();
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        let mut c = Vec::new();
        let mut k = 1;
        loop {
            let x = lo + k as f64 * r;
            if x + r > hi + slack {
                break;
            }
            c.push(x);
            k += 1;
        }
        c
    };
    let centers: Vec<(f64, f64)> = axis(rect.t_min, rect.t_max)
        .into_iter()
        .flat_map(|t| axis(rect.x_min, rect.x_max).into_iter().map(move |x| (t, x)))
        .collect();
    if centers.is_empty() {
        return Err(Error::precondition("time_transfer_check", "no window fits in the grid"));
    }
    let (dt, dx) = (spec.dt(), spec.dx());
    let windows = par::map_slice(&centers, |&(t0, x0)| {
        let win = Rect::new(t0 - r, t0 + r, x0 - r, x0 + r);
        let (j0, j1, i0, i1) = spec
            .nodes_inside_open(&win)
            .expect("windows span at least 16 cells");
        // closed window: pick up nodes sitting exactly on the edges
        let j0 = if j0 > 0 && spec.t(j0 - 1) >= t0 - r - slack { j0 - 1 } else { j0 };
        let j1 = if j1 + 1 < spec.nt && spec.t(j1 + 1) <= t0 + r + slack { j1 + 1 } else { j1 };
        let profile: Vec<(usize, f64)> = (i0..=i1)
            .map(|i| (i, cutoff((spec.x(i) - x0) / r) / r))
            .collect();
        let moments: Vec<f64> = (j0..=j1)
            .map(|j| {
                let row = u.row(j);
                dx * par::ordered_sum(profile.iter().map(|&(i, w)| w * row[i]))
            })
            .collect();
        let mut lhs: f64 = 0.0;
        let reach = (r / dt + 1e-9).floor() as usize;
        for a in 0..moments.len() {
            for b in a + 1..moments.len().min(a + reach + 1) {
                lhs = lhs.max((moments[a] - moments[b]).abs());
            }
        }
        let mut scratch = Vec::with_capacity(i1 - i0 + 1);
        let d = par::ordered_sum((j0..=j1).map(|j| {
            scratch.clear();
            scratch.extend_from_slice(&u.row(j)[i0..=i1]);
            mean_pair_distance(&mut scratch)
        })) / (j1 - j0 + 1) as f64;
        Window { center: (t0, x0), lhs, d }
    });
    let tol = 1e-12 * (1.0 + u.max_abs());
    let mut chosen: Option<&Window> = None;
    let mut best_ratio = f64::NEG_INFINITY;
    let mut stray: Option<&Window> = None;
    for w in &windows {
        if w.d > 0.0 {
            let ratio = w.lhs / w.d;
            if ratio > best_ratio {
                best_ratio = ratio;
                chosen = Some(w);
            }
        } else if w.lhs > tol && stray.is_none_or(|s| w.lhs > s.lhs) {
            stray = Some(w);
        }
    }
    let pick = stray.or(chosen).unwrap_or(&windows[0]);
    let (lhs, rhs) = if stray.is_some() || chosen.is_none() {
        (pick.lhs, 0.0)
    } else {
        (pick.lhs, pick.d)
    };
    let report = EstimateReport::new("time_transfer", lhs, rhs, TIME_TRANSFER_CEILING, tol);
    Ok(report
        .with_grid(&spec)
        .with_meta("r", r)
        .with_meta("window", vec![pick.center.0, pick.center.1])
        .with_meta("windows", windows.len()))
}

/// Checks that `μ₊ = 0`, a vanishing `errorvisc` left-hand side and a nonpositive
/// Oleinik defect (each up to `tolerance`) hold or fail together.
pub fn consistency_report(mu_plus_mass: f64, errorvisc_lhs: f64, oleinik: f64, tolerance: f64) -> EstimateReport {
    let a = mu_plus_mass <= 0.0;
    let b = errorvisc_lhs <= tolerance;
    let c = oleinik <= tolerance;
    let agree = a == b && b == c;
    EstimateReport::new("consistency", if agree { 0.0 } else { 1.0 }, 0.0, 1.0, 0.0)
        .with_meta("mu_plus_zero", a)
        .with_meta("errorvisc_small", b)
        .with_meta("oleinik_small", c)
        .with_meta("oleinik_defect", number(oleinik))
        .with_meta("tolerance", number(tolerance))
}

/// Compares the empirical constants of one verifier on a grid and on its refinement:
/// passes when the larger is at most 1.2 times the smaller.
pub fn stability_report(coarse: &EstimateReport, fine: &EstimateReport) -> EstimateReport {
    let name = format!("{}.stability", coarse.name);
    let report = match (coarse.empirical_constant, fine.empirical_constant) {
        (Some(a), Some(b)) => EstimateReport::new(name, a.max(b), a.min(b), STABILITY_CEILING, 0.0),
        _ => EstimateReport::new(name, 1.0, 0.0, STABILITY_CEILING, 0.0),
    };
    report
        .with_scenario(&coarse.scenario)
        .with_meta("coarse", coarse.empirical_constant.map_or(serde_json::Value::Null, number))
        .with_meta("fine", fine.empirical_constant.map_or(serde_json::Value::Null, number))
}
