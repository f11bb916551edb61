use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::hj::{
    div_curl_probe, hessian_mass, idempotence_defect, omega_eta_region, semiconvexity_defect, sup_convolution,
    Potential, TouchingParams, ViscositySolution,
};
use crate::par;

use super::{number, EstimateReport};

const SEMICONCAVITY_CEILING: f64 = 16.0;
const DIV_CURL_CEILING: f64 = 16.0;

/// Invariants of a Hopf-Lax solution built from the potential `p`:
/// `h̄ ≥ h` up to `10⁻⁹·scale + 2·mesh·L`, exact agreement on the parabolic boundary,
/// `|∂ₓh̄| ≤ L + 2·mesh`, idempotence within `4·mesh·L`, and a bounded positive
/// Hessian mass on the square at distance `1/8` from the edge.
pub fn hopf_lax_checks(p: &Potential, v: &ViscositySolution) -> Result<Vec<EstimateReport>> {
    let spec = *p.h.spec();
    if v.h_bar.spec() != &spec {
        return Err(Error::precondition("hopf_lax_checks", "potential and viscosity solution on different grids"));
    }
    let mesh = spec.mesh();
    let l = p.lipschitz;
    let scale = p.h.max_abs().max(1.0);
    let rounding = 1e-12 * scale;

    let below = par::ordered_max(
        p.h.values()
            .iter()
            .zip(v.h_bar.values())
            .map(|(h, hb)| h - hb),
    )
    .max(0.0);
    let above = EstimateReport::new("hopf_lax.above_potential", below, 1e-9 * scale + 2.0 * mesh * l, 1.0, 0.0);

    let mut boundary: f64 = 0.0;
    for i in 0..spec.nx {
        boundary = boundary.max((p.h.get(0, i) - v.h_bar.get(0, i)).abs());
    }
    for j in 0..spec.nt {
        boundary = boundary.max((p.h.get(j, 0) - v.h_bar.get(j, 0)).abs());
        boundary = boundary.max((p.h.get(j, spec.nx - 1) - v.h_bar.get(j, spec.nx - 1)).abs());
    }
    let boundary = EstimateReport::new("hopf_lax.boundary", boundary, 0.0, 1.0, 0.0);

    let slope = v.max_x_slope();
    let lipschitz = EstimateReport::new("hopf_lax.lipschitz", slope, l + 2.0 * mesh, 1.0, 0.0);

    let idem = idempotence_defect(v)?;
    let idempotence = EstimateReport::new("hopf_lax.idempotence", idem, 4.0 * mesh * l, 1.0, rounding);

    let margin = spec.rect().width_x().min(spec.rect().width_t()) / 8.0;
    let mass = hessian_mass(&v.h_bar, margin);
    let semiconcavity = EstimateReport::new("hopf_lax.semiconcavity", mass, 1.0, SEMICONCAVITY_CEILING, 0.0)
        .with_meta("margin", margin);

    Ok([above, boundary, lipschitz, idempotence, semiconcavity]
        .into_iter()
        .map(|r| r.with_grid(&spec).with_meta("lipschitz", number(l)))
        .collect())
}

/// `semiconvexity_defect(sup_convolution(f, ρ), ρ)` against `10⁻¹⁰·scale`.
pub fn supconv_semiconvexity(f: &ScalarField, rho: f64) -> Result<EstimateReport> {
    let s = sup_convolution(f, rho)?;
    let defect = semiconvexity_defect(&s, rho)?.max(0.0);
    let scale = f.max_abs().max(1.0);
    Ok(EstimateReport::new("supconv.semiconvexity", defect, 1e-10 * scale, 1.0, 0.0)
        .with_grid(f.spec())
        .with_meta("rho", rho))
}

/// One `(η, δ)` sample of the touching construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eta: f64,
    pub delta: f64,
    pub nodes: usize,
    pub inner_inclusion: Option<bool>,
    pub outer_inclusion: bool,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSweep {
    pub center: (usize, usize),
    /// `(v, w)`, the central-difference gradient of `h` at the centre.
    pub tangent: (f64, f64),
    pub r: f64,
    pub rho: f64,
    pub points: Vec<SweepPoint>,
}

impl LemmaSweep {
    /// `omega_eta` counts failed inclusions among the testable ones; `div_curl` carries
    /// the sample with the largest `lhs/rhs`.
    pub fn reports(&self) -> Vec<EstimateReport> {
        let tested = self.points.iter().filter(|p| p.inner_inclusion.is_some()).count();
        let failures = self
            .points
            .iter()
            .map(|p| usize::from(p.inner_inclusion == Some(false)) + usize::from(!p.outer_inclusion))
            .sum::<usize>();
        let mut omega = EstimateReport::new("omega_eta", failures as f64, 0.0, 1.0, 0.0)
            .with_meta("samples", self.points.len())
            .with_meta("inner_testable", tested);
        if tested < self.points.len() {
            omega.flag("inner-untestable");
        }
        let worst = self
            .points
            .iter()
            .max_by(|a, b| (a.lhs / a.rhs).total_cmp(&(b.lhs / b.rhs)))
            .expect("sweep has samples");
        let div = EstimateReport::new("div_curl", worst.lhs, worst.rhs, DIV_CURL_CEILING, 0.0)
            .with_meta("eta", worst.eta)
            .with_meta("delta", worst.delta);
        [omega, div]
            .into_iter()
            .map(|r| r.with_meta("r", self.r).with_meta("rho", self.rho))
            .collect()
    }
}

/// Runs the touching construction at the node nearest `z`: `ζ_a` is the tangent plane
/// of `h` there and `ζ̃ = ζ_a − (1 + δ)|· − z|²/(2r)`. For every pair `(η, δ)` the region
/// `Ω_η` is scanned, its inclusions checked, and the div-curl pair evaluated with
/// `mu_plus_mass`.
pub fn lemma_probe_sweep(
    h: &ScalarField,
    u: &ScalarField,
    mu_plus_mass: f64,
    z: (f64, f64),
    r: f64,
    rho: f64,
    pairs: &[(f64, f64)],
) -> Result<LemmaSweep> {
    let spec = *h.spec();
    if u.spec() != &spec {
        return Err(Error::precondition("lemma_probe_sweep", "h and u on different grids"));
    }
    if pairs.is_empty() {
        return Err(Error::precondition("lemma_probe_sweep", "empty parameter sweep"));
    }
    let j = ((z.0 - spec.t_min) / spec.dt()).round();
    let i = ((z.1 - spec.x_min) / spec.dx()).round();
    if !(j >= 1.0 && i >= 1.0 && (j as usize) + 1 < spec.nt && (i as usize) + 1 < spec.nx) {
        return Err(Error::precondition("lemma_probe_sweep", "centre must be an interior node"));
    }
    let (j, i) = (j as usize, i as usize);
    let v = (h.get(j + 1, i) - h.get(j - 1, i)) / (2.0 * spec.dt());
    let w = (h.get(j, i + 1) - h.get(j, i - 1)) / (2.0 * spec.dx());
    let points = par::map_slice(pairs, |&(eta, delta)| -> Result<SweepPoint> {
        let params = TouchingParams { center: (j, i), v, w, r, delta, rho };
        let region = omega_eta_region(h, &params, eta)?;
        let probe = div_curl_probe(u, &region, eta, delta, r, mu_plus_mass)?;
        Ok(SweepPoint {
            eta,
            delta,
            nodes: region.nodes.len(),
            inner_inclusion: region.inner_inclusion,
            outer_inclusion: region.outer_inclusion,
            lhs: probe.lhs,
            rhs: probe.rhs,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(LemmaSweep { center: (j, i), tangent: (v, w), r, rho, points })
}
