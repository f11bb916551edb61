use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::par;

/// Relative fit residual below which a 3×3 quadratic fit counts as clean.
pub const CLEAN_FIT_RATIO: f64 = 1e-3;

/// Least-squares quadratic `c + a·s + b·y + P s² + Q s y + R y²` on the 3×3 stencil
/// `s, y ∈ {−1, 0, 1}`, returned as `(a, b, max residual)`.
fn fit_stencil(v: &[[f64; 3]; 3]) -> (f64, f64, f64) {
    let (mut s0, mut s2, mut y2, mut sf, mut yf, mut syf) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, row) in v.iter().enumerate() {
        for (b, &f) in row.iter().enumerate() {
            let (s, y) = (a as f64 - 1.0, b as f64 - 1.0);
            s0 += f;
            s2 += s * s * f;
            y2 += y * y * f;
            sf += s * f;
            yf += y * f;
            syf += s * y * f;
        }
    }
    let w = 0.5 * (s2 + y2 - 4.0 / 3.0 * s0);
    let p = 0.5 * (w + 0.5 * (s2 - y2));
    let r = 0.5 * (w - 0.5 * (s2 - y2));
    let c = (s0 - 6.0 * w) / 9.0;
    let (a1, b1, q) = (sf / 6.0, yf / 6.0, syf / 4.0);
    let mut resid: f64 = 0.0;
    for (a, row) in v.iter().enumerate() {
        for (b, &f) in row.iter().enumerate() {
            let (s, y) = (a as f64 - 1.0, b as f64 - 1.0);
            let model = c + a1 * s + b1 * y + p * s * s + q * s * y + r * y * y;
            resid = resid.max((f - model).abs());
        }
    }
    (a1, b1, resid)
}

/// Result of [`subsolution_defect`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsolutionProbe {
    /// `max ∂ₜζ + (∂ₓζ)²/2 + δ` over clean nodes; `≤ 0` means no violation seen.
    pub defect: f64,
    pub clean: usize,
    pub total: usize,
}

/// Tests `∂ₜζ + (∂ₓζ)²/2 ≤ −δ` at interior nodes where a 3×3 quadratic fit has
/// residual at most `10⁻³` of the local oscillation (a constant stencil counts as
/// clean). Fails with [`Error::TooRough`] when fewer than 10% of nodes qualify.
pub fn subsolution_defect(zeta: &ScalarField, delta: f64) -> Result<SubsolutionProbe> {
    let spec = *zeta.spec();
    if spec.nt < 16 || spec.nx < 16 {
        return Err(Error::InvalidGrid("subsolution probe needs at least 16×16 nodes".into()));
    }
    let (dt, dx) = (spec.dt(), spec.dx());
    let rows = par::map_range(spec.nt - 2, |r| {
        let j = r + 1;
        let mut best = f64::NEG_INFINITY;
        let mut clean = 0usize;
        for i in 1..spec.nx - 1 {
            let mut v = [[0.0; 3]; 3];
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (a, row) in v.iter_mut().enumerate() {
                for (b, cell) in row.iter_mut().enumerate() {
                    *cell = zeta.get(j + a - 1, i + b - 1);
                    lo = lo.min(*cell);
                    hi = hi.max(*cell);
                }
            }
            let (a1, b1, resid) = fit_stencil(&v);
            if resid <= CLEAN_FIT_RATIO * (hi - lo) || hi == lo {
                clean += 1;
                let (zt, zx) = (a1 / dt, b1 / dx);
                best = best.max(zt + 0.5 * zx * zx + delta);
            }
        }
        (best, clean)
    });
    let total = (spec.nt - 2) * (spec.nx - 2);
    let clean: usize = rows.iter().map(|r| r.1).sum();
    if (clean as f64) < 0.1 * total as f64 {
        return Err(Error::TooRough { clean, total });
    }
    let defect = par::ordered_max(rows.iter().map(|r| r.0));
    Ok(SubsolutionProbe { defect, clean, total })
}

/// Parameters of the touching construction: the affine minorant
/// `ζ_a(z) = h(z₀) + v (t − t₀) + w (x − x₀)` and the paraboloid
/// `ζ̃ = ζ_a − (1 + δ)|z − z₀|²/(2r)`, probed in the ball `B_ρ(z₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TouchingParams {
    pub center: (usize, usize),
    pub v: f64,
    pub w: f64,
    pub r: f64,
    pub delta: f64,
    pub rho: f64,
}

/// Nodes of `Ω_η = B_ρ ∩ {ζ̃ + η ≥ h}` with the inclusion checks
/// `B_{η/3} ⊂ Ω_η ⊂ B_{2(rη/δ)^{1/2}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaRegion {
    pub nodes: Vec<(usize, usize)>,
    pub eta: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// `None` when no node other than the centre lies within `η/3`.
    pub inner_inclusion: Option<bool>,
    pub outer_inclusion: bool,
    /// Largest distance from the centre to a node of the region.
    pub max_distance: f64,
}

impl OmegaRegion {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn omega_eta_region(h: &ScalarField, p: &TouchingParams, eta: f64) -> Result<OmegaRegion> {
    let spec = *h.spec();
    let (j0, i0) = p.center;
    if j0 >= spec.nt || i0 >= spec.nx {
        return Err(Error::precondition("omega_eta_region", "centre outside the grid"));
    }
    if !(p.r > 0.0 && p.delta > 0.0 && p.rho > 0.0 && eta > 0.0) {
        return Err(Error::precondition("omega_eta_region", "r, delta, rho and eta must be positive"));
    }
    let (t0, x0) = spec.point(j0, i0);
    let h0 = h.get(j0, i0);
    let inner_radius = eta / 3.0;
    let outer_radius = 2.0 * (p.r * eta / p.delta).sqrt();
    let mut nodes = Vec::new();
    let mut inner_seen = false;
    let mut inner_ok = true;
    let mut outer_ok = true;
    let mut max_distance: f64 = 0.0;
    let curvature = (1.0 + p.delta) / (2.0 * p.r);
    for j in 0..spec.nt {
        for i in 0..spec.nx {
            let (t, x) = spec.point(j, i);
            let d2 = (t - t0).powi(2) + (x - x0).powi(2);
            let d = d2.sqrt();
            if d >= p.rho {
                continue;
            }
            let tilde = h0 + p.v * (t - t0) + p.w * (x - x0) - curvature * d2;
            let inside = tilde + eta >= h.get(j, i);
            if d < inner_radius && (j, i) != p.center {
                inner_seen = true;
                inner_ok &= inside;
            }
            if inside {
                nodes.push((j, i));
                max_distance = max_distance.max(d);
                outer_ok &= d < outer_radius;
            }
        }
    }
    Ok(OmegaRegion {
        nodes,
        eta,
        inner_radius,
        outer_radius,
        inner_inclusion: inner_seen.then_some(inner_ok),
        outer_inclusion: outer_ok,
        max_distance,
    })
}

/// Both sides of the div-curl bound, without constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivCurlProbe {
    /// `(mean over Ω of (u − ⟨u⟩)²)²`.
    pub lhs: f64,
    /// `(η/(δr))^{1/2} + μ₊/η`.
    pub rhs: f64,
}

pub fn div_curl_probe(
    u: &ScalarField,
    region: &OmegaRegion,
    eta: f64,
    delta: f64,
    r: f64,
    mu_plus_mass: f64,
) -> Result<DivCurlProbe> {
    if region.is_empty() {
        return Err(Error::precondition("div_curl_probe", "empty region"));
    }
    let n = region.nodes.len() as f64;
    let mean = par::ordered_sum(region.nodes.iter().map(|&(j, i)| u.get(j, i))) / n;
    let var = par::ordered_sum(region.nodes.iter().map(|&(j, i)| (u.get(j, i) - mean).powi(2))) / n;
    Ok(DivCurlProbe {
        lhs: var * var,
        rhs: (eta / (delta * r)).sqrt() + mu_plus_mass / eta,
    })
}

/// Interior nodes `z` at which `h − ζ`, restricted to the closed ball of radius `rho`
/// around `z` (which must fit in the grid), attains its minimum at `z`.
pub fn interior_minima(h: &ScalarField, zeta: &ScalarField, rho: f64) -> Result<Vec<(usize, usize)>> {
    let diff = h.zip_with(zeta, |a, b| a - b)?;
    let spec = *h.spec();
    let kt = (rho / spec.dt()).floor() as usize;
    let kx = (rho / spec.dx()).floor() as usize;
    if kt == 0 || kx == 0 || 2 * kt >= spec.nt || 2 * kx >= spec.nx {
        return Err(Error::precondition("interior_minima", "ball radius must span at least one cell and fit in the grid"));
    }
    let rows = par::map_range(spec.nt, |j| {
        let mut found = Vec::new();
        if j < kt || j + kt >= spec.nt {
            return found;
        }
        for i in kx..spec.nx - kx {
            let c = diff.get(j, i);
            let mut is_min = true;
            'ball: for jj in j - kt..=j + kt {
                for ii in i - kx..=i + kx {
                    let dt = (jj as f64 - j as f64) * spec.dt();
                    let dx = (ii as f64 - i as f64) * spec.dx();
                    if dt * dt + dx * dx > rho * rho {
                        continue;
                    }
                    if diff.get(jj, ii) < c {
                        is_min = false;
                        break 'ball;
                    }
                }
            }
            if is_min {
                found.push((j, i));
            }
        }
        found
    });
    Ok(rows.into_iter().flatten().collect())
}
