//! Entropy/flux pairs and the measures they produce.
//!
//! A pair `(η, q)` satisfies `q′(u) = u·η′(u)` with `q(0) = 0`, so that
//! `∂ₜη(u) + ∂ₓq(u)` vanishes wherever a weak solution is smooth.

mod density;
mod kinetic;
mod production;
mod table;

use std::io::BufRead;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use density::{density_fit, log_log_slope, DensityFit};
pub use kinetic::{kinetic_measure, KineticProfile};
pub use production::{nu_exact, production_exact, production_field};
pub use table::MonotoneCubic;

#[derive(Debug, Clone)]
enum Repr {
    Quadratic,
    Linear,
    Quartic,
    Table(Arc<TabulatedPair>),
    Shifted(Arc<EntropyPair>, f64),
}

#[derive(Debug)]
struct TabulatedPair {
    eta: MonotoneCubic,
    /// Flux values at the table knots.
    flux_knots: Vec<f64>,
}

/// An entropy `η` together with its Burgers flux `q`.
#[derive(Debug, Clone)]
pub struct EntropyPair {
    name: String,
    repr: Repr,
}

/// Names accepted by [`EntropyPair::builtin`].
pub const BUILTIN_ENTROPIES: [&str; 3] = ["linear", "quadratic", "quartic"];

impl EntropyPair {
    /// `η = u²/2`, `q = u³/3`.
    pub fn quadratic() -> Self {
        EntropyPair { name: "quadratic".into(), repr: Repr::Quadratic }
    }

    /// `η = u`, `q = u²/2`: the conservation law itself.
    pub fn linear() -> Self {
        EntropyPair { name: "linear".into(), repr: Repr::Linear }
    }

    /// `η = u⁴`, `q = 4u⁵/5`.
    pub fn quartic() -> Self {
        EntropyPair { name: "quartic".into(), repr: Repr::Quartic }
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "quadratic" => Ok(Self::quadratic()),
            "linear" => Ok(Self::linear()),
            "quartic" => Ok(Self::quartic()),
            other => Err(Error::Unsupported(format!("unknown entropy {other:?}"))),
        }
    }

    /// Entropy given by samples `(v, η(v))`, interpolated by a monotone cubic. The flux is
    /// integrated once at the knots and interpolated with its exact derivative `v·η′(v)`.
    pub fn tabulated(name: &str, v: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let eta = MonotoneCubic::new(v, eta)?;
        let (lo, hi) = eta.range();
        let knots = eta.knots().to_vec();
        let base = 0.0_f64.clamp(lo, hi);
        let dq = |w: f64| w * eta.derivative(w);
        // q(0) = 0; when 0 is outside the table the flux is anchored at the nearest end
        let anchor = flux_by_quadrature(&dq, 0.0, base, 1e-12);
        let flux_knots = knots
            .iter()
            .map(|&k| anchor + flux_by_quadrature(&dq, base, k, 1e-12))
            .collect();
        Ok(EntropyPair {
            name: name.to_string(),
            repr: Repr::Table(Arc::new(TabulatedPair { eta, flux_knots })),
        })
    }

    /// Reads `v,eta` rows (a header line is optional).
    pub fn from_csv<R: BufRead>(name: &str, reader: R) -> Result<Self> {
        let mut v = Vec::new();
        let mut e = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected `v,eta`", n + 1)));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    v.push(a);
                    e.push(b);
                }
                _ if n == 0 => continue,
                _ => return Err(Error::Parse(format!("line {}: not a number", n + 1))),
            }
        }
        Self::tabulated(name, v, e)
    }

    /// The pair `w ↦ η(w − c)` with flux `q(w − c) + c·η(w − c)`. This is the entropy
    /// of the Galilean-shifted state `u − c` written in the original frame; for the
    /// quadratic entropy it produces the same measure as the unshifted pair.
    pub fn galilean_shift(&self, c: f64) -> Self {
        EntropyPair {
            name: format!("{}@{c}", self.name),
            repr: Repr::Shifted(Arc::new(self.clone()), c),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eta(&self, u: f64) -> f64 {
        match &self.repr {
            Repr::Quadratic => 0.5 * u * u,
            Repr::Linear => u,
            Repr::Quartic => u.powi(4),
            Repr::Table(t) => t.eta.eval(u),
            Repr::Shifted(p, c) => p.eta(u - c),
        }
    }

    pub fn d_eta(&self, u: f64) -> f64 {
        match &self.repr {
            Repr::Quadratic => u,
            Repr::Linear => 1.0,
            Repr::Quartic => 4.0 * u.powi(3),
            Repr::Table(t) => t.eta.derivative(u),
            Repr::Shifted(p, c) => p.d_eta(u - c),
        }
    }

    pub fn d2_eta(&self, u: f64) -> f64 {
        match &self.repr {
            Repr::Quadratic => 1.0,
            Repr::Linear => 0.0,
            Repr::Quartic => 12.0 * u * u,
            Repr::Table(t) => t.eta.second_derivative(u),
            Repr::Shifted(p, c) => p.d2_eta(u - c),
        }
    }

    pub fn flux(&self, u: f64) -> f64 {
        match &self.repr {
            Repr::Quadratic => u * u * u / 3.0,
            Repr::Linear => 0.5 * u * u,
            Repr::Quartic => 0.8 * u.powi(5),
            Repr::Table(t) => {
                let dq = |w: f64| w * t.eta.derivative(w);
                t.eta.hermite(u, &t.flux_knots, dq)
            }
            Repr::Shifted(p, c) => p.flux(u - c) + c * p.eta(u - c),
        }
    }

    /// Chain-rule production density per unit time of a jump `u_l | u_r`:
    /// `−s(η(u_r) − η(u_l)) + q(u_r) − q(u_l)` with `s = (u_l + u_r)/2`.
    pub fn jump_production(&self, u_l: f64, u_r: f64) -> f64 {
        let s = 0.5 * (u_l + u_r);
        -s * (self.eta(u_r) - self.eta(u_l)) + self.flux(u_r) - self.flux(u_l)
    }
}

/// `∫₀ᵘ v·η′(v) dv` (or any integrand `dq`) by adaptive Simpson quadrature.
pub fn flux_by_quadrature(dq: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = dq(a);
    let fb = dq(b);
    let m = 0.5 * (a + b);
    let fm = dq(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(dq, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
