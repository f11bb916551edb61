use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::measure::{Atom, DiscreteMeasure, Segment};
use crate::par;
use crate::solution::{Front, PiecewiseSolution};

use super::EntropyPair;

fn front_segment(f: &Front, density: f64) -> Option<Segment> {
    Segment::new((f.t_start, f.x_start), (f.t_end, f.x_end()), density).ok()
}

fn per_front(sol: &PiecewiseSolution, density: impl Fn(&Front) -> f64) -> DiscreteMeasure {
    let segments = sol
        .fronts()
        .filter_map(|f| front_segment(f, density(f)))
        .collect();
    DiscreteMeasure { bounds: sol.domain, atoms: Vec::new(), segments }.restrict(&sol.domain)
}

/// Entropy production of an exact solution: one line per front with the chain-rule
/// density, nothing on constant states or inside rarefaction fans.
pub fn production_exact(sol: &PiecewiseSolution, pair: &EntropyPair) -> DiscreteMeasure {
    per_front(sol, |f| pair.jump_production(f.left_state, f.right_state))
}

/// Supremal production `ν`: density `|u_r − u_l|³/12` on every front.
pub fn nu_exact(sol: &PiecewiseSolution) -> DiscreteMeasure {
    per_front(sol, |f| f.jump().abs().powi(3) / 12.0)
}

/// Discrete production: for every cell not touching the edge of the grid, an atom at
/// the cell centre carrying the outward flux `∮ (η(u), q(u))·n` of the cell boundary,
/// with the trapezoid rule on each edge.
pub fn production_field(field: &ScalarField, pair: &EntropyPair) -> Result<DiscreteMeasure> {
    let spec = *field.spec();
    if spec.nt < 16 || spec.nx < 16 {
        return Err(Error::InvalidGrid(format!(
            "production needs at least 16×16 nodes, got {}×{}",
            spec.nt, spec.nx
        )));
    }
    let (dt, dx) = (spec.dt(), spec.dx());
    let eta: Vec<f64> = field.values().iter().map(|&u| pair.eta(u)).collect();
    let flux: Vec<f64> = field.values().iter().map(|&u| pair.flux(u)).collect();
    let nx = spec.nx;
    let rows = par::map_range(spec.nt - 3, |r| {
        let j = r + 1;
        (1..nx - 2)
            .map(|i| {
                let k00 = j * nx + i;
                let k01 = k00 + 1;
                let k10 = k00 + nx;
                let k11 = k10 + 1;
                let d_eta = 0.5 * ((eta[k10] + eta[k11]) - (eta[k00] + eta[k01])) * dx;
                let d_q = 0.5 * ((flux[k01] + flux[k11]) - (flux[k00] + flux[k10])) * dt;
                Atom {
                    t: spec.t(j) + 0.5 * dt,
                    x: spec.x(i) + 0.5 * dx,
                    weight: d_eta + d_q,
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(DiscreteMeasure {
        bounds: spec.rect(),
        atoms: rows.into_iter().flatten().collect(),
        segments: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, Rect};
    use crate::solution::{riemann_solution, Policy};
    use approx::assert_relative_eq;

    #[test]
    fn exact_densities_for_shocks_and_jumps() {
        let q = EntropyPair::quadratic();
        let shock = riemann_solution(1.0, -1.0, Policy::Entropic, (0.0, 0.5), Rect::unit()).unwrap();
        let m = production_exact(&shock, &q);
        assert_eq!(m.segments.len(), 1);
        assert_relative_eq!(m.segments[0].density, -2.0 / 3.0, epsilon = 1e-15);
        assert!(m.positive_part().is_zero());

        let jump = riemann_solution(-1.0, 1.0, Policy::KeepJump, (0.0, 0.5), Rect::unit()).unwrap();
        assert_relative_eq!(production_exact(&jump, &q).segments[0].density, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(nu_exact(&jump).total_variation(), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_and_fan_carry_no_production() {
        let q = EntropyPair::quadratic();
        let c = PiecewiseSolution::constant(Rect::unit(), 0.4);
        assert!(production_exact(&c, &q).is_zero());
        let fan = riemann_solution(-1.0, 1.0, Policy::Entropic, (0.0, 0.5), Rect::unit()).unwrap();
        assert!(production_exact(&fan, &q).is_zero());
    }

    #[test]
    fn small_jump_nu() {
        let jump = riemann_solution(0.0, 0.2, Policy::KeepJump, (0.0, 0.5), Rect::unit()).unwrap();
        assert_relative_eq!(nu_exact(&jump).segments[0].density, 0.008 / 12.0, epsilon = 1e-18);
    }

    #[test]
    fn constant_field_has_zero_cells() {
        let u = ScalarField::constant(GridSpec::unit(17).unwrap(), 0.9).unwrap();
        let m = production_field(&u, &EntropyPair::quartic()).unwrap();
        assert_eq!(m.atoms.len(), 14 * 14);
        assert!(m.atoms.iter().all(|a| a.weight == 0.0));
    }

    #[test]
    fn linear_entropy_measures_the_weak_form() {
        // η = u gives ∂ₜu + ∂ₓ(u²/2), which vanishes on a sampled stationary jump
        let g = GridSpec::new(Rect::new(0.0, 1.0, -1.0, 1.0), 64, 64).unwrap();
        let u = ScalarField::from_fn(g, |_, x| if x < 0.0 { -1.0 } else { 1.0 }).unwrap();
        let m = production_field(&u, &EntropyPair::linear()).unwrap();
        assert!(m.total_variation() < 1e-14);
    }
}
