use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::par;

/// A potential `h` with `∂ₓh = u` and `∂ₜh = −u²/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub h: ScalarField,
    /// `L = max |u|`, the Lipschitz constant of `h` in `x`.
    pub lipschitz: f64,
    /// Node `(j, i)` where `h = 0`.
    pub anchor: (usize, usize),
    /// Largest disagreement between the two integration orders.
    pub loop_defect: f64,
    /// Threshold the loop defect was checked against.
    pub loop_tolerance: f64,
}

fn total_variation(values: impl Iterator<Item = f64>) -> f64 {
    let mut prev: Option<f64> = None;
    let mut tv = 0.0;
    for v in values {
        if let Some(p) = prev {
            tv += (v - p).abs();
        }
        prev = Some(v);
    }
    tv
}

/// Integrates `(−u²/2, u)` from the corner `(t_min, x_min)`, first in `t` along the
/// left edge and then in `x` along each row, by the trapezoid rule. The opposite
/// order is computed as well; their largest difference is the circulation around
/// corner-anchored rectangles and must stay below the trapezoid error bound
/// `mesh·(max row variation of u + max column variation of u²/2)`.
pub fn reconstruct_potential(u: &ScalarField) -> Result<Potential> {
    let spec = *u.spec();
    let (nt, nx) = (spec.nt, spec.nx);
    let (dt, dx) = (spec.dt(), spec.dx());
    let f = |j: usize, i: usize| -0.5 * u.get(j, i) * u.get(j, i);
    // A node sampled on a front holds the trace average of u, whose square is not the
    // trace average of u². Where a node value is the mean of its neighbours, the check
    // path uses the mean of their squares instead (an O(dx²) change in smooth regions).
    let scale = u.max_abs().max(1.0);
    let g = |j: usize, i: usize| {
        if i == 0 || i + 1 == nx {
            return f(j, i);
        }
        let (a, m, b) = (u.get(j, i - 1), u.get(j, i), u.get(j, i + 1));
        if (m - 0.5 * (a + b)).abs() <= 1e-12 * scale {
            -0.25 * (a * a + b * b)
        } else {
            f(j, i)
        }
    };

    // t first, then x
    let mut left = vec![0.0; nt];
    for j in 1..nt {
        left[j] = left[j - 1] + 0.5 * dt * (f(j - 1, 0) + f(j, 0));
    }
    let mut h1 = vec![0.0; spec.len()];
    par::fill_rows(&mut h1, nx, |j, row| {
        row[0] = left[j];
        for i in 1..nx {
            row[i] = row[i - 1] + 0.5 * dx * (u.get(j, i - 1) + u.get(j, i));
        }
    });

    // x first, then t
    let mut bottom = vec![0.0; nx];
    for i in 1..nx {
        bottom[i] = bottom[i - 1] + 0.5 * dx * (u.get(0, i - 1) + u.get(0, i));
    }
    let columns = par::map_range(nx, |i| {
        let mut col = vec![0.0; nt];
        col[0] = bottom[i];
        for j in 1..nt {
            col[j] = col[j - 1] + 0.5 * dt * (g(j - 1, i) + g(j, i));
        }
        col
    });
    let defect = par::ordered_max((0..spec.len()).map(|k| {
        let (j, i) = spec.node(k);
        (h1[k] - columns[i][j]).abs()
    }))
    .max(0.0);

    let row_tv = par::ordered_max(par::map_range(nt, |j| total_variation(u.row(j).iter().copied())));
    let col_tv = par::ordered_max(par::map_range(nx, |i| total_variation((0..nt).map(|j| g(j, i)))));
    let tolerance = spec.mesh() * (row_tv + col_tv) + 1e-12 * scale * spec.rect().scale();
    if defect > tolerance {
        return Err(Error::NotGradientField { defect, tolerance });
    }
    Ok(Potential {
        h: ScalarField::new(spec, h1)?,
        lipschitz: u.max_abs(),
        anchor: (0, 0),
        loop_defect: defect,
        loop_tolerance: tolerance,
    })
}
