//! Hamilton-Jacobi side of the picture: the potential `h` of a weak solution solves
//! `∂ₜh + (∂ₓh)²/2 = 0` almost everywhere, and its viscosity counterpart `h̄` is given
//! by the Hopf-Lax formula on the parabolic boundary.

mod hopf_lax;
mod potential;
mod probes;
mod supconv;

pub use hopf_lax::{entropy_solution_from, hopf_lax, idempotence_defect, BoundaryData, ViscositySolution};
pub use potential::{reconstruct_potential, Potential};
pub use probes::{
    div_curl_probe, interior_minima, omega_eta_region, subsolution_defect, DivCurlProbe, OmegaRegion,
    SubsolutionProbe, TouchingParams, CLEAN_FIT_RATIO,
};
pub use supconv::{
    hessian_mass, lipschitz_constants, max_second_difference, semiconvexity_defect, sup_convolution,
};
