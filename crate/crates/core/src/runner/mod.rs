//! Scenario catalog and the end-to-end pipeline: construct a solution, sample it, build
//! its production measures and potential, and run every verifier in both frames.

use serde::{Deserialize, Serialize};

use crate::entropy::{nu_exact, production_exact, EntropyPair};
use crate::error::{Error, Result};
use crate::estimates::{
    campanato_decay, consistency_report, errorentropy_from, errorvisc_from, hopf_lax_checks, lemma_probe_sweep,
    mesh_tolerance, oleinik_defect, quartic_compactness, stability_report, supconv_semiconvexity,
    time_transfer_check, DecayReport, EstimateReport,
};
use crate::grid::{FrameMap, GridSpec, Rect, ScalarField};
use crate::hj::{entropy_solution_from, hopf_lax, reconstruct_potential, BoundaryData, ViscositySolution};
use crate::measure::DiscreteMeasure;
use crate::solution::{front_tracking, riemann_solution, weak_residual, PiecewiseSolution, Policy, TrackingOptions};

mod catalog;
mod config;
mod output;

pub use catalog::{builtin, catalog};
pub use config::{parse_config, parse_grid, RunConfig};
pub use output::{read_records, render_summary, write_run, Record, RunSummary};

pub const DEFAULT_GRID: (usize, usize) = (256, 256);
pub const DEFAULT_QUARTIC_R: [f64; 3] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Single Riemann problem; the jump (or fan centre) sits at `center`.
    Riemann { center: (f64, f64) },
    Tracking,
}

/// Touching-construction sweep: `η = κ δ⁵ r` for every `κ` and `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaConfig {
    pub point: (f64, f64),
    pub r: f64,
    pub rho: f64,
    pub kappas: Vec<f64>,
    pub deltas: Vec<f64>,
}

impl LemmaConfig {
    pub fn at(point: (f64, f64)) -> Self {
        LemmaConfig { point, r: 0.1, rho: 0.2, kappas: vec![0.1, 0.2, 0.4], deltas: vec![1.0, 0.9, 0.8] }
    }
}

/// One experiment on the unit square `(0, 1)²`, mirrored onto `(-1, 1)²` for the
/// verifiers stated on centred squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub description: String,
    pub states: Vec<f64>,
    pub breaks: Vec<f64>,
    pub policy: Policy,
    pub solver: Solver,
    pub fan_step: f64,
    /// Node counts `(nt, nx)`; the run default applies when absent.
    pub grid: Option<(usize, usize)>,
    pub t1: f64,
    /// `None` uses [`DEFAULT_QUARTIC_R`], skipping radii the grid cannot resolve.
    pub quartic_r: Option<Vec<f64>>,
    pub transfer_r: f64,
    pub probe_points: Vec<(f64, f64)>,
    pub probe_radius: f64,
    pub supconv_rho: f64,
    pub lemma: Option<LemmaConfig>,
    pub refine: bool,
    pub entropies: Vec<String>,
}

impl Scenario {
    pub fn new(id: &str, states: Vec<f64>, breaks: Vec<f64>, policy: Policy) -> Self {
        let solver = if states.len() == 2 && breaks.len() == 1 {
            Solver::Riemann { center: (0.0, breaks[0]) }
        } else {
            Solver::Tracking
        };
        Scenario {
            id: id.to_string(),
            description: String::new(),
            states,
            breaks,
            policy,
            solver,
            fan_step: TrackingOptions::default().fan_step,
            grid: None,
            t1: 0.75,
            quartic_r: None,
            transfer_r: 1.0 / 16.0,
            probe_points: vec![(0.5, 0.5)],
            probe_radius: 0.2,
            supconv_rho: 0.05,
            lemma: None,
            refine: false,
            entropies: vec!["quadratic".into(), "quartic".into()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::precondition("scenario", format!("{}: {msg}", self.id)));
        if self.id.is_empty() || self.id.contains(['/', '\\']) || self.id.starts_with('.') {
            return bad("id must be a plain non-empty name".into());
        }
        if self.states.len() != self.breaks.len() + 1 {
            return bad(format!("{} states need {} breaks", self.states.len(), self.states.len().saturating_sub(1)));
        }
        if matches!(self.solver, Solver::Riemann { .. }) && self.states.len() != 2 {
            return bad("the riemann solver takes exactly two states".into());
        }
        if self.states.iter().chain(&self.breaks).any(|v| !v.is_finite()) {
            return bad("states and breaks must be finite".into());
        }
        if !(self.fan_step > 0.0) {
            return bad("fan_step must be positive".into());
        }
        if !(self.probe_radius > 0.0) {
            return bad("probe_radius must be positive".into());
        }
        Ok(())
    }

    /// The solution on `domain`, which must be the unit square or its centred image.
    pub fn solution(&self, domain: Rect) -> Result<PiecewiseSolution> {
        match self.solver {
            Solver::Riemann { center } => riemann_solution(self.states[0], self.states[1], self.policy, center, domain),
            Solver::Tracking => front_tracking(
                &self.states,
                &self.breaks,
                self.policy,
                domain,
                TrackingOptions { fan_step: self.fan_step, ..TrackingOptions::default() },
            ),
        }
    }
}

/// Grid of the centred frame: an odd node count per axis so that `(0, 0)` is a node and
/// the spacing is dyadic for power-of-two interval counts, which makes the dyadic shifts
/// of the compactness verifier grid multiples (on the cell-centred companion grid).
pub fn centered_grid(nt: usize, nx: usize) -> Result<GridSpec> {
    let odd = |n: usize| if n.is_multiple_of(2) { n + 1 } else { n };
    GridSpec::new(Rect::centered(), odd(nt), odd(nx))
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub grid: (usize, usize),
    /// Extra entropies that scenarios may reference by name.
    pub entropies: Vec<EntropyPair>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { grid: DEFAULT_GRID, entropies: Vec::new() }
    }
}

impl RunOptions {
    fn entropy(&self, name: &str) -> Result<EntropyPair> {
        if let Some(e) = self.entropies.iter().find(|e| e.name() == name) {
            return Ok(e.clone());
        }
        EntropyPair::builtin(name)
    }
}

/// Production measures written next to the reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductionDump {
    pub quadratic: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    /// Total production per referenced entropy.
    pub totals: Vec<(String, f64)>,
    pub weak_residual: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub id: String,
    pub reports: Vec<EstimateReport>,
    pub decays: Vec<DecayReport>,
    pub production: ProductionDump,
    pub u: ScalarField,
    pub viscosity: ViscositySolution,
}

impl ScenarioOutcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.pass) && self.decays.iter().all(|d| d.pass)
    }
}

fn tagged<T>(op: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Precondition { .. } | Error::Verifier { .. } => e,
        other => Error::Verifier { op, source: Box::new(other) },
    })
}

/// Verifier outputs whose constants are compared under refinement.
struct Constants {
    errorvisc: EstimateReport,
    errorentropy: EstimateReport,
    quartic: Vec<EstimateReport>,
    transfer: EstimateReport,
}

fn quartic_radii(s: &Scenario, centered: &GridSpec) -> Vec<f64> {
    match &s.quartic_r {
        Some(r) => r.clone(),
        None => DEFAULT_QUARTIC_R
            .iter()
            .copied()
            .filter(|&r| r >= 4.0 * centered.mesh() * (1.0 - 1e-9))
            .collect(),
    }
}

fn constants(
    s: &Scenario,
    unit: &GridSpec,
    centered: &GridSpec,
    radii: &[f64],
    sol: &PiecewiseSolution,
    sol_c: &PiecewiseSolution,
) -> Result<(Constants, Extras)> {
    let quadratic = EntropyPair::quadratic();
    let u = tagged("sample", sol.sample(unit))?;
    let mu = production_exact(sol, &quadratic);
    let potential = tagged("reconstruct_potential", reconstruct_potential(&u))?;
    let viscosity = tagged("hopf_lax", hopf_lax(&BoundaryData::from_field(&potential.h), unit))?;
    let errorvisc = tagged("verify_errorvisc", errorvisc_from(&potential, &viscosity, &mu, s.t1))?;
    let transfer = tagged("time_transfer_check", time_transfer_check(&u, s.transfer_r))?;

    let u_c = tagged("sample", sol_c.sample(centered))?;
    let mu_c = production_exact(sol_c, &quadratic);
    let p_c = tagged("reconstruct_potential", reconstruct_potential(&u_c))?;
    let v_c = tagged("hopf_lax", hopf_lax(&BoundaryData::from_field(&p_c.h), centered))?;
    let zeta = tagged("verify_errorentropy", entropy_solution_from(&v_c))?;
    let errorentropy = tagged("verify_errorentropy", errorentropy_from(&u_c, &zeta, &mu_c))?;
    let u_q = tagged("sample", sol_c.sample(&centered.cell_centers()?))?;
    let quartic = radii
        .iter()
        .map(|&r| tagged("quartic_compactness", quartic_compactness(&u_q, &mu_c, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        Constants { errorvisc, errorentropy, quartic, transfer },
        Extras { u, mu, potential, viscosity },
    ))
}

struct Extras {
    u: ScalarField,
    mu: DiscreteMeasure,
    potential: crate::hj::Potential,
    viscosity: ViscositySolution,
}

/// Runs every verifier on one scenario.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<ScenarioOutcome> {
    s.validate()?;
    let (nt, nx) = s.grid.unwrap_or(opts.grid);
    let unit = GridSpec::new(Rect::unit(), nt, nx)?;
    let centered = centered_grid(nt, nx)?;
    let sol = s.solution(Rect::unit())?;
    let map = FrameMap::between(Rect::unit(), Rect::centered())?;
    let sol_c = sol.map_frame(&map);
    let radii = quartic_radii(s, &centered);
    let entropies = s
        .entropies
        .iter()
        .map(|n| opts.entropy(n))
        .collect::<Result<Vec<_>>>()?;

    let (c, x) = constants(s, &unit, &centered, &radii, &sol, &sol_c)?;
    let mut reports = Vec::new();
    reports.extend(tagged("hopf_lax", hopf_lax_checks(&x.potential, &x.viscosity))?);
    reports.push(tagged("sup_convolution", supconv_semiconvexity(&x.potential.h, s.supconv_rho))?);

    let mu_plus = x.mu.positive_part().total_mass();
    let oleinik = oleinik_defect(&x.u, unit.t_min);
    let tol = mesh_tolerance(&unit, x.potential.lipschitz);
    reports.push(consistency_report(mu_plus, c.errorvisc.lhs, oleinik, tol).with_grid(&unit));

    if let Some(l) = &s.lemma {
        let pairs: Vec<(f64, f64)> = l
            .deltas
            .iter()
            .flat_map(|&d| l.kappas.iter().map(move |&k| (k * d.powi(5) * l.r, d)))
            .collect();
        let sweep = tagged(
            "lemma_probe_sweep",
            lemma_probe_sweep(&x.potential.h, &x.u, mu_plus, l.point, l.r, l.rho, &pairs),
        )?;
        reports.extend(sweep.reports());
    }

    let refined = if s.refine {
        let unit_f = unit.refined();
        let centered_f = centered.refined();
        Some(constants(s, &unit_f, &centered_f, &radii, &sol, &sol_c)?.0)
    } else {
        None
    };

    let mut measured = vec![c.errorvisc, c.errorentropy];
    measured.extend(c.quartic);
    measured.push(c.transfer);
    if let Some(f) = refined {
        let mut fine = vec![f.errorvisc, f.errorentropy];
        fine.extend(f.quartic);
        fine.push(f.transfer);
        let stab: Vec<EstimateReport> = measured.iter().zip(&fine).map(|(a, b)| stability_report(a, b)).collect();
        measured.extend(stab);
    }
    reports.splice(0..0, measured);

    let mut decays = Vec::new();
    let probe_radii: Vec<f64> = (0..4).map(|k| s.probe_radius / f64::from(1 << k)).collect();
    for &z in &s.probe_points {
        decays.push(tagged("campanato_decay", campanato_decay(&x.u, &x.mu, z, &probe_radii))?);
    }

    let nu = nu_exact(&sol);
    let residual = tagged("weak_residual", weak_residual(&x.u))?;
    for r in reports.iter_mut() {
        r.scenario = s.id.clone();
        if !nu.is_zero() && (r.name == "errorvisc" || r.name == "errorentropy") {
            r.metadata.insert("nu_mass".into(), crate::estimates::number(nu.total_mass()));
        }
    }
    for d in decays.iter_mut() {
        d.scenario = s.id.clone();
    }
    let production = ProductionDump {
        totals: entropies
            .iter()
            .map(|e| (e.name().to_string(), production_exact(&sol, e).total_mass()))
            .collect(),
        quadratic: x.mu,
        nu,
        weak_residual: residual,
    };
    Ok(ScenarioOutcome {
        id: s.id.clone(),
        reports,
        decays,
        production,
        u: x.u,
        viscosity: x.viscosity,
    })
}

/// Runs scenarios concurrently; outcomes come back in input order.
pub fn run_all(scenarios: &[Scenario], opts: &RunOptions) -> Result<Vec<ScenarioOutcome>> {
    let mut seen = std::collections::BTreeSet::new();
    for s in scenarios {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::precondition("run", format!("duplicate scenario id {}", s.id)));
        }
    }
    crate::par::map_slice(scenarios, |s| run_scenario(s, opts))
        .into_iter()
        .collect()
}
