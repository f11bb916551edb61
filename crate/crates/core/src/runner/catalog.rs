use crate::error::{Error, Result};
use crate::solution::Policy;

use super::{LemmaConfig, Scenario, Solver};

fn jump_probes() -> Vec<(f64, f64)> {
    vec![(0.5, 0.25), (0.3, 0.75), (0.7, 0.25), (0.5, 0.5)]
}

fn nonentropic(label: &str, a: f64) -> Scenario {
    let mut s = Scenario::new(&format!("nonentropic-jump-a{label}"), vec![-a, a], vec![0.5], Policy::KeepJump);
    s.description = format!("stationary increasing jump -{label} | {label} kept as a non-entropic shock");
    s.probe_points = jump_probes();
    s.lemma = Some(LemmaConfig::at((0.5, 0.5)));
    s
}

/// Built-in scenarios, sorted by id.
pub fn catalog() -> Vec<Scenario> {
    let mut constant = Scenario::new("constant", vec![0.5], vec![], Policy::Entropic);
    constant.description = "constant state u = 1/2".into();
    constant.probe_points = vec![(0.5, 0.5), (0.3, 0.3), (0.7, 0.7)];
    constant.lemma = Some(LemmaConfig::at((0.5, 0.5)));

    let mut shock = Scenario::new("entropic-shock", vec![1.0, -1.0], vec![0.5], Policy::Entropic);
    shock.description = "stationary entropic shock 1 | -1".into();
    shock.probe_points = jump_probes();
    shock.lemma = Some(LemmaConfig::at((0.5, 0.25)));

    let mut fan = Scenario::new("rarefaction", vec![-1.0, 1.0], vec![0.5], Policy::Entropic);
    fan.description = "centred rarefaction fan from -1 | 1".into();
    fan.solver = Solver::Riemann { center: (0.0, 0.5) };
    fan.probe_points = vec![(0.7, 0.5), (0.8, 0.6), (0.75, 0.45)];
    fan.lemma = Some(LemmaConfig::at((0.6, 0.55)));

    let mut merge = Scenario::new("three-state-merge", vec![1.0, 0.0, -1.0], vec![0.25, 0.75], Policy::Entropic);
    merge.description = "two entropic shocks 1 | 0 | -1 that merge at t = 1/2".into();
    merge.probe_points = vec![(0.8, 0.2), (0.8, 0.8), (0.5, 0.15), (0.75, 0.5)];
    merge.probe_radius = 0.15;
    merge.lemma = Some(LemmaConfig::at((0.5, 0.1)));

    let mut mixed = Scenario::new("mixed-fronts", vec![1.0, 0.0, 0.4], vec![0.2, 0.4], Policy::KeepJump);
    mixed.description = "entropic shock 1 | 0 overtaking a non-entropic jump 0 | 0.4".into();
    mixed.probe_points = vec![(0.5, 0.15), (0.3, 0.8), (0.8, 0.9), (0.1, 0.42)];
    mixed.probe_radius = 0.1;
    mixed.lemma = Some(LemmaConfig::at((0.25, 0.45)));

    let mut all = vec![
        constant,
        shock,
        fan,
        nonentropic("1", 1.0),
        nonentropic("0.5", 0.5),
        nonentropic("0.25", 0.25),
        nonentropic("0.125", 0.125),
        merge,
        mixed,
    ];
    all.sort_by(|a, b| a.id.cmp(&b.id));
    all
}

pub fn builtin(id: &str) -> Result<Scenario> {
    catalog()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::Unsupported(format!("no built-in scenario {id:?}")))
}
