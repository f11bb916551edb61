//! Flat `key = value` configuration with `[run]`, `[entropy]` and `[scenario]`
//! sections. `#` starts a comment. Lists are comma separated, optionally bracketed;
//! point lists separate points with `;`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use crate::entropy::EntropyPair;
use crate::error::{Error, Result};
use crate::solution::Policy;

use super::{builtin, LemmaConfig, Scenario, Solver};

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub grid: Option<(usize, usize)>,
    pub out: Option<PathBuf>,
    pub dump_fields: bool,
    pub scenarios: Vec<Scenario>,
    pub entropies: Vec<EntropyPair>,
}

const RUN_KEYS: &[&str] = &["grid", "out", "dump_fields"];
const ENTROPY_KEYS: &[&str] = &["name", "table"];
const SCENARIO_KEYS: &[&str] = &[
    "id",
    "builtin",
    "description",
    "states",
    "breaks",
    "policy",
    "solver",
    "center",
    "fan_step",
    "horizon",
    "grid",
    "t1",
    "quartic_r",
    "transfer_r",
    "probe_points",
    "probe_radius",
    "supconv_rho",
    "lemma_point",
    "lemma_r",
    "lemma_rho",
    "lemma_kappa",
    "lemma_delta",
    "refine",
    "entropies",
];

/// `NTxNX`, or a single `N` for a square grid.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("grid {s:?}: expected NTxNX"));
    let s = s.trim();
    let (a, b) = match s.split_once(['x', 'X']) {
        Some((a, b)) => (a, b),
        None => (s, s),
    };
    let nt = a.trim().parse().map_err(|_| bad())?;
    let nx = b.trim().parse().map_err(|_| bad())?;
    Ok((nt, nx))
}

#[derive(Debug)]
struct Section {
    kind: String,
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }
}

fn config_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| config_err(line, "unterminated section header"))?
                .trim();
            if !matches!(name, "run" | "entropy" | "scenario") {
                return Err(config_err(line, format!("unknown section [{name}]")));
            }
            if name == "run" && sections.iter().any(|s| s.kind == "run") {
                return Err(config_err(line, "duplicate [run] section"));
            }
            sections.push(Section { kind: name.to_string(), line, entries: BTreeMap::new() });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected `key = value`, got {content:?}")))?;
        let key = key.trim();
        let section = sections
            .last_mut()
            .ok_or_else(|| config_err(line, format!("key {key:?} outside a section")))?;
        let allowed = match section.kind.as_str() {
            "run" => RUN_KEYS,
            "entropy" => ENTROPY_KEYS,
            _ => SCENARIO_KEYS,
        };
        if !allowed.contains(&key) {
            return Err(config_err(line, format!("unknown key {key:?} in [{}]", section.kind)));
        }
        if section.entries.insert(key.to_string(), (line, value.trim().to_string())).is_some() {
            return Err(config_err(line, format!("duplicate key {key:?}")));
        }
    }
    Ok(sections)
}

fn number(line: usize, v: &str) -> Result<f64> {
    let v = v.trim();
    let parsed = match v.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().and_then(|a| b.trim().parse::<f64>().map(|b| a / b)),
        None => v.parse::<f64>(),
    };
    match parsed {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(config_err(line, format!("not a finite number: {v:?}"))),
    }
}

fn list(line: usize, v: &str) -> Result<Vec<f64>> {
    let inner = v.trim().trim_start_matches('[').trim_end_matches(']').trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(|x| number(line, x)).collect()
}

fn point(line: usize, v: &str) -> Result<(f64, f64)> {
    match list(line, v)?.as_slice() {
        &[t, x] => Ok((t, x)),
        _ => Err(config_err(line, format!("expected a point `t, x`, got {v:?}"))),
    }
}

fn flag(line: usize, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(line, format!("expected true or false, got {v:?}"))),
    }
}

fn scenario(mut sec: Section) -> Result<Scenario> {
    let mut s = match sec.take("builtin") {
        Some((line, id)) => builtin(&id).map_err(|e| config_err(line, e.to_string()))?,
        None => {
            let (line, states) = sec
                .take("states")
                .ok_or_else(|| config_err(sec.line, "scenario needs `states` or `builtin`"))?;
            let states = list(line, &states)?;
            let breaks = match sec.take("breaks") {
                Some((l, b)) => list(l, &b)?,
                None => Vec::new(),
            };
            let policy = match sec.take("policy") {
                Some((l, p)) => parse_policy(l, &p)?,
                None => Policy::Entropic,
            };
            let mut s = Scenario::new("", states, breaks, policy);
            s.lemma = None;
            s
        }
    };
    // overrides apply on top of a builtin as well
    if let Some((line, v)) = sec.take("states") {
        s.states = list(line, &v)?;
    }
    if let Some((line, v)) = sec.take("breaks") {
        s.breaks = list(line, &v)?;
    }
    if let Some((line, v)) = sec.take("policy") {
        s.policy = parse_policy(line, &v)?;
    }
    match sec.take("id") {
        Some((_, id)) => s.id = id,
        None if s.id.is_empty() => return Err(config_err(sec.line, "scenario needs an `id`")),
        None => {}
    }
    if let Some((_, v)) = sec.take("description") {
        s.description = v;
    }
    let center = sec.take("center").map(|(l, v)| point(l, &v)).transpose()?;
    match sec.take("solver") {
        Some((line, v)) => {
            s.solver = match v.as_str() {
                "riemann" => {
                    let default = (0.0, s.breaks.first().copied().unwrap_or(0.5));
                    Solver::Riemann { center: center.unwrap_or(default) }
                }
                "tracking" => Solver::Tracking,
                other => return Err(config_err(line, format!("unknown solver {other:?}"))),
            }
        }
        None if s.states.len() == 2 && s.breaks.len() == 1 => {
            s.solver = Solver::Riemann { center: center.unwrap_or((0.0, s.breaks[0])) };
        }
        None => {
            if center.is_some() {
                return Err(config_err(sec.line, "`center` needs a two-state riemann scenario"));
            }
            s.solver = Solver::Tracking;
        }
    }
    if let Some((line, v)) = sec.take("fan_step") {
        s.fan_step = number(line, &v)?;
    }
    if let Some((line, v)) = sec.take("horizon") {
        if number(line, &v)? != 1.0 {
            return Err(config_err(line, "only horizon = 1 is supported (the unit square)"));
        }
    }
    if let Some((line, v)) = sec.take("grid") {
        s.grid = Some(parse_grid(&v).map_err(|e| config_err(line, e.to_string()))?);
    }
    if let Some((line, v)) = sec.take("t1") {
        s.t1 = number(line, &v)?;
    }
    if let Some((line, v)) = sec.take("quartic_r") {
        s.quartic_r = Some(list(line, &v)?);
    }
    if let Some((line, v)) = sec.take("transfer_r") {
        s.transfer_r = number(line, &v)?;
    }
    if let Some((line, v)) = sec.take("probe_points") {
        s.probe_points = v
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| point(line, p))
            .collect::<Result<_>>()?;
    }
    if let Some((line, v)) = sec.take("probe_radius") {
        s.probe_radius = number(line, &v)?;
    }
    if let Some((line, v)) = sec.take("supconv_rho") {
        s.supconv_rho = number(line, &v)?;
    }
    let lemma_keys = ["lemma_point", "lemma_r", "lemma_rho", "lemma_kappa", "lemma_delta"];
    if lemma_keys.iter().any(|k| sec.entries.contains_key(*k)) {
        let mut l = match (s.lemma.take(), sec.take("lemma_point")) {
            (_, Some((line, v))) => LemmaConfig::at(point(line, &v)?),
            (Some(l), None) => l,
            (None, None) => return Err(config_err(sec.line, "lemma parameters need `lemma_point`")),
        };
        if let Some((line, v)) = sec.take("lemma_r") {
            l.r = number(line, &v)?;
        }
        if let Some((line, v)) = sec.take("lemma_rho") {
            l.rho = number(line, &v)?;
        }
        if let Some((line, v)) = sec.take("lemma_kappa") {
            l.kappas = list(line, &v)?;
        }
        if let Some((line, v)) = sec.take("lemma_delta") {
            l.deltas = list(line, &v)?;
        }
        s.lemma = Some(l);
    }
    if let Some((line, v)) = sec.take("refine") {
        s.refine = match v.as_str() {
            "2" => true,
            "1" => false,
            other => flag(line, other)?,
        };
    }
    if let Some((_, v)) = sec.take("entropies") {
        s.entropies = v
            .trim_start_matches('[')
            .trim_end_matches(']')
            .split(',')
            .map(|e| e.trim().to_string())
            .filter(|e| !e.is_empty())
            .collect();
    }
    debug_assert!(sec.entries.is_empty(), "unhandled keys {:?}", sec.entries.keys());
    s.validate().map_err(|e| config_err(sec.line, e.to_string()))?;
    Ok(s)
}

fn parse_policy(line: usize, v: &str) -> Result<Policy> {
    v.parse().map_err(|e: Error| config_err(line, e.to_string()))
}

/// Parses a configuration; entropy table paths are resolved against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for mut sec in split_sections(text)? {
        match sec.kind.as_str() {
            "run" => {
                if let Some((line, v)) = sec.take("grid") {
                    cfg.grid = Some(parse_grid(&v).map_err(|e| config_err(line, e.to_string()))?);
                }
                if let Some((_, v)) = sec.take("out") {
                    cfg.out = Some(PathBuf::from(v));
                }
                if let Some((line, v)) = sec.take("dump_fields") {
                    cfg.dump_fields = flag(line, &v)?;
                }
            }
            "entropy" => {
                let (_, name) = sec.take("name").ok_or_else(|| config_err(sec.line, "entropy needs a `name`"))?;
                let (line, table) =
                    sec.take("table").ok_or_else(|| config_err(sec.line, "entropy needs a `table`"))?;
                let path = base_dir.join(table);
                let file = File::open(&path).map_err(|e| config_err(line, format!("{}: {e}", path.display())))?;
                let pair = EntropyPair::from_csv(&name, BufReader::new(file))
                    .map_err(|e| config_err(line, format!("{}: {e}", path.display())))?;
                if cfg.entropies.iter().any(|e: &EntropyPair| e.name() == name) {
                    return Err(config_err(sec.line, format!("entropy {name:?} defined twice")));
                }
                cfg.entropies.push(pair);
            }
            _ => cfg.scenarios.push(scenario(sec)?),
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for s in &cfg.scenarios {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::precondition("config", format!("duplicate scenario id {}", s.id)));
        }
    }
    for s in &cfg.scenarios {
        for name in &s.entropies {
            if cfg.entropies.iter().all(|e| e.name() != name) && EntropyPair::builtin(name).is_err() {
                return Err(Error::precondition("config", format!("{}: entropy {name:?} is not registered", s.id)));
            }
        }
    }
    Ok(cfg)
}
