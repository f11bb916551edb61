//! End-to-end acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use shocklab::entropy::{kinetic_measure, nu_exact, production_exact, production_field, log_log_slope, EntropyPair};
use shocklab::estimates::{
    lemma_probe_sweep, quartic_compactness, supconv_semiconvexity, verify_errorentropy, verify_errorvisc,
    EstimateReport, QUARTIC_CEILING,
};
use shocklab::grid::FrameMap;
use shocklab::hj::{idempotence_defect, reconstruct_potential};
use shocklab::runner::{builtin, catalog, centered_grid, run_all, write_run, Record, RunOptions, Scenario, ScenarioOutcome};
use shocklab::solution::{PiecewiseSolution, Policy};
use shocklab::{GridSpec, Rect};

const AMPLITUDES: [(&str, f64); 4] = [("1", 1.0), ("0.5", 0.5), ("0.25", 0.25), ("0.125", 0.125)];

type Verdict = (bool, String);

struct CatalogRun {
    outcomes: Vec<ScenarioOutcome>,
    elapsed: Duration,
}

fn catalog_run() -> &'static CatalogRun {
    static RUN: OnceLock<CatalogRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let outcomes = run_all(&catalog(), &RunOptions::default()).expect("catalog runs");
        CatalogRun { outcomes, elapsed: start.elapsed() }
    })
}

fn report<'a>(o: &'a ScenarioOutcome, name: &str) -> &'a EstimateReport {
    o.reports
        .iter()
        .find(|r| r.name == name)
        .unwrap_or_else(|| panic!("{}: no {name} report", o.id))
}

fn outcome(id: &str) -> &'static ScenarioOutcome {
    catalog_run().outcomes.iter().find(|o| o.id == id).expect("catalog id")
}

fn centered(sol: &PiecewiseSolution) -> PiecewiseSolution {
    sol.map_frame(&FrameMap::between(Rect::unit(), Rect::centered()).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let s = builtin("nonentropic-jump-a1").unwrap();
    let sol = s.solution(Rect::unit()).unwrap();
    let exact = 2.0_f64.powi(3) / 12.0;
    let mass = |n: usize| {
        let u = sol.sample(&GridSpec::unit(n).unwrap()).unwrap();
        production_field(&u, &EntropyPair::quadratic()).unwrap().total_mass()
    };
    let m512 = mass(512);
    let elapsed = start.elapsed();
    let (e256, e512) = ((mass(256) - exact).abs(), (m512 - exact).abs());
    let ratio = e256 / e512;
    let ok = rel(m512, exact) <= 0.05 && (1.4..=2.6).contains(&ratio) && elapsed < Duration::from_secs(5);
    (ok, format!("mass {m512:.5} vs 2/3, error ratio 256/512 = {ratio:.3}, {:.2?}", elapsed))
}

fn criterion_2() -> Verdict {
    let q = EntropyPair::quadratic();
    let q4 = EntropyPair::quartic();
    let (mut nu_gap, mut q_gap, mut q4_gap, mut fronts) = (0.0_f64, 0.0_f64, 0.0_f64, 0);
    for s in catalog() {
        let sol = s.solution(Rect::unit()).unwrap();
        let mu = production_exact(&sol, &q);
        let nu = nu_exact(&sol);
        assert_eq!(mu.segments.len(), nu.segments.len());
        for (m, n) in mu.segments.iter().zip(&nu.segments) {
            nu_gap = nu_gap.max((m.density.abs() - n.density).abs());
        }
        let mu4 = production_exact(&sol, &q4);
        for (f, (m2, m4)) in sol.fronts().zip(mu.segments.iter().zip(&mu4.segments)) {
            let k = kinetic_measure(f);
            q_gap = q_gap.max((k.integrate_entropy(&q) - m2.density).abs());
            q4_gap = q4_gap.max((k.integrate_entropy(&q4) - m4.density).abs());
            fronts += 1;
        }
    }
    let ok = fronts > 0 && nu_gap <= 1e-12 && q_gap <= 1e-12 && q4_gap <= 1e-8;
    (ok, format!("{fronts} fronts, |nu - |mu|| {nu_gap:.1e}, kinetic gaps {q_gap:.1e} / {q4_gap:.1e}"))
}

fn criterion_3() -> Verdict {
    let mut worst = Vec::new();
    let mut ok = true;
    for o in &catalog_run().outcomes {
        let spec = *o.u.spec();
        let p = reconstruct_potential(&o.u).unwrap();
        let hb = &o.viscosity.h_bar;
        let (l, mesh) = (p.lipschitz, spec.mesh());
        let scale = p.h.max_abs().max(1.0);
        let gap = hb.values().iter().zip(p.h.values()).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
        let edge = (0..spec.nt)
            .flat_map(|j| [(j, 0), (j, spec.nx - 1)])
            .chain((0..spec.nx).map(|i| (0, i)))
            .all(|(j, i)| hb.get(j, i) == p.h.get(j, i));
        let slope = o.viscosity.max_x_slope();
        let idem = idempotence_defect(&o.viscosity).unwrap();
        let here = gap >= -1e-9 * scale - 2.0 * mesh * l
            && edge
            && slope <= l + 2.0 * mesh
            && idem <= 4.0 * mesh * l + 1e-12 * scale;
        if !here {
            worst.push(format!("{}: gap {gap:.2e} slope {slope:.4}/{l:.4} idem {idem:.2e}", o.id));
        }
        ok &= here;
    }
    let detail = if ok { format!("{} scenarios at 256x256", catalog_run().outcomes.len()) } else { worst.join("; ") };
    (ok, detail)
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let mut points = Vec::new();
    let mut ok = true;
    let mut lines = Vec::new();
    for (label, a) in AMPLITUDES {
        let s = builtin(&format!("nonentropic-jump-a{label}")).unwrap();
        let sol = s.solution(Rect::unit()).unwrap();
        let u = sol.sample(&GridSpec::unit(256).unwrap()).unwrap();
        let mu = production_exact(&sol, &EntropyPair::quadratic());
        let r = verify_errorvisc(&u, &mu, 0.75).unwrap();
        let expected = a * a * 0.375;
        ok &= rel(r.lhs, expected) <= 0.02;
        lines.push(format!("a={label}: {:.5}", r.lhs));
        // oracle for the positive mass: density (2a)³/12 on a unit-length line
        points.push(((2.0 * a).powi(3) / 12.0, r.lhs));
    }
    let slope = log_log_slope(&points);
    let elapsed = start.elapsed();
    ok &= slope >= 0.125 && elapsed < Duration::from_secs(30);
    (ok, format!("{}, slope {slope:.4}, {:.2?}", lines.join(" "), elapsed))
}

/// `∫_{Q_{3/4}} |u − ζ|` for the fan that replaces `−a | a` at `t = −1`: `a²τ` per row
/// while the fan stays inside `|x| < 3/4`, clipped afterwards.
fn fan_gap(a: f64) -> f64 {
    let w = 0.75;
    let tau_c = w / a;
    let (lo, hi) = (0.25_f64, 1.75_f64);
    let full_hi = tau_c.clamp(lo, hi);
    let full = 0.5 * a * a * (full_hi * full_hi - lo * lo);
    let clipped_lo = tau_c.clamp(lo, hi);
    let clipped = 2.0 * a * w * (hi - clipped_lo) - w * w * (hi / clipped_lo).ln();
    full + clipped
}

fn criterion_5() -> Verdict {
    let mut ok = true;
    let mut lines = Vec::new();
    for (label, a) in AMPLITUDES {
        let lhs = report(outcome(&format!("nonentropic-jump-a{label}")), "errorentropy").lhs;
        let oracle = fan_gap(a);
        ok &= rel(lhs, oracle) <= 0.05;
        // 1.5a² itself needs the fan to stay inside Q_{3/4}, which fails at a = 1
        if a <= 0.5 {
            ok &= rel(lhs, 1.5 * a * a) <= 0.05;
        }
        lines.push(format!("a={label}: {lhs:.4} (oracle {oracle:.4})"));
    }
    let spec = centered_grid(256, 256).unwrap();
    let mut points = Vec::new();
    for a in [0.4, 0.2, 0.1] {
        let s = Scenario::new("family", vec![-a, a], vec![0.5], Policy::KeepJump);
        let sol = centered(&s.solution(Rect::unit()).unwrap());
        let u = sol.sample(&spec).unwrap();
        let mu = production_exact(&sol, &EntropyPair::quadratic());
        let r = verify_errorentropy(&u, &mu).unwrap();
        ok &= rel(r.lhs, 1.5 * a * a) <= 0.05;
        lines.push(format!("a={a}: {:.4}", r.lhs));
        points.push((mu.positive_part().total_mass(), r.lhs));
    }
    let slope = log_log_slope(&points);
    ok &= slope >= 1.0 / 64.0;
    let mut entropic = 0.0_f64;
    for id in ["constant", "entropic-shock", "rarefaction", "three-state-merge"] {
        entropic = entropic.max(report(outcome(id), "errorentropy").lhs);
    }
    ok &= entropic <= 4.0 * spec.mesh();
    (ok, format!("{}, slope {slope:.4}, entropic max {entropic:.2e}", lines.join(" ")))
}

fn quartic_constant(s: &Scenario, n: usize) -> f64 {
    let sol = centered(&s.solution(Rect::unit()).unwrap());
    let spec = centered_grid(n, n).unwrap().cell_centers().unwrap();
    let u = sol.sample(&spec).unwrap();
    let mu = production_exact(&sol, &EntropyPair::quadratic());
    [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
        .iter()
        .map(|&r| {
            let rep = quartic_compactness(&u, &mu, r).unwrap();
            assert!(rep.pass, "{}: quartic at r = {r} gives {:?}", s.id, rep.empirical_constant);
            rep.empirical_constant.unwrap()
        })
        .fold(0.0, f64::max)
}

fn criterion_6() -> Verdict {
    let mut ok = true;
    let mut lines = Vec::new();
    for s in catalog() {
        let (c, f) = (quartic_constant(&s, 513), quartic_constant(&s, 1025));
        let stable = (c == 0.0 && f == 0.0) || (c.max(f) / c.min(f) <= 1.2);
        ok &= stable && c <= QUARTIC_CEILING && f <= QUARTIC_CEILING;
        lines.push(format!("{} {c:.3}/{f:.3}", s.id));
    }
    (ok, lines.join(", "))
}

fn criterion_7() -> Verdict {
    let mut ok = true;
    let mut lines = Vec::new();
    for o in &catalog_run().outcomes {
        let sol = builtin(&o.id).unwrap().solution(Rect::unit()).unwrap();
        let on_front = |(t, x): (f64, f64)| {
            sol.fronts()
                .any(|f| t >= f.t_start && t <= f.t_end && (f.x_at(t) - x).abs() < 1e-9 && f.jump() != 0.0)
        };
        let (mut smooth, mut front) = (0, 0);
        for d in &o.decays {
            if on_front(d.point) {
                front += 1;
                ok &= d.alpha_hat <= 0.05;
            } else {
                smooth += 1;
                ok &= d.fitted_slope >= d.slope_floor + 0.5;
            }
        }
        ok &= smooth >= 3;
        lines.push(format!("{} {smooth}+{front}", o.id));
    }
    (ok, format!("smooth+front points: {}", lines.join(", ")))
}

fn criterion_8() -> Verdict {
    let mut ok = true;
    let mut worst = 0.0_f64;
    let mut untestable = 0;
    let spec = GridSpec::unit(1025).unwrap();
    for s in catalog() {
        let l = s.lemma.clone().expect("catalog scenarios carry a lemma point");
        let sol = s.solution(Rect::unit()).unwrap();
        let u = sol.sample(&spec).unwrap();
        let p = reconstruct_potential(&u).unwrap();
        let mu_plus = production_exact(&sol, &EntropyPair::quadratic()).positive_part().total_mass();
        let pairs: Vec<(f64, f64)> = l
            .deltas
            .iter()
            .flat_map(|&d| l.kappas.iter().map(move |&k| (k * d.powi(5) * l.r, d)))
            .collect();
        assert_eq!(pairs.len(), 9);
        let sweep = lemma_probe_sweep(&p.h, &u, mu_plus, l.point, l.r, l.rho, &pairs).unwrap();
        for pt in &sweep.points {
            untestable += usize::from(pt.inner_inclusion.is_none());
            ok &= pt.inner_inclusion == Some(true) && pt.outer_inclusion;
        }
        let reports = sweep.reports();
        let div = reports.iter().find(|r| r.name == "div_curl").unwrap();
        ok &= div.pass;
        worst = worst.max(div.empirical_constant.unwrap_or(0.0));
    }
    let mut supconv = 0;
    for o in &catalog_run().outcomes {
        let s = builtin(&o.id).unwrap();
        let p = reconstruct_potential(&o.u).unwrap();
        let r = supconv_semiconvexity(&p.h, s.supconv_rho).unwrap();
        ok &= r.lhs <= 1e-10 * p.h.max_abs().max(1.0);
        supconv += 1;
    }
    (
        ok,
        format!("1025x1025 sweeps, {untestable} untestable inclusions, div-curl constant {worst:.3}, {supconv} sup-convolutions"),
    )
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "manifest.json") {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn criterion_9() -> Verdict {
    let run = catalog_run();
    let passed = run.outcomes.iter().all(ScenarioOutcome::passed);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_run(a.path(), &run.outcomes, false).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let again = single.install(|| run_all(&catalog(), &RunOptions::default())).unwrap();
    write_run(b.path(), &again, false).unwrap();
    let (ta, tb) = (read_tree(a.path()), read_tree(b.path()));
    let identical = ta == tb;
    let failed: Vec<String> = shocklab::runner::read_records(a.path())
        .unwrap()
        .iter()
        .filter(|r| !r.passed())
        .map(|r| match r {
            Record::Estimate(e) => format!("{}/{}", e.scenario, e.name),
            Record::Decay(d) => format!("{}/decay", d.scenario),
        })
        .collect();
    let ok = passed && identical && run.elapsed < Duration::from_secs(60);
    (
        ok,
        format!(
            "{} scenarios in {:.2?}, {} files bit-identical across thread counts: {identical}, failing checks: {:?}",
            run.outcomes.len(),
            run.elapsed,
            ta.len(),
            failed
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [fn() -> Verdict; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    // the catalog run is timed on its own before anything else competes for the cores
    catalog_run();
    let mut failures = 0;
    for (k, c) in criteria.iter().enumerate() {
        let (ok, detail) = catch_unwind(AssertUnwindSafe(c)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        failures += usize::from(!ok);
        println!("criterion {}: {} ({detail})", k + 1, if ok { "PASS" } else { "FAIL" });
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
