use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use shocklab::runner::{read_records, Record};

fn shocklab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shocklab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn catalog_lists_sorted_ids() {
    let dir = tempfile::tempdir().unwrap();
    let out = shocklab(&["catalog"], dir.path());
    assert!(out.status.success());
    let ids: Vec<String> = stdout(&out)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    let expected = [
        "constant",
        "entropic-shock",
        "mixed-fronts",
        "nonentropic-jump-a0.125",
        "nonentropic-jump-a0.25",
        "nonentropic-jump-a0.5",
        "nonentropic-jump-a1",
        "rarefaction",
        "three-state-merge",
    ];
    assert_eq!(ids, expected);
    assert_eq!(stdout(&shocklab(&["catalog"], dir.path())), stdout(&out));
}

#[test]
fn constant_builtin_passes_with_vanishing_lhs() {
    let dir = tempfile::tempdir().unwrap();
    let out = shocklab(&["run", "constant", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let records = read_records(&dir.path().join("res")).unwrap();
    let estimates: Vec<_> = records
        .iter()
        .filter_map(|r| match r {
            Record::Estimate(e) => Some(e),
            Record::Decay(_) => None,
        })
        .collect();
    assert!(!estimates.is_empty());
    for name in ["errorvisc", "errorentropy", "quartic_compactness", "time_transfer"] {
        for e in estimates.iter().filter(|e| e.name == name) {
            assert!(e.lhs.abs() < 1e-4, "{name}: {}", e.lhs);
        }
    }
    for f in ["summary.txt", "manifest.json", "constant/reports.jsonl", "constant/decay_0.csv", "constant/production.json"] {
        assert!(dir.path().join("res").join(f).is_file(), "{f} missing");
    }
}

#[test]
fn nonentropic_builtin_reports_three_eighths() {
    let dir = tempfile::tempdir().unwrap();
    let out = shocklab(&["run", "nonentropic-jump-a1", "--out", "res", "--jobs", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let records = read_records(&dir.path().join("res")).unwrap();
    let visc = records
        .iter()
        .find_map(|r| match r {
            Record::Estimate(e) if e.name == "errorvisc" => Some(e.clone()),
            _ => None,
        })
        .unwrap();
    assert!((visc.lhs - 0.375).abs() <= 0.02 * 0.375, "lhs {}", visc.lhs);
    assert_eq!(visc.metadata["t1"], 0.75);
}

#[test]
fn config_runs_and_report_rerenders() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "[run]\ngrid = 128x128\nout = results\ndump_fields = true\n\n\
         [scenario]\nid = small-shock\nstates = [1, -1]\nbreaks = [0.5]\npolicy = entropic\n\
         quartic_r = 0.0625\ntransfer_r = 0.25\nprobe_points = 0.5, 0.25\n",
    )
    .unwrap();
    let out = shocklab(&["run", "run.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let res = dir.path().join("results");
    assert!(res.join("small-shock/u.csv").is_file());
    assert!(res.join("small-shock/h_bar.csv").is_file());
    let summary = fs::read_to_string(res.join("summary.txt")).unwrap();
    let report = shocklab(&["report", res.to_str().unwrap()], dir.path());
    assert_eq!(report.status.code(), Some(0));
    assert_eq!(stdout(&report), summary);
}

#[test]
fn unknown_key_is_a_config_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "[scenario]\nbuiltin = constant\nwidth = 3\n").unwrap();
    let out = shocklab(&["run", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn quartic_radius_at_mesh_names_the_operation() {
    let dir = tempfile::tempdir().unwrap();
    // centred mesh at 64 nodes is 2/64; r = mesh leaves no admissible shift
    fs::write(
        dir.path().join("mesh.cfg"),
        "[scenario]\nbuiltin = nonentropic-jump-a1\ngrid = 64x64\ntransfer_r = 0.25\nquartic_r = 0.03125\n",
    )
    .unwrap();
    let out = shocklab(&["run", "mesh.cfg", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("quartic_compactness"), "{}", stderr(&out));
}

#[test]
fn transfer_radius_below_resolution_names_the_operation() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("t.cfg"), "[scenario]\nbuiltin = rarefaction\ngrid = 64x64\n").unwrap();
    let out = shocklab(&["run", "t.cfg", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("time_transfer_check"), "{}", stderr(&out));
}

#[test]
fn failing_checks_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // the quartic constant grows with the amplitude: 4 | -4 gives about 17.8 > 16
    fs::write(dir.path().join("big.cfg"), "[scenario]\nid = big\nstates = [4, -4]\nbreaks = [0.5]\n").unwrap();
    let out = shocklab(&["run", "big.cfg", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stdout(&out).contains("FAIL"));
    let report = shocklab(&["report", "res"], dir.path());
    assert_eq!(report.status.code(), Some(2));
}

#[test]
fn missing_report_dir_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = shocklab(&["report", "nowhere"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
