use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{DecayReport, EstimateReport};

use super::ScenarioOutcome;

/// One line of `reports.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Estimate(EstimateReport),
    Decay(DecayReport),
}

impl Record {
    pub fn scenario(&self) -> &str {
        match self {
            Record::Estimate(r) => &r.scenario,
            Record::Decay(d) => &d.scenario,
        }
    }

    pub fn passed(&self) -> bool {
        match self {
            Record::Estimate(r) => r.pass,
            Record::Decay(d) => d.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenarios: usize,
    pub records: usize,
    pub failed: usize,
}

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

fn records_of(o: &ScenarioOutcome) -> Vec<Record> {
    o.reports
        .iter()
        .cloned()
        .map(Record::Estimate)
        .chain(o.decays.iter().cloned().map(Record::Decay))
        .collect()
}

fn write_jsonl(path: &Path, records: &[Record]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |c| format!("{c:.4}"))
}

/// Fixed-width table of every record followed by a pass count.
pub fn render_summary(records: &[Record]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<26} {:<28} {:>12} {:>12} {:>10} {:>8}  {:<4} flags",
        "scenario", "check", "lhs", "rhs_raw", "constant", "ceiling", "pass"
    );
    for r in records {
        let verdict = if r.passed() { "ok" } else { "FAIL" };
        match r {
            Record::Estimate(e) => {
                let _ = writeln!(
                    out,
                    "{:<26} {:<28} {:>12.4e} {:>12.4e} {:>10} {:>8} {:<5} {}",
                    e.scenario,
                    e.name,
                    e.lhs,
                    e.rhs_raw,
                    fmt_opt(e.empirical_constant),
                    e.ceiling,
                    verdict,
                    e.flags.join(",")
                );
            }
            Record::Decay(d) => {
                let name = format!("decay@({:.3},{:.3})", d.point.0, d.point.1);
                let _ = writeln!(
                    out,
                    "{:<26} {:<28} {:>12.4} {:>12.4e} {:>10} {:>8} {:<5} {}",
                    d.scenario,
                    name,
                    d.fitted_slope,
                    d.slope_floor,
                    format!("a={:.3}", d.alpha_hat),
                    "-",
                    verdict,
                    d.flags.join(",")
                );
            }
        }
    }
    let failed = records.iter().filter(|r| !r.passed()).count();
    let _ = writeln!(out, "\n{} checks, {} failed", records.len(), failed);
    out
}

/// Reads `reports.jsonl` from a run directory.
pub fn read_records(dir: &Path) -> Result<Vec<Record>> {
    let path = dir.join("reports.jsonl");
    let file = File::open(&path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("{} line {}: {e}", path.display(), n + 1)))?;
        out.push(r);
    }
    Ok(out)
}

/// Writes one directory per scenario, in parallel, then the merged `reports.jsonl`,
/// `summary.txt` and `manifest.json` at the root. Records are merged in id order and
/// the manifest timestamp is the only wall-clock value in the output.
pub fn write_run(dir: &Path, outcomes: &[ScenarioOutcome], dump_fields: bool) -> Result<RunSummary> {
    fs::create_dir_all(dir)?;
    let mut sorted: Vec<&ScenarioOutcome> = outcomes.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let written: Vec<Result<()>> = crate::par::map_slice(&sorted, |o| {
        let sub = dir.join(&o.id);
        fs::create_dir_all(&sub)?;
        write_jsonl(&sub.join("reports.jsonl"), &records_of(o))?;
        for (k, d) in o.decays.iter().enumerate() {
            fs::write(sub.join(format!("decay_{k}.csv")), d.to_csv())?;
        }
        let prod = BufWriter::new(File::create(sub.join("production.json"))?);
        serde_json::to_writer_pretty(prod, &o.production)?;
        if dump_fields {
            o.u.write_csv(BufWriter::new(File::create(sub.join("u.csv"))?))?;
            o.viscosity.write_csv(BufWriter::new(File::create(sub.join("h_bar.csv"))?))?;
        }
        Ok(())
    });
    written.into_iter().collect::<Result<Vec<_>>>()?;

    let records: Vec<Record> = sorted.iter().flat_map(|o| records_of(o)).collect();
    write_jsonl(&dir.join("reports.jsonl"), &records)?;
    fs::write(dir.join("summary.txt"), render_summary(&records))?;

    let summary = RunSummary {
        scenarios: sorted.len(),
        records: records.len(),
        failed: records.iter().filter(|r| !r.passed()).count(),
    };
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "scenarios": sorted.iter().map(|o| o.id.as_str()).collect::<Vec<_>>(),
        "summary": summary,
        "timestamp": timestamp,
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip_and_table() {
        let e = EstimateReport::new("errorvisc", 0.1, 0.2, 2.0, 0.0).with_scenario("s");
        let recs = vec![Record::Estimate(e)];
        let line = serde_json::to_string(&recs[0]).unwrap();
        assert!(line.starts_with(r#"{"kind":"estimate""#));
        assert_eq!(serde_json::from_str::<Record>(&line).unwrap(), recs[0]);
        let table = render_summary(&recs);
        assert!(table.contains("errorvisc"));
        assert!(table.contains("1 checks, 0 failed"));
    }
}
