use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::RunBundle;
use crate::error::{Error, Result};
use crate::verify::observed_orders;

pub const BUNDLE_JSON: &str = "bundle.json";
pub const RESIDUALS_CSV: &str = "residuals.csv";
pub const CHECKS_CSV: &str = "checks.csv";
pub const DEVIATION_CSV: &str = "deviation.csv";
/// Echo of the scenario exactly as it was run.
pub const SCENARIO_TOML: &str = "scenario.toml";
/// Long-format table written by [`report`].
pub const REPORT_CSV: &str = "report.csv";

pub const ARTIFACTS: [&str; 5] = [BUNDLE_JSON, SCENARIO_TOML, RESIDUALS_CSV, CHECKS_CSV, DEVIATION_CSV];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub scenario_id: String,
    pub equation: String,
    pub level: usize,
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "Linf")]
    pub linf: f64,
    pub interior_fraction: f64,
    pub mode: String,
    pub pi_form: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub scenario_id: String,
    pub check: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub relation: String,
    pub passed: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationCsvRow {
    pub scenario_id: String,
    pub time: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "Linf")]
    pub linf: f64,
    pub run: String,
    pub mass: f64,
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes the JSON bundle, the scenario echo and the CSV sidecars to `dir`.
pub fn write_bundle(bundle: &RunBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let id = &bundle.scenario.id;
    fs::write(dir.join(BUNDLE_JSON), serde_json::to_string_pretty(bundle)?)?;
    fs::write(dir.join(SCENARIO_TOML), bundle.scenario.to_toml()?)?;
    let residuals: Vec<ResidualRow> = bundle
        .residuals
        .iter()
        .map(|r| ResidualRow {
            scenario_id: id.clone(),
            equation: r.equation.name().into(),
            level: r.level,
            n: r.n,
            dx: r.dx,
            dt: r.dt,
            l1: r.norms.l1,
            l2: r.norms.l2,
            linf: r.norms.linf,
            interior_fraction: r.interior_fraction,
            mode: r.mode.name().into(),
            pi_form: r.pi_form.name().into(),
        })
        .collect();
    write_rows(
        &dir.join(RESIDUALS_CSV),
        &["scenario_id", "equation", "level", "n", "dx", "dt", "L1", "L2", "Linf", "interior_fraction", "mode", "pi_form"],
        &residuals,
    )?;
    let checks: Vec<CheckRow> = bundle
        .checks
        .iter()
        .map(|c| CheckRow {
            scenario_id: id.clone(),
            check: c.check.clone(),
            value: c.value,
            bound: c.bound,
            relation: c.relation.name().into(),
            passed: c.passed,
            note: c.note.clone(),
        })
        .collect();
    write_rows(&dir.join(CHECKS_CSV), &["scenario_id", "check", "value", "bound", "relation", "passed", "note"], &checks)?;
    let deviation: Vec<DeviationCsvRow> = bundle
        .deviation
        .iter()
        .flat_map(|s| {
            s.rows.iter().map(|r| DeviationCsvRow {
                scenario_id: id.clone(),
                time: r.time,
                l1: r.l1,
                linf: r.linf,
                run: s.run.clone(),
                mass: r.mass,
            })
        })
        .collect();
    write_rows(&dir.join(DEVIATION_CSV), &["scenario_id", "time", "L1", "Linf", "run", "mass"], &deviation)?;
    Ok(())
}

pub fn read_bundle(dir: &Path) -> Result<RunBundle> {
    let text = fs::read_to_string(dir.join(BUNDLE_JSON))?;
    Ok(serde_json::from_str(&text)?)
}

/// Convergence of one residual series as read back from `residuals.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTable {
    pub equation: String,
    pub mode: String,
    pub pi_form: String,
    pub rows: Vec<SeriesRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub level: usize,
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    pub l2: f64,
    pub linf: f64,
    /// L2 order against the previous level.
    pub order: Option<f64>,
}

/// A literal-form row set next to its derived counterpart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiteralFlag {
    pub equation: String,
    pub variant: String,
    pub level: usize,
    pub literal_l2: f64,
    pub derived_l2: f64,
    pub differs: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationSummary {
    pub run: String,
    pub samples: usize,
    pub final_time: f64,
    pub final_l1: f64,
    pub max_l1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub scenario_id: String,
    pub tables: Vec<SeriesTable>,
    pub literal: Vec<LiteralFlag>,
    pub checks: Vec<CheckRow>,
    pub deviation: Vec<DeviationSummary>,
    pub passed: bool,
}

/// Relative gap above which a literal-form residual counts as a discrepancy.
pub const LITERAL_DISCREPANCY: f64 = 1e-6;

/// Reads a bundle's CSV sidecars, tabulates convergence per series, flags
/// literal-form discrepancies and writes the long-format `report.csv`.
pub fn report(dir: &Path) -> Result<ReportSummary> {
    let present: Vec<bool> = ARTIFACTS.iter().map(|a| dir.join(a).is_file()).collect();
    if !present.iter().any(|p| *p) {
        return Err(Error::NoBundle(dir.display().to_string()));
    }
    let missing: Vec<&str> = ARTIFACTS.iter().zip(&present).filter(|(_, p)| !**p).map(|(a, _)| *a).collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteBundle(missing.join(", ")));
    }
    let bundle = read_bundle(dir)?;
    let residuals: Vec<ResidualRow> = read_rows(&dir.join(RESIDUALS_CSV))?;
    let checks: Vec<CheckRow> = read_rows(&dir.join(CHECKS_CSV))?;
    let deviation: Vec<DeviationCsvRow> = read_rows(&dir.join(DEVIATION_CSV))?;

    let mut groups: BTreeMap<(String, String, String), Vec<&ResidualRow>> = BTreeMap::new();
    let mut order: Vec<(String, String, String)> = Vec::new();
    for r in &residuals {
        let key = (r.equation.clone(), r.mode.clone(), r.pi_form.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    let tables: Vec<SeriesTable> = order
        .iter()
        .map(|key| {
            let mut rows = groups[key].clone();
            rows.sort_by_key(|r| r.level);
            let res: Vec<f64> = rows.iter().map(|r| r.l2).collect();
            let dx: Vec<f64> = rows.iter().map(|r| r.dx).collect();
            let p = observed_orders(&res, &dx);
            SeriesTable {
                equation: key.0.clone(),
                mode: key.1.clone(),
                pi_form: key.2.clone(),
                rows: rows
                    .iter()
                    .enumerate()
                    .map(|(k, r)| SeriesRow {
                        level: r.level,
                        n: r.n,
                        dx: r.dx,
                        dt: r.dt,
                        l2: r.l2,
                        linf: r.linf,
                        order: if k == 0 { None } else { Some(p[k - 1]) },
                    })
                    .collect(),
            }
        })
        .collect();

    let (mode0, pi0) = (
        bundle.provenance.modes.first().map(|m| m.name()).unwrap_or("derived"),
        bundle.provenance.pi_forms.first().map(|p| p.name()).unwrap_or("standard"),
    );
    let mut literal = Vec::new();
    for r in &residuals {
        let variant = if r.mode != mode0 {
            format!("mode={}", r.mode)
        } else if r.pi_form != pi0 {
            format!("pi_form={}", r.pi_form)
        } else {
            continue;
        };
        if let Some(d) = residuals
            .iter()
            .find(|d| d.equation == r.equation && d.level == r.level && d.mode == mode0 && d.pi_form == pi0)
        {
            literal.push(LiteralFlag {
                equation: r.equation.clone(),
                variant,
                level: r.level,
                literal_l2: r.l2,
                derived_l2: d.l2,
                differs: (r.l2 - d.l2).abs() > LITERAL_DISCREPANCY * d.l2.abs().max(r.l2.abs()),
            });
        }
    }

    let mut runs: Vec<String> = Vec::new();
    for d in &deviation {
        if !runs.contains(&d.run) {
            runs.push(d.run.clone());
        }
    }
    let deviation_summary = runs
        .iter()
        .map(|run| {
            let rows: Vec<&DeviationCsvRow> = deviation.iter().filter(|d| &d.run == run).collect();
            let last = rows.last().expect("non-empty run");
            DeviationSummary {
                run: run.clone(),
                samples: rows.len(),
                final_time: last.time,
                final_l1: last.l1,
                max_l1: rows.iter().map(|r| r.l1).fold(0.0, f64::max),
            }
        })
        .collect();

    let summary = ReportSummary {
        scenario_id: bundle.scenario.id.clone(),
        passed: checks.iter().all(|c| c.passed),
        tables,
        literal,
        checks,
        deviation: deviation_summary,
    };
    write_long_csv(&dir.join(REPORT_CSV), &summary, &residuals, &deviation)?;
    Ok(summary)
}

#[derive(Serialize)]
struct LongRow<'a> {
    scenario_id: &'a str,
    source: &'a str,
    series: String,
    x_name: &'a str,
    x: Option<f64>,
    quantity: &'a str,
    value: f64,
}

const LONG_HEADER: [&str; 7] = ["scenario_id", "source", "series", "x_name", "x", "quantity", "value"];

fn write_long_csv(path: &Path, summary: &ReportSummary, residuals: &[ResidualRow], deviation: &[DeviationCsvRow]) -> Result<()> {
    let id = summary.scenario_id.as_str();
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(LONG_HEADER)?;
    for r in residuals {
        let series = format!("{}/{}/{}", r.equation, r.mode, r.pi_form);
        for (q, v) in [("L1", r.l1), ("L2", r.l2), ("Linf", r.linf)] {
            w.serialize(LongRow { scenario_id: id, source: "residuals", series: series.clone(), x_name: "dx", x: Some(r.dx), quantity: q, value: v })?;
        }
    }
    for t in &summary.tables {
        let series = format!("{}/{}/{}", t.equation, t.mode, t.pi_form);
        for r in &t.rows {
            if let Some(p) = r.order {
                w.serialize(LongRow { scenario_id: id, source: "residuals", series: series.clone(), x_name: "dx", x: Some(r.dx), quantity: "order", value: p })?;
            }
        }
    }
    for d in deviation {
        for (q, v) in [("L1", d.l1), ("Linf", d.linf)] {
            w.serialize(LongRow { scenario_id: id, source: "deviation", series: d.run.clone(), x_name: "time", x: Some(d.time), quantity: q, value: v })?;
        }
    }
    for c in &summary.checks {
        w.serialize(LongRow { scenario_id: id, source: "checks", series: c.check.clone(), x_name: "", x: None, quantity: "value", value: c.value })?;
    }
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3e}"))
}

impl ReportSummary {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {}: {}", self.scenario_id, if self.passed { "PASS" } else { "FAIL" });
        for t in &self.tables {
            let _ = writeln!(s, "\n{} ({}, {})", t.equation, t.mode, t.pi_form);
            let _ = writeln!(s, "  {:>5} {:>6} {:>11} {:>11} {:>11} {:>11} {:>7}", "level", "n", "dx", "dt", "L2", "Linf", "order");
            for r in &t.rows {
                let order = r.order.map_or_else(|| "-".into(), |p| format!("{p:.3}"));
                let _ = writeln!(
                    s,
                    "  {:>5} {:>6} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>7}",
                    r.level, r.n, r.dx, r.dt, r.l2, r.linf, order
                );
            }
        }
        if !self.literal.is_empty() {
            let _ = writeln!(s, "\nliteral forms");
            for f in &self.literal {
                let verdict = if f.differs { "DISCREPANCY" } else { "agrees" };
                let _ = writeln!(
                    s,
                    "  {} {} level {}: L2 {:.4e} vs {:.4e} ({verdict})",
                    f.equation, f.variant, f.level, f.literal_l2, f.derived_l2
                );
            }
        }
        if !self.deviation.is_empty() {
            let _ = writeln!(s, "\ndeviation traces");
            for d in &self.deviation {
                let _ = writeln!(
                    s,
                    "  {}: {} samples, t = {:.4}, final L1 {:.4e}, max L1 {:.4e}",
                    d.run, d.samples, d.final_time, d.final_l1, d.max_l1
                );
            }
        }
        let _ = writeln!(s, "\nchecks");
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            let _ = write!(s, "  {mark} {:<36} {:>12.4e}  {} {}", c.check, c.value, c.relation, opt(c.bound));
            if !c.note.is_empty() {
                let _ = write!(s, "  ({})", c.note);
            }
            s.push('\n');
        }
        s
    }
}
