//! Declarative scenarios: TOML files describing a grid, physics, initial
//! state, evolution and the checks to run, plus the run bundles and reports
//! they produce.
//!
//! Exit statuses follow [`exit_code`]: 0 when every asserted bound holds, 1 on
//! a tolerance failure or an unusable bundle, 2 for invalid input, 3 when the
//! numerics abort.

mod bundle;
mod run;
mod spec;

pub use bundle::{
    read_bundle, report, write_bundle, CheckRow, DeviationCsvRow, DeviationSummary, LiteralFlag, ReportSummary,
    ResidualRow, SeriesRow, SeriesTable, ARTIFACTS, BUNDLE_JSON, CHECKS_CSV, DEVIATION_CSV, LITERAL_DISCREPANCY,
    REPORT_CSV, RESIDUALS_CSV, SCENARIO_TOML,
};
pub use run::{
    run, CheckResult, DeviationRow, DeviationSeries, PermutationSummary, Provenance, Relation, RunBundle, RunOptions,
    SuiteReports,
};
pub use spec::{
    apply_override, bundled, list_scenarios, Bundled, ChecksSpec, DtScaling, EvolutionSpec, MixedVelocitySpec,
    NonequilibriumSpec, OutputSpec, PermutationSpec, PhysicsSpec, RefinementSpec, Scenario, SpaceSpec, Suite,
    Tolerance, UniquenessSpec, BUNDLED, DEFAULT_SEED, SCHEMA_VERSION,
};

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "BORNWAVE_OUT";
/// Output root when neither a flag, the scenario nor the environment sets one.
pub const DEFAULT_OUT: &str = "bornwave-out";

pub fn exit_code(err: &Error) -> i32 {
    match err {
        e if e.is_numerical_abort() => EXIT_NUMERICAL,
        Error::NoBundle(_) | Error::IncompleteBundle(_) => EXIT_TOLERANCE,
        _ => EXIT_SCHEMA,
    }
}

/// Loads a scenario from a file path or a bundled id, applying overrides.
pub fn load(source: &str, overrides: &[String]) -> Result<Scenario> {
    let text = match bundled(source) {
        Some(b) if !Path::new(source).exists() => b.source.to_string(),
        _ => std::fs::read_to_string(source)
            .map_err(|e| Error::Scenario(format!("cannot read scenario '{source}': {e}")))?,
    };
    Scenario::from_toml_with_overrides(&text, overrides)
}

/// Bundle directory: `<root>/<id>`, where the root is the first of `flag`,
/// the scenario's `output.dir`, `$BORNWAVE_OUT` and `bornwave-out`.
pub fn bundle_dir(s: &Scenario, flag: Option<&Path>) -> PathBuf {
    let root = flag
        .map(Path::to_path_buf)
        .or_else(|| s.output.dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    root.join(&s.id)
}

/// Runs `s`, writes its bundle under `dir` and returns it.
pub fn run_to_dir(s: &Scenario, opts: RunOptions, dir: &Path) -> Result<RunBundle> {
    let b = run(s, opts)?;
    write_bundle(&b, dir)?;
    Ok(b)
}
