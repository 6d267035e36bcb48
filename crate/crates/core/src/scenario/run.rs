use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{DtScaling, NonequilibriumSpec, Scenario, Suite};
use crate::error::{Error, Result};
use crate::madelung::{mixed_velocity_check, ExtractOptions, PiForm};
use crate::nonequilibrium::{
    equilibrium_initial, perturb_density, perturb_log_density, run_guided, run_self_consistent, DeviationTrace,
    NoneqMode, NoneqRun, NoneqState, MASS_TOLERANCE,
};
use crate::numerics::{masked_norm, NormKind, NormTriple};
use crate::permutation::{
    apply_lambda, born_permutation_test, lambda_residual, lambda_symmetry_defect, random_probe_densities,
    LambdaOperator, PermutationReport, SwapMap,
};
use crate::schrodinger::{evolve, initial_state, QuantumState};
use crate::verify::{
    classicality, residual, residual_field, velocity_uniqueness_probe, AssemblyMode, ClassicalityMetric,
    ConvergenceTable, EquationId, FieldSlabs, ResidualReport, UniquenessProbe,
};

/// How a check's value is compared with its bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `value < bound`
    Below,
    /// `value > bound`
    Above,
    /// `value >= bound`
    AtLeast,
    /// Reported only.
    Info,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::Below => "below",
            Relation::Above => "above",
            Relation::AtLeast => "at_least",
            Relation::Info => "info",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub relation: Relation,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl CheckResult {
    fn new(check: impl Into<String>, value: f64, bound: Option<f64>, relation: Relation) -> Self {
        let passed = match (bound, relation) {
            (_, Relation::Info) | (None, _) => true,
            (Some(b), Relation::Below) => value < b,
            (Some(b), Relation::Above) => value > b,
            (Some(b), Relation::AtLeast) => value >= b,
        };
        let relation = if bound.is_none() { Relation::Info } else { relation };
        Self { check: check.into(), value, bound, relation, passed, note: String::new() }
    }

    fn info(check: impl Into<String>, value: f64) -> Self {
        Self::new(check, value, None, Relation::Info)
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// One sample of a density deviation trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub time: f64,
    pub l1: f64,
    pub linf: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationSeries {
    /// `equilibrium` or `perturbed`.
    pub run: String,
    pub rows: Vec<DeviationRow>,
}

impl DeviationSeries {
    fn from_trace(run: &str, trace: &DeviationTrace) -> Self {
        Self {
            run: run.into(),
            rows: trace
                .entries
                .iter()
                .map(|e| DeviationRow { time: e.time, l1: e.l1, linf: e.linf, mass: e.mass })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationSummary {
    pub exchange: PermutationReport,
    pub swap_defect: f64,
    pub dx: f64,
    pub linearity: f64,
    pub equivalence: f64,
}

/// Raw outputs of the named suites, alongside the pass/fail checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteReports {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessProbe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classicality: Option<ClassicalityMetric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed_velocity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<PermutationSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub code_version: String,
    pub method: String,
    pub scheme: String,
    pub pi_forms: Vec<PiForm>,
    pub modes: Vec<AssemblyMode>,
    pub node_eps: f64,
    pub seed: u64,
    pub threads: usize,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
}

/// Everything one scenario run produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunBundle {
    pub scenario: Scenario,
    pub residuals: Vec<ResidualReport>,
    pub convergence: Vec<ConvergenceTable>,
    pub checks: Vec<CheckResult>,
    pub deviation: Vec<DeviationSeries>,
    pub suites: SuiteReports,
    pub provenance: Provenance,
    pub passed: bool,
}

impl RunBundle {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == name)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
}

/// Runs every check of `s` on a dedicated thread pool.
pub fn run(s: &Scenario, opts: RunOptions) -> Result<RunBundle> {
    s.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let mut bundle = pool.install(|| execute(s))?;
    bundle.provenance.threads = threads;
    bundle.provenance.started_unix = started;
    bundle.provenance.elapsed_seconds = clock.elapsed().as_secs_f64();
    Ok(bundle)
}

struct Level {
    reports: Vec<ResidualReport>,
    slabs: Option<FieldSlabs>,
    dx: f64,
}

fn pi_sensitive(eq: EquationId) -> bool {
    matches!(eq, EquationId::Momentum1p | EquationId::Wave1p)
}

fn mode_sensitive(eq: EquationId) -> bool {
    matches!(eq, EquationId::Momentum2p1 | EquationId::Momentum2p2)
}

fn extract_options(s: &Scenario, pi_form: PiForm) -> ExtractOptions {
    ExtractOptions { node_eps: s.checks.node_eps, scheme: s.checks.scheme, pi_form }
}

struct Plan<'a> {
    s: &'a Scenario,
    levels: Vec<usize>,
    base_dx: f64,
}

impl Plan<'_> {
    fn dt(&self, dx: f64) -> f64 {
        match self.s.evolution.dt_scaling {
            DtScaling::Dx => self.s.evolution.dt * dx / self.base_dx,
            DtScaling::Fixed => self.s.evolution.dt,
        }
    }

    fn initial(&self, n: usize) -> Result<QuantumState> {
        let s = self.s;
        let grid = s.space.grid(n)?;
        initial_state(&s.initial, &grid, &s.physics.params()?, &s.potential)
    }

    /// Evolves the level-`k` state to the common evaluation time and extracts
    /// residuals for every requested equation, form and assembly.
    fn level(&self, k: usize, keep_slabs: bool) -> Result<Level> {
        let s = self.s;
        let n = self.levels[k];
        let psi0 = self.initial(n)?;
        let dx = psi0.grid().max_dx();
        let dt = self.dt(dx);
        let horizon = s.evolution.steps as f64 * s.evolution.dt;
        let steps = (horizon / dt).round() as usize;
        let psi = evolve(&psi0, &s.potential, dt, steps, s.evolution.method)?;
        let mut reports = Vec::new();
        let mut primary = None;
        for (pi_idx, &pi) in s.checks.pi_forms.iter().enumerate() {
            if pi_idx > 0 && !s.checks.equations.iter().any(|&e| pi_sensitive(e)) {
                continue;
            }
            let slabs = FieldSlabs::from_state(&psi, &s.potential, dt, s.evolution.method, &extract_options(s, pi))?;
            for &eq in &s.checks.equations {
                if pi_idx > 0 && !pi_sensitive(eq) {
                    continue;
                }
                for (mode_idx, &mode) in s.checks.modes.iter().enumerate() {
                    if mode_idx > 0 && !mode_sensitive(eq) {
                        continue;
                    }
                    reports.push(residual(eq, &slabs, mode)?.with_meta(&s.id, k));
                }
            }
            if pi_idx == 0 {
                primary = Some(slabs);
            }
        }
        Ok(Level { reports, slabs: primary.filter(|_| keep_slabs), dx })
    }
}

fn execute(s: &Scenario) -> Result<RunBundle> {
    let levels = s.levels();
    let base_dx = s.space.grid(s.space.n)?.max_dx();
    let plan = Plan { s, levels: levels.clone(), base_dx };
    let suites = &s.checks.suites;
    let wants_fields = !s.checks.equations.is_empty()
        || suites.iter().any(|x| !matches!(x, Suite::Nonequilibrium));
    let last = levels.len() - 1;

    let mut computed: Vec<Level> = if wants_fields {
        (0..levels.len())
            .into_par_iter()
            .map(|k| plan.level(k, k == last))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    let mut residuals: Vec<ResidualReport> = computed.iter_mut().flat_map(|l| std::mem::take(&mut l.reports)).collect();
    residuals.sort_by_key(|r| r.level);
    let finest = computed.pop();

    let mut checks = Vec::new();
    let mut convergence = Vec::new();
    let (mode0, pi0) = (s.checks.modes[0], s.checks.pi_forms[0]);
    for &eq in &s.checks.equations {
        let rows: Vec<ResidualReport> = residuals
            .iter()
            .filter(|r| r.equation == eq && r.mode == mode0 && r.pi_form == pi0)
            .cloned()
            .collect();
        let table = ConvergenceTable::from_reports(&rows, NormKind::L2)?;
        let tol = s.checks.tolerances.get(&eq).copied().unwrap_or_default();
        let finest_row = rows.last().expect("one row per level");
        checks.push(CheckResult::new(format!("{eq}.linf"), finest_row.norms.linf, tol.max_linf, Relation::Below));
        if rows.len() > 1 {
            let p = table.finest_order().unwrap_or(f64::NAN);
            let mut c = CheckResult::new(format!("{eq}.order"), p, tol.min_order, Relation::AtLeast);
            if p.is_nan() && tol.min_order.is_some() {
                c.passed = false;
            }
            checks.push(c);
        } else if let Some(m) = tol.min_order {
            let mut c = CheckResult::new(format!("{eq}.order"), f64::NAN, Some(m), Relation::AtLeast)
                .note("an observed order needs at least two refinement levels");
            c.passed = false;
            checks.push(c);
        }
        convergence.push(table);
    }

    let outs: Vec<SuiteOut> = suites
        .par_iter()
        .map(|&suite| run_suite(suite, &plan, finest.as_ref()))
        .collect::<Result<_>>()?;
    let mut reports = SuiteReports::default();
    let mut deviation = Vec::new();
    for o in outs {
        checks.extend(o.checks);
        deviation.extend(o.deviation);
        reports.uniqueness = reports.uniqueness.or(o.reports.uniqueness);
        reports.classicality = reports.classicality.or(o.reports.classicality);
        reports.mixed_velocity = reports.mixed_velocity.or(o.reports.mixed_velocity);
        reports.permutation = reports.permutation.or(o.reports.permutation);
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(RunBundle {
        scenario: s.clone(),
        residuals,
        convergence,
        checks,
        deviation,
        suites: reports,
        provenance: Provenance {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            method: s.evolution.method.name().to_string(),
            scheme: s.checks.scheme.name().to_string(),
            pi_forms: s.checks.pi_forms.clone(),
            modes: s.checks.modes.clone(),
            node_eps: s.checks.node_eps,
            seed: s.seed,
            threads: 0,
            started_unix: 0,
            elapsed_seconds: 0.0,
        },
        passed,
    })
}

#[derive(Default)]
struct SuiteOut {
    checks: Vec<CheckResult>,
    deviation: Vec<DeviationSeries>,
    reports: SuiteReports,
}

fn run_suite(suite: Suite, plan: &Plan, finest: Option<&Level>) -> Result<SuiteOut> {
    let s = plan.s;
    let mut out = SuiteOut::default();
    let slabs = || {
        finest
            .and_then(|l| l.slabs.as_ref())
            .ok_or_else(|| Error::MissingSlabs(format!("suite {} has no extracted fields", suite.name())))
    };
    match suite {
        Suite::Uniqueness => {
            let FieldSlabs::One(h) = slabs()? else {
                return Err(Error::Scenario("uniqueness needs a 1D space".into()));
            };
            let u = &s.checks.uniqueness;
            let probe = velocity_uniqueness_probe(h, u.c)?;
            out.checks.push(CheckResult::new(
                "uniqueness.clean_linf",
                probe.clean.norms.linf,
                u.max_clean_linf,
                Relation::Below,
            ));
            out.checks.push(CheckResult::new("uniqueness.factor", probe.factor(), u.min_factor, Relation::AtLeast));
            out.reports.uniqueness = Some(probe);
        }
        Suite::Classicality => {
            let FieldSlabs::Two(t) = slabs()? else {
                return Err(Error::Scenario("classicality needs a 2D space".into()));
            };
            let m = classicality(t)?;
            out.checks.push(CheckResult::new("classicality.cross_norm", m.cross_norm, Some(0.0), Relation::Above));
            out.checks.push(CheckResult::info("classicality.ratio", m.ratio));
            out.reports.classicality = Some(m);
        }
        Suite::MixedVelocity => {
            let FieldSlabs::Two(t) = slabs()? else {
                return Err(Error::Scenario("mixed_velocity needs a 2D space".into()));
            };
            let v = mixed_velocity_check(&t.cur)?;
            out.checks.push(CheckResult::new(
                "mixed_velocity.linf",
                v,
                Some(s.checks.mixed_velocity.max_linf),
                Relation::Below,
            ));
            out.reports.mixed_velocity = Some(v);
        }
        Suite::Permutation => {
            let FieldSlabs::Two(t) = slabs()? else {
                return Err(Error::Scenario("permutation needs a 2D space".into()));
            };
            let (checks, summary) = permutation_suite(plan, t, finest.map_or(plan.base_dx, |l| l.dx))?;
            out.checks = checks;
            out.reports.permutation = Some(summary);
        }
        Suite::Nonequilibrium => {
            let ne = s.checks.nonequilibrium.as_ref().expect("validated");
            let (checks, deviation) = nonequilibrium_suite(plan, ne)?;
            out.checks = checks;
            out.deviation = deviation;
        }
    }
    Ok(out)
}

fn permutation_suite(
    plan: &Plan,
    slabs: &crate::verify::TwoBodySlabs,
    dx: f64,
) -> Result<(Vec<CheckResult>, PermutationSummary)> {
    let s = plan.s;
    let p = &s.checks.permutation;
    let psi0 = plan.initial(s.space.n)?;
    let opts = extract_options(s, s.checks.pi_forms[0]);
    let exchange = born_permutation_test(
        &psi0,
        &s.potential,
        s.evolution.dt,
        s.evolution.method,
        p.stride,
        p.snapshots,
        &opts,
    )?;
    let mut checks = vec![CheckResult::new("permutation.max_delta", exchange.max_delta(), p.max_delta, Relation::Below)];
    if let Some(b) = p.min_initial_delta_rel {
        checks.push(CheckResult::new(
            "permutation.initial_delta_rel",
            exchange.rows[0].delta_rel,
            Some(b),
            Relation::AtLeast,
        ));
    }
    if let Some(b) = p.min_delta_rel {
        let later = exchange.rows[1..].iter().map(|r| r.delta_rel).fold(f64::INFINITY, f64::min);
        checks.push(CheckResult::new("permutation.min_delta_rel", later, Some(b), Relation::AtLeast));
    }

    let op = LambdaOperator::from_slabs(slabs)?;
    let grid = *op.grid();
    let map = SwapMap::new(&grid)?;
    let probes = random_probe_densities(&grid, p.probes, s.seed)?;
    let defect = lambda_symmetry_defect(&op, &probes, &map)?;
    checks.push(CheckResult::new("permutation.swap_defect", defect, p.min_defect, Relation::Above));
    if let Some(c) = p.defect_c {
        checks.push(
            CheckResult::new("permutation.swap_defect_over_dx2", defect / (dx * dx), Some(c), Relation::Below)
                .note(format!("dx = {dx}")),
        );
    }

    let linearity = lambda_linearity(&op, &probes, s.seed)?;
    checks.push(CheckResult::new("permutation.linearity", linearity, Some(p.linearity_rel), Relation::Below));

    let (field, keep) = residual_field(EquationId::Wave2p, &FieldSlabs::Two(Box::new(slabs.clone())), AssemblyMode::Derived)?;
    let lres = lambda_residual(&op, [&slabs.prev.rho, &slabs.cur.rho, &slabs.next.rho])?;
    let a = NormTriple::of(&field, Some(&keep)).l2;
    let b = masked_norm(&lres, Some(&keep), NormKind::L2, true);
    let equivalence = (a - b).abs() / a.abs().max(f64::MIN_POSITIVE);
    checks.push(CheckResult::new("permutation.equivalence", equivalence, Some(p.equivalence_rel), Relation::Below));

    Ok((checks, PermutationSummary { exchange, swap_defect: defect, dx, linearity, equivalence }))
}

/// Largest relative defect `|L(a p + b q) - a L p - b L q| / (|a| |L p| + |b| |L q|)`
/// over consecutive probe pairs with seeded coefficients.
fn lambda_linearity(op: &LambdaOperator, probes: &[crate::numerics::RealField], seed: u64) -> Result<f64> {
    if probes.is_empty() {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let coeffs: Vec<(f64, f64)> = (0..probes.len()).map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect();
    let images: Vec<_> = probes.par_iter().map(|p| apply_lambda(op, p)).collect::<Result<_>>()?;
    let defects: Vec<f64> = (0..probes.len())
        .into_par_iter()
        .map(|k| {
            let j = (k + 1) % probes.len();
            let (a, b) = coeffs[k];
            let mix = probes[k].zip_map(&probes[j], |x, y| a * x + b * y)?;
            let lm = apply_lambda(op, &mix)?;
            let lin = images[k].zip_map(&images[j], |x, y| a * x + b * y)?;
            let scale = a.abs() * images[k].max_magnitude() + b.abs() * images[j].max_magnitude();
            Ok((&lm - &lin).max_magnitude() / scale)
        })
        .collect::<Result<_>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

fn nonequilibrium_suite(plan: &Plan, ne: &NonequilibriumSpec) -> Result<(Vec<CheckResult>, Vec<DeviationSeries>)> {
    let s = plan.s;
    let psi = plan.initial(s.space.n)?;
    let dx = psi.grid().max_dx();
    let dt = ne.dt.unwrap_or(s.evolution.dt);
    let steps = ne.steps.unwrap_or_else(|| (ne.end_time.unwrap_or(0.0) / dt).round() as usize);
    let prefix = ne.mode.name();
    let equilibrium = match ne.mode {
        NoneqMode::GuidedTransport => run_guided(&psi, &s.potential, &psi.density(), dt, steps, ne.stride)?,
        NoneqMode::SelfConsistent => {
            run_self_consistent(&psi, &s.potential, equilibrium_initial(&psi)?, dt, steps, ne.stride)?
        }
    };
    let trace = &equilibrium.trace;
    let scale = dx * dx + dt;
    let mut checks = vec![
        CheckResult::new(format!("{prefix}.equilibrium_l1"), trace.max_l1(), ne.bound_c.map(|c| c * scale), Relation::Below)
            .note(format!("dx^2 + dt = {scale}; steps = {steps}")),
        CheckResult::new(format!("{prefix}.mass_error"), trace.max_mass_error(), Some(MASS_TOLERANCE), Relation::Below),
    ];
    let mut series = vec![DeviationSeries::from_trace("equilibrium", trace)];
    if ne.perturbation != 0.0 {
        match perturbed(plan, ne, &psi, dt, steps) {
            Ok(run) => {
                let last = run.trace.last().map_or(0.0, |e| e.l1);
                checks.push(
                    CheckResult::info(format!("{prefix}.perturbed_final_l1"), last)
                        .note(format!("completed {steps} steps")),
                );
                series.push(DeviationSeries::from_trace("perturbed", &run.trace));
            }
            Err(e) if e.is_numerical_abort() => {
                checks.push(CheckResult::info(format!("{prefix}.perturbed_final_l1"), f64::NAN).note(format!("rejected: {e}")));
            }
            Err(e) => return Err(e),
        }
    }
    Ok((checks, series))
}

fn perturbed(plan: &Plan, ne: &NonequilibriumSpec, psi: &QuantumState, dt: f64, steps: usize) -> Result<NoneqRun> {
    let s = plan.s;
    match ne.mode {
        NoneqMode::GuidedTransport => {
            let rho = perturb_density(&psi.density(), ne.perturbation, ne.perturbation_modes)?;
            run_guided(psi, &s.potential, &rho, dt, steps, ne.stride)
        }
        NoneqMode::SelfConsistent => {
            let eq = equilibrium_initial(psi)?;
            let w = perturb_log_density(&eq.w, ne.perturbation, ne.perturbation_modes)?;
            let v = eq.v.clone().expect("self-consistent state carries v");
            let init = NoneqState::self_consistent(&w.map(f64::exp), v, eq.t)?;
            run_self_consistent(psi, &s.potential, init, dt, steps, ne.stride)
        }
    }
}
