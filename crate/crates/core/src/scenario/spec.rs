use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::madelung::{PiForm, DEFAULT_NODE_EPS};
use crate::nonequilibrium::NoneqMode;
use crate::numerics::{Boundary, Grid, Grid1D, Grid2D, Scheme};
use crate::schrodinger::{InitialSpec, Method, PhysParams, Potential};
use crate::verify::{AssemblyMode, EquationId};

/// Version of the scenario file layout this build reads.
pub const SCHEMA_VERSION: u32 = 1;
/// Seed used when a scenario does not set one.
pub const DEFAULT_SEED: u64 = 20_240_917;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub id: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub space: SpaceSpec,
    #[serde(default)]
    pub physics: PhysicsSpec,
    pub potential: Potential,
    pub initial: InitialSpec,
    pub evolution: EvolutionSpec,
    #[serde(default)]
    pub checks: ChecksSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    /// 1 for one particle, 2 for two particles on a line.
    pub dims: usize,
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    #[serde(default = "periodic")]
    pub boundary: Boundary,
}

fn periodic() -> Boundary {
    Boundary::Periodic
}

impl SpaceSpec {
    pub fn grid(&self, n: usize) -> Result<Grid> {
        let axis = Grid1D::new(n, self.x_min, self.x_max, self.boundary)?;
        match self.dims {
            1 => Ok(Grid::One(axis)),
            2 => Ok(Grid::Two(Grid2D::square(axis))),
            d => Err(Error::Scenario(format!("space.dims = {d}; expected 1 or 2"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSpec {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub m1: f64,
    #[serde(default = "one")]
    pub m2: f64,
}

impl Default for PhysicsSpec {
    fn default() -> Self {
        Self { hbar: 1.0, m1: 1.0, m2: 1.0 }
    }
}

impl PhysicsSpec {
    pub fn params(&self) -> Result<PhysParams> {
        PhysParams::two_particle(self.hbar, self.m1, self.m2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DtScaling {
    /// `dt` is proportional to `dx` across refinement levels.
    #[default]
    Dx,
    /// The same `dt` on every level.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    #[serde(default = "split_step")]
    pub method: Method,
    /// Time step on the `space.n` grid.
    pub dt: f64,
    /// Steps taken (on the `space.n` grid) before the checks are evaluated.
    #[serde(default)]
    pub steps: usize,
    #[serde(default)]
    pub dt_scaling: DtScaling,
}

fn split_step() -> Method {
    Method::SplitStepSpectral
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Uniqueness,
    Classicality,
    Permutation,
    Nonequilibrium,
    MixedVelocity,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Uniqueness => "uniqueness",
            Suite::Classicality => "classicality",
            Suite::Permutation => "permutation",
            Suite::Nonequilibrium => "nonequilibrium",
            Suite::MixedVelocity => "mixed_velocity",
        }
    }

    fn dims(self) -> usize {
        match self {
            Suite::Uniqueness | Suite::Nonequilibrium => 1,
            _ => 2,
        }
    }
}

/// Bounds asserted on one equation's convergence table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    /// Lower bound on the observed L2 order between the two finest levels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_order: Option<f64>,
    /// Upper bound on Linf at the finest level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_linf: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessSpec {
    #[serde(default = "probe_c")]
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_clean_linf: Option<f64>,
}

fn probe_c() -> f64 {
    0.1
}

impl Default for UniquenessSpec {
    fn default() -> Self {
        Self { c: probe_c(), min_factor: None, max_clean_linf: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedVelocitySpec {
    #[serde(default = "mixed_default")]
    pub max_linf: f64,
}

fn mixed_default() -> f64 {
    1e-5
}

impl Default for MixedVelocitySpec {
    fn default() -> Self {
        Self { max_linf: mixed_default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermutationSpec {
    /// Steps between exchange-asymmetry snapshots.
    #[serde(default = "stride_default")]
    pub stride: usize,
    #[serde(default = "snapshots_default")]
    pub snapshots: usize,
    /// Random probe densities for the linearity and swap-defect checks.
    #[serde(default = "probes_default")]
    pub probes: usize,
    /// Identical particles: bound on `Linf(rho - swap rho)` over the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_delta: Option<f64>,
    /// Lower bound on the relative asymmetry at t = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_initial_delta_rel: Option<f64>,
    /// Lower bound on the relative asymmetry at later snapshots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_delta_rel: Option<f64>,
    /// Bound `C` in `defect < C dx^2` (identical particles).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect_c: Option<f64>,
    /// Lower bound on the swap defect (distinguishable particles).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_defect: Option<f64>,
    #[serde(default = "rel_default")]
    pub linearity_rel: f64,
    #[serde(default = "rel_default")]
    pub equivalence_rel: f64,
}

fn stride_default() -> usize {
    32
}
fn snapshots_default() -> usize {
    3
}
fn probes_default() -> usize {
    100
}
fn rel_default() -> f64 {
    1e-12
}

impl Default for PermutationSpec {
    fn default() -> Self {
        Self {
            stride: stride_default(),
            snapshots: snapshots_default(),
            probes: probes_default(),
            max_delta: None,
            min_initial_delta_rel: None,
            min_delta_rel: None,
            defect_c: None,
            min_defect: None,
            linearity_rel: rel_default(),
            equivalence_rel: rel_default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonequilibriumSpec {
    pub mode: NoneqMode,
    /// Step of the density integrator (defaults to `evolution.dt`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Number of steps; alternatively `end_time`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_time: Option<f64>,
    #[serde(default = "trace_stride")]
    pub stride: usize,
    /// Amplitude of the extra perturbed run; 0 disables it.
    #[serde(default)]
    pub perturbation: f64,
    #[serde(default = "one")]
    pub perturbation_modes: f64,
    /// `C` in the equilibrium bound `max L1 < C (dx^2 + dt)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_c: Option<f64>,
}

fn trace_stride() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSpec {
    #[serde(default)]
    pub equations: Vec<EquationId>,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "node_eps")]
    pub node_eps: f64,
    /// Assemblies of the two-body momentum balances; the first is asserted.
    #[serde(default = "modes_default")]
    pub modes: Vec<AssemblyMode>,
    /// Quantum stress forms of the one-body balances; the first is asserted.
    #[serde(default = "pi_default")]
    pub pi_forms: Vec<PiForm>,
    #[serde(default)]
    pub tolerances: BTreeMap<EquationId, Tolerance>,
    #[serde(default)]
    pub uniqueness: UniquenessSpec,
    #[serde(default)]
    pub mixed_velocity: MixedVelocitySpec,
    #[serde(default)]
    pub permutation: PermutationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonequilibrium: Option<NonequilibriumSpec>,
}

fn node_eps() -> f64 {
    DEFAULT_NODE_EPS
}
fn modes_default() -> Vec<AssemblyMode> {
    vec![AssemblyMode::Derived]
}
fn pi_default() -> Vec<PiForm> {
    vec![PiForm::Standard]
}

impl Default for ChecksSpec {
    fn default() -> Self {
        Self {
            equations: Vec::new(),
            suites: Vec::new(),
            scheme: Scheme::Spectral,
            node_eps: node_eps(),
            modes: modes_default(),
            pi_forms: pi_default(),
            tolerances: BTreeMap::new(),
            uniqueness: UniquenessSpec::default(),
            mixed_velocity: MixedVelocitySpec::default(),
            permutation: PermutationSpec::default(),
            nonequilibrium: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementSpec {
    pub levels: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    /// Parses `text`, applies `key.path=value` overrides, then validates.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Scenario(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let text = toml::to_string(&table).map_err(|e| Error::Scenario(e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Scenario(e.to_string()))
    }

    /// Grid sizes of the refinement ladder (just `space.n` without one).
    pub fn levels(&self) -> Vec<usize> {
        self.refinement
            .as_ref()
            .map(|r| r.levels.clone())
            .unwrap_or_else(|| vec![self.space.n])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Scenario(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version = {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return bad(format!("id '{}' must be non-empty and contain no path separators", self.id));
        }
        if !matches!(self.space.dims, 1 | 2) {
            return bad(format!("space.dims = {}; expected 1 or 2", self.space.dims));
        }
        self.space.grid(self.space.n).map_err(|e| Error::Scenario(format!("space: {e}")))?;
        self.physics.params().map_err(|e| Error::Scenario(format!("physics: {e}")))?;
        if !(self.evolution.dt > 0.0 && self.evolution.dt.is_finite()) {
            return bad(format!("evolution.dt = {} must be positive", self.evolution.dt));
        }
        for eq in &self.checks.equations {
            if eq.dims() != self.space.dims {
                return bad(format!("checks.equations: {eq} needs a {}D space", eq.dims()));
            }
        }
        for eq in self.checks.tolerances.keys() {
            if !self.checks.equations.contains(eq) {
                return bad(format!("checks.tolerances.{eq} refers to an equation that is not checked"));
            }
        }
        for s in &self.checks.suites {
            if s.dims() != self.space.dims {
                return bad(format!("checks.suites: {} needs a {}D space", s.name(), s.dims()));
            }
        }
        if self.checks.suites.contains(&Suite::Nonequilibrium) && self.checks.nonequilibrium.is_none() {
            return bad("checks.suites lists nonequilibrium but [checks.nonequilibrium] is missing".into());
        }
        if let Some(ne) = &self.checks.nonequilibrium {
            if ne.steps.is_none() && ne.end_time.is_none() {
                return bad("checks.nonequilibrium needs steps or end_time".into());
            }
        }
        if self.checks.modes.is_empty() || self.checks.pi_forms.is_empty() {
            return bad("checks.modes and checks.pi_forms must not be empty".into());
        }
        if let Some(r) = &self.refinement {
            if r.levels.is_empty() {
                return bad("refinement.levels must not be empty".into());
            }
            if r.levels.windows(2).any(|w| w[1] <= w[0]) {
                return bad(format!("refinement.levels {:?} must be strictly increasing", r.levels));
            }
            for &n in &r.levels {
                self.space.grid(n).map_err(|e| Error::Scenario(format!("refinement.levels: {e}")))?;
            }
        }
        Ok(())
    }
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Sets `a.b.c = value` in a TOML table, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Scenario(format!("override '{spec}' is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Scenario(format!("override key '{path}' is malformed")));
    }
    let mut cur = table;
    for k in &keys[..keys.len() - 1] {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Scenario(format!("override '{path}': '{k}' is not a table")))?;
    }
    cur.insert(keys[keys.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

/// A scenario shipped with the library.
#[derive(Clone, Copy, Debug)]
pub struct Bundled {
    pub id: &'static str,
    pub source: &'static str,
}

pub const BUNDLED: [Bundled; 9] = [
    Bundled { id: "ho-ground-1p", source: include_str!("../../scenarios/ho-ground-1p.toml") },
    Bundled { id: "free-gauss-1p", source: include_str!("../../scenarios/free-gauss-1p.toml") },
    Bundled { id: "coupled-ho-2p", source: include_str!("../../scenarios/coupled-ho-2p.toml") },
    Bundled { id: "perm-equal-mass", source: include_str!("../../scenarios/perm-equal-mass.toml") },
    Bundled { id: "perm-equal-mass-anti", source: include_str!("../../scenarios/perm-equal-mass-anti.toml") },
    Bundled { id: "perm-unequal-mass", source: include_str!("../../scenarios/perm-unequal-mass.toml") },
    Bundled { id: "noneq-guided", source: include_str!("../../scenarios/noneq-guided.toml") },
    Bundled { id: "noneq-selfconsistent", source: include_str!("../../scenarios/noneq-selfconsistent.toml") },
    Bundled { id: "uniqueness-probe", source: include_str!("../../scenarios/uniqueness-probe.toml") },
];

pub fn bundled(id: &str) -> Option<&'static Bundled> {
    BUNDLED.iter().find(|b| b.id == id)
}

/// `(id, description)` of every bundled scenario whose id contains `filter`.
pub fn list_scenarios(filter: Option<&str>) -> Result<Vec<(String, String)>> {
    BUNDLED
        .iter()
        .filter(|b| filter.map_or(true, |f| b.id.contains(f)))
        .map(|b| Ok((b.id.to_string(), Scenario::from_toml(b.source)?.description)))
        .collect()
}
