//! Scenario files, runs, and their on-disk outputs.
//!
//! A scenario is a JSON document:
//!
//! ```json
//! {
//!   "name": "rps-lossless",
//!   "game": { "type": "rps", "w": 1.0, "l": 1.0 },
//!   "dynamics": { "type": "standard" },
//!   "x0": [0.5, 0.25, 0.25],
//!   "integrator": { "h": 0.001, "horizon": 50.0, "record_stride": 10 },
//!   "certifications": [ { "type": "ledger", "kind": "payoff" }, { "type": "classify" } ]
//! }
//! ```
//!
//! Outputs of [`run_scenario`]:
//!
//! * `trajectory.csv`: `t, x_1..x_n, p_1..p_n`, then auxiliary columns
//!   (`phat_i`, game state `z_k`, lead-lag output `y_i` or passivated
//!   effective payoff `tdot_i`).
//! * `ledger.csv`: `t, V, supply, cumulative_supply, residual` (one file per
//!   requested ledger, the second and later ones suffixed `_2`, `_3`, ...).
//! * `simplex.csv` (`t, u, v`) and `simplex.svg` for three strategies.
//! * `summary.json`, mirroring [`RunSummary`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certify::{
    classify_lead_lag, classify_matrix_game, closed_loop_matrix, dc_gain_condition, frequency_sweep_lti, linearize_rd,
    log_grid, passivity_ledger, reduce_game, verify_ni_lemma, DissipationLedger, NiCertificate, StorageFunction,
    SupplyKind, SweepKind,
};
use crate::dynamics::{DynamicsModel, DynamicsVariant};
use crate::error::Error;
use crate::game::{make_rps_game, matrix_from_rows, GameModel, LtiGame, MatrixGame, StateSpace};
use crate::interconnection::{
    assemble, integrate, rest_point_residual, ClosedLoopSystem, IntegratorConfig, Trajectory,
};
use crate::simplex::SimplexState;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("certification cannot be applied: {0}")]
    Certification(String),
}

impl ScenarioError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Io { .. } | ScenarioError::Parse(_) | ScenarioError::Validation(_) => 2,
            ScenarioError::Numerical(_) => 3,
            ScenarioError::Certification(_) => 4,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Io { path: path.display().to_string(), source }
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub game: GameSpec,
    pub dynamics: DynamicsSpec,
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux0: Option<Vec<f64>>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub certifications: Vec<CertificationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    Rps {
        w: f64,
        l: f64,
    },
    Matrix {
        a: Vec<Vec<f64>>,
    },
    Lti {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        d: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z0: Option<Vec<f64>>,
        /// Reference distribution subtracted from `x` before it enters the game.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_ref: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DynamicsSpec {
    Standard,
    LocalGraph { adjacency: Vec<Vec<f64>> },
    LocalModified { group_size: u32 },
    SecondOrderIntegral,
    LeadLag { alpha: f64, beta: f64 },
    Passivated { gain: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_step")]
    pub h: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

fn default_step() -> f64 {
    IntegratorConfig::DEFAULT_STEP
}
fn default_horizon() -> f64 {
    50.0
}
fn default_stride() -> usize {
    IntegratorConfig::DEFAULT_STRIDE
}
fn default_tol() -> f64 {
    1e-10
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self { h: default_step(), horizon: default_horizon(), record_stride: default_stride() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LedgerKind {
    Payoff,
    EffectivePayoff,
    IntegratedPayoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { start: 1e-3, stop: 1e3, points: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpaceSpec {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

impl StateSpaceSpec {
    pub fn build(&self) -> Result<StateSpace, ScenarioError> {
        state_space(&self.a, &self.b, &self.c, &self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CertificationSpec {
    Ledger {
        kind: LedgerKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_star: Option<Vec<f64>>,
    },
    Classify {
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Freq {
        kind: SweepKind,
        #[serde(default)]
        grid: GridSpec,
    },
    Lmi {
        p: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        l: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<Vec<Vec<f64>>>,
    },
    Linearize {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_star: Option<Vec<f64>>,
    },
    Stability {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_star: Option<Vec<f64>>,
    },
    DcGain {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        plant: Option<StateSpaceSpec>,
    },
}

impl CertificationSpec {
    fn label(&self) -> &'static str {
        match self {
            CertificationSpec::Ledger { .. } => "ledger",
            CertificationSpec::Classify { .. } => "classify",
            CertificationSpec::Freq { .. } => "freq",
            CertificationSpec::Lmi { .. } => "lmi",
            CertificationSpec::Linearize { .. } => "linearize",
            CertificationSpec::Stability { .. } => "stability",
            CertificationSpec::DcGain { .. } => "dc_gain",
        }
    }
}

fn rows(what: &str, r: &[Vec<f64>]) -> Result<DMatrix<f64>, ScenarioError> {
    matrix_from_rows(r).map_err(|e| invalid(format!("{what}: {e}")))
}

fn state_space(a: &[Vec<f64>], b: &[Vec<f64>], c: &[Vec<f64>], d: &[Vec<f64>]) -> Result<StateSpace, ScenarioError> {
    let d = rows("d", d)?;
    let a = rows("a", a)?;
    let b = if b.is_empty() { DMatrix::zeros(0, d.ncols()) } else { rows("b", b)? };
    let c = if c.iter().all(|r| r.is_empty()) { DMatrix::zeros(d.nrows(), a.ncols()) } else { rows("c", c)? };
    StateSpace::new(a, b, c, d).map_err(|e| invalid(format!("game: {e}")))
}

fn simplex(what: &str, v: &[f64]) -> Result<SimplexState, ScenarioError> {
    SimplexState::from_slice(v).map_err(|e| invalid(format!("{what}: {e}")))
}

/// Parses and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical pretty-printed form; parsing it back yields an equal config.
pub fn to_canonical_json(cfg: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config is always serializable")
}

/// Everything needed to run a validated scenario.
pub struct Prepared {
    pub system: ClosedLoopSystem,
    pub integrator: IntegratorConfig,
}

impl ScenarioConfig {
    /// Runs every cross-field check without integrating.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let prepared = self.prepare()?;
        let n = self.x0.len();
        for (k, cert) in self.certifications.iter().enumerate() {
            let field = format!("certifications[{k}]");
            let check_len = |name: &str, v: &Option<Vec<f64>>| -> Result<(), ScenarioError> {
                match v {
                    Some(v) if v.len() != n => {
                        Err(invalid(format!("{field}.{name} has {} entries but x0 has {n}", v.len())))
                    }
                    Some(v) => simplex(&format!("{field}.{name}"), v).map(|_| ()),
                    None => Ok(()),
                }
            };
            match cert {
                CertificationSpec::Ledger { x_star, .. }
                | CertificationSpec::Linearize { x_star }
                | CertificationSpec::Stability { x_star } => check_len("x_star", x_star)?,
                CertificationSpec::Freq { grid, .. } => {
                    log_grid(grid.start, grid.stop, grid.points).map_err(|e| invalid(format!("{field}.grid: {e}")))?;
                }
                CertificationSpec::Lmi { p, .. } => {
                    let p = rows(&format!("{field}.p"), p)?;
                    let order = prepared.system.game_order();
                    if p.nrows() != order || p.ncols() != order {
                        return Err(invalid(format!(
                            "{field}.p is {}x{} but game.a is {order}x{order}",
                            p.nrows(),
                            p.ncols()
                        )));
                    }
                }
                CertificationSpec::DcGain { plant: Some(plant) } => {
                    plant.build()?;
                }
                CertificationSpec::Classify { .. } | CertificationSpec::DcGain { plant: None } => {}
            }
        }
        Ok(())
    }

    pub fn prepare(&self) -> Result<Prepared, ScenarioError> {
        let n = self.x0.len();
        let x0 = simplex("x0", &self.x0)?;

        let game = match &self.game {
            GameSpec::Rps { w, l } => {
                if n != 3 {
                    return Err(invalid(format!("game.type rps has 3 strategies but x0 has {n} entries")));
                }
                GameModel::Matrix(make_rps_game(*w, *l).map_err(|e| invalid(format!("game: {e}")))?)
            }
            GameSpec::Matrix { a } => {
                let g = MatrixGame::new(rows("game.a", a)?).map_err(|e| invalid(format!("game.a: {e}")))?;
                if g.strategies() != n {
                    return Err(invalid(format!("game.a is {0}x{0} but x0 has {n} entries", g.strategies())));
                }
                GameModel::Matrix(g)
            }
            GameSpec::Lti { a, b, c, d, z0, x_ref } => {
                let sys = state_space(a, b, c, d)?;
                if sys.inputs() != n {
                    return Err(invalid(format!("game.b has {} columns but x0 has {n} entries", sys.inputs())));
                }
                if sys.outputs() != n {
                    return Err(invalid(format!("game.c has {} rows but x0 has {n} entries", sys.outputs())));
                }
                let mut g = LtiGame::new(sys).map_err(|e| invalid(format!("game: {e}")))?;
                if let Some(z0) = z0 {
                    g = g.with_state(DVector::from_column_slice(z0)).map_err(|e| invalid(format!("game.z0: {e}")))?;
                }
                if let Some(r) = x_ref {
                    if r.len() != n {
                        return Err(invalid(format!("game.x_ref has {} entries but x0 has {n}", r.len())));
                    }
                    g = g
                        .with_reference(DVector::from_column_slice(r))
                        .map_err(|e| invalid(format!("game.x_ref: {e}")))?;
                }
                GameModel::Lti(g)
            }
        };

        let variant = match &self.dynamics {
            DynamicsSpec::Standard => DynamicsVariant::Standard,
            DynamicsSpec::LocalGraph { adjacency } => {
                let adj = rows("dynamics.adjacency", adjacency)?;
                if adj.nrows() != n || adj.ncols() != n {
                    return Err(invalid(format!(
                        "dynamics.adjacency is {}x{} but x0 has {n} entries",
                        adj.nrows(),
                        adj.ncols()
                    )));
                }
                DynamicsVariant::LocalGraph { adjacency: adj }
            }
            DynamicsSpec::LocalModified { group_size } => DynamicsVariant::LocalModified { group_size: *group_size },
            DynamicsSpec::SecondOrderIntegral => DynamicsVariant::SecondOrderIntegral,
            DynamicsSpec::LeadLag { alpha, beta } => DynamicsVariant::LeadLag { alpha: *alpha, beta: *beta },
            DynamicsSpec::Passivated { gain } => {
                if gain.len() != n {
                    return Err(invalid(format!("dynamics.gain has {} entries but x0 has {n}", gain.len())));
                }
                DynamicsVariant::Passivated { gain: DVector::from_column_slice(gain) }
            }
        };
        let dynamics = DynamicsModel::new(variant).map_err(|e| invalid(format!("dynamics: {e}")))?;

        let aux_dim = dynamics.aux_dim(n);
        let aux0 = match &self.aux0 {
            Some(a) if a.len() != aux_dim => {
                return Err(invalid(format!(
                    "aux0 has {} entries but dynamics.type {} needs {aux_dim}",
                    a.len(),
                    dynamics.name()
                )))
            }
            Some(a) => Some(DVector::from_column_slice(a)),
            None => None,
        };
        let system = assemble(dynamics, game, &x0, aux0.as_ref()).map_err(|e| invalid(e.to_string()))?;

        let spec = self.integrator;
        let integrator = IntegratorConfig::new(spec.h, spec.horizon)
            .and_then(|c| c.with_stride(spec.record_stride))
            .map_err(|e| invalid(format!("integrator: {e}")))?;
        Ok(Prepared { system, integrator })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Computed,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub certification: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub metrics: BTreeMap<String, f64>,
    /// The certificate was structurally inapplicable (exit code 4).
    #[serde(skip)]
    pub hard_failure: bool,
}

impl Verdict {
    fn new(label: &str, status: Status) -> Self {
        Self {
            certification: label.to_string(),
            status,
            outcome: None,
            reason: None,
            metrics: BTreeMap::new(),
            hard_failure: false,
        }
    }

    fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    fn outcome(mut self, o: impl Into<String>) -> Self {
        self.outcome = Some(o.into());
        self
    }

    fn reason(mut self, r: impl Into<String>) -> Self {
        self.reason = Some(r.into());
        self
    }

    fn inapplicable(label: &str, reason: impl Into<String>, hard: bool) -> Self {
        let mut v = Self::new(label, Status::NotApplicable).reason(reason);
        v.hard_failure = hard;
        v
    }

    fn pass_if(label: &str, ok: bool) -> Self {
        Self::new(label, if ok { Status::Pass } else { Status::Fail })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub final_time: f64,
    pub final_state: Vec<f64>,
    pub rest_point_residual: f64,
    pub ledger_max_residual: Option<f64>,
    pub verdicts: Vec<Verdict>,
    pub wall_time: f64,
}

impl RunSummary {
    pub fn has_hard_failure(&self) -> bool {
        self.verdicts.iter().any(|v| v.hard_failure)
    }
}

/// Ledger residual accepted for energy supplies, and for the integrated
/// (negative-imaginary) supply.
pub const LEDGER_TOL: f64 = 1e-4;
pub const NI_LEDGER_TOL: f64 = 1e-3;

/// Integrates the scenario, writes its outputs into `out_dir` and returns
/// the summary. Only integration failures are errors; inapplicable
/// certificates are recorded in the summary.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunSummary, ScenarioError> {
    let started = Instant::now();
    let prepared = cfg.prepare()?;
    let sys = &prepared.system;
    let traj = integrate(sys, &prepared.integrator).map_err(ScenarioError::Numerical)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    write_file(&out_dir.join("trajectory.csv"), &trajectory_csv(sys, &traj))?;
    if traj.strategies == 3 {
        write_file(&out_dir.join("simplex.csv"), &simplex_csv(&traj))?;
        write_file(&out_dir.join("simplex.svg"), &simplex_svg(&traj))?;
    }

    let mut verdicts = Vec::with_capacity(cfg.certifications.len());
    let mut ledger_max: Option<f64> = None;
    let mut ledger_files = 0;
    for cert in &cfg.certifications {
        let verdict = match cert {
            CertificationSpec::Ledger { kind, x_star } => match run_ledger(sys, &traj, *kind, x_star.as_deref()) {
                Ok(ledger) => {
                    ledger_files += 1;
                    let file =
                        if ledger_files == 1 { "ledger.csv".to_string() } else { format!("ledger_{ledger_files}.csv") };
                    write_file(&out_dir.join(file), &ledger_csv(&ledger))?;
                    let max = ledger.max_abs_residual();
                    ledger_max = Some(ledger_max.map_or(max, |m| m.max(max)));
                    let tol = if *kind == LedgerKind::IntegratedPayoff { NI_LEDGER_TOL } else { LEDGER_TOL };
                    let mut v = Verdict::pass_if("ledger", max <= tol)
                        .outcome(serde_json::to_value(kind).unwrap().as_str().unwrap())
                        .metric("max_abs_residual", max)
                        .metric("max_storage_drift", ledger.max_storage_drift())
                        .metric("end_time", ledger.end_time())
                        .metric("final_cumulative_supply", *ledger.cumulative_supply.last().unwrap());
                    if let Some(cut) = ledger.boundary_cutoff {
                        v = v.metric("boundary_cutoff", cut).reason(format!(
                            "trajectory reached the boundary at t = {cut}; ledger ends at t = {}",
                            ledger.end_time()
                        ));
                    }
                    v
                }
                Err(e) => e,
            },
            other => certify(sys, &traj, other),
        };
        verdicts.push(verdict);
    }

    let summary = RunSummary {
        name: cfg.name.clone(),
        final_time: *traj.times.last().unwrap(),
        final_state: traj.final_state().iter().copied().collect(),
        rest_point_residual: rest_point_residual(sys, traj.final_state()).map_err(ScenarioError::Numerical)?,
        ledger_max_residual: ledger_max,
        verdicts,
        wall_time: started.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary is serializable");
    write_file(&out_dir.join("summary.json"), &json)?;
    Ok(summary)
}

fn x_star_or_default(sys: &ClosedLoopSystem, given: Option<&[f64]>) -> Result<SimplexState, Verdict> {
    let as_verdict = |e: Error| Verdict::inapplicable("x_star", e.to_string(), false);
    match given {
        Some(v) => SimplexState::from_slice(v).map_err(as_verdict),
        None => match sys.game() {
            GameModel::Lti(g) if g.reference().is_some() => {
                SimplexState::new(g.reference().unwrap().clone()).map_err(as_verdict)
            }
            _ => SimplexState::barycenter(sys.strategies()).map_err(as_verdict),
        },
    }
}

fn run_ledger(
    sys: &ClosedLoopSystem,
    traj: &Trajectory,
    kind: LedgerKind,
    x_star: Option<&[f64]>,
) -> Result<DissipationLedger, Verdict> {
    let x_star = x_star_or_default(sys, x_star).map_err(|mut v| {
        v.certification = "ledger".into();
        v
    })?;
    let supply = match (kind, sys.dynamics().variant()) {
        (LedgerKind::Payoff, _) => SupplyKind::Payoff,
        (LedgerKind::EffectivePayoff, DynamicsVariant::Passivated { gain }) => {
            SupplyKind::EffectivePayoff { gain: gain.clone() }
        }
        (LedgerKind::EffectivePayoff, _) => {
            return Err(Verdict::inapplicable("ledger", "effective_payoff supply needs passivated dynamics", true))
        }
        (LedgerKind::IntegratedPayoff, DynamicsVariant::SecondOrderIntegral) => SupplyKind::IntegratedPayoff,
        (LedgerKind::IntegratedPayoff, _) => {
            return Err(Verdict::inapplicable(
                "ledger",
                "integrated_payoff supply needs second_order_integral dynamics",
                true,
            ))
        }
    };
    let storage = match sys.dynamics().variant() {
        DynamicsVariant::LocalModified { group_size } => StorageFunction::Local { group_size: *group_size },
        _ => StorageFunction::Standard,
    };
    passivity_ledger(traj, &x_star, &supply, storage).map_err(|e| match e {
        Error::Domain { .. } => Verdict::inapplicable("ledger", e.to_string(), false),
        other => Verdict::inapplicable("ledger", other.to_string(), true),
    })
}

fn lti_system(sys: &ClosedLoopSystem) -> Option<&StateSpace> {
    match sys.game() {
        GameModel::Lti(g) => Some(g.system()),
        GameModel::Matrix(_) => None,
    }
}

fn hard(label: &str, e: Error) -> Verdict {
    let soft = matches!(e, Error::Domain { .. });
    Verdict::inapplicable(label, e.to_string(), !soft)
}

fn certify(sys: &ClosedLoopSystem, traj: &Trajectory, cert: &CertificationSpec) -> Verdict {
    let label = cert.label();
    match cert {
        CertificationSpec::Ledger { .. } => unreachable!("handled by run_scenario"),
        CertificationSpec::Classify { tol } => match sys.game() {
            GameModel::Matrix(g) => {
                let class = classify_matrix_game(g, *tol);
                let ev = crate::certify::tangent_symmetric_eigenvalues(g);
                Verdict::new(label, Status::Computed)
                    .outcome(serde_json::to_value(class).unwrap().as_str().unwrap())
                    .metric("min_eigenvalue", ev.min())
                    .metric("max_eigenvalue", ev.max())
            }
            GameModel::Lti(_) => Verdict::inapplicable(label, "classification applies to matrix games", true),
        },
        CertificationSpec::Freq { kind, grid } => {
            let grid = match log_grid(grid.start, grid.stop, grid.points) {
                Ok(g) => g,
                Err(e) => return hard(label, e),
            };
            if let Some(g) = lti_system(sys) {
                match frequency_sweep_lti(g, &grid, *kind) {
                    Ok(r) => Verdict::pass_if(label, r.pass)
                        .outcome(serde_json::to_value(r.kind).unwrap().as_str().unwrap())
                        .reason("grid-certified: the condition is checked on the sampled frequencies only")
                        .metric("worst_omega", r.worst.omega)
                        .metric("worst_value", r.worst_value())
                        .metric("grid_points", r.grid_points as f64),
                    Err(e) => hard(label, e),
                }
            } else if let DynamicsVariant::LeadLag { alpha, beta } = sys.dynamics().variant() {
                match classify_lead_lag(*alpha, *beta) {
                    Ok(v) => Verdict::pass_if(label, v.sweep_agrees)
                        .outcome(serde_json::to_value(v.class).unwrap().as_str().unwrap())
                        .metric("min_re", v.min_re)
                        .metric("max_im", v.max_im)
                        .metric("max_closed_form_gap", v.max_closed_form_gap),
                    Err(e) => hard(label, e),
                }
            } else {
                Verdict::inapplicable(label, "frequency tests need an lti game or lead_lag dynamics", true)
            }
        }
        CertificationSpec::Lmi { p, l, w } => {
            let Some(g) = lti_system(sys) else {
                return Verdict::inapplicable(label, "the NI lemma applies to lti games", true);
            };
            let cert = match build_certificate(p, l.as_deref(), w.as_deref()) {
                Ok(c) => c,
                Err(e) => return Verdict::inapplicable(label, e.to_string(), true),
            };
            match verify_ni_lemma(g, &cert) {
                Ok(r) => {
                    let mut v = Verdict::pass_if(label, r.pass)
                        .metric("lmi_max_eig", r.lmi_max_eig)
                        .metric("p_min_eig", r.p_min_eig);
                    if let Some(gap) = r.factor_gap {
                        v = v.metric("factor_gap", gap);
                    }
                    v
                }
                Err(e) => hard(label, e),
            }
        }
        CertificationSpec::Linearize { x_star } => {
            let x_star = match x_star_or_default(sys, x_star.as_deref()) {
                Ok(x) => x,
                Err(v) => return Verdict { certification: label.into(), ..v },
            };
            match linearize_rd(&x_star) {
                Ok(lin) => {
                    let k = lin.b_r.nrows();
                    Verdict::new(label, Status::Computed)
                        .metric("a_r_max_abs", lin.a_r.amax())
                        .metric("b_r_minus_identity_max_abs", (&lin.b_r - DMatrix::identity(k, k)).amax())
                }
                Err(e) => hard(label, e),
            }
        }
        CertificationSpec::Stability { x_star } => {
            let (Some(g), DynamicsVariant::SecondOrderIntegral) = (lti_system(sys), sys.dynamics().variant()) else {
                return Verdict::inapplicable(
                    label,
                    "stability of the linearized loop needs second_order_integral dynamics with an lti game",
                    true,
                );
            };
            let x_star = match x_star_or_default(sys, x_star.as_deref()) {
                Ok(x) => x,
                Err(v) => return Verdict { certification: label.into(), ..v },
            };
            let result = linearize_rd(&x_star).and_then(|lin| {
                let controller = reduce_game(g, &lin.basis)?;
                closed_loop_matrix(&lin.reduced_realization(), &controller)
            });
            match result {
                Ok(cl) => Verdict::pass_if(label, cl.hurwitz).metric("spectral_abscissa", cl.spectral_abscissa),
                Err(e) => hard(label, e),
            }
        }
        CertificationSpec::DcGain { plant } => {
            let Some(g) = lti_system(sys) else {
                return Verdict::inapplicable(label, "the DC gain condition needs an lti game", true);
            };
            let result = match plant {
                Some(p) => match p.build() {
                    Ok(p) => dc_gain_condition(&p, g),
                    Err(e) => return Verdict::inapplicable(label, e.to_string(), true),
                },
                None => {
                    let x_star = match x_star_or_default(sys, None) {
                        Ok(x) => x,
                        Err(v) => return Verdict { certification: label.into(), ..v },
                    };
                    linearize_rd(&x_star)
                        .and_then(|lin| Ok((lin.reduced_realization(), reduce_game(g, &lin.basis)?)))
                        .and_then(|(p, c)| dc_gain_condition(&p, &c))
                }
            };
            let _ = traj;
            match result {
                Ok(r) => Verdict::pass_if(label, r.pass).metric("lambda_max", r.lambda_max),
                Err(e) => hard(label, e),
            }
        }
    }
}

fn build_certificate(
    p: &[Vec<f64>],
    l: Option<&[Vec<f64>]>,
    w: Option<&[Vec<f64>]>,
) -> Result<NiCertificate, ScenarioError> {
    let cert = NiCertificate::new(rows("p", p)?);
    match (l, w) {
        (Some(l), Some(w)) => Ok(cert.with_factors(rows("l", l)?, rows("w", w)?)),
        (None, None) => Ok(cert),
        _ => Err(invalid("supply both l and w, or neither")),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), ScenarioError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn csv_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

/// `t, x_1..x_n, p_1..p_n, phat_i.., z_k.., (y_i | tdot_i)..`
pub fn trajectory_csv(sys: &ClosedLoopSystem, traj: &Trajectory) -> String {
    let n = traj.strategies;
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.extend((1..=n).map(|i| format!("p_{i}")));
    header.extend((1..=traj.aux_dim).map(|i| format!("phat_{i}")));
    header.extend((1..=traj.game_order).map(|k| format!("z_{k}")));
    let out_name = match sys.dynamics().variant() {
        DynamicsVariant::Passivated { .. } => "tdot",
        _ => "y",
    };
    header.extend((1..=sys.output_dim()).map(|i| format!("{out_name}_{i}")));
    let mut out = header.join(",");
    out.push('\n');
    for k in 0..traj.len() {
        let row = std::iter::once(traj.times[k])
            .chain(traj.shares(k).iter().copied())
            .chain(traj.payoffs[k].iter().copied())
            .chain(traj.states[k].iter().skip(n).copied())
            .chain(traj.outputs[k].iter().copied());
        csv_row(&mut out, row);
    }
    out
}

pub fn ledger_csv(ledger: &DissipationLedger) -> String {
    let mut out = String::from("t,V,supply,cumulative_supply,residual\n");
    for k in 0..ledger.len() {
        csv_row(
            &mut out,
            [ledger.times[k], ledger.storage[k], ledger.supply[k], ledger.cumulative_supply[k], ledger.residual[k]],
        );
    }
    out
}

/// Planar coordinates for a 3-strategy state: vertices land on `(0, 0)`,
/// `(1, 0)` and `(1/2, sqrt(3)/2)`.
pub fn simplex_project(x: &SimplexState) -> crate::Result<(f64, f64)> {
    if x.len() != 3 {
        return Err(Error::Parameter(format!("simplex projection needs 3 strategies, got {}", x.len())));
    }
    let x = x.as_vector();
    Ok(project3(x[1], x[2]))
}

fn project3(x2: f64, x3: f64) -> (f64, f64) {
    (x2 + 0.5 * x3, 0.5 * 3f64.sqrt() * x3)
}

fn simplex_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,u,v\n");
    for k in 0..traj.len() {
        let x = traj.shares(k);
        let (u, v) = project3(x[1], x[2]);
        csv_row(&mut out, [traj.times[k], u, v]);
    }
    out
}

fn simplex_svg(traj: &Trajectory) -> String {
    const SIZE: f64 = 400.0;
    const PAD: f64 = 20.0;
    let to_px = |(u, v): (f64, f64)| (PAD + u * SIZE, PAD + (0.5 * 3f64.sqrt() - v) * SIZE);
    let mut path = String::new();
    for k in 0..traj.len() {
        let x = traj.shares(k);
        let (px, py) = to_px(project3(x[1], x[2]));
        write!(path, "{}{px:.2},{py:.2}", if k == 0 { "M" } else { " L" }).unwrap();
    }
    let (ax, ay) = to_px((0.0, 0.0));
    let (bx, by) = to_px((1.0, 0.0));
    let (cx, cy) = to_px((0.5, 0.5 * 3f64.sqrt()));
    let h = 0.5 * 3f64.sqrt() * SIZE + 2.0 * PAD;
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h:.0}\" viewBox=\"0 0 {w} {h:.0}\">\n\
         <polygon points=\"{ax:.2},{ay:.2} {bx:.2},{by:.2} {cx:.2},{cy:.2}\" fill=\"none\" stroke=\"#888\"/>\n\
         <path d=\"{path}\" fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1\"/>\n</svg>\n",
        w = SIZE + 2.0 * PAD
    )
}
