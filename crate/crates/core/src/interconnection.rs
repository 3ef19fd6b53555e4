//! Closed loop between a dynamic and a game, integrated with fixed-step RK4.
//!
//! The full state is laid out as `(x | aux | z)`: population shares, the
//! dynamic's auxiliary payoff state (if any), then the game's internal state
//! (if any). The game output feeds the dynamic with a `+` sign.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{
    lead_lag_raw, local_graph_raw, passivated_payoff_raw, replicator_raw, DynamicsModel, DynamicsVariant,
};
use crate::error::{dim, param, Error, Result};
use crate::game::GameModel;
use crate::simplex::SimplexState;

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopSystem {
    dynamics: DynamicsModel,
    game: GameModel,
    n: usize,
    aux_dim: usize,
    initial: DVector<f64>,
    modified: Option<DMatrix<f64>>,
    time_sign: f64,
}

/// Builds the interconnection. `aux0` defaults to zeros; the LTI game's
/// internal state starts from whatever the game carries.
pub fn assemble(
    dynamics: DynamicsModel,
    game: GameModel,
    x0: &SimplexState,
    aux0: Option<&DVector<f64>>,
) -> Result<ClosedLoopSystem> {
    let n = x0.len();
    if game.strategies() != n {
        return Err(dim(format!("x0 has {n} strategies, game has {}", game.strategies())));
    }
    if let Some(req) = dynamics.required_strategies() {
        if req != n {
            return Err(dim(format!("{} dynamics is sized for {req} strategies, x0 has {n}", dynamics.name())));
        }
    }
    let aux_dim = dynamics.aux_dim(n);
    let modified = match (dynamics.variant(), &game) {
        (DynamicsVariant::LocalModified { group_size }, GameModel::Matrix(g)) => {
            Some(crate::dynamics::modified_payoff_matrix(g, *group_size)?.matrix().clone())
        }
        (DynamicsVariant::LocalModified { .. }, GameModel::Lti(_)) => {
            return Err(param("local_modified dynamics needs a matrix game"));
        }
        _ => None,
    };
    let mut initial = DVector::zeros(n + aux_dim + game.order());
    initial.rows_mut(0, n).copy_from(x0.as_vector());
    if let Some(aux) = aux0 {
        if aux.len() != aux_dim {
            return Err(dim(format!("aux0 has {} entries, {} dynamics needs {aux_dim}", aux.len(), dynamics.name())));
        }
        initial.rows_mut(n, aux_dim).copy_from(aux);
    }
    if let GameModel::Lti(g) = &game {
        initial.rows_mut(n + aux_dim, g.order()).copy_from(g.state());
    }
    Ok(ClosedLoopSystem { dynamics, game, n, aux_dim, initial, modified, time_sign: 1.0 })
}

impl ClosedLoopSystem {
    pub fn strategies(&self) -> usize {
        self.n
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    pub fn game_order(&self) -> usize {
        self.game.order()
    }

    pub fn state_dim(&self) -> usize {
        self.n + self.aux_dim + self.game.order()
    }

    pub fn output_dim(&self) -> usize {
        self.dynamics.output_dim(self.n)
    }

    pub fn dynamics(&self) -> &DynamicsModel {
        &self.dynamics
    }

    pub fn game(&self) -> &GameModel {
        &self.game
    }

    pub fn initial_state(&self) -> &DVector<f64> {
        &self.initial
    }

    /// Same loop restarted from `state`.
    pub fn with_state(&self, state: DVector<f64>) -> Result<Self> {
        self.check_state(&state)?;
        Ok(Self { initial: state, ..self.clone() })
    }

    /// Same loop with the vector field negated, for backward-in-time runs.
    pub fn reversed(&self) -> Self {
        Self { time_sign: -self.time_sign, ..self.clone() }
    }

    fn check_state(&self, state: &DVector<f64>) -> Result<()> {
        if state.len() != self.state_dim() {
            return Err(dim(format!("state has {} entries, loop has {}", state.len(), self.state_dim())));
        }
        Ok(())
    }

    /// Evaluates `(state', p, output)` at `state`.
    pub fn field(&self, state: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        self.check_state(state)?;
        let mut ws = Workspace::new(self);
        let mut d = DVector::zeros(self.state_dim());
        let mut p = DVector::zeros(self.n);
        let mut out = DVector::zeros(self.output_dim());
        self.eval(state.as_slice(), d.as_mut_slice(), p.as_mut_slice(), out.as_mut_slice(), &mut ws);
        Ok((d, p, out))
    }

    fn eval(&self, state: &[f64], deriv: &mut [f64], p: &mut [f64], out: &mut [f64], ws: &mut Workspace) {
        let n = self.n;
        let (x, rest) = state.split_at(n);
        let (aux, z) = rest.split_at(self.aux_dim);
        let (dx, drest) = deriv.split_at_mut(n);
        let (daux, dz) = drest.split_at_mut(self.aux_dim);

        match &self.game {
            GameModel::Matrix(g) => g.payoff_raw(x, p),
            GameModel::Lti(g) => {
                g.input_raw(x, &mut ws.input);
                g.eval_raw(z, &ws.input, p, dz);
            }
        }

        match self.dynamics.variant() {
            DynamicsVariant::Standard => replicator_raw(x, p, dx),
            DynamicsVariant::LocalGraph { adjacency } => local_graph_raw(x, p, adjacency, dx),
            DynamicsVariant::LocalModified { .. } => {
                let a = self.modified.as_ref().expect("set at assembly");
                for i in 0..n {
                    ws.effective[i] = (0..n).map(|j| a[(i, j)] * x[j]).sum();
                }
                replicator_raw(x, &ws.effective, dx);
            }
            DynamicsVariant::SecondOrderIntegral => {
                replicator_raw(x, aux, dx);
                daux.copy_from_slice(p);
            }
            DynamicsVariant::LeadLag { alpha, beta } => lead_lag_raw(x, aux, p, *alpha, *beta, dx, daux, out),
            DynamicsVariant::Passivated { gain } => {
                passivated_payoff_raw(x, p, gain.as_slice(), out);
                replicator_raw(x, out, dx);
            }
        }

        if self.time_sign < 0.0 {
            deriv.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

struct Workspace {
    input: Vec<f64>,
    effective: Vec<f64>,
}

impl Workspace {
    fn new(sys: &ClosedLoopSystem) -> Self {
        Self { input: vec![0.0; sys.n], effective: vec![0.0; sys.n] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub horizon: f64,
    pub record_stride: usize,
    pub renormalize_threshold: f64,
    pub clamp_epsilon: f64,
}

impl IntegratorConfig {
    pub const DEFAULT_STEP: f64 = 1e-3;
    pub const DEFAULT_STRIDE: usize = 10;

    pub fn new(step: f64, horizon: f64) -> Result<Self> {
        let cfg = Self {
            step,
            horizon,
            record_stride: Self::DEFAULT_STRIDE,
            renormalize_threshold: 1e-12,
            clamp_epsilon: 1e-15,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        self.record_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(param(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon > self.step && self.horizon.is_finite()) {
            return Err(param(format!("horizon {} must exceed the step {}", self.horizon, self.step)));
        }
        if self.record_stride == 0 {
            return Err(param("record stride must be at least 1"));
        }
        Ok(())
    }

    /// Number of RK4 steps; the last one is shortened to land on the horizon.
    pub fn steps(&self) -> usize {
        (self.horizon / self.step - 1e-9).ceil() as usize
    }
}

/// Recorded closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub payoffs: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
    pub strategies: usize,
    pub aux_dim: usize,
    pub game_order: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn shares(&self, k: usize) -> &[f64] {
        &self.states[k].as_slice()[..self.strategies]
    }

    pub fn aux(&self, k: usize) -> &[f64] {
        &self.states[k].as_slice()[self.strategies..self.strategies + self.aux_dim]
    }

    pub fn game_state(&self, k: usize) -> &[f64] {
        &self.states[k].as_slice()[self.strategies + self.aux_dim..]
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory records t = 0")
    }

    pub fn final_shares(&self) -> &[f64] {
        self.shares(self.len() - 1)
    }
}

pub fn integrate(sys: &ClosedLoopSystem, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let dimn = sys.state_dim();
    let n = sys.n;
    let no = sys.output_dim();
    let mut ws = Workspace::new(sys);
    let mut y = sys.initial.as_slice().to_vec();
    let mut k = [vec![0.0; dimn], vec![0.0; dimn], vec![0.0; dimn], vec![0.0; dimn]];
    let mut stage = vec![0.0; dimn];
    let mut p = vec![0.0; n];
    let mut out = vec![0.0; no];

    let steps = cfg.steps();
    let capacity = steps / cfg.record_stride + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        payoffs: Vec::with_capacity(capacity),
        outputs: Vec::with_capacity(capacity),
        strategies: n,
        aux_dim: sys.aux_dim,
        game_order: sys.game.order(),
    };
    let mut record = |t: f64, y: &[f64], traj: &mut Trajectory, ws: &mut Workspace| {
        let mut scratch = vec![0.0; dimn];
        sys.eval(y, &mut scratch, &mut p, &mut out, ws);
        traj.times.push(t);
        traj.states.push(DVector::from_column_slice(y));
        traj.payoffs.push(DVector::from_column_slice(&p));
        traj.outputs.push(DVector::from_column_slice(&out));
    };
    record(0.0, &y, &mut traj, &mut ws);

    let mut pbuf = vec![0.0; n];
    let mut obuf = vec![0.0; no];
    for step in 1..=steps {
        let t0 = (step - 1) as f64 * cfg.step;
        let t1 = if step == steps { cfg.horizon } else { step as f64 * cfg.step };
        let h = t1 - t0;

        sys.eval(&y, &mut k[0], &mut pbuf, &mut obuf, &mut ws);
        for i in 0..dimn {
            stage[i] = y[i] + 0.5 * h * k[0][i];
        }
        sys.eval(&stage, &mut k[1], &mut pbuf, &mut obuf, &mut ws);
        for i in 0..dimn {
            stage[i] = y[i] + 0.5 * h * k[1][i];
        }
        sys.eval(&stage, &mut k[2], &mut pbuf, &mut obuf, &mut ws);
        for i in 0..dimn {
            stage[i] = y[i] + h * k[2][i];
        }
        sys.eval(&stage, &mut k[3], &mut pbuf, &mut obuf, &mut ws);
        for i in 0..dimn {
            y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }

        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical { time: t1 });
        }
        project_shares(&mut y[..n], cfg, t1)?;

        if step % cfg.record_stride == 0 || step == steps {
            record(t1, &y, &mut traj, &mut ws);
        }
    }
    Ok(traj)
}

/// Clamps rounding-level negatives and renormalizes drifted sums.
fn project_shares(x: &mut [f64], cfg: &IntegratorConfig, time: f64) -> Result<()> {
    let mut clamped = false;
    for (i, v) in x.iter_mut().enumerate() {
        if *v < -cfg.clamp_epsilon {
            return Err(Error::Blowup { time, reason: format!("x_{} = {:e} left the simplex", i + 1, v) });
        }
        if *v < 0.0 {
            *v = 0.0;
            clamped = true;
        }
    }
    let s: f64 = x.iter().sum();
    if clamped || (s - 1.0).abs() > cfg.renormalize_threshold {
        x.iter_mut().for_each(|v| *v /= s);
    }
    Ok(())
}

/// Euclidean norm of the closed-loop vector field at `state`.
pub fn rest_point_residual(sys: &ClosedLoopSystem, state: &DVector<f64>) -> Result<f64> {
    Ok(sys.field(state)?.0.norm())
}
