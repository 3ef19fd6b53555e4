//! Mean dynamics and the replicator-dynamics family.
//!
//! Every field is exposed twice: a typed public function taking a validated
//! [`SimplexState`], and a slice kernel used by the closed-loop integrator,
//! whose intermediate RK stages may sit a rounding error off the simplex.

use nalgebra::{DMatrix, DVector};

use crate::error::{dim, param, Error, Result};
use crate::game::MatrixGame;
use crate::simplex::{SimplexState, TangentVector};

/// Tolerance below the floor `K` still treated as admissible by
/// [`ImitationOfSuccess`].
pub const ADMISSIBILITY_TOL: f64 = 1e-12;

/// Maps `(p, x)` to a switch-rate matrix; entry `(i, j)` is the rate at which
/// `i`-strategists switch to `j`.
pub trait RevisionProtocol {
    fn switch_rates(&self, p: &DVector<f64>, x: &SimplexState) -> Result<DMatrix<f64>>;
}

impl<F> RevisionProtocol for F
where
    F: Fn(&DVector<f64>, &SimplexState) -> DMatrix<f64>,
{
    fn switch_rates(&self, p: &DVector<f64>, x: &SimplexState) -> Result<DMatrix<f64>> {
        Ok(self(p, x))
    }
}

/// `rho_ij = x_j (p_j - K)`, admissible while `K <= min_j p_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImitationOfSuccess {
    pub floor: f64,
}

pub fn imitation_of_success(floor: f64) -> ImitationOfSuccess {
    ImitationOfSuccess { floor }
}

impl RevisionProtocol for ImitationOfSuccess {
    fn switch_rates(&self, p: &DVector<f64>, x: &SimplexState) -> Result<DMatrix<f64>> {
        let n = x.len();
        if p.len() != n {
            return Err(dim(format!("payoff has {} entries, state has {n}", p.len())));
        }
        let x = x.as_vector();
        let mut rho = DMatrix::zeros(n, n);
        for j in 0..n {
            let excess = p[j] - self.floor;
            if excess < -ADMISSIBILITY_TOL {
                return Err(Error::Protocol { from: 0, to: j, rate: x[j] * excess });
            }
            let rate = x[j] * excess.max(0.0);
            for i in 0..n {
                rho[(i, j)] = rate;
            }
        }
        Ok(rho)
    }
}

/// `x_i' = sum_j x_j rho_ji - x_i sum_j rho_ij`.
pub fn mean_dynamic(protocol: &impl RevisionProtocol, x: &SimplexState, p: &DVector<f64>) -> Result<TangentVector> {
    let n = x.len();
    let rho = protocol.switch_rates(p, x)?;
    if rho.shape() != (n, n) {
        return Err(dim(format!("protocol returned {}x{}, expected {n}x{n}", rho.nrows(), rho.ncols())));
    }
    if let Some(((i, j), r)) = rho.iter().enumerate().map(|(k, r)| ((k % n, k / n), *r)).find(|(_, r)| !(*r >= 0.0)) {
        return Err(Error::Protocol { from: i, to: j, rate: r });
    }
    let x = x.as_vector();
    let inflow = rho.tr_mul(x);
    let outflow = rho.column_sum();
    Ok(TangentVector::from_field(DVector::from_fn(n, |i, _| inflow[i] - x[i] * outflow[i])))
}

/// Which replicator variant drives the population.
#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsVariant {
    Standard,
    LocalGraph { adjacency: DMatrix<f64> },
    LocalModified { group_size: u32 },
    SecondOrderIntegral,
    LeadLag { alpha: f64, beta: f64 },
    Passivated { gain: DVector<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsModel {
    variant: DynamicsVariant,
}

impl DynamicsModel {
    pub fn new(variant: DynamicsVariant) -> Result<Self> {
        match &variant {
            DynamicsVariant::LocalGraph { adjacency } => check_adjacency(adjacency, adjacency.nrows())?,
            DynamicsVariant::LocalModified { group_size } => check_group(*group_size)?,
            DynamicsVariant::LeadLag { alpha, beta } => check_lead_lag(*alpha, *beta)?,
            DynamicsVariant::Passivated { gain } => check_gain(gain, gain.len())?,
            DynamicsVariant::Standard | DynamicsVariant::SecondOrderIntegral => {}
        }
        Ok(Self { variant })
    }

    pub fn standard() -> Self {
        Self { variant: DynamicsVariant::Standard }
    }

    pub fn variant(&self) -> &DynamicsVariant {
        &self.variant
    }

    /// Auxiliary state length for a population of `n` strategies.
    pub fn aux_dim(&self, n: usize) -> usize {
        match self.variant {
            DynamicsVariant::SecondOrderIntegral | DynamicsVariant::LeadLag { .. } => n,
            _ => 0,
        }
    }

    /// Length of the per-step auxiliary output (`y` for lead-lag, the
    /// effective payoff for the passivated variant).
    pub fn output_dim(&self, n: usize) -> usize {
        match self.variant {
            DynamicsVariant::LeadLag { .. } | DynamicsVariant::Passivated { .. } => n,
            _ => 0,
        }
    }

    /// Dimension required of the population, when the variant fixes it.
    pub fn required_strategies(&self) -> Option<usize> {
        match &self.variant {
            DynamicsVariant::LocalGraph { adjacency } => Some(adjacency.nrows()),
            DynamicsVariant::Passivated { gain } => Some(gain.len()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.variant {
            DynamicsVariant::Standard => "standard",
            DynamicsVariant::LocalGraph { .. } => "local_graph",
            DynamicsVariant::LocalModified { .. } => "local_modified",
            DynamicsVariant::SecondOrderIntegral => "second_order_integral",
            DynamicsVariant::LeadLag { .. } => "lead_lag",
            DynamicsVariant::Passivated { .. } => "passivated",
        }
    }
}

fn check_adjacency(adjacency: &DMatrix<f64>, n: usize) -> Result<()> {
    if adjacency.nrows() != adjacency.ncols() {
        return Err(param(format!("adjacency must be square, got {}x{}", adjacency.nrows(), adjacency.ncols())));
    }
    if adjacency.nrows() != n {
        return Err(dim(format!("adjacency is {0}x{0}, population has {n} strategies", adjacency.nrows())));
    }
    if adjacency.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(param("adjacency entries must be 0 or 1"));
    }
    Ok(())
}

fn check_group(group_size: u32) -> Result<()> {
    if group_size < 3 {
        return Err(param(format!("group size must be at least 3, got {group_size}")));
    }
    Ok(())
}

fn check_lead_lag(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
        return Err(param(format!("lead-lag needs alpha > 0 and beta > 0, got alpha = {alpha}, beta = {beta}")));
    }
    Ok(())
}

fn check_gain(gain: &DVector<f64>, n: usize) -> Result<()> {
    if gain.len() != n {
        return Err(dim(format!("gain has {} entries, population has {n}", gain.len())));
    }
    if let Some((i, k)) = gain.iter().enumerate().find(|(_, k)| !(**k >= 0.0 && k.is_finite())) {
        return Err(param(format!("gain K_{} = {k} must be nonnegative", i + 1)));
    }
    Ok(())
}

fn check_len(what: &str, v: &DVector<f64>, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(dim(format!("{what} has {} entries, state has {n}", v.len())));
    }
    Ok(())
}

// --- slice kernels -------------------------------------------------------

/// `out_i = x_i (p_i - x . p)`.
pub(crate) fn replicator_raw(x: &[f64], p: &[f64], out: &mut [f64]) {
    let mean: f64 = x.iter().zip(p).map(|(a, b)| a * b).sum();
    for ((o, xi), pi) in out.iter_mut().zip(x).zip(p) {
        *o = xi * (pi - mean);
    }
}

/// `out_i = x_i (p_i sum_{j in N_i} x_j - sum_{j in N_i} x_j p_j)`.
pub(crate) fn local_graph_raw(x: &[f64], p: &[f64], adjacency: &DMatrix<f64>, out: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let mut mass = 0.0;
        let mut weighted = 0.0;
        for j in 0..n {
            if adjacency[(i, j)] != 0.0 {
                mass += x[j];
                weighted += x[j] * p[j];
            }
        }
        out[i] = x[i] * (p[i] * mass - weighted);
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn lead_lag_raw(
    x: &[f64],
    p_hat: &[f64],
    p: &[f64],
    alpha: f64,
    beta: f64,
    x_dot: &mut [f64],
    p_hat_dot: &mut [f64],
    y: &mut [f64],
) {
    let filter_gain = 1.0 / beta - alpha / (beta * beta);
    let direct_gain = alpha / beta;
    for i in 0..x.len() {
        p_hat_dot[i] = -p_hat[i] / beta + p[i];
        y[i] = filter_gain * p_hat[i] + direct_gain * p[i];
    }
    replicator_raw(x, y, x_dot);
}

/// Effective payoff `p_i - K_i x_i`.
pub(crate) fn passivated_payoff_raw(x: &[f64], p: &[f64], gain: &[f64], out: &mut [f64]) {
    for i in 0..x.len() {
        out[i] = p[i] - gain[i] * x[i];
    }
}

// --- typed operations ------------------------------------------------------

pub fn standard_rd_field(x: &SimplexState, p: &DVector<f64>) -> Result<TangentVector> {
    check_len("payoff", p, x.len())?;
    let mut out = DVector::zeros(x.len());
    replicator_raw(x.as_vector().as_slice(), p.as_slice(), out.as_mut_slice());
    Ok(TangentVector::from_field(out))
}

pub fn local_graph_rd_field(x: &SimplexState, p: &DVector<f64>, adjacency: &DMatrix<f64>) -> Result<TangentVector> {
    check_len("payoff", p, x.len())?;
    check_adjacency(adjacency, x.len())?;
    let mut out = DVector::zeros(x.len());
    local_graph_raw(x.as_vector().as_slice(), p.as_slice(), adjacency, out.as_mut_slice());
    Ok(TangentVector::from_field(out))
}

/// `A - (A + A^T) / N` for interaction groups of size `N`.
pub fn modified_payoff_matrix(a: &MatrixGame, group_size: u32) -> Result<MatrixGame> {
    check_group(group_size)?;
    let m = a.matrix();
    MatrixGame::new(m - (m + m.transpose()) / f64::from(group_size))
}

pub fn local_modified_rd_field(x: &SimplexState, a: &MatrixGame, group_size: u32) -> Result<TangentVector> {
    let modified = modified_payoff_matrix(a, group_size)?;
    if modified.strategies() != x.len() {
        return Err(dim(format!("{} strategies in state, {} in game", x.len(), modified.strategies())));
    }
    standard_rd_field(x, &(modified.matrix() * x.as_vector()))
}

/// Integral-action second-order dynamics; returns `(x', p_hat')` with
/// `p_hat' = p`.
pub fn second_order_rd_field(
    x: &SimplexState,
    p_hat: &DVector<f64>,
    p: &DVector<f64>,
) -> Result<(TangentVector, DVector<f64>)> {
    check_len("p_hat", p_hat, x.len())?;
    check_len("payoff", p, x.len())?;
    Ok((standard_rd_field(x, p_hat)?, p.clone()))
}

/// Lead-lag field components.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadLagField {
    pub x_dot: TangentVector,
    pub p_hat_dot: DVector<f64>,
    pub output: DVector<f64>,
}

pub fn lead_lag_rd_field(
    x: &SimplexState,
    p_hat: &DVector<f64>,
    p: &DVector<f64>,
    alpha: f64,
    beta: f64,
) -> Result<LeadLagField> {
    check_lead_lag(alpha, beta)?;
    let n = x.len();
    check_len("p_hat", p_hat, n)?;
    check_len("payoff", p, n)?;
    let (mut x_dot, mut p_hat_dot, mut y) = (DVector::zeros(n), DVector::zeros(n), DVector::zeros(n));
    lead_lag_raw(
        x.as_vector().as_slice(),
        p_hat.as_slice(),
        p.as_slice(),
        alpha,
        beta,
        x_dot.as_mut_slice(),
        p_hat_dot.as_mut_slice(),
        y.as_mut_slice(),
    );
    Ok(LeadLagField { x_dot: TangentVector::from_field(x_dot), p_hat_dot, output: y })
}

/// Replicator field driven by `T_i' = p_i - K_i x_i`.
pub fn passivated_rd_field(x: &SimplexState, p: &DVector<f64>, gain: &DVector<f64>) -> Result<TangentVector> {
    check_len("payoff", p, x.len())?;
    check_gain(gain, x.len())?;
    let mut eff = DVector::zeros(x.len());
    passivated_payoff_raw(x.as_vector().as_slice(), p.as_slice(), gain.as_slice(), eff.as_mut_slice());
    standard_rd_field(x, &eff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::make_rps_game;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> SimplexState {
        SimplexState::from_slice(v).unwrap()
    }
    fn v(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }
    fn close(a: &DVector<f64>, b: &[f64], tol: f64) -> bool {
        (a - v(b)).amax() <= tol
    }

    #[test]
    fn zero_protocol_gives_zero_field() {
        let zero = |_: &DVector<f64>, x: &SimplexState| DMatrix::zeros(x.len(), x.len());
        let f = mean_dynamic(&zero, &s(&[0.2, 0.3, 0.5]), &v(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(f.as_vector().amax(), 0.0);
    }

    #[test]
    fn negative_protocol_rates_are_rejected() {
        let bad = |_: &DVector<f64>, x: &SimplexState| -DMatrix::identity(x.len(), x.len());
        assert!(matches!(mean_dynamic(&bad, &s(&[0.5, 0.5]), &v(&[0.0, 0.0])), Err(Error::Protocol { .. })));
        let proto = imitation_of_success(1.0);
        assert!(proto.switch_rates(&v(&[0.0, 2.0]), &s(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn imitation_rates_direct_evaluation() {
        let rho = imitation_of_success(0.0).switch_rates(&v(&[1.0, 0.0, 0.0]), &s(&[0.5, 0.5, 0.0])).unwrap();
        for i in 0..3 {
            assert_eq!(rho[(i, 0)], 0.5);
            assert_eq!(rho[(i, 1)], 0.0);
            assert_eq!(rho[(i, 2)], 0.0);
        }
    }

    #[test]
    fn imitation_monomorphic_population() {
        // only column 1 can carry mass, and the field vanishes
        let p = v(&[0.5, 2.0, 1.0]);
        let x = s(&[1.0, 0.0, 0.0]);
        let proto = imitation_of_success(0.5);
        let rho = proto.switch_rates(&p, &x).unwrap();
        assert_eq!(rho.columns(1, 2).amax(), 0.0);
        assert_eq!(mean_dynamic(&proto, &x, &p).unwrap().as_vector().amax(), 0.0);
    }

    #[test]
    fn imitation_reproduces_replicator_and_is_floor_invariant() {
        let x = s(&[0.2, 0.5, 0.3]);
        let p = v(&[1.0, -0.5, 2.0]);
        let rd = standard_rd_field(&x, &p).unwrap();
        let m1 = mean_dynamic(&imitation_of_success(-0.5), &x, &p).unwrap();
        let m2 = mean_dynamic(&imitation_of_success(-5.5), &x, &p).unwrap();
        assert!((rd.as_vector() - m1.as_vector()).amax() < 1e-12);
        assert!((m1.as_vector() - m2.as_vector()).amax() < 1e-12);
    }

    #[test]
    fn standard_rd_examples() {
        let f = standard_rd_field(&s(&[0.5, 0.5, 0.0]), &v(&[1.0, 0.0, 0.0])).unwrap();
        assert!(close(f.as_vector(), &[0.25, -0.25, 0.0], 1e-15));
        let f = standard_rd_field(&s(&[0.2, 0.3, 0.5]), &v(&[4.0, 4.0, 4.0])).unwrap();
        assert!(f.as_vector().amax() < 1e-15);
        let g = make_rps_game(1.0, 1.0).unwrap();
        let bary = SimplexState::barycenter(3).unwrap();
        let f = standard_rd_field(&bary, &(g.matrix() * bary.as_vector())).unwrap();
        assert!(f.as_vector().amax() < 1e-15);
        assert!(standard_rd_field(&bary, &v(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn local_graph_examples() {
        let x = s(&[0.5, 0.5, 0.0]);
        let p = v(&[1.0, 0.0, 0.0]);
        let empty = local_graph_rd_field(&x, &p, &DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(empty.as_vector().amax(), 0.0);
        let selfonly = local_graph_rd_field(&x, &p, &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(selfonly.as_vector().amax(), 0.0);
        let complete = local_graph_rd_field(&x, &p, &DMatrix::from_element(3, 3, 1.0)).unwrap();
        assert!(close(complete.as_vector(), &[0.25, -0.25, 0.0], 1e-15));
        assert!(local_graph_rd_field(&x, &p, &DMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn modified_matrix_cases() {
        let rps = make_rps_game(1.0, 1.0).unwrap();
        assert_eq!(modified_payoff_matrix(&rps, 5).unwrap(), rps);
        let sym = MatrixGame::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0])).unwrap();
        let m = modified_payoff_matrix(&sym, 4).unwrap();
        assert!((m.matrix() - sym.matrix() * 0.5).amax() < 1e-15);
        let g = make_rps_game(2.0, 1.0).unwrap();
        let big = modified_payoff_matrix(&g, 1000).unwrap();
        assert!((big.matrix() - g.matrix()).amax() <= 2.0 * g.matrix().amax() / 1000.0);
        assert!(modified_payoff_matrix(&g, 2).is_err());
    }

    #[test]
    fn local_modified_examples() {
        let bary = SimplexState::barycenter(3).unwrap();
        let g = make_rps_game(2.0, 1.0).unwrap();
        let lm = local_modified_rd_field(&bary, &g, 4).unwrap();
        let a_new = modified_payoff_matrix(&g, 4).unwrap();
        let rd = standard_rd_field(&bary, &(a_new.matrix() * bary.as_vector())).unwrap();
        assert_eq!(lm, rd);
        let lossless = make_rps_game(1.5, 1.5).unwrap();
        let x = s(&[0.6, 0.1, 0.3]);
        let a = local_modified_rd_field(&x, &lossless, 3).unwrap();
        let b = standard_rd_field(&x, &(lossless.matrix() * x.as_vector())).unwrap();
        assert!((a.as_vector() - b.as_vector()).amax() < 1e-15);
        let edge = local_modified_rd_field(&s(&[0.0, 0.4, 0.6]), &g, 4).unwrap();
        assert_eq!(edge.as_vector()[0], 0.0);
        assert!(local_modified_rd_field(&x, &g, 2).is_err());
    }

    #[test]
    fn second_order_examples() {
        let x = s(&[0.5, 0.5, 0.0]);
        let (fx, fp) = second_order_rd_field(&x, &v(&[2.0, 2.0, 2.0]), &v(&[1.0, -1.0, 3.0])).unwrap();
        assert!(fx.as_vector().amax() < 1e-15);
        assert_eq!(fp, v(&[1.0, -1.0, 3.0]));
        let (fx, fp) = second_order_rd_field(&x, &v(&[1.0, 0.0, 0.0]), &v(&[0.0, 0.0, 0.0])).unwrap();
        assert!(close(fx.as_vector(), &[0.25, -0.25, 0.0], 1e-15));
        assert_eq!(fp.amax(), 0.0);
        assert!(second_order_rd_field(&x, &v(&[1.0]), &v(&[0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn lead_lag_examples() {
        let x = s(&[0.2, 0.3, 0.5]);
        let p = v(&[1.0, -2.0, 0.5]);
        let f = lead_lag_rd_field(&x, &v(&[7.0, -3.0, 1.0]), &p, 1.3, 1.3).unwrap();
        assert!((f.output.clone() - &p).amax() < 1e-12);
        let rd = standard_rd_field(&x, &p).unwrap();
        assert!((f.x_dot.as_vector() - rd.as_vector()).amax() < 1e-12);

        let (alpha, beta) = (0.7, 2.5);
        let f = lead_lag_rd_field(&x, &(&p * beta), &p, alpha, beta).unwrap();
        assert!((f.output - &p).amax() < 1e-12);
        assert!(f.p_hat_dot.amax() < 1e-12);

        let f = lead_lag_rd_field(&x, &v(&[1.0, 0.0, 0.0]), &v(&[0.0, 0.0, 0.0]), 2.0, 1.0).unwrap();
        assert!(close(&f.p_hat_dot, &[-1.0, 0.0, 0.0], 1e-15));
        assert!(close(&f.output, &[-1.0, 0.0, 0.0], 1e-15));
        assert!(lead_lag_rd_field(&x, &p, &p, 0.0, 1.0).is_err());
        assert!(lead_lag_rd_field(&x, &p, &p, 1.0, -1.0).is_err());
    }

    #[test]
    fn passivated_examples() {
        let x = s(&[0.5, 0.5, 0.0]);
        let p = v(&[1.0, 0.0, 0.0]);
        let zero = passivated_rd_field(&x, &p, &v(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(zero, standard_rd_field(&x, &p).unwrap());
        let f = passivated_rd_field(&x, &p, &v(&[1.0, 1.0, 1.0])).unwrap();
        assert!(close(f.as_vector(), &[0.25, -0.25, 0.0], 1e-15));

        // zero payoff: the field moves every share toward the uniform value
        let x = s(&[0.6, 0.3, 0.1]);
        let f = passivated_rd_field(&x, &v(&[0.0, 0.0, 0.0]), &v(&[2.0, 2.0, 2.0])).unwrap();
        let by_hand = standard_rd_field(&x, &(x.as_vector() * -2.0)).unwrap();
        assert!((f.as_vector() - by_hand.as_vector()).amax() < 1e-15);
        let fv = f.as_vector();
        assert!(fv[0] < 0.0 && fv[2] > 0.0);
        assert!(fv.dot(&(x.as_vector() - DVector::from_element(3, 1.0 / 3.0))) < 0.0);
        assert!(passivated_rd_field(&x, &p, &v(&[1.0, -1.0, 0.0])).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(DynamicsModel::new(DynamicsVariant::LeadLag { alpha: 1.0, beta: 0.0 }).is_err());
        assert!(DynamicsModel::new(DynamicsVariant::LocalModified { group_size: 2 }).is_err());
        assert!(DynamicsModel::new(DynamicsVariant::LocalGraph { adjacency: DMatrix::zeros(2, 3) }).is_err());
        let m = DynamicsModel::new(DynamicsVariant::SecondOrderIntegral).unwrap();
        assert_eq!(m.aux_dim(3), 3);
        assert_eq!(DynamicsModel::standard().aux_dim(3), 0);
    }

    fn interior(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.01f64..1.0, n).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|a| a / s).collect()
        })
    }

    fn with_zero(n: usize) -> impl Strategy<Value = (Vec<f64>, usize)> {
        (interior(n), 0..n).prop_map(|(mut x, k)| {
            let removed = x[k];
            x[k] = 0.0;
            let s = 1.0 - removed;
            (x.into_iter().map(|a| a / s).collect(), k)
        })
    }

    fn payoff(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-5.0f64..5.0, n)
    }

    fn all_fields(x: &SimplexState, p: &DVector<f64>, aux: &DVector<f64>) -> Vec<DVector<f64>> {
        let n = x.len();
        let g = MatrixGame::new(DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0)).unwrap();
        vec![
            standard_rd_field(x, p).unwrap().into_vector(),
            local_graph_rd_field(x, p, &DMatrix::from_element(n, n, 1.0)).unwrap().into_vector(),
            local_modified_rd_field(x, &g, 5).unwrap().into_vector(),
            second_order_rd_field(x, aux, p).unwrap().0.into_vector(),
            lead_lag_rd_field(x, aux, p, 0.8, 1.7).unwrap().x_dot.into_vector(),
            passivated_rd_field(x, p, &DVector::from_element(n, 1.5)).unwrap().into_vector(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn every_field_is_tangent(x in interior(4), p in payoff(4), aux in payoff(4)) {
            let xs = s(&x);
            for f in all_fields(&xs, &v(&p), &v(&aux)) {
                prop_assert!(f.sum().abs() < 1e-12);
            }
        }

        #[test]
        fn vanishing_shares_stay_put((x, k) in with_zero(4), p in payoff(4), aux in payoff(4)) {
            let xs = s(&x);
            for f in all_fields(&xs, &v(&p), &v(&aux)) {
                prop_assert_eq!(f[k], 0.0);
            }
            let g = local_graph_rd_field(&xs, &v(&p), &DMatrix::from_fn(4, 4, |i, j| ((i + j) % 2) as f64)).unwrap();
            prop_assert_eq!(g.as_vector()[k], 0.0);
        }

        #[test]
        fn complete_graph_reduces_to_standard(x in interior(5), p in payoff(5)) {
            let xs = s(&x);
            let a = local_graph_rd_field(&xs, &v(&p), &DMatrix::from_element(5, 5, 1.0)).unwrap();
            let b = standard_rd_field(&xs, &v(&p)).unwrap();
            prop_assert!((a.as_vector() - b.as_vector()).amax() < 1e-12);
        }

        #[test]
        fn floor_invariance(x in interior(3), p in payoff(3), shift in 0.0f64..10.0) {
            let xs = s(&x);
            let pv = v(&p);
            let k = pv.min();
            let a = mean_dynamic(&imitation_of_success(k), &xs, &pv).unwrap();
            let b = mean_dynamic(&imitation_of_success(k - shift), &xs, &pv).unwrap();
            prop_assert!((a.as_vector() - b.as_vector()).amax() < 1e-12);
        }

        #[test]
        fn equal_lead_lag_constants_pass_payoff(p in payoff(3), aux in payoff(3), c in 0.1f64..10.0) {
            let x = SimplexState::barycenter(3).unwrap();
            let f = lead_lag_rd_field(&x, &v(&aux), &v(&p), c, c).unwrap();
            prop_assert!((f.output - v(&p)).amax() < 1e-12);
        }
    }
}
