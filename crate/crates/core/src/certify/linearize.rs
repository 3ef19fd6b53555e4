use nalgebra::DMatrix;

use crate::error::{param, Result};
use crate::game::StateSpace;
use crate::simplex::{tangent_basis, SimplexState, TangentBasis};

/// Linearization of the integral-action second-order dynamic about `x*`:
/// `dx' = A_lin dx + B_lin dp_hat`, `dp_hat' = dp`, with `A_lin` having
/// constant rows `-x*_i` and `B_lin = I - x* x*^T`, plus the reduction onto
/// zero-sum coordinates `dx = N dw`, `dp_hat = N xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedRd {
    pub x_star: SimplexState,
    pub a_lin: DMatrix<f64>,
    pub b_lin: DMatrix<f64>,
    pub basis: TangentBasis,
    pub a_r: DMatrix<f64>,
    pub b_r: DMatrix<f64>,
}

pub fn linearize_rd(x_star: &SimplexState) -> Result<LinearizedRd> {
    if !x_star.is_interior() {
        return Err(param("linearization point must be strictly interior"));
    }
    let n = x_star.len();
    let xs = x_star.as_vector();
    let a_lin = DMatrix::from_fn(n, n, |i, _| -xs[i]);
    let b_lin = DMatrix::identity(n, n) - xs * xs.transpose();
    let basis = tangent_basis(n)?;
    let a_r = basis.reduce(&a_lin)?;
    let b_r = basis.reduce(&b_lin)?;
    Ok(LinearizedRd { x_star: x_star.clone(), a_lin, b_lin, basis, a_r, b_r })
}

impl LinearizedRd {
    /// The reduced model as a state-space system with state `(dw, xi)`,
    /// input `dq` and output `dw`.
    pub fn reduced_realization(&self) -> StateSpace {
        let k = self.a_r.nrows();
        let mut a = DMatrix::zeros(2 * k, 2 * k);
        a.view_mut((0, 0), (k, k)).copy_from(&self.a_r);
        a.view_mut((0, k), (k, k)).copy_from(&self.b_r);
        let mut b = DMatrix::zeros(2 * k, k);
        b.view_mut((k, 0), (k, k)).fill_with_identity();
        let mut c = DMatrix::zeros(k, 2 * k);
        c.view_mut((0, 0), (k, k)).fill_with_identity();
        StateSpace::new(a, b, c, DMatrix::zeros(k, k)).expect("consistent blocks")
    }

    /// Same realization with the input gain replaced by `b_r`.
    pub fn reduced_realization_with_gain(&self, b_r: &DMatrix<f64>) -> StateSpace {
        let mut alt = self.clone();
        alt.b_r = b_r.clone();
        alt.reduced_realization()
    }
}

/// Exact derivative of `x_i (q_i - x . q)` with respect to `q` at `x*`:
/// `diag(x*) - x* x*^T`.
pub fn replicator_payoff_jacobian(x_star: &SimplexState) -> DMatrix<f64> {
    let xs = x_star.as_vector();
    DMatrix::from_diagonal(xs) - xs * xs.transpose()
}

/// Restricts a game to zero-sum coordinates: input `dw` with `dx = N dw`,
/// output `N^T p`.
pub fn reduce_game(sys: &StateSpace, basis: &TangentBasis) -> Result<StateSpace> {
    let n = basis.matrix();
    if sys.inputs() != n.nrows() || sys.outputs() != n.nrows() {
        return Err(param(format!(
            "game has {} inputs and {} outputs, basis has dimension {}",
            sys.inputs(),
            sys.outputs(),
            n.nrows()
        )));
    }
    StateSpace::new(sys.a.clone(), &sys.b * n, n.tr_mul(&sys.c), n.tr_mul(&sys.d) * n)
}
