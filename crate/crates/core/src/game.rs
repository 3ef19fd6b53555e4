//! Population games: static matrix games and LTI (higher-order) games.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{dim, param, Error, Result};
use crate::simplex::SimplexState;

/// Static game with payoff `p = A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGame {
    a: DMatrix<f64>,
}

impl MatrixGame {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(dim(format!("payoff matrix must be square, got {}x{}", a.nrows(), a.ncols())));
        }
        if a.nrows() < 2 {
            return Err(param("payoff matrix needs at least 2 strategies"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(param("payoff matrix has non-finite entries"));
        }
        Ok(Self { a })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn strategies(&self) -> usize {
        self.a.nrows()
    }

    pub(crate) fn payoff_raw(&self, x: &[f64], out: &mut [f64]) {
        let n = self.a.nrows();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate().take(n) {
                acc += self.a[(i, j)] * xj;
            }
            *o = acc;
        }
    }
}

/// Rock-paper-scissors with win payoff `w` and loss `l`.
///
/// Rows are `(0, -l, w)`, `(w, 0, -l)`, `(-l, w, 0)`.
pub fn make_rps_game(w: f64, l: f64) -> Result<MatrixGame> {
    if !(w > 0.0 && w.is_finite()) || !(l > 0.0 && l.is_finite()) {
        return Err(param(format!("RPS needs w > 0 and l > 0, got w = {w}, l = {l}")));
    }
    MatrixGame::new(DMatrix::from_row_slice(3, 3, &[0.0, -l, w, w, 0.0, -l, -l, w, 0.0]))
}

pub fn eval_matrix_game(g: &MatrixGame, x: &SimplexState) -> Result<DVector<f64>> {
    if x.len() != g.strategies() {
        return Err(dim(format!("{} strategies in state, {} in game", x.len(), g.strategies())));
    }
    Ok(g.matrix() * x.as_vector())
}

/// Continuous-time state-space realization `(A, B, C, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let nz = a.nrows();
        if a.ncols() != nz {
            return Err(dim(format!("A must be square, got {}x{}", a.nrows(), a.ncols())));
        }
        if b.nrows() != nz {
            return Err(dim(format!("B has {} rows, A has {nz}", b.nrows())));
        }
        if c.ncols() != nz {
            return Err(dim(format!("C has {} columns, A has {nz}", c.ncols())));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(dim(format!(
                "D is {}x{}, expected {}x{} from C rows and B columns",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        let finite = |m: &DMatrix<f64>| m.iter().all(|v| v.is_finite());
        if !(finite(&a) && finite(&b) && finite(&c) && finite(&d)) {
            return Err(param("state-space matrices have non-finite entries"));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// `G(s) = C (sI - A)^{-1} B + D`; `None` when `sI - A` is singular.
    pub fn transfer(&self, s: Complex64) -> Option<DMatrix<Complex64>> {
        let n = self.order();
        let cast = |m: &DMatrix<f64>| m.map(|v| Complex64::new(v, 0.0));
        let d = cast(&self.d);
        if n == 0 {
            return Some(d);
        }
        let resolvent = DMatrix::<Complex64>::identity(n, n) * s - cast(&self.a);
        let x = resolvent.lu().solve(&cast(&self.b))?;
        Some(cast(&self.c) * x + d)
    }

    /// `G(0) = C (-A)^{-1} B + D`; errors when `A` is singular.
    pub fn dc_gain(&self) -> Result<DMatrix<f64>> {
        if self.order() == 0 {
            return Ok(self.d.clone());
        }
        let minus_a = -&self.a;
        let lu = minus_a.lu();
        let x = lu
            .solve(&self.b)
            .filter(|_| rcond_estimate(&self.a) > 1e-12)
            .ok_or_else(|| Error::NotApplicable("system has a pole at s = 0; DC gain is infinite".into()))?;
        Ok(&self.c * x + &self.d)
    }
}

/// Ratio of smallest to largest singular value.
pub(crate) fn rcond_estimate(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

/// Dynamic game `z' = A z + B u`, `p = C z + D u`.
///
/// The input is `u = x - x_ref`, where `x_ref` is zero unless set with
/// [`LtiGame::with_reference`].
#[derive(Debug, Clone, PartialEq)]
pub struct LtiGame {
    sys: StateSpace,
    z: DVector<f64>,
    reference: Option<DVector<f64>>,
}

impl LtiGame {
    pub fn new(sys: StateSpace) -> Result<Self> {
        if sys.inputs() != sys.outputs() {
            return Err(dim(format!(
                "a game maps strategies to payoffs, so inputs ({}) must equal outputs ({})",
                sys.inputs(),
                sys.outputs()
            )));
        }
        let z = DVector::zeros(sys.order());
        Ok(Self { sys, z, reference: None })
    }

    pub fn with_state(mut self, z0: DVector<f64>) -> Result<Self> {
        if z0.len() != self.sys.order() {
            return Err(dim(format!("z0 has {} entries, game order is {}", z0.len(), self.sys.order())));
        }
        self.z = z0;
        Ok(self)
    }

    pub fn with_reference(mut self, x_ref: DVector<f64>) -> Result<Self> {
        if x_ref.len() != self.sys.inputs() {
            return Err(dim(format!("x_ref has {} entries, game has {} inputs", x_ref.len(), self.sys.inputs())));
        }
        self.reference = Some(x_ref);
        Ok(self)
    }

    pub fn system(&self) -> &StateSpace {
        &self.sys
    }

    pub fn state(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn reference(&self) -> Option<&DVector<f64>> {
        self.reference.as_ref()
    }

    pub fn strategies(&self) -> usize {
        self.sys.inputs()
    }

    pub fn order(&self) -> usize {
        self.sys.order()
    }

    pub(crate) fn input_raw(&self, x: &[f64], u: &mut [f64]) {
        u.copy_from_slice(x);
        if let Some(r) = &self.reference {
            for (ui, ri) in u.iter_mut().zip(r.iter()) {
                *ui -= ri;
            }
        }
    }

    /// Payoff `C z + D u` and internal derivative `A z + B u`.
    pub(crate) fn eval_raw(&self, z: &[f64], u: &[f64], p: &mut [f64], dz: &mut [f64]) {
        let s = &self.sys;
        let (nz, m) = (s.order(), s.inputs());
        for i in 0..m {
            let mut acc = 0.0;
            for k in 0..nz {
                acc += s.c[(i, k)] * z[k];
            }
            for j in 0..m {
                acc += s.d[(i, j)] * u[j];
            }
            p[i] = acc;
        }
        for k in 0..nz {
            let mut acc = 0.0;
            for l in 0..nz {
                acc += s.a[(k, l)] * z[l];
            }
            for j in 0..m {
                acc += s.b[(k, j)] * u[j];
            }
            dz[k] = acc;
        }
    }
}

/// A static or dynamic population game.
#[derive(Debug, Clone, PartialEq)]
pub enum GameModel {
    Matrix(MatrixGame),
    Lti(LtiGame),
}

impl GameModel {
    pub fn strategies(&self) -> usize {
        match self {
            GameModel::Matrix(g) => g.strategies(),
            GameModel::Lti(g) => g.strategies(),
        }
    }

    /// Internal state dimension (zero for static games).
    pub fn order(&self) -> usize {
        match self {
            GameModel::Matrix(_) => 0,
            GameModel::Lti(g) => g.order(),
        }
    }
}

/// Advances the game's internal state by one RK4 step holding the input
/// constant, then returns the payoff at the new state.
pub fn step_lti_game(g: &mut LtiGame, x_input: &SimplexState, dt: f64) -> Result<DVector<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(param(format!("step must be positive, got {dt}")));
    }
    let m = g.strategies();
    if x_input.len() != m {
        return Err(dim(format!("{} strategies in state, game has {m} inputs", x_input.len())));
    }
    let nz = g.order();
    let mut u = vec![0.0; m];
    g.input_raw(x_input.as_vector().as_slice(), &mut u);
    let mut p = vec![0.0; m];
    let deriv = |z: &[f64], out: &mut [f64], p: &mut [f64]| g.eval_raw(z, &u, p, out);

    let z0: Vec<f64> = g.z.iter().copied().collect();
    let mut k = [vec![0.0; nz], vec![0.0; nz], vec![0.0; nz], vec![0.0; nz]];
    let mut tmp = vec![0.0; nz];
    deriv(&z0, &mut k[0], &mut p);
    for i in 0..nz {
        tmp[i] = z0[i] + 0.5 * dt * k[0][i];
    }
    deriv(&tmp, &mut k[1], &mut p);
    for i in 0..nz {
        tmp[i] = z0[i] + 0.5 * dt * k[1][i];
    }
    deriv(&tmp, &mut k[2], &mut p);
    for i in 0..nz {
        tmp[i] = z0[i] + dt * k[2][i];
    }
    deriv(&tmp, &mut k[3], &mut p);
    let z1: Vec<f64> =
        (0..nz).map(|i| z0[i] + dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i])).collect();
    let mut scratch = vec![0.0; nz];
    g.eval_raw(&z1, &u, &mut p, &mut scratch);
    g.z = DVector::from_vec(z1);
    Ok(DVector::from_vec(p))
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(dim(format!("row {} has {} entries, row 1 has {ncols}", i + 1, r.len())));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// The strictly negative-imaginary two-channel game used as the running
/// higher-order example: `A = diag(-0.9, -1.2)`, `B = C = I`, `D = -3 I`.
pub fn example_sni_game() -> StateSpace {
    StateSpace::new(
        DMatrix::from_diagonal(&DVector::from_vec(vec![-0.9, -1.2])),
        DMatrix::identity(2, 2),
        DMatrix::identity(2, 2),
        DMatrix::identity(2, 2) * -3.0,
    )
    .expect("fixed dimensions")
}
