use nalgebra::DMatrix;

use super::{max_asymmetry, sym_eigenvalues};
use crate::error::{dim, param, Error, Result};
use crate::game::StateSpace;

const SYMMETRY_TOL: f64 = 1e-12;
const LMI_TOL: f64 = 1e-10;
const FACTOR_TOL: f64 = 1e-8;

/// Candidate certificate for the negative-imaginary lemma. `l` and `w` are
/// optional factors of the LMI block matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NiCertificate {
    pub p: DMatrix<f64>,
    pub l: Option<DMatrix<f64>>,
    pub w: Option<DMatrix<f64>>,
}

impl NiCertificate {
    pub fn new(p: DMatrix<f64>) -> Self {
        Self { p, l: None, w: None }
    }

    pub fn with_factors(mut self, l: DMatrix<f64>, w: DMatrix<f64>) -> Self {
        self.l = Some(l);
        self.w = Some(w);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmiReport {
    pub pass: bool,
    pub lmi_max_eig: f64,
    pub p_min_eig: f64,
    /// `max |M + [L W]^T [L W]|` when factors were supplied.
    pub factor_gap: Option<f64>,
    pub matrix: DMatrix<f64>,
}

/// Assembles
/// `[[PA + A^T P, PB - A^T C^T], [B^T P - CA, -(CB + B^T C^T)]]`
/// and checks `P >= 0` and the block matrix `<= 0`.
pub fn verify_ni_lemma(sys: &StateSpace, cert: &NiCertificate) -> Result<LmiReport> {
    let (a, b, c, d) = (&sys.a, &sys.b, &sys.c, &sys.d);
    let n = sys.order();
    let m = sys.inputs();
    if sys.outputs() != m {
        return Err(Error::Structural(format!("NI lemma needs a square system, got {}x{m}", sys.outputs())));
    }
    if max_asymmetry(d) > SYMMETRY_TOL {
        return Err(Error::Structural("NI lemma requires D = D^T".into()));
    }
    let p = &cert.p;
    if p.shape() != (n, n) {
        return Err(dim(format!("P is {}x{}, system order is {n}", p.nrows(), p.ncols())));
    }
    if max_asymmetry(p) > SYMMETRY_TOL {
        return Err(param("certificate P must be symmetric"));
    }

    let mut lmi = DMatrix::zeros(n + m, n + m);
    let top_left = p * a + a.transpose() * p;
    let top_right = p * b - a.transpose() * c.transpose();
    let cb = c * b;
    let bottom_right = -(&cb + cb.transpose());
    lmi.view_mut((0, 0), (n, n)).copy_from(&top_left);
    lmi.view_mut((0, n), (n, m)).copy_from(&top_right);
    lmi.view_mut((n, 0), (m, n)).copy_from(&top_right.transpose());
    lmi.view_mut((n, n), (m, m)).copy_from(&bottom_right);

    let lmi_max_eig = sym_eigenvalues(&lmi).max();
    let p_min_eig = if n == 0 { 0.0 } else { sym_eigenvalues(p).min() };

    let factor_gap = match (&cert.l, &cert.w) {
        (Some(l), Some(w)) => {
            if l.shape() != (m, n) || w.shape() != (m, m) {
                return Err(dim(format!(
                    "factors must be L: {m}x{n} and W: {m}x{m}, got {}x{} and {}x{}",
                    l.nrows(),
                    l.ncols(),
                    w.nrows(),
                    w.ncols()
                )));
            }
            let mut lw = DMatrix::zeros(m, n + m);
            lw.view_mut((0, 0), (m, n)).copy_from(l);
            lw.view_mut((0, n), (m, m)).copy_from(w);
            Some((&lmi + lw.transpose() * &lw).amax())
        }
        (None, None) => None,
        _ => return Err(param("supply both L and W, or neither")),
    };

    let pass = p_min_eig >= -LMI_TOL && lmi_max_eig <= LMI_TOL && factor_gap.is_none_or(|g| g <= FACTOR_TOL);
    Ok(LmiReport { pass, lmi_max_eig, p_min_eig, factor_gap, matrix: lmi })
}
