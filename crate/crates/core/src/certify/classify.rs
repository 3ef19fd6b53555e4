use nalgebra::DVector;
use num_complex::Complex64;

use super::frequency::default_grid;
use super::sym_eigenvalues;
use crate::error::{param, Result};
use crate::game::MatrixGame;
use crate::simplex::tangent_basis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GameClass {
    StrictlyPassive,
    Lossless,
    NonPassive,
    Indefinite,
}

/// Eigenvalues of `-N^T ((A + A^T) / 2) N`, ascending.
///
/// Along a replicator loop in positive feedback the storage rate is
/// `e^T A e`, so the game withdraws energy exactly when this form is
/// positive.
pub fn tangent_symmetric_eigenvalues(g: &MatrixGame) -> DVector<f64> {
    let basis = tangent_basis(g.strategies()).expect("games have at least two strategies");
    let reduced = basis.reduce(&-g.matrix()).expect("square by construction");
    sym_eigenvalues(&reduced)
}

/// Sign class of `-z^T A z` on zero-sum directions `z`.
pub fn classify_matrix_game(g: &MatrixGame, tol: f64) -> GameClass {
    let ev = tangent_symmetric_eigenvalues(g);
    if ev.iter().all(|e| *e > tol) {
        GameClass::StrictlyPassive
    } else if ev.iter().all(|e| e.abs() <= tol) {
        GameClass::Lossless
    } else if ev.iter().all(|e| *e < -tol) {
        GameClass::NonPassive
    } else {
        GameClass::Indefinite
    }
}

/// `G(jw) = (1 + a jw) / (jw (1 + b jw))`, evaluated directly and from the
/// real/imaginary closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadLagResponse {
    pub omega: f64,
    pub value: Complex64,
    pub closed_form: Complex64,
}

impl LeadLagResponse {
    pub fn re(&self) -> f64 {
        self.closed_form.re
    }

    pub fn im(&self) -> f64 {
        self.closed_form.im
    }

    /// Largest gap between the two evaluations, per component.
    pub fn gap(&self) -> f64 {
        (self.value.re - self.closed_form.re).abs().max((self.value.im - self.closed_form.im).abs())
    }
}

fn check_constants(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
        return Err(param(format!("lead-lag needs alpha > 0 and beta > 0, got alpha = {alpha}, beta = {beta}")));
    }
    Ok(())
}

pub fn lead_lag_frequency_response(alpha: f64, beta: f64, omega: f64) -> Result<LeadLagResponse> {
    check_constants(alpha, beta)?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(param(format!("omega must be positive, got {omega}")));
    }
    let jw = Complex64::new(0.0, omega);
    let value = (1.0 + alpha * jw) / (jw * (1.0 + beta * jw));
    let re = beta * (alpha / beta - 1.0) / (beta * beta * omega * omega + 1.0);
    let im = -(alpha * beta * omega * omega + 1.0) / (beta * beta * omega.powi(3) + omega);
    Ok(LeadLagResponse { omega, value, closed_form: Complex64::new(re, im) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadLagClass {
    PassiveAndNi,
    NiOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeadLagVerdict {
    pub class: LeadLagClass,
    /// `alpha == beta`: the real part vanishes at every frequency.
    pub lossless_real_part: bool,
    /// The grid sign pattern (real part > 0, imaginary part < 0) reproduces `class`.
    pub sweep_agrees: bool,
    pub min_re: f64,
    pub max_im: f64,
    pub max_closed_form_gap: f64,
}

/// Passive iff `alpha / beta > 1`; negative imaginary for all positive
/// constants. Cross-checked on [`default_grid`].
pub fn classify_lead_lag(alpha: f64, beta: f64) -> Result<LeadLagVerdict> {
    check_constants(alpha, beta)?;
    let class = if alpha / beta > 1.0 { LeadLagClass::PassiveAndNi } else { LeadLagClass::NiOnly };
    let lossless_real_part = alpha == beta;

    let (mut min_re, mut max_re, mut max_im, mut gap) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0f64);
    for omega in default_grid() {
        let r = lead_lag_frequency_response(alpha, beta, omega)?;
        min_re = min_re.min(r.re());
        max_re = max_re.max(r.re());
        max_im = max_im.max(r.im());
        gap = gap.max(r.gap());
    }
    let ni_on_grid = max_im < 0.0;
    let passive_on_grid = min_re > 0.0;
    let sweep_agrees = ni_on_grid
        && match class {
            LeadLagClass::PassiveAndNi => passive_on_grid,
            LeadLagClass::NiOnly if lossless_real_part => min_re == 0.0 && max_re == 0.0,
            LeadLagClass::NiOnly => max_re < 0.0,
        };
    Ok(LeadLagVerdict { class, lossless_real_part, sweep_agrees, min_re, max_im, max_closed_form_gap: gap })
}
