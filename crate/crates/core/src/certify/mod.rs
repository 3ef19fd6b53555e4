//! Numerical certificates: dissipation ledgers, game and filter
//! classification, frequency sweeps, the NI lemma, linearization and
//! interconnection stability.

mod classify;
mod frequency;
mod ledger;
mod linearize;
mod lmi;
mod stability;

pub use classify::{
    classify_lead_lag, classify_matrix_game, lead_lag_frequency_response, tangent_symmetric_eigenvalues, GameClass,
    LeadLagClass, LeadLagResponse, LeadLagVerdict,
};
pub use frequency::{
    default_grid, frequency_sample, frequency_sweep_lti, log_grid, FrequencySample, SweepKind, SweepReport,
};
pub use ledger::{
    passivity_ledger, storage_local, storage_standard, DissipationLedger, StorageFunction, SupplyKind, BOUNDARY_GUARD,
};
pub use linearize::{linearize_rd, reduce_game, replicator_payoff_jacobian, LinearizedRd};
pub use lmi::{verify_ni_lemma, LmiReport, NiCertificate};
pub use stability::{closed_loop_matrix, dc_gain_condition, ClosedLoopMatrix, DcGainReport};

use nalgebra::{DMatrix, DVector};

/// Eigenvalues of the symmetric part of `m`, ascending.
pub(crate) fn sym_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    DVector::from_vec(ev)
}

pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}
