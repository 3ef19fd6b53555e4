//! Browser bindings: RPS trajectories projected into the simplex, matrix
//! game classification, and lead-lag frequency curves.
//!
//! Each binding wraps a plain function with the same name minus the
//! `js_` prefix, so the logic is testable natively.

use evodyn::certify::{classify_lead_lag, classify_matrix_game, lead_lag_frequency_response, log_grid};
use evodyn::dynamics::{DynamicsModel, DynamicsVariant};
use evodyn::interconnection::{assemble, integrate, IntegratorConfig};
use evodyn::{make_rps_game, GameModel, SimplexState};
use nalgebra::DVector;
use wasm_bindgen::prelude::*;

const MAX_HORIZON: f64 = 500.0;
const MAX_POINTS: usize = 5000;

fn dynamics_for(kind: &str, a: f64, b: f64) -> evodyn::Result<DynamicsModel> {
    let variant = match kind {
        "standard" => DynamicsVariant::Standard,
        "passivated" => DynamicsVariant::Passivated { gain: DVector::from_element(3, a) },
        "lead_lag" => DynamicsVariant::LeadLag { alpha: a, beta: b },
        "local_modified" => DynamicsVariant::LocalModified { group_size: a as u32 },
        other => {
            return Err(evodyn::Error::Parameter(format!(
                "unknown dynamics {other:?}; expected standard, passivated, lead_lag or local_modified"
            )))
        }
    };
    DynamicsModel::new(variant)
}

/// Integrates RPS(w, l) from `x0` and returns `[u0, v0, u1, v1, ...]` in
/// simplex coordinates. `a` and `b` parameterize the dynamics: the gain
/// for `passivated`, `(alpha, beta)` for `lead_lag`, the group size for
/// `local_modified`.
pub fn simplex_trajectory(
    w: f64,
    l: f64,
    x0: &[f64],
    dynamics: &str,
    a: f64,
    b: f64,
    horizon: f64,
) -> evodyn::Result<Vec<f64>> {
    if !(horizon > 0.0 && horizon <= MAX_HORIZON) {
        return Err(evodyn::Error::Parameter(format!("horizon must lie in (0, {MAX_HORIZON}]")));
    }
    let x0 = SimplexState::from_slice(x0)?;
    let sys = assemble(dynamics_for(dynamics, a, b)?, GameModel::Matrix(make_rps_game(w, l)?), &x0, None)?;
    let stride = ((horizon / 1e-3) / MAX_POINTS as f64).ceil().max(1.0) as usize;
    let traj = integrate(&sys, &IntegratorConfig::new(1e-3, horizon)?.with_stride(stride)?)?;
    let mut out = Vec::with_capacity(2 * traj.len());
    for k in 0..traj.len() {
        let x = traj.shares(k);
        out.push(x[1] + 0.5 * x[2]);
        out.push(0.5 * 3f64.sqrt() * x[2]);
    }
    Ok(out)
}

pub fn classify_rps(w: f64, l: f64) -> evodyn::Result<String> {
    let class = classify_matrix_game(&make_rps_game(w, l)?, 1e-10);
    Ok(format!("{class:?}"))
}

/// `[omega, re, im, ...]` over a log grid on `[1e-2, 1e2]`.
pub fn lead_lag_curve(alpha: f64, beta: f64, points: usize) -> evodyn::Result<Vec<f64>> {
    let grid = log_grid(1e-2, 1e2, points.clamp(2, MAX_POINTS))?;
    let mut out = Vec::with_capacity(3 * grid.len());
    for omega in grid {
        let r = lead_lag_frequency_response(alpha, beta, omega)?;
        out.extend([omega, r.re(), r.im()]);
    }
    Ok(out)
}

pub fn lead_lag_class(alpha: f64, beta: f64) -> evodyn::Result<String> {
    Ok(format!("{:?}", classify_lead_lag(alpha, beta)?.class))
}

fn js<T>(r: evodyn::Result<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = simplexTrajectory)]
pub fn js_simplex_trajectory(
    w: f64,
    l: f64,
    x0: &[f64],
    dynamics: &str,
    a: f64,
    b: f64,
    horizon: f64,
) -> Result<Vec<f64>, JsError> {
    js(simplex_trajectory(w, l, x0, dynamics, a, b, horizon))
}

#[wasm_bindgen(js_name = classifyRps)]
pub fn js_classify_rps(w: f64, l: f64) -> Result<String, JsError> {
    js(classify_rps(w, l))
}

#[wasm_bindgen(js_name = leadLagCurve)]
pub fn js_lead_lag_curve(alpha: f64, beta: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(lead_lag_curve(alpha, beta, points))
}

#[wasm_bindgen(js_name = leadLagClass)]
pub fn js_lead_lag_class(alpha: f64, beta: f64) -> Result<String, JsError> {
    js(lead_lag_class(alpha, beta))
}
