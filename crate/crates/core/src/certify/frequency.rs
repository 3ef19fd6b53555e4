use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::game::StateSpace;

/// Poles with `|Re| <= POLE_AXIS_TOL` count as lying on the imaginary axis.
const POLE_AXIS_TOL: f64 = 1e-9;
/// Minimum distance between a grid point and an imaginary-axis pole.
const GRID_POLE_CLEARANCE: f64 = 1e-6;
/// NI and passivity sweeps accept eigenvalues down to `-NONSTRICT_TOL`.
const NONSTRICT_TOL: f64 = 1e-9;
/// SNI sweeps require eigenvalues above this.
const STRICT_TOL: f64 = 1e-12;

/// `points` log-spaced frequencies on `[start, stop]`.
pub fn log_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > start && stop.is_finite()) || points < 2 {
        return Err(param(format!("grid needs 0 < start < stop and >= 2 points, got [{start}, {stop}] x {points}")));
    }
    let (a, b) = (start.log10(), stop.log10());
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| match k {
            0 => start,
            k if k == points - 1 => stop,
            k => 10f64.powf(a + step * k as f64),
        })
        .collect())
}

/// 2000 points on `[1e-3, 1e3]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 2000).expect("valid constants")
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySample {
    pub omega: f64,
    pub g: DMatrix<Complex64>,
    /// `j (G - G*)`.
    pub ni_indicator: DMatrix<Complex64>,
    pub ni_min_eig: f64,
    pub ni_max_eig: f64,
    /// `(G + G*) / 2`.
    pub herm_part: DMatrix<Complex64>,
    pub herm_min_eig: f64,
}

fn hermitian_extremes(m: &DMatrix<Complex64>) -> (f64, f64) {
    let ev = m.clone().symmetric_eigenvalues();
    (ev.min(), ev.max())
}

pub fn frequency_sample(sys: &StateSpace, omega: f64) -> Result<FrequencySample> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(param(format!("omega must be positive, got {omega}")));
    }
    let g = sys.transfer(Complex64::new(0.0, omega)).ok_or(Error::Grid { omega, distance: 0.0 })?;
    let g_star = g.adjoint();
    let ni_indicator = (&g - &g_star) * Complex64::new(0.0, 1.0);
    let herm_part = (&g + &g_star) * Complex64::new(0.5, 0.0);
    let (ni_min_eig, ni_max_eig) = hermitian_extremes(&ni_indicator);
    let (herm_min_eig, _) = hermitian_extremes(&herm_part);
    Ok(FrequencySample { omega, g, ni_indicator, ni_min_eig, ni_max_eig, herm_part, herm_min_eig })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Ni,
    Sni,
    Passive,
}

/// Grid-certified verdict; the definitions quantify over every frequency,
/// so a pass is only as good as the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub pass: bool,
    pub worst: FrequencySample,
    pub grid_points: usize,
    /// Poles at the origin were accepted because `G(jw)` is real on the grid.
    pub origin_poles: usize,
}

impl SweepReport {
    /// The extreme eigenvalue that decides the verdict.
    pub fn worst_value(&self) -> f64 {
        match self.kind {
            SweepKind::Ni | SweepKind::Sni => self.worst.ni_min_eig,
            SweepKind::Passive => self.worst.herm_min_eig,
        }
    }
}

pub fn frequency_sweep_lti(sys: &StateSpace, grid: &[f64], kind: SweepKind) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(param("frequency grid is empty"));
    }
    if sys.inputs() != sys.outputs() {
        return Err(Error::Structural(format!(
            "frequency tests need a square transfer matrix, got {}x{}",
            sys.outputs(),
            sys.inputs()
        )));
    }
    let poles = if sys.order() == 0 { Vec::new() } else { sys.a.complex_eigenvalues().iter().copied().collect() };

    match kind {
        SweepKind::Sni => {
            if let Some(p) = poles.iter().find(|p| p.re >= -POLE_AXIS_TOL) {
                return Err(Error::Structural(format!("SNI needs all poles in Re s < 0, found {p}")));
            }
        }
        SweepKind::Ni | SweepKind::Passive => {
            if let Some(p) = poles.iter().find(|p| p.re > POLE_AXIS_TOL) {
                return Err(Error::Structural(format!("pole {p} in the open right half-plane")));
            }
        }
    }
    let axis: Vec<&Complex64> = poles.iter().filter(|p| p.re.abs() <= POLE_AXIS_TOL).collect();
    if let Some(p) = axis.iter().find(|p| p.im.abs() > POLE_AXIS_TOL) {
        return Err(Error::NotSupported(format!(
            "imaginary-axis pole {p} away from the origin; only poles at s = 0 are handled"
        )));
    }
    for &omega in grid {
        if let Some(p) = axis.iter().find(|p| (omega - p.im.abs()).abs() < GRID_POLE_CLEARANCE) {
            return Err(Error::Grid { omega, distance: (omega - p.im.abs()).abs() });
        }
    }

    let mut worst: Option<FrequencySample> = None;
    let score = |s: &FrequencySample| match kind {
        SweepKind::Ni | SweepKind::Sni => s.ni_min_eig,
        SweepKind::Passive => s.herm_min_eig,
    };
    for &omega in grid {
        let sample = frequency_sample(sys, omega)?;
        if !axis.is_empty() {
            let scale = sample.g.iter().fold(1.0f64, |m, v| m.max(v.norm()));
            if sample.g.iter().any(|v| v.im.abs() > 1e-9 * scale) {
                return Err(Error::NotSupported(format!("poles at the origin with G(jw) not real at omega = {omega}")));
            }
        }
        // strict comparison keeps the lowest frequency on ties
        if worst.as_ref().is_none_or(|w| score(&sample) < score(w)) {
            worst = Some(sample);
        }
    }
    let worst = worst.expect("grid is not empty");
    let value = score(&worst);
    let pass = match kind {
        SweepKind::Sni => value > STRICT_TOL,
        SweepKind::Ni | SweepKind::Passive => value >= -NONSTRICT_TOL,
    };
    Ok(SweepReport { kind, pass, worst, grid_points: grid.len(), origin_poles: axis.len() })
}
