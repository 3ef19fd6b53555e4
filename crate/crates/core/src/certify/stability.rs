use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{dim, Error, Result};
use crate::game::{rcond_estimate, StateSpace};

const HURWITZ_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopMatrix {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub spectral_abscissa: f64,
    pub hurwitz: bool,
}

/// State matrix of the positive-feedback loop `u = y_c`, `u_c = y`:
///
/// ```text
/// [ A + B Dc E C      B Cc + B Dc E D Cc ]
/// [ Bc E C            Ac + Bc E D Cc     ]      E = (I - D Dc)^{-1}
/// ```
pub fn closed_loop_matrix(plant: &StateSpace, controller: &StateSpace) -> Result<ClosedLoopMatrix> {
    if plant.inputs() != controller.outputs() || plant.outputs() != controller.inputs() {
        return Err(dim(format!(
            "plant is {}x{} (out x in), controller is {}x{}",
            plant.outputs(),
            plant.inputs(),
            controller.outputs(),
            controller.inputs()
        )));
    }
    let (a, b, c, d) = (&plant.a, &plant.b, &plant.c, &plant.d);
    let (ac, bc, cc, dc) = (&controller.a, &controller.b, &controller.c, &controller.d);
    let q = plant.outputs();
    let i_ddc = DMatrix::identity(q, q) - d * dc;
    if rcond_estimate(&i_ddc) < 1e-12 {
        return Err(Error::IllPosed("I - D Dc is singular".into()));
    }
    let e = i_ddc.try_inverse().ok_or_else(|| Error::IllPosed("I - D Dc is singular".into()))?;

    let (n, nc) = (plant.order(), controller.order());
    let mut m = DMatrix::zeros(n + nc, n + nc);
    m.view_mut((0, 0), (n, n)).copy_from(&(a + b * dc * &e * c));
    m.view_mut((0, n), (n, nc)).copy_from(&(b * cc + b * dc * &e * d * cc));
    m.view_mut((n, 0), (nc, n)).copy_from(&(bc * &e * c));
    m.view_mut((n, n), (nc, nc)).copy_from(&(ac + bc * &e * d * cc));

    let eigenvalues: Vec<Complex64> =
        if m.is_empty() { Vec::new() } else { m.complex_eigenvalues().iter().copied().collect() };
    let spectral_abscissa = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let hurwitz = eigenvalues.iter().all(|z| z.re < -HURWITZ_MARGIN);
    Ok(ClosedLoopMatrix { matrix: m, eigenvalues, spectral_abscissa, hurwitz })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcGainReport {
    pub plant_dc: DMatrix<f64>,
    pub controller_dc: DMatrix<f64>,
    pub lambda_max: f64,
    pub pass: bool,
}

/// `lambda_max(G(0) Gc(0)) < 1`.
pub fn dc_gain_condition(plant: &StateSpace, controller: &StateSpace) -> Result<DcGainReport> {
    if plant.inputs() != controller.outputs() || plant.outputs() != controller.inputs() {
        return Err(dim("plant and controller dimensions do not close the loop"));
    }
    let plant_dc = plant.dc_gain()?;
    let controller_dc = controller.dc_gain()?;
    let prod = &plant_dc * &controller_dc;
    let lambda_max = prod.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(DcGainReport { pass: lambda_max < 1.0 - 1e-12, plant_dc, controller_dc, lambda_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::example_sni_game;
    use nalgebra::DVector;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    fn static_gain(k: f64, m: usize) -> StateSpace {
        StateSpace::new(DMatrix::zeros(0, 0), DMatrix::zeros(0, m), DMatrix::zeros(m, 0), DMatrix::identity(m, m) * k)
            .unwrap()
    }

    #[test]
    fn decoupled_blocks() {
        let p = StateSpace::new(diag(&[-1.0, -2.0]), DMatrix::zeros(2, 1), DMatrix::zeros(1, 2), DMatrix::zeros(1, 1))
            .unwrap();
        let c =
            StateSpace::new(diag(&[-3.0]), DMatrix::zeros(1, 1), DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)).unwrap();
        let r = closed_loop_matrix(&p, &c).unwrap();
        assert_eq!(r.matrix, diag(&[-1.0, -2.0, -3.0]));
        assert!(r.hurwitz);
        let unstable =
            StateSpace::new(diag(&[0.5]), DMatrix::zeros(1, 1), DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)).unwrap();
        assert!(!closed_loop_matrix(&p, &unstable).unwrap().hurwitz);
    }

    #[test]
    fn marginal_controller_leaves_integrators() {
        let di = StateSpace::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let r = closed_loop_matrix(&di, &static_gain(0.0, 1)).unwrap();
        assert!(!r.hurwitz);
        assert!(r.eigenvalues.iter().all(|z| z.norm() < 1e-12));
        // negative static gain in positive feedback gives an undamped oscillator
        let osc = closed_loop_matrix(&di, &static_gain(-1.0, 1)).unwrap();
        assert!(!osc.hurwitz);
        assert!(dc_gain_condition(&di, &static_gain(-1.0, 1)).is_err());
    }

    #[test]
    fn ill_posed_loop() {
        assert!(matches!(closed_loop_matrix(&static_gain(1.0, 1), &static_gain(1.0, 1)), Err(Error::IllPosed(_))));
        assert!(closed_loop_matrix(&static_gain(1.0, 2), &static_gain(1.0, 1)).is_err());
    }

    #[test]
    fn dc_gain_cases() {
        let half = static_gain(0.5, 2);
        let r = dc_gain_condition(&half, &half).unwrap();
        assert!(r.pass && (r.lambda_max - 0.25).abs() < 1e-15);
        let one = static_gain(1.0, 2);
        assert!(!dc_gain_condition(&one, &one).unwrap().pass);
        let g = example_sni_game().dc_gain().unwrap();
        assert!((g[(0, 0)] - (1.0 / 0.9 - 3.0)).abs() < 1e-14);
        assert!((g[(1, 1)] - (1.0 / 1.2 - 3.0)).abs() < 1e-14);
        assert!(g[(0, 1)].abs() < 1e-15);
    }
}
