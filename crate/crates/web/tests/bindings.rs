use evodyn_web::{classify_rps, lead_lag_class, lead_lag_curve, simplex_trajectory};

#[test]
fn trajectory_starts_at_projected_x0() {
    let path = simplex_trajectory(1.0, 1.0, &[0.5, 0.25, 0.25], "standard", 0.0, 0.0, 5.0).unwrap();
    assert_eq!(path.len() % 2, 0);
    assert!((path[0] - 0.375).abs() < 1e-15);
    assert!((path[1] - 0.25 * 0.5 * 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn passivated_path_ends_at_barycenter() {
    let path = simplex_trajectory(1.0, 1.0, &[0.5, 0.25, 0.25], "passivated", 1.0, 0.0, 200.0).unwrap();
    let (u, v) = (path[path.len() - 2], path[path.len() - 1]);
    assert!((u - 0.5).abs() < 1e-6 && (v - 3f64.sqrt() / 6.0).abs() < 1e-6);
    assert!(path.len() / 2 <= 5002, "downsampled to at most 5000 strides");
}

#[test]
fn rejects_bad_input() {
    assert!(simplex_trajectory(1.0, 1.0, &[0.5, 0.5], "standard", 0.0, 0.0, 5.0).is_err());
    assert!(simplex_trajectory(1.0, 1.0, &[0.5, 0.25, 0.25], "smith", 0.0, 0.0, 5.0).is_err());
    assert!(simplex_trajectory(1.0, 1.0, &[0.5, 0.25, 0.25], "standard", 0.0, 0.0, 1e6).is_err());
    assert!(lead_lag_curve(-1.0, 1.0, 10).is_err());
}

#[test]
fn classifications() {
    assert_eq!(classify_rps(2.0, 1.0).unwrap(), "StrictlyPassive");
    assert_eq!(classify_rps(1.0, 1.0).unwrap(), "Lossless");
    assert_eq!(lead_lag_class(2.0, 1.0).unwrap(), "PassiveAndNi");
    assert_eq!(lead_lag_class(0.5, 1.0).unwrap(), "NiOnly");
}

#[test]
fn curve_layout() {
    let c = lead_lag_curve(2.0, 1.0, 50).unwrap();
    assert_eq!(c.len(), 150);
    assert!((c[0] - 1e-2).abs() < 1e-15);
    assert!(c.chunks(3).all(|t| t[1] > 0.0 && t[2] < 0.0));
}
