use nalgebra::DVector;

use crate::error::{dim, param, Error, Result};
use crate::interconnection::Trajectory;
use crate::simplex::SimplexState;

/// Ledgers stop at the first recorded point where some share drops below this.
pub const BOUNDARY_GUARD: f64 = 1e-9;

/// Relative-entropy storage `-sum_i x*_i ln(x_i / x*_i)`.
pub fn storage_standard(x: &SimplexState, x_star: &SimplexState) -> Result<f64> {
    check_pair(x, x_star)?;
    if !x.is_interior() {
        return Err(Error::Domain { time: None, reason: "storage is infinite on the simplex boundary".into() });
    }
    Ok(relative_entropy(x.as_vector().as_slice(), x_star.as_vector().as_slice()))
}

/// Group-size weighted storage `N / (N - 2)` times [`storage_standard`].
pub fn storage_local(x: &SimplexState, x_star: &SimplexState, group_size: u32) -> Result<f64> {
    let w = StorageFunction::Local { group_size }.weight()?;
    Ok(w * storage_standard(x, x_star)?)
}

fn check_pair(x: &SimplexState, x_star: &SimplexState) -> Result<()> {
    if x.len() != x_star.len() {
        return Err(dim(format!("x has {} strategies, x* has {}", x.len(), x_star.len())));
    }
    if !x_star.is_interior() {
        return Err(param("reference point x* must be strictly interior"));
    }
    Ok(())
}

fn relative_entropy(x: &[f64], x_star: &[f64]) -> f64 {
    -x.iter().zip(x_star).map(|(xi, si)| si * (xi / si).ln()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StorageFunction {
    Standard,
    Local { group_size: u32 },
}

impl StorageFunction {
    fn weight(&self) -> Result<f64> {
        match *self {
            StorageFunction::Standard => Ok(1.0),
            StorageFunction::Local { group_size } if group_size >= 3 => {
                Ok(f64::from(group_size) / f64::from(group_size - 2))
            }
            StorageFunction::Local { group_size } => {
                Err(param(format!("local storage needs group size >= 3, got {group_size}")))
            }
        }
    }
}

/// What the storage change is compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum SupplyKind {
    /// `e^T p` with the game payoff `p`.
    Payoff,
    /// `e^T (p - K x)` for the passivated dynamic.
    EffectivePayoff { gain: DVector<f64> },
    /// `e^T p_hat` with `p_hat` the integrated payoff carried as auxiliary state.
    IntegratedPayoff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipationLedger {
    pub times: Vec<f64>,
    pub storage: Vec<f64>,
    pub supply: Vec<f64>,
    pub cumulative_supply: Vec<f64>,
    pub residual: Vec<f64>,
    /// Time at which the trajectory first came within [`BOUNDARY_GUARD`] of
    /// the boundary; the ledger ends at the previous record.
    pub boundary_cutoff: Option<f64>,
}

impl DissipationLedger {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn max_storage_drift(&self) -> f64 {
        let v0 = self.storage[0];
        self.storage.iter().fold(0.0, |m, v| m.max((v - v0).abs()))
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("ledger is never empty")
    }
}

/// Storage and supply along a recorded trajectory, with trapezoidal
/// accumulation of the supply over the recorded grid.
pub fn passivity_ledger(
    traj: &Trajectory,
    x_star: &SimplexState,
    supply: &SupplyKind,
    storage: StorageFunction,
) -> Result<DissipationLedger> {
    let n = traj.strategies;
    if x_star.len() != n {
        return Err(dim(format!("x* has {} strategies, trajectory has {n}", x_star.len())));
    }
    if !x_star.is_interior() {
        return Err(param("reference point x* must be strictly interior"));
    }
    match supply {
        SupplyKind::EffectivePayoff { gain } if gain.len() != n => {
            return Err(dim(format!("gain has {} entries, trajectory has {n} strategies", gain.len())));
        }
        SupplyKind::IntegratedPayoff if traj.aux_dim != n => {
            return Err(param("integrated-payoff supply needs an integrated payoff auxiliary state"));
        }
        _ => {}
    }
    let weight = storage.weight()?;
    let xs = x_star.as_vector().as_slice();

    let mut ledger = DissipationLedger {
        times: Vec::with_capacity(traj.len()),
        storage: Vec::with_capacity(traj.len()),
        supply: Vec::with_capacity(traj.len()),
        cumulative_supply: Vec::with_capacity(traj.len()),
        residual: Vec::with_capacity(traj.len()),
        boundary_cutoff: None,
    };
    for k in 0..traj.len() {
        let t = traj.times[k];
        let x = traj.shares(k);
        if x.iter().any(|v| *v < BOUNDARY_GUARD) {
            if k == 0 {
                return Err(Error::Domain { time: Some(t), reason: "initial state touches the boundary".into() });
            }
            ledger.boundary_cutoff = Some(t);
            break;
        }
        let driving: Vec<f64> = match supply {
            SupplyKind::Payoff => traj.payoffs[k].iter().copied().collect(),
            SupplyKind::EffectivePayoff { gain } => (0..n).map(|i| traj.payoffs[k][i] - gain[i] * x[i]).collect(),
            SupplyKind::IntegratedPayoff => traj.aux(k).to_vec(),
        };
        let s: f64 = (0..n).map(|i| (x[i] - xs[i]) * driving[i]).sum();
        let v = weight * relative_entropy(x, xs);
        let cum = match ledger.times.last() {
            None => 0.0,
            Some(&t_prev) => {
                ledger.cumulative_supply.last().unwrap() + 0.5 * (t - t_prev) * (s + ledger.supply.last().unwrap())
            }
        };
        let r = if k == 0 { 0.0 } else { v - ledger.storage[0] - cum };
        ledger.times.push(t);
        ledger.storage.push(v);
        ledger.supply.push(s);
        ledger.cumulative_supply.push(cum);
        ledger.residual.push(r);
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DynamicsModel, DynamicsVariant};
    use crate::game::{make_rps_game, GameModel};
    use crate::interconnection::{assemble, integrate, IntegratorConfig};

    fn s(v: &[f64]) -> SimplexState {
        SimplexState::from_slice(v).unwrap()
    }

    #[test]
    fn storage_values() {
        let bary = SimplexState::barycenter(3).unwrap();
        assert_eq!(storage_standard(&bary, &bary).unwrap(), 0.0);
        let x = s(&[0.5, 0.25, 0.25]);
        let by_hand = -(1.0 / 3.0) * (1.5f64.ln() + 2.0 * 0.75f64.ln());
        let v = storage_standard(&x, &bary).unwrap();
        assert!((v - by_hand).abs() < 1e-15);
        assert!((v - 0.056633).abs() < 1e-6);
        assert_eq!(storage_local(&x, &bary, 4).unwrap(), 2.0 * v);
        let ratio = storage_local(&x, &bary, 1000).unwrap() / v;
        assert!((ratio - 1000.0 / 998.0).abs() < 1e-14);
        assert_eq!(storage_local(&bary, &bary, 7).unwrap(), 0.0);
    }

    #[test]
    fn storage_errors() {
        let bary = SimplexState::barycenter(3).unwrap();
        let edge = s(&[0.5, 0.5, 0.0]);
        assert!(matches!(storage_standard(&bary, &edge), Err(Error::Parameter(_))));
        assert!(matches!(storage_standard(&edge, &bary), Err(Error::Domain { .. })));
        assert!(storage_local(&bary, &bary, 2).is_err());
    }

    #[test]
    fn storage_positive_off_reference() {
        let star = s(&[0.2, 0.5, 0.3]);
        for x in [[0.3, 0.4, 0.3], [0.1, 0.1, 0.8], [0.2, 0.5001, 0.2999]] {
            assert!(storage_standard(&s(&x), &star).unwrap() > 0.0);
        }
    }

    #[test]
    fn ledger_starts_at_zero_and_stops_at_boundary() {
        let sys = assemble(
            DynamicsModel::standard(),
            GameModel::Matrix(make_rps_game(1.0, 2.0).unwrap()),
            &s(&[0.5, 0.25, 0.25]),
            None,
        )
        .unwrap();
        let traj = integrate(&sys, &IntegratorConfig::new(1e-3, 200.0).unwrap()).unwrap();
        let bary = SimplexState::barycenter(3).unwrap();
        let ledger = passivity_ledger(&traj, &bary, &SupplyKind::Payoff, StorageFunction::Standard).unwrap();
        assert_eq!(ledger.cumulative_supply[0], 0.0);
        assert_eq!(ledger.residual[0], 0.0);
        let cut = ledger.boundary_cutoff.expect("non-passive game reaches the boundary");
        assert!(cut < 200.0 && ledger.end_time() < cut);
    }

    #[test]
    fn integrated_supply_needs_aux_state() {
        let sys = assemble(
            DynamicsModel::new(DynamicsVariant::Standard).unwrap(),
            GameModel::Matrix(make_rps_game(1.0, 1.0).unwrap()),
            &s(&[0.5, 0.25, 0.25]),
            None,
        )
        .unwrap();
        let traj = integrate(&sys, &IntegratorConfig::new(1e-2, 1.0).unwrap()).unwrap();
        let bary = SimplexState::barycenter(3).unwrap();
        assert!(passivity_ledger(&traj, &bary, &SupplyKind::IntegratedPayoff, StorageFunction::Standard).is_err());
        assert!(passivity_ledger(&traj, &s(&[1.0, 0.0, 0.0]), &SupplyKind::Payoff, StorageFunction::Standard).is_err());
    }
}
