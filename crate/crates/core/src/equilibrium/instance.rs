use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{GameStructure, PlayerTables, StateSpace, UtilityTable};

const NORM_TOL: f64 = 1e-9;

/// Reported marginals the controller multiplies into a global state
/// distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMarginals {
    pub tau: Vec<f64>,
    /// `gains[b][link][level]`, links ordered `mu * num_subcarriers + s`.
    pub gains: Vec<Vec<Vec<f64>>>,
}

pub(crate) fn check_distribution(what: impl FnOnce() -> String, p: &[f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if p.is_empty() || p.iter().any(|x| !(*x >= 0.0)) || (sum - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { what: what(), sum });
    }
    Ok(())
}

/// The controller's program: maximize `sum_b lambda_b ln(1 + v_b)` over
/// joint strategies that are CCEs of the pessimistic game and meet every
/// BS's demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpInstance {
    pub structure: GameStructure,
    pub state_dist: Vec<f64>,
    /// Demand per BS in bit/s/Hz.
    pub lambda_hat: Vec<f64>,
    pub v: Vec<UtilityTable>,
    /// Marginal probability of every local state, per BS.
    pub local_prob: Vec<Vec<f64>>,
}

impl RpInstance {
    pub fn new(structure: GameStructure, state_dist: Vec<f64>, lambda_hat: Vec<f64>, v: Vec<UtilityTable>) -> Result<Self> {
        let nb = structure.num_players();
        if state_dist.len() != structure.num_states || lambda_hat.len() != nb || v.len() != nb {
            return Err(Error::DimensionMismatch(format!(
                "{} states / {} players vs distribution of {} and {} demands, {} tables",
                structure.num_states,
                nb,
                state_dist.len(),
                lambda_hat.len(),
                v.len()
            )));
        }
        check_distribution(|| "state distribution".into(), &state_dist)?;
        if lambda_hat.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(invalid("demands must be positive and finite"));
        }
        for t in &v {
            if t.num_states() != structure.num_states || t.num_actions() != structure.joint.len() {
                return Err(Error::DimensionMismatch("utility table shape".into()));
            }
        }
        let local_prob = (0..nb).map(|b| structure.local_marginal(b, &state_dist)).collect();
        Ok(Self { structure, state_dist, lambda_hat, v, local_prob })
    }

    pub fn num_players(&self) -> usize {
        self.structure.num_players()
    }
}

/// Product-form global distribution from the reported marginals.
pub fn product_distribution(states: &StateSpace, marginals: &StateMarginals) -> Result<Vec<f64>> {
    let nb = states.num_bs();
    if marginals.tau.len() != states.num_tau() || marginals.gains.len() != nb {
        return Err(Error::DimensionMismatch("marginals do not match the state space".into()));
    }
    check_distribution(|| "overhead marginal".into(), &marginals.tau)?;
    let mut config_prob = Vec::with_capacity(nb);
    for b in 0..nb {
        let links = states.link_levels(b);
        let g = &marginals.gains[b];
        if g.len() != links.len() || g.iter().zip(links).any(|(m, &n)| m.len() != n) {
            return Err(Error::DimensionMismatch(format!("gain marginals of BS {b}")));
        }
        for (l, m) in g.iter().enumerate() {
            check_distribution(|| format!("gain marginal of BS {b} link {l}"), m)?;
        }
        let probs: Vec<f64> = (0..states.num_configs(b))
            .map(|c| {
                states.config_levels(b, c).iter().enumerate().map(|(l, &lev)| g[l][lev as usize]).product()
            })
            .collect();
        config_prob.push(probs);
    }
    let mut dist = vec![0.0; states.num_global()];
    let mut cfg = vec![0usize; nb];
    let total: usize = (0..nb).map(|b| states.num_configs(b)).product();
    for (t, &pt) in marginals.tau.iter().enumerate() {
        for k in 0..total {
            let mut rem = k;
            for b in (0..nb).rev() {
                cfg[b] = rem % states.num_configs(b);
                rem /= states.num_configs(b);
            }
            let p = cfg.iter().enumerate().fold(pt, |acc, (b, &c)| acc * config_prob[b][c]);
            dist[states.global_index_from_configs(t, &cfg)] = p;
        }
    }
    Ok(dist)
}

pub fn build_rp(
    states: &StateSpace,
    marginals: &StateMarginals,
    lambda_hat: Vec<f64>,
    tables: &PlayerTables,
) -> Result<RpInstance> {
    let dist = product_distribution(states, marginals)?;
    RpInstance::new(tables.structure.clone(), dist, lambda_hat, tables.v.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn uniform_reference_marginals() {
        let sp = StateSpace::new(2, vec![vec![2; 4], vec![2; 4]]).unwrap();
        let m = StateMarginals { tau: uniform(2), gains: vec![vec![uniform(2); 4]; 2] };
        let d = product_distribution(&sp, &m).unwrap();
        assert_eq!(d.len(), 512);
        assert!(d.iter().all(|&p| (p - 1.0 / 512.0).abs() < 1e-15));
    }

    #[test]
    fn product_matches_marginals() {
        let sp = StateSpace::new(2, vec![vec![2, 3], vec![2]]).unwrap();
        let m = StateMarginals {
            tau: vec![0.3, 0.7],
            gains: vec![vec![vec![0.1, 0.9], vec![0.2, 0.5, 0.3]], vec![vec![0.6, 0.4]]],
        };
        let d = product_distribution(&sp, &m).unwrap();
        for (g, &p) in d.iter().enumerate() {
            let s = sp.global_state(g);
            let want = m.tau[s.tau_index]
                * m.gains[0][0][s.gain_levels[0][0] as usize]
                * m.gains[0][1][s.gain_levels[0][1] as usize]
                * m.gains[1][0][s.gain_levels[1][0] as usize];
            assert!((p - want).abs() < 1e-15);
        }
    }

    #[test]
    fn single_state() {
        let sp = StateSpace::new(1, vec![vec![1]]).unwrap();
        let m = StateMarginals { tau: vec![1.0], gains: vec![vec![vec![1.0]]] };
        assert_eq!(product_distribution(&sp, &m).unwrap(), vec![1.0]);
    }

    #[test]
    fn unnormalized_marginal_rejected() {
        let sp = StateSpace::new(2, vec![vec![2]]).unwrap();
        let m = StateMarginals { tau: vec![0.5, 0.4], gains: vec![vec![uniform(2)]] };
        assert!(matches!(product_distribution(&sp, &m), Err(Error::NotNormalized { .. })));
        let m = StateMarginals { tau: uniform(2), gains: vec![vec![vec![0.5, 0.5, 0.0]]] };
        assert!(matches!(product_distribution(&sp, &m), Err(Error::DimensionMismatch(_))));
    }
}
