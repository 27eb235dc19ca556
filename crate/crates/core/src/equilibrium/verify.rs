use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{average_utility, deviation_utility, GameStructure, StrategyTable, UtilityTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CceReport {
    /// Largest positive CCE gap over the BSs (0 for an exact CCE).
    pub max_constraint_violation: f64,
    /// `sum_l max_a dev_b(l, a) - average_b` per BS (may be negative).
    pub deviation_gap: Vec<f64>,
    pub average: Vec<f64>,
}

impl CceReport {
    /// Realized epsilon: the smallest epsilon for which the strategy is an
    /// epsilon-CCE of the supplied utilities.
    pub fn epsilon(&self) -> f64 {
        self.max_constraint_violation
    }
}

fn check(structure: &GameStructure, utility: &[UtilityTable]) -> Result<()> {
    if utility.len() != structure.num_players() {
        return Err(Error::DimensionMismatch("one utility table per player".into()));
    }
    Ok(())
}

/// Best deviation value `max_a dev_b(l, a)` for every local state of `b`,
/// by exhaustive enumeration.
fn best_deviation(
    structure: &GameStructure,
    b: usize,
    strategy: &StrategyTable,
    state_dist: &[f64],
    utility: &UtilityTable,
) -> Result<Vec<f64>> {
    let local_prob = structure.local_marginal(b, state_dist);
    (0..structure.num_local[b])
        .map(|l| {
            if local_prob[l] == 0.0 {
                return Ok(0.0);
            }
            let mut best = f64::NEG_INFINITY;
            for a in 0..structure.joint.size(b) {
                best = best.max(deviation_utility(structure, b, l, a, strategy, state_dist, utility)?);
            }
            Ok(best)
        })
        .collect()
}

/// Check the CCE conditions of `strategy` against `utility` (either the
/// pessimistic or the expected rates).
pub fn verify_cce(
    structure: &GameStructure,
    strategy: &StrategyTable,
    state_dist: &[f64],
    utility: &[UtilityTable],
) -> Result<CceReport> {
    check(structure, utility)?;
    let mut deviation_gap = Vec::new();
    let mut average = Vec::new();
    for (b, u) in utility.iter().enumerate() {
        let avg = average_utility(strategy, state_dist, u)?;
        let best: f64 = best_deviation(structure, b, strategy, state_dist, u)?.iter().sum();
        deviation_gap.push(best - avg);
        average.push(avg);
    }
    let max_constraint_violation = deviation_gap.iter().fold(0.0f64, |m, &g| m.max(g));
    Ok(CceReport { max_constraint_violation, deviation_gap, average })
}

/// A priori epsilon for which a CCE of the pessimistic utilities `v` is an
/// epsilon-CCE of the expected utilities `u`: with
/// `theta_b(l) = max_a vdev_b(l, a) / Pr(l)`, each local state contributes
/// `max(0, max_a udev_b(l, a) / Pr(l) - theta_b(l))` weighted by `Pr(l)`.
pub fn epsilon_bound(
    structure: &GameStructure,
    strategy: &StrategyTable,
    state_dist: &[f64],
    u: &[UtilityTable],
    v: &[UtilityTable],
) -> Result<f64> {
    check(structure, u)?;
    check(structure, v)?;
    let mut eps = 0.0f64;
    for b in 0..structure.num_players() {
        let local_prob = structure.local_marginal(b, state_dist);
        let bu = best_deviation(structure, b, strategy, state_dist, &u[b])?;
        let bv = best_deviation(structure, b, strategy, state_dist, &v[b])?;
        // Pr(l) * max(0, bu/Pr(l) - bv/Pr(l)) = max(0, bu - bv)
        let total: f64 = (0..structure.num_local[b])
            .filter(|&l| local_prob[l] > 0.0)
            .map(|l| (bu[l] - bv[l]).max(0.0))
            .sum();
        eps = eps.max(total);
    }
    Ok(eps)
}
