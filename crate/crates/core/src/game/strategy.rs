use serde::{Deserialize, Serialize};

use super::actions::JointActionSpace;
use crate::error::{invalid, Error, Result};

/// Conditional distribution over joint actions for every global state,
/// stored row-major `[state][joint action]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyTable {
    num_actions: usize,
    probs: Vec<f64>,
}

impl StrategyTable {
    pub fn new(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != num_states * num_actions || num_actions == 0 {
            return Err(Error::DimensionMismatch(format!(
                "strategy has {} entries, expected {num_states} x {num_actions}",
                probs.len()
            )));
        }
        let t = Self { num_actions, probs };
        for s in 0..num_states {
            let row = t.row(s);
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < -1e-12 || !p.is_finite()) {
                return Err(Error::NotNormalized { what: format!("strategy row {s}"), sum });
            }
        }
        Ok(t)
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        Self { num_actions, probs: vec![1.0 / num_actions as f64; num_states * num_actions] }
    }

    pub fn point_mass(num_states: usize, num_actions: usize, action: usize) -> Self {
        let mut probs = vec![0.0; num_states * num_actions];
        for s in 0..num_states {
            probs[s * num_actions + action] = 1.0;
        }
        Self { num_actions, probs }
    }

    /// Clamp tiny negatives to zero and renormalize each row.
    pub(crate) fn from_raw_clamped(num_actions: usize, mut probs: Vec<f64>) -> Self {
        for row in probs.chunks_mut(num_actions) {
            row.iter_mut().for_each(|p| *p = p.max(0.0));
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= sum);
        }
        Self { num_actions, probs }
    }

    pub fn num_states(&self) -> usize {
        self.probs.len() / self.num_actions
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.probs[state * self.num_actions..(state + 1) * self.num_actions]
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.probs[state * self.num_actions + action]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

/// A player's utility over (global state, joint action). Rows are shared
/// between global states mapping to the same row (for the network game, a
/// row per local state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityTable {
    num_actions: usize,
    rows: Vec<f64>,
    row_of_state: Vec<u32>,
}

impl UtilityTable {
    pub fn new(num_actions: usize, rows: Vec<f64>, row_of_state: Vec<u32>) -> Result<Self> {
        if num_actions == 0 || !rows.len().is_multiple_of(num_actions) {
            return Err(Error::DimensionMismatch("utility rows".into()));
        }
        let n_rows = rows.len() / num_actions;
        if row_of_state.iter().any(|&r| r as usize >= n_rows) {
            return Err(Error::DimensionMismatch("utility row index out of range".into()));
        }
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(invalid("utilities must be finite"));
        }
        Ok(Self { num_actions, rows, row_of_state })
    }

    /// One row per global state.
    pub fn dense(num_actions: usize, values: Vec<f64>) -> Result<Self> {
        let n = values.len() / num_actions.max(1);
        Self::new(num_actions, values, (0..n as u32).collect())
    }

    pub fn num_states(&self) -> usize {
        self.row_of_state.len()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, state: usize) -> &[f64] {
        let r = self.row_of_state[state] as usize;
        &self.rows[r * self.num_actions..(r + 1) * self.num_actions]
    }

    pub fn value(&self, state: usize, action: usize) -> f64 {
        self.row(state)[action]
    }
}

/// Index structure shared by every player: the joint action space and the
/// projection of global states onto each player's local states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameStructure {
    pub joint: JointActionSpace,
    pub local_of: Vec<Vec<u32>>,
    pub num_local: Vec<usize>,
    pub num_states: usize,
}

impl GameStructure {
    pub fn new(joint: JointActionSpace, local_of: Vec<Vec<u32>>) -> Result<Self> {
        if local_of.len() != joint.num_players() {
            return Err(Error::DimensionMismatch("one local-state map per player".into()));
        }
        let num_states = local_of[0].len();
        if num_states == 0 || local_of.iter().any(|l| l.len() != num_states) {
            return Err(Error::DimensionMismatch("local-state maps must cover every global state".into()));
        }
        let num_local = local_of.iter().map(|l| l.iter().map(|&x| x as usize + 1).max().unwrap_or(0)).collect();
        Ok(Self { joint, local_of, num_local, num_states })
    }

    pub fn num_players(&self) -> usize {
        self.joint.num_players()
    }

    /// Marginal probability of each local state of player `b`.
    pub fn local_marginal(&self, b: usize, state_dist: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_local[b]];
        for (w, &p) in state_dist.iter().enumerate() {
            out[self.local_of[b][w] as usize] += p;
        }
        out
    }
}

fn check_dims(strategy: &StrategyTable, state_dist: &[f64], utility: &UtilityTable) -> Result<()> {
    if strategy.num_states() != state_dist.len()
        || utility.num_states() != state_dist.len()
        || strategy.num_actions() != utility.num_actions()
    {
        return Err(Error::DimensionMismatch(format!(
            "strategy {}x{}, state distribution {}, utility {}x{}",
            strategy.num_states(),
            strategy.num_actions(),
            state_dist.len(),
            utility.num_states(),
            utility.num_actions()
        )));
    }
    Ok(())
}

/// `sum_w sum_P Pr(w) Pr(P|w) utility(w, P)`.
pub fn average_utility(strategy: &StrategyTable, state_dist: &[f64], utility: &UtilityTable) -> Result<f64> {
    check_dims(strategy, state_dist, utility)?;
    Ok(state_dist
        .iter()
        .enumerate()
        .map(|(w, &pw)| pw * strategy.row(w).iter().zip(utility.row(w)).map(|(p, u)| p * u).sum::<f64>())
        .sum())
}

/// Expected utility of player `b` restricted to local state `local`, when it
/// commits to `deviation` while everybody else keeps following `strategy`:
/// `sum_{w: w_b = local} sum_P Pr(w) Pr(P|w) utility(w, (deviation, P_-b))`.
pub fn deviation_utility(
    structure: &GameStructure,
    b: usize,
    local: usize,
    deviation: usize,
    strategy: &StrategyTable,
    state_dist: &[f64],
    utility: &UtilityTable,
) -> Result<f64> {
    check_dims(strategy, state_dist, utility)?;
    if b >= structure.num_players() || deviation >= structure.joint.size(b) {
        return Err(invalid("player or deviation out of range"));
    }
    let j = &structure.joint;
    let mut total = 0.0;
    for (w, &pw) in state_dist.iter().enumerate() {
        if structure.local_of[b][w] as usize != local || pw == 0.0 {
            continue;
        }
        let row = utility.row(w);
        let mut acc = 0.0;
        for (p, &prob) in strategy.row(w).iter().enumerate() {
            if prob != 0.0 {
                acc += prob * row[j.join(b, deviation, j.rest(p, b))];
            }
        }
        total += pw * acc;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> (GameStructure, UtilityTable, UtilityTable) {
        // Two players with 2 actions each, two global states; player 0 sees
        // the state, player 1 does not.
        let joint = JointActionSpace::new(vec![2, 2]).unwrap();
        let s = GameStructure::new(joint, vec![vec![0, 1], vec![0, 0]]).unwrap();
        let u0 = UtilityTable::dense(4, vec![1.0, 2.0, 3.0, 4.0, 0.5, 0.0, 2.0, 1.0]).unwrap();
        let u1 = UtilityTable::dense(4, vec![4.0, 1.0, 0.0, 2.0, 1.0, 1.0, 3.0, 0.0]).unwrap();
        (s, u0, u1)
    }

    #[test]
    fn point_masses_pick_the_cell() {
        let (_, u0, _) = two_by_two();
        let strat = StrategyTable::point_mass(2, 4, 2);
        let avg = average_utility(&strat, &[1.0, 0.0], &u0).unwrap();
        assert_eq!(avg, 3.0);
    }

    #[test]
    fn uniform_over_two_actions_is_mean() {
        let u = UtilityTable::dense(2, vec![2.0, 4.0]).unwrap();
        let s = StrategyTable::uniform(1, 2);
        assert_eq!(average_utility(&s, &[1.0], &u).unwrap(), 3.0);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let u = UtilityTable::dense(2, vec![2.0, 4.0]).unwrap();
        let s = StrategyTable::uniform(1, 3);
        assert!(matches!(average_utility(&s, &[1.0], &u), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn product_strategy_with_additive_utilities() {
        // u(a0, a1) = f(a0) + g(a1): joint and product-of-marginals agree.
        let f = [0.3, 1.7];
        let g = [2.0, -0.5];
        let vals: Vec<f64> = (0..4).map(|p| f[p / 2] + g[p % 2]).collect();
        let u = UtilityTable::dense(4, vals).unwrap();
        let (m0, m1) = ([0.25, 0.75], [0.6, 0.4]);
        let probs: Vec<f64> = (0..4).map(|p| m0[p / 2] * m1[p % 2]).collect();
        let s = StrategyTable::new(1, 4, probs).unwrap();
        let joint = average_utility(&s, &[1.0], &u).unwrap();
        let separate = m0[0] * f[0] + m0[1] * f[1] + m1[0] * g[0] + m1[1] * g[1];
        assert!((joint - separate).abs() < 1e-12);
    }

    #[test]
    fn deviation_matches_brute_force() {
        let (s, u0, u1) = two_by_two();
        let dist = [0.3, 0.7];
        let strat = StrategyTable::new(2, 4, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.0, 0.25, 0.25]).unwrap();
        for (b, u) in [(0usize, &u0), (1, &u1)] {
            for local in 0..s.num_local[b] {
                for dev in 0..2 {
                    let got = deviation_utility(&s, b, local, dev, &strat, &dist, u).unwrap();
                    let mut want = 0.0;
                    for w in 0..2 {
                        if s.local_of[b][w] as usize != local {
                            continue;
                        }
                        for a0 in 0..2 {
                            for a1 in 0..2 {
                                let p = strat.prob(w, a0 * 2 + a1);
                                let played = if b == 0 { dev * 2 + a1 } else { a0 * 2 + dev };
                                want += dist[w] * p * u.value(w, played);
                            }
                        }
                    }
                    assert!((got - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn no_deviation_gives_restricted_average() {
        let (s, u0, _) = two_by_two();
        // Player 0 always recommended action 1.
        let strat = StrategyTable::new(2, 4, vec![0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let dist = [0.4, 0.6];
        let dev = deviation_utility(&s, 0, 1, 1, &strat, &dist, &u0).unwrap();
        let restricted = 0.6 * u0.value(1, 2);
        assert!((dev - restricted).abs() < 1e-15);
    }
}
