use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Discrete transmit powers of one BS, in multiples of its per-sub-carrier
/// power `P̄`, indexed `[mu * num_subcarriers + subcarrier]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PowerAction {
    num_subcarriers: usize,
    units: Vec<u8>,
}

impl PowerAction {
    pub fn idle(num_mus: usize, num_subcarriers: usize) -> Self {
        Self { num_subcarriers, units: vec![0; num_mus * num_subcarriers] }
    }

    /// Validates the one-MU-per-sub-carrier and total budget constraints.
    pub fn from_units(num_mus: usize, num_subcarriers: usize, units: Vec<u8>) -> Result<Self> {
        if units.len() != num_mus * num_subcarriers {
            return Err(invalid("power vector length must be num_mus * num_subcarriers"));
        }
        let a = Self { num_subcarriers, units };
        if !a.is_feasible() {
            return Err(invalid("power vector violates the action-space constraints"));
        }
        Ok(a)
    }

    fn is_feasible(&self) -> bool {
        let s_count = self.num_subcarriers;
        let total: usize = self.units.iter().map(|&u| u as usize).sum();
        if total > s_count || self.units.iter().any(|&u| u as usize > s_count) {
            return false;
        }
        (0..s_count).all(|s| (0..self.num_mus()).filter(|&m| self.units(m, s) > 0).count() <= 1)
    }

    pub fn num_mus(&self) -> usize {
        self.units.len() / self.num_subcarriers
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn units(&self, mu: usize, subcarrier: usize) -> u8 {
        self.units[mu * self.num_subcarriers + subcarrier]
    }

    pub fn unit_vector(&self) -> &[u8] {
        &self.units
    }

    pub fn power_mw(&self, mu: usize, subcarrier: usize, unit_power_mw: f64) -> f64 {
        self.units(mu, subcarrier) as f64 * unit_power_mw
    }

    /// Total power units the BS puts on `subcarrier` (over all its MUs).
    pub fn subcarrier_units(&self, subcarrier: usize) -> u32 {
        (0..self.num_mus()).map(|m| self.units(m, subcarrier) as u32).sum()
    }

    /// Bit `s` set iff sub-carrier `s` carries positive power.
    pub fn subcarrier_mask(&self) -> u32 {
        (0..self.num_subcarriers)
            .filter(|&s| self.subcarrier_units(s) > 0)
            .fold(0, |m, s| m | (1 << s))
    }

    pub fn is_idle(&self) -> bool {
        self.units.iter().all(|&u| u == 0)
    }
}

/// All feasible power actions of one BS in lexicographic order of their
/// unit vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    num_mus: usize,
    num_subcarriers: usize,
    unit_power_mw: f64,
    actions: Vec<PowerAction>,
}

pub fn enumerate_actions(num_mus: usize, num_subcarriers: usize, unit_power_mw: f64) -> Result<ActionSpace> {
    if num_mus == 0 || num_subcarriers == 0 {
        return Err(invalid("need at least one MU and one sub-carrier"));
    }
    if num_subcarriers > 32 || num_subcarriers > u8::MAX as usize {
        return Err(invalid("at most 32 sub-carriers are supported"));
    }
    if !(unit_power_mw > 0.0) {
        return Err(invalid("unit power must be positive"));
    }
    let len = num_mus * num_subcarriers;
    let max_unit = num_subcarriers as u8;
    let mut units = vec![0u8; len];
    let mut actions = Vec::new();
    loop {
        let a = PowerAction { num_subcarriers, units: units.clone() };
        if a.is_feasible() {
            actions.push(a);
        }
        // Odometer, last entry fastest.
        let mut i = len;
        loop {
            if i == 0 {
                return Ok(ActionSpace { num_mus, num_subcarriers, unit_power_mw, actions });
            }
            i -= 1;
            if units[i] < max_unit {
                units[i] += 1;
                break;
            }
            units[i] = 0;
        }
    }
}

impl ActionSpace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, i: usize) -> &PowerAction {
        &self.actions[i]
    }

    pub fn actions(&self) -> &[PowerAction] {
        &self.actions
    }

    pub fn num_mus(&self) -> usize {
        self.num_mus
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn unit_power_mw(&self) -> f64 {
        self.unit_power_mw
    }

    pub fn budget_mw(&self) -> f64 {
        self.num_subcarriers as f64 * self.unit_power_mw
    }

    pub fn index_of(&self, a: &PowerAction) -> Option<usize> {
        self.actions.iter().position(|x| x == a)
    }

    /// Indices of actions whose powered sub-carriers lie inside `mask`.
    pub fn supported_on(&self, mask: u32) -> Vec<usize> {
        (0..self.actions.len()).filter(|&i| self.actions[i].subcarrier_mask() & !mask == 0).collect()
    }
}

/// Product of the per-BS action spaces, indexed mixed-radix with BS 0 most
/// significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointActionSpace {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl JointActionSpace {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(invalid("every player needs at least one action"));
        }
        let mut strides = vec![1; sizes.len()];
        for b in (0..sizes.len() - 1).rev() {
            strides[b] = strides[b + 1] * sizes[b + 1];
        }
        let total = strides[0] * sizes[0];
        Ok(Self { sizes, strides, total })
    }

    pub fn num_players(&self) -> usize {
        self.sizes.len()
    }

    pub fn size(&self, b: usize) -> usize {
        self.sizes[b]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn encode(&self, actions: &[usize]) -> usize {
        actions.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn decode(&self, joint: usize) -> Vec<usize> {
        (0..self.sizes.len()).map(|b| self.component(joint, b)).collect()
    }

    pub fn component(&self, joint: usize, b: usize) -> usize {
        (joint / self.strides[b]) % self.sizes[b]
    }

    /// Number of opponent profiles of player `b`.
    pub fn rest_len(&self, b: usize) -> usize {
        self.total / self.sizes[b]
    }

    /// Index of the opponents' profile (player `b` removed, same ordering).
    pub fn rest(&self, joint: usize, b: usize) -> usize {
        let high = joint / (self.strides[b] * self.sizes[b]);
        let low = joint % self.strides[b];
        high * self.strides[b] + low
    }

    /// Inverse of (`component`, `rest`).
    pub fn join(&self, b: usize, own: usize, rest: usize) -> usize {
        let high = rest / self.strides[b];
        let low = rest % self.strides[b];
        (high * self.sizes[b] + own) * self.strides[b] + low
    }
}
