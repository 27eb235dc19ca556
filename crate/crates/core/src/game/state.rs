use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// What BS `b` observes: the frame overhead and the gain level of each of
/// its direct links, indexed `[mu * num_subcarriers + subcarrier]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalState {
    pub tau_index: usize,
    pub gain_levels: Vec<u8>,
}

/// Shared overhead plus every BS's direct-link levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlobalState {
    pub tau_index: usize,
    pub gain_levels: Vec<Vec<u8>>,
}

impl GlobalState {
    pub fn local(&self, b: usize) -> LocalState {
        LocalState { tau_index: self.tau_index, gain_levels: self.gain_levels[b].clone() }
    }
}

/// Mixed-radix packing of local and global states.
///
/// Local index: `tau * configs[b] + config_b`; global index:
/// `tau * prod(configs) + mixed_radix(config_0, .., config_{B-1})` with BS 0
/// most significant. Inside a configuration the first link is most
/// significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    num_tau: usize,
    link_levels: Vec<Vec<usize>>,
    configs: Vec<usize>,
    config_strides: Vec<usize>,
    total_configs: usize,
}

impl StateSpace {
    /// `link_levels[b][l]` is the number of gain levels of BS b's l-th direct
    /// link (l = mu * num_subcarriers + subcarrier).
    pub fn new(num_tau: usize, link_levels: Vec<Vec<usize>>) -> Result<Self> {
        if num_tau == 0 || link_levels.is_empty() {
            return Err(invalid("state space needs at least one overhead level and one BS"));
        }
        if link_levels.iter().flatten().any(|&n| n == 0 || n > u8::MAX as usize) {
            return Err(invalid("every link needs between 1 and 255 levels"));
        }
        let configs: Vec<usize> = link_levels.iter().map(|l| l.iter().product()).collect();
        let mut config_strides = vec![1; configs.len()];
        for b in (0..configs.len() - 1).rev() {
            config_strides[b] = config_strides[b + 1] * configs[b + 1];
        }
        let total_configs = config_strides[0] * configs[0];
        Ok(Self { num_tau, link_levels, configs, config_strides, total_configs })
    }

    pub fn num_bs(&self) -> usize {
        self.configs.len()
    }

    pub fn num_tau(&self) -> usize {
        self.num_tau
    }

    pub fn num_configs(&self, b: usize) -> usize {
        self.configs[b]
    }

    pub fn num_local(&self, b: usize) -> usize {
        self.num_tau * self.configs[b]
    }

    pub fn num_global(&self) -> usize {
        self.num_tau * self.total_configs
    }

    pub fn link_levels(&self, b: usize) -> &[usize] {
        &self.link_levels[b]
    }

    pub fn config_index(&self, b: usize, levels: &[u8]) -> usize {
        debug_assert_eq!(levels.len(), self.link_levels[b].len());
        levels.iter().zip(&self.link_levels[b]).fold(0, |acc, (&l, &n)| acc * n + l as usize)
    }

    pub fn config_levels(&self, b: usize, mut index: usize) -> Vec<u8> {
        let radix = &self.link_levels[b];
        let mut out = vec![0u8; radix.len()];
        for l in (0..radix.len()).rev() {
            out[l] = (index % radix[l]) as u8;
            index /= radix[l];
        }
        out
    }

    pub fn local_index(&self, b: usize, s: &LocalState) -> usize {
        s.tau_index * self.configs[b] + self.config_index(b, &s.gain_levels)
    }

    pub fn local_state(&self, b: usize, index: usize) -> LocalState {
        LocalState {
            tau_index: index / self.configs[b],
            gain_levels: self.config_levels(b, index % self.configs[b]),
        }
    }

    pub fn global_index(&self, s: &GlobalState) -> usize {
        let cfg: usize = (0..self.num_bs())
            .map(|b| self.config_index(b, &s.gain_levels[b]) * self.config_strides[b])
            .sum();
        s.tau_index * self.total_configs + cfg
    }

    pub fn global_index_from_configs(&self, tau_index: usize, configs: &[usize]) -> usize {
        tau_index * self.total_configs
            + configs.iter().zip(&self.config_strides).map(|(c, s)| c * s).sum::<usize>()
    }

    pub fn global_state(&self, index: usize) -> GlobalState {
        let tau_index = index / self.total_configs;
        let cfg = index % self.total_configs;
        let gain_levels = (0..self.num_bs())
            .map(|b| self.config_levels(b, (cfg / self.config_strides[b]) % self.configs[b]))
            .collect();
        GlobalState { tau_index, gain_levels }
    }

    /// Local state index of BS `b` inside global state `index`.
    pub fn local_of(&self, b: usize, index: usize) -> usize {
        let tau_index = index / self.total_configs;
        let cfg = (index % self.total_configs) / self.config_strides[b] % self.configs[b];
        tau_index * self.configs[b] + cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sizes() {
        let sp = StateSpace::new(2, vec![vec![2; 4], vec![2; 4]]).unwrap();
        assert_eq!(sp.num_local(0), 32);
        assert_eq!(sp.num_global(), 512);
    }

    #[test]
    fn indexing_round_trips() {
        let sp = StateSpace::new(3, vec![vec![2, 3], vec![2], vec![4, 1, 2]]).unwrap();
        for g in 0..sp.num_global() {
            let s = sp.global_state(g);
            assert_eq!(sp.global_index(&s), g);
            for b in 0..3 {
                let l = sp.local_of(b, g);
                assert_eq!(sp.local_index(b, &s.local(b)), l);
                assert_eq!(sp.local_state(b, l), s.local(b));
            }
        }
    }

    #[test]
    fn deterministic_indexing() {
        let a = StateSpace::new(2, vec![vec![2; 4], vec![2; 4]]).unwrap();
        let b = StateSpace::new(2, vec![vec![2; 4], vec![2; 4]]).unwrap();
        for g in 0..a.num_global() {
            assert_eq!(a.global_state(g), b.global_state(g));
        }
    }
}
