use serde::{Deserialize, Serialize};

use super::actions::{enumerate_actions, ActionSpace, JointActionSpace};
use super::state::StateSpace;
use super::strategy::{GameStructure, UtilityTable};
use crate::channel::GainSet;
use crate::error::{invalid, Error, Result};

/// Effective DL spectral efficiency of one (MU, sub-carrier) for a frame
/// whose first `tau` slots go to the fronthaul.
pub fn dl_rate(power_mw: f64, direct_gain: f64, interference_mw: f64, noise_mw: f64, tau: f64, t0: f64) -> Result<f64> {
    if !(power_mw >= 0.0) || !(direct_gain >= 0.0) || !(interference_mw >= 0.0) {
        return Err(invalid("power, gain and interference must be non-negative"));
    }
    if !(tau >= 0.0) || tau > t0 {
        return Err(invalid(format!("overhead {tau} outside [0, {t0}]")));
    }
    Ok((t0 - tau) / t0 * (power_mw * direct_gain / (noise_mw + interference_mw)).ln_1p() / std::f64::consts::LN_2)
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Static description of the DL game: topology, gain sets, action and
/// state spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameModel {
    mus_per_bs: Vec<usize>,
    mu_offset: Vec<usize>,
    num_subcarriers: usize,
    /// `gain_sets[tx bs][rx global mu]`, shared by every sub-carrier.
    gain_sets: Vec<Vec<GainSet>>,
    actions: Vec<ActionSpace>,
    joint: JointActionSpace,
    states: StateSpace,
    noise_mw: f64,
    t0: f64,
    tau_levels: Vec<f64>,
}

/// Per-BS utility tables, each with one row per local state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerTables {
    pub structure: GameStructure,
    pub u: Vec<UtilityTable>,
    pub v: Vec<UtilityTable>,
}

impl GameModel {
    pub fn new(
        mus_per_bs: Vec<usize>,
        num_subcarriers: usize,
        unit_power_mw: &[f64],
        gain_sets: Vec<Vec<GainSet>>,
        noise_mw: f64,
        t0: usize,
        tau_levels: Vec<f64>,
    ) -> Result<Self> {
        let num_bs = mus_per_bs.len();
        if num_bs == 0 || unit_power_mw.len() != num_bs || gain_sets.len() != num_bs {
            return Err(Error::DimensionMismatch("per-BS inputs must have one entry per BS".into()));
        }
        let num_mus: usize = mus_per_bs.iter().sum();
        if gain_sets.iter().any(|g| g.len() != num_mus) {
            return Err(Error::DimensionMismatch("need a gain set for every (BS, MU) pair".into()));
        }
        if gain_sets.iter().flatten().any(|g| g.is_empty()) {
            return Err(invalid("gain sets must be non-empty"));
        }
        if !(noise_mw > 0.0) || t0 == 0 {
            return Err(invalid("noise must be positive and T0 at least 1"));
        }
        if tau_levels.is_empty() || tau_levels.iter().any(|&t| !(t >= 0.0) || t > t0 as f64) {
            return Err(invalid("overhead levels must lie in [0, T0]"));
        }
        let mut mu_offset = vec![0; num_bs];
        for b in 1..num_bs {
            mu_offset[b] = mu_offset[b - 1] + mus_per_bs[b - 1];
        }
        let actions = (0..num_bs)
            .map(|b| enumerate_actions(mus_per_bs[b], num_subcarriers, unit_power_mw[b]))
            .collect::<Result<Vec<_>>>()?;
        let joint = JointActionSpace::new(actions.iter().map(|a| a.len()).collect())?;
        let link_levels = (0..num_bs)
            .map(|b| {
                (0..mus_per_bs[b])
                    .flat_map(|m| std::iter::repeat_n(gain_sets[b][mu_offset[b] + m].len(), num_subcarriers))
                    .collect()
            })
            .collect();
        let states = StateSpace::new(tau_levels.len(), link_levels)?;
        Ok(Self {
            mus_per_bs,
            mu_offset,
            num_subcarriers,
            gain_sets,
            actions,
            joint,
            states,
            noise_mw,
            t0: t0 as f64,
            tau_levels,
        })
    }

    pub fn num_bs(&self) -> usize {
        self.mus_per_bs.len()
    }

    pub fn num_mus(&self, b: usize) -> usize {
        self.mus_per_bs[b]
    }

    pub fn total_mus(&self) -> usize {
        self.mus_per_bs.iter().sum()
    }

    /// Global index of BS `b`'s local MU `m`.
    pub fn global_mu(&self, b: usize, m: usize) -> usize {
        self.mu_offset[b] + m
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn gain_set(&self, tx_bs: usize, rx_mu: usize) -> &GainSet {
        &self.gain_sets[tx_bs][rx_mu]
    }

    pub fn actions(&self, b: usize) -> &ActionSpace {
        &self.actions[b]
    }

    pub fn joint(&self) -> &JointActionSpace {
        &self.joint
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn noise_mw(&self) -> f64 {
        self.noise_mw
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tau_levels(&self) -> &[f64] {
        &self.tau_levels
    }

    /// Largest possible per-(MU, sub-carrier) rate: full budget on the best
    /// direct gain with no interference.
    pub fn r_max(&self) -> f64 {
        (0..self.num_bs())
            .flat_map(|b| {
                (0..self.mus_per_bs[b]).map(move |m| {
                    let h = self.gain_sets[b][self.mu_offset[b] + m].max_gain();
                    log2_1p(self.actions[b].budget_mw() * h / self.noise_mw)
                })
            })
            .fold(0.0, f64::max)
    }

    /// Power (mW) BS `b'` radiates on sub-carrier `s` under joint action `joint`.
    fn radiated_mw(&self, bp: usize, joint: usize, s: usize) -> f64 {
        let a = self.actions[bp].get(self.joint.component(joint, bp));
        a.subcarrier_units(s) as f64 * self.actions[bp].unit_power_mw()
    }

    /// Interferers hitting global MU `mu` on sub-carrier `s`: (power, gain set).
    fn interferers(&self, b: usize, mu: usize, joint: usize, s: usize) -> Vec<(f64, &GainSet)> {
        (0..self.num_bs())
            .filter(|&bp| bp != b)
            .map(|bp| (self.radiated_mw(bp, joint, s), &self.gain_sets[bp][mu]))
            .filter(|(p, _)| *p > 0.0)
            .collect()
    }

    /// Sum over (m, s) of `log2(1 + SINR)` without the overhead prefactor.
    fn raw_utility(&self, b: usize, gain_levels: &[u8], joint: usize, worst_case: bool) -> f64 {
        let own = self.actions[b].get(self.joint.component(joint, b));
        let unit = self.actions[b].unit_power_mw();
        let mut total = 0.0;
        for m in 0..self.mus_per_bs[b] {
            let mu = self.mu_offset[b] + m;
            for s in 0..self.num_subcarriers {
                let p = own.power_mw(m, s, unit);
                if p == 0.0 {
                    continue;
                }
                let h = self.gain_sets[b][mu].gain(gain_levels[m * self.num_subcarriers + s] as usize);
                let signal = p * h;
                let intf = self.interferers(b, mu, joint, s);
                total += if worst_case {
                    let i: f64 = intf.iter().map(|(pw, g)| pw * g.max_gain()).sum();
                    log2_1p(signal / (self.noise_mw + i))
                } else {
                    expected_rate(signal, self.noise_mw, &intf)
                };
            }
        }
        total
    }

    fn prefactor(&self, tau_index: usize) -> f64 {
        (self.t0 - self.tau_levels[tau_index]) / self.t0
    }

    /// Expected DL rate of BS `b` over the interfering-gain distributions.
    pub fn utility_u(&self, b: usize, local_index: usize, joint: usize) -> f64 {
        let ls = self.states.local_state(b, local_index);
        self.prefactor(ls.tau_index) * self.raw_utility(b, &ls.gain_levels, joint, false)
    }

    /// DL rate of BS `b` with every interfering gain at its maximal level.
    pub fn utility_v(&self, b: usize, local_index: usize, joint: usize) -> f64 {
        let ls = self.states.local_state(b, local_index);
        self.prefactor(ls.tau_index) * self.raw_utility(b, &ls.gain_levels, joint, true)
    }

    pub fn structure(&self) -> Result<GameStructure> {
        let ng = self.states.num_global();
        let local_of = (0..self.num_bs())
            .map(|b| (0..ng).map(|g| self.states.local_of(b, g) as u32).collect())
            .collect();
        GameStructure::new(self.joint.clone(), local_of)
    }

    /// Tabulate u and v for every BS, local state and joint action.
    pub fn tables(&self) -> Result<PlayerTables> {
        let structure = self.structure()?;
        let na = self.joint.len();
        let mut u = Vec::with_capacity(self.num_bs());
        let mut v = Vec::with_capacity(self.num_bs());
        for b in 0..self.num_bs() {
            let nc = self.states.num_configs(b);
            let (mut raw_u, mut raw_v) = (vec![0.0; nc * na], vec![0.0; nc * na]);
            for c in 0..nc {
                let levels = self.states.config_levels(b, c);
                for p in 0..na {
                    raw_u[c * na + p] = self.raw_utility(b, &levels, p, false);
                    raw_v[c * na + p] = self.raw_utility(b, &levels, p, true);
                }
            }
            let nl = self.states.num_local(b);
            let (mut rows_u, mut rows_v) = (vec![0.0; nl * na], vec![0.0; nl * na]);
            for l in 0..nl {
                let (t, c) = (l / nc, l % nc);
                let f = self.prefactor(t);
                for p in 0..na {
                    rows_u[l * na + p] = f * raw_u[c * na + p];
                    rows_v[l * na + p] = f * raw_v[c * na + p];
                }
            }
            u.push(UtilityTable::new(na, rows_u, structure.local_of[b].clone())?);
            v.push(UtilityTable::new(na, rows_v, structure.local_of[b].clone())?);
        }
        Ok(PlayerTables { structure, u, v })
    }
}

/// `E log2(1 + signal / (noise + sum_k p_k g_k))` with independent `g_k`,
/// by enumerating every level combination.
fn expected_rate(signal: f64, noise: f64, interferers: &[(f64, &GainSet)]) -> f64 {
    fn go(signal: f64, noise_plus: f64, prob: f64, rest: &[(f64, &GainSet)]) -> f64 {
        match rest.split_first() {
            None => prob * log2_1p(signal / noise_plus),
            Some((&(p, set), tail)) => set
                .levels()
                .iter()
                .filter(|l| l.probability > 0.0)
                .map(|l| go(signal, noise_plus + p * l.gain, prob * l.probability, tail))
                .sum(),
        }
    }
    go(signal, noise, 1.0, interferers)
}
