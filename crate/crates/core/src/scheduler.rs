//! Slot-timescale BS logic: drift-plus-penalty water-filling over the
//! recommended sub-carriers, projection onto the discrete actions, queue
//! updates and the empirical estimators the BS keeps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::controller::BsReport;
use crate::error::{invalid, Error, Result};
use crate::game::ActionSpace;

/// Interference values closer than this (mW) share one support point.
pub const INTERFERENCE_RESOLUTION_MW: f64 = 1e-15;
/// Demand reported when nothing has arrived yet (bit/s/Hz); the controller
/// needs a positive demand.
pub const LAMBDA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerParams {
    /// Lyapunov trade-off between rate and backlog.
    pub v: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub slot_duration_s: f64,
    pub subcarrier_bandwidth_hz: f64,
}

impl Default for SchedulerParams {
    fn default() -> Self {
        Self { v: 0.0, max_iters: 100, rel_tol: 1e-8, slot_duration_s: 0.1, subcarrier_bandwidth_hz: 10e6 }
    }
}

impl SchedulerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v >= 0.0) || !self.v.is_finite() {
            return Err(invalid(format!("V must be finite and non-negative, got {}", self.v)));
        }
        if self.max_iters == 0 || !(self.rel_tol > 0.0) {
            return Err(invalid("bisection needs iterations and a positive tolerance"));
        }
        if !(self.slot_duration_s > 0.0) || !(self.subcarrier_bandwidth_hz > 0.0) {
            return Err(invalid("slot duration and bandwidth must be positive"));
        }
        Ok(())
    }

    /// Mbit carried by one bit/s/Hz over one slot.
    pub fn mbit_per_se(&self) -> f64 {
        self.subcarrier_bandwidth_hz * self.slot_duration_s / 1e6
    }
}

/// Discrete distribution of aggregate interference (mW).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceDist {
    /// `(quantized key, value, probability)` sorted by key.
    points: Vec<(i64, f64, f64)>,
}

fn interference_key(value_mw: f64) -> i64 {
    (value_mw / INTERFERENCE_RESOLUTION_MW).round() as i64
}

impl InterferenceDist {
    pub fn point_mass(value_mw: f64) -> Self {
        Self { points: vec![(interference_key(value_mw), value_mw, 1.0)] }
    }

    /// `(value, probability)` pairs in increasing order of value.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().map(|&(_, v, p)| (v, p))
    }

    pub fn prob_of(&self, value_mw: f64) -> f64 {
        let k = interference_key(value_mw);
        self.points.iter().find(|e| e.0 == k).map_or(0.0, |e| e.2)
    }

    /// Mix in a new observation with weight `1 / (1 + n)`.
    fn observe(&mut self, value_mw: f64, n: u64) {
        let keep = n as f64 / (1.0 + n as f64);
        let add = 1.0 / (1.0 + n as f64);
        self.points.iter_mut().for_each(|e| e.2 *= keep);
        let k = interference_key(value_mw);
        match self.points.binary_search_by_key(&k, |e| e.0) {
            Ok(i) => self.points[i].2 += add,
            Err(i) => self.points.insert(i, (k, value_mw, add)),
        }
    }

    fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().map(|&(_, v, p)| p * f(v)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct KeyEntry {
    count: u64,
    dists: Vec<InterferenceDist>,
}

/// Empirical interference distributions per (local state, recommended
/// sub-carriers), one per (MU, sub-carrier).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceEstimate {
    num_links: usize,
    table: BTreeMap<(usize, u32), KeyEntry>,
    cold: InterferenceDist,
}

impl InterferenceEstimate {
    /// `num_links` = MUs times sub-carriers.
    pub fn new(num_links: usize) -> Self {
        Self { num_links, table: BTreeMap::new(), cold: InterferenceDist::point_mass(0.0) }
    }

    /// Distribution for `link` under the key; a point mass at zero before
    /// the first observation.
    pub fn get(&self, local_state: usize, subcarriers: u32, link: usize) -> &InterferenceDist {
        self.table.get(&(local_state, subcarriers)).map_or(&self.cold, |e| &e.dists[link])
    }

    pub fn count(&self, local_state: usize, subcarriers: u32) -> u64 {
        self.table.get(&(local_state, subcarriers)).map_or(0, |e| e.count)
    }
}

/// Fold one observation of the aggregate interference on every link into
/// the distribution of the matching key; other keys are untouched.
pub fn update_interference_estimate(
    estimate: &mut InterferenceEstimate,
    local_state: usize,
    subcarriers: u32,
    observed_mw: &[f64],
) -> Result<()> {
    if observed_mw.len() != estimate.num_links {
        return Err(Error::DimensionMismatch("one interference observation per link".into()));
    }
    if observed_mw.iter().any(|i| !(*i >= 0.0) || !i.is_finite()) {
        return Err(invalid("interference must be finite and non-negative"));
    }
    match estimate.table.get_mut(&(local_state, subcarriers)) {
        Some(e) => {
            for (d, &i) in e.dists.iter_mut().zip(observed_mw) {
                d.observe(i, e.count);
            }
            e.count += 1;
        }
        None => {
            let dists = observed_mw.iter().map(|&i| InterferenceDist::point_mass(i)).collect();
            estimate.table.insert((local_state, subcarriers), KeyEntry { count: 1, dists });
        }
    }
    Ok(())
}

/// `E[(Q + V) h / (N0 + I)]`: the marginal utility of power at zero.
pub fn bp_weight(queue_mbit: f64, v: f64, direct_gain: f64, noise_mw: f64, interference: &InterferenceDist) -> f64 {
    let w = queue_mbit + v;
    if w == 0.0 {
        return 0.0;
    }
    interference.expect(|i| w * direct_gain / (noise_mw + i))
}

/// Continuous BP solution.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFill {
    /// Power (mW) per link `mu * num_subcarriers + subcarrier`.
    pub powers: Vec<f64>,
    /// Water level; zero when nothing is worth transmitting.
    pub gamma: f64,
    /// Set when no sub-carrier was recommended.
    pub no_transmit: bool,
}

/// Inputs of one BS's per-slot problem.
pub struct BpProblem<'a> {
    pub queues_mbit: &'a [f64],
    /// Representative direct gain per link `mu * num_subcarriers + subcarrier`.
    pub direct_gains: &'a [f64],
    pub interference: Vec<&'a InterferenceDist>,
    pub num_subcarriers: usize,
    pub subcarriers: u32,
    pub noise_mw: f64,
    pub budget_mw: f64,
}

struct Candidate<'a> {
    link: usize,
    w: f64,
    h: f64,
    dist: &'a InterferenceDist,
}

impl Candidate<'_> {
    fn marginal(&self, p: f64, n0: f64) -> f64 {
        self.dist.expect(|i| self.w * self.h / (n0 + i + p * self.h))
    }

    /// Power at which the marginal utility drops to `gamma`, capped at `cap`.
    fn power_at(&self, gamma: f64, n0: f64, cap: f64, params: &SchedulerParams) -> f64 {
        if self.marginal(0.0, n0) <= gamma {
            return 0.0;
        }
        if self.marginal(cap, n0) >= gamma {
            return cap;
        }
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..params.max_iters {
            let mid = 0.5 * (lo + hi);
            let g = self.marginal(mid, n0);
            if (g - gamma).abs() <= 1e-2 * params.rel_tol * gamma {
                return mid;
            }
            if g > gamma {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Expected-SINR water-filling over the links on recommended sub-carriers.
pub fn water_fill(problem: &BpProblem, params: &SchedulerParams) -> Result<WaterFill> {
    let ns = problem.num_subcarriers;
    let nl = problem.direct_gains.len();
    if ns == 0 || !nl.is_multiple_of(ns) || problem.interference.len() != nl || problem.queues_mbit.len() * ns != nl {
        return Err(Error::DimensionMismatch("water-filling inputs".into()));
    }
    if !(problem.budget_mw > 0.0) || !(problem.noise_mw > 0.0) {
        return Err(invalid("budget and noise must be positive"));
    }
    let mut powers = vec![0.0; nl];
    if problem.subcarriers & ((1u32 << ns) - 1) == 0 {
        return Ok(WaterFill { powers, gamma: 0.0, no_transmit: true });
    }
    let n0 = problem.noise_mw;
    let cands: Vec<Candidate> = (0..nl)
        .filter(|&l| problem.subcarriers & (1 << (l % ns)) != 0)
        .map(|l| Candidate {
            link: l,
            w: problem.queues_mbit[l / ns] + params.v,
            h: problem.direct_gains[l],
            dist: problem.interference[l],
        })
        .collect();
    let wmax = cands.iter().map(|c| bp_weight(c.w, 0.0, c.h, n0, c.dist)).fold(0.0, f64::max);
    if !(wmax > 0.0) {
        return Ok(WaterFill { powers, gamma: 0.0, no_transmit: false });
    }
    let budget = problem.budget_mw;
    let total = |gamma: f64| -> f64 { cands.iter().map(|c| c.power_at(gamma, n0, budget, params)).sum() };
    // Total power falls as the water level rises; keep `hi` on the side
    // that respects the budget.
    let (mut lo, mut hi) = (0.0, wmax);
    for _ in 0..params.max_iters {
        let mid = 0.5 * (lo + hi);
        let s = total(mid);
        if s > budget {
            lo = mid;
        } else {
            hi = mid;
            if budget - s <= params.rel_tol * budget {
                break;
            }
        }
    }
    for c in &cands {
        powers[c.link] = c.power_at(hi, n0, budget, params);
    }
    Ok(WaterFill { powers, gamma: hi, no_transmit: false })
}

/// BP objective `sum (Q + V) E[ln(1 + P h / (N0 + I))]` of a power map.
pub fn bp_objective(problem: &BpProblem, params: &SchedulerParams, powers: &[f64]) -> f64 {
    let ns = problem.num_subcarriers;
    (0..powers.len())
        .filter(|&l| powers[l] > 0.0)
        .map(|l| {
            let w = problem.queues_mbit[l / ns] + params.v;
            let h = problem.direct_gains[l];
            w * problem.interference[l].expect(|i| (powers[l] * h / (problem.noise_mw + i)).ln_1p())
        })
        .sum()
}

/// Index of the action supported on `subcarriers` nearest to `powers` in
/// Euclidean distance; ties go to the lowest index.
pub fn project_to_action(powers: &[f64], space: &ActionSpace, subcarriers: u32) -> Result<usize> {
    let ns = space.num_subcarriers();
    if powers.len() != space.num_mus() * ns {
        return Err(Error::DimensionMismatch("power map length".into()));
    }
    let unit = space.unit_power_mw();
    let mut best = (usize::MAX, f64::INFINITY);
    for i in space.supported_on(subcarriers) {
        let a = space.get(i);
        let d: f64 = powers.iter().enumerate().map(|(l, &p)| (p - a.power_mw(l / ns, l % ns, unit)).powi(2)).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    if best.0 == usize::MAX {
        return Err(invalid("no action is supported on the recommended sub-carriers"));
    }
    Ok(best.0)
}

/// One queue step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueStep {
    pub next_mbit: f64,
    /// Bits actually delivered: `min(q, offered)`.
    pub served_mbit: f64,
    /// Offered service with nothing left to send.
    pub unused_mbit: f64,
}

pub fn queue_step(q_mbit: f64, served_se: f64, arrival_mbit: f64, params: &SchedulerParams) -> Result<QueueStep> {
    if !(q_mbit >= 0.0) || !(served_se >= 0.0) || !(arrival_mbit >= 0.0) {
        return Err(invalid("queue, rate and arrival must be non-negative"));
    }
    let offered = served_se * params.mbit_per_se();
    let served = offered.min(q_mbit);
    Ok(QueueStep { next_mbit: (q_mbit - served) + arrival_mbit, served_mbit: served, unused_mbit: offered - served })
}

/// `max(q - SE * bandwidth * slot, 0) + arrival`, in Mbit.
pub fn update_queue(q_mbit: f64, served_se: f64, arrival_mbit: f64, params: &SchedulerParams) -> Result<f64> {
    Ok(queue_step(q_mbit, served_se, arrival_mbit, params)?.next_mbit)
}

/// Counts behind a BS's report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalStatistics {
    /// `gain_counts[link][level]`.
    pub gain_counts: Vec<Vec<u64>>,
    pub tau_counts: Vec<u64>,
    pub arrival_sum_mbit: f64,
    pub arrival_slots: u64,
}

impl LocalStatistics {
    pub fn new(link_levels: &[usize], num_tau: usize) -> Self {
        Self {
            gain_counts: link_levels.iter().map(|&n| vec![0; n]).collect(),
            tau_counts: vec![0; num_tau],
            arrival_sum_mbit: 0.0,
            arrival_slots: 0,
        }
    }

    /// Running mean arrival rate in Mbps, if anything was observed.
    pub fn lambda_hat_mbps(&self, slot_duration_s: f64) -> Option<f64> {
        (self.arrival_slots > 0).then(|| self.arrival_sum_mbit / self.arrival_slots as f64 / slot_duration_s)
    }
}

/// Count the slot's gain levels and, when the frame had an overhead level,
/// its index; accumulate the BS's total arrival.
pub fn update_local_statistics(
    stats: &mut LocalStatistics,
    gain_levels: &[u8],
    tau_index: Option<usize>,
    arrival_mbit: f64,
) -> Result<()> {
    if gain_levels.len() != stats.gain_counts.len() {
        return Err(Error::DimensionMismatch("one gain level per direct link".into()));
    }
    if gain_levels.iter().zip(&stats.gain_counts).any(|(&l, c)| l as usize >= c.len())
        || tau_index.is_some_and(|t| t >= stats.tau_counts.len())
    {
        return Err(invalid("level index out of range"));
    }
    if !(arrival_mbit >= 0.0) {
        return Err(invalid("arrival must be non-negative"));
    }
    for (c, &l) in stats.gain_counts.iter_mut().zip(gain_levels) {
        c[l as usize] += 1;
    }
    if let Some(t) = tau_index {
        stats.tau_counts[t] += 1;
    }
    stats.arrival_sum_mbit += arrival_mbit;
    stats.arrival_slots += 1;
    Ok(())
}

fn normalize(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![1.0 / counts.len() as f64; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Normalized marginals (uniform for an empty count row) and the demand in
/// bit/s/Hz.
pub fn make_report(stats: &LocalStatistics, params: &SchedulerParams) -> BsReport {
    let lambda = stats.lambda_hat_mbps(params.slot_duration_s).unwrap_or(0.0) * 1e6 / params.subcarrier_bandwidth_hz;
    BsReport {
        gain_marginals: stats.gain_counts.iter().map(|c| normalize(c)).collect(),
        tau_marginal: normalize(&stats.tau_counts),
        lambda_hat: lambda.max(LAMBDA_FLOOR),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{enumerate_actions, PowerAction};

    const N0: f64 = 1e-8;

    #[test]
    fn weight_with_no_interference() {
        let d = InterferenceDist::point_mass(0.0);
        assert_eq!(bp_weight(2.0, 3.0, 1e-9, N0, &d), 5.0 * 1e-9 / N0);
        assert_eq!(bp_weight(0.0, 0.0, 1e-9, N0, &d), 0.0);
    }

    #[test]
    fn weight_two_point_expectation() {
        let mut d = InterferenceDist::point_mass(N0);
        d.observe(3.0 * N0, 1);
        let w = bp_weight(1.0, 0.0, 1.0, N0, &d);
        assert!((w - 0.375 / N0).abs() <= 1e-12 / N0);
    }

    fn params(v: f64) -> SchedulerParams {
        SchedulerParams { v, ..SchedulerParams::default() }
    }

    #[test]
    fn single_candidate_takes_budget() {
        let zero = InterferenceDist::point_mass(0.0);
        let p = BpProblem {
            queues_mbit: &[1.0],
            direct_gains: &[1e-9, 1e-9],
            interference: vec![&zero, &zero],
            num_subcarriers: 2,
            subcarriers: 0b01,
            noise_mw: N0,
            budget_mw: 200.0,
        };
        let wf = water_fill(&p, &params(10.0)).unwrap();
        assert!((wf.powers[0] - 200.0).abs() <= 1e-6, "{:?}", wf.powers);
        assert_eq!(wf.powers[1], 0.0);
    }

    #[test]
    fn symmetric_candidates_split_evenly() {
        let zero = InterferenceDist::point_mass(0.0);
        let p = BpProblem {
            queues_mbit: &[1.0, 1.0],
            direct_gains: &[1e-9; 4],
            interference: vec![&zero; 4],
            num_subcarriers: 2,
            subcarriers: 0b01,
            noise_mw: N0,
            budget_mw: 200.0,
        };
        let wf = water_fill(&p, &params(0.0)).unwrap();
        assert_eq!(wf.powers[0], wf.powers[2]);
        assert!((wf.powers[0] - 100.0).abs() <= 1e-5);
    }

    #[test]
    fn empty_set_means_no_transmit() {
        let zero = InterferenceDist::point_mass(0.0);
        let p = BpProblem {
            queues_mbit: &[1.0],
            direct_gains: &[1e-9, 1e-9],
            interference: vec![&zero, &zero],
            num_subcarriers: 2,
            subcarriers: 0,
            noise_mw: N0,
            budget_mw: 200.0,
        };
        let wf = water_fill(&p, &params(0.0)).unwrap();
        assert!(wf.no_transmit);
        assert!(wf.powers.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn projection_examples() {
        let space = enumerate_actions(2, 2, 100.0).unwrap();
        let a = PowerAction::from_units(2, 2, vec![1, 0, 0, 1]).unwrap();
        let i = space.index_of(&a).unwrap();
        assert_eq!(project_to_action(&[100.0, 0.0, 0.0, 100.0], &space, 0b11).unwrap(), i);

        let got = project_to_action(&[120.0, 0.0, 80.0, 0.0], &space, 0b11).unwrap();
        // Oracle: exhaustive distance comparison.
        let d = |k: usize| -> f64 {
            let a = space.get(k);
            [(0, 0, 120.0), (0, 1, 0.0), (1, 0, 80.0), (1, 1, 0.0)]
                .iter()
                .map(|&(m, s, p)| (p - a.power_mw(m, s, 100.0)).powi(2))
                .sum()
        };
        let want = (0..space.len()).min_by(|&x, &y| d(x).partial_cmp(&d(y)).unwrap()).unwrap();
        assert_eq!(got, want);
        assert_eq!(space.get(got).unit_vector(), &[1, 0, 0, 0]);

        let idle = space.index_of(&PowerAction::idle(2, 2)).unwrap();
        assert_eq!(project_to_action(&[0.0; 4], &space, 0b11).unwrap(), idle);
    }

    #[test]
    fn queue_examples() {
        let p = SchedulerParams::default();
        assert!((update_queue(2.0, 0.8, 0.9, &p).unwrap() - 2.1).abs() < 1e-12);
        assert_eq!(update_queue(0.3, 0.8, 0.0, &p).unwrap(), 0.0);
        assert_eq!(update_queue(1.5, 0.0, 0.5, &p).unwrap(), 2.0);
    }

    #[test]
    fn interference_recursion_examples() {
        let mut e = InterferenceEstimate::new(1);
        assert_eq!(e.get(0, 1, 0).prob_of(0.0), 1.0);
        update_interference_estimate(&mut e, 0, 1, &[2.0]).unwrap();
        assert_eq!(e.get(0, 1, 0).prob_of(2.0), 1.0);
        update_interference_estimate(&mut e, 0, 1, &[5.0]).unwrap();
        assert_eq!(e.get(0, 1, 0).prob_of(2.0), 0.5);
        update_interference_estimate(&mut e, 0, 1, &[2.0]).unwrap();
        assert!((e.get(0, 1, 0).prob_of(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.get(0, 1, 0).prob_of(5.0) - 1.0 / 3.0).abs() < 1e-15);
        // Other keys keep the cold start.
        assert_eq!(e.get(1, 1, 0).prob_of(0.0), 1.0);
        assert_eq!(e.count(0, 1), 3);
    }

    #[test]
    fn statistics_and_reports() {
        let p = SchedulerParams::default();
        let mut s = LocalStatistics::new(&[2, 2], 2);
        let r = make_report(&s, &p);
        assert_eq!(r.gain_marginals[0], vec![0.5, 0.5]);
        assert_eq!(r.tau_marginal, vec![0.5, 0.5]);
        assert_eq!(r.lambda_hat, LAMBDA_FLOOR);
        update_local_statistics(&mut s, &[1, 1], Some(0), 0.8).unwrap();
        update_local_statistics(&mut s, &[1, 0], Some(0), 1.0).unwrap();
        assert!((s.lambda_hat_mbps(0.1).unwrap() - 9.0).abs() < 1e-12);
        let r = make_report(&s, &p);
        assert_eq!(r.gain_marginals[0], vec![0.0, 1.0]);
        assert_eq!(r.gain_marginals[1], vec![0.5, 0.5]);
        assert_eq!(r.tau_marginal, vec![1.0, 0.0]);
        assert!((r.lambda_hat - 0.9).abs() < 1e-12);
        s.gain_counts[0] = vec![3, 1];
        assert_eq!(make_report(&s, &p).gain_marginals[0], vec![0.75, 0.25]);
    }

    proptest::proptest! {
        #[test]
        fn water_fill_spends_the_budget_on_the_mask(
            q in proptest::collection::vec(0.0f64..20.0, 2),
            h in proptest::collection::vec(1e-9f64..1e-6, 4),
            mask in 1u32..4,
            v in 0.1f64..100.0,
        ) {
            let params = SchedulerParams { v, ..SchedulerParams::default() };
            let cold = InterferenceDist::point_mass(0.0);
            let problem = BpProblem {
                queues_mbit: &q,
                direct_gains: &h,
                interference: vec![&cold; 4],
                num_subcarriers: 2,
                subcarriers: mask,
                noise_mw: N0,
                budget_mw: 316.0,
            };
            let wf = water_fill(&problem, &params).unwrap();
            let total: f64 = wf.powers.iter().sum();
            proptest::prop_assert!(wf.powers.iter().all(|&p| p >= 0.0));
            proptest::prop_assert!(total <= 316.0 * (1.0 + 1e-12));
            proptest::prop_assert!(total >= 316.0 * (1.0 - 1e-6));
            for (l, &p) in wf.powers.iter().enumerate() {
                if mask & (1 << (l % 2)) == 0 {
                    proptest::prop_assert_eq!(p, 0.0);
                }
            }
        }

        #[test]
        fn projection_is_nearest_supported_action(
            powers in proptest::collection::vec(0.0f64..2.0, 4),
            mask in 1u32..4,
        ) {
            let space = enumerate_actions(2, 2, 1.0).unwrap();
            let i = project_to_action(&powers, &space, mask).unwrap();
            let dist = |k: usize| -> f64 {
                let a = space.get(k);
                powers.iter().enumerate().map(|(l, &p)| (p - a.power_mw(l / 2, l % 2, 1.0)).powi(2)).sum()
            };
            proptest::prop_assert!(space.supported_on(mask).contains(&i));
            for k in space.supported_on(mask) {
                proptest::prop_assert!(dist(i) <= dist(k));
            }
        }

        #[test]
        fn queue_step_conserves_bits(q in 0.0f64..50.0, se in 0.0f64..20.0, a in 0.0f64..5.0) {
            let params = SchedulerParams::default();
            let step = queue_step(q, se, a, &params).unwrap();
            let offered = se * params.mbit_per_se();
            proptest::prop_assert!(step.next_mbit >= 0.0);
            proptest::prop_assert!(step.served_mbit <= q);
            proptest::prop_assert!((step.served_mbit + step.unused_mbit - offered).abs() <= 1e-12 * offered.max(1.0));
            proptest::prop_assert!((step.next_mbit - (q - step.served_mbit + a)).abs() <= 1e-12 * (q + a).max(1.0));
        }

        #[test]
        fn interference_recursion_is_frequency(obs in proptest::collection::vec(0usize..4, 1..100)) {
            let values = [0.0, 1e-9, 2.5e-9, 7e-8];
            let mut e = InterferenceEstimate::new(1);
            for &k in &obs {
                update_interference_estimate(&mut e, 2, 3, &[values[k]]).unwrap();
            }
            let d = e.get(2, 3, 0);
            let total: f64 = d.points().map(|(_, p)| p).sum();
            proptest::prop_assert!((total - 1.0).abs() < 1e-12);
            for (k, &x) in values.iter().enumerate() {
                let freq = obs.iter().filter(|&&o| o == k).count() as f64 / obs.len() as f64;
                proptest::prop_assert!((d.prob_of(x) - freq).abs() < 1e-12);
            }
        }
    }
}
