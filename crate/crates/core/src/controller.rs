//! Frame-timescale controller: report aggregation, the re-solve policy,
//! mapping-rule sampling and per-BS recommendations.
//!
//! The mapping rules are indexed by the global state; the simulator reveals
//! the realized global state to [`recommend`] and acts as the correlation
//! device.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{build_rp, solve_rp_from, verify_cce, RpInstance, RpSolution, SolverOptions, StateMarginals};
use crate::error::{invalid, Error, Result};
use crate::game::{GameModel, PlayerTables, PowerAction, StateSpace, StrategyTable};

/// Statistics one BS uploads at the start of a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsReport {
    /// One distribution over gain levels per direct link, ordered
    /// `mu * num_subcarriers + subcarrier`.
    pub gain_marginals: Vec<Vec<f64>>,
    pub tau_marginal: Vec<f64>,
    /// Mean demand in bit/s/Hz.
    pub lambda_hat: f64,
}

/// Controller inputs assembled from all reports.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedReports {
    pub marginals: StateMarginals,
    pub lambda_hat: Vec<f64>,
}

/// Combine one report per BS. The overhead marginal is shared, so differing
/// reports are averaged. A missing report aborts the frame.
pub fn aggregate_reports(reports: &[Option<BsReport>]) -> Result<AggregatedReports> {
    if reports.is_empty() {
        return Err(invalid("need at least one report"));
    }
    let mut present = Vec::with_capacity(reports.len());
    for (b, r) in reports.iter().enumerate() {
        present.push(r.as_ref().ok_or(Error::MissingReport(b))?);
    }
    let nt = present[0].tau_marginal.len();
    if present.iter().any(|r| r.tau_marginal.len() != nt) {
        return Err(Error::DimensionMismatch("overhead marginals differ in length".into()));
    }
    let nb = present.len() as f64;
    let tau: Vec<f64> = (0..nt).map(|t| present.iter().map(|r| r.tau_marginal[t]).sum::<f64>() / nb).collect();
    let all_same = present.iter().all(|r| r.tau_marginal == present[0].tau_marginal);
    let tau = if all_same { present[0].tau_marginal.clone() } else { tau };
    Ok(AggregatedReports {
        marginals: StateMarginals { tau, gains: present.iter().map(|r| r.gain_marginals.clone()).collect() },
        lambda_hat: present.iter().map(|r| r.lambda_hat).collect(),
    })
}

/// Sampled joint action for every (slot in frame, global state).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingRuleSet {
    num_states: usize,
    /// Slot-major `[slot * num_states + state]`.
    rules: Vec<u32>,
}

impl MappingRuleSet {
    pub fn num_slots(&self) -> usize {
        self.rules.len() / self.num_states
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Joint action for 0-based `slot` in state `state`.
    pub fn action(&self, slot: usize, state: usize) -> usize {
        self.rules[slot * self.num_states + state] as usize
    }
}

/// Draw `t0` independent rules. Every (slot, state) consumes exactly one
/// uniform variate.
pub fn sample_mapping_rules<R: Rng + ?Sized>(strategy: &StrategyTable, t0: usize, rng: &mut R) -> Result<MappingRuleSet> {
    if t0 == 0 {
        return Err(invalid("frame length T0 must be at least 1"));
    }
    let ns = strategy.num_states();
    // Sparse cumulative rows: (joint action, running sum).
    let cdf: Vec<Vec<(u32, f64)>> = (0..ns)
        .map(|w| {
            let mut acc = 0.0;
            strategy
                .row(w)
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(a, &p)| {
                    acc += p;
                    (a as u32, acc)
                })
                .collect()
        })
        .collect();
    let mut rules = Vec::with_capacity(t0 * ns);
    for _ in 0..t0 {
        for row in &cdf {
            let u: f64 = rng.random::<f64>() * row.last().map_or(1.0, |e| e.1);
            let i = row.partition_point(|e| e.1 <= u).min(row.len() - 1);
            rules.push(row[i].0);
        }
    }
    Ok(MappingRuleSet { num_states: ns, rules })
}

/// What BS `b` is told for one slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recommendation {
    Suggested {
        suggested_action: PowerAction,
        /// Bit `s` set iff sub-carrier `s` carries power in the suggestion.
        subcarrier_set: u32,
    },
    /// The frame's recommendations never arrived.
    NoRecommendation,
}

impl Recommendation {
    /// Recommended sub-carriers; empty without a recommendation.
    pub fn subcarrier_set(&self) -> u32 {
        match self {
            Recommendation::Suggested { subcarrier_set, .. } => *subcarrier_set,
            Recommendation::NoRecommendation => 0,
        }
    }
}

/// Look up the rule of `slot` at global state `state` and project it onto
/// BS `b`.
pub fn recommend(rules: Option<&MappingRuleSet>, slot: usize, state: usize, b: usize, game: &GameModel) -> Result<Recommendation> {
    let Some(rules) = rules else { return Ok(Recommendation::NoRecommendation) };
    if slot >= rules.num_slots() || state >= rules.num_states() || b >= game.num_bs() {
        return Err(invalid(format!("no rule for slot {slot}, state {state}, BS {b}")));
    }
    let own = game.joint().component(rules.action(slot, state), b);
    let suggested_action = game.actions(b).get(own).clone();
    let subcarrier_set = suggested_action.subcarrier_mask();
    Ok(Recommendation::Suggested { suggested_action, subcarrier_set })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvePolicy {
    /// Re-solve at least every this many recommended frames.
    pub max_age_frames: usize,
    /// Re-solve when the state distribution moved this far in total
    /// variation since the last solve.
    pub tv_threshold: f64,
}

impl Default for ResolvePolicy {
    fn default() -> Self {
        Self { max_age_frames: 10, tv_threshold: 1e-3 }
    }
}

/// Result of one controller frame.
#[derive(Debug, Clone)]
pub struct FramePlan {
    pub rules: MappingRuleSet,
    /// Whether the program was solved this frame.
    pub resolved: bool,
    pub objective: f64,
    /// Realized CCE gap of the current strategy against the expected
    /// utilities.
    pub epsilon_u: f64,
}

struct Current {
    instance: RpInstance,
    solution: RpSolution,
    epsilon_u: f64,
    age: usize,
}

/// Controller state carried across frames.
pub struct Controller {
    states: StateSpace,
    tables: PlayerTables,
    t0: usize,
    solver: SolverOptions,
    policy: ResolvePolicy,
    current: Option<Current>,
    solves: usize,
}

impl Controller {
    pub fn new(game: &GameModel, solver: SolverOptions, policy: ResolvePolicy) -> Result<Self> {
        if policy.max_age_frames == 0 || !(policy.tv_threshold >= 0.0) {
            return Err(invalid("re-solve interval must be positive and the threshold non-negative"));
        }
        Ok(Self {
            states: game.states().clone(),
            tables: game.tables()?,
            t0: game.t0() as usize,
            solver,
            policy,
            current: None,
            solves: 0,
        })
    }

    pub fn tables(&self) -> &PlayerTables {
        &self.tables
    }

    pub fn solves(&self) -> usize {
        self.solves
    }

    /// Latest instance and its solution.
    pub fn current(&self) -> Option<(&RpInstance, &RpSolution)> {
        self.current.as_ref().map(|c| (&c.instance, &c.solution))
    }

    /// Aggregate the reports, re-solve if the policy asks for it and sample
    /// this frame's mapping rules.
    pub fn plan_frame<R: Rng + ?Sized>(&mut self, reports: &[Option<BsReport>], rng: &mut R) -> Result<FramePlan> {
        let agg = aggregate_reports(reports)?;
        let instance = build_rp(&self.states, &agg.marginals, agg.lambda_hat, &self.tables)?;
        let stale = match &self.current {
            None => true,
            Some(c) => {
                c.age + 1 >= self.policy.max_age_frames
                    || total_variation(&c.instance.state_dist, &instance.state_dist) > self.policy.tv_threshold
            }
        };
        let resolved = stale;
        if stale {
            let warm = self.current.as_ref().map(|c| &c.solution.working_set);
            let solution = solve_rp_from(&instance, &self.solver, warm)?;
            let epsilon_u =
                verify_cce(&instance.structure, &solution.strategy, &instance.state_dist, &self.tables.u)?.epsilon();
            self.solves += 1;
            self.current = Some(Current { instance, solution, epsilon_u, age: 0 });
        } else if let Some(c) = self.current.as_mut() {
            c.age += 1;
        }
        let c = self.current.as_ref().expect("a solution exists after the first frame");
        Ok(FramePlan {
            rules: sample_mapping_rules(&c.solution.strategy, self.t0, rng)?,
            resolved,
            objective: c.solution.objective,
            epsilon_u: c.epsilon_u,
        })
    }
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::GainSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn report(tau: Vec<f64>) -> BsReport {
        BsReport { gain_marginals: vec![vec![0.5, 0.5]], tau_marginal: tau, lambda_hat: 1.0 }
    }

    #[test]
    fn identical_tau_marginals_pass_through() {
        let r = vec![Some(report(vec![0.3, 0.7])), Some(report(vec![0.3, 0.7]))];
        assert_eq!(aggregate_reports(&r).unwrap().marginals.tau, vec![0.3, 0.7]);
    }

    #[test]
    fn differing_tau_marginals_are_averaged() {
        let r = vec![Some(report(vec![0.6, 0.4])), Some(report(vec![0.4, 0.6]))];
        let tau = aggregate_reports(&r).unwrap().marginals.tau;
        assert!((tau[0] - 0.5).abs() < 1e-15 && (tau[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn missing_report_aborts() {
        let r = vec![Some(report(vec![1.0])), None];
        assert!(matches!(aggregate_reports(&r), Err(Error::MissingReport(1))));
    }

    #[test]
    fn point_mass_rules() {
        let s = StrategyTable::point_mass(3, 4, 2);
        let rules = sample_mapping_rules(&s, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(rules.num_slots(), 5);
        for t in 0..5 {
            for w in 0..3 {
                assert_eq!(rules.action(t, w), 2);
            }
        }
    }

    #[test]
    fn uniform_rule_frequency() {
        let s = StrategyTable::uniform(1, 2);
        let rules = sample_mapping_rules(&s, 10_000, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let zeros = (0..10_000).filter(|&t| rules.action(t, 0) == 0).count() as f64 / 1e4;
        assert!((0.48..=0.52).contains(&zeros), "{zeros}");
    }

    #[test]
    fn same_seed_same_rules() {
        let s = StrategyTable::uniform(4, 3);
        let a = sample_mapping_rules(&s, 10, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = sample_mapping_rules(&s, 10, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    fn two_bs_game() -> GameModel {
        let g = GainSet::exponential(1.0, 2).unwrap();
        GameModel::new(vec![2, 2], 2, &[1.0, 1.0], vec![vec![g.clone(); 4]; 2], 0.1, 10, vec![0.25, 0.5]).unwrap()
    }

    #[test]
    fn recommendation_projection() {
        let game = two_bs_game();
        let a0 = game.actions(0).index_of(&PowerAction::idle(2, 2)).unwrap();
        let a1 = game.actions(1).index_of(&PowerAction::from_units(2, 2, vec![0, 2, 0, 0]).unwrap()).unwrap();
        let joint = game.joint().encode(&[a0, a1]);
        let s = StrategyTable::point_mass(game.states().num_global(), game.joint().len(), joint);
        let rules = sample_mapping_rules(&s, 10, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let r0 = recommend(Some(&rules), 3, 17, 0, &game).unwrap();
        let r1 = recommend(Some(&rules), 3, 17, 1, &game).unwrap();
        assert_eq!(r0.subcarrier_set(), 0);
        assert_eq!(r1.subcarrier_set(), 0b10);
        let (Recommendation::Suggested { suggested_action: p0, .. }, Recommendation::Suggested { suggested_action: p1, .. }) =
            (r0, r1)
        else {
            panic!("expected suggestions");
        };
        assert_eq!(game.joint().encode(&[game.actions(0).index_of(&p0).unwrap(), game.actions(1).index_of(&p1).unwrap()]), joint);
        assert_eq!(recommend(None, 0, 0, 0, &game).unwrap(), Recommendation::NoRecommendation);
    }

    #[test]
    fn resolve_policy_reuses_solution() {
        let game = two_bs_game();
        let mut c = Controller::new(&game, SolverOptions::default(), ResolvePolicy { max_age_frames: 3, tv_threshold: 1e-3 })
            .unwrap();
        let rep = BsReport {
            gain_marginals: vec![vec![0.5, 0.5]; 4],
            tau_marginal: vec![0.5, 0.5],
            lambda_hat: 0.5,
        };
        let reports = vec![Some(rep.clone()), Some(rep)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let resolved: Vec<bool> = (0..6).map(|_| c.plan_frame(&reports, &mut rng).unwrap().resolved).collect();
        assert_eq!(resolved, vec![true, false, false, true, false, false]);
        assert_eq!(c.solves(), 2);
    }

    proptest::proptest! {
        #[test]
        fn rules_only_use_supported_actions(
            weights in proptest::collection::vec(proptest::collection::vec(0u8..3, 4), 1..5),
            seed in 0u64..1000,
        ) {
            // Rows with zero weight everywhere fall back to action 0.
            let rows: Vec<Vec<f64>> = weights
                .iter()
                .map(|r| {
                    let t: u32 = r.iter().map(|&x| x as u32).sum();
                    if t == 0 {
                        vec![1.0, 0.0, 0.0, 0.0]
                    } else {
                        r.iter().map(|&x| x as f64 / t as f64).collect()
                    }
                })
                .collect();
            let s = StrategyTable::new(rows.len(), 4, rows.concat()).unwrap();
            let rules = sample_mapping_rules(&s, 7, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for t in 0..7 {
                for w in 0..rows.len() {
                    proptest::prop_assert!(s.prob(w, rules.action(t, w)) > 0.0);
                }
            }
        }

        #[test]
        fn aggregated_tau_stays_normalized(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let r = vec![Some(report(vec![a, 1.0 - a])), Some(report(vec![b, 1.0 - b]))];
            let tau = aggregate_reports(&r).unwrap().marginals.tau;
            proptest::prop_assert!(tau.iter().all(|&x| x >= 0.0));
            proptest::prop_assert!((tau.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
