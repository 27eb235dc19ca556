//! The controller's convex program and CCE checks.
//!
//! [`solve_rp`] maximizes `sum_b lambda_b ln(1 + v_b)` over correlated
//! strategies that are exact CCEs of the pessimistic utilities and meet every
//! BS's demand. [`verify_cce`] re-checks a strategy by brute-force deviation
//! enumeration and [`epsilon_bound`] bounds how far a pessimistic CCE is from
//! a CCE of the expected utilities.

mod dump;
mod instance;
mod solver;
mod verify;

pub use dump::write_debug_dump;
pub use instance::{build_rp, product_distribution, RpInstance, StateMarginals};
pub use solver::{solve_rp, solve_rp_from, RpSolution, SolverOptions, WorkingSet};
pub use verify::{epsilon_bound, verify_cce, CceReport};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{GainLevel, GainSet};
    use crate::game::{GameModel, GameStructure, JointActionSpace, StrategyTable, UtilityTable};
    use crate::par::ExecMode;

    fn single_link() -> (GameModel, RpInstance) {
        let direct = GainSet::from_levels(vec![
            GainLevel { gain: 0.5, probability: 0.5 },
            GainLevel { gain: 2.0, probability: 0.5 },
        ])
        .unwrap();
        let g = GameModel::new(vec![1], 1, &[1.0], vec![vec![direct]], 0.1, 10, vec![0.5]).unwrap();
        let t = g.tables().unwrap();
        let m = StateMarginals { tau: vec![1.0], gains: vec![vec![vec![0.5, 0.5]]] };
        let inst = build_rp(g.states(), &m, vec![0.5], &t).unwrap();
        (g, inst)
    }

    #[test]
    fn single_player_transmits_everywhere() {
        let (g, inst) = single_link();
        let sol = solve_rp(&inst, &SolverOptions::default()).unwrap();
        assert!(sol.feasible);
        for w in 0..2 {
            assert!(sol.strategy.prob(w, 1) > 1.0 - 1e-4, "state {w}: {:?}", sol.strategy.row(w));
        }
        let v_best = 0.5 * (g.utility_v(0, 0, 1) + g.utility_v(0, 1, 1));
        let want = 0.5 * v_best.ln_1p();
        assert!((sol.objective - want).abs() < 1e-5, "{} vs {want}", sol.objective);
        let rep = verify_cce(&inst.structure, &sol.strategy, &inst.state_dist, &inst.v).unwrap();
        assert!(rep.epsilon() <= 1e-6);
    }

    #[test]
    fn single_state_single_action() {
        let joint = JointActionSpace::new(vec![1]).unwrap();
        let st = GameStructure::new(joint, vec![vec![0]]).unwrap();
        let v = vec![UtilityTable::dense(1, vec![2.0]).unwrap()];
        let ok = RpInstance::new(st.clone(), vec![1.0], vec![1.5], v.clone()).unwrap();
        let sol = solve_rp(&ok, &SolverOptions::default()).unwrap();
        assert_eq!(sol.strategy.row(0), &[1.0]);
        assert!(sol.feasible);
        let bad = RpInstance::new(st, vec![1.0], vec![2.5], v).unwrap();
        let sol = solve_rp(&bad, &SolverOptions::default()).unwrap();
        assert!(!sol.feasible);
        assert!((sol.qos_slack[0] - 0.5).abs() < 1e-9);
        let rep = verify_cce(&bad.structure, &sol.strategy, &bad.state_dist, &bad.v).unwrap();
        assert_eq!(rep.epsilon(), 0.0);
    }

    /// Two players, two actions; transmitting loudly is strictly dominant.
    fn congestion() -> RpInstance {
        let joint = JointActionSpace::new(vec![2, 2]).unwrap();
        let st = GameStructure::new(joint, vec![vec![0], vec![0]]).unwrap();
        // Actions: 0 = quiet, 1 = loud; both loud collide.
        let v0 = UtilityTable::dense(4, vec![0.0, 0.0, 3.0, 1.0]).unwrap();
        let v1 = UtilityTable::dense(4, vec![0.0, 3.0, 0.0, 1.0]).unwrap();
        RpInstance::new(st, vec![1.0], vec![0.5, 0.5], vec![v0, v1]).unwrap()
    }

    #[test]
    fn congestion_game_is_exact_cce() {
        let inst = congestion();
        let sol = solve_rp(&inst, &SolverOptions::default()).unwrap();
        let rep = verify_cce(&inst.structure, &sol.strategy, &inst.state_dist, &inst.v).unwrap();
        assert!(rep.epsilon() <= 1e-6, "{rep:?}");
        // Loud is strictly dominant, so (loud, loud) is the only CCE.
        let want = 2.0 * 0.5 * 1.0f64.ln_1p();
        assert!((sol.objective - want).abs() < 1e-4, "{}", sol.objective);
        assert!(sol.kkt_residual <= 1e-6, "{}", sol.kkt_residual);
    }

    #[test]
    fn round_objectives_non_increasing() {
        let inst = congestion();
        // Start from the quiet deviations only, so the loud ones must be
        // generated.
        let ws = WorkingSet { rows: vec![vec![vec![0]], vec![vec![0]]] };
        let opts = SolverOptions { presolve_dominance: false, ..SolverOptions::default() };
        let sol = solve_rp_from(&inst, &opts, Some(&ws)).unwrap();
        assert!(sol.round_objectives.len() >= 2, "{:?}", sol.round_objectives);
        for w in sol.round_objectives.windows(2) {
            assert!(w[1] <= w[0] + 1e-7, "{:?}", sol.round_objectives);
        }
        assert_eq!(sol.working_set.rows[0][0].len(), 2);
    }

    #[test]
    fn dominance_presolve_matches_interior_point() {
        let inst = congestion();
        let fast = solve_rp(&inst, &SolverOptions::default()).unwrap();
        let ipm = solve_rp(&inst, &SolverOptions { presolve_dominance: false, ..SolverOptions::default() }).unwrap();
        assert_eq!(fast.iterations, 0);
        assert!(ipm.iterations > 0);
        assert!((fast.objective - ipm.objective).abs() < 1e-6);
        for a in 0..4 {
            assert!((fast.strategy.prob(0, a) - ipm.strategy.prob(0, a)).abs() < 1e-4);
        }
        assert_eq!(fast.kkt_residual, 0.0);
        assert!(fast.cce_slack.iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn presolve_skips_states_disagreeing_within_a_local_state() {
        // One player, one local state over two global states whose dominant
        // actions differ; committing to either loses in the other state.
        let joint = JointActionSpace::new(vec![2]).unwrap();
        let s = GameStructure::new(joint, vec![vec![0, 0]]).unwrap();
        let v = UtilityTable::dense(2, vec![2.0, 0.0, 0.0, 1.0]).unwrap();
        let inst = RpInstance::new(s, vec![0.5, 0.5], vec![0.1], vec![v]).unwrap();
        let sol = solve_rp(&inst, &SolverOptions::default()).unwrap();
        assert!(sol.iterations > 0);
        assert!((sol.v_hat[0] - 1.5).abs() < 1e-6, "{:?}", sol.v_hat);
    }

    #[test]
    fn adversarial_strategy_violates() {
        let inst = congestion();
        let quiet = StrategyTable::point_mass(1, 4, 0);
        let rep = verify_cce(&inst.structure, &quiet, &inst.state_dist, &inst.v).unwrap();
        assert!(rep.epsilon() > 0.0);
        assert_eq!(rep.deviation_gap, vec![3.0, 3.0]);
    }

    #[test]
    fn bound_vanishes_when_u_equals_v() {
        let inst = congestion();
        let s = StrategyTable::uniform(1, 4);
        assert_eq!(epsilon_bound(&inst.structure, &s, &inst.state_dist, &inst.v, &inst.v).unwrap(), 0.0);
    }

    #[test]
    fn warm_start_reaches_same_optimum() {
        let inst = congestion();
        let opts = SolverOptions::default();
        let cold = solve_rp(&inst, &opts).unwrap();
        let warm = solve_rp_from(&inst, &opts, Some(&cold.working_set)).unwrap();
        assert!((cold.objective - warm.objective).abs() < 1e-6);
        let bad = WorkingSet { rows: vec![vec![vec![5]], vec![vec![0]]] };
        assert!(solve_rp_from(&inst, &opts, Some(&bad)).is_err());
    }

    #[test]
    fn execution_modes_bit_identical() {
        let (_, inst) = single_link();
        let seq = SolverOptions { exec: ExecMode::Sequential, ..SolverOptions::default() };
        let par = SolverOptions { exec: ExecMode::Parallel, ..SolverOptions::default() };
        let a = solve_rp(&inst, &seq).unwrap();
        let b = solve_rp(&inst, &par).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dump_round_trips_as_json() {
        let inst = congestion();
        let sol = solve_rp(&inst, &SolverOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rp.json");
        write_debug_dump(&path, &inst, &sol).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(v["num_joint_actions"], 4);
        assert_eq!(v["objective"].as_f64().unwrap(), sol.objective);
    }
}
