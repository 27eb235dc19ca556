use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::instance::RpInstance;
use super::solver::RpSolution;
use crate::error::Result;

#[derive(Serialize)]
struct StrategyEntry {
    state: usize,
    action: usize,
    prob: f64,
}

#[derive(Serialize)]
struct Dump<'a> {
    num_states: usize,
    num_joint_actions: usize,
    action_sizes: &'a [usize],
    state_dist: &'a [f64],
    lambda_hat: &'a [f64],
    local_prob: &'a [Vec<f64>],
    objective: f64,
    feasible: bool,
    v_hat: &'a [f64],
    qos_slack: &'a [f64],
    cce_slack: &'a [f64],
    kkt_residual: f64,
    round_objectives: &'a [f64],
    theta: &'a [Vec<f64>],
    /// Non-zero strategy entries of states with positive probability.
    strategy: Vec<StrategyEntry>,
}

/// Write an instance and its solution as pretty JSON. Floats round-trip
/// exactly.
pub fn write_debug_dump(path: &Path, instance: &RpInstance, solution: &RpSolution) -> Result<()> {
    let na = instance.structure.joint.len();
    let strategy = (0..instance.structure.num_states)
        .filter(|&w| instance.state_dist[w] > 0.0)
        .flat_map(|w| {
            (0..na).filter_map(move |a| {
                let prob = solution.strategy.prob(w, a);
                (prob > 0.0).then_some(StrategyEntry { state: w, action: a, prob })
            })
        })
        .collect();
    let dump = Dump {
        num_states: instance.structure.num_states,
        num_joint_actions: na,
        action_sizes: instance.structure.joint.sizes(),
        state_dist: &instance.state_dist,
        lambda_hat: &instance.lambda_hat,
        local_prob: &instance.local_prob,
        objective: solution.objective,
        feasible: solution.feasible,
        v_hat: &solution.v_hat,
        qos_slack: &solution.qos_slack,
        cce_slack: &solution.cce_slack,
        kkt_residual: solution.kkt_residual,
        round_objectives: &solution.round_objectives,
        theta: &solution.theta,
        strategy,
    };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, &dump).map_err(std::io::Error::from)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
