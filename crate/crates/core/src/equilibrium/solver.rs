//! Primal-dual interior-point method for the controller's program with
//! deviation constraints generated on demand.
//!
//! Variables are the joint probabilities `y(w, P) = Pr(w) Pr(P | w)`, the
//! scaled deviation bounds `T_b(l) = Pr(l) theta_b(l)`, and per BS an
//! elastic slack on the QoS constraint and one on the CCE-sum constraint,
//! both under a linear penalty. Only a working set of the deviation
//! constraints `T_b(l) >= dev_b(l, a)` enters the Newton systems. After each
//! solve every deviation is checked and the most violated one per local
//! state joins the working set, until none is violated.
//!
//! The Newton step is reduced to a dense system over the working rows and
//! the bounds `T`: the per-state simplex equalities are eliminated state by
//! state, and the resulting symmetric indefinite system is solved by LU.

use serde::{Deserialize, Serialize};

use super::instance::RpInstance;
use crate::error::{Error, Result};
use crate::game::StrategyTable;
use crate::par::{self, ExecMode};

const NONE: usize = usize::MAX;
/// States per parallel work item.
const CHUNK: usize = 16;
const MAX_ESCALATIONS: usize = 4;
const REFINE_STEPS: usize = 3;
/// Interior-point iterations without a better merit before giving up.
const STALL_ITERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target for constraint violation, stationarity and QoS feasibility.
    pub tol: f64,
    /// Penalty per unit of unmet demand.
    pub qos_penalty: f64,
    /// Initial penalty per unit of CCE-sum violation; raised tenfold while
    /// the solution still needs the slack.
    pub cce_penalty: f64,
    /// Interior-point iterations per working set.
    pub max_iters: usize,
    /// Constraint generation rounds.
    pub max_rounds: usize,
    /// Return the unique CCE directly when every BS has a strictly dominant
    /// action in every local state.
    pub presolve_dominance: bool,
    pub exec: ExecMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-6, qos_penalty: 1e3, cce_penalty: 1e3, max_iters: 200, max_rounds: 100, presolve_dominance: true, exec: ExecMode::default() }
    }
}

/// Deviation actions whose constraints are kept in the Newton systems,
/// `rows[b][local]`. Passing a previous solution's set warm-starts a solve.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkingSet {
    pub rows: Vec<Vec<Vec<usize>>>,
}

impl WorkingSet {
    pub fn len(&self) -> usize {
        self.rows.iter().flatten().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpSolution {
    pub strategy: StrategyTable,
    /// `theta[b][local]`: best deviation value per unit probability of the
    /// local state; zero for local states of zero probability.
    pub theta: Vec<Vec<f64>>,
    /// `sum_b lambda_b ln(1 + v_b)` at the returned strategy.
    pub objective: f64,
    pub v_hat: Vec<f64>,
    pub feasible: bool,
    /// `max(0, lambda_b - v_b)` per BS.
    pub qos_slack: Vec<f64>,
    /// `v_b - sum_l Pr(l) theta_b(l)` per BS; negative values are CCE
    /// violations.
    pub cce_slack: Vec<f64>,
    /// Largest of the scaled stationarity residual, the primal residual and
    /// the violation of deviation constraints outside the working set.
    pub kkt_residual: f64,
    /// Penalized optimum of every constraint generation round. Adding
    /// constraints never raises it.
    pub round_objectives: Vec<f64>,
    pub iterations: usize,
    pub working_set: WorkingSet,
}

/// Fixed data of an instance plus the current working set.
struct Master<'a> {
    inst: &'a RpInstance,
    exec: ExecMode,
    nb: usize,
    na: usize,
    /// Global states of positive probability.
    states: Vec<usize>,
    p: Vec<f64>,
    /// `local[i * nb + b]`.
    local: Vec<usize>,
    /// `dev[b][a * na + joint]`: the joint action with b's part replaced by a.
    dev: Vec<Vec<u32>>,
    /// `t_of[b][l]` indexes `T`, or NONE for local states of probability 0.
    t_of: Vec<Vec<usize>>,
    t_vars: Vec<(usize, usize)>,
    /// Working rows `(b, l, a)` and their ids per `(b, l)`.
    rows: Vec<(usize, usize, usize)>,
    rows_of: Vec<Vec<Vec<usize>>>,
    chunks: Vec<(usize, usize)>,
    vmax: f64,
}

/// Primal-dual point of the master problem.
#[derive(Clone)]
struct Point {
    y: Vec<f64>,
    t: Vec<f64>,
    /// `[r_0 .. r_B, c_0 .. c_B]`: QoS then CCE-sum slacks.
    e: Vec<f64>,
    s: Vec<f64>,
    z: Vec<f64>,
    wy: Vec<f64>,
    we: Vec<f64>,
    nu: Vec<f64>,
}

struct IpmOutcome {
    point: Point,
    iterations: usize,
    objective: f64,
    primal_res: f64,
    dual_res: f64,
}

struct Residuals {
    v: Vec<f64>,
    rp: Vec<f64>,
    re: Vec<f64>,
    rdy: Vec<f64>,
    rdt: Vec<f64>,
    rde: Vec<f64>,
    objective: f64,
    grad_scale: f64,
}

impl Residuals {
    fn primal(&self) -> f64 {
        inf_norm(&self.rp).max(inf_norm(&self.re))
    }

    fn dual(&self) -> f64 {
        inf_norm(&self.rdy).max(inf_norm(&self.rdt)).max(inf_norm(&self.rde)) / self.grad_scale
    }
}

/// Reduced Newton system at one point.
struct Newton {
    d: Vec<f64>,
    dsum: Vec<f64>,
    de: Vec<f64>,
    /// Equilibration of the augmented system.
    scale: Vec<f64>,
    /// LU of the equilibrated `[M G_T; G_T^T 0]`.
    kkt: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

#[derive(Clone)]
struct Direction {
    y: Vec<f64>,
    t: Vec<f64>,
    e: Vec<f64>,
    s: Vec<f64>,
    z: Vec<f64>,
    wy: Vec<f64>,
    we: Vec<f64>,
    nu: Vec<f64>,
}

impl Direction {
    fn add(&mut self, o: &Direction) {
        let add = |x: &mut Vec<f64>, y: &[f64]| x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
        add(&mut self.y, &o.y);
        add(&mut self.t, &o.t);
        add(&mut self.e, &o.e);
        add(&mut self.s, &o.s);
        add(&mut self.z, &o.z);
        add(&mut self.wy, &o.wy);
        add(&mut self.we, &o.we);
        add(&mut self.nu, &o.nu);
    }
}

/// Right-hand side of the linearized KKT system: `-rd` for stationarity,
/// `-rp` and `-re` for the constraints, and the complementarity targets.
struct KktRhs {
    rp: Vec<f64>,
    re: Vec<f64>,
    rdy: Vec<f64>,
    rdt: Vec<f64>,
    rde: Vec<f64>,
    rsz: Vec<f64>,
    ruy: Vec<f64>,
    rue: Vec<f64>,
}

impl KktRhs {
    fn minus(&self, o: &KktRhs) -> KktRhs {
        let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect();
        KktRhs {
            rp: sub(&self.rp, &o.rp),
            re: sub(&self.re, &o.re),
            rdy: sub(&self.rdy, &o.rdy),
            rdt: sub(&self.rdt, &o.rdt),
            rde: sub(&self.rde, &o.rde),
            rsz: sub(&self.rsz, &o.rsz),
            ruy: sub(&self.ruy, &o.ruy),
            rue: sub(&self.rue, &o.rue),
        }
    }

    fn norm(&self) -> f64 {
        [&self.rp, &self.re, &self.rdy, &self.rdt, &self.rde, &self.rsz, &self.ruy, &self.rue]
            .into_iter()
            .fold(0.0, |m, v| m.max(inf_norm(v)))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest step in (0, 1] keeping `x + a dx > 0`, shortened by `frac`.
fn max_step(x: &[f64], dx: &[f64], frac: f64) -> f64 {
    let mut a = 1.0f64;
    for (xi, di) in x.iter().zip(dx) {
        if *di < 0.0 {
            a = a.min(-frac * xi / di);
        }
    }
    a
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold((0, f64::NEG_INFINITY), |m, (i, &x)| if x > m.1 { (i, x) } else { m }).0
}

impl<'a> Master<'a> {
    fn new(inst: &'a RpInstance, exec: ExecMode) -> Self {
        let st = &inst.structure;
        let j = &st.joint;
        let nb = st.num_players();
        let na = j.len();
        let states: Vec<usize> = (0..st.num_states).filter(|&w| inst.state_dist[w] > 0.0).collect();
        let p = states.iter().map(|&w| inst.state_dist[w]).collect();
        let local = states.iter().flat_map(|&w| (0..nb).map(move |b| st.local_of[b][w] as usize)).collect();
        let dev = (0..nb)
            .map(|b| {
                let mut d = Vec::with_capacity(j.size(b) * na);
                for a in 0..j.size(b) {
                    d.extend((0..na).map(|q| j.join(b, a, j.rest(q, b)) as u32));
                }
                d
            })
            .collect();
        let mut t_vars = Vec::new();
        let t_of = (0..nb)
            .map(|b| {
                (0..st.num_local[b])
                    .map(|l| {
                        if inst.local_prob[b][l] > 0.0 {
                            t_vars.push((b, l));
                            t_vars.len() - 1
                        } else {
                            NONE
                        }
                    })
                    .collect()
            })
            .collect();
        let rows_of = (0..nb).map(|b| vec![Vec::new(); st.num_local[b]]).collect();
        let n = states.len();
        let chunks = (0..n).step_by(CHUNK).map(|lo| (lo, (lo + CHUNK).min(n))).collect();
        let vmax = states
            .iter()
            .flat_map(|&w| inst.v.iter().map(move |t| inf_norm(t.row(w))))
            .fold(0.0f64, f64::max);
        Self { inst, exec, nb, na, states, p, local, dev, t_of, t_vars, rows: Vec::new(), rows_of, chunks, vmax }
    }

    fn num_states(&self) -> usize {
        self.states.len()
    }

    fn num_rows(&self) -> usize {
        self.rows.len() + 2 * self.nb
    }

    fn cce(&self, b: usize) -> usize {
        self.rows.len() + b
    }

    fn qos(&self, b: usize) -> usize {
        self.rows.len() + self.nb + b
    }

    /// Rows carrying the objective's curvature, one per BS.
    fn hess(&self, b: usize) -> usize {
        self.rows.len() + 2 * self.nb + b
    }

    fn vrow(&self, b: usize, i: usize) -> &[f64] {
        self.inst.v[b].row(self.states[i])
    }

    fn local_of(&self, i: usize, b: usize) -> usize {
        self.local[i * self.nb + b]
    }

    fn has_row(&self, b: usize, l: usize, a: usize) -> bool {
        self.rows_of[b][l].iter().any(|&k| self.rows[k].2 == a)
    }

    fn add_row(&mut self, b: usize, l: usize, a: usize) {
        if !self.has_row(b, l, a) {
            self.rows_of[b][l].push(self.rows.len());
            self.rows.push((b, l, a));
        }
    }

    /// Strictly dominant action of every BS in every reachable local state,
    /// if each has one. The CCE is then unique: each BS plays it.
    fn dominant_actions(&self) -> Option<Vec<Vec<usize>>> {
        let j = &self.inst.structure.joint;
        let mut choice: Vec<Vec<usize>> = (0..self.nb).map(|b| vec![NONE; self.rows_of[b].len()]).collect();
        for i in 0..self.num_states() {
            for (b, cb) in choice.iter_mut().enumerate() {
                let l = self.local_of(i, b);
                let vr = self.vrow(b, i);
                let value = |a: usize, r: usize| vr[j.join(b, a, r)];
                let rests = j.rest_len(b);
                // Only the best response to rest 0 can dominate.
                let cand = (0..j.size(b)).fold(0, |m, a| if value(a, 0) > value(m, 0) { a } else { m });
                let dominant =
                    (0..j.size(b)).filter(|&a| a != cand).all(|a| (0..rests).all(|r| value(cand, r) > value(a, r)));
                // Every state of the local state must share the action.
                if !dominant || (cb[l] != NONE && cb[l] != cand) {
                    return None;
                }
                cb[l] = cand;
            }
        }
        Some(choice)
    }

    /// The point putting all mass on the profile `choice`, with every bound
    /// at its best deviation.
    fn vertex(&self, choice: &[Vec<usize>]) -> IpmOutcome {
        let j = &self.inst.structure.joint;
        let na = self.na;
        let mut y = vec![0.0; self.num_states() * na];
        for i in 0..self.num_states() {
            let own: Vec<usize> = (0..self.nb).map(|b| choice[b][self.local_of(i, b)]).collect();
            y[i * na + j.encode(&own)] = self.p[i];
        }
        let devs = self.all_deviations(&y);
        let t = self.t_vars.iter().map(|&(b, l)| devs[b][l].iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))).collect();
        let g = self.apply_y(&y);
        let objective = (0..self.nb).map(|b| self.inst.lambda_hat[b] * g[self.qos(b)].ln_1p()).sum();
        let m = self.num_rows();
        let point = Point {
            wy: vec![0.0; y.len()],
            y,
            t,
            e: vec![0.0; 2 * self.nb],
            s: vec![0.0; m],
            z: vec![0.0; m],
            we: vec![0.0; 2 * self.nb],
            nu: vec![0.0; self.num_states()],
        };
        IpmOutcome { point, iterations: 0, objective, primal_res: 0.0, dual_res: 0.0 }
    }

    fn working_set(&self) -> WorkingSet {
        WorkingSet {
            rows: self
                .rows_of
                .iter()
                .map(|per_b| per_b.iter().map(|ks| ks.iter().map(|&k| self.rows[k].2).collect()).collect())
                .collect(),
        }
    }

    /// Map `f` over state chunks, results in chunk order.
    fn over_chunks<T: Send>(&self, f: impl Fn(usize, usize) -> T + Sync + Send) -> Vec<T> {
        par::map(self.exec, &self.chunks, |&(lo, hi)| f(lo, hi))
    }

    fn uniform(&self) -> Vec<f64> {
        let na = self.na;
        (0..self.num_states()).flat_map(|i| std::iter::repeat_n(self.p[i] / na as f64, na)).collect()
    }

    /// Deviation values `dev_b(l, a)` of `y` for every action, `[b][l][a]`.
    fn all_deviations(&self, y: &[f64]) -> Vec<Vec<Vec<f64>>> {
        let j = &self.inst.structure.joint;
        let na = self.na;
        let parts = self.over_chunks(|lo, hi| {
            let mut out: Vec<Vec<Vec<f64>>> =
                (0..self.nb).map(|b| vec![vec![0.0; j.size(b)]; self.rows_of[b].len()]).collect();
            for i in lo..hi {
                let yi = &y[i * na..(i + 1) * na];
                for (b, out_b) in out.iter_mut().enumerate() {
                    let vr = self.vrow(b, i);
                    let acc = &mut out_b[self.local_of(i, b)];
                    for (a, v) in acc.iter_mut().enumerate() {
                        let idx = &self.dev[b][a * na..(a + 1) * na];
                        *v += yi.iter().zip(idx).map(|(q, &k)| q * vr[k as usize]).sum::<f64>();
                    }
                }
            }
            out
        });
        let mut parts = parts.into_iter();
        let mut total = parts.next().unwrap_or_default();
        for part in parts {
            for (tb, pb) in total.iter_mut().zip(part) {
                for (tl, pl) in tb.iter_mut().zip(pb) {
                    tl.iter_mut().zip(pl).for_each(|(x, y)| *x += y);
                }
            }
        }
        total
    }

    /// `G_y Y` over the working rows, the CCE-sum and QoS rows, and the
    /// curvature rows (which share the QoS rows' coefficients).
    fn apply_y(&self, y: &[f64]) -> Vec<f64> {
        let na = self.na;
        let mt = self.num_rows() + self.nb;
        let parts = self.over_chunks(|lo, hi| {
            let mut acc = vec![0.0; mt];
            for i in lo..hi {
                let yi = &y[i * na..(i + 1) * na];
                for b in 0..self.nb {
                    let vr = self.vrow(b, i);
                    let vb = dot(yi, vr);
                    acc[self.cce(b)] += vb;
                    acc[self.qos(b)] += vb;
                    acc[self.hess(b)] += vb;
                    for &k in &self.rows_of[b][self.local_of(i, b)] {
                        let a = self.rows[k].2;
                        let idx = &self.dev[b][a * na..(a + 1) * na];
                        acc[k] -= yi.iter().zip(idx).map(|(q, &j)| q * vr[j as usize]).sum::<f64>();
                    }
                }
            }
            acc
        });
        let mut total = vec![0.0; mt];
        for part in parts {
            total.iter_mut().zip(part).for_each(|(t, x)| *t += x);
        }
        total
    }

    /// Adds the `T` and slack columns of `G` to a row vector from `apply_y`.
    fn add_te(&self, rows: &mut [f64], t: &[f64], e: &[f64]) {
        let nb = self.nb;
        for (k, &(b, l, _)) in self.rows.iter().enumerate() {
            rows[k] += t[self.t_of[b][l]];
        }
        for (v, &(b, _)) in self.t_vars.iter().enumerate() {
            rows[self.cce(b)] -= t[v];
        }
        for b in 0..nb {
            rows[self.cce(b)] += e[nb + b];
            rows[self.qos(b)] += e[b];
        }
    }

    /// `out = G_y^T c`, where `devcoef` weighs the working rows and
    /// `gcoef[b]` the rows whose coefficients are `v_b`.
    fn adjoint_y(&self, devcoef: &[f64], gcoef: &[f64], out: &mut [f64]) {
        let na = self.na;
        par::for_each_chunk_mut(self.exec, out, CHUNK * na, |c, block| {
            for (r, oi) in block.chunks_mut(na).enumerate() {
                let i = c * CHUNK + r;
                oi.iter_mut().for_each(|o| *o = 0.0);
                for b in 0..self.nb {
                    let vr = self.vrow(b, i);
                    let g = gcoef[b];
                    if g != 0.0 {
                        oi.iter_mut().zip(vr).for_each(|(o, v)| *o += g * v);
                    }
                    for &k in &self.rows_of[b][self.local_of(i, b)] {
                        let ck = devcoef[k];
                        if ck != 0.0 {
                            let a = self.rows[k].2;
                            let idx = &self.dev[b][a * na..(a + 1) * na];
                            oi.iter_mut().zip(idx).for_each(|(o, &j)| *o -= ck * vr[j as usize]);
                        }
                    }
                }
            }
        });
    }

    /// `G_T^T c` for a coefficient vector over the constraint rows.
    fn adjoint_t(&self, c: &[f64]) -> Vec<f64> {
        self.t_vars
            .iter()
            .map(|&(b, l)| self.rows_of[b][l].iter().map(|&k| c[k]).sum::<f64>() - c[self.cce(b)])
            .collect()
    }

    fn adjoint_e(&self, c: &[f64]) -> Vec<f64> {
        let nb = self.nb;
        (0..2 * nb).map(|q| if q < nb { c[self.qos(q)] } else { c[self.cce(q - nb)] }).collect()
    }

    /// Coefficients of state `i` on the rows touching it: the `v_b` rows
    /// first, then the working deviation rows. Returns the coefficient
    /// matrix and, per coefficient row, the constraint rows it feeds.
    fn state_block(&self, i: usize) -> (Vec<f64>, Vec<Vec<usize>>) {
        let na = self.na;
        let mut coef = Vec::new();
        let mut targets = Vec::new();
        for b in 0..self.nb {
            coef.extend_from_slice(self.vrow(b, i));
            targets.push(vec![self.cce(b), self.qos(b), self.hess(b)]);
        }
        for b in 0..self.nb {
            let vr = self.vrow(b, i);
            for &k in &self.rows_of[b][self.local_of(i, b)] {
                let a = self.rows[k].2;
                coef.extend(self.dev[b][a * na..(a + 1) * na].iter().map(|&j| -vr[j as usize]));
                targets.push(vec![k]);
            }
        }
        (coef, targets)
    }

    /// `M = diag + G_y P G_y^T` with the per-state projected metric
    /// `P = diag(d) - d d^T / sum(d)`.
    fn normal_matrix(&self, d: &[f64], dsum: &[f64], diag: &[f64]) -> Vec<f64> {
        let na = self.na;
        let mt = diag.len();
        let blocks = self.over_chunks(|lo, hi| {
            (lo..hi)
                .map(|i| {
                    let (coef, targets) = self.state_block(i);
                    let nr = targets.len();
                    let di = &d[i * na..(i + 1) * na];
                    // Centering each row on its d-weighted mean avoids the
                    // cancellation of the rank-one correction.
                    let mut cen = coef;
                    for r in 0..nr {
                        let row = &mut cen[r * na..(r + 1) * na];
                        let mean = dot(row, di) / dsum[i];
                        row.iter_mut().for_each(|c| *c -= mean);
                    }
                    let mut q = vec![0.0; nr * nr];
                    let mut scaled = vec![0.0; na];
                    for r in 0..nr {
                        let cr = &cen[r * na..(r + 1) * na];
                        scaled.iter_mut().zip(cr).zip(di).for_each(|((s, c), dd)| *s = c * dd);
                        for c in 0..=r {
                            let v = dot(&scaled, &cen[c * na..(c + 1) * na]);
                            q[r * nr + c] = v;
                            q[c * nr + r] = v;
                        }
                    }
                    (q, targets)
                })
                .collect::<Vec<_>>()
        });
        let mut m = vec![0.0; mt * mt];
        for (q, targets) in blocks.iter().flatten() {
            let nr = targets.len();
            for r in 0..nr {
                for c in 0..nr {
                    let v = q[r * nr + c];
                    for &ti in &targets[r] {
                        for &tj in &targets[c] {
                            m[ti * mt + tj] += v;
                        }
                    }
                }
            }
        }
        for (k, dk) in diag.iter().enumerate() {
            m[k * mt + k] += dk;
        }
        m
    }

    fn residuals(&self, pt: &Point, pen: &[f64]) -> Residuals {
        let nb = self.nb;
        let na = self.na;
        let lambda = &self.inst.lambda_hat;
        let mut g = self.apply_y(&pt.y);
        let v: Vec<f64> = (0..nb).map(|b| g[self.qos(b)]).collect();
        g.truncate(self.num_rows());
        self.add_te(&mut g, &pt.t, &pt.e);
        for b in 0..nb {
            g[self.qos(b)] -= lambda[b];
        }
        let rp: Vec<f64> = g.iter().zip(&pt.s).map(|(gi, si)| gi - si).collect();
        let re: Vec<f64> =
            (0..self.num_states()).map(|i| pt.y[i * na..(i + 1) * na].iter().sum::<f64>() - self.p[i]).collect();
        let weights: Vec<f64> = (0..nb).map(|b| lambda[b] / (1.0 + v[b])).collect();
        let gcoef: Vec<f64> = (0..nb).map(|b| weights[b] + pt.z[self.cce(b)] + pt.z[self.qos(b)]).collect();
        let mut rdy = vec![0.0; pt.y.len()];
        self.adjoint_y(&pt.z, &gcoef, &mut rdy);
        for (i, chunk) in rdy.chunks_mut(na).enumerate() {
            let wi = &pt.wy[i * na..(i + 1) * na];
            chunk.iter_mut().zip(wi).for_each(|(r, w)| *r += w - pt.nu[i]);
        }
        let rdt = self.adjoint_t(&pt.z);
        let ze = self.adjoint_e(&pt.z);
        let rde: Vec<f64> = (0..2 * nb).map(|q| ze[q] + pt.we[q] - pen[q]).collect();
        let objective = (0..nb).map(|b| lambda[b] * v[b].ln_1p()).sum::<f64>() - dot(pen, &pt.e);
        let grad_scale = 1.0 + inf_norm(&weights) * self.vmax;
        Residuals { v, rp, re, rdy, rdt, rde, objective, grad_scale }
    }

    fn factorize(&self, pt: &Point, res: &Residuals) -> Option<Newton> {
        let nb = self.nb;
        let na = self.na;
        let m = self.num_rows();
        let mt = m + nb;
        let d: Vec<f64> = pt.y.iter().zip(&pt.wy).map(|(y, w)| y / w).collect();
        let dsum: Vec<f64> = d.chunks(na).map(|c| c.iter().sum()).collect();
        let de: Vec<f64> = pt.e.iter().zip(&pt.we).map(|(e, w)| e / w).collect();
        let mut diag: Vec<f64> = pt.s.iter().zip(&pt.z).map(|(s, z)| s / z).collect();
        for b in 0..nb {
            diag.push((1.0 + res.v[b]).powi(2) / self.inst.lambda_hat[b]);
        }
        for b in 0..nb {
            diag[self.qos(b)] += de[b];
            diag[self.cce(b)] += de[nb + b];
        }
        let m_rows = self.normal_matrix(&d, &dsum, &diag);
        // [M G_T; G_T^T 0] with the M block symmetrically equilibrated.
        let nt = self.t_vars.len();
        let n = mt + nt;
        let mut scale: Vec<f64> = (0..mt).map(|k| 1.0 / m_rows[k * mt + k].sqrt()).collect();
        scale.resize(n, 0.0);
        let mut gt = Vec::new();
        for (v, &(b, l)) in self.t_vars.iter().enumerate() {
            for &k in &self.rows_of[b][l] {
                gt.push((k, mt + v, 1.0));
            }
            gt.push((self.cce(b), mt + v, -1.0));
        }
        for &(k, c, g) in &gt {
            scale[c] = scale[c].max((g * scale[k]).abs());
        }
        for v in mt..n {
            scale[v] = 1.0 / scale[v];
        }
        let mut k = nalgebra::DMatrix::zeros(n, n);
        for i in 0..mt {
            for j in 0..mt {
                k[(i, j)] = m_rows[i * mt + j] * scale[i] * scale[j];
            }
        }
        for &(r, c, g) in &gt {
            k[(r, c)] += g * scale[r] * scale[c];
            k[(c, r)] += g * scale[r] * scale[c];
        }
        if k.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(Newton { d, dsum, de, scale, kkt: k.lu() })
    }

    /// `out = P r - d re / sum d`, state by state.
    fn project(&self, d: &[f64], dsum: &[f64], r: &[f64], re: &[f64], out: &mut [f64]) {
        let na = self.na;
        for i in 0..self.num_states() {
            let span = i * na..(i + 1) * na;
            let di = &d[span.clone()];
            let shift = (dot(di, &r[span.clone()]) + re[i]) / dsum[i];
            out[span.clone()].iter_mut().zip(di).zip(&r[span]).for_each(|((o, dd), rr)| *o = dd * (rr - shift));
        }
    }

    /// Newton direction for complementarity right-hand sides `rsz` (rows),
    /// `ruy` and `rue` (bounded variables).
    /// Newton direction with iterative refinement against the unreduced
    /// linearization. None once round-off dominates, which happens close to
    /// degenerate optima.
    fn direction(&self, pt: &Point, res: &Residuals, nt: &Newton, rsz: &[f64], ruy: &[f64], rue: &[f64]) -> Option<Direction> {
        let rhs = KktRhs {
            rp: res.rp.clone(),
            re: res.re.clone(),
            rdy: res.rdy.clone(),
            rdt: res.rdt.clone(),
            rde: res.rde.clone(),
            rsz: rsz.to_vec(),
            ruy: ruy.to_vec(),
            rue: rue.to_vec(),
        };
        let rho: Vec<f64> = (0..self.nb).map(|b| self.inst.lambda_hat[b] / (1.0 + res.v[b]).powi(2)).collect();
        let mut dir = self.reduced_solve(pt, nt, &rhs);
        let mut err = rhs.minus(&self.linearized(pt, &rho, &dir));
        let mut err_norm = err.norm();
        let rhs_norm = rhs.norm();
        for _ in 0..REFINE_STEPS {
            if !(err_norm > 1e-9 * rhs_norm) {
                break;
            }
            let fix = self.reduced_solve(pt, nt, &err);
            let mut next = dir.clone();
            next.add(&fix);
            let next_err = rhs.minus(&self.linearized(pt, &rho, &next));
            let next_norm = next_err.norm();
            if !(next_norm < 0.5 * err_norm) {
                break;
            }
            (dir, err, err_norm) = (next, next_err, next_norm);
        }
        (err_norm <= 0.1 * rhs_norm && dir.y.iter().all(|v| v.is_finite())).then_some(dir)
    }

    /// The linearized KKT operator applied to `d`, in right-hand-side form.
    fn linearized(&self, pt: &Point, rho: &[f64], d: &Direction) -> KktRhs {
        let nb = self.nb;
        let na = self.na;
        let m = self.num_rows();
        let mut gd = self.apply_y(&d.y);
        let gv: Vec<f64> = (0..nb).map(|b| gd[self.qos(b)]).collect();
        gd.truncate(m);
        self.add_te(&mut gd, &d.t, &d.e);
        let rp: Vec<f64> = gd.iter().zip(&d.s).map(|(g, s)| s - g).collect();
        let re: Vec<f64> = d.y.chunks(na).map(|c| -c.iter().sum::<f64>()).collect();
        let gcoef: Vec<f64> = (0..nb).map(|b| -rho[b] * gv[b] + d.z[self.cce(b)] + d.z[self.qos(b)]).collect();
        let mut rdy = vec![0.0; d.y.len()];
        self.adjoint_y(&d.z, &gcoef, &mut rdy);
        rdy.iter_mut().enumerate().for_each(|(n, r)| *r = -(*r + d.wy[n] - d.nu[n / na]));
        let rdt = self.adjoint_t(&d.z).into_iter().map(|v| -v).collect();
        let ze = self.adjoint_e(&d.z);
        let rde = (0..2 * nb).map(|k| -(ze[k] + d.we[k])).collect();
        let rsz = (0..m).map(|k| pt.z[k] * d.s[k] + pt.s[k] * d.z[k]).collect();
        let ruy = (0..d.y.len()).map(|n| pt.wy[n] * d.y[n] + pt.y[n] * d.wy[n]).collect();
        let rue = (0..2 * nb).map(|k| pt.we[k] * d.e[k] + pt.e[k] * d.we[k]).collect();
        KktRhs { rp, re, rdy, rdt, rde, rsz, ruy, rue }
    }

    fn reduced_solve(&self, pt: &Point, nt: &Newton, res: &KktRhs) -> Direction {
        let (rsz, ruy, rue) = (&res.rsz[..], &res.ruy[..], &res.rue[..]);
        let nb = self.nb;
        let na = self.na;
        let m = self.num_rows();
        let mt = m + nb;
        let q: Vec<f64> = (0..m).map(|k| (rsz[k] - pt.z[k] * res.rp[k]) / pt.s[k]).collect();
        let gq: Vec<f64> = (0..nb).map(|b| q[self.cce(b)] + q[self.qos(b)]).collect();
        let mut r1y = vec![0.0; pt.y.len()];
        self.adjoint_y(&q, &gq, &mut r1y);
        r1y.iter_mut().enumerate().for_each(|(n, r)| *r += res.rdy[n] + ruy[n] / pt.y[n]);
        let r1t: Vec<f64> = self.adjoint_t(&q).iter().zip(&res.rdt).map(|(a, b)| a + b).collect();
        let qe = self.adjoint_e(&q);
        let r1e: Vec<f64> = (0..2 * nb).map(|k| res.rde[k] + qe[k] + rue[k] / pt.e[k]).collect();

        let mut py = vec![0.0; pt.y.len()];
        self.project(&nt.d, &nt.dsum, &r1y, &res.re, &mut py);
        let mut b0 = self.apply_y(&py);
        for b in 0..nb {
            b0[self.qos(b)] += nt.de[b] * r1e[b];
            b0[self.cce(b)] += nt.de[nb + b] * r1e[nb + b];
        }
        let mut sol: nalgebra::DVector<f64> =
            b0.iter().chain(&r1t).zip(&nt.scale).map(|(r, sc)| r * sc).collect::<Vec<_>>().into();
        if !nt.kkt.solve_mut(&mut sol) {
            sol.fill(f64::NAN);
        }
        let t: Vec<f64> = (0..mt).map(|k| sol[k] * nt.scale[k]).collect();
        let dt: Vec<f64> = (mt..sol.len()).map(|k| -sol[k] * nt.scale[k]).collect();

        let gt: Vec<f64> = (0..nb).map(|b| t[self.cce(b)] + t[self.qos(b)] + t[self.hess(b)]).collect();
        let mut rhs = vec![0.0; pt.y.len()];
        self.adjoint_y(&t, &gt, &mut rhs);
        rhs.iter_mut().zip(&r1y).for_each(|(g, r)| *g = r - *g);
        let mut dy = vec![0.0; pt.y.len()];
        self.project(&nt.d, &nt.dsum, &rhs, &res.re, &mut dy);
        let dnu: Vec<f64> = (0..self.num_states())
            .map(|i| {
                let r = i * na..(i + 1) * na;
                (dot(&nt.d[r.clone()], &rhs[r]) + res.re[i]) / nt.dsum[i]
            })
            .collect();
        let te = self.adjoint_e(&t);
        let de: Vec<f64> = (0..2 * nb).map(|k| nt.de[k] * (r1e[k] - te[k])).collect();

        // Recover (ds, dz) per row from whichever relation does not amplify
        // round-off: the reduced solution on active rows (s < z), the primal
        // rows elsewhere.
        let mut gd = self.apply_y(&dy);
        gd.truncate(m);
        self.add_te(&mut gd, &dt, &de);
        let (mut ds, mut dz) = (vec![0.0; m], vec![0.0; m]);
        for k in 0..m {
            if pt.s[k] < pt.z[k] {
                dz[k] = q[k] - t[k];
                ds[k] = (rsz[k] - pt.s[k] * dz[k]) / pt.z[k];
            } else {
                ds[k] = gd[k] + res.rp[k];
                dz[k] = (rsz[k] - pt.z[k] * ds[k]) / pt.s[k];
            }
        }
        let dwy: Vec<f64> = (0..pt.y.len()).map(|n| (ruy[n] - pt.wy[n] * dy[n]) / pt.y[n]).collect();
        let dwe: Vec<f64> = (0..2 * nb).map(|k| (rue[k] - pt.we[k] * de[k]) / pt.e[k]).collect();
        Direction { y: dy, t: dt, e: de, s: ds, z: dz, wy: dwy, we: dwe, nu: dnu }
    }

    /// Infeasible start: primal values from the uniform strategy, duals that
    /// satisfy stationarity, then a shift that balances the products.
    fn initial_point(&self, pen: &[f64]) -> Point {
        let nb = self.nb;
        let na = self.na;
        let y = self.uniform();
        let g = self.apply_y(&y);
        let mut t = vec![f64::NEG_INFINITY; self.t_vars.len()];
        for (k, &(b, l, _)) in self.rows.iter().enumerate() {
            let v = &mut t[self.t_of[b][l]];
            *v = v.max(-g[k]);
        }
        let mut e = vec![0.0; 2 * nb];
        for b in 0..nb {
            let sum_t: f64 = self.t_vars.iter().zip(&t).filter(|((bb, _), _)| *bb == b).map(|(_, v)| v).sum();
            e[b] = (self.inst.lambda_hat[b] - g[self.qos(b)]).max(0.0);
            e[nb + b] = (sum_t - g[self.cce(b)]).max(0.0);
        }
        let mut s = g;
        s.truncate(self.num_rows());
        self.add_te(&mut s, &t, &e);
        for b in 0..nb {
            s[self.qos(b)] -= self.inst.lambda_hat[b];
        }
        s.iter_mut().for_each(|v| *v = v.max(0.0));

        let mut z = vec![0.0; s.len()];
        let mut we = vec![0.0; 2 * nb];
        for b in 0..nb {
            z[self.qos(b)] = 0.5 * pen[b];
            we[b] = 0.5 * pen[b];
            z[self.cce(b)] = 0.5 * pen[nb + b];
            we[nb + b] = 0.5 * pen[nb + b];
        }
        for &(b, l) in &self.t_vars {
            let ids = &self.rows_of[b][l];
            ids.iter().for_each(|&k| z[k] = z[self.cce(b)] / ids.len() as f64);
        }
        let mut pt = Point { y, t, e, s, z, wy: vec![0.0; self.p.len() * na], we, nu: vec![0.0; self.num_states()] };
        let res = self.residuals(&pt, pen);
        let delta = 1e-2 * (1.0 + inf_norm(&res.rdy));
        for (i, r) in res.rdy.chunks(na).enumerate() {
            let nu = r.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) + delta;
            pt.nu[i] = nu;
            pt.wy[i * na..(i + 1) * na].iter_mut().zip(r).for_each(|(w, v)| *w = nu - v);
        }

        let gap = dot(&pt.s, &pt.z) + dot(&pt.y, &pt.wy) + dot(&pt.e, &pt.we);
        let primal_sum = pt.s.iter().chain(&pt.e).sum::<f64>() + 1.0;
        let dual_sum = pt.z.iter().chain(&pt.we).chain(&pt.wy).sum::<f64>() + 1.0;
        let dp = 0.5 * gap / dual_sum + 1e-2;
        let dd = 0.5 * gap / primal_sum + 1e-2;
        pt.s.iter_mut().chain(pt.e.iter_mut()).for_each(|v| *v += dp);
        pt.z.iter_mut().chain(pt.we.iter_mut()).chain(pt.wy.iter_mut()).for_each(|v| *v += dd);
        pt.nu.iter_mut().for_each(|v| *v += dd);
        pt
    }

    fn step_length(&self, pt: &Point, d: &Direction, frac: f64) -> f64 {
        [
            max_step(&pt.y, &d.y, frac),
            max_step(&pt.e, &d.e, frac),
            max_step(&pt.s, &d.s, frac),
            max_step(&pt.z, &d.z, frac),
            max_step(&pt.wy, &d.wy, frac),
            max_step(&pt.we, &d.we, frac),
        ]
        .into_iter()
        .fold(1.0, f64::min)
    }

    /// Mehrotra predictor-corrector on the current working set. Returns
    /// the best point seen by the merit `max(primal, dual, relative gap)`.
    fn ipm(&self, pen: &[f64], opts: &SolverOptions) -> IpmOutcome {
        let mut pt = self.initial_point(pen);
        let n_comp = (pt.s.len() + pt.y.len() + pt.e.len()) as f64;
        let mut iterations = 0;
        let mut res = self.residuals(&pt, pen);
        let mut best: Option<(f64, Point)> = None;
        let mut since_best = 0;
        loop {
            let gap = dot(&pt.s, &pt.z) + dot(&pt.y, &pt.wy) + dot(&pt.e, &pt.we);
            let rel_gap = gap / (1.0 + res.objective.abs());
            let (primal, dual) = (res.primal(), res.dual());
            let merit = primal.max(dual).max(rel_gap);
            if best.as_ref().is_none_or(|(m, _)| merit < *m) {
                best = Some((merit, pt.clone()));
                since_best = 0;
            } else {
                since_best += 1;
            }
            let done = primal <= 1e-3 * opts.tol && dual <= 1e-2 * opts.tol && rel_gap <= 1e-2 * opts.tol;
            if done || since_best >= STALL_ITERS || iterations >= opts.max_iters {
                break;
            }
            iterations += 1;
            let Some(nt) = self.factorize(&pt, &res) else { break };
            let mu = gap / n_comp;

            let rsz: Vec<f64> = pt.s.iter().zip(&pt.z).map(|(s, z)| -s * z).collect();
            let ruy: Vec<f64> = pt.y.iter().zip(&pt.wy).map(|(y, w)| -y * w).collect();
            let rue: Vec<f64> = pt.e.iter().zip(&pt.we).map(|(e, w)| -e * w).collect();
            let Some(aff) = self.direction(&pt, &res, &nt, &rsz, &ruy, &rue) else { break };
            let a = self.step_length(&pt, &aff, 1.0);
            let shifted = |x: &[f64], dx: &[f64], w: &[f64], dw: &[f64]| -> f64 {
                (0..x.len()).map(|k| (x[k] + a * dx[k]) * (w[k] + a * dw[k])).sum()
            };
            let gap_aff = shifted(&pt.s, &aff.s, &pt.z, &aff.z)
                + shifted(&pt.y, &aff.y, &pt.wy, &aff.wy)
                + shifted(&pt.e, &aff.e, &pt.we, &aff.we);
            let target = (gap_aff / gap).clamp(0.0, 1.0).powi(3) * mu;

            let corr = |x: &[f64], w: &[f64], dx: &[f64], dw: &[f64]| -> Vec<f64> {
                (0..x.len()).map(|k| target - x[k] * w[k] - dx[k] * dw[k]).collect()
            };
            let rsz = corr(&pt.s, &pt.z, &aff.s, &aff.z);
            let ruy = corr(&pt.y, &pt.wy, &aff.y, &aff.wy);
            let rue = corr(&pt.e, &pt.we, &aff.e, &aff.we);
            let Some(dir) = self.direction(&pt, &res, &nt, &rsz, &ruy, &rue) else { break };
            let alpha = self.step_length(&pt, &dir, (1.0 - mu).clamp(0.9, 0.995));
            if !(alpha > 1e-12) {
                break;
            }
            let upd = |x: &mut [f64], d: &[f64]| x.iter_mut().zip(d).for_each(|(xi, di)| *xi += alpha * di);
            upd(&mut pt.y, &dir.y);
            upd(&mut pt.t, &dir.t);
            upd(&mut pt.e, &dir.e);
            upd(&mut pt.s, &dir.s);
            upd(&mut pt.z, &dir.z);
            upd(&mut pt.wy, &dir.wy);
            upd(&mut pt.we, &dir.we);
            upd(&mut pt.nu, &dir.nu);
            res = self.residuals(&pt, pen);
        }
        let (_, point) = best.expect("the starting point is always recorded");
        let res = self.residuals(&point, pen);
        IpmOutcome { iterations, objective: res.objective, primal_res: res.primal(), dual_res: res.dual(), point }
    }
}

/// Solve the controller's program from scratch.
pub fn solve_rp(instance: &RpInstance, opts: &SolverOptions) -> Result<RpSolution> {
    solve_rp_from(instance, opts, None)
}

/// Solve the controller's program, seeding the deviation working set with
/// `warm` (typically the previous solution's).
pub fn solve_rp_from(instance: &RpInstance, opts: &SolverOptions, warm: Option<&WorkingSet>) -> Result<RpSolution> {
    if !(opts.tol > 0.0) || !(opts.qos_penalty > 0.0) || !(opts.cce_penalty > 0.0) {
        return Err(Error::InvalidArgument("solver tolerance and penalties must be positive".into()));
    }
    let st = &instance.structure;
    let nb = st.num_players();
    let mut master = Master::new(instance, opts.exec);
    if let Some(ws) = warm {
        let shape_ok = ws.rows.len() == nb
            && ws.rows.iter().enumerate().all(|(b, per_l)| {
                per_l.len() == st.num_local[b] && per_l.iter().flatten().all(|&a| a < st.joint.size(b))
            });
        if !shape_ok {
            return Err(Error::DimensionMismatch("warm-start working set does not match the instance".into()));
        }
        for (b, per_l) in ws.rows.iter().enumerate() {
            for (l, acts) in per_l.iter().enumerate() {
                if master.t_of[b][l] != NONE {
                    acts.iter().for_each(|&a| master.add_row(b, l, a));
                }
            }
        }
    }
    if opts.presolve_dominance {
        if let Some(choice) = master.dominant_actions() {
            for &(b, l) in &master.t_vars.clone() {
                master.add_row(b, l, choice[b][l]);
            }
            let out = master.vertex(&choice);
            let objective = out.objective;
            return Ok(summarize(&master, out, vec![objective], 0, opts));
        }
    }
    // Every bound needs a row; take the best deviation against the uniform
    // strategy.
    let devs = master.all_deviations(&master.uniform());
    for (b, l) in master.t_vars.clone() {
        if master.rows_of[b][l].is_empty() {
            master.add_row(b, l, argmax(&devs[b][l]));
        }
    }

    let mut pen: Vec<f64> = (0..2 * nb).map(|k| if k < nb { opts.qos_penalty } else { opts.cce_penalty }).collect();
    let mut round_objectives = Vec::new();
    let mut iterations = 0;
    let mut escalations = 0;
    let out = loop {
        let out = master.ipm(&pen, opts);
        iterations += out.iterations;
        // The slack is in use while it exceeds its bound multiplier.
        let needs_slack = (0..nb).any(|b| {
            let c = out.point.e[nb + b];
            c > 1e-2 * opts.tol && c > out.point.we[nb + b]
        });
        if needs_slack && escalations < MAX_ESCALATIONS {
            escalations += 1;
            pen[nb..].iter_mut().for_each(|c| *c *= 10.0);
            continue;
        }
        round_objectives.push(out.objective);
        if round_objectives.len() >= opts.max_rounds {
            break out;
        }
        let devs = master.all_deviations(&out.point.y);
        let mut added = false;
        for (v, (b, l)) in master.t_vars.clone().into_iter().enumerate() {
            let (a, best) = devs[b][l]
                .iter()
                .enumerate()
                .filter(|(a, _)| !master.has_row(b, l, *a))
                .fold((NONE, f64::NEG_INFINITY), |m, (a, &d)| if d > m.1 { (a, d) } else { m });
            if a != NONE && best - out.point.t[v] > 1e-3 * opts.tol {
                master.add_row(b, l, a);
                added = true;
            }
        }
        if !added {
            break out;
        }
    };
    Ok(summarize(&master, out, round_objectives, iterations, opts))
}

fn summarize(master: &Master, out: IpmOutcome, round_objectives: Vec<f64>, iterations: usize, opts: &SolverOptions) -> RpSolution {
    let inst = master.inst;
    let st = &inst.structure;
    let nb = master.nb;
    let na = master.na;
    let lambda = &inst.lambda_hat;

    // Conditional strategy, clamped and renormalized, and the matching
    // joint probabilities.
    let mut raw = vec![0.0; st.num_states * na];
    let mut reachable = vec![false; st.num_states];
    let mut ys = vec![0.0; master.num_states() * na];
    for (i, &w) in master.states.iter().enumerate() {
        reachable[w] = true;
        let row = &mut raw[w * na..(w + 1) * na];
        row.iter_mut().zip(&out.point.y[i * na..(i + 1) * na]).for_each(|(r, y)| *r = y.max(0.0));
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= sum);
        ys[i * na..(i + 1) * na].iter_mut().zip(row.iter()).for_each(|(o, x)| *o = x * master.p[i]);
    }
    let g = master.apply_y(&ys);
    let v_hat: Vec<f64> = (0..nb).map(|b| g[master.qos(b)]).collect();
    // States outside the support get the action maximizing the objective's
    // linearization at the solution.
    let weights: Vec<f64> = (0..nb).map(|b| lambda[b] / (1.0 + v_hat[b])).collect();
    for w in (0..st.num_states).filter(|&w| !reachable[w]) {
        let score = |q: usize| (0..nb).map(|b| weights[b] * inst.v[b].value(w, q)).sum::<f64>();
        let best = (0..na).fold(0, |m, q| if score(q) > score(m) { q } else { m });
        raw[w * na + best] = 1.0;
    }
    let strategy = StrategyTable::from_raw_clamped(na, raw);

    let devs = master.all_deviations(&ys);
    let mut theta: Vec<Vec<f64>> = (0..nb).map(|b| vec![0.0; st.num_local[b]]).collect();
    let mut best_sum = vec![0.0; nb];
    let mut outside = 0.0f64;
    for (v, &(b, l)) in master.t_vars.iter().enumerate() {
        let best = devs[b][l].iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        theta[b][l] = best / inst.local_prob[b][l];
        best_sum[b] += best;
        outside = outside.max(best - out.point.t[v]);
    }
    let cce_slack: Vec<f64> = (0..nb).map(|b| v_hat[b] - best_sum[b]).collect();
    let qos_slack: Vec<f64> = (0..nb).map(|b| (lambda[b] - v_hat[b]).max(0.0)).collect();
    let objective = (0..nb).map(|b| lambda[b] * v_hat[b].ln_1p()).sum();
    RpSolution {
        strategy,
        theta,
        objective,
        feasible: qos_slack.iter().all(|&s| s <= opts.tol),
        v_hat,
        qos_slack,
        cce_slack,
        kkt_residual: out.dual_res.max(out.primal_res).max(outside),
        round_objectives,
        iterations,
        working_set: master.working_set(),
    }
}
