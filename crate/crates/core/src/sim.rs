//! The two-timescale loop: per frame the BSs report, the fronthaul round
//! trip sets the overhead and the controller samples mapping rules; per slot
//! the BSs water-fill over their recommended sub-carriers, the channel
//! realizes rates and the queues and estimators advance.
//!
//! The baseline runs the same slot loop over every sub-carrier with no
//! overhead and no controller. Both schemes draw channels and arrivals from
//! the same named streams, so runs with equal seeds see identical traffic
//! and fading.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::channel::{build_gain_set, db_to_linear, sample_realization, ChannelRealization, GainSet, LinkSpec, NodeId};
use crate::controller::{recommend, BsReport, Controller, MappingRuleSet, ResolvePolicy};
use crate::equilibrium::{RpInstance, RpSolution, SolverOptions};
use crate::error::{invalid, Error, Result};
use crate::fronthaul::{statistics_count, FronthaulConfig};
use crate::game::{dl_rate, GameModel};
use crate::scheduler::{
    make_report, project_to_action, queue_step, update_interference_estimate, update_local_statistics, water_fill,
    BpProblem, InterferenceEstimate, LocalStatistics, SchedulerParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sdn,
    Baseline,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Sdn => "sdn",
            Scheme::Baseline => "baseline",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sdn" => Ok(Scheme::Sdn),
            "baseline" => Ok(Scheme::Baseline),
            other => Err(Error::Config(format!("unknown scheme {other:?} (expected sdn or baseline)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub mus_per_bs: Vec<usize>,
    /// `distances_m[tx bs][global mu]`.
    pub distances_m: Vec<Vec<f64>>,
    pub num_subcarriers: usize,
    pub gain_levels: usize,
    /// Per-sub-carrier BS power `P̄_b` (mW).
    pub bs_power_mw: f64,
    pub controller_power_mw: f64,
    pub noise_mw: f64,
    pub t0: usize,
    pub tau_levels: Vec<f64>,
    /// Rate per uploaded statistical value (bit/s/Hz).
    pub r_unit: f64,
    /// Mean arrival rate per global MU (Mbps).
    pub arrival_mbps: Vec<f64>,
    pub packet_kbit: f64,
    /// Per-slot arrival cap as a multiple of the per-slot mean.
    pub arrival_cap_factor: f64,
    pub v: f64,
    /// Mean BS-to-controller SNR (dB); `-inf` disables the fronthaul.
    pub fronthaul_snr_db: f64,
    pub scheme: Scheme,
    pub num_frames: usize,
    pub warmup_fraction: f64,
    pub seed: u64,
    pub slot_duration_s: f64,
    pub subcarrier_bandwidth_hz: f64,
    pub resolve_every_frames: usize,
    pub resolve_tv: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            mus_per_bs: vec![2, 2],
            distances_m: vec![vec![10.0, 20.0, 40.0, 30.0], vec![40.0, 30.0, 10.0, 20.0]],
            num_subcarriers: 2,
            gain_levels: 2,
            bs_power_mw: 100.0,
            controller_power_mw: 10f64.powf(2.5),
            noise_mw: 10f64.powf(-8.5),
            t0: 10,
            tau_levels: vec![0.25, 0.5],
            r_unit: 0.25 * 1.05f64.log2(),
            arrival_mbps: vec![8.0, 8.0, 5.0, 5.0],
            packet_kbit: 10.0,
            arrival_cap_factor: 4.0,
            v: 50.0,
            fronthaul_snr_db: 20.0,
            scheme: Scheme::Sdn,
            num_frames: 2000,
            warmup_fraction: 0.1,
            seed: 1,
            slot_duration_s: 0.1,
            subcarrier_bandwidth_hz: 10e6,
            resolve_every_frames: 10,
            resolve_tv: 1e-3,
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Config(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let nb = self.mus_per_bs.len();
        let nm: usize = self.mus_per_bs.iter().sum();
        if nb == 0 || self.mus_per_bs.contains(&0) {
            return Err(Error::Config("need at least one BS and one MU per BS".into()));
        }
        if self.distances_m.len() != nb || self.distances_m.iter().any(|r| r.len() != nm) {
            return Err(Error::Config(format!("distances_m must be {nb} rows of {nm} distances")));
        }
        for &d in self.distances_m.iter().flatten() {
            positive("distance", d)?;
        }
        if self.num_subcarriers == 0 || self.num_subcarriers > 16 {
            return Err(Error::Config("num_subcarriers must be in 1..=16".into()));
        }
        if self.gain_levels < 2 {
            return Err(Error::Config("gain_levels must be at least 2".into()));
        }
        for (name, x) in [
            ("bs_power_mw", self.bs_power_mw),
            ("controller_power_mw", self.controller_power_mw),
            ("noise_mw", self.noise_mw),
            ("r_unit", self.r_unit),
            ("packet_kbit", self.packet_kbit),
            ("arrival_cap_factor", self.arrival_cap_factor),
            ("slot_duration_s", self.slot_duration_s),
            ("subcarrier_bandwidth_hz", self.subcarrier_bandwidth_hz),
        ] {
            positive(name, x)?;
        }
        if self.t0 == 0 || self.num_frames == 0 || self.resolve_every_frames == 0 {
            return Err(Error::Config("t0, num_frames and resolve_every_frames must be at least 1".into()));
        }
        if self.tau_levels.is_empty()
            || self.tau_levels.iter().any(|&t| !(t > 0.0) || t > self.t0 as f64)
            || self.tau_levels.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(Error::Config("tau_levels must be strictly increasing within (0, t0]".into()));
        }
        if self.arrival_mbps.len() != nm || self.arrival_mbps.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(Error::Config(format!("arrival_mbps needs {nm} non-negative rates")));
        }
        if !(self.v >= 0.0) || !self.v.is_finite() {
            return Err(Error::Config(format!("V must be non-negative, got {}", self.v)));
        }
        if self.fronthaul_snr_db.is_nan() || self.fronthaul_snr_db == f64::INFINITY {
            return Err(Error::Config("fronthaul_snr_db must be a number below +inf".into()));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::Config("warmup_fraction must lie in [0, 1)".into()));
        }
        if !(self.resolve_tv >= 0.0) {
            return Err(Error::Config("resolve_tv must be non-negative".into()));
        }
        Ok(())
    }

    pub fn scheduler_params(&self) -> SchedulerParams {
        SchedulerParams {
            v: self.v,
            slot_duration_s: self.slot_duration_s,
            subcarrier_bandwidth_hz: self.subcarrier_bandwidth_hz,
            ..SchedulerParams::default()
        }
    }

    /// Game of the configured topology with quantized Rayleigh gains.
    pub fn game_model(&self) -> Result<GameModel> {
        let gain_sets = self
            .distances_m
            .iter()
            .enumerate()
            .map(|(b, row)| {
                row.iter()
                    .enumerate()
                    .map(|(m, &d)| build_gain_set(&LinkSpec::new(NodeId::Bs(b), NodeId::Mu(m), d)?, self.gain_levels))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let unit = vec![self.bs_power_mw; self.mus_per_bs.len()];
        GameModel::new(
            self.mus_per_bs.clone(),
            self.num_subcarriers,
            &unit,
            gain_sets,
            self.noise_mw,
            self.t0,
            self.tau_levels.clone(),
        )
    }

    pub fn fronthaul(&self) -> FronthaulConfig {
        FronthaulConfig {
            r_unit: self.r_unit,
            tau_levels: self.tau_levels.clone(),
            controller_power_mw: self.controller_power_mw,
            bs_power_mw: self.bs_power_mw,
            noise_mw: self.noise_mw,
        }
    }

    /// Fading of a BS-controller link, scaled so that the mean SNR at BS
    /// power equals the configured fronthaul SNR.
    pub fn fronthaul_gain_set(&self) -> Result<GainSet> {
        GainSet::exponential(db_to_linear(self.fronthaul_snr_db) * self.noise_mw / self.bs_power_mw, self.gain_levels)
    }

    fn arrival_cap_mbit(&self, mu: usize) -> f64 {
        self.arrival_cap_factor * self.arrival_mbps[mu] * self.slot_duration_s
    }
}

/// Independent named random streams of one run.
pub struct Streams {
    pub channel: ChaCha8Rng,
    pub traffic: ChaCha8Rng,
    pub controller: ChaCha8Rng,
    pub fronthaul: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(id);
            r
        };
        Self { channel: stream(1), traffic: stream(2), controller: stream(3), fronthaul: stream(4) }
    }
}

/// Per-MU arrivals (Mbit) of one slot: a Poisson number of packets, capped.
pub fn sample_arrivals<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<Vec<f64>> {
    let packet_mbit = config.packet_kbit / 1e3;
    config
        .arrival_mbps
        .iter()
        .enumerate()
        .map(|(mu, &lambda)| {
            let mean_packets = lambda * config.slot_duration_s / packet_mbit;
            if mean_packets == 0.0 {
                return Ok(0.0);
            }
            let n = Poisson::new(mean_packets).map_err(|e| invalid(format!("arrival rate: {e}")))?.sample(rng);
            Ok((n * packet_mbit).min(config.arrival_cap_mbit(mu)))
        })
        .collect()
}

/// Index of the link from `tx_bs` to global MU `mu` in a realization.
pub fn link_index(game: &GameModel, tx_bs: usize, mu: usize) -> usize {
    tx_bs * game.total_mus() + mu
}

/// Gain sets of every (tx BS, global MU) link in realization order.
pub fn link_gain_sets(game: &GameModel) -> Vec<GainSet> {
    (0..game.num_bs())
        .flat_map(|b| (0..game.total_mus()).map(move |mu| (b, mu)))
        .map(|(b, mu)| game.gain_set(b, mu).clone())
        .collect()
}

/// Direct-link gain levels of BS `b`, ordered `mu * num_subcarriers + s`.
pub fn direct_levels(game: &GameModel, realization: &ChannelRealization, b: usize) -> Vec<u8> {
    let ns = game.num_subcarriers();
    let mut out = Vec::with_capacity(game.num_mus(b) * ns);
    for m in 0..game.num_mus(b) {
        let link = link_index(game, b, game.global_mu(b, m));
        out.extend((0..ns).map(|s| realization.level(link, s)));
    }
    out
}

/// Physical outcome of one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotOutcome {
    /// `se[b][mu * num_subcarriers + s]` in bit/s/Hz.
    pub se: Vec<Vec<f64>>,
    /// Aggregate interference (mW) on the same links.
    pub interference_mw: Vec<Vec<f64>>,
}

impl SlotOutcome {
    pub fn bs_se(&self, b: usize) -> f64 {
        self.se[b].iter().sum()
    }

    pub fn mu_se(&self, b: usize, m: usize, num_subcarriers: usize) -> f64 {
        self.se[b][m * num_subcarriers..(m + 1) * num_subcarriers].iter().sum()
    }
}

/// Realized rates and interference of the joint action `actions` (one
/// action index per BS) on the representative gains of `realization`.
pub fn realize_slot(game: &GameModel, actions: &[usize], realization: &ChannelRealization, tau: f64) -> Result<SlotOutcome> {
    let nb = game.num_bs();
    let ns = game.num_subcarriers();
    if actions.len() != nb
        || actions.iter().enumerate().any(|(b, &a)| a >= game.actions(b).len())
        || realization.num_links() != nb * game.total_mus()
        || realization.num_subcarriers() != ns
    {
        return Err(Error::DimensionMismatch("slot actions or realization".into()));
    }
    let gain = |tx: usize, mu: usize, s: usize| {
        game.gain_set(tx, mu).gain(realization.level(link_index(game, tx, mu), s) as usize)
    };
    let radiated: Vec<Vec<f64>> = (0..nb)
        .map(|b| {
            let a = game.actions(b).get(actions[b]);
            (0..ns).map(|s| a.subcarrier_units(s) as f64 * game.actions(b).unit_power_mw()).collect()
        })
        .collect();
    let mut se = Vec::with_capacity(nb);
    let mut interference_mw = Vec::with_capacity(nb);
    for b in 0..nb {
        let a = game.actions(b).get(actions[b]);
        let unit = game.actions(b).unit_power_mw();
        let mut rates = Vec::with_capacity(game.num_mus(b) * ns);
        let mut intf = Vec::with_capacity(game.num_mus(b) * ns);
        for m in 0..game.num_mus(b) {
            let mu = game.global_mu(b, m);
            for s in 0..ns {
                let i: f64 = (0..nb).filter(|&bp| bp != b).map(|bp| radiated[bp][s] * gain(bp, mu, s)).sum();
                let p = a.power_mw(m, s, unit);
                rates.push(if p > 0.0 { dl_rate(p, gain(b, mu, s), i, game.noise_mw(), tau, game.t0())? } else { 0.0 });
                intf.push(i);
            }
        }
        se.push(rates);
        interference_mw.push(intf);
    }
    Ok(SlotOutcome { se, interference_mw })
}

/// One line of the optional slot trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: usize,
    pub frame: usize,
    /// Overhead of the frame; absent when the frame got no recommendation.
    pub tau: Option<f64>,
    pub actions: Vec<usize>,
    pub rate_se: Vec<f64>,
    pub rate_mbps: Vec<f64>,
    pub queues_mbit: Vec<f64>,
}

/// Cumulative bit accounting of one MU (Mbit).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MuAccounting {
    pub arrived: f64,
    pub served: f64,
    /// Offered service beyond the backlog (the clamp in the queue update).
    pub unused: f64,
    pub final_queue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub avg_rate_mbps: Vec<f64>,
    pub avg_queue_mbit: Vec<f64>,
    /// Average queue over mean arrival rate (s); zero without traffic.
    pub delay_proxy_s: Vec<f64>,
    pub sum_rate_mbps: f64,
    pub sum_queue_mbit: f64,
    /// Largest CCE gap against the expected utilities over the strategies
    /// used; absent for the baseline.
    pub epsilon_u: Option<f64>,
    /// Controller objective averaged over recommended frames.
    pub rp_objective: Option<f64>,
    pub no_rec_frame_fraction: f64,
    pub rp_solves: usize,
    pub accounting: Vec<MuAccounting>,
    /// `max_mu Q(T) / T` at the end of the horizon (Mbit/slot).
    pub final_queue_growth: f64,
}

pub struct RunOutput {
    pub metrics: Metrics,
    /// Last controller program and its solution.
    pub last_rp: Option<(RpInstance, RpSolution)>,
}

pub fn run(config: &SimConfig) -> Result<RunOutput> {
    run_traced(config, None)
}

/// Run one simulation, streaming one JSON line per slot to `trace`.
pub fn run_traced(config: &SimConfig, mut trace: Option<&mut dyn Write>) -> Result<RunOutput> {
    config.validate()?;
    let game = config.game_model()?;
    let params = config.scheduler_params();
    params.validate()?;
    let fh = config.fronthaul();
    fh.validate()?;
    let fh_gains = config.fronthaul_gain_set()?;
    let link_sets = link_gain_sets(&game);

    let nb = game.num_bs();
    let ns = game.num_subcarriers();
    let nm = game.total_mus();
    let t0 = config.t0;
    let all_subcarriers: u32 = (1u32 << ns) - 1;
    let budget = |b: usize| game.actions(b).budget_mw();
    let states = game.states();

    let sdn = config.scheme == Scheme::Sdn;
    let mut controller = if sdn {
        let policy = ResolvePolicy { max_age_frames: config.resolve_every_frames, tv_threshold: config.resolve_tv };
        Some(Controller::new(&game, SolverOptions::default(), policy)?)
    } else {
        None
    };
    let r_u = (0..nb)
        .map(|b| fh.upload_target_rate(statistics_count(states.link_levels(b), states.num_tau())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let r_d = fh.download_target_rate(t0)?;

    let mut rng = Streams::new(config.seed);
    let mut queues = vec![0.0; nm];
    let mut accounting = vec![MuAccounting::default(); nm];
    let mut estimates: Vec<InterferenceEstimate> =
        (0..nb).map(|b| InterferenceEstimate::new(game.num_mus(b) * ns)).collect();
    let mut stats: Vec<LocalStatistics> =
        (0..nb).map(|b| LocalStatistics::new(states.link_levels(b), states.num_tau())).collect();

    let total_slots = config.num_frames * t0;
    let warmup_slots = (config.warmup_fraction * total_slots as f64).floor() as usize;
    let mut rate_acc = vec![0.0; nb];
    let mut queue_acc = vec![0.0; nb];
    let mut measured = 0usize;
    let (mut no_rec_frames, mut objective_sum, mut rec_frames) = (0usize, 0.0, 0usize);
    let mut epsilon_u: Option<f64> = None;

    for frame in 0..config.num_frames {
        // Frame start: reports, fronthaul round trip, controller.
        let (tau_index, tau, rules): (Option<usize>, f64, Option<MappingRuleSet>) = if let Some(ctrl) = controller.as_mut() {
            let draw = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
                (0..nb).map(|_| (0..ns).map(|_| fh_gains.gain(fh_gains.sample(rng) as usize)).collect()).collect()
            };
            let up = draw(&mut rng.fronthaul);
            let down = draw(&mut rng.fronthaul);
            let outcome = fh.round_trip(r_u, r_d, &up, &down)?;
            match (outcome.tau.index(), outcome.tau.slots()) {
                (Some(ti), Some(slots)) => {
                    let reports: Vec<Option<BsReport>> = stats.iter().map(|s| Some(make_report(s, &params))).collect();
                    let plan = ctrl.plan_frame(&reports, &mut rng.controller)?;
                    objective_sum += plan.objective;
                    rec_frames += 1;
                    epsilon_u = Some(epsilon_u.map_or(plan.epsilon_u, |e: f64| e.max(plan.epsilon_u)));
                    (Some(ti), slots, Some(plan.rules))
                }
                _ => {
                    no_rec_frames += 1;
                    (None, 0.0, None)
                }
            }
        } else {
            (None, 0.0, None)
        };
        let forfeited = sdn && rules.is_none();

        for slot in 0..t0 {
            let k = frame * t0 + slot;
            let realization = sample_realization(&link_sets, ns, &mut rng.channel);
            let arrivals = sample_arrivals(config, &mut rng.traffic)?;
            let levels: Vec<Vec<u8>> = (0..nb).map(|b| direct_levels(&game, &realization, b)).collect();
            let configs: Vec<usize> = (0..nb).map(|b| states.config_index(b, &levels[b])).collect();

            // Estimator keys carry the overhead level; the baseline has a
            // single one.
            let ti = tau_index.unwrap_or(0);
            let mut masks = vec![0u32; nb];
            let mut actions = vec![0usize; nb];
            for b in 0..nb {
                masks[b] = match (&controller, &rules) {
                    (None, _) => all_subcarriers,
                    (Some(_), None) => 0,
                    (Some(_), Some(r)) => {
                        let state = states.global_index_from_configs(ti, &configs);
                        recommend(Some(r), slot, state, b, &game)?.subcarrier_set()
                    }
                };
                let local = ti * states.num_configs(b) + configs[b];
                let mus: Vec<usize> = (0..game.num_mus(b)).map(|m| game.global_mu(b, m)).collect();
                let q: Vec<f64> = mus.iter().map(|&mu| queues[mu]).collect();
                let gains: Vec<f64> = mus
                    .iter()
                    .flat_map(|&mu| (0..ns).map(move |s| (mu, s)))
                    .map(|(mu, s)| game.gain_set(b, mu).gain(realization.level(link_index(&game, b, mu), s) as usize))
                    .collect();
                let problem = BpProblem {
                    queues_mbit: &q,
                    direct_gains: &gains,
                    interference: (0..gains.len()).map(|l| estimates[b].get(local, masks[b], l)).collect(),
                    num_subcarriers: ns,
                    subcarriers: masks[b],
                    noise_mw: game.noise_mw(),
                    budget_mw: budget(b),
                };
                let wf = water_fill(&problem, &params)?;
                actions[b] = project_to_action(&wf.powers, game.actions(b), masks[b])?;
            }
            let outcome = realize_slot(&game, &actions, &realization, tau)?;

            for b in 0..nb {
                let mut bs_arrival = 0.0;
                for m in 0..game.num_mus(b) {
                    let mu = game.global_mu(b, m);
                    let step = queue_step(queues[mu], outcome.mu_se(b, m, ns), arrivals[mu], &params)?;
                    queues[mu] = step.next_mbit;
                    let acc = &mut accounting[mu];
                    acc.arrived += arrivals[mu];
                    acc.served += step.served_mbit;
                    acc.unused += step.unused_mbit;
                    bs_arrival += arrivals[mu];
                }
                if !forfeited {
                    let local = ti * states.num_configs(b) + configs[b];
                    update_interference_estimate(&mut estimates[b], local, masks[b], &outcome.interference_mw[b])?;
                }
                if sdn {
                    update_local_statistics(&mut stats[b], &levels[b], tau_index, bs_arrival)?;
                }
            }

            let mbps: Vec<f64> = (0..nb).map(|b| outcome.bs_se(b) * params.mbit_per_se() / config.slot_duration_s).collect();
            if k >= warmup_slots {
                measured += 1;
                for b in 0..nb {
                    rate_acc[b] += mbps[b];
                    queue_acc[b] += (0..game.num_mus(b)).map(|m| queues[game.global_mu(b, m)]).sum::<f64>();
                }
            }
            if let Some(w) = trace.as_deref_mut() {
                let rec = SlotRecord {
                    slot: k,
                    frame,
                    tau: (!forfeited).then_some(tau),
                    actions: actions.clone(),
                    rate_se: (0..nb).map(|b| outcome.bs_se(b)).collect(),
                    rate_mbps: mbps,
                    queues_mbit: queues.clone(),
                };
                serde_json::to_writer(&mut *w, &rec).map_err(std::io::Error::from)?;
                w.write_all(b"\n")?;
            }
        }
    }
    if let Some(w) = trace {
        w.flush()?;
    }

    for (acc, &q) in accounting.iter_mut().zip(&queues) {
        acc.final_queue = q;
    }
    let n = measured.max(1) as f64;
    let avg_rate_mbps: Vec<f64> = rate_acc.iter().map(|r| r / n).collect();
    let avg_queue_mbit: Vec<f64> = queue_acc.iter().map(|q| q / n).collect();
    let delay_proxy_s = (0..nb)
        .map(|b| {
            let lambda: f64 = (0..game.num_mus(b)).map(|m| config.arrival_mbps[game.global_mu(b, m)]).sum();
            if lambda > 0.0 { avg_queue_mbit[b] / lambda } else { 0.0 }
        })
        .collect();
    let metrics = Metrics {
        sum_rate_mbps: avg_rate_mbps.iter().sum(),
        sum_queue_mbit: avg_queue_mbit.iter().sum(),
        avg_rate_mbps,
        avg_queue_mbit,
        delay_proxy_s,
        epsilon_u,
        rp_objective: (rec_frames > 0).then(|| objective_sum / rec_frames as f64),
        no_rec_frame_fraction: if sdn { no_rec_frames as f64 / config.num_frames as f64 } else { 0.0 },
        rp_solves: controller.as_ref().map_or(0, |c| c.solves()),
        accounting,
        final_queue_growth: queues.iter().fold(0.0, |m: f64, &q| m.max(q)) / total_slots as f64,
    };
    let last_rp = controller.and_then(|c| c.current().map(|(i, s)| (i.clone(), s.clone())));
    Ok(RunOutput { metrics, last_rp })
}
