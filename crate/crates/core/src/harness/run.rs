//! Seeded simulation loop.
//!
//! All runs of an experiment advance in lockstep, one round at a time, so
//! per-round statistics can be written out as they are produced. Each run
//! owns three random streams derived from its seed: environment, learner and
//! oracle. The streams of one run never depend on any other run.

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{instance_fingerprint, RunConfig};
use super::report::{aggregate, Aggregate, CsvSink};
use crate::env::influence::MAX_ENUMERATED_EDGES;
use crate::env::{im_spread, Instance};
use crate::error::{Error, Result};
use crate::model::{regret_step, Feedback, RegretCurve, RegretMode, SuperArm};
use crate::oracle::{binomial, rr_greedy_oracle, Oracle, TimParams, MAX_SUBSETS};
use crate::policy::{Learner, PolicyKind, PolicySpec};

const ENV_STREAM: u64 = 0;
const POLICY_STREAM: u64 = 1;
const ORACLE_STREAM: u64 = 2;
const BENCHMARK_STREAM: u64 = 3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `run` under `master`.
pub fn run_seed(master: u64, run: usize) -> u64 {
    splitmix64(splitmix64(master) ^ run as u64)
}

pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Reference value each round is measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub mode: RegretMode,
    pub optimum: SuperArm,
    /// `r(S*, mu)` in expected mode; `alpha * beta * spread` otherwise.
    pub value: f64,
    /// Monte-Carlo spread of the approximate optimum (realized mode only).
    pub spread: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

fn best_seed_set_exact(inst: &Instance, n: usize, k: usize) -> Result<(SuperArm, f64)> {
    if binomial(n, k) > MAX_SUBSETS {
        return Err(Error::config(format!("C({n},{k}) seed sets are too many for an exact optimum")));
    }
    let means = inst.means();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best: Option<(SuperArm, f64)> = None;
    loop {
        let s = SuperArm::SeedSet(idx.clone());
        let v = inst.expected_reward(&s, &means)?;
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((s, v));
        }
        // next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            break;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    best.ok_or_else(|| Error::config("empty seed-set space"))
}

/// Computes the benchmark once per experiment.
///
/// Expected mode solves the true-mean problem exactly. Realized mode picks a
/// seed set with TIM+ on the true probabilities (using `bench_params`) and
/// scales its Monte-Carlo spread by the learner oracle's `alpha * beta`.
pub fn compute_benchmark(
    inst: &Instance,
    mode: RegretMode,
    learner_oracle: &Oracle,
    bench_params: &TimParams,
    n_mc: usize,
    seed: u64,
) -> Result<Benchmark> {
    let mut rng = seeded_stream(seed, BENCHMARK_STREAM);
    let means = inst.means();
    match (mode, inst) {
        (RegretMode::Expected, Instance::Influence(i)) => {
            if i.graph.num_edges() > MAX_ENUMERATED_EDGES {
                return Err(Error::config(format!(
                    "expected regret needs exact spreads; {} edges exceed the enumeration limit {MAX_ENUMERATED_EDGES}, use realized_approx",
                    i.graph.num_edges()
                )));
            }
            let (optimum, value) = best_seed_set_exact(inst, i.graph.nodes(), i.k)?;
            Ok(Benchmark {
                mode,
                optimum,
                value,
                spread: None,
                alpha: None,
                beta: None,
            })
        }
        (RegretMode::Expected, _) => {
            let optimum = Oracle::default_for(inst).solve(inst, &means, &mut rng)?;
            let value = inst.expected_reward(&optimum, &means)?;
            Ok(Benchmark {
                mode,
                optimum,
                value,
                spread: None,
                alpha: None,
                beta: None,
            })
        }
        (RegretMode::RealizedApprox, Instance::Influence(i)) => {
            let params = match learner_oracle {
                Oracle::RrGreedy(p) => *p,
                _ => TimParams::default(),
            };
            bench_params.validate()?;
            let out = rr_greedy_oracle(&i.graph, &means, i.k, bench_params, &mut rng)?;
            let spread = im_spread(&i.graph, &out.seeds, n_mc, &mut rng)?;
            let (alpha, beta) = (params.alpha(), params.beta(i.graph.nodes()));
            Ok(Benchmark {
                mode,
                optimum: SuperArm::SeedSet(out.seeds),
                value: alpha * beta * spread,
                spread: Some(spread),
                alpha: Some(alpha),
                beta: Some(beta),
            })
        }
        (RegretMode::RealizedApprox, other) => Err(Error::config(format!(
            "realized_approx regret applies to influence graphs only, not {}",
            other.family()
        ))),
    }
}

/// Something that picks a super arm each round and learns from feedback.
pub trait Player {
    fn choose(&mut self, t: u64) -> Result<SuperArm>;
    fn observe(&mut self, fb: &Feedback) -> Result<()>;
}

/// A learner paired with an oracle.
pub struct LearnerPlayer<'a> {
    learner: Learner,
    oracle: &'a Oracle,
    inst: &'a Instance,
    policy_rng: ChaCha8Rng,
    oracle_rng: ChaCha8Rng,
}

impl<'a> LearnerPlayer<'a> {
    /// Learners that start from one observation per arm take it from
    /// `env_rng` before round 1.
    pub fn new(spec: &PolicySpec, oracle: &'a Oracle, inst: &'a Instance, seed: u64, env_rng: &mut ChaCha8Rng) -> Result<Self> {
        let mut learner = Learner::new(spec, inst.num_arms())?;
        let mut policy_rng = seeded_stream(seed, POLICY_STREAM);
        if spec.kind.observes_all_arms_first() {
            learner.update(&inst.sample_all_outcomes(env_rng), &mut policy_rng)?;
        }
        Ok(LearnerPlayer {
            learner,
            oracle,
            inst,
            policy_rng,
            oracle_rng: seeded_stream(seed, ORACLE_STREAM),
        })
    }

    pub fn learner(&self) -> &Learner {
        &self.learner
    }
}

impl Player for LearnerPlayer<'_> {
    fn choose(&mut self, t: u64) -> Result<SuperArm> {
        let theta = self.learner.parameters(t, &mut self.policy_rng)?;
        self.oracle.solve(self.inst, &theta, &mut self.oracle_rng)
    }

    fn observe(&mut self, fb: &Feedback) -> Result<()> {
        self.learner.update(fb, &mut self.policy_rng)
    }
}

/// Plays the same super arm every round.
pub struct FixedPlayer(pub SuperArm);

impl Player for FixedPlayer {
    fn choose(&mut self, _t: u64) -> Result<SuperArm> {
        Ok(self.0.clone())
    }

    fn observe(&mut self, _fb: &Feedback) -> Result<()> {
        Ok(())
    }
}

/// Receives the cumulative regret of every run after each round.
pub trait RoundSink {
    fn record(&mut self, t: u64, cumulative: &[f64]) -> Result<()>;
}

/// Keeps every curve in memory.
#[derive(Debug, Default)]
pub struct CurveCollector {
    pub curves: Vec<Vec<f64>>,
}

impl RoundSink for CurveCollector {
    fn record(&mut self, _t: u64, cumulative: &[f64]) -> Result<()> {
        if self.curves.is_empty() {
            self.curves = vec![Vec::new(); cumulative.len()];
        }
        for (c, &x) in self.curves.iter_mut().zip(cumulative) {
            c.push(x);
        }
        Ok(())
    }
}

/// Runs `players[r]` against `env_rngs[r]` for `horizon` rounds in lockstep.
/// Returns the final cumulative regret of each run.
pub fn simulate<P: Player>(
    inst: &Instance,
    bench: &Benchmark,
    horizon: u64,
    players: &mut [P],
    env_rngs: &mut [ChaCha8Rng],
    sink: &mut dyn RoundSink,
) -> Result<Vec<f64>> {
    if players.len() != env_rngs.len() {
        return Err(Error::arg("one environment stream per player is required"));
    }
    let means = inst.means();
    let mut cum = vec![0.0; players.len()];
    for t in 1..=horizon {
        for ((p, rng), c) in players.iter_mut().zip(env_rngs.iter_mut()).zip(cum.iter_mut()) {
            let s = p.choose(t)?;
            let (fb, realized) = inst.step(&s, t, rng)?;
            p.observe(&fb)?;
            let value = match bench.mode {
                RegretMode::Expected => inst.expected_reward(&s, &means)?,
                RegretMode::RealizedApprox => realized,
            };
            *c += regret_step(bench.value, value, bench.mode);
        }
        sink.record(t, &cum)?;
    }
    Ok(cum)
}

/// Instance, oracle and benchmark of a validated configuration.
pub struct Prepared {
    pub instance: Instance,
    pub oracle: Oracle,
    pub benchmark: Benchmark,
    pub seeds: Vec<u64>,
    pub config_fingerprint: String,
    pub instance_fingerprint: String,
}

/// Builds everything a run needs and rejects incompatible combinations
/// before any simulation starts.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    cfg.validate()?;
    let instance = cfg.environment.build(&cfg.base_dir)?;
    let oracle = cfg.oracle_for(&instance);
    oracle.check_compatible(&instance)?;
    if cfg.policy.kind.cascade_only() && !matches!(instance, Instance::Cascade(_)) {
        return Err(Error::config(format!(
            "{} only runs on cascading instances, not {}",
            cfg.policy.kind.name(),
            instance.family()
        )));
    }
    if cfg.policy.kind == PolicyKind::Cts && (cfg.policy.prior_a < 1.0 || cfg.policy.prior_b < 1.0) {
        return Err(Error::config("Beta prior parameters must be at least 1"));
    }
    let bench_params = cfg.benchmark_oracle.unwrap_or_default();
    let benchmark = compute_benchmark(&instance, cfg.regret_mode, &oracle, &bench_params, cfg.n_mc, cfg.master_seed)?;
    let seeds = (0..cfg.n_runs).map(|r| run_seed(cfg.master_seed, r)).collect();
    Ok(Prepared {
        instance_fingerprint: instance_fingerprint(&instance),
        config_fingerprint: cfg.fingerprint(),
        instance,
        oracle,
        benchmark,
        seeds,
    })
}

/// Runs every repetition of `cfg`, feeding `sink`; returns final regrets.
pub fn run_with_sink(cfg: &RunConfig, prep: &Prepared, sink: &mut dyn RoundSink) -> Result<Vec<f64>> {
    let mut env_rngs: Vec<ChaCha8Rng> = prep.seeds.iter().map(|&s| seeded_stream(s, ENV_STREAM)).collect();
    let mut players = prep
        .seeds
        .iter()
        .zip(env_rngs.iter_mut())
        .map(|(&s, rng)| LearnerPlayer::new(&cfg.policy, &prep.oracle, &prep.instance, s, rng))
        .collect::<Result<Vec<_>>>()?;
    simulate(&prep.instance, &prep.benchmark, cfg.horizon, &mut players, &mut env_rngs, sink)
}

/// Everything produced by one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub policy: PolicyKind,
    pub family: String,
    pub oracle: String,
    pub mode: RegretMode,
    pub horizon: u64,
    pub master_seed: u64,
    pub curves: Vec<RegretCurve>,
    pub aggregate: Aggregate,
    pub benchmark_value: f64,
    pub config_fingerprint: String,
    pub instance_fingerprint: String,
    pub per_run_stride: u64,
    pub wall_clock_secs: f64,
}

impl RunResult {
    pub fn final_mean(&self) -> f64 {
        self.aggregate.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_std(&self) -> f64 {
        self.aggregate.std.last().copied().unwrap_or(0.0)
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.curves.iter().map(|c| c.seed).collect()
    }
}

pub fn run_experiment(cfg: &RunConfig) -> Result<RunResult> {
    let start = Instant::now();
    let prep = prepare(cfg)?;
    let mut collector = CurveCollector::default();
    run_with_sink(cfg, &prep, &mut collector)?;
    let curves: Vec<RegretCurve> = collector
        .curves
        .into_iter()
        .zip(&prep.seeds)
        .map(|(c, &s)| RegretCurve::from_cumulative(s, cfg.regret_mode, c))
        .collect();
    let aggregate = aggregate(&curves)?;
    Ok(RunResult {
        policy: cfg.policy.kind,
        family: cfg.environment.family().to_string(),
        oracle: prep.oracle.name().to_string(),
        mode: cfg.regret_mode,
        horizon: cfg.horizon,
        master_seed: cfg.master_seed,
        curves,
        aggregate,
        benchmark_value: prep.benchmark.value,
        config_fingerprint: prep.config_fingerprint,
        instance_fingerprint: prep.instance_fingerprint,
        per_run_stride: cfg.per_run_stride,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

/// Streams the CSVs to `dir` while running, keeping only the current round
/// in memory, and writes the summary at the end.
pub fn run_to_dir(cfg: &RunConfig, dir: &Path) -> Result<super::report::Summary> {
    let start = Instant::now();
    let prep = prepare(cfg)?;
    let mut sink = CsvSink::create(dir, cfg.n_runs, cfg.horizon, cfg.per_run_stride)?;
    run_with_sink(cfg, &prep, &mut sink)?;
    let (mean, std) = sink.finish()?;
    let summary = super::report::Summary {
        policy: cfg.policy.kind.name().to_string(),
        family: cfg.environment.family().to_string(),
        oracle: prep.oracle.name().to_string(),
        regret_mode: cfg.regret_mode,
        horizon: cfg.horizon,
        n_runs: cfg.n_runs,
        master_seed: cfg.master_seed,
        seeds: prep.seeds.clone(),
        final_mean: mean,
        final_std: std,
        display: super::report::format_mean_std(mean, std),
        single_run: cfg.n_runs == 1,
        benchmark_value: prep.benchmark.value,
        config_fingerprint: prep.config_fingerprint.clone(),
        instance_fingerprint: prep.instance_fingerprint.clone(),
    };
    super::report::write_summary(dir, &summary, start.elapsed().as_secs_f64())?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::CascadeForm;
    use crate::harness::config::EnvSpec;

    fn blb(horizon: u64, runs: usize, kind: PolicyKind) -> RunConfig {
        RunConfig::new(
            EnvSpec::Blb {
                items: 8,
                list_len: 2,
                p: 0.2,
                gap: 0.15,
            },
            PolicySpec::new(kind),
            horizon,
            runs,
            11,
        )
    }

    #[test]
    fn run_seeds_are_distinct_and_stable() {
        let s: Vec<u64> = (0..100).map(|r| run_seed(5, r)).collect();
        let mut d = s.clone();
        d.sort_unstable();
        d.dedup();
        assert_eq!(d.len(), 100);
        assert_eq!(run_seed(5, 3), s[3]);
        assert_ne!(run_seed(6, 3), s[3]);
    }

    #[test]
    fn single_round_is_one_term() {
        let cfg = blb(1, 1, PolicyKind::Cts);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.curves, b.curves);
        assert_eq!(a.curves[0].horizon(), 1);
        assert!(a.curves[0].last() >= 0.0 && a.curves[0].last() <= 0.36);
        assert!(a.aggregate.single_run);
    }

    #[test]
    fn optimal_stub_has_zero_regret() {
        let cfg = blb(50, 2, PolicyKind::Cts);
        let prep = prepare(&cfg).unwrap();
        assert!((prep.benchmark.value - 0.36).abs() < 1e-12);
        let mut players = vec![FixedPlayer(prep.benchmark.optimum.clone()), FixedPlayer(prep.benchmark.optimum.clone())];
        let mut rngs = vec![seeded_stream(1, 0), seeded_stream(2, 0)];
        let mut col = CurveCollector::default();
        let fin = simulate(&prep.instance, &prep.benchmark, 50, &mut players, &mut rngs, &mut col).unwrap();
        assert_eq!(fin, vec![0.0, 0.0]);
        assert!(col.curves.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn incompatible_setups_fail_before_running() {
        let mut cfg = blb(10, 1, PolicyKind::Cts);
        cfg.regret_mode = RegretMode::RealizedApprox;
        assert!(matches!(prepare(&cfg), Err(Error::Config(_))));

        let mut cfg = blb(10, 1, PolicyKind::Cts);
        cfg.oracle = Some(Oracle::ReliablePath);
        assert!(matches!(prepare(&cfg), Err(Error::Config(_))));

        let cfg = RunConfig::new(
            EnvSpec::RandomPmc {
                items: 5,
                users: 3,
                k: 2,
                p_star: 0.1,
                max_attraction: 0.2,
                seed: 0,
            },
            PolicySpec::new(PolicyKind::TsCascade),
            10,
            1,
            0,
        );
        assert!(matches!(prepare(&cfg), Err(Error::Config(_))));

        let cfg = RunConfig::new(
            EnvSpec::SyntheticGraph {
                nodes: 50,
                edges: 100,
                k: 2,
                seed: 0,
            },
            PolicySpec::new(PolicyKind::Cts),
            10,
            1,
            0,
        );
        assert!(matches!(prepare(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn every_policy_runs_on_a_cascade() {
        for kind in PolicyKind::ALL {
            let cfg = RunConfig::new(
                EnvSpec::RandomCascade {
                    items: 6,
                    users: 2,
                    list_len: 2,
                    form: CascadeForm::Conjunctive,
                    seed: 1,
                },
                PolicySpec::new(kind),
                200,
                2,
                3,
            );
            let r = run_experiment(&cfg).unwrap();
            assert_eq!(r.aggregate.mean.len(), 200);
            // expected-mode regret never decreases
            for c in &r.curves {
                assert!(c.cumulative().windows(2).all(|w| w[1] >= w[0] - 1e-12), "{kind:?}");
            }
        }
    }

    #[test]
    fn tiny_graph_expected_mode() {
        let cfg = RunConfig::new(
            EnvSpec::Graph {
                nodes: 4,
                edges: vec![(0, 1, 0.5), (1, 2, 0.5), (3, 2, 0.9)],
                k: 1,
            },
            PolicySpec::new(PolicyKind::Cts),
            20,
            1,
            0,
        );
        let prep = prepare(&cfg).unwrap();
        // spreads: {0}: 1.75, {1}: 1.5, {3}: 1.9
        assert_eq!(prep.benchmark.optimum, SuperArm::SeedSet(vec![3]));
        assert!((prep.benchmark.value - 1.9).abs() < 1e-12);
        let r = run_experiment(&cfg).unwrap();
        assert!(r.curves[0].last() >= 0.0);
    }
}
