//! Reverse-reachable-set influence maximization with the two-phase TIM+
//! sample schedule: estimate a lower bound on the optimal spread (KPT),
//! refine it with one greedy pass, then draw enough RR sets for the
//! `(1 - 1/e - eps)` guarantee and run greedy max coverage on them.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{bernoulli, InfluenceGraph};
use crate::error::{Error, Result};
use crate::model::MeanVector;

fn default_epsilon() -> f64 {
    0.1
}
fn default_ell() -> f64 {
    1.0
}
fn default_rr_budget() -> usize {
    1_000_000
}
fn default_kpt_constant() -> f64 {
    6.0
}
fn default_lambda_constant() -> f64 {
    8.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimParams {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_ell")]
    pub ell: f64,
    /// Cap on RR sets drawn in the final selection phase.
    #[serde(default = "default_rr_budget")]
    pub rr_budget: usize,
    /// Cap on RR sets drawn while estimating and refining KPT.
    #[serde(default = "default_rr_budget")]
    pub kpt_budget: usize,
    /// Multiplier in the KPT estimation sample size `c (l ln n + ln log2 n) 2^i`.
    #[serde(default = "default_kpt_constant")]
    pub kpt_constant: f64,
    /// Base constant in `lambda = (c + 2 eps) n (l ln n + ln C(n,k) + ln 2) / eps^2`.
    #[serde(default = "default_lambda_constant")]
    pub lambda_constant: f64,
}

impl Default for TimParams {
    fn default() -> Self {
        TimParams {
            epsilon: default_epsilon(),
            ell: default_ell(),
            rr_budget: default_rr_budget(),
            kpt_budget: default_rr_budget(),
            kpt_constant: default_kpt_constant(),
            lambda_constant: default_lambda_constant(),
        }
    }
}

impl TimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::config(format!("epsilon = {} must lie in (0,1)", self.epsilon)));
        }
        if !(self.ell >= 1.0) {
            return Err(Error::config(format!("ell = {} must be >= 1", self.ell)));
        }
        if self.rr_budget == 0 || self.kpt_budget == 0 {
            return Err(Error::config("RR-set budgets must be positive"));
        }
        Ok(())
    }

    /// Approximation ratio `1 - 1/e - eps`.
    pub fn alpha(&self) -> f64 {
        1.0 - (-1.0f64).exp() - self.epsilon
    }

    /// Success probability `1 - 3 n^-l`.
    pub fn beta(&self, n: usize) -> f64 {
        1.0 - 3.0 * (n as f64).powf(-self.ell)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrGreedyOutcome {
    /// Selected seeds, sorted ascending.
    pub seeds: Vec<usize>,
    /// RR sets drawn in the final phase.
    pub rr_sets: usize,
    /// Lower bound on the optimal spread used to size the final phase.
    pub kpt: f64,
    /// Set when a budget cap cut a phase short.
    pub budget_exhausted: bool,
}

/// Flat storage of RR sets plus a reusable BFS scratch space.
struct RrSampler<'g> {
    graph: &'g InfluenceGraph,
    probs: &'g [f64],
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<usize>,
}

impl<'g> RrSampler<'g> {
    fn new(graph: &'g InfluenceGraph, probs: &'g [f64]) -> Self {
        RrSampler {
            graph,
            probs,
            stamp: vec![0; graph.nodes()],
            epoch: 0,
            queue: Vec::new(),
        }
    }

    /// Appends one RR set to `out`; returns the number of edges entering it.
    fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut Vec<u32>) -> usize {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let root = rng.random_range(0..self.graph.nodes());
        self.stamp[root] = self.epoch;
        self.queue.clear();
        self.queue.push(root);
        let mut head = 0;
        let mut width = 0;
        while head < self.queue.len() {
            let v = self.queue[head];
            head += 1;
            out.push(v as u32);
            let ins = self.graph.in_edges(v);
            width += ins.len();
            for &e in ins {
                let u = self.graph.edges()[e].src;
                if self.stamp[u] != self.epoch && bernoulli(rng, self.probs[e]) {
                    self.stamp[u] = self.epoch;
                    self.queue.push(u);
                }
            }
        }
        width
    }
}

struct RrSets {
    offsets: Vec<usize>,
    nodes: Vec<u32>,
}

impl RrSets {
    fn draw<R: Rng + ?Sized>(sampler: &mut RrSampler<'_>, count: usize, rng: &mut R) -> Self {
        let mut offsets = Vec::with_capacity(count + 1);
        offsets.push(0);
        let mut nodes = Vec::new();
        for _ in 0..count {
            sampler.sample(rng, &mut nodes);
            offsets.push(nodes.len());
        }
        RrSets { offsets, nodes }
    }

    fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    fn set(&self, r: usize) -> &[u32] {
        &self.nodes[self.offsets[r]..self.offsets[r + 1]]
    }
}

/// Greedy maximum coverage with lazy (CELF) gain re-evaluation; picks the
/// lowest node id among equal gains, as naive greedy would. Returns the
/// seeds in selection order and the number of sets covered.
pub(crate) fn greedy_max_cover(n: usize, sets: &[&[u32]], k: usize) -> (Vec<usize>, usize) {
    let mut start = vec![0usize; n + 1];
    for s in sets {
        for &v in *s {
            start[v as usize + 1] += 1;
        }
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut member = vec![0usize; start[n]];
    for (r, s) in sets.iter().enumerate() {
        for &v in *s {
            member[fill[v as usize]] = r;
            fill[v as usize] += 1;
        }
    }

    let mut covered = vec![false; sets.len()];
    let mut heap: BinaryHeap<(usize, Reverse<usize>, usize)> =
        (0..n).map(|v| (start[v + 1] - start[v], Reverse(v), 0)).collect();
    let mut seeds = Vec::with_capacity(k);
    let mut total = 0;
    while seeds.len() < k {
        let Some((gain, Reverse(v), round)) = heap.pop() else {
            break;
        };
        if round == seeds.len() {
            seeds.push(v);
            total += gain;
            for &r in &member[start[v]..start[v + 1]] {
                covered[r] = true;
            }
        } else {
            let fresh = member[start[v]..start[v + 1]].iter().filter(|&&r| !covered[r]).count();
            heap.push((fresh, Reverse(v), seeds.len()));
        }
    }
    (seeds, total)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// TIM+ seed selection on `graph` with edge probabilities `theta`.
pub fn rr_greedy_oracle<R: Rng + ?Sized>(
    graph: &InfluenceGraph,
    theta: &MeanVector,
    k: usize,
    params: &TimParams,
    rng: &mut R,
) -> Result<RrGreedyOutcome> {
    params.validate()?;
    let n = graph.nodes();
    if k == 0 || k > n {
        return Err(Error::arg(format!("seed-set size {k} not in 1..={n}")));
    }
    if theta.len() != graph.num_edges() {
        return Err(Error::arg(format!(
            "parameter vector has {} entries, graph has {} edges",
            theta.len(),
            graph.num_edges()
        )));
    }
    let probs = theta.values();
    if probs.iter().all(|&p| p == 0.0) {
        // every seed set reaches exactly its own K nodes
        return Ok(RrGreedyOutcome {
            seeds: (0..k).collect(),
            rr_sets: 0,
            kpt: k as f64,
            budget_exhausted: false,
        });
    }
    let mut sampler = RrSampler::new(graph, probs);
    let nf = n as f64;
    let m = graph.num_edges() as f64;
    let (eps, ell) = (params.epsilon, params.ell);
    let mut exhausted = false;
    let mut kpt_left = params.kpt_budget;

    // KPT estimation
    let mut kpt_star = 1.0;
    let log2n = nf.log2();
    let mut scratch = Vec::new();
    let rounds = (log2n.floor() as i64 - 1).max(0);
    'estimate: for i in 1..=rounds {
        let want = (params.kpt_constant * (ell * nf.ln() + log2n.ln()) * 2f64.powi(i as i32)).ceil() as usize;
        let mut drawn = 0usize;
        let mut sum = 0.0;
        while drawn < want {
            if kpt_left == 0 {
                exhausted = true;
                if drawn > 0 {
                    kpt_star = (nf * sum / (2.0 * drawn as f64)).max(1.0);
                }
                break 'estimate;
            }
            kpt_left -= 1;
            scratch.clear();
            let width = sampler.sample(rng, &mut scratch) as f64;
            sum += if m > 0.0 { 1.0 - (1.0 - width / m).powi(k as i32) } else { 0.0 };
            drawn += 1;
        }
        if sum / drawn as f64 > 1.0 / 2f64.powi(i as i32) {
            kpt_star = nf * sum / (2.0 * drawn as f64);
            break;
        }
    }

    // refinement
    let eps_r = 5.0 * (ell * eps * eps / (k as f64 + ell)).cbrt();
    let lambda_r = (2.0 + eps_r) * ell * nf * nf.ln() / (eps_r * eps_r);
    let want_r = (lambda_r / kpt_star).ceil().max(1.0) as usize;
    let count_r = want_r.min(kpt_left);
    if count_r < want_r {
        exhausted = true;
    }
    let mut kpt_plus = kpt_star;
    if count_r > 0 {
        let sets = RrSets::draw(&mut sampler, count_r, rng);
        let views: Vec<&[u32]> = (0..sets.len()).map(|r| sets.set(r)).collect();
        let (_, cov) = greedy_max_cover(n, &views, k);
        let kpt_refined = cov as f64 / count_r as f64 * nf / (1.0 + eps_r);
        kpt_plus = kpt_plus.max(kpt_refined);
    }

    // selection
    let lambda = (params.lambda_constant + 2.0 * eps)
        * nf
        * (ell * nf.ln() + ln_binomial(n, k) + 2f64.ln())
        / (eps * eps);
    let want = (lambda / kpt_plus).ceil().max(1.0) as usize;
    let count = want.min(params.rr_budget);
    if count < want {
        exhausted = true;
    }
    let sets = RrSets::draw(&mut sampler, count, rng);
    let views: Vec<&[u32]> = (0..sets.len()).map(|r| sets.set(r)).collect();
    let (mut seeds, _) = greedy_max_cover(n, &views, k);
    seeds.sort_unstable();
    Ok(RrGreedyOutcome {
        seeds,
        rr_sets: count,
        kpt: kpt_plus,
        budget_exhausted: exhausted,
    })
}
