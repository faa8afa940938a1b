//! Brute-force reference computations used to check the fast paths.
//!
//! Everything here enumerates the whole space it reasons about and shares no
//! code with the oracles or reward evaluators it is compared against. Sizes
//! are meant for tiny instances only.

use crate::env::{InfluenceGraph, PmcInstance, RoutingInstance};

/// All ordered `k`-tuples of distinct values in `0..v`.
pub fn ordered_tuples(v: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(v: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..v {
            if !cur.contains(&i) {
                cur.push(i);
                rec(v, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(v, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// All `k`-subsets of `0..v` in lexicographic order.
pub fn subsets(v: usize, k: usize) -> Vec<Vec<usize>> {
    ordered_tuples(v, k)
        .into_iter()
        .filter(|t| t.windows(2).all(|w| w[0] < w[1]))
        .collect()
}

/// Single-user disjunctive click probability of an ordered list.
pub fn disjunctive_list_value(probs: &[f64], list: &[usize]) -> f64 {
    let mut none = 1.0;
    for &i in list {
        none *= 1.0 - probs[i];
    }
    1.0 - none
}

/// Single-user conjunctive success probability of an ordered list.
pub fn conjunctive_list_value(probs: &[f64], list: &[usize]) -> f64 {
    let mut all = 1.0;
    for &i in list {
        all *= probs[i];
    }
    all
}

/// Word-of-mouth coverage value of `subset`, written out pair by pair.
/// `theta[j * V + i]` is the attraction of item `i` for user `j`.
pub fn pmc_value(inst: &PmcInstance, theta: &[f64], subset: &[usize]) -> f64 {
    let v = inst.items();
    let mut total = 0.0;
    for j in 0..inst.users() {
        let mut nobody = 1.0;
        for i in 0..v {
            let inspect = if subset.contains(&i) { 1.0 } else { inst.p_star() };
            nobody *= 1.0 - inspect * theta[j * v + i];
        }
        total += 1.0 - nobody;
    }
    total
}

/// Best size-`K` subset by evaluating every subset; first maximum in
/// lexicographic order. Returns the subset and its value.
pub fn pmc_brute_force(inst: &PmcInstance, theta: &[f64]) -> (Vec<usize>, f64) {
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for s in subsets(inst.items(), inst.k()) {
        let val = pmc_value(inst, theta, &s);
        if val > best.1 {
            best = (s, val);
        }
    }
    best
}

/// Every simple source-to-destination path, as link-id sequences.
pub fn simple_paths(inst: &RoutingInstance) -> Vec<Vec<usize>> {
    fn rec(
        inst: &RoutingInstance,
        at: usize,
        seen: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if at == inst.destination() {
            out.push(cur.clone());
            return;
        }
        for (e, &(a, b)) in inst.links().iter().enumerate() {
            if a == at && !seen[b] {
                seen[b] = true;
                cur.push(e);
                rec(inst, b, seen, cur, out);
                cur.pop();
                seen[b] = false;
            }
        }
    }
    let mut seen = vec![false; inst.nodes()];
    seen[inst.source()] = true;
    let mut out = Vec::new();
    rec(inst, inst.source(), &mut seen, &mut Vec::new(), &mut out);
    out
}

/// Maximum path reliability over all simple paths.
pub fn best_path_reliability(inst: &RoutingInstance, theta: &[f64]) -> f64 {
    simple_paths(inst)
        .iter()
        .map(|p| p.iter().map(|&e| theta[e]).product::<f64>())
        .fold(0.0, f64::max)
}

/// Realization table for a graph of at most 64 nodes: for every assignment
/// of live/blocked to every edge, its probability and the set of nodes each
/// node reaches (as a bitmask).
pub struct Realizations {
    pub weights: Vec<f64>,
    pub reach: Vec<Vec<u64>>,
}

impl Realizations {
    /// Enumerates all `2^|E|` edge realizations. Panics beyond 22 edges or 64 nodes.
    pub fn enumerate(graph: &InfluenceGraph, probs: &[f64]) -> Self {
        let n = graph.nodes();
        let edges: Vec<(usize, usize)> = graph.edges().iter().map(|e| (e.src, e.dst)).collect();
        assert!(n <= 64 && edges.len() <= 22, "graph too large for enumeration");
        let mut weights = Vec::with_capacity(1 << edges.len());
        let mut reach = Vec::with_capacity(1 << edges.len());
        for mask in 0u32..(1u32 << edges.len()) {
            let mut w = 1.0;
            for (b, &p) in probs.iter().enumerate() {
                w *= if mask >> b & 1 == 1 { p } else { 1.0 - p };
            }
            // transitive closure by fixed-point iteration
            let mut r: Vec<u64> = (0..n).map(|v| 1u64 << v).collect();
            loop {
                let mut changed = false;
                for (b, &(s, d)) in edges.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        let merged = r[s] | r[d];
                        if merged != r[s] {
                            r[s] = merged;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            weights.push(w);
            reach.push(r);
        }
        Realizations { weights, reach }
    }

    /// Exact expected number of nodes reached from `seeds`.
    pub fn spread(&self, seeds: &[usize]) -> f64 {
        self.weights
            .iter()
            .zip(&self.reach)
            .map(|(w, r)| {
                let m = seeds.iter().fold(0u64, |acc, &s| acc | r[s]);
                w * m.count_ones() as f64
            })
            .sum()
    }

    /// Best size-`k` seed set and its exact spread.
    pub fn best_seed_set(&self, n: usize, k: usize) -> (Vec<usize>, f64) {
        let mut best = (Vec::new(), f64::NEG_INFINITY);
        for s in subsets(n, k) {
            let val = self.spread(&s);
            if val > best.1 {
                best = (s, val);
            }
        }
        best
    }
}

/// Bernoulli KL divergence, written independently of the learner code.
fn kl(p: f64, q: f64) -> f64 {
    let a = if p > 0.0 { p * (p / q).ln() } else { 0.0 };
    let b = if p < 1.0 { (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln() } else { 0.0 };
    a + b
}

/// KL-UCB index by scanning `q` upward from `mu_hat` in steps of `step`;
/// returns the last grid point inside the confidence region.
pub fn klucb_grid(mu_hat: f64, n: u64, t: u64, step: f64) -> f64 {
    let lt = (t as f64).ln();
    let bound = (lt + 3.0 * lt.ln().max(0.0)) / n as f64;
    let steps = ((1.0 - mu_hat) / step).floor() as u64;
    let mut last = mu_hat;
    for s in 1..=steps {
        let q = mu_hat + s as f64 * step;
        if q >= 1.0 || kl(mu_hat, q) > bound {
            break;
        }
        last = q;
    }
    last
}

/// True when `mean` of `n` samples with sample standard deviation `std` lies
/// within three standard errors of `target`.
pub fn within_three_se(mean: f64, std: f64, n: usize, target: f64) -> bool {
    let se = std / (n as f64).sqrt();
    (mean - target).abs() <= 3.0 * se.max(1e-12)
}

/// Sample mean and standard deviation (n - 1 denominator).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
