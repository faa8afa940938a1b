//! Synthetic problem instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{CascadeForm, CascadingInstance, InfluenceGraph, PmcInstance};
use crate::error::{Error, Result};
use crate::ingest::weighted_cascade_graph;
use crate::model::MeanVector;

/// Single-user disjunctive list problem: the first `k` items have attraction
/// `p`, the rest `p - gap`.
pub fn make_blb_instance(items: usize, k: usize, p: f64, gap: f64) -> Result<CascadingInstance> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::arg(format!("p = {p} must lie in (0,1)")));
    }
    if !(gap > 0.0 && gap < p) {
        return Err(Error::arg(format!("gap = {gap} must lie in (0, p = {p})")));
    }
    if k == 0 || k > items {
        return Err(Error::arg(format!("K = {k} not in 1..={items}")));
    }
    let attraction = (0..items).map(|i| if i < k { p } else { p - gap }).collect();
    CascadingInstance::new(items, 1, k, CascadeForm::Disjunctive, MeanVector::new(attraction)?)
}

/// Cascading instance with every attraction drawn uniformly from `[0, 1)`.
pub fn random_cascade(items: usize, users: usize, list_len: usize, form: CascadeForm, seed: u64) -> Result<CascadingInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attraction = (0..items * users).map(|_| rng.random::<f64>()).collect();
    CascadingInstance::new(items, users, list_len, form, MeanVector::new(attraction)?)
}

/// Coverage instance with attractions uniform on `[0, max_attraction)`.
pub fn random_pmc(items: usize, users: usize, k: usize, p_star: f64, max_attraction: f64, seed: u64) -> Result<PmcInstance> {
    if !(0.0..=1.0).contains(&max_attraction) {
        return Err(Error::arg(format!("max_attraction = {max_attraction} outside [0,1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attraction = (0..items * users).map(|_| max_attraction * rng.random::<f64>()).collect();
    PmcInstance::new(items, users, k, MeanVector::new(attraction)?, p_star)
}

/// Directed graph with `edges` distinct edges where sources are drawn with
/// weight `outdeg + 1` and targets with weight `indeg + 1`, giving skewed
/// degrees in both directions. Edge probabilities are `1 / outdeg(src)`.
pub fn synthetic_graph(nodes: usize, edges: usize, seed: u64) -> Result<InfluenceGraph> {
    if nodes < 2 {
        return Err(Error::arg("synthetic graph needs at least two nodes"));
    }
    if edges == 0 || edges > nodes * (nodes - 1) / 2 {
        return Err(Error::arg(format!(
            "{edges} edges requested on {nodes} nodes; allowed 1..={}",
            nodes * (nodes - 1) / 2
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0usize; nodes];
    let mut inn = vec![0usize; nodes];
    let mut present = std::collections::HashSet::with_capacity(edges);
    let mut pairs = Vec::with_capacity(edges);
    let pick = |weights: &[usize], total: usize, rng: &mut ChaCha8Rng| {
        let mut r = rng.random_range(0..total);
        for (i, &w) in weights.iter().enumerate() {
            let w = w + 1;
            if r < w {
                return i;
            }
            r -= w;
        }
        unreachable!("weights sum to total")
    };
    while pairs.len() < edges {
        let s = pick(&out, pairs.len() + nodes, &mut rng);
        let d = pick(&inn, pairs.len() + nodes, &mut rng);
        if s != d && present.insert((s, d)) {
            out[s] += 1;
            inn[d] += 1;
            pairs.push((s, d));
        }
    }
    pairs.sort_unstable();
    weighted_cascade_graph(nodes, &pairs)
}
