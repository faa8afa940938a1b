//! Influence maximization under the independent cascade model with
//! edge-level feedback. Base arms are directed edges.

use std::collections::VecDeque;

use rand::Rng;

use super::bernoulli;
use crate::error::{Error, Result};
use crate::model::{BaseArmId, Feedback, MeanVector, SuperArm};

/// Largest number of uncertain edges [`exact_spread`] will enumerate.
pub const MAX_ENUMERATED_EDGES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub p: f64,
}

/// Directed graph with per-edge activation probabilities and CSR indices in
/// both directions. Edge ids are positions in [`edges`](Self::edges).
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceGraph {
    n: usize,
    edges: Vec<Edge>,
    out_start: Vec<usize>,
    out_edges: Vec<usize>,
    in_start: Vec<usize>,
    in_edges: Vec<usize>,
}

fn csr(n: usize, keys: impl Iterator<Item = usize> + Clone) -> (Vec<usize>, Vec<usize>) {
    let mut start = vec![0usize; n + 1];
    for k in keys.clone() {
        start[k + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut list = vec![0usize; start[n]];
    for (e, k) in keys.enumerate() {
        list[fill[k]] = e;
        fill[k] += 1;
    }
    (start, list)
}

impl InfluenceGraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for (id, e) in edges.iter().enumerate() {
            if e.src >= n || e.dst >= n {
                return Err(Error::arg(format!("edge {id} ({} -> {}) leaves node range 0..{n}", e.src, e.dst)));
            }
            if !(0.0..=1.0).contains(&e.p) {
                return Err(Error::arg(format!("edge {id} has probability {} outside [0,1]", e.p)));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(Error::arg(format!("parallel edge {} -> {}", e.src, e.dst)));
            }
        }
        let (out_start, out_edges) = csr(n, edges.iter().map(|e| e.src));
        let (in_start, in_edges) = csr(n, edges.iter().map(|e| e.dst));
        Ok(InfluenceGraph {
            n,
            edges,
            out_start,
            out_edges,
            in_start,
            in_edges,
        })
    }

    pub fn from_triples(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(
            n,
            triples.iter().map(|&(src, dst, p)| Edge { src, dst, p }).collect(),
        )
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge ids leaving `node`.
    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[self.out_start[node]..self.out_start[node + 1]]
    }

    /// Edge ids entering `node`.
    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[self.in_start[node]..self.in_start[node + 1]]
    }

    pub fn in_degree(&self, node: usize) -> usize {
        self.in_start[node + 1] - self.in_start[node]
    }

    pub fn probabilities(&self) -> MeanVector {
        MeanVector::clamped(self.edges.iter().map(|e| e.p).collect())
    }

    /// Same topology with different edge probabilities.
    pub fn with_probabilities(&self, probs: &MeanVector) -> Result<Self> {
        if probs.len() != self.edges.len() {
            return Err(Error::arg("probability vector length differs from edge count"));
        }
        let mut g = self.clone();
        for (e, &p) in g.edges.iter_mut().zip(probs.values()) {
            e.p = p;
        }
        Ok(g)
    }

    /// Validates a seed set: sorted-or-not, distinct, in range.
    pub fn seeds<'a>(&self, s: &'a SuperArm) -> Result<&'a [usize]> {
        let SuperArm::SeedSet(seeds) = s else {
            return Err(Error::arg(format!("influence graph cannot play a {}", s.kind())));
        };
        let mut mark = vec![false; self.n];
        for &v in seeds {
            if v >= self.n {
                return Err(Error::arg(format!("seed {v} out of range 0..{}", self.n)));
            }
            if std::mem::replace(&mut mark[v], true) {
                return Err(Error::arg(format!("seed {v} repeated")));
            }
        }
        Ok(seeds)
    }

    /// Edges whose source is reachable from the seeds through edges of
    /// positive probability under `probs`.
    pub fn triggering_set(&self, seeds: &[usize], probs: &[f64]) -> Vec<BaseArmId> {
        let mut seen = vec![false; self.n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        let mut out = Vec::new();
        while let Some(u) = queue.pop_front() {
            for &e in self.out_edges(u) {
                out.push(BaseArmId(e));
                let v = self.edges[e].dst;
                if probs[e] > 0.0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Graph plus the seed-set size `K` of the bandit problem.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceInstance {
    pub graph: InfluenceGraph,
    pub k: usize,
}

impl InfluenceInstance {
    pub fn new(graph: InfluenceGraph, k: usize) -> Result<Self> {
        if k == 0 || k > graph.nodes() {
            return Err(Error::arg(format!("seed-set size {k} not in 1..={}", graph.nodes())));
        }
        Ok(InfluenceInstance { graph, k })
    }

    pub fn seeds<'a>(&self, s: &'a SuperArm) -> Result<&'a [usize]> {
        let seeds = self.graph.seeds(s)?;
        if seeds.len() != self.k {
            return Err(Error::arg(format!("seed set has {} nodes, expected K = {}", seeds.len(), self.k)));
        }
        Ok(seeds)
    }
}

/// Outcome of one independent-cascade simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome {
    /// Influenced nodes in activation order (seeds first).
    pub influenced: Vec<usize>,
    /// Every outgoing edge of every influenced node with its 0/1 outcome.
    pub feedback: Feedback,
}

impl CascadeOutcome {
    pub fn spread(&self) -> usize {
        self.influenced.len()
    }
}

/// Runs the independent cascade from `seeds`. Nodes are processed in
/// activation order and their outgoing edges in id order; each edge is
/// drawn exactly once.
pub fn im_cascade<R: Rng + ?Sized>(graph: &InfluenceGraph, seeds: &[usize], rng: &mut R) -> CascadeOutcome {
    let mut active = vec![false; graph.nodes()];
    let mut influenced = Vec::with_capacity(seeds.len());
    for &s in seeds {
        if !active[s] {
            active[s] = true;
            influenced.push(s);
        }
    }
    let mut feedback = Feedback::new(0);
    let mut head = 0;
    while head < influenced.len() {
        let u = influenced[head];
        head += 1;
        for &e in graph.out_edges(u) {
            let edge = graph.edges[e];
            let live = bernoulli(rng, edge.p);
            feedback.push(BaseArmId(e), if live { 1.0 } else { 0.0 });
            if live && !active[edge.dst] {
                active[edge.dst] = true;
                influenced.push(edge.dst);
            }
        }
    }
    CascadeOutcome { influenced, feedback }
}

/// Monte-Carlo estimate of the expected spread of `seeds`.
pub fn im_spread<R: Rng + ?Sized>(graph: &InfluenceGraph, seeds: &[usize], n_mc: usize, rng: &mut R) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::arg("im_spread needs at least one simulation"));
    }
    let total: usize = (0..n_mc).map(|_| im_cascade(graph, seeds, rng).spread()).sum();
    Ok(total as f64 / n_mc as f64)
}

/// Exact expected spread and per-node influence probabilities, by
/// enumerating every realization of the uncertain edges reachable from the
/// seeds. Edges with probability 0 or 1 are not enumerated.
pub fn exact_influence(graph: &InfluenceGraph, seeds: &[usize], probs: &[f64]) -> Result<(f64, Vec<f64>)> {
    let relevant: Vec<usize> = graph
        .triggering_set(seeds, probs)
        .into_iter()
        .map(|a| a.0)
        .filter(|&e| probs[e] > 0.0 && probs[e] < 1.0)
        .collect();
    if relevant.len() > MAX_ENUMERATED_EDGES {
        return Err(Error::arg(format!(
            "exact spread would enumerate 2^{} realizations (limit 2^{MAX_ENUMERATED_EDGES})",
            relevant.len()
        )));
    }
    let mut slot = vec![usize::MAX; graph.num_edges()];
    for (b, &e) in relevant.iter().enumerate() {
        slot[e] = b;
    }
    let n = graph.nodes();
    let mut node_prob = vec![0.0; n];
    let mut active = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for mask in 0u64..(1u64 << relevant.len()) {
        let weight: f64 = relevant
            .iter()
            .enumerate()
            .map(|(b, &e)| if mask >> b & 1 == 1 { probs[e] } else { 1.0 - probs[e] })
            .product();
        if weight == 0.0 {
            continue;
        }
        active.iter_mut().for_each(|a| *a = false);
        order.clear();
        for &s in seeds {
            if !active[s] {
                active[s] = true;
                order.push(s);
            }
        }
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &e in graph.out_edges(u) {
                let live = match slot[e] {
                    usize::MAX => probs[e] >= 1.0,
                    b => mask >> b & 1 == 1,
                };
                let v = graph.edges[e].dst;
                if live && !active[v] {
                    active[v] = true;
                    order.push(v);
                }
            }
        }
        for &v in &order {
            node_prob[v] += weight;
        }
    }
    Ok((node_prob.iter().sum(), node_prob))
}

/// Exact expected spread; see [`exact_influence`].
pub fn exact_spread(graph: &InfluenceGraph, seeds: &[usize], probs: &[f64]) -> Result<f64> {
    exact_influence(graph, seeds, probs).map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_edges_spread_is_seed_count() {
        let g = InfluenceGraph::new(4, vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = im_cascade(&g, &[1, 3], &mut rng);
        assert_eq!(out.spread(), 2);
        assert!(out.feedback.is_empty());
        assert_eq!(im_spread(&g, &[1, 3], 10, &mut rng).unwrap(), 2.0);
        assert!(im_spread(&g, &[1, 3], 0, &mut rng).is_err());
    }

    #[test]
    fn deterministic_chain() {
        let g = InfluenceGraph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = im_cascade(&g, &[0], &mut rng);
        assert_eq!(out.influenced, vec![0, 1, 2]);
        assert_eq!(out.feedback.len(), 2);
        assert_eq!(im_spread(&g, &[0], 7, &mut rng).unwrap(), 3.0);
        assert_eq!(exact_spread(&g, &[0], &[1.0, 1.0]).unwrap(), 3.0);
    }

    #[test]
    fn exact_two_edge_fan() {
        let g = InfluenceGraph::from_triples(3, &[(0, 1, 0.5), (0, 2, 0.25)]).unwrap();
        let (s, per) = exact_influence(&g, &[0], &[0.5, 0.25]).unwrap();
        assert!((s - 1.75).abs() < 1e-12);
        assert!((per[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_parallel_edges_and_bad_probabilities() {
        assert!(InfluenceGraph::from_triples(2, &[(0, 1, 0.5), (0, 1, 0.2)]).is_err());
        assert!(InfluenceGraph::from_triples(2, &[(0, 1, 1.5)]).is_err());
        assert!(InfluenceGraph::from_triples(2, &[(0, 2, 0.5)]).is_err());
    }
}
