use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::env::RoutingInstance;
use crate::error::{Error, Result};
use crate::model::{MeanVector, SuperArm};

/// Path label ordered by total `-ln theta` weight, then hop count, then the
/// edge-id sequence lexicographically.
#[derive(Debug, Clone)]
struct Label {
    cost: f64,
    path: Vec<usize>,
    node: usize,
}

impl Label {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.path.len().cmp(&other.path.len()))
            .then_with(|| self.path.cmp(&other.path))
    }
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for Label {}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

/// Most reliable source-to-destination path under link parameters `theta`:
/// Dijkstra on weights `-ln theta_e`. Links with `theta_e = 0` are unusable.
pub fn reliable_path_oracle(inst: &RoutingInstance, theta: &MeanVector) -> Result<SuperArm> {
    if theta.len() != inst.num_arms() {
        return Err(Error::arg(format!(
            "parameter vector has {} entries, instance has {} links",
            theta.len(),
            inst.num_arms()
        )));
    }
    let mut best: Vec<Option<Label>> = vec![None; inst.nodes()];
    let mut done = vec![false; inst.nodes()];
    let mut heap = BinaryHeap::new();
    heap.push(Label {
        cost: 0.0,
        path: Vec::new(),
        node: inst.source(),
    });
    while let Some(label) = heap.pop() {
        if std::mem::replace(&mut done[label.node], true) {
            continue;
        }
        if label.node == inst.destination() {
            return Ok(SuperArm::Path(label.path));
        }
        for &e in inst.out_links(label.node) {
            let th = theta[e];
            if th <= 0.0 {
                continue;
            }
            let next = inst.links()[e].1;
            if done[next] {
                continue;
            }
            let mut path = label.path.clone();
            path.push(e);
            let cand = Label {
                cost: label.cost + (-th.ln()).max(0.0),
                path,
                node: next,
            };
            let better = best[next]
                .as_ref()
                .is_none_or(|cur| cand.key_cmp(cur) == Ordering::Less);
            if better {
                best[next] = Some(cand.clone());
                heap.push(cand);
            }
        }
    }
    Err(Error::Oracle(format!(
        "no link path with positive reliability from {} to {}",
        inst.source(),
        inst.destination()
    )))
}
