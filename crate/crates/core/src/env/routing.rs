//! Most-reliable routing: links fail independently, a path's reward is 1 when
//! every link on it works. Base arms are links.

use rand::Rng;

use super::bernoulli;
use crate::error::{Error, Result};
use crate::model::{BaseArmId, Feedback, MeanVector, SuperArm};

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingInstance {
    nodes: usize,
    links: Vec<(usize, usize)>,
    reliability: MeanVector,
    source: usize,
    destination: usize,
    out_links: Vec<Vec<usize>>,
}

impl RoutingInstance {
    /// `links[e] = (from, to)` is directed; `reliability[e]` is its success
    /// probability.
    pub fn new(
        nodes: usize,
        links: Vec<(usize, usize)>,
        reliability: MeanVector,
        source: usize,
        destination: usize,
    ) -> Result<Self> {
        if links.len() != reliability.len() {
            return Err(Error::arg("one reliability per link required"));
        }
        if source >= nodes || destination >= nodes || source == destination {
            return Err(Error::arg("source and destination must be distinct valid nodes"));
        }
        if let Some(e) = reliability.values().iter().position(|&p| p <= 0.0) {
            return Err(Error::arg(format!("link {e} has non-positive success probability")));
        }
        let mut out_links = vec![Vec::new(); nodes];
        for (e, &(a, b)) in links.iter().enumerate() {
            if a >= nodes || b >= nodes {
                return Err(Error::arg(format!("link {e} ({a} -> {b}) leaves node range")));
            }
            out_links[a].push(e);
        }
        let inst = RoutingInstance {
            nodes,
            links,
            reliability,
            source,
            destination,
            out_links,
        };
        if !inst.connected() {
            return Err(Error::arg(format!("no path from {source} to {destination}")));
        }
        Ok(inst)
    }

    fn connected(&self) -> bool {
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![self.source];
        seen[self.source] = true;
        while let Some(u) = stack.pop() {
            for &e in &self.out_links[u] {
                let v = self.links[e].1;
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen[self.destination]
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn out_links(&self, node: usize) -> &[usize] {
        &self.out_links[node]
    }

    pub fn reliability(&self) -> &MeanVector {
        &self.reliability
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn destination(&self) -> usize {
        self.destination
    }

    pub fn num_arms(&self) -> usize {
        self.links.len()
    }

    /// Validates that `s` is a simple source-to-destination path.
    pub fn path<'a>(&self, s: &'a SuperArm) -> Result<&'a [usize]> {
        let SuperArm::Path(path) = s else {
            return Err(Error::arg(format!("routing instance cannot play a {}", s.kind())));
        };
        if path.is_empty() {
            return Err(Error::arg("empty path"));
        }
        let mut at = self.source;
        let mut visited = vec![false; self.nodes];
        visited[at] = true;
        for &e in path {
            let &(a, b) = self
                .links
                .get(e)
                .ok_or_else(|| Error::arg(format!("unknown link {e}")))?;
            if a != at {
                return Err(Error::arg(format!("link {e} starts at {a}, path is at {at}")));
            }
            if std::mem::replace(&mut visited[b], true) {
                return Err(Error::arg(format!("path revisits node {b}")));
            }
            at = b;
        }
        if at != self.destination {
            return Err(Error::arg(format!("path ends at {at}, not {}", self.destination)));
        }
        Ok(path)
    }

    /// Probability that every link on the path succeeds.
    pub fn reward(&self, s: &SuperArm, theta: &MeanVector) -> Result<f64> {
        Ok(self.path(s)?.iter().map(|&e| theta[e]).product())
    }

    pub fn triggering_prob(&self, s: &SuperArm, arm: BaseArmId, theta: &MeanVector) -> Result<f64> {
        let path = self.path(s)?;
        Ok(match path.iter().position(|&e| e == arm.0) {
            Some(k) => path[..k].iter().map(|&e| theta[e]).product(),
            None => 0.0,
        })
    }

    pub fn triggering_set(&self, s: &SuperArm) -> Result<Vec<BaseArmId>> {
        Ok(self.path(s)?.iter().map(|&e| BaseArmId(e)).collect())
    }

    /// Link outcomes along the path up to and including the first failure.
    pub fn step<R: Rng + ?Sized>(&self, s: &SuperArm, round: u64, rng: &mut R) -> Result<(Feedback, f64)> {
        let path = self.path(s)?;
        let mut fb = Feedback::new(round);
        for &e in path {
            let ok = bernoulli(rng, self.reliability[e]);
            fb.push(BaseArmId(e), if ok { 1.0 } else { 0.0 });
            if !ok {
                return Ok((fb, 0.0));
            }
        }
        Ok((fb, 1.0))
    }
}

pub fn path_reliability(inst: &RoutingInstance, s: &SuperArm, theta: &MeanVector) -> Result<f64> {
    inst.reward(s, theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> RoutingInstance {
        // 0 -> 1 -> 3 and 0 -> 2 -> 3
        RoutingInstance::new(
            4,
            vec![(0, 1), (1, 3), (0, 2), (2, 3)],
            MeanVector::new(vec![0.9, 0.8, 1.0, 1.0]).unwrap(),
            0,
            3,
        )
        .unwrap()
    }

    #[test]
    fn product_of_links() {
        let r = diamond();
        let p = SuperArm::Path(vec![0, 1]);
        assert!((r.reward(&p, r.reliability()).unwrap() - 0.72).abs() < 1e-12);
        assert_eq!(r.reward(&SuperArm::Path(vec![2, 3]), r.reliability()).unwrap(), 1.0);
        assert!((r.triggering_prob(&p, BaseArmId(1), r.reliability()).unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(r.triggering_prob(&p, BaseArmId(2), r.reliability()).unwrap(), 0.0);
    }

    #[test]
    fn rejects_broken_paths() {
        let r = diamond();
        for bad in [vec![], vec![0], vec![1], vec![0, 3], vec![9]] {
            assert!(r.reward(&SuperArm::Path(bad.clone()), r.reliability()).is_err(), "{bad:?}");
        }
        assert!(RoutingInstance::new(3, vec![(0, 1)], MeanVector::new(vec![0.5]).unwrap(), 0, 2).is_err());
        assert!(RoutingInstance::new(2, vec![(0, 1)], MeanVector::new(vec![0.0]).unwrap(), 0, 1).is_err());
    }
}
