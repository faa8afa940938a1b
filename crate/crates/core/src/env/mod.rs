//! The four problem families and their stochastic step functions.

pub mod cascade;
pub mod influence;
pub mod pmc;
pub mod routing;

use rand::Rng;

pub use cascade::{casc_reward, casc_step, casc_triggering_prob, CascadeForm, CascadingInstance};
pub use influence::{
    exact_influence, exact_spread, im_cascade, im_spread, CascadeOutcome, Edge, InfluenceGraph,
    InfluenceInstance,
};
pub use pmc::{pmc_reward, pmc_step, PmcInstance};
pub use routing::{path_reliability, RoutingInstance};

use crate::error::{Error, Result};
use crate::model::{BaseArmId, Feedback, MeanVector, SuperArm};

/// Bernoulli draw that consumes no randomness when the outcome is certain.
#[inline]
pub fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.random::<f64>() < p
    }
}

/// A problem instance of any family.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Cascade(CascadingInstance),
    Pmc(PmcInstance),
    Influence(InfluenceInstance),
    Routing(RoutingInstance),
}

impl Instance {
    pub fn family(&self) -> &'static str {
        match self {
            Instance::Cascade(_) => "cascade",
            Instance::Pmc(_) => "pmc",
            Instance::Influence(_) => "influence",
            Instance::Routing(_) => "routing",
        }
    }

    pub fn num_arms(&self) -> usize {
        match self {
            Instance::Cascade(c) => c.num_arms(),
            Instance::Pmc(p) => p.num_arms(),
            Instance::Influence(i) => i.graph.num_edges(),
            Instance::Routing(r) => r.num_arms(),
        }
    }

    /// True mean outcome vector.
    pub fn means(&self) -> MeanVector {
        match self {
            Instance::Cascade(c) => c.attraction().clone(),
            Instance::Pmc(p) => p.attraction().clone(),
            Instance::Influence(i) => i.graph.probabilities(),
            Instance::Routing(r) => r.reliability().clone(),
        }
    }

    pub fn check_feasible(&self, s: &SuperArm) -> Result<()> {
        match self {
            Instance::Cascade(c) => c.lists(s).map(drop),
            Instance::Pmc(p) => p.advertised(s).map(drop),
            Instance::Influence(i) => i.seeds(s).map(drop),
            Instance::Routing(r) => r.path(s).map(drop),
        }
    }

    /// Closed-form expected reward `r(S, theta)`. For influence graphs this is
    /// exact enumeration and only available on small graphs.
    pub fn expected_reward(&self, s: &SuperArm, theta: &MeanVector) -> Result<f64> {
        self.check_len(theta)?;
        match self {
            Instance::Cascade(c) => c.reward(s, theta),
            Instance::Pmc(p) => p.reward(s, theta),
            Instance::Influence(i) => exact_spread(&i.graph, i.seeds(s)?, theta.values())
                .map_err(|e| Error::config(format!("influence reward has no closed form here: {e}"))),
            Instance::Routing(r) => r.reward(s, theta),
        }
    }

    /// Every arm with a non-zero chance of being observed when `s` is played.
    pub fn triggering_set(&self, s: &SuperArm) -> Result<Vec<BaseArmId>> {
        match self {
            Instance::Cascade(c) => c.triggering_set(s),
            Instance::Pmc(p) => p.triggering_set(s),
            Instance::Influence(i) => {
                let seeds = i.seeds(s)?;
                let probs: Vec<f64> = i.graph.edges().iter().map(|e| e.p).collect();
                Ok(i.graph.triggering_set(seeds, &probs))
            }
            Instance::Routing(r) => r.triggering_set(s),
        }
    }

    /// Probability that `arm` is triggered when `s` is played and arm means are `theta`.
    pub fn triggering_prob(&self, s: &SuperArm, arm: BaseArmId, theta: &MeanVector) -> Result<f64> {
        self.check_len(theta)?;
        match self {
            Instance::Cascade(c) => c.triggering_prob(s, arm, theta),
            Instance::Pmc(p) => p.triggering_prob(s, arm),
            Instance::Influence(i) => {
                let seeds = i.seeds(s)?;
                let edge = i
                    .graph
                    .edges()
                    .get(arm.0)
                    .ok_or_else(|| Error::arg(format!("{arm} out of range")))?;
                let (_, per_node) = exact_influence(&i.graph, seeds, theta.values())?;
                Ok(per_node[edge.src])
            }
            Instance::Routing(r) => r.triggering_prob(s, arm, theta),
        }
    }

    /// Plays `s` for one round; returns the feedback and realized reward.
    pub fn step<R: Rng + ?Sized>(&self, s: &SuperArm, round: u64, rng: &mut R) -> Result<(Feedback, f64)> {
        match self {
            Instance::Cascade(c) => c.step(s, round, rng),
            Instance::Pmc(p) => p.step(s, round, rng),
            Instance::Influence(i) => {
                let seeds = i.seeds(s)?;
                let mut out = im_cascade(&i.graph, seeds, rng);
                out.feedback.round = round;
                let spread = out.spread() as f64;
                Ok((out.feedback, spread))
            }
            Instance::Routing(r) => r.step(s, round, rng),
        }
    }

    /// One independent Bernoulli outcome for every base arm, outside any
    /// round. Used by learners that start from one observation per arm.
    pub fn sample_all_outcomes<R: Rng + ?Sized>(&self, rng: &mut R) -> Feedback {
        let means = self.means();
        let mut fb = Feedback::new(0);
        for (i, &mu) in means.values().iter().enumerate() {
            fb.push(BaseArmId(i), if bernoulli(rng, mu) { 1.0 } else { 0.0 });
        }
        fb
    }

    fn check_len(&self, theta: &MeanVector) -> Result<()> {
        if theta.len() != self.num_arms() {
            return Err(Error::arg(format!(
                "parameter vector has {} entries, instance has {} arms",
                theta.len(),
                self.num_arms()
            )));
        }
        Ok(())
    }
}
