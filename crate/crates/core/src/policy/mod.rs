//! Learners. Every learner turns its statistics into a parameter vector
//! (a posterior sample or an optimistic index) and hands it to the oracle.

pub mod cts;
pub mod ucb;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use cts::{cts_sample, cts_update, CtsState};
pub use ucb::{
    cucb_index, cucb_indices, cucb_indices_with, kl_bernoulli, klucb_index, klucb_threshold,
    ts_cascade_sample, ts_cascade_theta, ts_cascade_width, TsWidth, UcbState, CUCB_CONSTANT, KLUCB_TOL,
};

use crate::env::Instance;
use crate::error::Result;
use crate::model::{Feedback, MeanVector, SuperArm};
use crate::oracle::Oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Cts,
    Cucb,
    #[serde(rename = "cascade-ucb1")]
    CascadeUcb1,
    #[serde(rename = "cascade-kl-ucb")]
    CascadeKlUcb,
    TsCascade,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Cts,
        PolicyKind::Cucb,
        PolicyKind::CascadeUcb1,
        PolicyKind::CascadeKlUcb,
        PolicyKind::TsCascade,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Cts => "CTS",
            PolicyKind::Cucb => "CUCB",
            PolicyKind::CascadeUcb1 => "CascadeUCB1",
            PolicyKind::CascadeKlUcb => "CascadeKL-UCB",
            PolicyKind::TsCascade => "TS-Cascade",
        }
    }

    /// Whether the learner is specific to cascading bandits.
    pub fn cascade_only(self) -> bool {
        matches!(
            self,
            PolicyKind::CascadeUcb1 | PolicyKind::CascadeKlUcb | PolicyKind::TsCascade
        )
    }

    /// Cascade UCB learners start from one free observation of every arm.
    pub fn observes_all_arms_first(self) -> bool {
        matches!(self, PolicyKind::CascadeUcb1 | PolicyKind::CascadeKlUcb)
    }
}

fn default_ucb_constant() -> f64 {
    CUCB_CONSTANT
}

fn default_prior() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    /// `c` in the UCB bonus `sqrt(c ln t / N)`.
    #[serde(default = "default_ucb_constant")]
    pub ucb_constant: f64,
    #[serde(default)]
    pub ts_width: TsWidth,
    /// Initial Beta parameters for CTS.
    #[serde(default = "default_prior")]
    pub prior_a: f64,
    #[serde(default = "default_prior")]
    pub prior_b: f64,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        PolicySpec {
            kind,
            ucb_constant: CUCB_CONSTANT,
            ts_width: TsWidth::default(),
            prior_a: 1.0,
            prior_b: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Stats {
    Beta(CtsState),
    Counts(UcbState),
}

/// Mutable learner state for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Learner {
    spec: PolicySpec,
    stats: Stats,
}

impl Learner {
    pub fn new(spec: &PolicySpec, m: usize) -> Result<Self> {
        let stats = match spec.kind {
            PolicyKind::Cts => Stats::Beta(CtsState::with_prior(m, spec.prior_a, spec.prior_b)?),
            _ => Stats::Counts(UcbState::new(m)),
        };
        Ok(Learner {
            spec: spec.clone(),
            stats,
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.spec.kind
    }

    pub fn cts_state(&self) -> Option<&CtsState> {
        match &self.stats {
            Stats::Beta(s) => Some(s),
            Stats::Counts(_) => None,
        }
    }

    pub fn ucb_state(&self) -> Option<&UcbState> {
        match &self.stats {
            Stats::Counts(s) => Some(s),
            Stats::Beta(_) => None,
        }
    }

    /// Parameter vector handed to the oracle in round `t` (1-based).
    pub fn parameters<R: Rng + ?Sized>(&mut self, t: u64, rng: &mut R) -> Result<MeanVector> {
        match &mut self.stats {
            Stats::Beta(s) => Ok(cts_sample(s, rng)),
            Stats::Counts(s) => {
                s.t = t;
                match self.spec.kind {
                    PolicyKind::Cucb | PolicyKind::CascadeUcb1 => cucb_indices_with(s, self.spec.ucb_constant),
                    PolicyKind::CascadeKlUcb => {
                        let tq = t.max(2);
                        let idx = (0..s.len())
                            .map(|i| match s.mean(i) {
                                Some(mu) => klucb_index(mu, s.count(i), tq),
                                None => Ok(1.0),
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok(MeanVector::clamped(idx))
                    }
                    PolicyKind::TsCascade => Ok(ts_cascade_sample(s, self.spec.ts_width, rng)),
                    PolicyKind::Cts => unreachable!("CTS keeps Beta statistics"),
                }
            }
        }
    }

    pub fn update<R: Rng + ?Sized>(&mut self, fb: &Feedback, rng: &mut R) -> Result<()> {
        match &mut self.stats {
            Stats::Beta(s) => cts_update(s, fb, rng),
            Stats::Counts(s) => s.observe(fb),
        }
    }
}

/// `Oracle(theta(t))` with `theta(t)` the learner's parameter vector for round `t`.
pub fn select<R: Rng + ?Sized>(
    learner: &mut Learner,
    oracle: &Oracle,
    inst: &Instance,
    t: u64,
    rng: &mut R,
) -> Result<SuperArm> {
    let theta = learner.parameters(t, rng)?;
    oracle.solve(inst, &theta, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BaseArmId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cascade_ucb1_and_cucb_share_indices() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = Learner::new(&PolicySpec::new(PolicyKind::Cucb), 3).unwrap();
        let mut b = Learner::new(&PolicySpec::new(PolicyKind::CascadeUcb1), 3).unwrap();
        let fb = Feedback {
            round: 1,
            entries: vec![(BaseArmId(0), 1.0), (BaseArmId(1), 0.0)],
        };
        for _ in 0..5 {
            a.update(&fb, &mut rng).unwrap();
            b.update(&fb, &mut rng).unwrap();
        }
        assert_eq!(a.parameters(40, &mut rng).unwrap(), b.parameters(40, &mut rng).unwrap());
    }

    #[test]
    fn kl_ucb_unobserved_arm_is_optimistic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut l = Learner::new(&PolicySpec::new(PolicyKind::CascadeKlUcb), 2).unwrap();
        l.update(&Feedback { round: 1, entries: vec![(BaseArmId(0), 0.0)] }, &mut rng).unwrap();
        let p = l.parameters(1, &mut rng).unwrap();
        assert!(p[0] < 1.0);
        assert_eq!(p[1], 1.0);
    }

    #[test]
    fn spec_parses_from_toml() {
        let s: PolicySpec = toml::from_str("kind = \"cascade-kl-ucb\"").unwrap();
        assert_eq!(s.kind, PolicyKind::CascadeKlUcb);
        assert_eq!(s.ucb_constant, CUCB_CONSTANT);
        let s: PolicySpec = toml::from_str("kind = \"ts-cascade\"\nts_width = \"hoeffding\"").unwrap();
        assert_eq!(s.ts_width, TsWidth::Hoeffding);
        assert!(toml::from_str::<PolicySpec>("kind = \"eps-greedy\"").is_err());
    }
}
