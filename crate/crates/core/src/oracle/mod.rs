//! Combinatorial optimizers mapping a parameter vector to a super arm.

pub mod path;
pub mod rr;
pub mod subset;
pub mod topk;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use path::reliable_path_oracle;
pub use rr::{rr_greedy_oracle, RrGreedyOutcome, TimParams};
pub use subset::{binomial, exhaustive_subset_oracle, exhaustive_subset_oracle_capped, MAX_SUBSETS};
pub use topk::topk_oracle;

use crate::env::Instance;
use crate::error::{Error, Result};
use crate::model::{MeanVector, SuperArm};

fn default_max_subsets() -> u64 {
    MAX_SUBSETS
}

/// Oracle choice with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Oracle {
    TopKPerUser,
    ExhaustiveSubset {
        #[serde(default = "default_max_subsets")]
        max_subsets: u64,
    },
    ReliablePath,
    RrGreedy(TimParams),
}

impl Oracle {
    /// The exact (or, for influence graphs, TIM+) oracle bound to the family.
    pub fn default_for(inst: &Instance) -> Self {
        match inst {
            Instance::Cascade(_) => Oracle::TopKPerUser,
            Instance::Pmc(_) => Oracle::ExhaustiveSubset {
                max_subsets: MAX_SUBSETS,
            },
            Instance::Influence(_) => Oracle::RrGreedy(TimParams::default()),
            Instance::Routing(_) => Oracle::ReliablePath,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Oracle::TopKPerUser => "top_k_per_user",
            Oracle::ExhaustiveSubset { .. } => "exhaustive_subset",
            Oracle::ReliablePath => "reliable_path",
            Oracle::RrGreedy(_) => "rr_greedy",
        }
    }

    /// Whether this oracle maximizes `r(S, theta)` exactly.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Oracle::RrGreedy(_))
    }

    /// Rejects oracle/instance pairs that cannot work together.
    pub fn check_compatible(&self, inst: &Instance) -> Result<()> {
        let ok = matches!(
            (self, inst),
            (Oracle::TopKPerUser, Instance::Cascade(_))
                | (Oracle::ExhaustiveSubset { .. }, Instance::Pmc(_))
                | (Oracle::ReliablePath, Instance::Routing(_))
                | (Oracle::RrGreedy(_), Instance::Influence(_))
        );
        if !ok {
            return Err(Error::config(format!(
                "oracle {} cannot serve a {} instance",
                self.name(),
                inst.family()
            )));
        }
        if let Oracle::RrGreedy(p) = self {
            p.validate()?;
        }
        if let (Oracle::ExhaustiveSubset { max_subsets }, Instance::Pmc(p)) = (self, inst) {
            let count = binomial(p.items(), p.k());
            if count > *max_subsets {
                return Err(Error::config(format!(
                    "C({},{}) = {count} subsets exceeds the exhaustive limit {max_subsets}; use a greedy oracle instead",
                    p.items(),
                    p.k()
                )));
            }
        }
        Ok(())
    }

    pub fn solve<R: Rng + ?Sized>(&self, inst: &Instance, theta: &MeanVector, rng: &mut R) -> Result<SuperArm> {
        match (self, inst) {
            (Oracle::TopKPerUser, Instance::Cascade(c)) => topk_oracle(theta, c.items(), c.users(), c.list_len()),
            (Oracle::ExhaustiveSubset { max_subsets }, Instance::Pmc(p)) => {
                exhaustive_subset_oracle_capped(theta, p, *max_subsets)
            }
            (Oracle::ReliablePath, Instance::Routing(r)) => reliable_path_oracle(r, theta),
            (Oracle::RrGreedy(params), Instance::Influence(i)) => {
                let out = rr_greedy_oracle(&i.graph, theta, i.k, params, rng)?;
                if out.budget_exhausted {
                    log::debug!("TIM+ budget cap reached ({} RR sets)", out.rr_sets);
                }
                Ok(SuperArm::SeedSet(out.seeds))
            }
            _ => {
                self.check_compatible(inst)?;
                unreachable!("compatible pairs are matched above")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{CascadeForm, CascadingInstance};

    #[test]
    fn mismatched_pairs_are_config_errors() {
        let c = CascadingInstance::new(3, 1, 1, CascadeForm::Disjunctive, MeanVector::filled(3, 0.5).unwrap()).unwrap();
        let inst = Instance::Cascade(c);
        assert!(Oracle::TopKPerUser.check_compatible(&inst).is_ok());
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let err = Oracle::ReliablePath.solve(&inst, &inst.means(), &mut rng).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn parses_from_toml() {
        let o: Oracle = toml::from_str("variant = \"rr_greedy\"\nepsilon = 0.2\nrr_budget = 500").unwrap();
        let Oracle::RrGreedy(p) = o else { panic!() };
        assert_eq!(p.epsilon, 0.2);
        assert_eq!(p.ell, 1.0);
        assert_eq!(p.rr_budget, 500);
        let o: Oracle = toml::from_str("variant = \"exhaustive_subset\"").unwrap();
        assert_eq!(o, Oracle::ExhaustiveSubset { max_subsets: MAX_SUBSETS });
    }
}
