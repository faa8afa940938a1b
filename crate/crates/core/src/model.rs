//! Problem-model types shared by environments, learners and oracles.
//!
//! A problem has `m` base arms with unknown mean outcomes. Each round the
//! learner plays a super arm; the environment triggers a random superset of
//! it and reveals the outcome of every triggered arm (semi-bandit feedback).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::env::Instance;
use crate::error::{Error, Result};

/// Absolute tolerance for closed-form equalities.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// Index of a base arm in `[0, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BaseArmId(pub usize);

impl BaseArmId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for BaseArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "arm{}", self.0)
    }
}

/// A vector of per-arm means (true `mu`, a posterior sample, or UCB indices),
/// every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanVector(Vec<f64>);

impl MeanVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::arg(format!("mean of arm {i} is {v}, outside [0,1]")));
        }
        Ok(MeanVector(values))
    }

    /// Clamps every entry into `[0, 1]`; NaN becomes 0.
    pub fn clamped(values: Vec<f64>) -> Self {
        MeanVector(
            values
                .into_iter()
                .map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
                .collect(),
        )
    }

    pub fn filled(m: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, arm: BaseArmId) -> f64 {
        self.0[arm.0]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for MeanVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A feasible action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SuperArm {
    /// One ranked list of item ids per user.
    RankedLists(Vec<Vec<usize>>),
    /// Advertised item ids, sorted ascending.
    ItemSubset(Vec<usize>),
    /// Seed node ids, sorted ascending.
    SeedSet(Vec<usize>),
    /// Edge ids from source to destination, in traversal order.
    Path(Vec<usize>),
}

impl SuperArm {
    pub fn kind(&self) -> &'static str {
        match self {
            SuperArm::RankedLists(_) => "ranked-lists",
            SuperArm::ItemSubset(_) => "item-subset",
            SuperArm::SeedSet(_) => "seed-set",
            SuperArm::Path(_) => "path",
        }
    }
}

/// Observation of one round: the outcome of every triggered arm.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Feedback {
    pub round: u64,
    pub entries: Vec<(BaseArmId, f64)>,
}

impl Feedback {
    pub fn new(round: u64) -> Self {
        Feedback {
            round,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, arm: BaseArmId, outcome: f64) {
        self.entries.push((arm, outcome));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn arms(&self) -> impl Iterator<Item = BaseArmId> + '_ {
        self.entries.iter().map(|(a, _)| *a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretMode {
    /// Gap of the closed-form expected reward to the true optimum.
    Expected,
    /// Realized reward measured against `alpha * beta` times an approximate optimum.
    RealizedApprox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretRecord {
    pub round: u64,
    pub instantaneous_regret: f64,
    pub cumulative_regret: f64,
    pub mode: RegretMode,
}

/// Instantaneous regret: benchmark value minus the value attained this round.
///
/// In expected mode with an exhaustively computed optimum this is never
/// negative; realized-approximation rounds can be.
pub fn regret_step(opt_value: f64, round_value: f64, _mode: RegretMode) -> f64 {
    opt_value - round_value
}

/// Running cumulative regret of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub seed: u64,
    pub mode: RegretMode,
    cumulative: Vec<f64>,
}

impl RegretCurve {
    pub fn new(seed: u64, mode: RegretMode) -> Self {
        RegretCurve {
            seed,
            mode,
            cumulative: Vec::new(),
        }
    }

    pub fn from_cumulative(seed: u64, mode: RegretMode, cumulative: Vec<f64>) -> Self {
        RegretCurve {
            seed,
            mode,
            cumulative,
        }
    }

    /// Appends one round and returns its record.
    pub fn push(&mut self, opt_value: f64, round_value: f64) -> RegretRecord {
        let inst = regret_step(opt_value, round_value, self.mode);
        let cum = self.last() + inst;
        self.cumulative.push(cum);
        RegretRecord {
            round: self.cumulative.len() as u64,
            instantaneous_regret: inst,
            cumulative_regret: cum,
            mode: self.mode,
        }
    }

    pub fn last(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn horizon(&self) -> usize {
        self.cumulative.len()
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Regret accumulated in the 1-based inclusive round range `[from, to]`.
    pub fn window(&self, from: usize, to: usize) -> f64 {
        assert!(from >= 1 && from <= to && to <= self.cumulative.len());
        let before = if from == 1 {
            0.0
        } else {
            self.cumulative[from - 2]
        };
        self.cumulative[to - 1] - before
    }
}

/// Lipschitz condition of the expected reward restricted to the triggering set
/// of `s`: `|r(S,mu) - r(S,mu')| <= B * sum_{i in trig(S)} |mu_i - mu'_i|`.
pub fn check_lipschitz(
    inst: &Instance,
    s: &SuperArm,
    mu: &MeanVector,
    mu_prime: &MeanVector,
    b: f64,
) -> Result<bool> {
    if b <= 0.0 {
        return Err(Error::arg("Lipschitz constant must be positive"));
    }
    check_same_len(inst, mu, mu_prime)?;
    let lhs = (inst.expected_reward(s, mu)? - inst.expected_reward(s, mu_prime)?).abs();
    let l1: f64 = inst
        .triggering_set(s)?
        .into_iter()
        .map(|a| (mu.get(a) - mu_prime.get(a)).abs())
        .sum();
    Ok(lhs <= b * l1 + CLOSED_FORM_TOL)
}

/// Monotonicity: `mu <= mu'` componentwise implies `r(S,mu) <= r(S,mu')`.
pub fn check_monotonicity(
    inst: &Instance,
    s: &SuperArm,
    mu: &MeanVector,
    mu_prime: &MeanVector,
) -> Result<bool> {
    check_same_len(inst, mu, mu_prime)?;
    if let Some(i) = (0..mu.len()).find(|&i| mu[i] > mu_prime[i]) {
        return Err(Error::arg(format!(
            "monotonicity precondition violated at arm {i}: {} > {}",
            mu[i], mu_prime[i]
        )));
    }
    Ok(inst.expected_reward(s, mu)? <= inst.expected_reward(s, mu_prime)? + CLOSED_FORM_TOL)
}

fn check_same_len(inst: &Instance, mu: &MeanVector, mu_prime: &MeanVector) -> Result<()> {
    let m = inst.num_arms();
    if mu.len() != m || mu_prime.len() != m {
        return Err(Error::arg(format!(
            "mean vectors have lengths {} and {}, instance has {m} arms",
            mu.len(),
            mu_prime.len()
        )));
    }
    Ok(())
}
