//! Count-based learners: CUCB, KL-UCB and Gaussian-perturbation Thompson
//! sampling all work from per-arm observation counts and outcome sums.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Feedback, MeanVector};

/// Default exploration constant `c` in `mu_hat + sqrt(c ln t / N)`.
pub const CUCB_CONSTANT: f64 = 1.5;

/// Bisection tolerance of [`klucb_index`].
pub const KLUCB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    counts: Vec<u64>,
    sums: Vec<f64>,
    /// Current round, 1-based.
    pub t: u64,
}

impl UcbState {
    pub fn new(m: usize) -> Self {
        UcbState {
            counts: vec![0; m],
            sums: vec![0.0; m],
            t: 1,
        }
    }

    /// Explicit statistics, mainly for tests.
    pub fn from_stats(counts: Vec<u64>, sums: Vec<f64>, t: u64) -> Result<Self> {
        if counts.len() != sums.len() {
            return Err(Error::arg("counts and sums must have equal length"));
        }
        for (i, (&n, &s)) in counts.iter().zip(&sums).enumerate() {
            if s < 0.0 || s > n as f64 {
                return Err(Error::arg(format!("arm {i}: outcome sum {s} not in [0, {n}]")));
            }
        }
        Ok(UcbState { counts, sums, t })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    /// Empirical mean, `None` for an arm never observed.
    pub fn mean(&self, i: usize) -> Option<f64> {
        (self.counts[i] > 0).then(|| self.sums[i] / self.counts[i] as f64)
    }

    pub fn observe(&mut self, fb: &Feedback) -> Result<()> {
        for &(arm, x) in &fb.entries {
            if arm.0 >= self.len() {
                return Err(Error::arg(format!("feedback names {arm}, learner has {} arms", self.len())));
            }
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::arg(format!("outcome {x} of {arm} outside [0,1]")));
            }
        }
        for &(arm, x) in &fb.entries {
            self.counts[arm.0] += 1;
            self.sums[arm.0] += x;
        }
        Ok(())
    }
}

/// `min{1, mu_hat + sqrt(c ln t / N)}`; 1 for an unobserved arm.
pub fn cucb_index(mu_hat: f64, n: u64, t: f64, c: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    (mu_hat + (c * t.ln() / n as f64).sqrt()).min(1.0)
}

/// CUCB indices of every arm at round `state.t`.
pub fn cucb_indices(state: &UcbState) -> Result<MeanVector> {
    cucb_indices_with(state, CUCB_CONSTANT)
}

pub fn cucb_indices_with(state: &UcbState, c: f64) -> Result<MeanVector> {
    if state.t < 1 {
        return Err(Error::arg("UCB index needs t >= 1"));
    }
    let t = state.t as f64;
    Ok(MeanVector::clamped(
        (0..state.len())
            .map(|i| cucb_index(state.mean(i).unwrap_or(0.0), state.count(i), t, c))
            .collect(),
    ))
}

/// Bernoulli KL divergence `kl(p, q)` with `0 ln 0 = 0`.
pub fn kl_bernoulli(p: f64, q: f64) -> f64 {
    fn term(x: f64, y: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else if y == 0.0 {
            f64::INFINITY
        } else {
            x * (x / y).ln()
        }
    }
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Exploration budget `ln t + 3 ln ln t`, with the second term dropped
/// while it is negative.
pub fn klucb_threshold(t: u64) -> f64 {
    let lt = (t as f64).ln();
    lt + 3.0 * lt.ln().max(0.0)
}

/// Largest `q` in `[mu_hat, 1]` with `N kl(mu_hat, q) <= ln t + 3 ln ln t`,
/// by bisection to [`KLUCB_TOL`]. An unobserved arm (`n == 0`) has no index;
/// callers use 1.
pub fn klucb_index(mu_hat: f64, n: u64, t: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::arg("KL-UCB index undefined for an unobserved arm"));
    }
    if !(0.0..=1.0).contains(&mu_hat) {
        return Err(Error::arg(format!("empirical mean {mu_hat} outside [0,1]")));
    }
    if t < 1 {
        return Err(Error::arg("KL-UCB index needs t >= 1"));
    }
    let budget = klucb_threshold(t) / n as f64;
    if mu_hat >= 1.0 || kl_bernoulli(mu_hat, 1.0) <= budget {
        return Ok(1.0);
    }
    // kl(p, q) >= 2 (q - p)^2, so the root lies below p + sqrt(budget / 2)
    let (mut lo, mut hi) = (mu_hat, (mu_hat + (budget / 2.0).sqrt()).min(1.0));
    while hi - lo > KLUCB_TOL {
        let mid = 0.5 * (lo + hi);
        if kl_bernoulli(mu_hat, mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Perturbation scale used by Gaussian Thompson sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TsWidth {
    /// `max{ sqrt(mu(1-mu) ln(t+1) / (N+1)), ln(t+1) / (N+1) }`.
    #[default]
    VarianceAware,
    /// `sqrt(ln(t+1) / (N+1))`.
    Hoeffding,
}

pub fn ts_cascade_width(mu_hat: f64, n: u64, t: u64, form: TsWidth) -> f64 {
    let lt = ((t + 1) as f64).ln();
    let n1 = (n + 1) as f64;
    match form {
        TsWidth::VarianceAware => (mu_hat * (1.0 - mu_hat) * lt / n1).sqrt().max(lt / n1),
        TsWidth::Hoeffding => (lt / n1).sqrt(),
    }
}

/// `clip(mu_hat_i + z * width_i)` for a given shared standard-normal `z`.
pub fn ts_cascade_theta(state: &UcbState, z: f64, form: TsWidth) -> MeanVector {
    MeanVector::clamped(
        (0..state.len())
            .map(|i| {
                let mu = state.mean(i).unwrap_or(0.0);
                mu + z * ts_cascade_width(mu, state.count(i), state.t, form)
            })
            .collect(),
    )
}

/// Draws one shared `Z ~ N(0,1)` and perturbs every arm with it.
pub fn ts_cascade_sample<R: Rng + ?Sized>(state: &UcbState, form: TsWidth, rng: &mut R) -> MeanVector {
    let z: f64 = StandardNormal.sample(rng);
    ts_cascade_theta(state, z, form)
}
