//! Combinatorial Thompson sampling with independent Beta posteriors.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::env::bernoulli;
use crate::error::{Error, Result};
use crate::model::{Feedback, MeanVector};

/// Beta posterior parameters per base arm.
#[derive(Debug, Clone, PartialEq)]
pub struct CtsState {
    a: Vec<f64>,
    b: Vec<f64>,
    prior_a: f64,
    prior_b: f64,
}

impl CtsState {
    /// Uniform prior, `a_i = b_i = 1`.
    pub fn new(m: usize) -> Self {
        Self::with_prior(m, 1.0, 1.0).expect("unit prior is valid")
    }

    pub fn with_prior(m: usize, prior_a: f64, prior_b: f64) -> Result<Self> {
        if !(prior_a >= 1.0 && prior_b >= 1.0) {
            return Err(Error::arg(format!("Beta prior ({prior_a}, {prior_b}) must have both parameters >= 1")));
        }
        Ok(CtsState {
            a: vec![prior_a; m],
            b: vec![prior_b; m],
            prior_a,
            prior_b,
        })
    }

    /// Explicit posterior parameters, mainly for tests.
    pub fn from_params(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::arg("a and b must have equal length"));
        }
        if a.iter().chain(&b).any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::arg("Beta parameters must be positive and finite"));
        }
        Ok(CtsState {
            a,
            b,
            prior_a: 1.0,
            prior_b: 1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn posterior_mean(&self, i: usize) -> f64 {
        self.a[i] / (self.a[i] + self.b[i])
    }

    /// Number of Bernoulli updates absorbed by arm `i`.
    pub fn updates(&self, i: usize) -> f64 {
        self.a[i] + self.b[i] - self.prior_a - self.prior_b
    }
}

/// Draws `theta_i ~ Beta(a_i, b_i)` independently for every arm.
pub fn cts_sample<R: Rng + ?Sized>(state: &CtsState, rng: &mut R) -> MeanVector {
    let theta = state
        .a
        .iter()
        .zip(&state.b)
        .map(|(&a, &b)| {
            Beta::new(a, b)
                .expect("posterior parameters stay positive")
                .sample(rng)
        })
        .collect();
    MeanVector::clamped(theta)
}

/// Conjugate update with Bernoulli rounding of fractional outcomes. Outcomes
/// of exactly 0 or 1 are used as-is without touching `rng`.
pub fn cts_update<R: Rng + ?Sized>(state: &mut CtsState, fb: &Feedback, rng: &mut R) -> Result<()> {
    for &(arm, x) in &fb.entries {
        if arm.0 >= state.len() {
            return Err(Error::arg(format!("feedback names {arm}, learner has {} arms", state.len())));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::arg(format!("outcome {x} of {arm} outside [0,1]")));
        }
    }
    for &(arm, x) in &fb.entries {
        if bernoulli(rng, x) {
            state.a[arm.0] += 1.0;
        } else {
            state.b[arm.0] += 1.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BaseArmId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fb(entries: &[(usize, f64)]) -> Feedback {
        Feedback {
            round: 1,
            entries: entries.iter().map(|&(a, x)| (BaseArmId(a), x)).collect(),
        }
    }

    #[test]
    fn conjugate_updates() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = CtsState::new(2);
        cts_update(&mut s, &fb(&[(0, 1.0), (1, 0.0)]), &mut rng).unwrap();
        assert_eq!((s.a()[0], s.b()[0]), (2.0, 1.0));
        assert_eq!((s.a()[1], s.b()[1]), (1.0, 2.0));
        assert!((s.posterior_mean(0) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn binary_outcomes_leave_rng_untouched() {
        let mut used = ChaCha8Rng::seed_from_u64(9);
        let mut fresh = ChaCha8Rng::seed_from_u64(9);
        let mut s = CtsState::new(3);
        cts_update(&mut s, &fb(&[(0, 1.0), (1, 0.0), (2, 1.0)]), &mut used).unwrap();
        assert_eq!(used.random::<u64>(), fresh.random::<u64>());
    }

    #[test]
    fn invalid_feedback_is_rejected_atomically() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = CtsState::new(2);
        assert!(cts_update(&mut s, &fb(&[(0, 1.0), (1, 1.5)]), &mut rng).is_err());
        assert!(cts_update(&mut s, &fb(&[(0, 1.0), (4, 1.0)]), &mut rng).is_err());
        assert_eq!(s, CtsState::new(2));
    }

    #[test]
    fn concentrated_posterior_samples_high() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = CtsState::from_params(vec![1e6], vec![1.0]).unwrap();
        for _ in 0..100 {
            assert!(cts_sample(&s, &mut rng)[0] > 0.99);
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let s = CtsState::from_params(vec![2.0, 5.0, 1.0], vec![3.0, 1.0, 1.0]).unwrap();
        let a = cts_sample(&s, &mut ChaCha8Rng::seed_from_u64(11));
        let b = cts_sample(&s, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn prior_override_is_validated() {
        assert!(CtsState::with_prior(3, 0.5, 1.0).is_err());
        let s = CtsState::with_prior(3, 2.0, 5.0).unwrap();
        assert_eq!(s.updates(0), 0.0);
    }
}
