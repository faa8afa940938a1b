//! Probabilistic maximum coverage with a word-of-mouth effect.
//!
//! `K` of `V` items are advertised to all `W` users. Users inspect every
//! advertised item and, independently per (item, user) pair, each
//! unadvertised item with probability `p_star`. Base arms are (item, user)
//! pairs numbered `user * V + item`.

use rand::Rng;

use super::bernoulli;
use crate::error::{Error, Result};
use crate::model::{BaseArmId, Feedback, MeanVector, SuperArm};

#[derive(Debug, Clone, PartialEq)]
pub struct PmcInstance {
    items: usize,
    users: usize,
    k: usize,
    attraction: MeanVector,
    p_star: f64,
}

impl PmcInstance {
    pub fn new(items: usize, users: usize, k: usize, attraction: MeanVector, p_star: f64) -> Result<Self> {
        if items == 0 || users == 0 || k == 0 {
            return Err(Error::arg("PMC instance needs V, W, K >= 1"));
        }
        if k > items {
            return Err(Error::arg(format!("K = {k} exceeds item count {items}")));
        }
        if !(0.0..=1.0).contains(&p_star) {
            return Err(Error::arg(format!("word-of-mouth probability {p_star} outside [0,1]")));
        }
        if attraction.len() != items * users {
            return Err(Error::arg(format!(
                "attraction vector has {} entries, expected V*W = {}",
                attraction.len(),
                items * users
            )));
        }
        Ok(PmcInstance {
            items,
            users,
            k,
            attraction,
            p_star,
        })
    }

    /// Builds from a `V x W` matrix indexed `[item][user]`.
    pub fn from_matrix(matrix: &[Vec<f64>], k: usize, p_star: f64) -> Result<Self> {
        let items = matrix.len();
        let users = matrix.first().map_or(0, Vec::len);
        if matrix.iter().any(|row| row.len() != users) {
            return Err(Error::arg("ragged attraction matrix"));
        }
        let mut flat = vec![0.0; items * users];
        for (i, row) in matrix.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                flat[j * items + i] = p;
            }
        }
        Self::new(items, users, k, MeanVector::new(flat)?, p_star)
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    pub fn attraction(&self) -> &MeanVector {
        &self.attraction
    }

    pub fn num_arms(&self) -> usize {
        self.items * self.users
    }

    pub fn arm(&self, item: usize, user: usize) -> BaseArmId {
        BaseArmId(user * self.items + item)
    }

    /// Validates `s` and returns an advertised-item mask.
    pub fn advertised(&self, s: &SuperArm) -> Result<Vec<bool>> {
        let SuperArm::ItemSubset(set) = s else {
            return Err(Error::arg(format!("PMC instance cannot play a {}", s.kind())));
        };
        if set.len() != self.k {
            return Err(Error::arg(format!("subset has {} items, expected K = {}", set.len(), self.k)));
        }
        let mut mask = vec![false; self.items];
        for &i in set {
            if i >= self.items {
                return Err(Error::arg(format!("subset names unknown item {i}")));
            }
            if std::mem::replace(&mut mask[i], true) {
                return Err(Error::arg(format!("subset repeats item {i}")));
            }
        }
        Ok(mask)
    }

    /// Expected number of users who like at least one inspected item.
    pub fn reward(&self, s: &SuperArm, theta: &MeanVector) -> Result<f64> {
        let adv = self.advertised(s)?;
        let th = theta.values();
        let total = (0..self.users)
            .map(|j| {
                let row = &th[j * self.items..(j + 1) * self.items];
                let miss: f64 = row
                    .iter()
                    .zip(&adv)
                    .map(|(&p, &a)| 1.0 - if a { p } else { self.p_star * p })
                    .product();
                1.0 - miss
            })
            .sum();
        Ok(total)
    }

    pub fn triggering_prob(&self, s: &SuperArm, arm: BaseArmId) -> Result<f64> {
        let adv = self.advertised(s)?;
        if arm.0 >= self.num_arms() {
            return Err(Error::arg(format!("{arm} out of range")));
        }
        Ok(if adv[arm.0 % self.items] { 1.0 } else { self.p_star })
    }

    pub fn triggering_set(&self, s: &SuperArm) -> Result<Vec<BaseArmId>> {
        let adv = self.advertised(s)?;
        Ok((0..self.num_arms())
            .filter(|&a| self.p_star > 0.0 || adv[a % self.items])
            .map(BaseArmId)
            .collect())
    }

    /// Simulates one round, user-major and item-minor.
    pub fn step<R: Rng + ?Sized>(&self, s: &SuperArm, round: u64, rng: &mut R) -> Result<(Feedback, f64)> {
        let adv = self.advertised(s)?;
        let mut fb = Feedback::new(round);
        let mut reward = 0.0;
        for j in 0..self.users {
            let mut liked = false;
            for (i, &advertised) in adv.iter().enumerate() {
                if advertised || bernoulli(rng, self.p_star) {
                    let arm = BaseArmId(j * self.items + i);
                    let x = bernoulli(rng, self.attraction[arm.0]);
                    liked |= x;
                    fb.push(arm, if x { 1.0 } else { 0.0 });
                }
            }
            if liked {
                reward += 1.0;
            }
        }
        Ok((fb, reward))
    }
}

pub fn pmc_reward(inst: &PmcInstance, s: &SuperArm, theta: &MeanVector) -> Result<f64> {
    inst.reward(s, theta)
}

pub fn pmc_step<R: Rng + ?Sized>(inst: &PmcInstance, s: &SuperArm, rng: &mut R) -> Result<(Feedback, f64)> {
    inst.step(s, 0, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn word_of_mouth_closed_form() {
        let inst = PmcInstance::from_matrix(&[vec![0.5], vec![0.7]], 1, 0.0).unwrap();
        let s = SuperArm::ItemSubset(vec![0]);
        assert!((inst.reward(&s, inst.attraction()).unwrap() - 0.5).abs() < 1e-12);
        let inst = PmcInstance::from_matrix(&[vec![0.5], vec![0.7]], 1, 1.0).unwrap();
        assert!((inst.reward(&s, inst.attraction()).unwrap() - 0.85).abs() < 1e-12);
    }

    #[test]
    fn feedback_size_extremes() {
        let m: Vec<Vec<f64>> = (0..5).map(|i| vec![0.1 * i as f64; 3]).collect();
        let s = SuperArm::ItemSubset(vec![1, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let none = PmcInstance::from_matrix(&m, 2, 0.0).unwrap();
        assert_eq!(none.step(&s, 1, &mut rng).unwrap().0.len(), 6);
        let all = PmcInstance::from_matrix(&m, 2, 1.0).unwrap();
        assert_eq!(all.step(&s, 1, &mut rng).unwrap().0.len(), 15);
        assert_eq!(none.triggering_set(&s).unwrap().len(), 6);
        assert_eq!(all.triggering_set(&s).unwrap().len(), 15);
    }

    #[test]
    fn rejects_bad_subsets() {
        let inst = PmcInstance::from_matrix(&[vec![0.5], vec![0.7], vec![0.1]], 2, 0.0).unwrap();
        let mu = inst.attraction().clone();
        assert!(inst.reward(&SuperArm::ItemSubset(vec![0]), &mu).is_err());
        assert!(inst.reward(&SuperArm::ItemSubset(vec![0, 0]), &mu).is_err());
        assert!(inst.reward(&SuperArm::ItemSubset(vec![0, 3]), &mu).is_err());
        assert!(PmcInstance::from_matrix(&[vec![0.5]], 1, 1.5).is_err());
    }
}
