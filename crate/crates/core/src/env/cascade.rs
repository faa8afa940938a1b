//! Cascading click model over `W` users, each shown a ranked list of `K` of
//! `V` items. Base arms are (item, user) pairs, numbered `user * V + item`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bernoulli;
use crate::error::{Error, Result};
use crate::model::{BaseArmId, Feedback, MeanVector, SuperArm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CascadeForm {
    /// A user clicks the first attractive item; reward counts users who click.
    Disjunctive,
    /// A user reports the first unattractive item; reward counts users whose
    /// whole list is attractive.
    Conjunctive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadingInstance {
    items: usize,
    users: usize,
    list_len: usize,
    form: CascadeForm,
    attraction: MeanVector,
}

impl CascadingInstance {
    /// `attraction[user * items + item]` is the probability that `user` finds
    /// `item` attractive.
    pub fn new(
        items: usize,
        users: usize,
        list_len: usize,
        form: CascadeForm,
        attraction: MeanVector,
    ) -> Result<Self> {
        if items == 0 || users == 0 || list_len == 0 {
            return Err(Error::arg("cascading instance needs V, W, K >= 1"));
        }
        if list_len > items {
            return Err(Error::arg(format!("list length {list_len} exceeds item count {items}")));
        }
        if attraction.len() != items * users {
            return Err(Error::arg(format!(
                "attraction vector has {} entries, expected V*W = {}",
                attraction.len(),
                items * users
            )));
        }
        Ok(CascadingInstance {
            items,
            users,
            list_len,
            form,
            attraction,
        })
    }

    /// Builds from a `V x W` matrix indexed `[item][user]`.
    pub fn from_matrix(
        matrix: &[Vec<f64>],
        list_len: usize,
        form: CascadeForm,
    ) -> Result<Self> {
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
        Self::new(items, users, list_len, form, MeanVector::new(flat)?)
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn list_len(&self) -> usize {
        self.list_len
    }

    pub fn form(&self) -> CascadeForm {
        self.form
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

    /// Inverse of [`arm`](Self::arm): `(item, user)`.
    pub fn locate(&self, arm: BaseArmId) -> (usize, usize) {
        (arm.0 % self.items, arm.0 / self.items)
    }

    pub fn lists<'a>(&self, s: &'a SuperArm) -> Result<&'a [Vec<usize>]> {
        let SuperArm::RankedLists(lists) = s else {
            return Err(Error::arg(format!("cascading instance cannot play a {}", s.kind())));
        };
        if lists.len() != self.users {
            return Err(Error::arg(format!(
                "expected {} ranked lists, got {}",
                self.users,
                lists.len()
            )));
        }
        for (j, list) in lists.iter().enumerate() {
            if list.len() != self.list_len {
                return Err(Error::arg(format!(
                    "list of user {j} has length {}, expected {}",
                    list.len(),
                    self.list_len
                )));
            }
            for (k, &item) in list.iter().enumerate() {
                if item >= self.items {
                    return Err(Error::arg(format!("user {j} list names unknown item {item}")));
                }
                if list[..k].contains(&item) {
                    return Err(Error::arg(format!("user {j} list repeats item {item}")));
                }
            }
        }
        Ok(lists)
    }

    /// Closed-form expected reward of `s` under attraction probabilities `theta`.
    pub fn reward(&self, s: &SuperArm, theta: &MeanVector) -> Result<f64> {
        let lists = self.lists(s)?;
        let th = theta.values();
        let total = lists
            .iter()
            .enumerate()
            .map(|(j, list)| {
                let base = j * self.items;
                match self.form {
                    CascadeForm::Disjunctive => {
                        1.0 - list.iter().map(|&i| 1.0 - th[base + i]).product::<f64>()
                    }
                    CascadeForm::Conjunctive => list.iter().map(|&i| th[base + i]).product(),
                }
            })
            .sum();
        Ok(total)
    }

    /// Probability that `arm` is observed when `s` is played.
    pub fn triggering_prob(&self, s: &SuperArm, arm: BaseArmId, theta: &MeanVector) -> Result<f64> {
        let lists = self.lists(s)?;
        if arm.0 >= self.num_arms() {
            return Err(Error::arg(format!("{arm} out of range")));
        }
        let (item, user) = self.locate(arm);
        let list = &lists[user];
        let Some(pos) = list.iter().position(|&i| i == item) else {
            return Ok(0.0);
        };
        let base = user * self.items;
        Ok(list[..pos]
            .iter()
            .map(|&i| match self.form {
                CascadeForm::Disjunctive => 1.0 - theta[base + i],
                CascadeForm::Conjunctive => theta[base + i],
            })
            .product())
    }

    pub fn triggering_set(&self, s: &SuperArm) -> Result<Vec<BaseArmId>> {
        let lists = self.lists(s)?;
        Ok(lists
            .iter()
            .enumerate()
            .flat_map(|(j, list)| list.iter().map(move |&i| BaseArmId(j * self.items + i)))
            .collect())
    }

    /// Simulates one round. Users are processed in order and each list in
    /// rank order, drawing attractions until the cascade stops.
    pub fn step<R: Rng + ?Sized>(&self, s: &SuperArm, round: u64, rng: &mut R) -> Result<(Feedback, f64)> {
        let lists = self.lists(s)?;
        let mut fb = Feedback::new(round);
        let mut reward = 0.0;
        for (j, list) in lists.iter().enumerate() {
            let base = j * self.items;
            let mut stopped = false;
            for &i in list {
                let arm = BaseArmId(base + i);
                let attracted = bernoulli(rng, self.attraction[arm.0]);
                fb.push(arm, if attracted { 1.0 } else { 0.0 });
                match self.form {
                    CascadeForm::Disjunctive if attracted => {
                        stopped = true;
                        break;
                    }
                    CascadeForm::Conjunctive if !attracted => {
                        stopped = true;
                        break;
                    }
                    _ => {}
                }
            }
            let success = match self.form {
                CascadeForm::Disjunctive => stopped,
                CascadeForm::Conjunctive => !stopped,
            };
            if success {
                reward += 1.0;
            }
        }
        Ok((fb, reward))
    }
}

/// Cascading reward of `s` under `theta`. See [`CascadingInstance::reward`].
pub fn casc_reward(inst: &CascadingInstance, s: &SuperArm, theta: &MeanVector) -> Result<f64> {
    inst.reward(s, theta)
}

pub fn casc_triggering_prob(
    inst: &CascadingInstance,
    s: &SuperArm,
    arm: BaseArmId,
    theta: &MeanVector,
) -> Result<f64> {
    inst.triggering_prob(s, arm, theta)
}

pub fn casc_step<R: Rng + ?Sized>(
    inst: &CascadingInstance,
    s: &SuperArm,
    rng: &mut R,
) -> Result<(Feedback, f64)> {
    inst.step(s, 0, rng)
}
