use crate::env::PmcInstance;
use crate::error::{Error, Result};
use crate::model::{MeanVector, SuperArm};

/// Default cap on the number of enumerated subsets.
pub const MAX_SUBSETS: u64 = 1_000_000;

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Exact maximizer of the word-of-mouth coverage reward over all size-`K`
/// item subsets, first in lexicographic order among ties.
///
/// The reward is `W - sum_j base_j * prod_{i in S} ratio_ij` with
/// `base_j = prod_i (1 - p* theta_ij)` and
/// `ratio_ij = (1 - theta_ij) / (1 - p* theta_ij)`, so the search carries one
/// partial product per user down a depth-first walk over combinations.
pub fn exhaustive_subset_oracle(theta: &MeanVector, inst: &PmcInstance) -> Result<SuperArm> {
    exhaustive_subset_oracle_capped(theta, inst, MAX_SUBSETS)
}

pub fn exhaustive_subset_oracle_capped(theta: &MeanVector, inst: &PmcInstance, max_subsets: u64) -> Result<SuperArm> {
    let (v, w, k) = (inst.items(), inst.users(), inst.k());
    let count = binomial(v, k);
    if count > max_subsets {
        return Err(Error::config(format!(
            "C({v},{k}) = {count} subsets exceeds the exhaustive limit {max_subsets}; use a greedy oracle instead"
        )));
    }
    if theta.len() != v * w {
        return Err(Error::arg(format!("parameter vector has {} entries, expected {}", theta.len(), v * w)));
    }
    let ps = inst.p_star();
    let th = theta.values();
    let mut base = vec![1.0; w];
    // item-major so each item's column is contiguous
    let mut ratio = vec![0.0; v * w];
    for j in 0..w {
        for i in 0..v {
            let t = th[j * v + i];
            let denom = 1.0 - ps * t;
            base[j] *= denom;
            ratio[i * w + j] = if denom > 0.0 { (1.0 - t) / denom } else { 1.0 };
        }
    }

    let mut search = Search {
        v,
        w,
        k,
        ratio: &ratio,
        levels: vec![vec![0.0; w]; k],
        chosen: Vec::with_capacity(k),
        best_miss: f64::INFINITY,
        best: Vec::new(),
    };
    search.levels[0].copy_from_slice(&base);
    search.descend(0, 0);
    Ok(SuperArm::ItemSubset(search.best))
}

struct Search<'a> {
    v: usize,
    w: usize,
    k: usize,
    ratio: &'a [f64],
    /// `levels[d]` holds `base_j * prod(ratio of the d items chosen so far)`.
    levels: Vec<Vec<f64>>,
    chosen: Vec<usize>,
    best_miss: f64,
    best: Vec<usize>,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, start: usize) {
        let remaining = self.k - depth;
        let w = self.w;
        for i in start..=(self.v - remaining) {
            let col = &self.ratio[i * w..(i + 1) * w];
            if remaining == 1 {
                let miss: f64 = self.levels[depth].iter().zip(col).map(|(a, b)| a * b).sum();
                if miss < self.best_miss {
                    self.best_miss = miss;
                    self.best.clear();
                    self.best.extend_from_slice(&self.chosen);
                    self.best.push(i);
                }
            } else {
                let (lo, hi) = self.levels.split_at_mut(depth + 1);
                for ((next, &cur), &r) in hi[0].iter_mut().zip(&lo[depth]).zip(col) {
                    *next = cur * r;
                }
                self.chosen.push(i);
                self.descend(depth + 1, i + 1);
                self.chosen.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(30, 3), 4060);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(200, 100), u64::MAX);
    }

    #[test]
    fn full_set_when_k_equals_v() {
        let inst = PmcInstance::from_matrix(&[vec![0.1], vec![0.2], vec![0.3]], 3, 0.1).unwrap();
        let s = exhaustive_subset_oracle(inst.attraction(), &inst).unwrap();
        assert_eq!(s, SuperArm::ItemSubset(vec![0, 1, 2]));
    }

    #[test]
    fn single_user_argmax() {
        let inst = PmcInstance::from_matrix(&[vec![0.2], vec![0.9], vec![0.4]], 1, 0.0).unwrap();
        let s = exhaustive_subset_oracle(inst.attraction(), &inst).unwrap();
        assert_eq!(s, SuperArm::ItemSubset(vec![1]));
    }

    #[test]
    fn certain_word_of_mouth_is_a_full_tie() {
        let m = vec![vec![1.0, 0.3], vec![0.5, 0.6], vec![0.2, 1.0]];
        let inst = PmcInstance::from_matrix(&m, 2, 1.0).unwrap();
        let s = exhaustive_subset_oracle(inst.attraction(), &inst).unwrap();
        assert_eq!(s, SuperArm::ItemSubset(vec![0, 1]));
    }

    #[test]
    fn guard_refuses_huge_enumerations() {
        let m = vec![vec![0.1]; 40];
        let inst = PmcInstance::from_matrix(&m, 10, 0.0).unwrap();
        let err = exhaustive_subset_oracle(inst.attraction(), &inst).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
