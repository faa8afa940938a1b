use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{MeanVector, SuperArm};

/// Larger value first, lower index on ties.
#[inline]
pub(crate) fn desc_then_index(values: &[f64], a: usize, b: usize) -> Ordering {
    values[b].total_cmp(&values[a]).then(a.cmp(&b))
}

/// For every user, the `k` items with the largest `theta`, ranked in
/// decreasing order with ties to the lowest item index. `theta` is laid out
/// `user * items + item`.
///
/// Both cascading rewards of a user depend only on which items are listed
/// and increase in each listed item's parameter, so this is exact for both
/// forms.
pub fn topk_oracle(theta: &MeanVector, items: usize, users: usize, k: usize) -> Result<SuperArm> {
    if k > items {
        return Err(Error::arg(format!("K = {k} exceeds item count {items}")));
    }
    if theta.len() != items * users {
        return Err(Error::arg(format!(
            "parameter vector has {} entries, expected V*W = {}",
            theta.len(),
            items * users
        )));
    }
    let mut order: Vec<usize> = Vec::with_capacity(items);
    let lists = (0..users)
        .map(|j| {
            let col = &theta.values()[j * items..(j + 1) * items];
            order.clear();
            order.extend(0..items);
            if k < items {
                order.select_nth_unstable_by(k, |&a, &b| desc_then_index(col, a, b));
            }
            let top = &mut order[..k];
            top.sort_unstable_by(|&a, &b| desc_then_index(col, a, b));
            top.to_vec()
        })
        .collect();
    Ok(SuperArm::RankedLists(lists))
}
