//! Quick end-to-end checks of the fast code paths against brute force and
//! Monte Carlo. Run by `ctslab selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generators::make_blb_instance;
use crate::env::{exact_spread, im_spread, CascadeForm, CascadingInstance, InfluenceGraph, Instance, PmcInstance, RoutingInstance};
use crate::error::Result;
use crate::model::{MeanVector, SuperArm};
use crate::oracle::{exhaustive_subset_oracle, reliable_path_oracle, rr_greedy_oracle, topk_oracle, TimParams};
use crate::policy::klucb_index;
use crate::reference;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

const MC_SAMPLES: usize = 100_000;

fn mc_agrees(inst: &Instance, s: &SuperArm, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let exact = inst.expected_reward(s, &inst.means())?;
    let mut xs = Vec::with_capacity(MC_SAMPLES);
    for t in 0..MC_SAMPLES {
        xs.push(inst.step(s, t as u64 + 1, rng)?.1);
    }
    let (m, sd) = reference::mean_std(&xs);
    Ok((
        reference::within_three_se(m, sd, xs.len(), exact),
        format!("closed form {exact:.5}, simulated {m:.5}"),
    ))
}

fn random_means(rng: &mut ChaCha8Rng, m: usize) -> Result<MeanVector> {
    MeanVector::new((0..m).map(|_| rng.random::<f64>()).collect())
}

fn cascade_mc(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let c = CascadingInstance::new(5, 2, 3, CascadeForm::Disjunctive, random_means(rng, 10)?)?;
    let s = SuperArm::RankedLists(vec![vec![0, 1, 2], vec![4, 3, 2]]);
    mc_agrees(&Instance::Cascade(c), &s, rng)
}

fn pmc_mc(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let p = PmcInstance::new(5, 3, 2, random_means(rng, 15)?, 0.1)?;
    mc_agrees(&Instance::Pmc(p), &SuperArm::ItemSubset(vec![1, 3]), rng)
}

fn influence_mc(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let g = InfluenceGraph::from_triples(
        5,
        &[(0, 1, 0.5), (0, 2, 0.3), (1, 3, 0.6), (2, 3, 0.7), (3, 4, 0.4), (4, 0, 0.2)],
    )?;
    let exact = exact_spread(&g, &[0], g.probabilities().values())?;
    let est = im_spread(&g, &[0], MC_SAMPLES, rng)?;
    // spread is at most 5 nodes, so its variance is at most 25 / 4
    let se = (25.0 / 4.0 / MC_SAMPLES as f64).sqrt();
    Ok(((est - exact).abs() <= 3.0 * se, format!("exact {exact:.5}, simulated {est:.5}")))
}

fn routing_mc(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let r = RoutingInstance::new(
        4,
        vec![(0, 1), (1, 3), (0, 2), (2, 3)],
        MeanVector::new(vec![0.9, 0.8, 0.7, 0.95])?,
        0,
        3,
    )?;
    mc_agrees(&Instance::Routing(r), &SuperArm::Path(vec![0, 1]), rng)
}

fn topk_matches(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let theta = random_means(rng, 6)?;
    let SuperArm::RankedLists(lists) = topk_oracle(&theta, 6, 1, 3)? else {
        unreachable!()
    };
    let got = reference::disjunctive_list_value(theta.values(), &lists[0]);
    let best = reference::ordered_tuples(6, 3)
        .iter()
        .map(|t| reference::disjunctive_list_value(theta.values(), t))
        .fold(0.0, f64::max);
    Ok(((got - best).abs() < 1e-12, format!("oracle {got:.6}, best of 120 lists {best:.6}")))
}

fn subset_matches(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let p = PmcInstance::new(6, 4, 2, random_means(rng, 24)?, 0.1)?;
    let theta = random_means(rng, 24)?;
    let SuperArm::ItemSubset(s) = exhaustive_subset_oracle(&theta, &p)? else {
        unreachable!()
    };
    let got = reference::pmc_value(&p, theta.values(), &s);
    let (_, best) = reference::pmc_brute_force(&p, theta.values());
    Ok(((got - best).abs() < 1e-12, format!("oracle {got:.6}, brute force {best:.6}")))
}

fn path_matches(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut links = Vec::new();
    for a in 0..8 {
        for b in a + 1..8 {
            if b == a + 1 || rng.random::<f64>() < 0.4 {
                links.push((a, b));
            }
        }
    }
    let rel = MeanVector::new((0..links.len()).map(|_| 0.05 + 0.95 * rng.random::<f64>()).collect())?;
    let r = RoutingInstance::new(8, links, rel.clone(), 0, 7)?;
    let SuperArm::Path(p) = reliable_path_oracle(&r, &rel)? else {
        unreachable!()
    };
    let got: f64 = p.iter().map(|&e| rel.values()[e]).product();
    let best = reference::best_path_reliability(&r, rel.values());
    Ok(((got - best).abs() < 1e-12, format!("oracle {got:.6}, best simple path {best:.6}")))
}

fn klucb_matches() -> Result<(bool, String)> {
    let fast = klucb_index(0.3, 50, 1000)?;
    let grid = reference::klucb_grid(0.3, 50, 1000, 1e-7);
    Ok(((fast - grid).abs() <= 1e-6, format!("bisection {fast:.8}, grid {grid:.8}")))
}

fn rr_greedy_ratio(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let params = TimParams::default();
    let mut ok = 0;
    for _ in 0..20 {
        let mut triples = Vec::new();
        for a in 0..8 {
            for b in 0..8 {
                if a != b && triples.len() < 16 && rng.random::<f64>() < 0.2 {
                    triples.push((a, b, 0.1 + 0.8 * rng.random::<f64>()));
                }
            }
        }
        let g = InfluenceGraph::from_triples(8, &triples)?;
        let probs = g.probabilities();
        let out = rr_greedy_oracle(&g, &probs, 2, &params, rng)?;
        let table = reference::Realizations::enumerate(&g, probs.values());
        let got = table.spread(&out.seeds);
        let (_, opt) = table.best_seed_set(8, 2);
        if got >= params.alpha() * opt - 1e-9 {
            ok += 1;
        }
    }
    Ok((ok >= 19, format!("{ok}/20 graphs within the approximation ratio")))
}

fn blb_examples() -> Result<(bool, String)> {
    let c = make_blb_instance(16, 2, 0.2, 0.15)?;
    let inst = Instance::Cascade(c);
    let opt = inst.expected_reward(&SuperArm::RankedLists(vec![vec![0, 1]]), &inst.means())?;
    let worst = inst.expected_reward(&SuperArm::RankedLists(vec![vec![2, 3]]), &inst.means())?;
    let gap = opt - worst;
    Ok((
        (opt - 0.36).abs() < 1e-12 && (gap - 0.2625).abs() < 1e-12,
        format!("optimum {opt:.4}, worst-list gap {gap:.4}"),
    ))
}

/// Runs every check with a fixed seed.
pub fn selftest() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    type Case<'a> = (&'static str, Box<dyn FnOnce(&mut ChaCha8Rng) -> Result<(bool, String)> + 'a>);
    let cases: Vec<Case> = vec![
        ("cascade reward, closed form vs simulation", Box::new(cascade_mc)),
        ("coverage reward, closed form vs simulation", Box::new(pmc_mc)),
        ("influence spread, exact vs simulation", Box::new(influence_mc)),
        ("routing reward, closed form vs simulation", Box::new(routing_mc)),
        ("top-K lists vs all ordered lists", Box::new(topk_matches)),
        ("exhaustive subset oracle vs brute force", Box::new(subset_matches)),
        ("reliable path vs all simple paths", Box::new(path_matches)),
        ("KL-UCB bisection vs grid search", Box::new(|_: &mut ChaCha8Rng| klucb_matches())),
        ("RR greedy approximation ratio", Box::new(rr_greedy_ratio)),
        ("single-user list values", Box::new(|_: &mut ChaCha8Rng| blb_examples())),
    ];
    cases
        .into_iter()
        .map(|(name, f)| match f(&mut rng) {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check {
                name,
                passed: false,
                detail: e.to_string(),
            },
        })
        .collect()
}
