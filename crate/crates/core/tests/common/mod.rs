//! Seeded checks shared by the topic test files and the acceptance runner.
//! Every check returns `Ok(detail)` on success and `Err(detail)` otherwise.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctslab::env::{CascadeForm, CascadingInstance, InfluenceGraph, InfluenceInstance, Instance, PmcInstance, RoutingInstance};
use ctslab::harness::{make_blb_instance, run_experiment, EnvSpec, RunConfig};
use ctslab::model::{check_lipschitz, check_monotonicity, BaseArmId, Feedback, MeanVector, SuperArm};
use ctslab::oracle::{exhaustive_subset_oracle, reliable_path_oracle, rr_greedy_oracle, topk_oracle, TimParams};
use ctslab::policy::{cts_update, klucb_index, CtsState, PolicyKind, PolicySpec};
use ctslab::reference::{self, mean_std, Realizations};

pub type Outcome = std::result::Result<String, String>;

pub const MC_DRAWS: usize = 100_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_means(rng: &mut ChaCha8Rng, m: usize) -> MeanVector {
    MeanVector::new((0..m).map(|_| rng.random::<f64>()).collect()).unwrap()
}

/// Collects failures of a batch of named sub-checks into one outcome.
pub fn collect(parts: Vec<(String, bool)>) -> Outcome {
    let failed: Vec<&str> = parts.iter().filter(|p| !p.1).map(|p| p.0.as_str()).collect();
    if failed.is_empty() {
        Ok(format!("{} sub-checks", parts.len()))
    } else {
        Err(format!("{} of {} failed: {}", failed.len(), parts.len(), failed.join("; ")))
    }
}

// ---------- fixed small instances ----------

pub fn cascade_instance(form: CascadeForm, seed: u64) -> (Instance, SuperArm) {
    let mut r = rng(seed);
    let c = CascadingInstance::new(5, 2, 3, form, uniform_means(&mut r, 10)).unwrap();
    (Instance::Cascade(c), SuperArm::RankedLists(vec![vec![0, 1, 2], vec![4, 3, 2]]))
}

pub fn pmc_instance(seed: u64) -> (Instance, SuperArm) {
    let mut r = rng(seed);
    let p = PmcInstance::new(5, 3, 2, uniform_means(&mut r, 15), 0.05).unwrap();
    (Instance::Pmc(p), SuperArm::ItemSubset(vec![1, 3]))
}

/// Five nodes, every edge live with probability one half.
pub fn half_graph() -> InfluenceGraph {
    InfluenceGraph::from_triples(
        5,
        &[(0, 1, 0.5), (0, 2, 0.5), (1, 3, 0.5), (2, 3, 0.5), (3, 4, 0.5), (4, 0, 0.5)],
    )
    .unwrap()
}

pub fn influence_instance() -> (Instance, SuperArm) {
    let inst = InfluenceInstance::new(half_graph(), 1).unwrap();
    (Instance::Influence(inst), SuperArm::SeedSet(vec![0]))
}

/// Two parallel two-hop routes from 0 to 3.
pub fn routing_instance(seed: u64) -> (Instance, SuperArm) {
    let mut r = rng(seed);
    let rel = MeanVector::new((0..4).map(|_| 0.3 + 0.7 * r.random::<f64>()).collect()).unwrap();
    let inst = RoutingInstance::new(4, vec![(0, 1), (1, 3), (0, 2), (2, 3)], rel, 0, 3).unwrap();
    (Instance::Routing(inst), SuperArm::Path(vec![2, 3]))
}

pub fn all_instances() -> Vec<(&'static str, Instance, SuperArm)> {
    let (c1, s1) = cascade_instance(CascadeForm::Disjunctive, 11);
    let (c2, s2) = cascade_instance(CascadeForm::Conjunctive, 12);
    let (p, sp) = pmc_instance(13);
    let (i, si) = influence_instance();
    let (r, sr) = routing_instance(14);
    vec![
        ("disjunctive cascade", c1, s1),
        ("conjunctive cascade", c2, s2),
        ("coverage", p, sp),
        ("influence", i, si),
        ("routing", r, sr),
    ]
}

/// Expected reward computed without the crate's closed forms.
pub fn independent_reward(inst: &Instance, s: &SuperArm, mu: &[f64]) -> f64 {
    match (inst, s) {
        (Instance::Cascade(c), SuperArm::RankedLists(lists)) => lists
            .iter()
            .enumerate()
            .map(|(j, l)| {
                let probs: Vec<f64> = (0..c.items()).map(|i| mu[c.arm(i, j).0]).collect();
                match c.form() {
                    CascadeForm::Disjunctive => reference::disjunctive_list_value(&probs, l),
                    CascadeForm::Conjunctive => reference::conjunctive_list_value(&probs, l),
                }
            })
            .sum(),
        (Instance::Pmc(p), SuperArm::ItemSubset(items)) => reference::pmc_value(p, mu, items),
        (Instance::Influence(i), SuperArm::SeedSet(seeds)) => Realizations::enumerate(&i.graph, mu).spread(seeds),
        (Instance::Routing(_), SuperArm::Path(edges)) => edges.iter().map(|&e| mu[e]).product(),
        _ => panic!("super arm does not fit the instance"),
    }
}

/// Exact probability that each arm is observed, from first principles.
pub fn independent_triggering(inst: &Instance, s: &SuperArm) -> Vec<f64> {
    let mu = inst.means();
    let mu = mu.values();
    let mut out = vec![0.0; inst.num_arms()];
    match (inst, s) {
        (Instance::Cascade(c), SuperArm::RankedLists(lists)) => {
            for (j, l) in lists.iter().enumerate() {
                let mut reach = 1.0;
                for &i in l {
                    let a = c.arm(i, j).0;
                    out[a] = reach;
                    // the user keeps scanning after a miss (disjunctive) or a hit (conjunctive)
                    reach *= match c.form() {
                        CascadeForm::Disjunctive => 1.0 - mu[a],
                        CascadeForm::Conjunctive => mu[a],
                    };
                }
            }
        }
        (Instance::Pmc(p), SuperArm::ItemSubset(items)) => {
            for j in 0..p.users() {
                for i in 0..p.items() {
                    out[p.arm(i, j).0] = if items.contains(&i) { 1.0 } else { p.p_star() };
                }
            }
        }
        (Instance::Influence(i), SuperArm::SeedSet(seeds)) => {
            let table = Realizations::enumerate(&i.graph, mu);
            for (e, edge) in i.graph.edges().iter().enumerate() {
                out[e] = table
                    .weights
                    .iter()
                    .zip(&table.reach)
                    .filter(|(_, r)| seeds.iter().any(|&s| r[s] >> edge.src & 1 == 1))
                    .map(|(w, _)| w)
                    .sum();
            }
        }
        (Instance::Routing(_), SuperArm::Path(edges)) => {
            let mut reach = 1.0;
            for &e in edges {
                out[e] = reach;
                reach *= mu[e];
            }
        }
        _ => panic!("super arm does not fit the instance"),
    }
    out
}

// ---------- property suites ----------

/// Simulated mean reward within three standard errors of the closed form.
pub fn reward_agreement() -> Outcome {
    let mut r = rng(0xa11);
    let mut parts = Vec::new();
    for (name, inst, s) in all_instances() {
        let exact = inst.expected_reward(&s, &inst.means()).unwrap();
        let independent = independent_reward(&inst, &s, inst.means().values());
        let xs: Vec<f64> = (0..MC_DRAWS).map(|t| inst.step(&s, t as u64 + 1, &mut r).unwrap().1).collect();
        let (m, sd) = mean_std(&xs);
        let ok = (exact - independent).abs() < 1e-12 && reference::within_three_se(m, sd, xs.len(), exact);
        parts.push((format!("{name}: closed form {exact:.5}, simulated {m:.5}"), ok));
    }
    collect(parts)
}

/// Empirical observation frequency of every arm within three binomial
/// standard errors of its exact triggering probability.
pub fn triggering_agreement() -> Outcome {
    let mut r = rng(0x7e1);
    let mut parts = Vec::new();
    for (name, inst, s) in all_instances() {
        let exact = independent_triggering(&inst, &s);
        let mut hits = vec![0usize; inst.num_arms()];
        for t in 0..MC_DRAWS {
            let (fb, _) = inst.step(&s, t as u64 + 1, &mut r).unwrap();
            for a in fb.arms() {
                hits[a.0] += 1;
            }
        }
        for (a, (&h, &p)) in hits.iter().zip(&exact).enumerate() {
            let lib = inst.triggering_prob(&s, BaseArmId(a), &inst.means()).unwrap();
            let freq = h as f64 / MC_DRAWS as f64;
            let se = (p * (1.0 - p) / MC_DRAWS as f64).sqrt();
            let ok = (lib - p).abs() < 1e-12 && (freq - p).abs() <= 3.0 * se;
            if !ok {
                parts.push((format!("{name} arm {a}: exact {p:.5}, library {lib:.5}, observed {freq:.5}"), false));
            } else {
                parts.push((String::new(), true));
            }
        }
    }
    collect(parts)
}

/// Top-K lists against every ordered K-tuple, for both click models.
pub fn topk_equivalence() -> Outcome {
    let mut r = rng(0x70c);
    let tuples = reference::ordered_tuples(6, 3);
    let mut parts = Vec::new();
    for trial in 0..50 {
        let theta = uniform_means(&mut r, 12);
        let SuperArm::RankedLists(lists) = topk_oracle(&theta, 6, 2, 3).unwrap() else {
            return Err("top-K oracle returned a non-list action".into());
        };
        for (j, list) in lists.iter().enumerate() {
            let probs: Vec<f64> = (0..6).map(|i| theta.values()[j * 6 + i]).collect();
            let got = reference::disjunctive_list_value(&probs, list);
            let best = tuples.iter().map(|t| reference::disjunctive_list_value(&probs, t)).fold(0.0, f64::max);
            parts.push((format!("trial {trial} user {j}: {got} vs {best}"), (got - best).abs() < 1e-12));
            // the conjunctive value of a list does not depend on its order,
            // and its maximizer is again the K most attractive items
            let got_c = reference::conjunctive_list_value(&probs, list);
            let best_c = tuples.iter().map(|t| reference::conjunctive_list_value(&probs, t)).fold(0.0, f64::max);
            parts.push((format!("trial {trial} user {j} conjunctive"), (got_c - best_c).abs() < 1e-12));
        }
    }
    collect(parts)
}

pub fn subset_equivalence() -> Outcome {
    let mut r = rng(0x5b5);
    let mut parts = Vec::new();
    for trial in 0..50 {
        let p = PmcInstance::new(6, 4, 2, uniform_means(&mut r, 24), 0.1).unwrap();
        let theta = uniform_means(&mut r, 24);
        let SuperArm::ItemSubset(s) = exhaustive_subset_oracle(&theta, &p).unwrap() else {
            return Err("subset oracle returned a non-subset action".into());
        };
        let got = reference::pmc_value(&p, theta.values(), &s);
        let (_, best) = reference::pmc_brute_force(&p, theta.values());
        parts.push((format!("trial {trial}: {got} vs {best}"), (got - best).abs() < 1e-12));
    }
    collect(parts)
}

/// Random DAG on 8 nodes containing the chain 0 -> 1 -> ... -> 7.
pub fn random_dag(r: &mut ChaCha8Rng) -> RoutingInstance {
    let mut links = Vec::new();
    for a in 0..8 {
        for b in a + 1..8 {
            if b == a + 1 || r.random::<f64>() < 0.4 {
                links.push((a, b));
            }
        }
    }
    let rel = MeanVector::new((0..links.len()).map(|_| 0.05 + 0.95 * r.random::<f64>()).collect()).unwrap();
    RoutingInstance::new(8, links, rel, 0, 7).unwrap()
}

pub fn path_equivalence() -> Outcome {
    let mut r = rng(0x9a7);
    let mut parts = Vec::new();
    for trial in 0..50 {
        let inst = random_dag(&mut r);
        let theta = inst.reliability().clone();
        let SuperArm::Path(p) = reliable_path_oracle(&inst, &theta).unwrap() else {
            return Err("path oracle returned a non-path action".into());
        };
        let got: f64 = p.iter().map(|&e| theta.values()[e]).product();
        let best = reference::best_path_reliability(&inst, theta.values());
        parts.push((format!("trial {trial}: {got} vs {best}"), (got - best).abs() < 1e-12));
    }
    collect(parts)
}

/// Random directed graph on 8 nodes with at most 16 edges.
pub fn tiny_graph(r: &mut ChaCha8Rng) -> InfluenceGraph {
    let mut triples = Vec::new();
    for a in 0..8 {
        for b in 0..8 {
            if a != b && triples.len() < 16 && r.random::<f64>() < 0.25 {
                triples.push((a, b, 0.1 + 0.8 * r.random::<f64>()));
            }
        }
    }
    InfluenceGraph::from_triples(8, &triples).unwrap()
}

/// TIM+ seeds reach `alpha * OPT` on at least 19 of 20 tiny graphs.
pub fn rr_greedy_ratio() -> Outcome {
    let mut r = rng(0x2a);
    let params = TimParams::default();
    let mut ok = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let g = tiny_graph(&mut r);
        let probs = g.probabilities();
        let out = rr_greedy_oracle(&g, &probs, 2, &params, &mut r).map_err(|e| e.to_string())?;
        let table = Realizations::enumerate(&g, probs.values());
        let got = table.spread(&out.seeds);
        let (_, opt) = table.best_seed_set(8, 2);
        worst = worst.min(got / opt);
        if got >= params.alpha() * opt - 1e-9 {
            ok += 1;
        }
    }
    let detail = format!("{ok}/20 graphs at or above ratio {:.4}, worst {worst:.4}", params.alpha());
    if ok >= 19 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_pair(r: &mut ChaCha8Rng, m: usize, ordered: bool) -> (MeanVector, MeanVector) {
    let a: Vec<f64> = (0..m).map(|_| r.random::<f64>()).collect();
    let b: Vec<f64> = if ordered {
        a.iter().map(|&x| x + (1.0 - x) * r.random::<f64>()).collect()
    } else {
        (0..m).map(|_| r.random::<f64>()).collect()
    };
    (MeanVector::new(a).unwrap(), MeanVector::new(b).unwrap())
}

/// A random feasible super arm of the instance.
pub fn random_super_arm(inst: &Instance, r: &mut ChaCha8Rng) -> SuperArm {
    use rand::seq::SliceRandom;
    match inst {
        Instance::Cascade(c) => SuperArm::RankedLists(
            (0..c.users())
                .map(|_| {
                    let mut items: Vec<usize> = (0..c.items()).collect();
                    items.shuffle(r);
                    items.truncate(c.list_len());
                    items
                })
                .collect(),
        ),
        Instance::Pmc(p) => {
            let mut items: Vec<usize> = (0..p.items()).collect();
            items.shuffle(r);
            items.truncate(p.k());
            items.sort_unstable();
            SuperArm::ItemSubset(items)
        }
        Instance::Influence(i) => {
            let mut nodes: Vec<usize> = (0..i.graph.nodes()).collect();
            nodes.shuffle(r);
            nodes.truncate(i.k);
            nodes.sort_unstable();
            SuperArm::SeedSet(nodes)
        }
        Instance::Routing(_) => {
            if r.random::<bool>() {
                SuperArm::Path(vec![0, 1])
            } else {
                SuperArm::Path(vec![2, 3])
            }
        }
    }
}

/// Lipschitz constant per family: 1 for list, coverage and path rewards;
/// for spread, `n - 1` since expected spread is multilinear in the edge
/// probabilities and one edge adds at most `n - 1` nodes.
pub fn lipschitz_constant(inst: &Instance) -> f64 {
    match inst {
        Instance::Influence(i) => (i.graph.nodes() - 1) as f64,
        _ => 1.0,
    }
}

pub fn lipschitz_pairs() -> Outcome {
    let mut r = rng(0x1b5);
    let mut parts = Vec::new();
    for (name, inst, _) in all_instances() {
        let b = lipschitz_constant(&inst);
        let mut bad = 0;
        for _ in 0..1000 {
            let s = random_super_arm(&inst, &mut r);
            let (mu, mu2) = random_pair(&mut r, inst.num_arms(), false);
            if !check_lipschitz(&inst, &s, &mu, &mu2, b).unwrap() {
                bad += 1;
            }
        }
        parts.push((format!("{name}: {bad}/1000 violations at B = {b}"), bad == 0));
    }
    collect(parts)
}

pub fn monotonicity_pairs() -> Outcome {
    let mut r = rng(0x303);
    let mut parts = Vec::new();
    for (name, inst, _) in all_instances() {
        let mut bad = 0;
        for _ in 0..1000 {
            let s = random_super_arm(&inst, &mut r);
            let (mu, mu2) = random_pair(&mut r, inst.num_arms(), true);
            if !check_monotonicity(&inst, &s, &mu, &mu2).unwrap() {
                bad += 1;
            }
        }
        parts.push((format!("{name}: {bad}/1000 violations"), bad == 0));
    }
    collect(parts)
}

/// After any sequence of feedback, `a_i + b_i - 2` counts the observations
/// of arm `i` and `a_i - 1` lies between the number of outcomes equal to 1
/// and the number of positive outcomes.
pub fn cts_count_conservation() -> Outcome {
    let mut r = rng(0xc75);
    let m = 12;
    let mut state = CtsState::new(m);
    let mut seen = vec![0usize; m];
    let mut ones = vec![0usize; m];
    let mut positive = vec![0usize; m];
    for round in 1..=5000u64 {
        let mut arms: Vec<usize> = (0..m).filter(|_| r.random::<f64>() < 0.4).collect();
        arms.dedup();
        let mut fb = Feedback::new(round);
        for &a in &arms {
            let x = match r.random_range(0..3) {
                0 => 0.0,
                1 => 1.0,
                _ => r.random::<f64>(),
            };
            seen[a] += 1;
            ones[a] += usize::from(x == 1.0);
            positive[a] += usize::from(x > 0.0);
            fb.push(BaseArmId(a), x);
        }
        cts_update(&mut state, &fb, &mut r).map_err(|e| e.to_string())?;
    }
    let mut parts = Vec::new();
    for i in 0..m {
        let total = state.a()[i] + state.b()[i] - 2.0;
        let succ = state.a()[i] - 1.0;
        let ok = total == seen[i] as f64 && succ >= ones[i] as f64 && succ <= positive[i] as f64;
        parts.push((format!("arm {i}: {total} updates vs {} observations", seen[i]), ok));
    }
    collect(parts)
}

pub fn klucb_grid_agreement() -> Outcome {
    let mut parts = Vec::new();
    for &(mu, n, t) in &[(0.3, 50u64, 1000u64), (0.05, 7, 200), (0.9, 400, 100_000), (0.5, 1, 3), (0.0, 20, 1000)] {
        let fast = klucb_index(mu, n, t).map_err(|e| e.to_string())?;
        let grid = reference::klucb_grid(mu, n, t, 1e-7);
        parts.push((
            format!("({mu}, {n}, {t}): bisection {fast:.9}, grid {grid:.9}"),
            (fast - grid).abs() <= 1e-6,
        ));
    }
    collect(parts)
}

/// CTS on B_LB(8,2,0.2,0.15): regret over the second half of 10^4 rounds
/// is below that of the first half, and the mean curve never decreases.
pub fn sublinearity() -> Outcome {
    let env = EnvSpec::Blb {
        items: 8,
        list_len: 2,
        p: 0.2,
        gap: 0.15,
    };
    let mut cfg = RunConfig::new(env, PolicySpec::new(PolicyKind::Cts), 10_000, 20, 8);
    cfg.per_run_stride = 0;
    let res = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let mean = &res.aggregate.mean;
    let first = mean[4999];
    let second = mean[9999] - mean[4999];
    let monotone = mean.windows(2).all(|w| w[1] >= w[0]);
    let detail = format!("rounds 1-5000: {first:.2}, rounds 5001-10000: {second:.2}");
    if second < first && monotone {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Both worked single-user list values for B_LB(16,2,0.2,0.15).
pub fn blb_list_values() -> Outcome {
    let c = make_blb_instance(16, 2, 0.2, 0.15).map_err(|e| e.to_string())?;
    let probs = c.attraction().values().to_vec();
    let values: Vec<f64> = reference::ordered_tuples(16, 2)
        .iter()
        .map(|l| reference::disjunctive_list_value(&probs, l))
        .collect();
    let best = values.iter().copied().fold(f64::MIN, f64::max);
    let worst = values.iter().copied().fold(f64::MAX, f64::min);
    let detail = format!("optimum {best:.4}, largest gap {:.4}", best - worst);
    if (best - 0.36).abs() < 1e-12 && (best - worst - 0.2625).abs() < 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Arms guaranteed to be observed whenever `s` is played.
pub fn always_observed(inst: &Instance, s: &SuperArm) -> BTreeSet<usize> {
    independent_triggering(inst, s)
        .iter()
        .enumerate()
        .filter(|(_, &p)| p == 1.0)
        .map(|(a, _)| a)
        .collect()
}

/// The full property battery, in a fixed order.
pub fn property_battery() -> Vec<(&'static str, Outcome)> {
    vec![
        ("closed-form reward vs simulation", reward_agreement()),
        ("triggering probabilities vs simulation", triggering_agreement()),
        ("top-K lists vs exhaustive", topk_equivalence()),
        ("best subset vs exhaustive", subset_equivalence()),
        ("reliable path vs exhaustive", path_equivalence()),
        ("RR greedy approximation ratio", rr_greedy_ratio()),
        ("single-user list values", blb_list_values()),
        ("Lipschitz pairs", lipschitz_pairs()),
        ("monotone pairs", monotonicity_pairs()),
        ("CTS count conservation", cts_count_conservation()),
        ("KL-UCB vs grid search", klucb_grid_agreement()),
        ("sublinear regret", sublinearity()),
    ]
}
