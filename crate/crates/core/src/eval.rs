//! Holdout splitting and the accuracy / diversity metric suite.

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diversify::{diversify_recommend, DiversifyParams};
use crate::error::{Error, Result};
use crate::graph::{InteractionEvent, InteractionGraph};
use crate::ideology::IdeologyModel;
use crate::recsys::{recommend_topn, WalkParams};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    /// Held-out items per evaluated user.
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Split {
    pub train: Vec<InteractionEvent>,
    /// (user, item) pairs moved to the test side, grouped by user in
    /// first-appearance order.
    pub test: Vec<(String, String)>,
}

/// Leave-k-out split.
///
/// Every user with at least `k + 1` distinct items loses exactly `k` of them,
/// drawn without replacement from a ChaCha8 stream seeded with `spec.seed`.
/// Users are visited in first-appearance order and their items in
/// first-appearance order, so the split depends only on the event file and
/// the seed. All duplicate events of a held-out pair leave the train side.
pub fn holdout_split(events: &[InteractionEvent], spec: &SplitSpec) -> Result<Split> {
    if spec.k < 1 {
        return Err(Error::InvalidParams("holdout k must be at least 1".into()));
    }
    if events.is_empty() {
        return Err(Error::EmptyEventSet);
    }
    let mut user_order: Vec<&str> = Vec::new();
    let mut user_items: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut seen_pairs: HashSet<(&str, &str)> = HashSet::new();
    for ev in events {
        let items = user_items.entry(ev.user.as_str()).or_insert_with(|| {
            user_order.push(ev.user.as_str());
            Vec::new()
        });
        if seen_pairs.insert((ev.user.as_str(), ev.item.as_str())) {
            items.push(ev.item.as_str());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut test = Vec::new();
    let mut held: HashSet<(&str, &str)> = HashSet::new();
    for user in &user_order {
        let items = &user_items[user];
        if items.len() <= spec.k {
            continue;
        }
        let mut picks = rand::seq::index::sample(&mut rng, items.len(), spec.k).into_vec();
        picks.sort_unstable();
        for p in picks {
            held.insert((user, items[p]));
            test.push((user.to_string(), items[p].to_string()));
        }
    }
    if test.is_empty() {
        return Err(Error::NoEvaluableUsers);
    }
    let train = events
        .iter()
        .filter(|ev| !held.contains(&(ev.user.as_str(), ev.item.as_str())))
        .cloned()
        .collect();
    Ok(Split { train, test })
}

fn hits_in_first<T: Eq + std::hash::Hash>(recs: &[T], holdout: &HashSet<T>, n: usize) -> usize {
    recs.iter().take(n).filter(|r| holdout.contains(r)).count()
}

/// `recs` is assumed duplicate-free, as every list this crate produces is.
pub fn precision_at_n<T: Eq + std::hash::Hash>(recs: &[T], holdout: &HashSet<T>, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    Ok(hits_in_first(recs, holdout, n) as f64 / n as f64)
}

pub fn recall_at_n<T: Eq + std::hash::Hash>(recs: &[T], holdout: &HashSet<T>, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    if holdout.is_empty() {
        return Err(Error::EmptyHoldout);
    }
    Ok(hits_in_first(recs, holdout, n) as f64 / holdout.len() as f64)
}

/// Binary-relevance NDCG with `1 / log2(rank + 1)` discounts.
pub fn ndcg_at_n<T: Eq + std::hash::Hash>(recs: &[T], holdout: &HashSet<T>, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    if holdout.is_empty() {
        return Err(Error::EmptyHoldout);
    }
    let discount = |rank: usize| 1.0 / ((rank + 1) as f64).log2();
    let dcg: f64 = recs
        .iter()
        .take(n)
        .enumerate()
        .filter(|(_, r)| holdout.contains(r))
        .map(|(k, _)| discount(k + 1))
        .sum();
    let idcg: f64 = (1..=holdout.len().min(n)).map(discount).sum();
    Ok(dcg / idcg)
}

/// Population standard deviation of list positions.
pub fn list_spread(positions: &[f64]) -> Result<f64> {
    if positions.is_empty() {
        return Err(Error::EmptyList);
    }
    Ok(stats::population_std(positions))
}

/// Mean absolute position difference over unordered pairs.
pub fn intra_list_distance(positions: &[f64]) -> Result<f64> {
    let m = positions.len();
    if m < 2 {
        return Err(Error::TooFewItems);
    }
    let mut total = 0.0;
    for a in 0..m {
        for b in a + 1..m {
            total += (positions[a] - positions[b]).abs();
        }
    }
    Ok(total / (m * (m - 1) / 2) as f64)
}

/// Signed shift of the list's mean position away from the user.
pub fn displacement(theta_u: f64, positions: &[f64]) -> Result<f64> {
    if positions.is_empty() {
        return Err(Error::EmptyList);
    }
    Ok(stats::mean(positions) - theta_u)
}

/// Fraction of the catalog that appears in at least one list.
pub fn coverage<L: AsRef<[usize]>>(lists: &[L], catalog_size: usize) -> Result<f64> {
    if catalog_size < 1 {
        return Err(Error::InvalidParams("catalog size must be at least 1".into()));
    }
    let distinct: HashSet<usize> = lists.iter().flat_map(|l| l.as_ref().iter().copied()).collect();
    Ok(distinct.len() as f64 / catalog_size as f64)
}

/// Gini index of per-item recommendation counts; 0 when nothing was recommended.
pub fn gini(counts: &[u64]) -> f64 {
    let m = counts.len();
    let total: u64 = counts.iter().sum();
    if m == 0 || total == 0 {
        return 0.0;
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| (2.0 * (k + 1) as f64 - m as f64 - 1.0) * x as f64)
        .sum();
    weighted / (m as f64 * total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub ndcg: f64,
    pub list_spread: f64,
    pub ild: f64,
    pub displacement_abs: f64,
    pub coverage: f64,
    pub gini: f64,
    pub n_users_evaluated: usize,
    /// Users whose list had at least one positioned item; the ideology
    /// metrics average over these.
    pub n_users_with_lists: usize,
}

#[derive(Debug, Default)]
struct UserOutcome {
    precision: f64,
    recall: f64,
    ndcg: f64,
    spread: Option<f64>,
    ild: Option<f64>,
    displacement_abs: Option<f64>,
    items: Vec<usize>,
}

fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Evaluates one recommender configuration over the held-out pairs.
///
/// `model` must be aligned with `graph_train`. Held-out items missing from
/// the train graph can never be hit but still count toward recall and NDCG.
/// Lists are the plain walk ranking, or the diversified ranking with list
/// size `n` when `use_diversifier` is set.
pub fn evaluate(
    graph_train: &InteractionGraph,
    model: &IdeologyModel,
    test_pairs: &[(String, String)],
    walk: &WalkParams,
    div: &DiversifyParams,
    use_diversifier: bool,
    n: usize,
) -> Result<MetricsReport> {
    if n < 1 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    let div = DiversifyParams {
        list_size: n,
        ..*div
    };
    if use_diversifier {
        div.validate()?;
    }

    let mut order: Vec<&str> = Vec::new();
    let mut holdouts: HashMap<&str, HashSet<&str>> = HashMap::new();
    for (u, i) in test_pairs {
        holdouts
            .entry(u.as_str())
            .or_insert_with(|| {
                order.push(u.as_str());
                HashSet::new()
            })
            .insert(i.as_str());
    }

    let mut outcomes = Vec::new();
    for user_id in order {
        let Some(user) = graph_train.user_ids().get(user_id) else {
            continue;
        };
        let items: Vec<usize> = if use_diversifier {
            diversify_recommend(graph_train, model, user, walk, &div)?
                .into_iter()
                .map(|r| r.item)
                .collect()
        } else {
            recommend_topn(graph_train, user, walk, n, true)?
                .into_iter()
                .map(|s| s.item)
                .collect()
        };
        let rec_ids: Vec<&str> = items.iter().map(|&i| graph_train.item_ids().id(i)).collect();
        let holdout = &holdouts[user_id];
        let mut outcome = UserOutcome {
            precision: precision_at_n(&rec_ids, holdout, n)?,
            recall: recall_at_n(&rec_ids, holdout, n)?,
            ndcg: ndcg_at_n(&rec_ids, holdout, n)?,
            ..UserOutcome::default()
        };
        let positions: Vec<f64> = items
            .iter()
            .filter_map(|&i| model.phi.get(i).copied())
            .filter(|p| p.is_finite())
            .collect();
        let theta_u = model.theta.get(user).copied().unwrap_or(f64::NAN);
        if !positions.is_empty() {
            outcome.spread = Some(list_spread(&positions)?);
            outcome.ild = intra_list_distance(&positions).ok();
            if theta_u.is_finite() {
                outcome.displacement_abs = Some(displacement(theta_u, &positions)?.abs());
            }
        }
        outcome.items = items;
        outcomes.push(outcome);
    }
    if outcomes.is_empty() {
        return Err(Error::NoEvaluableUsers);
    }

    let mut counts = vec![0u64; graph_train.num_items()];
    for o in &outcomes {
        for &i in &o.items {
            counts[i] += 1;
        }
    }
    let lists: Vec<&[usize]> = outcomes.iter().map(|o| o.items.as_slice()).collect();
    Ok(MetricsReport {
        precision: mean_of(outcomes.iter().map(|o| o.precision)),
        recall: mean_of(outcomes.iter().map(|o| o.recall)),
        ndcg: mean_of(outcomes.iter().map(|o| o.ndcg)),
        list_spread: mean_of(outcomes.iter().filter_map(|o| o.spread)),
        ild: mean_of(outcomes.iter().filter_map(|o| o.ild)),
        displacement_abs: mean_of(outcomes.iter().filter_map(|o| o.displacement_abs)),
        coverage: coverage(&lists, graph_train.num_items().max(1))?,
        gini: gini(&counts),
        n_users_evaluated: outcomes.len(),
        n_users_with_lists: outcomes.iter().filter(|o| o.spread.is_some()).count(),
    })
}
