//! Ideology-aware re-ranking of a walk's candidate pool.
//!
//! Candidates farther than `tau` from the user's position are set aside.
//! The rest are picked greedily, trading normalized walk score against the
//! distance to the nearest already-picked item. If the window leaves too few
//! items, the list is topped up from the set-aside candidates and those
//! entries are flagged as backfilled.

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::ideology::IdeologyModel;
use crate::recsys::{recommend_topn, WalkParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversifyParams {
    /// Weight on relevance; `1.0` disables the diversity term.
    pub lambda: f64,
    /// Half-width of the acceptability window around the user.
    pub tau: f64,
    pub pool_size: usize,
    pub list_size: usize,
}

impl Default for DiversifyParams {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            tau: 2.0,
            pool_size: 100,
            list_size: 10,
        }
    }
}

impl DiversifyParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParams(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.list_size < 1 || self.list_size > self.pool_size {
            return Err(Error::InvalidParams(format!(
                "need 1 <= list size ({}) <= pool size ({})",
                self.list_size, self.pool_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub item: usize,
    pub score: f64,
    pub position: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recommendation {
    pub item: usize,
    pub score: f64,
    pub position: f64,
    /// Outside the acceptability window; added only to fill the list.
    pub backfilled: bool,
}

/// Splits candidates by the closed window `|position - theta_u| <= tau`.
///
/// Candidates without a finite position land in the rejected list.
pub fn acceptability_filter(
    candidates: &[Candidate],
    theta_u: f64,
    tau: f64,
) -> (Vec<Candidate>, Vec<Candidate>) {
    candidates
        .iter()
        .partition(|c| (c.position - theta_u).abs() <= tau)
}

/// Greedy max-min re-ranking of `pool` down to `n` items.
pub fn greedy_rerank(pool: &[Candidate], lambda: f64, n: usize) -> Result<Vec<Candidate>> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let lo = pool.iter().map(|c| c.score).fold(f64::INFINITY, f64::min);
    let hi = pool.iter().map(|c| c.score).fold(f64::NEG_INFINITY, f64::max);
    let relevance: Vec<f64> = pool
        .iter()
        .map(|c| if hi > lo { (c.score - lo) / (hi - lo) } else { 1.0 })
        .collect();

    let mut remaining: Vec<usize> = (0..pool.len()).collect();
    // Distance from each pool entry to its nearest selected item.
    let mut nearest = vec![f64::INFINITY; pool.len()];
    let mut selected = Vec::with_capacity(n.min(pool.len()));

    while selected.len() < n && !remaining.is_empty() {
        let gain = |k: usize| {
            if selected.is_empty() {
                relevance[k]
            } else {
                lambda * relevance[k] + (1.0 - lambda) * nearest[k]
            }
        };
        let mut best = 0;
        for slot in 1..remaining.len() {
            let (k, b) = (remaining[slot], remaining[best]);
            let (gk, gb) = (gain(k), gain(b));
            if gk > gb || (gk == gb && pool[k].item < pool[b].item) {
                best = slot;
            }
        }
        let pick = remaining.swap_remove(best);
        for &k in &remaining {
            nearest[k] = nearest[k].min((pool[k].position - pool[pick].position).abs());
        }
        selected.push(pool[pick]);
    }
    Ok(selected)
}

/// Filter, re-rank and backfill an already-ranked candidate pool.
pub fn diversify_candidates(
    candidates: &[Candidate],
    theta_u: f64,
    params: &DiversifyParams,
) -> Result<Vec<Recommendation>> {
    params.validate()?;
    let n = params.list_size;
    let (acceptable, mut rejected) = acceptability_filter(candidates, theta_u, params.tau);
    let mut out: Vec<Recommendation> = if acceptable.is_empty() {
        Vec::new()
    } else {
        greedy_rerank(&acceptable, params.lambda, n)?
            .into_iter()
            .map(|c| Recommendation {
                item: c.item,
                score: c.score,
                position: c.position,
                backfilled: false,
            })
            .collect()
    };
    if out.len() < n {
        rejected.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.item.cmp(&b.item)));
        out.extend(rejected.into_iter().take(n - out.len()).map(|c| Recommendation {
            item: c.item,
            score: c.score,
            position: c.position,
            backfilled: true,
        }));
    }
    Ok(out)
}

/// Walk-based pool of unseen items, re-ranked for ideological spread.
pub fn diversify_recommend(
    graph: &InteractionGraph,
    model: &IdeologyModel,
    user: usize,
    walk: &WalkParams,
    params: &DiversifyParams,
) -> Result<Vec<Recommendation>> {
    params.validate()?;
    if user >= graph.num_users() {
        return Err(Error::UnknownUser(format!("#{user}")));
    }
    let theta_u = match model.theta.get(user) {
        Some(t) if t.is_finite() => *t,
        _ => return Err(Error::UnknownUser(graph.user_ids().id(user).to_string())),
    };
    let pool = recommend_topn(graph, user, walk, params.pool_size, true)?;
    let candidates: Vec<Candidate> = pool
        .iter()
        .map(|s| Candidate {
            item: s.item,
            score: s.score,
            position: model.phi.get(s.item).copied().unwrap_or(f64::NAN),
        })
        .collect();
    diversify_candidates(&candidates, theta_u, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(item: usize, score: f64, position: f64) -> Candidate {
        Candidate {
            item,
            score,
            position,
        }
    }

    fn items(cs: &[Candidate]) -> Vec<usize> {
        cs.iter().map(|c| c.item).collect()
    }

    fn example_pool() -> Vec<Candidate> {
        vec![cand(1, 0.9, 0.1), cand(2, 0.8, 0.15), cand(3, 0.7, -0.6), cand(4, 0.6, 2.5)]
    }

    #[test]
    fn filter_wide_window_accepts_all() {
        let (acc, rej) = acceptability_filter(&example_pool(), 0.0, 1e12);
        assert_eq!(acc.len(), 4);
        assert!(rej.is_empty());
    }

    #[test]
    fn filter_rejects_far_item() {
        let (acc, rej) = acceptability_filter(&example_pool(), 0.0, 1.0);
        assert_eq!(items(&acc), [1, 2, 3]);
        assert_eq!(items(&rej), [4]);
    }

    #[test]
    fn filter_window_is_closed() {
        let (acc, rej) = acceptability_filter(&[cand(0, 1.0, 1.5)], 0.5, 1.0);
        assert_eq!(acc.len(), 1);
        assert!(rej.is_empty());
    }

    #[test]
    fn filter_rejects_unpositioned() {
        let (acc, rej) = acceptability_filter(&[cand(0, 1.0, f64::NAN)], 0.0, f64::INFINITY);
        assert!(acc.is_empty());
        assert_eq!(rej.len(), 1);
    }

    #[test]
    fn greedy_example() {
        let pool = &example_pool()[..3];
        assert_eq!(items(&greedy_rerank(pool, 0.5, 2).unwrap()), [1, 3]);
    }

    #[test]
    fn greedy_lambda_one_is_score_order() {
        let pool = vec![cand(5, 0.2, 0.0), cand(1, 0.9, 3.0), cand(3, 0.9, -1.0), cand(0, 0.5, 0.1)];
        assert_eq!(items(&greedy_rerank(&pool, 1.0, 4).unwrap()), [1, 3, 0, 5]);
    }

    #[test]
    fn greedy_single_and_empty() {
        let one = [cand(7, 0.1, 9.0)];
        for lambda in [0.0, 0.5, 1.0] {
            assert_eq!(items(&greedy_rerank(&one, lambda, 5).unwrap()), [7]);
        }
        assert!(matches!(greedy_rerank(&[], 0.5, 3), Err(Error::EmptyPool)));
    }

    #[test]
    fn equal_scores_normalize_to_one() {
        // All-equal pool: first pick is the lowest index, then pure distance decides.
        let pool = vec![cand(2, 0.3, 0.0), cand(0, 0.3, 0.5), cand(1, 0.3, -2.0)];
        assert_eq!(items(&greedy_rerank(&pool, 0.5, 3).unwrap()), [0, 1, 2]);
    }

    #[test]
    fn composition_with_backfill() {
        let params = DiversifyParams {
            lambda: 0.5,
            tau: 1.0,
            pool_size: 100,
            list_size: 2,
        };
        let recs = diversify_candidates(&example_pool(), 0.0, &params).unwrap();
        assert_eq!(recs.iter().map(|r| r.item).collect::<Vec<_>>(), [1, 3]);

        let params = DiversifyParams { list_size: 4, ..params };
        let recs = diversify_candidates(&example_pool(), 0.0, &params).unwrap();
        assert_eq!(recs.iter().map(|r| r.item).collect::<Vec<_>>(), [1, 3, 2, 4]);
        assert_eq!(
            recs.iter().map(|r| r.backfilled).collect::<Vec<_>>(),
            [false, false, false, true]
        );
    }

    #[test]
    fn backfill_orders_by_score_then_index() {
        let params = DiversifyParams {
            lambda: 0.5,
            tau: 0.1,
            pool_size: 10,
            list_size: 3,
        };
        let pool = vec![cand(4, 0.5, 5.0), cand(2, 0.5, 6.0), cand(9, 0.7, 7.0)];
        let recs = diversify_candidates(&pool, 0.0, &params).unwrap();
        assert_eq!(recs.iter().map(|r| r.item).collect::<Vec<_>>(), [9, 2, 4]);
        assert!(recs.iter().all(|r| r.backfilled));
    }

    #[test]
    fn empty_pool_gives_empty_list() {
        let recs = diversify_candidates(&[], 0.0, &DiversifyParams::default()).unwrap();
        assert!(recs.is_empty());
    }

    #[test]
    fn param_validation() {
        let ok = DiversifyParams::default();
        assert!(ok.validate().is_ok());
        for bad in [
            DiversifyParams { lambda: 1.1, ..ok },
            DiversifyParams { tau: 0.0, ..ok },
            DiversifyParams { list_size: 0, ..ok },
            DiversifyParams { list_size: 101, ..ok },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidParams(_))));
        }
    }
}
