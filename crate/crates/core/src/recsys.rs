//! Three-step random-walk scoring with a popularity penalty.
//!
//! A walk goes user → item → user → item. Each hop out of a node of degree
//! `d` carries weight `(1/d)^alpha`; the score of an item is the sum over all
//! three-step paths that end on it. Dividing by `d_i^beta` then pushes
//! popular items down so that items reached through weak ties can surface.

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for WalkParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.6,
        }
    }
}

impl WalkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParams(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredItem {
    pub item: usize,
    pub score: f64,
}

fn check_user(graph: &InteractionGraph, user: usize) -> Result<()> {
    if user >= graph.num_users() {
        return Err(Error::UnknownUser(format!("#{user}")));
    }
    Ok(())
}

/// Unnormalized three-step path sums from `user` to every item.
pub fn p3_scores(graph: &InteractionGraph, user: usize, alpha: f64) -> Result<Vec<f64>> {
    check_user(graph, user)?;
    let step = |d: usize| (1.0 / d as f64).powf(alpha);

    // Mass on users after two hops.
    let start = step(graph.user_degree(user));
    let mut on_users = vec![0.0; graph.num_users()];
    for &j in graph.user_items(user) {
        let w = start * step(graph.item_degree(j));
        for &v in graph.item_users(j) {
            on_users[v] += w;
        }
    }

    let mut scores = vec![0.0; graph.num_items()];
    for (v, &mass) in on_users.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let w = mass * step(graph.user_degree(v));
        for &i in graph.user_items(v) {
            scores[i] += w;
        }
    }
    Ok(scores)
}

/// [`p3_scores`] divided by `d_i^beta`.
pub fn rp3b_scores(graph: &InteractionGraph, user: usize, params: &WalkParams) -> Result<Vec<f64>> {
    params.validate()?;
    let mut scores = p3_scores(graph, user, params.alpha)?;
    for (i, s) in scores.iter_mut().enumerate() {
        *s /= (graph.item_degree(i) as f64).powf(params.beta);
    }
    Ok(scores)
}

/// Highest-scoring items for `user`, best first.
///
/// Ties go to the lower item index. Items with zero score are never
/// returned, so the list may be shorter than `n`.
pub fn recommend_topn(
    graph: &InteractionGraph,
    user: usize,
    params: &WalkParams,
    n: usize,
    exclude_seen: bool,
) -> Result<Vec<ScoredItem>> {
    let scores = rp3b_scores(graph, user, params)?;
    let seen = graph.user_items(user);
    let mut ranked: Vec<ScoredItem> = scores
        .iter()
        .enumerate()
        .filter(|&(i, &s)| s > 0.0 && !(exclude_seen && seen.binary_search(&i).is_ok()))
        .map(|(item, &score)| ScoredItem { item, score })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.item.cmp(&b.item)));
    ranked.truncate(n);
    Ok(ranked)
}
