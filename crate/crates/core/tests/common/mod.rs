//! Independent dense oracles and random inputs for the integration suites.
#![allow(dead_code)]

use ideorec::{build_graph, prune, Candidate, InteractionEvent, InteractionGraph};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bernoulli(density) bipartite graph; zero-degree nodes are pruned away.
/// Returns `None` when fewer than two users or items survive.
pub fn random_graph(seed: u64, max_users: usize, max_items: usize, density: f64) -> Option<InteractionGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = rng.random_range(2..=max_users);
    let items = rng.random_range(2..=max_items);
    let mut events = Vec::new();
    for u in 0..users {
        for i in 0..items {
            if rng.random::<f64>() < density {
                events.push(InteractionEvent::new(format!("u{u}"), format!("i{i}")));
            }
        }
    }
    let g = build_graph(&events).ok()?;
    let g = prune(&g, 1, 1).ok()?;
    (g.num_users() >= 2 && g.num_items() >= 2).then_some(g)
}

pub fn incidence(g: &InteractionGraph) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(g.num_users(), g.num_items());
    for (u, i) in g.edges() {
        r[(u, i)] = 1.0;
    }
    r
}

/// Materialized standardized residual matrix, entry by entry.
pub fn dense_residual(g: &InteractionGraph) -> DMatrix<f64> {
    let r = incidence(g);
    let n = r.sum();
    let rows: Vec<f64> = (0..r.nrows()).map(|u| r.row(u).sum() / n).collect();
    let cols: Vec<f64> = (0..r.ncols()).map(|i| r.column(i).sum() / n).collect();
    DMatrix::from_fn(r.nrows(), r.ncols(), |u, i| {
        (r[(u, i)] / n - rows[u] * cols[i]) / (rows[u] * cols[i]).sqrt()
    })
}

pub struct DenseSvd {
    /// Descending.
    pub sigma: Vec<f64>,
    /// Right singular vectors as columns, matching `sigma`.
    pub v: DMatrix<f64>,
    /// Left singular vectors as columns, matching `sigma`.
    pub u: DMatrix<f64>,
}

/// Singular triplets from symmetric eigendecompositions of the Gram matrices
/// `S^T S` and `S S^T`. nalgebra's bidiagonal SVD with vectors requested
/// loses about 1e-5 on some wide matrices, so it is not used here.
pub fn dense_svd(m: &DMatrix<f64>) -> DenseSvd {
    let sorted = |gram: DMatrix<f64>| {
        let eig = gram.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0).sqrt()).collect();
        let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    };
    let (sigma_v, v) = sorted(m.transpose() * m);
    let (sigma_u, u) = sorted(m * m.transpose());
    let sigma = if sigma_v.len() <= sigma_u.len() { sigma_v } else { sigma_u };
    DenseSvd { sigma, v, u }
}

/// Norm of the projection of unit `x` onto the span of the given orthonormal columns.
pub fn projection_norm(basis: &DMatrix<f64>, cols: &[usize], x: &[f64]) -> f64 {
    cols.iter()
        .map(|&c| {
            let dot: f64 = basis.column(c).iter().zip(x).map(|(a, b)| a * b).sum();
            dot * dot
        })
        .sum::<f64>()
        .sqrt()
}

/// Dense three-matrix product for the popularity-penalized walk; row `u`
/// holds user `u`'s item scores.
pub fn dense_rp3b_matrix(g: &InteractionGraph, alpha: f64, beta: f64) -> DMatrix<f64> {
    let r = incidence(g);
    let du: Vec<f64> = (0..r.nrows()).map(|u| r.row(u).sum()).collect();
    let di: Vec<f64> = (0..r.ncols()).map(|i| r.column(i).sum()).collect();
    let ui = DMatrix::from_fn(r.nrows(), r.ncols(), |u, i| r[(u, i)] * (1.0 / du[u]).powf(alpha));
    let iu = DMatrix::from_fn(r.ncols(), r.nrows(), |i, u| r[(u, i)] * (1.0 / di[i]).powf(alpha));
    let p3 = &ui * &iu * &ui;
    DMatrix::from_fn(r.nrows(), r.ncols(), |u, i| p3[(u, i)] / di[i].powf(beta))
}

pub fn dense_rp3b(g: &InteractionGraph, user: usize, alpha: f64, beta: f64) -> Vec<f64> {
    dense_rp3b_matrix(g, alpha, beta).row(user).iter().copied().collect()
}

/// Step-wise greedy recomputed from scratch at every step.
pub fn brute_force_greedy(pool: &[Candidate], lambda: f64, n: usize) -> Vec<usize> {
    let max = pool.iter().map(|c| c.score).fold(f64::MIN, f64::max);
    let min = pool.iter().map(|c| c.score).fold(f64::MAX, f64::min);
    let norm = |c: &Candidate| if max == min { 1.0 } else { (c.score - min) / (max - min) };
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < n.min(pool.len()) {
        let mut best: Option<(f64, usize, usize)> = None;
        for (k, c) in pool.iter().enumerate() {
            if chosen.contains(&k) {
                continue;
            }
            let gain = if chosen.is_empty() {
                norm(c)
            } else {
                let min_dist = chosen
                    .iter()
                    .map(|&j| (c.position - pool[j].position).abs())
                    .fold(f64::MAX, f64::min);
                lambda * norm(c) + (1.0 - lambda) * min_dist
            };
            let better = match best {
                None => true,
                Some((g, item, _)) => gain > g || (gain == g && c.item < item),
            };
            if better {
                best = Some((gain, c.item, k));
            }
        }
        chosen.push(best.unwrap().2);
    }
    chosen.iter().map(|&k| pool[k].item).collect()
}

/// Pool of up to `max_len` candidates with distinct item ids and coarse
/// scores/positions so that ties actually occur.
pub fn random_pool(seed: u64, max_len: usize) -> Vec<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.random_range(1..=max_len);
    let mut ids: Vec<usize> = (0..40).collect();
    for k in 0..len {
        let j = rng.random_range(k..ids.len());
        ids.swap(k, j);
    }
    (0..len)
        .map(|k| Candidate {
            item: ids[k],
            score: rng.random_range(0..6) as f64 / 5.0,
            position: rng.random_range(-8..=8) as f64 / 4.0,
        })
        .collect()
}
