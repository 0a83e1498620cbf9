//! One-dimensional ideological positions from the share graph.
//!
//! Positions come from correspondence analysis of the binary incidence
//! matrix `R`. With `n` edges, `P = R / n`, row masses `r_u = d_u / n` and
//! column masses `c_i = d_i / n`, the standardized residual matrix is
//!
//! ```text
//! S = D_r^{-1/2} (P - r c^T) D_c^{-1/2}
//! ```
//!
//! `S` is never materialized; products with it and its transpose run over
//! the sparse adjacency. The leading singular pair of `S` gives standard
//! coordinates `u1[u] / sqrt(r_u)` for users and `v1[i] / sqrt(c_i)` for
//! items. A single affine map estimated on the user side puts both on a
//! common axis with zero mean and unit variance over users.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::stats;

/// Below this the leading singular value is treated as zero.
pub const DEGENERATE_SIGMA: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Seeds the ChaCha8 stream that draws the power-iteration start vector.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 10_000,
            seed: 42,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParams("tol must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParams("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Users of known side, used only to orient the axis.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnchorSet {
    entries: Vec<(String, i8)>,
}

impl AnchorSet {
    pub fn new(entries: Vec<(String, i8)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (id, sign) in &entries {
            if *sign != 1 && *sign != -1 {
                return Err(Error::InvalidParams(format!(
                    "anchor {id:?} has sign {sign}, expected -1 or 1"
                )));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidParams(format!("duplicate anchor {id:?}")));
            }
        }
        Ok(Self { entries })
    }

    /// Reads the two-column `user,sign` format.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "user" || &headers[1] != "sign" {
            return Err(Error::InvalidParams(
                "anchor file header must be \"user,sign\"".into(),
            ));
        }
        let mut entries = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let record = record?;
            let line = idx + 2;
            let sign: i8 = record[1].parse().map_err(|_| Error::MalformedLine {
                line,
                reason: format!("bad sign {:?}", &record[1]),
            })?;
            entries.push((record[0].to_string(), sign));
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(String, i8)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdeologyModel {
    /// Per-user positions, indexed like the graph the model belongs to.
    pub theta: Vec<f64>,
    /// Per-item positions on the same axis.
    pub phi: Vec<f64>,
    pub sigma1: f64,
    pub iterations: usize,
    /// Mean of the raw user coordinates, subtracted from both sides.
    pub mu: f64,
    /// Population std of the raw user coordinates, divided out of both sides.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriplet {
    pub sigma1: f64,
    pub u1: Vec<f64>,
    pub v1: Vec<f64>,
    pub iterations: usize,
}

fn check_degrees(graph: &InteractionGraph) -> Result<()> {
    if (0..graph.num_users()).any(|u| graph.user_degree(u) == 0) {
        return Err(Error::ZeroDegreeNode("user"));
    }
    if (0..graph.num_items()).any(|i| graph.item_degree(i) == 0) {
        return Err(Error::ZeroDegreeNode("item"));
    }
    Ok(())
}

fn masses(graph: &InteractionGraph) -> (Vec<f64>, Vec<f64>) {
    let n = graph.num_edges() as f64;
    let r = (0..graph.num_users())
        .map(|u| graph.user_degree(u) as f64 / n)
        .collect();
    let c = (0..graph.num_items())
        .map(|i| graph.item_degree(i) as f64 / n)
        .collect();
    (r, c)
}

/// Sparse products with `S` and `S^T` over a fixed graph.
struct Residual<'g> {
    graph: &'g InteractionGraph,
    n: f64,
    r: Vec<f64>,
    c: Vec<f64>,
    sqrt_r: Vec<f64>,
    sqrt_c: Vec<f64>,
}

impl<'g> Residual<'g> {
    fn new(graph: &'g InteractionGraph) -> Result<Self> {
        check_degrees(graph)?;
        let (r, c) = masses(graph);
        let sqrt_r = r.iter().map(|x| x.sqrt()).collect();
        let sqrt_c = c.iter().map(|x| x.sqrt()).collect();
        Ok(Self {
            graph,
            n: graph.num_edges() as f64,
            r,
            c,
            sqrt_r,
            sqrt_c,
        })
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = x.iter().zip(&self.sqrt_c).map(|(x, s)| x / s).collect();
        let cz: f64 = self.c.iter().zip(&z).map(|(c, z)| c * z).sum();
        (0..self.graph.num_users())
            .map(|u| {
                let pz: f64 = self.graph.user_items(u).iter().map(|&i| z[i]).sum::<f64>() / self.n;
                (pz - self.r[u] * cz) / self.sqrt_r[u]
            })
            .collect()
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let w: Vec<f64> = y.iter().zip(&self.sqrt_r).map(|(y, s)| y / s).collect();
        let rw: f64 = self.r.iter().zip(&w).map(|(r, w)| r * w).sum();
        (0..self.graph.num_items())
            .map(|i| {
                let pw: f64 = self.graph.item_users(i).iter().map(|&u| w[u]).sum::<f64>() / self.n;
                (pw - self.c[i] * rw) / self.sqrt_c[i]
            })
            .collect()
    }
}

/// `S x` for an item-space vector `x`.
pub fn residual_apply(graph: &InteractionGraph, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != graph.num_items() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_items(),
            got: x.len(),
        });
    }
    Ok(Residual::new(graph)?.apply(x))
}

/// `S^T y` for a user-space vector `y`.
pub fn residual_apply_adjoint(graph: &InteractionGraph, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != graph.num_users() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_users(),
            got: y.len(),
        });
    }
    Ok(Residual::new(graph)?.apply_adjoint(y))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn scale(v: &mut [f64], k: f64) {
    v.iter_mut().for_each(|x| *x *= k);
}

/// Start vector: uniform draws in [-1, 1) from `ChaCha8Rng::seed_from_u64(seed)`,
/// normalized to unit length.
fn start_vector(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..len).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let nv = norm(&v);
    scale(&mut v, 1.0 / nv);
    v
}

/// Leading singular triplet of `S` by power iteration on `S^T S`.
///
/// Each step estimates `sigma = |S v|` for the current unit `v`. Iteration
/// stops once two successive estimates differ by less than `opts.tol` and
/// the eigen-residual `|S^T S v - sigma^2 v|` is below `opts.tol` as well;
/// the first test alone stalls early when the spectral gap is small.
/// Before any anchoring, signs are fixed so the largest-magnitude entry of
/// `v1` is positive (lowest index on ties).
pub fn leading_singular_triplet(
    graph: &InteractionGraph,
    opts: &FitOptions,
) -> Result<SingularTriplet> {
    opts.validate()?;
    let op = Residual::new(graph)?;
    let mut v = start_vector(graph.num_items(), opts.seed);
    let mut prev = f64::NAN;
    for iter in 1..=opts.max_iter {
        let mut sv = op.apply(&v);
        let sigma = norm(&sv);
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::DegenerateDimension(sigma));
        }
        let mut next = op.apply_adjoint(&sv);
        let sigma_sq = sigma * sigma;
        let residual = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - sigma_sq * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if (sigma - prev).abs() < opts.tol && (residual < opts.tol || sigma < DEGENERATE_SIGMA) {
            if sigma < DEGENERATE_SIGMA {
                return Err(Error::DegenerateDimension(sigma));
            }
            scale(&mut sv, 1.0 / sigma);
            let mut u1 = sv;
            let mut v1 = v;
            let mut lead = 0;
            for (i, x) in v1.iter().enumerate() {
                if x.abs() > v1[lead].abs() {
                    lead = i;
                }
            }
            if v1[lead] < 0.0 {
                scale(&mut u1, -1.0);
                scale(&mut v1, -1.0);
            }
            return Ok(SingularTriplet {
                sigma1: sigma,
                u1,
                v1,
                iterations: iter,
            });
        }
        prev = sigma;
        let nn = norm(&next);
        if !(nn.is_finite() && nn > 0.0) {
            return Err(Error::DegenerateDimension(sigma));
        }
        scale(&mut next, 1.0 / nn);
        v = next;
    }
    Err(Error::NotConverged(opts.max_iter))
}

/// Fits user and item positions on one standardized axis.
///
/// With anchors, the joint sign is chosen so that +1 anchors sit at or above
/// -1 anchors on average.
pub fn fit_ideology(
    graph: &InteractionGraph,
    anchors: Option<&AnchorSet>,
    opts: &FitOptions,
) -> Result<IdeologyModel> {
    let anchor_idx = match anchors {
        Some(set) => Some(resolve_anchors(graph, set)?),
        None => None,
    };
    let triplet = leading_singular_triplet(graph, opts)?;
    let (r, c) = masses(graph);
    let mut x: Vec<f64> = triplet.u1.iter().zip(&r).map(|(u, r)| u / r.sqrt()).collect();
    let mut y: Vec<f64> = triplet.v1.iter().zip(&c).map(|(v, c)| v / c.sqrt()).collect();

    if let Some((pos, neg)) = &anchor_idx {
        let mean_at = |idx: &[usize]| idx.iter().map(|&u| x[u]).sum::<f64>() / idx.len() as f64;
        if mean_at(pos) < mean_at(neg) {
            scale(&mut x, -1.0);
            scale(&mut y, -1.0);
        }
    }

    let mu = stats::mean(&x);
    let s = stats::population_std(&x);
    if !(s > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let theta = x.iter().map(|x| (x - mu) / s).collect();
    let phi = y.iter().map(|y| (y - mu) / s).collect();
    Ok(IdeologyModel {
        theta,
        phi,
        sigma1: triplet.sigma1,
        iterations: triplet.iterations,
        mu,
        s,
    })
}

fn resolve_anchors(graph: &InteractionGraph, set: &AnchorSet) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (id, sign) in set.entries() {
        let u = graph
            .user_ids()
            .get(id)
            .ok_or_else(|| Error::UnknownAnchor(id.clone()))?;
        if *sign > 0 {
            pos.push(u);
        } else {
            neg.push(u);
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::InvalidParams(
            "anchors need at least one +1 and one -1 user".into(),
        ));
    }
    Ok((pos, neg))
}

/// Position of a new item as the mean position of its sharers.
pub fn fold_in_item(sharer_positions: &[f64]) -> Result<f64> {
    if sharer_positions.is_empty() {
        return Err(Error::EmptySharerSet);
    }
    Ok(stats::mean(sharer_positions))
}

/// Position of a new user as the mean position of the items they shared.
pub fn fold_in_user(shared_item_positions: &[f64]) -> Result<f64> {
    fold_in_item(shared_item_positions)
}

/// On-disk model: positions keyed by external identifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub sigma1: f64,
    pub mu: f64,
    pub s: f64,
    pub users: BTreeMap<String, f64>,
    pub items: BTreeMap<String, f64>,
}

impl IdeologyModel {
    pub fn to_file(&self, graph: &InteractionGraph) -> ModelFile {
        let users = graph
            .user_ids()
            .ids()
            .iter()
            .cloned()
            .zip(self.theta.iter().copied())
            .collect();
        let items = graph
            .item_ids()
            .ids()
            .iter()
            .cloned()
            .zip(self.phi.iter().copied())
            .collect();
        ModelFile {
            sigma1: self.sigma1,
            mu: self.mu,
            s: self.s,
            users,
            items,
        }
    }
}

impl ModelFile {
    /// Aligns stored positions with `graph`'s indices.
    ///
    /// Items missing from the file are folded in from their positioned
    /// sharers, then missing users from their positioned items. Anything
    /// still unresolved is NaN.
    pub fn project(&self, graph: &InteractionGraph) -> IdeologyModel {
        let mut theta: Vec<f64> = graph
            .user_ids()
            .ids()
            .iter()
            .map(|id| self.users.get(id).copied().unwrap_or(f64::NAN))
            .collect();
        let mut phi: Vec<f64> = graph
            .item_ids()
            .ids()
            .iter()
            .map(|id| self.items.get(id).copied().unwrap_or(f64::NAN))
            .collect();
        for i in 0..graph.num_items() {
            if phi[i].is_nan() {
                let sharers: Vec<f64> = graph
                    .item_users(i)
                    .iter()
                    .map(|&u| theta[u])
                    .filter(|t| t.is_finite())
                    .collect();
                phi[i] = fold_in_item(&sharers).unwrap_or(f64::NAN);
            }
        }
        for u in 0..graph.num_users() {
            if theta[u].is_nan() {
                let shared: Vec<f64> = graph
                    .user_items(u)
                    .iter()
                    .map(|&i| phi[i])
                    .filter(|p| p.is_finite())
                    .collect();
                theta[u] = fold_in_user(&shared).unwrap_or(f64::NAN);
            }
        }
        IdeologyModel {
            theta,
            phi,
            sigma1: self.sigma1,
            iterations: 0,
            mu: self.mu,
            s: self.s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, InteractionEvent};

    fn graph(pairs: &[(&str, &str)]) -> InteractionGraph {
        let events: Vec<_> = pairs.iter().map(|(u, i)| InteractionEvent::new(*u, *i)).collect();
        build_graph(&events).unwrap()
    }

    fn two_block() -> InteractionGraph {
        graph(&[
            ("a", "x"),
            ("a", "y"),
            ("b", "x"),
            ("b", "y"),
            ("c", "z"),
            ("c", "w"),
            ("d", "z"),
            ("d", "w"),
        ])
    }

    fn complete(users: usize, items: usize) -> InteractionGraph {
        let mut events = Vec::new();
        for u in 0..users {
            for i in 0..items {
                events.push(InteractionEvent::new(format!("u{u}"), format!("i{i}")));
            }
        }
        build_graph(&events).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn trivial_direction_is_annihilated() {
        let g = two_block();
        let (r, c) = masses(&g);
        let x: Vec<f64> = c.iter().map(|c| c.sqrt()).collect();
        assert!(norm(&residual_apply(&g, &x).unwrap()) < 1e-12);
        let y: Vec<f64> = r.iter().map(|r| r.sqrt()).collect();
        assert!(norm(&residual_apply_adjoint(&g, &y).unwrap()) < 1e-12);
    }

    #[test]
    fn complete_graph_residual_is_zero() {
        let g = complete(2, 2);
        let y = residual_apply(&g, &[0.3, -1.7]).unwrap();
        assert!(norm(&y) < 1e-15);
    }

    #[test]
    fn two_block_residual_column() {
        let y = residual_apply(&two_block(), &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_close(&y, &[0.25, 0.25, -0.25, -0.25], 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            residual_apply(&two_block(), &[1.0]),
            Err(Error::DimensionMismatch { expected: 4, got: 1 })
        ));
        assert!(matches!(
            residual_apply_adjoint(&two_block(), &[1.0; 5]),
            Err(Error::DimensionMismatch { expected: 4, got: 5 })
        ));
    }

    #[test]
    fn two_block_triplet() {
        let t = leading_singular_triplet(&two_block(), &FitOptions::default()).unwrap();
        assert!((t.sigma1 - 1.0).abs() < 1e-12);
        let half = [0.5, 0.5, -0.5, -0.5];
        let sign = t.v1[0].signum();
        assert_close(&t.v1, &half.map(|h| h * sign), 1e-9);
        assert_close(&t.u1, &half.map(|h| h * sign), 1e-9);
    }

    #[test]
    fn complete_graph_is_degenerate() {
        for (u, i) in [(2, 2), (3, 5)] {
            let err = leading_singular_triplet(&complete(u, i), &FitOptions::default());
            assert!(matches!(err, Err(Error::DegenerateDimension(_))), "{err:?}");
            let err = fit_ideology(&complete(u, i), None, &FitOptions::default());
            assert!(matches!(err, Err(Error::DegenerateDimension(_))));
        }
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        // Two blocks joined by one edge: sigma1 is not reached in one step.
        let g = graph(&[
            ("a", "x"),
            ("a", "y"),
            ("b", "y"),
            ("b", "z"),
            ("c", "z"),
            ("c", "w"),
            ("d", "w"),
        ]);
        let opts = FitOptions {
            max_iter: 2,
            tol: 1e-15,
            ..FitOptions::default()
        };
        assert!(matches!(
            leading_singular_triplet(&g, &opts),
            Err(Error::NotConverged(2))
        ));
    }

    #[test]
    fn fit_two_block_with_anchors() {
        let g = two_block();
        let anchors = AnchorSet::new(vec![("a".into(), 1), ("c".into(), -1)]).unwrap();
        let m = fit_ideology(&g, Some(&anchors), &FitOptions::default()).unwrap();
        assert_close(&m.theta, &[1.0, 1.0, -1.0, -1.0], 1e-9);
        assert_close(&m.phi, &[1.0, 1.0, -1.0, -1.0], 1e-9);
        assert!((m.sigma1 - 1.0).abs() < 1e-12);

        let flipped = AnchorSet::new(vec![("a".into(), -1), ("c".into(), 1)]).unwrap();
        let m = fit_ideology(&g, Some(&flipped), &FitOptions::default()).unwrap();
        assert_close(&m.theta, &[-1.0, -1.0, 1.0, 1.0], 1e-9);
        assert_close(&m.phi, &[-1.0, -1.0, 1.0, 1.0], 1e-9);
    }

    #[test]
    fn anchor_errors() {
        let g = two_block();
        let unknown = AnchorSet::new(vec![("zz".into(), 1), ("c".into(), -1)]).unwrap();
        assert!(matches!(
            fit_ideology(&g, Some(&unknown), &FitOptions::default()),
            Err(Error::UnknownAnchor(id)) if id == "zz"
        ));
        let one_sided = AnchorSet::new(vec![("a".into(), 1)]).unwrap();
        assert!(matches!(
            fit_ideology(&g, Some(&one_sided), &FitOptions::default()),
            Err(Error::InvalidParams(_))
        ));
        assert!(AnchorSet::new(vec![("a".into(), 1), ("a".into(), -1)]).is_err());
        assert!(AnchorSet::new(vec![("a".into(), 0)]).is_err());
    }

    #[test]
    fn anchor_csv() {
        let set = AnchorSet::from_csv("user,sign\na,1\nc,-1\n".as_bytes()).unwrap();
        assert_eq!(set.entries(), &[("a".to_string(), 1), ("c".to_string(), -1)]);
        assert!(AnchorSet::from_csv("id,sign\na,1\n".as_bytes()).is_err());
        assert!(AnchorSet::from_csv("user,sign\na,2\n".as_bytes()).is_err());
        assert!(AnchorSet::from_csv("user,sign\na,left\n".as_bytes()).is_err());
    }

    #[test]
    fn fold_in_examples() {
        assert_eq!(fold_in_item(&[1.0, -1.0]).unwrap(), 0.0);
        assert_eq!(fold_in_item(&[0.7]).unwrap(), 0.7);
        assert!(matches!(fold_in_item(&[]), Err(Error::EmptySharerSet)));
        assert_eq!(fold_in_user(&[0.5, -0.5]).unwrap(), 0.0);
        assert_eq!(fold_in_user(&[-1.0]).unwrap(), -1.0);
        assert!(matches!(fold_in_user(&[]), Err(Error::EmptySharerSet)));
    }

    #[test]
    fn fold_in_matches_two_block_fit() {
        let g = two_block();
        let anchors = AnchorSet::new(vec![("a".into(), 1), ("c".into(), -1)]).unwrap();
        let m = fit_ideology(&g, Some(&anchors), &FitOptions::default()).unwrap();
        let x = g.item_ids().get("x").unwrap();
        let sharers: Vec<f64> = g.item_users(x).iter().map(|&u| m.theta[u]).collect();
        assert!((fold_in_item(&sharers).unwrap() - m.phi[x]).abs() < 1e-9);
        let a = g.user_ids().get("a").unwrap();
        let items: Vec<f64> = g.user_items(a).iter().map(|&i| m.phi[i]).collect();
        assert!((fold_in_user(&items).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn model_file_projects_and_folds_in() {
        let g = two_block();
        let anchors = AnchorSet::new(vec![("a".into(), 1), ("c".into(), -1)]).unwrap();
        let m = fit_ideology(&g, Some(&anchors), &FitOptions::default()).unwrap();
        let mut file = m.to_file(&g);
        let json = serde_json::to_string(&file).unwrap();
        assert_eq!(serde_json::from_str::<ModelFile>(&json).unwrap(), file);

        file.items.remove("x");
        file.users.remove("d");
        let p = file.project(&g);
        let x = g.item_ids().get("x").unwrap();
        let d = g.user_ids().get("d").unwrap();
        assert!((p.phi[x] - 1.0).abs() < 1e-9);
        assert!((p.theta[d] + 1.0).abs() < 1e-9);
    }
}
