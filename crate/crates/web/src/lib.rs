//! Browser bindings for the demo page. Every method returns a JSON string so
//! the page needs nothing beyond `JSON.parse`.

use ideorec::stats::spearman;
use ideorec::{
    build_graph, diversify_recommend, evaluate, fit_ideology, generate, holdout_split, recommend_topn,
    DiversifyParams, FitOptions, IdeologyModel, InteractionGraph, SplitSpec, SynthDataset, SynthParams,
    WalkParams,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const HOLDOUT_K: usize = 3;
const HOLDOUT_SEED: u64 = 11;

/// A generated world, its fitted model and a held-out split for evaluation.
#[wasm_bindgen]
pub struct Demo {
    data: SynthDataset,
    graph: InteractionGraph,
    model: IdeologyModel,
    train: InteractionGraph,
    train_model: IdeologyModel,
    test: Vec<(String, String)>,
}

#[derive(Serialize)]
struct Point {
    id: String,
    truth: f64,
    fitted: f64,
}

#[derive(Serialize)]
struct Scatter {
    sigma1: f64,
    iterations: usize,
    users: Vec<Point>,
    items: Vec<Point>,
    spearman_users: f64,
    spearman_items: f64,
    cross_community: f64,
}

#[derive(Serialize)]
struct Entry {
    item: String,
    score: f64,
    phi: f64,
    backfilled: bool,
}

#[derive(Serialize)]
struct Lists {
    user: String,
    theta: f64,
    baseline: Vec<Entry>,
    diversified: Vec<Entry>,
}

#[derive(Serialize)]
struct TradeoffPoint {
    lambda: f64,
    precision: f64,
    ndcg: f64,
    list_spread: f64,
    ild: f64,
}

#[derive(Serialize)]
struct Tradeoff {
    baseline_precision: f64,
    baseline_spread: f64,
    points: Vec<TradeoffPoint>,
}

fn suffix(id: &str) -> usize {
    id[1..].parse().expect("generated ids are u{k} / i{k}")
}

fn js(e: ideorec::Error) -> JsError {
    JsError::new(&e.to_string())
}

impl Demo {
    pub fn build(n_users: usize, n_items: usize, bandwidth: f64, seed: u64) -> ideorec::Result<Demo> {
        let params = SynthParams {
            n_users,
            n_items,
            bandwidth,
            seed,
            ..SynthParams::default()
        };
        let data = generate(&params)?;
        let graph = build_graph(&data.events)?;
        let model = fit_ideology(&graph, None, &FitOptions::default())?;
        let split = holdout_split(&data.events, &SplitSpec { k: HOLDOUT_K, seed: HOLDOUT_SEED })?;
        let train = build_graph(&split.train)?;
        let train_model = fit_ideology(&train, None, &FitOptions::default())?;
        let mut demo = Demo {
            data,
            graph,
            model,
            train,
            train_model,
            test: split.test,
        };
        demo.orient();
        Ok(demo)
    }

    /// Without anchors the axis sign is arbitrary; point it the same way as
    /// the generator's axis so the scatter reads naturally.
    fn orient(&mut self) {
        let truth: Vec<f64> = (0..self.graph.num_users())
            .map(|u| self.data.true_theta[suffix(self.graph.user_ids().id(u))])
            .collect();
        if spearman(&truth, &self.model.theta) < 0.0 {
            flip(&mut self.model);
        }
        let truth: Vec<f64> = (0..self.train.num_users())
            .map(|u| self.data.true_theta[suffix(self.train.user_ids().id(u))])
            .collect();
        if spearman(&truth, &self.train_model.theta) < 0.0 {
            flip(&mut self.train_model);
        }
    }

    fn entries(&self, recs: impl Iterator<Item = (usize, f64, bool)>) -> Vec<Entry> {
        recs.map(|(item, score, backfilled)| Entry {
            item: self.graph.item_ids().id(item).to_string(),
            score,
            phi: self.model.phi[item],
            backfilled,
        })
        .collect()
    }

    pub fn scatter_json(&self) -> String {
        let points = |ids: &ideorec::graph::IdMap, truth: &[f64], fitted: &[f64]| -> Vec<Point> {
            (0..ids.len())
                .map(|k| Point {
                    id: ids.id(k).to_string(),
                    truth: truth[suffix(ids.id(k))],
                    fitted: fitted[k],
                })
                .collect()
        };
        let users = points(self.graph.user_ids(), &self.data.true_theta, &self.model.theta);
        let items = points(self.graph.item_ids(), &self.data.true_phi, &self.model.phi);
        let rho = |ps: &[Point]| {
            let (t, f): (Vec<f64>, Vec<f64>) = ps.iter().map(|p| (p.truth, p.fitted)).unzip();
            spearman(&t, &f)
        };
        let out = Scatter {
            sigma1: self.model.sigma1,
            iterations: self.model.iterations,
            spearman_users: rho(&users),
            spearman_items: rho(&items),
            cross_community: self.data.cross_community_fraction(),
            users,
            items,
        };
        serde_json::to_string(&out).expect("plain data serializes")
    }

    pub fn recommend_json(&self, user: &str, lambda: f64, tau: f64, n: usize) -> ideorec::Result<String> {
        let u = self
            .graph
            .user_ids()
            .get(user)
            .ok_or_else(|| ideorec::Error::UnknownUser(user.to_string()))?;
        let walk = WalkParams::default();
        let div = DiversifyParams {
            lambda,
            tau,
            list_size: n,
            ..DiversifyParams::default()
        };
        div.validate()?;
        let base = recommend_topn(&self.graph, u, &walk, n, true)?;
        let diversified = diversify_recommend(&self.graph, &self.model, u, &walk, &div)?;
        let out = Lists {
            user: user.to_string(),
            theta: self.model.theta[u],
            baseline: self.entries(base.iter().map(|s| (s.item, s.score, false))),
            diversified: self.entries(diversified.iter().map(|r| (r.item, r.score, r.backfilled))),
        };
        Ok(serde_json::to_string(&out).expect("plain data serializes"))
    }

    pub fn tradeoff_json(&self, steps: usize, tau: f64, n: usize) -> ideorec::Result<String> {
        if steps < 2 {
            return Err(ideorec::Error::InvalidParams("need at least 2 steps".into()));
        }
        let walk = WalkParams::default();
        let run = |lambda: f64, on: bool| {
            let div = DiversifyParams {
                lambda,
                tau,
                list_size: n,
                ..DiversifyParams::default()
            };
            div.validate()?;
            evaluate(&self.train, &self.train_model, &self.test, &walk, &div, on, n)
        };
        let base = run(1.0, false)?;
        let points = (0..steps)
            .map(|k| {
                let lambda = k as f64 / (steps - 1) as f64;
                run(lambda, true).map(|r| TradeoffPoint {
                    lambda,
                    precision: r.precision,
                    ndcg: r.ndcg,
                    list_spread: r.list_spread,
                    ild: r.ild,
                })
            })
            .collect::<ideorec::Result<Vec<_>>>()?;
        let out = Tradeoff {
            baseline_precision: base.precision,
            baseline_spread: base.list_spread,
            points,
        };
        Ok(serde_json::to_string(&out).expect("plain data serializes"))
    }
}

fn flip(m: &mut IdeologyModel) {
    m.theta.iter_mut().for_each(|x| *x = -*x);
    m.phi.iter_mut().for_each(|x| *x = -*x);
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(n_users: usize, n_items: usize, bandwidth: f64, seed: u64) -> Result<Demo, JsError> {
        Demo::build(n_users, n_items, bandwidth, seed).map_err(js)
    }

    /// True against fitted positions for every user and item.
    pub fn scatter(&self) -> String {
        self.scatter_json()
    }

    /// Plain and diversified top-`n` lists for one user.
    pub fn recommend(&self, user: &str, lambda: f64, tau: f64, n: usize) -> Result<String, JsError> {
        self.recommend_json(user, lambda, tau, n).map_err(js)
    }

    /// Held-out precision and list spread over an even grid of lambda values.
    pub fn tradeoff(&self, steps: usize, tau: f64, n: usize) -> Result<String, JsError> {
        self.tradeoff_json(steps, tau, n).map_err(js)
    }

    #[wasm_bindgen(getter)]
    pub fn num_users(&self) -> usize {
        self.graph.num_users()
    }
}
