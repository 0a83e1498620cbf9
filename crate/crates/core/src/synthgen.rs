//! Polarized synthetic share data with known positions.
//!
//! Two communities of users and items are placed on the line by Gaussian
//! draws. Every (user, item) pair then shares independently with
//! probability `min(1, rho * exp(-(theta - phi)^2 / (2 bandwidth^2)))`.
//!
//! Randomness comes from one `ChaCha8Rng::seed_from_u64(seed)` stream,
//! consumed in a fixed order: user positions, item positions, then one
//! uniform draw per pair in (user, item) order. The kernel uses `libm::exp`
//! so the Bernoulli thresholds do not depend on the platform's libm.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::InteractionEvent;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub n_users: usize,
    pub n_items: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub std: f64,
    pub rho: f64,
    pub bandwidth: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n_users: 1000,
            n_items: 400,
            mean_a: -1.0,
            mean_b: 1.0,
            std: 0.25,
            rho: 0.05,
            bandwidth: 0.5,
            seed: 7,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if self.n_users < 2 || self.n_items < 2 {
            return bad("need at least 2 users and 2 items");
        }
        if !(self.std > 0.0 && self.std.is_finite()) {
            return bad("std must be positive");
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad("rho must lie in (0, 1]");
        }
        if !(self.bandwidth > 0.0) {
            return bad("bandwidth must be positive");
        }
        if !(self.mean_a.is_finite() && self.mean_b.is_finite()) {
            return bad("community means must be finite");
        }
        Ok(())
    }

    pub fn share_probability(&self, theta: f64, phi: f64) -> f64 {
        let d = theta - phi;
        (self.rho * libm::exp(-d * d / (2.0 * self.bandwidth * self.bandwidth))).min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub events: Vec<InteractionEvent>,
    /// Indexed by the numeric suffix of `u{k}`.
    pub true_theta: Vec<f64>,
    /// Indexed by the numeric suffix of `i{k}`.
    pub true_phi: Vec<f64>,
}

/// Community of entity `k` out of `n`: the first `ceil(n / 2)` belong to A.
pub fn in_community_a(k: usize, n: usize) -> bool {
    k < n.div_ceil(2)
}

pub fn generate(params: &SynthParams) -> Result<SynthDataset> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let draw_side = |n: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n)
            .map(|k| {
                let mean = if in_community_a(k, n) {
                    params.mean_a
                } else {
                    params.mean_b
                };
                let z: f64 = rng.sample(StandardNormal);
                mean + params.std * z
            })
            .collect()
    };
    let true_theta = draw_side(params.n_users, &mut rng);
    let true_phi = draw_side(params.n_items, &mut rng);

    let mut events = Vec::new();
    for (u, &theta) in true_theta.iter().enumerate() {
        let before = events.len();
        for (i, &phi) in true_phi.iter().enumerate() {
            let draw: f64 = rng.random();
            if draw < params.share_probability(theta, phi) {
                events.push(InteractionEvent::new(format!("u{u}"), format!("i{i}")));
            }
        }
        if events.len() == before {
            let mut nearest = 0;
            for (i, &phi) in true_phi.iter().enumerate() {
                if (theta - phi).abs() < (theta - true_phi[nearest]).abs() {
                    nearest = i;
                }
            }
            events.push(InteractionEvent::new(format!("u{u}"), format!("i{nearest}")));
        }
    }
    for (k, ev) in events.iter_mut().enumerate() {
        ev.ts = Some(k as u64);
    }
    Ok(SynthDataset {
        events,
        true_theta,
        true_phi,
    })
}

impl SynthDataset {
    /// Writes `id,kind,position` rows, users first.
    pub fn write_truth<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id", "kind", "position"])?;
        for (k, p) in self.true_theta.iter().enumerate() {
            out.write_record([format!("u{k}"), "user".into(), p.to_string()])?;
        }
        for (k, p) in self.true_phi.iter().enumerate() {
            out.write_record([format!("i{k}"), "item".into(), p.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Share of events whose user and item come from different communities.
    pub fn cross_community_fraction(&self) -> f64 {
        let (nu, ni) = (self.true_theta.len(), self.true_phi.len());
        let index = |id: &str| id[1..].parse::<usize>().expect("generated id");
        let cross = self
            .events
            .iter()
            .filter(|ev| in_community_a(index(&ev.user), nu) != in_community_a(index(&ev.item), ni))
            .count();
        cross as f64 / self.events.len() as f64
    }
}
