//! Monte Carlo check of the sampling model.
//!
//! Trial `t` draws from a ChaCha8 stream selected by `(seed, t)`, so results
//! do not depend on how trials are spread over threads.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::das::{self, DasError, DasParams, PrecisionConfig};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Das(#[from] DasError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub c: usize,
    pub trials: u64,
    pub seed: u64,
    /// Values of `c₀` at which `Pr(Y > c₀)` is estimated.
    #[serde(default)]
    pub reject_thresholds: Vec<usize>,
    /// Node counts `c₀` at which `q_{c₀}` is estimated.
    #[serde(default)]
    pub live_counts: Vec<usize>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.n == 0 || self.d > self.n {
            return bad(format!("need n >= 1 and d <= n (got n={}, d={})", self.n, self.d));
        }
        if self.s > self.n {
            return bad(format!("s={} exceeds n={}", self.s, self.n));
        }
        if self.c == 0 || self.trials == 0 {
            return bad("c and trials must be positive".into());
        }
        if let Some(&c0) = self.reject_thresholds.iter().find(|&&c0| c0 > self.c) {
            return bad(format!("reject threshold {c0} exceeds c={}", self.c));
        }
        if let Some(&c0) = self.live_counts.iter().find(|&&c0| c0 == 0 || c0 > self.c) {
            return bad(format!("live count {c0} outside 1..={}", self.c));
        }
        Ok(())
    }
}

/// A Bernoulli frequency compared with its model value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub analytic: Option<f64>,
    pub samples: u64,
}

impl Estimate {
    fn new(successes: u64, samples: u64, analytic: Option<f64>) -> Estimate {
        let p = successes as f64 / samples as f64;
        Estimate { estimate: p, std_error: (p * (1.0 - p) / samples as f64).sqrt(), analytic, samples }
    }

    /// Binomial standard deviation of the frequency under the model value.
    pub fn model_sigma(&self) -> Option<f64> {
        self.analytic.map(|a| (a * (1.0 - a) / self.samples as f64).sqrt())
    }

    /// `|estimate − analytic| ≤ k·σ`, with σ taken from the model value.
    pub fn within_sigmas(&self, k: f64) -> Option<bool> {
        let a = self.analytic?;
        Some((self.estimate - a).abs() <= k * self.model_sigma()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub c0: usize,
    #[serde(flatten)]
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub p1: Estimate,
    pub reject: Vec<ThresholdEstimate>,
    pub live: Vec<ThresholdEstimate>,
    pub mean_rejecting_nodes: f64,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    hits: u64,
    // reject_hist[y] = trials with exactly y rejecting nodes
    reject_hist: Vec<u64>,
    // cover_hist[m] = trials first reaching n−d+1 distinct chunks after m nodes; index 0 = never
    cover_hist: Vec<u64>,
}

impl Tally {
    fn empty(c: usize) -> Tally {
        Tally { hits: 0, reject_hist: vec![0; c + 1], cover_hist: vec![0; c + 1] }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.hits += other.hits;
        for (a, b) in self.reject_hist.iter_mut().zip(other.reject_hist) {
            *a += b;
        }
        for (a, b) in self.cover_hist.iter_mut().zip(other.cover_hist) {
            *a += b;
        }
        self
    }
}

fn run_trial(cfg: &SimConfig, trial: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);
    let mut hidden = vec![false; cfg.n];
    for i in sample(&mut rng, cfg.n, cfg.d) {
        hidden[i] = true;
    }
    let need = cfg.n - cfg.d + 1;
    let mut seen = vec![false; cfg.n];
    let mut distinct = 0;
    let mut covered_at = 0;
    let mut rejecting = 0;
    for node in 1..=cfg.c {
        let mut hit = false;
        for i in sample(&mut rng, cfg.n, cfg.s) {
            hit |= hidden[i];
            if !seen[i] {
                seen[i] = true;
                distinct += 1;
            }
        }
        if hit {
            rejecting += 1;
        }
        if covered_at == 0 && distinct >= need {
            covered_at = node;
        }
    }
    let mut t = Tally::empty(cfg.c);
    t.hits = rejecting as u64;
    t.reject_hist[rejecting] = 1;
    t.cover_hist[covered_at] = 1;
    t
}

fn analytic_params(cfg: &SimConfig) -> DasParams {
    DasParams { n: cfg.n, k: 1, d: cfg.d, c: cfg.c, s: cfg.s, gamma: 0.5, eta: 0.5, chat_target: 1, ctilde_target: 1 }
}

pub fn simulate(cfg: &SimConfig) -> Result<SimReport, SimError> {
    cfg.validate()?;
    let tally = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .reduce(|| Tally::empty(cfg.c), Tally::merge);

    let prec = PrecisionConfig::default();
    let params = analytic_params(cfg);
    // nothing hidden: no node can reject and n−d+1 distinct chunks are never reached
    let trivial = cfg.d == 0;
    let p1_model = if trivial { 0.0 } else { das::to_f64(&das::p1(&params, &prec)?) };
    let p1 = Estimate::new(tally.hits, cfg.trials * cfg.c as u64, Some(p1_model));

    let reject = cfg
        .reject_thresholds
        .iter()
        .map(|&c0| {
            let over: u64 = tally.reject_hist[c0 + 1..].iter().sum();
            let model = if trivial { 0.0 } else { das::to_f64(&das::p_c(c0, &params, &prec)?) };
            Ok(ThresholdEstimate { c0, estimate: Estimate::new(over, cfg.trials, Some(model)) })
        })
        .collect::<Result<Vec<_>, SimError>>()?;

    let live = cfg
        .live_counts
        .iter()
        .map(|&c0| {
            let covered: u64 = tally.cover_hist[1..=c0].iter().sum();
            let model = if trivial {
                Some(0.0)
            } else if cfg.s <= cfg.n - cfg.d {
                Some(das::to_f64(&das::q_c_adaptive(&params.with_c(c0), &prec)?))
            } else {
                None
            };
            Ok(ThresholdEstimate { c0, estimate: Estimate::new(covered, cfg.trials, model) })
        })
        .collect::<Result<Vec<_>, SimError>>()?;

    Ok(SimReport {
        config: cfg.clone(),
        p1,
        reject,
        live,
        mean_rejecting_nodes: tally.hits as f64 / cfg.trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(trials: u64, seed: u64) -> SimConfig {
        SimConfig { n: 40, d: 6, s: 5, c: 20, trials, seed, reject_thresholds: vec![5, 10], live_counts: vec![8, 15, 20] }
    }

    #[test]
    fn deterministic_for_seed() {
        let a = simulate(&cfg(500, 7)).unwrap();
        let b = simulate(&cfg(500, 7)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&cfg(500, 8)).unwrap();
        assert_ne!(a.p1.estimate, c.p1.estimate);
    }

    #[test]
    fn agrees_with_model() {
        let r = simulate(&cfg(20_000, 1)).unwrap();
        assert_eq!(r.p1.within_sigmas(4.0), Some(true), "{:?}", r.p1);
        for e in r.reject.iter().chain(&r.live) {
            assert_eq!(e.estimate.within_sigmas(4.0), Some(true), "{e:?}");
        }
    }

    #[test]
    fn degenerate_cases() {
        let mut c = cfg(50, 0);
        c.s = 0;
        let r = simulate(&c).unwrap();
        assert_eq!(r.p1.estimate, 0.0);
        c.s = c.n;
        let r = simulate(&c).unwrap();
        assert_eq!(r.p1.estimate, 1.0);
        assert!(r.live[0].estimate.analytic.is_none());
        assert_eq!(r.live[0].estimate.estimate, 1.0);
    }

    #[test]
    fn nothing_hidden() {
        let mut c = cfg(200, 3);
        c.d = 0;
        let r = simulate(&c).unwrap();
        assert_eq!(r.p1.estimate, 0.0);
        assert!(r.reject.iter().chain(&r.live).all(|e| e.estimate.estimate == 0.0 && e.estimate.within_sigmas(3.0) == Some(true)));
    }

    #[test]
    fn single_node_at_maximal_sample() {
        // s = n − d: the node avoids every hidden chunk with probability 1/C(n,d)
        let c = SimConfig { n: 8, d: 2, s: 6, c: 1, trials: 20_000, seed: 5, reject_thresholds: vec![0], live_counts: vec![1] };
        let r = simulate(&c).unwrap();
        assert!((r.p1.analytic.unwrap() - (1.0 - 1.0 / 28.0)).abs() < 1e-15);
        assert_eq!(r.p1.within_sigmas(3.0), Some(true), "{:?}", r.p1);
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = cfg(10, 0);
        c.live_counts = vec![0];
        assert!(simulate(&c).is_err());
        let mut c = cfg(10, 0);
        c.d = 41;
        assert!(simulate(&c).is_err());
    }
}
