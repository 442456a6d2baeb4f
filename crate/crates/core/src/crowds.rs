//! Crowds-like forwarding without the mandatory first hop.
//!
//! The originator X (uniform over `n` users) holds the message. Each holder
//! submits it to the server with probability `p`, otherwise forwards it to a
//! user chosen uniformly, itself included. The server sees only the last
//! holder Y. Hence `Y = X` when nobody forwards and `Y` is uniform otherwise:
//! `p(y|x) = p·[x = y] + (1-p)/n`, and with a uniform prior the posterior has
//! the same shape.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{conditional_privacy, privacy_report, Scenario};
use crate::error::{invalid, Result};
use crate::info::{entropy_ordering_check, EntropyTriple};
use crate::prob::{Alphabet, Channel, JointPmf, Pmf};

/// Trials simulated per independently seeded chunk.
const CHUNK: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrowdsConfig {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
}

fn check(n: usize, p: f64) -> Result<()> {
    if n < 2 {
        return invalid(format!("need at least 2 users, got {n}"));
    }
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("submission probability must lie in (0,1), got {p}"));
    }
    Ok(())
}

/// Users labelled `1..=n`.
pub fn users(n: usize) -> Alphabet {
    Alphabet::new((1..=n).map(|i| i.to_string())).expect("distinct labels")
}

/// p(y|x) for the forwarding protocol.
pub fn crowds_channel(n: usize, p: f64) -> Result<Channel> {
    check(n, p)?;
    let off = (1.0 - p) / n as f64;
    let rows = (0..n)
        .map(|x| (0..n).map(|y| if x == y { p + off } else { off }).collect())
        .collect();
    Channel::new(users(n), users(n), rows)
}

/// Posterior of the originator given last holder `y_index`.
pub fn crowds_posterior(n: usize, p: f64, y_index: usize) -> Result<Pmf> {
    check(n, p)?;
    if y_index >= n {
        return invalid(format!("user index {y_index} out of range for n = {n}"));
    }
    let off = (1.0 - p) / n as f64;
    let probs = (0..n)
        .map(|x| if x == y_index { p + off } else { off })
        .collect();
    Pmf::new(users(n), probs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrowdsPrivacy {
    /// Attacker's MAP error through the generic Bayes pipeline.
    pub conditional_privacy: f64,
    /// (1-p)(1-1/n)
    pub formula: f64,
    pub h_inf: f64,
    pub h_1: f64,
    pub h_0: f64,
}

pub fn crowds_scenario(n: usize, p: f64) -> Result<Scenario> {
    Scenario::hamming(Pmf::uniform(users(n))?, crowds_channel(n, p)?)
}

pub fn crowds_privacy(n: usize, p: f64) -> Result<CrowdsPrivacy> {
    let scenario = crowds_scenario(n, p)?;
    let conditional = conditional_privacy(&scenario, 0)?;
    let EntropyTriple { h_inf, h_1, h_0 } = entropy_ordering_check(&scenario.posterior(0)?);
    Ok(CrowdsPrivacy {
        conditional_privacy: conditional,
        formula: (1.0 - p) * (1.0 - 1.0 / n as f64),
        h_inf,
        h_1,
        h_0,
    })
}

/// Outcome counts of a simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct CrowdsSimulation {
    pub config: CrowdsConfig,
    /// `counts[x][y]`: trials with originator x and last holder y.
    pub counts: Vec<Vec<u64>>,
}

impl CrowdsSimulation {
    pub fn joint(&self) -> JointPmf {
        let t = self.config.trials as f64;
        let matrix = self
            .counts
            .iter()
            .map(|r| r.iter().map(|&c| c as f64 / t).collect())
            .collect();
        let u = users(self.config.n);
        JointPmf::new(u.clone(), u, matrix).expect("counts sum to the trial count")
    }

    /// Trials in which the last holder was the originator.
    pub fn diagonal_hits(&self) -> u64 {
        (0..self.config.n).map(|i| self.counts[i][i]).sum()
    }
}

fn simulate_chunk(cfg: &CrowdsConfig, chunk: u64, geometric: &Geometric) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chunk);
    let trials = CHUNK.min(cfg.trials - chunk * CHUNK);
    let n = cfg.n;
    let mut counts = vec![0u64; n * n];
    for _ in 0..trials {
        let x = rng.random_range(0..n);
        // number of forwards before someone submits
        let forwards = geometric.sample(&mut rng);
        let y = if forwards == 0 {
            x
        } else {
            rng.random_range(0..n)
        };
        counts[x * n + y] += 1;
    }
    counts
}

/// Monte Carlo run of the protocol. The result depends only on the config:
/// chunk `i` draws from stream `i` of a ChaCha8 generator keyed by `seed`,
/// and chunk counts are merged in index order.
pub fn crowds_simulate(config: &CrowdsConfig) -> Result<CrowdsSimulation> {
    check(config.n, config.p)?;
    if config.trials == 0 {
        return invalid("need at least one trial");
    }
    let geometric =
        Geometric::new(config.p).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    let n = config.n;
    let chunks = config.trials.div_ceil(CHUNK);
    let parts: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| simulate_chunk(config, c, &geometric))
        .collect();
    let mut flat = vec![0u64; n * n];
    for part in &parts {
        for (a, b) in flat.iter_mut().zip(part) {
            *a += b;
        }
    }
    Ok(CrowdsSimulation {
        config: *config,
        counts: flat.chunks(n).map(<[u64]>::to_vec).collect(),
    })
}

/// Analytic values next to simulated ones, with z-scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrowdsReport {
    pub config: CrowdsConfig,
    pub analytic: CrowdsPrivacy,
    /// P(X = y | Y = y) from the formula.
    pub analytic_posterior_same: f64,
    /// Pooled empirical P(X = Y).
    pub empirical_posterior_same: f64,
    pub z_posterior_same: f64,
    /// Per observed user: empirical P(X = y | Y = y) and its z-score.
    pub per_user: Vec<(f64, f64)>,
    pub max_abs_z_per_user: f64,
    pub empirical_map_error: f64,
    pub z_map_error: f64,
}

fn z(observed: f64, expected: f64, samples: f64) -> f64 {
    let se = (expected * (1.0 - expected) / samples).sqrt();
    (observed - expected) / se
}

pub fn crowds_report(config: &CrowdsConfig) -> Result<CrowdsReport> {
    let analytic = crowds_privacy(config.n, config.p)?;
    let sim = crowds_simulate(config)?;
    let n = config.n;
    let t = config.trials as f64;
    let same = config.p + (1.0 - config.p) / n as f64;

    let empirical_same = sim.diagonal_hits() as f64 / t;
    let per_user: Vec<(f64, f64)> = (0..n)
        .map(|y| {
            let col: u64 = (0..n).map(|x| sim.counts[x][y]).sum();
            if col == 0 {
                return (f64::NAN, f64::NAN);
            }
            let est = sim.counts[y][y] as f64 / col as f64;
            (est, z(est, same, col as f64))
        })
        .collect();
    let max_abs_z_per_user = per_user.iter().map(|(_, z)| z.abs()).fold(0.0, f64::max);

    // attacker guesses the MAP originator of each observed column
    let correct: u64 = (0..n)
        .map(|y| (0..n).map(|x| sim.counts[x][y]).max().unwrap_or(0))
        .sum();
    let empirical_map_error = 1.0 - correct as f64 / t;

    Ok(CrowdsReport {
        config: *config,
        analytic,
        analytic_posterior_same: same,
        empirical_posterior_same: empirical_same,
        z_posterior_same: z(empirical_same, same, t),
        per_user,
        max_abs_z_per_user,
        empirical_map_error,
        z_map_error: z(empirical_map_error, analytic.formula, t),
    })
}

/// Average privacy of the protocol through the full report (equals the
/// conditional privacy of any single observation).
pub fn crowds_average_privacy(n: usize, p: f64) -> Result<f64> {
    Ok(privacy_report(&crowds_scenario(n, p)?)?.average)
}
