//! Hyperparameter search for (C, gamma) in log10 space over
//! [1e-3, 1e3]^2, scored by macro-F1 on a stratified holdout of the
//! training set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ecoc_predict, train_ecoc, SolverSettings, TrainError};
use crate::augment::AugmentedDataset;
use crate::metrics::macro_f1;
use crate::pose::FEATURES_PER_POSE;
use crate::seeds;

pub const LOG_BOUNDS: (f64, f64) = (-3.0, 3.0);

/// Proposes the next (log10 C, log10 gamma) point given the evaluation
/// history `[(point, score)]`.
pub trait SearchStrategy {
    fn propose(&mut self, history: &[((f64, f64), f64)]) -> (f64, f64);
}

/// Log-uniform random search; the default strategy.
pub struct RandomSearch {
    rng: ChaCha8Rng,
}

impl RandomSearch {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl SearchStrategy for RandomSearch {
    fn propose(&mut self, _history: &[((f64, f64), f64)]) -> (f64, f64) {
        (
            self.rng.gen_range(LOG_BOUNDS.0..=LOG_BOUNDS.1),
            self.rng.gen_range(LOG_BOUNDS.0..=LOG_BOUNDS.1),
        )
    }
}

/// Surrogate-model search: a Gaussian-process regression over the scored
/// points (RBF kernel, fixed length scale in log units) with an expected
/// improvement acquisition maximized over random candidates. The first few
/// proposals are space-filling random draws.
pub struct SurrogateSearch {
    rng: ChaCha8Rng,
    warmup: usize,
    candidates: usize,
    length_scale: f64,
    noise: f64,
}

impl SurrogateSearch {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            warmup: 8,
            candidates: 256,
            length_scale: 1.0,
            noise: 1e-4,
        }
    }

    fn kernel(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let d0 = (a.0 - b.0) / self.length_scale;
        let d1 = (a.1 - b.1) / self.length_scale;
        (-0.5 * (d0 * d0 + d1 * d1)).exp()
    }

    /// GP posterior mean and variance at `x` via a Cholesky solve of the
    /// (small) kernel Gram matrix.
    fn posterior(&self, history: &[((f64, f64), f64)], x: (f64, f64)) -> (f64, f64) {
        let n = history.len();
        let mean_y = history.iter().map(|(_, s)| *s).sum::<f64>() / n as f64;
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                gram[i * n + j] = self.kernel(history[i].0, history[j].0)
                    + if i == j { self.noise } else { 0.0 };
            }
        }
        let chol = cholesky(&gram, n);
        let residuals: Vec<f64> = history.iter().map(|(_, s)| s - mean_y).collect();
        let alpha = chol_solve(&chol, n, &residuals);
        let k_star: Vec<f64> = history.iter().map(|(p, _)| self.kernel(*p, x)).collect();
        let mean = mean_y + k_star.iter().zip(alpha.iter()).map(|(a, b)| a * b).sum::<f64>();
        let v = chol_forward(&chol, n, &k_star);
        let variance = (1.0 + self.noise - v.iter().map(|x| x * x).sum::<f64>()).max(1e-12);
        (mean, variance)
    }
}

fn cholesky(gram: &[f64], n: usize) -> Vec<f64> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = gram[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                l[i * n + j] = sum.max(1e-12).sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    l
}

fn chol_forward(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x
}

fn chol_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let y = chol_forward(l, n, b);
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

// Abramowitz-Stegun 7.1.26, |error| < 1.5e-7; plenty for acquisition
// ranking.
fn erf(x: f64) -> f64 {
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

impl SearchStrategy for SurrogateSearch {
    fn propose(&mut self, history: &[((f64, f64), f64)]) -> (f64, f64) {
        if history.len() < self.warmup {
            return (
                self.rng.gen_range(LOG_BOUNDS.0..=LOG_BOUNDS.1),
                self.rng.gen_range(LOG_BOUNDS.0..=LOG_BOUNDS.1),
            );
        }
        let best = history
            .iter()
            .map(|(_, s)| *s)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut best_candidate = (0.0, 0.0);
        let mut best_ei = f64::NEG_INFINITY;
        for _ in 0..self.candidates {
            let candidate = (
                self.rng.gen_range(LOG_BOUNDS.0..=LOG_BOUNDS.1),
                self.rng.gen_range(LOG_BOUNDS.0..=LOG_BOUNDS.1),
            );
            let (mean, variance) = self.posterior(history, candidate);
            let sd = variance.sqrt();
            let z = (mean - best) / sd;
            let ei = (mean - best) * normal_cdf(z) + sd * normal_pdf(z);
            if ei > best_ei {
                best_ei = ei;
                best_candidate = candidate;
            }
        }
        best_candidate
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneResult {
    pub c: f64,
    pub gamma: f64,
    pub validation_score: f64,
    /// Every evaluated `(log10 c, log10 gamma, score)` triple, in order.
    pub evaluations: Vec<(f64, f64, f64)>,
}

/// Stratified split: a seeded shuffle per class, then the first
/// `holdout_fraction` of each class goes to validation.
fn stratified_split(
    dataset: &AugmentedDataset,
    holdout_fraction: f64,
    seed: u64,
) -> (AugmentedDataset, Vec<([f64; FEATURES_PER_POSE], usize)>) {
    let mut train_features = Vec::new();
    let mut train_labels = Vec::new();
    let mut holdout = Vec::new();
    for class in 1..=dataset.class_count {
        let mut indices: Vec<usize> = dataset
            .labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        let mut rng = seeds::rng(seed, "tune-split", class as u64);
        // Fisher-Yates
        for i in (1..indices.len()).rev() {
            let j = rng.gen_range(0..=i);
            indices.swap(i, j);
        }
        let cut = ((indices.len() as f64) * holdout_fraction).ceil() as usize;
        let cut = cut.clamp(1, indices.len().saturating_sub(1).max(1));
        for (pos, idx) in indices.iter().enumerate() {
            if pos < cut {
                holdout.push((dataset.features[*idx], dataset.labels[*idx]));
            } else {
                train_features.push(dataset.features[*idx]);
                train_labels.push(dataset.labels[*idx]);
            }
        }
    }
    (
        AugmentedDataset {
            features: train_features,
            labels: train_labels,
            class_count: dataset.class_count,
            settings: dataset.settings,
        },
        holdout,
    )
}

/// Evaluates `budget` candidate points and returns the best scorer.
/// Candidates outside the log bounds are clamped.
pub fn tune_hyperparameters(
    dataset: &AugmentedDataset,
    budget: usize,
    strategy: &mut dyn SearchStrategy,
    solver: &SolverSettings,
    split_seed: u64,
) -> Result<TuneResult, TrainError> {
    assert!(budget >= 1, "search budget must be at least 1");
    let (train, holdout) = stratified_split(dataset, 0.2, split_seed);

    let mut history: Vec<((f64, f64), f64)> = Vec::new();
    let mut evaluations = Vec::new();
    let mut best: Option<(f64, f64, f64)> = None;
    for _ in 0..budget {
        let (log_c, log_gamma) = strategy.propose(&history);
        let log_c = log_c.clamp(LOG_BOUNDS.0, LOG_BOUNDS.1);
        let log_gamma = log_gamma.clamp(LOG_BOUNDS.0, LOG_BOUNDS.1);
        let c = 10f64.powf(log_c);
        let gamma = 10f64.powf(log_gamma);
        let model = train_ecoc(&train, c, gamma, solver)?;
        let preds: Vec<usize> = holdout
            .iter()
            .map(|(x, _)| ecoc_predict(&model, x).0)
            .collect();
        let labels: Vec<usize> = holdout.iter().map(|(_, l)| *l).collect();
        let score = macro_f1(&preds, &labels, dataset.class_count);
        history.push(((log_c, log_gamma), score));
        evaluations.push((log_c, log_gamma, score));
        // Ties prefer the smoother model (smaller gamma, then smaller C):
        // when validation cannot distinguish candidates, take the one
        // with the strongest smoothness prior.
        let improved = match best {
            None => true,
            Some((best_c, best_gamma, best_score)) => {
                score > best_score
                    || (score == best_score && (gamma, c) < (best_gamma, best_c))
            }
        };
        if improved {
            best = Some((c, gamma, score));
        }
    }

    let (c, gamma, validation_score) = best.expect("budget >= 1 guarantees one evaluation");
    Ok(TuneResult {
        c,
        gamma,
        validation_score,
        evaluations,
    })
}
