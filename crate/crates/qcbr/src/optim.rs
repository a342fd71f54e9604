//! Classical optimizers driving the classifier and the VQE loop.
//!
//! Two routes: SPSA (gradient-free, two evaluations per step) and a central
//! finite-difference descent with backtracking line search. Both return the
//! best iterate visited, not the last one.

use crate::error::{QcbrError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizerKind {
    Spsa,
    FdQuasiNewton,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub max_iterations: usize,
    /// SPSA gain numerator a in a_k = a/(A+k+1)^alpha.
    pub spsa_a: f64,
    /// SPSA perturbation size c in c_k = c/(k+1)^gamma.
    pub spsa_c: f64,
    /// SPSA stability constant A.
    pub spsa_big_a: f64,
    pub spsa_alpha: f64,
    pub spsa_gamma: f64,
    /// Central finite-difference step.
    pub fd_step: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl OptimizerConfig {
    /// Spall's canonical exponents; A defaults to 10% of the iteration budget.
    pub fn spsa(max_iterations: usize, seed: u64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Spsa,
            max_iterations,
            spsa_a: 0.2,
            spsa_c: 0.1,
            spsa_big_a: max_iterations as f64 * 0.1,
            spsa_alpha: 0.602,
            spsa_gamma: 0.101,
            fd_step: 1e-5,
            tolerance: 1e-6,
            seed,
        }
    }

    pub fn fd(max_iterations: usize, seed: u64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::FdQuasiNewton,
            ..OptimizerConfig::spsa(max_iterations, seed)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(QcbrError::invalid("max_iterations must be >= 1"));
        }
        if self.spsa_c <= 0.0 {
            return Err(QcbrError::invalid("spsa_c must be > 0"));
        }
        if self.tolerance <= 0.0 {
            return Err(QcbrError::invalid("tolerance must be > 0"));
        }
        Ok(())
    }
}

/// Outcome of a minimization run.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    /// Objective value recorded once per iteration.
    pub trace: Vec<f64>,
}

/// SPSA gain sequences in closed form.
pub fn spsa_gains(config: &OptimizerConfig, k: usize) -> (f64, f64) {
    let a_k = config.spsa_a / (config.spsa_big_a + k as f64 + 1.0).powf(config.spsa_alpha);
    let c_k = config.spsa_c / (k as f64 + 1.0).powf(config.spsa_gamma);
    (a_k, c_k)
}

/// Dispatch on `config.kind`.
pub fn minimize<F>(objective: F, x0: &[f64], config: &OptimizerConfig) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> f64,
{
    match config.kind {
        OptimizerKind::Spsa => spsa_minimize(objective, x0, config),
        OptimizerKind::FdQuasiNewton => fd_minimize(objective, x0, config),
    }
}

/// Spall recursion with Rademacher perturbations.
pub fn spsa_minimize<F>(
    mut objective: F,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> f64,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = x0.len();
    let mut x = x0.to_vec();
    let f0 = objective(&x);
    if !f0.is_finite() {
        return Err(QcbrError::invalid("objective not finite at x0"));
    }
    let mut best = OptimResult { x_best: x.clone(), f_best: f0, trace: Vec::new() };

    for k in 0..config.max_iterations {
        let (a_k, c_k) = spsa_gains(config, k);
        let delta: Vec<f64> = (0..n)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let x_plus: Vec<f64> = x.iter().zip(&delta).map(|(xi, d)| xi + c_k * d).collect();
        let x_minus: Vec<f64> = x.iter().zip(&delta).map(|(xi, d)| xi - c_k * d).collect();
        let f_plus = objective(&x_plus);
        let f_minus = objective(&x_minus);
        if !f_plus.is_finite() || !f_minus.is_finite() {
            return Err(QcbrError::TrainingFailure { trace: best.trace });
        }
        track_best(&mut best, &x_plus, f_plus);
        track_best(&mut best, &x_minus, f_minus);

        let scale = (f_plus - f_minus) / (2.0 * c_k);
        for (xi, d) in x.iter_mut().zip(&delta) {
            *xi -= a_k * scale / d;
        }
        let f_x = objective(&x);
        if !f_x.is_finite() {
            return Err(QcbrError::TrainingFailure { trace: best.trace });
        }
        track_best(&mut best, &x, f_x);
        best.trace.push(f_x);
    }
    Ok(best)
}

/// Central finite differences with Armijo backtracking.
pub fn fd_minimize<F>(
    mut objective: F,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> f64,
{
    config.validate()?;
    let n = x0.len();
    let h = config.fd_step;
    let mut x = x0.to_vec();
    let mut f_x = objective(&x);
    if !f_x.is_finite() {
        return Err(QcbrError::invalid("objective not finite at x0"));
    }
    let mut best = OptimResult { x_best: x.clone(), f_best: f_x, trace: Vec::new() };

    for _ in 0..config.max_iterations {
        let mut grad = vec![0.0; n];
        let mut grad_norm_sq = 0.0;
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let (fp, fm) = (objective(&xp), objective(&xm));
            if !fp.is_finite() || !fm.is_finite() {
                return Err(QcbrError::TrainingFailure { trace: best.trace });
            }
            grad[i] = (fp - fm) / (2.0 * h);
            grad_norm_sq += grad[i] * grad[i];
        }
        best.trace.push(f_x);
        if grad_norm_sq.sqrt() < config.tolerance {
            break;
        }
        // Backtracking: halve until the Armijo condition holds.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = x.iter().zip(&grad).map(|(xi, g)| xi - step * g).collect();
            let f_cand = objective(&cand);
            if f_cand.is_finite() && f_cand <= f_x - 1e-4 * step * grad_norm_sq {
                x = cand;
                f_x = f_cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        track_best(&mut best, &x, f_x);
        if !accepted {
            break; // no descent along -grad at any step length
        }
    }
    if best.trace.is_empty() {
        best.trace.push(f_x);
    }
    Ok(best)
}

fn track_best(best: &mut OptimResult, x: &[f64], f: f64) {
    if f < best.f_best {
        best.f_best = f;
        best.x_best = x.to_vec();
    }
}
