//! Synchronous channel capacity by Blahut–Arimoto alternating maximization.
//!
//! Every iteration computes `d_x = D(Q(·|x) ‖ pQ)` for the current input law
//! `p`. Then `I(p) = Σ p_x d_x ≤ C ≤ max_x d_x`, so the spread between the two
//! is a certificate on the error of the current estimate. The solver stops
//! as soon as that spread is within the requested tolerance.

use serde::Serialize;

use crate::probability::{
    kl_divergence, mutual_information, output_marginal, ChannelModel, Distribution, Kernel,
};
use crate::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub capacity_nats: f64,
    pub input_dist: Distribution,
    pub output_dist: Distribution,
    pub iterations: usize,
    /// Upper minus lower certificate at termination.
    pub gap: f64,
}

const MAX_STEP: f64 = 1e6;
/// Weight floor keeping every input letter alive: a letter driven exactly to
/// zero could never come back under a multiplicative update.
const WEIGHT_FLOOR: f64 = 1e-300;

fn multiplicative_step(p: &Distribution, d: &[f64], upper: f64, step: f64) -> Result<Distribution> {
    let weights = p
        .probs()
        .iter()
        .zip(d)
        .map(|(px, dx)| (px * (step * (dx - upper)).exp()).max(WEIGHT_FLOOR))
        .collect();
    Distribution::from_weights(weights)
}

pub fn compute_capacity(ch: &ChannelModel, tol: f64) -> Result<CapacityResult> {
    blahut_arimoto(ch.kernel(), tol, DEFAULT_MAX_ITERATIONS)
}

pub fn blahut_arimoto(q: &Kernel, tol: f64, max_iterations: usize) -> Result<CapacityResult> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    let mut p = Distribution::uniform(q.inputs());
    let mut gap = f64::INFINITY;
    let mut step: f64 = 1.0;
    for iteration in 1..=max_iterations.max(1) {
        let out = output_marginal(&p, q)?;
        let d = q
            .rows()
            .iter()
            .map(|row| kl_divergence(row, &out))
            .collect::<Result<Vec<_>>>()?;
        let lower: f64 = p.probs().iter().zip(&d).map(|(px, dx)| px * dx).sum();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        gap = (upper - lower).max(0.0);
        if gap <= tol {
            return Ok(CapacityResult {
                capacity_nats: lower.max(0.0),
                input_dist: p,
                output_dist: out,
                iterations: iteration,
                gap,
            });
        }
        // Multiplicative step p ∝ p·exp(μ(d − max d)). μ = 1 is the plain
        // alternating-maximization update, which never decreases I(p);
        // larger μ is kept only while it keeps improving I(p).
        loop {
            let candidate = multiplicative_step(&p, &d, upper, step)?;
            if step == 1.0 {
                p = candidate;
                break;
            }
            if mutual_information(&candidate, q)? >= lower {
                p = candidate;
                step = (step * 2.0).min(MAX_STEP);
                break;
            }
            step = (step / 4.0).max(1.0);
        }
        if step == 1.0 {
            step = 2.0;
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        gap,
    })
}
