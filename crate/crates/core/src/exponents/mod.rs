//! Asynchronism exponents.
//!
//! The central quantity is the minimax divergence
//!
//! ```text
//! E(a, b) = min_V max{ D(V‖a), D(V‖b) }
//! ```
//!
//! It is evaluated through its dual: for `λ ∈ [0, 1]` the Lagrangian
//! `min_V λD(V‖a) + (1−λ)D(V‖b)` is attained by the geometric mixture
//! `V_λ ∝ a^λ b^{1−λ}` with value `−ln Σ a^λ b^{1−λ}`, a concave function of
//! `λ`. Its maximum over `[0, 1]` is `E(a, b)`.
//!
//! * [`achievable_exponent`]: `E((PQ)_Y, Q⋆)` for an input law `P`; every
//!   exponent below it is achievable at rate `I(P, Q)`.
//! * [`training_bound_constant`]: `max_P min_W max{D(W‖Q|P), D(W‖Q⋆|P)}`,
//!   which reduces to `max_x E(Q(·|x), Q⋆)`. Training-based schemes at rate
//!   `R` cannot exceed `(1 − R/C)` times this constant.

mod curve;
mod oracle;

pub use curve::{
    achievable_curve, default_grid_resolution, rate_grid, training_bound_curve, CurveKind,
    CurvePoint, ExponentCurve, RATE_BUCKET,
};
pub use oracle::{
    brute_force_minimax, brute_force_training_constant, brute_force_training_constant_vertices,
    grid_error_bound, MAX_MINIMAX_ORACLE_OUTPUTS, MAX_TRAINING_ORACLE_ALPHABET,
};

use serde::Serialize;

use crate::capacity::compute_capacity;
use crate::probability::{output_marginal, ChannelModel, Distribution};
use crate::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Value of the dual function `−ln Σ_y a(y)^λ b(y)^{1−λ}`, with the sum over
/// the common support of `a` and `b`. `+∞` when the supports are disjoint.
pub fn chernoff_value(a: &Distribution, b: &Distribution, lambda: f64) -> Result<f64> {
    check_pair(a, b)?;
    Ok(dual(&log_pairs(a, b), lambda))
}

/// Normalized geometric mixture `a^λ b^{1−λ}` on the common support; `None`
/// when the supports are disjoint.
pub fn geometric_mixture(
    a: &Distribution,
    b: &Distribution,
    lambda: f64,
) -> Result<Option<Distribution>> {
    check_pair(a, b)?;
    let logs: Vec<f64> = a
        .probs()
        .iter()
        .zip(b.probs())
        .map(|(&x, &y)| {
            if x > 0.0 && y > 0.0 {
                lambda * x.ln() + (1.0 - lambda) * y.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Ok(None);
    }
    let weights = logs.iter().map(|l| (l - top).exp()).collect();
    Distribution::from_weights(weights).map(Some)
}

/// Value and maximizing dual parameter of the minimax divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimaxSolution {
    #[serde(serialize_with = "crate::format::serialize_ext")]
    pub value: f64,
    /// Maximizing `λ`; the weight on the first argument.
    pub lambda: f64,
}

/// `min_V max{D(V‖a), D(V‖b)}` in nats, to within `tol` in `λ`.
pub fn minimax_exponent(a: &Distribution, b: &Distribution, tol: f64) -> Result<f64> {
    minimax_solution(a, b, tol).map(|s| s.value)
}

pub fn minimax_solution(a: &Distribution, b: &Distribution, tol: f64) -> Result<MinimaxSolution> {
    check_pair(a, b)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    // The problem is symmetric under swapping a and b (λ ↦ 1−λ). Solving it
    // in one canonical order makes the symmetry exact rather than approximate.
    let swap = a.probs() > b.probs();
    let (first, second) = if swap { (b, a) } else { (a, b) };
    let pairs = log_pairs(first, second);
    let solution = if pairs.is_empty() {
        MinimaxSolution {
            value: f64::INFINITY,
            lambda: 0.5,
        }
    } else {
        maximize_dual(&pairs, tol)
    };
    Ok(if swap {
        MinimaxSolution {
            value: solution.value,
            lambda: 1.0 - solution.lambda,
        }
    } else {
        solution
    })
}

fn check_pair(a: &Distribution, b: &Distribution) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::AlphabetMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// `(ln a(y), ln b(y))` over the common support.
fn log_pairs(a: &Distribution, b: &Distribution) -> Vec<(f64, f64)> {
    a.probs()
        .iter()
        .zip(b.probs())
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect()
}

fn dual(pairs: &[(f64, f64)], lambda: f64) -> f64 {
    if pairs.is_empty() {
        return f64::INFINITY;
    }
    let terms = pairs
        .iter()
        .map(|(la, lb)| lambda * la + (1.0 - lambda) * lb);
    let top = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.map(|t| (t - top).exp()).sum();
    -(top + sum.ln())
}

/// Dual values below this are indistinguishable from summation rounding
/// (e.g. `a = b` up to the last bit) and are reported as exactly 0.
const ROUNDING_FLOOR: f64 = 1e-14;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search of the concave dual over `[0, 1]`, keeping the best
/// value seen, including both endpoints and the midpoint.
fn maximize_dual(pairs: &[(f64, f64)], tol: f64) -> MinimaxSolution {
    let mut best = MinimaxSolution {
        value: f64::NEG_INFINITY,
        lambda: 0.0,
    };
    let mut consider = |lambda: f64, value: f64| {
        if value > best.value {
            best = MinimaxSolution { value, lambda };
        }
        value
    };
    for lambda in [0.0, 0.5, 1.0] {
        consider(lambda, dual(pairs, lambda));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = consider(x1, dual(pairs, x1));
    let mut f2 = consider(x2, dual(pairs, x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = consider(x2, dual(pairs, x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = consider(x1, dual(pairs, x1));
        }
    }
    if best.value < ROUNDING_FLOOR {
        best.value = 0.0;
    }
    best
}

/// Exponent achievable with input law `p`: `E((PQ)_Y, Q⋆)`.
pub fn achievable_exponent(ch: &ChannelModel, p: &Distribution, tol: f64) -> Result<f64> {
    let out = output_marginal(p, ch.kernel())?;
    minimax_exponent(&out, ch.noise(), tol)
}

/// Per-letter minimax exponents `E(Q(·|x), Q⋆)`.
pub fn letter_exponents(ch: &ChannelModel, tol: f64) -> Result<Vec<f64>> {
    ch.kernel()
        .rows()
        .iter()
        .map(|row| minimax_exponent(row, ch.noise(), tol))
        .collect()
}

/// `max_x E(Q(·|x), Q⋆)`: `+∞` iff some row has support disjoint from `Q⋆`.
pub fn training_bound_constant(ch: &ChannelModel, tol: f64) -> Result<f64> {
    Ok(letter_exponents(ch, tol)?.into_iter().fold(0.0, f64::max))
}

/// The input letter whose row is hardest to confuse with noise, lowest
/// index on ties. This is the default preamble letter.
pub fn best_preamble_letter(ch: &ChannelModel, tol: f64) -> Result<usize> {
    let values = letter_exponents(ch, tol)?;
    let mut best = 0;
    for (x, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = x;
        }
    }
    Ok(best)
}

/// The linear upper bound `α(R) ≤ K·(1 − R/C)` for training-based schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainingBound {
    #[serde(serialize_with = "crate::format::serialize_ext")]
    pub constant: f64,
    pub capacity: f64,
}

impl TrainingBound {
    pub fn new(ch: &ChannelModel, tol: f64) -> Result<Self> {
        Ok(Self {
            constant: training_bound_constant(ch, tol)?,
            capacity: compute_capacity(ch, tol)?.capacity_nats,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.constant.is_infinite()
    }

    /// Bound at rate `r`. Exactly 0 at `r ≥ C` for a finite constant; an
    /// infinite constant leaves the bound vacuous everywhere on `[0, C]`.
    pub fn alpha_at(&self, r: f64) -> f64 {
        if self.constant.is_infinite() {
            return if r <= self.capacity {
                f64::INFINITY
            } else {
                0.0
            };
        }
        if self.capacity <= 0.0 || r >= self.capacity {
            return if r <= 0.0 { self.constant } else { 0.0 };
        }
        self.constant * (1.0 - r / self.capacity)
    }
}
