//! Rate/exponent curves and their text serializations.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::{achievable_exponent, TrainingBound};
use crate::capacity::{compute_capacity, DEFAULT_TOLERANCE as CAPACITY_TOLERANCE};
use crate::format::{fmt_real, serialize_ext};
use crate::probability::{mutual_information, ChannelModel, Distribution, SimplexGrid};
use crate::{Error, Result};

/// Width of the rate buckets used when extracting the upper envelope.
pub const RATE_BUCKET: f64 = 1e-4;

/// Largest input-law sweep the achievable curve will attempt.
pub const MAX_SWEEP_POINTS: u128 = 2_000_000;

const SMALL_ALPHABET_RESOLUTION: usize = 50;
const LARGE_ALPHABET_SWEEP: u128 = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Achievable,
    TrainingBound,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Achievable => "achievable",
            CurveKind::TrainingBound => "training_bound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub rate_nats: f64,
    #[serde(serialize_with = "serialize_ext")]
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentCurve {
    pub kind: CurveKind,
    pub channel_digest: String,
    /// Set when some sample is `+∞`.
    pub degenerate: bool,
    pub points: Vec<CurvePoint>,
}

impl ExponentCurve {
    /// Largest exponent among samples at rate `r` or above; 0 beyond the
    /// last sample.
    pub fn value_at(&self, r: f64) -> f64 {
        self.points
            .iter()
            .filter(|p| p.rate_nats >= r)
            .map(|p| p.alpha)
            .fold(0.0, f64::max)
    }

    pub fn max_rate(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.rate_nats)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rate_nats,alpha,kind\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_real(p.rate_nats),
                fmt_real(p.alpha),
                self.kind.as_str()
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }
}

/// Resolution used when none is configured: 50 subdivisions for up to three
/// inputs, otherwise the finest grid with at most 20 000 points.
pub fn default_grid_resolution(inputs: usize) -> usize {
    if inputs <= 3 {
        return SMALL_ALPHABET_RESOLUTION;
    }
    let mut r = 2;
    while SimplexGrid::point_count(inputs, r + 1) <= LARGE_ALPHABET_SWEEP {
        r += 1;
    }
    r
}

/// Upper envelope of `(I(P,Q), E((PQ)_Y, Q⋆))` over a simplex grid of input
/// laws, plus the exact point at capacity.
///
/// Rates are bucketed by flooring to [`RATE_BUCKET`], keeping the largest
/// exponent per bucket. Lowering the number of messages lowers the rate
/// without hurting the exponent, so the envelope is then made non-increasing
/// by a running maximum from the right.
pub fn achievable_curve(
    ch: &ChannelModel,
    grid_resolution: usize,
    tol: f64,
) -> Result<ExponentCurve> {
    if grid_resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid resolution must be at least 2, got {grid_resolution}"
        )));
    }
    let size = SimplexGrid::point_count(ch.inputs(), grid_resolution);
    if size > MAX_SWEEP_POINTS {
        return Err(Error::BudgetExceeded(format!(
            "input-law grid with resolution {grid_resolution} over {} letters has {size} points (limit {MAX_SWEEP_POINTS})",
            ch.inputs()
        )));
    }
    let cap = compute_capacity(ch, CAPACITY_TOLERANCE)?;
    let capacity = cap.capacity_nats;

    let grid: Vec<Vec<f64>> = SimplexGrid::new(ch.inputs(), grid_resolution).collect();
    let samples = grid
        .into_par_iter()
        .map(|probs| {
            let p = Distribution::from_weights(probs)?;
            let rate = mutual_information(&p, ch.kernel())?.min(capacity);
            Ok((rate, achievable_exponent(ch, &p, tol)?))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;

    let mut buckets: BTreeMap<i64, f64> = BTreeMap::new();
    for (rate, alpha) in samples {
        let key = (rate / RATE_BUCKET).floor() as i64;
        let slot = buckets.entry(key).or_insert(alpha);
        *slot = slot.max(alpha);
    }
    let mut points: Vec<CurvePoint> = buckets
        .into_iter()
        .map(|(key, alpha)| CurvePoint {
            rate_nats: (key as f64 * RATE_BUCKET).min(capacity),
            alpha,
        })
        .collect();
    points.push(CurvePoint {
        rate_nats: capacity,
        alpha: achievable_exponent(ch, &cap.input_dist, tol)?,
    });
    points.sort_by(|a, b| a.rate_nats.total_cmp(&b.rate_nats));
    for i in (0..points.len().saturating_sub(1)).rev() {
        points[i].alpha = points[i].alpha.max(points[i + 1].alpha);
    }
    Ok(ExponentCurve {
        kind: CurveKind::Achievable,
        channel_digest: ch.digest(),
        degenerate: points.iter().any(|p| p.alpha.is_infinite()),
        points,
    })
}

/// Evenly spaced rates on `[0, C]`, with the last one exactly `C`.
pub fn rate_grid(capacity: f64, num_points: usize) -> Vec<f64> {
    let n = num_points.max(2);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                capacity
            } else {
                capacity * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Samples of the training bound `K·(1 − R/C)` on `[0, C]`.
pub fn training_bound_curve(
    ch: &ChannelModel,
    num_points: usize,
    tol: f64,
) -> Result<ExponentCurve> {
    if num_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 curve points, got {num_points}"
        )));
    }
    let bound = TrainingBound::new(ch, tol)?;
    let points = rate_grid(bound.capacity, num_points)
        .into_iter()
        .map(|r| CurvePoint {
            rate_nats: r,
            alpha: bound.alpha_at(r),
        })
        .collect();
    Ok(ExponentCurve {
        kind: CurveKind::TrainingBound,
        channel_digest: ch.digest(),
        degenerate: bound.is_degenerate(),
        points,
    })
}
