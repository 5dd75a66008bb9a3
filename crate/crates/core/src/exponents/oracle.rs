//! Exhaustive grid searches used to cross-check the dual reductions.
//!
//! These are deliberately naive: they search the primal problems directly
//! over lattice points of the simplex and never use geometric mixtures.

use crate::probability::{ChannelModel, Distribution, SimplexGrid};
use crate::{Error, Result};

use super::{geometric_mixture, minimax_solution};

pub const MAX_MINIMAX_ORACLE_OUTPUTS: usize = 4;
pub const MAX_TRAINING_ORACLE_ALPHABET: usize = 3;

fn subdivisions(step: f64) -> Result<usize> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidParameter(format!(
            "grid step must lie in (0, 0.1], got {step}"
        )));
    }
    Ok((1.0 / step).round() as usize)
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return f64::INFINITY;
            }
            total += a * (a / b).ln();
        }
    }
    total.max(0.0)
}

/// `min max{D(V‖a), D(V‖b)}` over lattice points `V` of the simplex with
/// spacing `grid_step`. Never below the true minimum.
pub fn brute_force_minimax(a: &Distribution, b: &Distribution, grid_step: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::AlphabetMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() > MAX_MINIMAX_ORACLE_OUTPUTS {
        return Err(Error::AlphabetTooLarge(format!(
            "{} outputs, the minimax oracle handles at most {MAX_MINIMAX_ORACLE_OUTPUTS}",
            a.len()
        )));
    }
    let n = subdivisions(grid_step)?;
    Ok(SimplexGrid::new(a.len(), n)
        .map(|v| kl(&v, a.probs()).max(kl(&v, b.probs())))
        .fold(f64::INFINITY, f64::min))
}

/// Pareto frontier of finite `(D(W‖Q(·|x)), D(W‖Q⋆))` pairs over the `W`
/// grid, sorted by the first coordinate ascending (second descending).
fn row_frontier(grid: &[Vec<f64>], row: &[f64], noise: &[f64]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = grid
        .iter()
        .map(|w| (kl(w, row), kl(w, noise)))
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut frontier: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        if frontier.last().is_none_or(|last| p.1 < last.1) {
            frontier.push(p);
        }
    }
    frontier
}

/// `min over frontier points of max{acc_a + p·a, acc_b + p·b}`. Along the
/// frontier the first term increases and the second decreases, so the
/// minimum sits next to where they cross.
fn best_on_frontier(frontier: &[(f64, f64)], p: f64, acc_a: f64, acc_b: f64) -> f64 {
    let j = frontier.partition_point(|&(a, b)| acc_a + p * a < acc_b + p * b);
    let value = |i: usize| {
        let (a, b) = frontier[i];
        (acc_a + p * a).max(acc_b + p * b)
    };
    let mut best = f64::INFINITY;
    if j < frontier.len() {
        best = best.min(value(j));
    }
    if j > 0 {
        best = best.min(value(j - 1));
    }
    best
}

/// Inner minimum over product `W` grids for one input law, given the active
/// rows as `(P(x), frontier_x)`.
fn inner_minimum(active: &[(f64, &[(f64, f64)])], acc_a: f64, acc_b: f64) -> f64 {
    match active {
        [] => acc_a.max(acc_b),
        [(p, frontier)] => best_on_frontier(frontier, *p, acc_a, acc_b),
        [(p, frontier), rest @ ..] => frontier
            .iter()
            .map(|(a, b)| inner_minimum(rest, acc_a + p * a, acc_b + p * b))
            .fold(f64::INFINITY, f64::min),
    }
}

fn check_training_oracle(ch: &ChannelModel) -> Result<()> {
    if ch.inputs() > MAX_TRAINING_ORACLE_ALPHABET || ch.outputs() > MAX_TRAINING_ORACLE_ALPHABET {
        return Err(Error::AlphabetTooLarge(format!(
            "{}x{} channel, the training oracle handles at most {m}x{m}",
            ch.inputs(),
            ch.outputs(),
            m = MAX_TRAINING_ORACLE_ALPHABET
        )));
    }
    Ok(())
}

fn frontiers(ch: &ChannelModel, n: usize) -> Vec<Vec<(f64, f64)>> {
    let grid: Vec<Vec<f64>> = SimplexGrid::new(ch.outputs(), n).collect();
    ch.kernel()
        .rows()
        .iter()
        .map(|row| row_frontier(&grid, row.probs(), ch.noise().probs()))
        .collect()
}

fn value_at(p: &[f64], frontiers: &[Vec<(f64, f64)>]) -> f64 {
    let mut active: Vec<(f64, &[(f64, f64)])> = Vec::new();
    for (x, &px) in p.iter().enumerate() {
        if px > 0.0 {
            if frontiers[x].is_empty() {
                return f64::INFINITY;
            }
            active.push((px, &frontiers[x]));
        }
    }
    inner_minimum(&active, 0.0, 0.0)
}

/// `max_P min_W max{D(W‖Q|P), D(W‖Q⋆|P)}` with `P` and every row of `W`
/// restricted to lattice points of spacing `grid_step`.
pub fn brute_force_training_constant(ch: &ChannelModel, grid_step: f64) -> Result<f64> {
    check_training_oracle(ch)?;
    let n = subdivisions(grid_step)?;
    let fr = frontiers(ch, n);
    Ok(SimplexGrid::new(ch.inputs(), n)
        .map(|p| value_at(&p, &fr))
        .fold(0.0, f64::max))
}

/// The same search with `P` restricted to point masses.
pub fn brute_force_training_constant_vertices(ch: &ChannelModel, grid_step: f64) -> Result<f64> {
    check_training_oracle(ch)?;
    let n = subdivisions(grid_step)?;
    let fr = frontiers(ch, n);
    Ok((0..ch.inputs())
        .map(|x| value_at(Distribution::point_mass(ch.inputs(), x).probs(), &fr))
        .fold(0.0, f64::max))
}

/// Nearest lattice point (spacing `1/n`) with the same support, by largest
/// remainders.
fn round_to_lattice(v: &[f64], n: usize) -> Vec<f64> {
    let scaled: Vec<f64> = v.iter().map(|x| x * n as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..v.len()).filter(|&y| v[y] > 0.0).collect();
    order.sort_by(|&i, &j| {
        (scaled[j] - scaled[j].floor()).total_cmp(&(scaled[i] - scaled[i].floor()))
    });
    for &y in order.iter().take(n.saturating_sub(assigned)) {
        counts[y] += 1;
    }
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// Estimated excess of a lattice search of spacing `grid_step` over the true
/// minimax value of each pair: the largest increase of either divergence
/// when the geometric mixtures `V_λ` (sampled at 201 values of `λ`, plus the
/// optimum) are rounded to the lattice. Training-constant searches mix rows
/// at a common `λ`, so the same estimate applies to them row by row.
pub fn grid_error_bound(pairs: &[(&Distribution, &Distribution)], grid_step: f64) -> Result<f64> {
    let n = subdivisions(grid_step)?;
    let mut bound: f64 = 0.0;
    for (a, b) in pairs {
        let opt = minimax_solution(a, b, 1e-12)?.lambda;
        for lambda in (0..=200).map(|i| i as f64 / 200.0).chain([opt]) {
            let Some(v) = geometric_mixture(a, b, lambda)? else {
                continue;
            };
            let r = round_to_lattice(v.probs(), n);
            for q in [a, b] {
                let excess = kl(&r, q.probs()) - kl(v.probs(), q.probs());
                bound = bound.max(excess);
            }
        }
    }
    Ok(bound)
}
