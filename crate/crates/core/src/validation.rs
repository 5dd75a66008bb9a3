//! Oracle cross-checks and structural checks bundled as a pass/fail report.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::capacity::compute_capacity;
use crate::decoders::{
    build_training_codebook, check_condition_i, default_training_threshold, replay_window_test,
    verify_condition_iii, PreambleRule, TrainingScheme,
};
use crate::exponents::{
    brute_force_minimax, brute_force_training_constant, brute_force_training_constant_vertices,
    grid_error_bound, minimax_exponent, training_bound_constant, MAX_MINIMAX_ORACLE_OUTPUTS,
    MAX_TRAINING_ORACLE_ALPHABET,
};
use crate::format::fmt_real;
use crate::probability::{output_marginal, ChannelModel, Distribution};
use crate::Result;

pub const MINIMAX_TOLERANCE: f64 = 2e-3;
pub const TRAINING_TOLERANCE: f64 = 5e-3;
/// Shift applied to reduced values by the corruption hook.
const CORRUPTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    /// No check failed. Skipped checks do not count as passes, but do not
    /// fail the report either.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn status(&self, name: &str) -> Option<Status> {
        self.checks
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.status)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,status,detail\n");
        for c in &self.checks {
            let status = serde_json::to_value(c.status).expect("status serializes");
            out.push_str(&format!(
                "{},{},\"{}\"\n",
                c.name,
                status.as_str().expect("status is a string"),
                c.detail.replace('"', "'")
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOptions {
    pub tolerance: f64,
    /// Lattice spacing for the minimax oracle on binary outputs; coarser
    /// alphabets use a spacing giving a comparable number of points.
    pub minimax_step: f64,
    pub oracle_step: f64,
    pub n: usize,
    pub eta: f64,
    pub alpha: f64,
    pub messages: usize,
    pub probes: usize,
    pub replays: usize,
    pub seed: u64,
    pub corrupt_reduction: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            minimax_step: 1e-3,
            oracle_step: 1e-2,
            n: 30,
            eta: 0.2,
            alpha: 0.1,
            messages: 4,
            probes: 4000,
            replays: 10_000,
            seed: 0,
            corrupt_reduction: false,
        }
    }
}

fn check(name: &'static str, ok: bool, detail: String) -> Check {
    Check {
        name,
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn skipped(name: &'static str, detail: String) -> Check {
    Check {
        name,
        status: Status::Skipped,
        detail,
    }
}

fn minimax_step_for(outputs: usize, binary_step: f64) -> f64 {
    match outputs {
        0..=2 => binary_step,
        3 => binary_step.max(2e-3),
        _ => binary_step.max(2e-2),
    }
}

/// Runs every check that applies to `ch`.
pub fn validate(ch: &ChannelModel, opts: &ValidationOptions) -> Result<ValidationReport> {
    let shift = if opts.corrupt_reduction {
        CORRUPTION
    } else {
        0.0
    };
    let mut checks = Vec::new();

    // Pairs whose minimax value enters the bounds: every row against the
    // noise law, and the capacity-achieving output law against it.
    let noise = ch.noise();
    let capacity = compute_capacity(ch, opts.tolerance)?;
    let mut pairs: Vec<(&'static str, Distribution)> = ch
        .kernel()
        .rows()
        .iter()
        .map(|r| ("row", r.clone()))
        .collect();
    pairs.push((
        "capacity_output",
        output_marginal(&capacity.input_dist, ch.kernel())?,
    ));

    if ch.outputs() <= MAX_MINIMAX_ORACLE_OUTPUTS {
        let step = minimax_step_for(ch.outputs(), opts.minimax_step);
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for (_, a) in &pairs {
            let reduced = minimax_exponent(a, noise, opts.tolerance)? + shift;
            let brute = brute_force_minimax(a, noise, step)?;
            let allowed = MINIMAX_TOLERANCE.max(grid_error_bound(&[(a, noise)], step)? + 1e-9);
            let err = if reduced.is_infinite() && brute.is_infinite() {
                0.0
            } else {
                (reduced - brute).abs()
            };
            worst = worst.max(err);
            ok &= err <= allowed && brute >= reduced - 1e-9;
        }
        checks.push(check(
            "minimax_vs_oracle",
            ok,
            format!(
                "{} pairs, step {step}, max error {}",
                pairs.len(),
                fmt_real(worst)
            ),
        ));
    } else {
        checks.push(skipped(
            "minimax_vs_oracle",
            format!(
                "{} outputs exceed the oracle limit {MAX_MINIMAX_ORACLE_OUTPUTS}",
                ch.outputs()
            ),
        ));
    }

    let training_fits =
        ch.inputs() <= MAX_TRAINING_ORACLE_ALPHABET && ch.outputs() <= MAX_TRAINING_ORACLE_ALPHABET;
    if training_fits {
        let reduced = training_bound_constant(ch, opts.tolerance)? + shift;
        let brute = brute_force_training_constant(ch, opts.oracle_step)?;
        let rows: Vec<(&Distribution, &Distribution)> =
            ch.kernel().rows().iter().map(|r| (r, noise)).collect();
        let allowed = TRAINING_TOLERANCE.max(grid_error_bound(&rows, opts.oracle_step)? + 1e-9);
        let err = if reduced.is_infinite() && brute.is_infinite() {
            0.0
        } else {
            (reduced - brute).abs()
        };
        checks.push(check(
            "training_constant_vs_oracle",
            err <= allowed,
            format!(
                "reduced {}, oracle {}, allowed {}",
                fmt_real(reduced),
                fmt_real(brute),
                fmt_real(allowed)
            ),
        ));
        let vertices = brute_force_training_constant_vertices(ch, opts.oracle_step)?;
        let gap = if brute == vertices {
            0.0
        } else {
            (brute - vertices).abs()
        };
        checks.push(check(
            "vertex_reduction",
            gap <= 1e-9,
            format!(
                "full grid {}, vertices {}",
                fmt_real(brute),
                fmt_real(vertices)
            ),
        ));
    } else {
        for name in ["training_constant_vs_oracle", "vertex_reduction"] {
            checks.push(skipped(
                name,
                format!(
                    "{}x{} channel exceeds the oracle limit {MAX_TRAINING_ORACLE_ALPHABET}",
                    ch.inputs(),
                    ch.outputs()
                ),
            ));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cb = build_training_codebook(
        ch,
        opts.n,
        opts.messages,
        opts.eta,
        &Distribution::uniform(ch.inputs()),
        &PreambleRule::BestLetter,
        &mut rng,
    )?;
    checks.push(check(
        "condition_i",
        check_condition_i(&cb),
        format!(
            "{} codewords share a {}-letter preamble",
            cb.messages(),
            cb.preamble_len()
        ),
    ));
    let scheme = TrainingScheme::new(ch, cb, default_training_threshold(opts.alpha, opts.n))?;
    let replay = replay_window_test(ch, &scheme, opts.replays, opts.seed);
    checks.push(check(
        "condition_ii",
        replay.changes == 0,
        format!(
            "{} replays, {} detections, {} decision changes",
            replay.replays, replay.detections, replay.changes
        ),
    ));
    let est = verify_condition_iii(ch, &scheme, opts.n as u64, opts.probes, opts.seed)?;
    let iii = match (est.inconclusive, est.interval) {
        (false, Some((lo, hi))) => check(
            "condition_iii",
            lo > 0.0,
            format!(
                "{} of {} kept probes waited, 95% interval [{}, {}]",
                est.successes,
                est.accepted,
                fmt_real(lo),
                fmt_real(hi)
            ),
        ),
        _ => skipped(
            "condition_iii",
            format!(
                "inconclusive: {} kept probes of {}",
                est.accepted, est.probes
            ),
        ),
    };
    checks.push(iii);

    Ok(ValidationReport { checks })
}
