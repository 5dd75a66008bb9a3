//! Codebooks and sequential decoders.
//!
//! A decoder is fed the channel output one symbol at a time and answers
//! [`Decision::Continue`] or [`Decision::Stop`] before it sees the next
//! symbol, so its stopping time depends only on the past by construction.
//! When the stream ends without a stop, the harness calls
//! [`SequentialDecoder::force`].
//!
//! * [`TrainingDecoder`]: slides a window over the last `⌊ηN⌋` outputs and
//!   looks for the preamble with a log-likelihood-ratio test against noise.
//!   After a detection it waits for the `N − ⌊ηN⌋` information symbols and
//!   decodes them by maximum likelihood.
//! * [`JointDecoder`]: scores every codeword against the last `N` outputs and
//!   stops as soon as one scores above a threshold.
//! * [`RandomGuess`]: stops immediately with a message fixed in advance.

mod codebook;
mod conditions;
mod joint;
mod score;
mod training;

pub use codebook::{
    build_joint_codebook, build_preamble, build_training_codebook, composition_counts,
    preamble_length, Codebook, PreambleRule,
};
pub use conditions::{
    check_condition_i, replay_window_test, silence_information, verify_condition_iii,
    wilson_interval, ConditionIiiEstimate, ReplayOutcome, MIN_ACCEPTED_PROBES,
};
pub use joint::{default_joint_threshold, JointDecoder, JointScheme};
pub use score::{exceeds, ExtSum, LlrTable, LogLikelihood};
pub use training::{default_training_threshold, PreambleDetector, TrainingDecoder, TrainingScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Stop(usize),
}

/// Shortcut through pure noise for decoders that cannot stop on it.
///
/// While the decoder is idle, its decision after a symbol depends only on
/// the last `window` outputs, and it can only stop (or leave the idle state)
/// if at least `min_active` of them differ from `dominant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseScreen {
    pub window: usize,
    pub min_active: usize,
    pub dominant: usize,
}

pub trait SequentialDecoder {
    /// Takes the next output symbol.
    fn observe(&mut self, y: usize) -> Decision;

    /// Message to emit when the stream ends without a stop.
    fn force(&self) -> usize;

    /// Takes a symbol into the history without evaluating a decision. Only
    /// valid where a [`NoiseScreen`] guarantees no decision could fire.
    fn warm(&mut self, y: usize);

    /// Forgets all history.
    fn reset(&mut self);

    /// True while the decoder is only scanning for a start.
    fn is_idle(&self) -> bool {
        true
    }

    fn screen(&self) -> Option<NoiseScreen> {
        None
    }

    /// Number of past outputs the decoder keeps.
    fn context_len(&self) -> usize {
        0
    }
}

/// Stops at the first symbol with a message chosen in advance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomGuess {
    pub message: usize,
}

impl SequentialDecoder for RandomGuess {
    fn observe(&mut self, _y: usize) -> Decision {
        Decision::Stop(self.message)
    }

    fn force(&self) -> usize {
        self.message
    }

    fn warm(&mut self, _y: usize) {}

    fn reset(&mut self) {}
}

/// Conservative slack on thresholds used by noise screens, so that rounding
/// differences between the screen and the decoder never hide a stop.
fn screen_threshold(threshold: f64) -> f64 {
    if threshold.is_finite() {
        threshold - 1e-7 * (1.0 + threshold.abs())
    } else {
        threshold
    }
}
