//! Monte-Carlo simulation of asynchronous transmissions.
//!
//! A trial draws a message `m` and a start time `ν` uniform on `1..=A`,
//! emits noise from `Q⋆`, then the codeword through the channel, then noise
//! again up to time `A + N − 1`, and feeds the outputs to a decoder one by
//! one. Trial `i` of an experiment uses stream `i` of a ChaCha generator
//! seeded with the experiment seed, so results do not depend on scheduling.

mod experiment;
mod growth;
mod sparse;
mod stream;
mod trial;

pub use experiment::{
    asynchronism_level, run_experiment, trial_rng, Budget, CodebookSpec, DecoderSpec,
    ExperimentConfig, ExperimentReport, Scheme, DEFAULT_MAX_LEVEL, DEFAULT_MAX_SYMBOLS,
};
pub use growth::{delay_growth_experiment, growth_threshold, GrowthConfig, GrowthRow};
pub use sparse::{dense_noise, sparse_noise, SegmentOutcome, SparsePlan};
pub use stream::{generate_output_stream, ChannelSampler, OutputStream};
pub use trial::{Simulation, TrialRecord};
