//! Flat TOML run configuration.
//!
//! ```toml
//! rows = [[0.9, 0.1], [0.1, 0.9]]   # Q(y|x), one row per input letter
//! star = 0                          # index of the no-input letter
//!
//! n = 50                            # codeword length
//! alpha = 0.1226                    # A = ceil(exp(alpha * n))
//! messages = 4
//! trials = 2000
//! seed = 1
//! decoder = "training"              # training | joint | random_guess
//! eta = 0.2
//! lengths = [50, 100, 150]          # delay-growth only
//! ```
//!
//! Every other key is optional; unknown keys are rejected.

use serde::Deserialize;

use crate::capacity::DEFAULT_TOLERANCE;
use crate::decoders::PreambleRule;
use crate::probability::{ChannelModel, Distribution, Kernel};
use crate::sim::{Budget, CodebookSpec, DecoderSpec, ExperimentConfig, GrowthConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    Training,
    Joint,
    RandomGuess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreambleKind {
    BestLetter,
    ConstantComposition,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub rows: Vec<Vec<f64>>,
    pub star: usize,

    pub tolerance: Option<f64>,
    pub grid_resolution: Option<usize>,
    pub num_points: Option<usize>,

    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub messages: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub decoder: Option<DecoderKind>,
    pub eta: Option<f64>,
    pub threshold: Option<f64>,
    pub preamble: Option<PreambleKind>,
    pub preamble_dist: Option<Vec<f64>>,
    pub input_dist: Option<Vec<f64>>,
    pub max_level: Option<u64>,
    pub budget: Option<u64>,
    pub fast_forward: Option<bool>,
    pub keep_records: Option<bool>,

    pub lengths: Option<Vec<usize>>,

    pub minimax_step: Option<f64>,
    pub oracle_step: Option<f64>,
    pub probes: Option<usize>,
    pub replays: Option<usize>,
    /// Validation test hook: perturbs the reduced values before comparing
    /// them with the oracles.
    pub corrupt_reduction: Option<bool>,
}

pub const DEFAULT_NUM_POINTS: usize = 101;
pub const DEFAULT_MESSAGES: usize = 4;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_ETA: f64 = 0.2;

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))
    }

    pub fn channel(&self) -> Result<ChannelModel> {
        ChannelModel::new(Kernel::new(self.rows.clone())?, self.star)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(DEFAULT_TOLERANCE)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn require<T: Copy>(&self, value: Option<T>, key: &str) -> Result<T> {
        value.ok_or_else(|| Error::Parse(format!("missing key `{key}`")))
    }

    pub fn budget(&self) -> Budget {
        let mut b = match self.budget {
            Some(s) => Budget::symbols(s),
            None => Budget::default(),
        };
        if let Some(l) = self.max_level {
            b.max_level = l;
        }
        b
    }

    fn law(&self, probs: &Option<Vec<f64>>) -> Result<Option<Distribution>> {
        probs.clone().map(Distribution::new).transpose()
    }

    pub fn decoder_spec(&self) -> Result<DecoderSpec> {
        Ok(match self.decoder.unwrap_or(DecoderKind::Training) {
            DecoderKind::Training => DecoderSpec::Training {
                eta: self.eta.unwrap_or(DEFAULT_ETA),
                threshold: self.threshold,
                preamble: match self.preamble.unwrap_or(PreambleKind::BestLetter) {
                    PreambleKind::BestLetter => PreambleRule::BestLetter,
                    PreambleKind::ConstantComposition => PreambleRule::ConstantComposition(
                        self.law(&self.preamble_dist)?.ok_or_else(|| {
                            Error::Parse("constant_composition needs `preamble_dist`".into())
                        })?,
                    ),
                },
            },
            DecoderKind::Joint => DecoderSpec::Joint {
                threshold: self.threshold,
            },
            DecoderKind::RandomGuess => DecoderSpec::RandomGuess,
        })
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            channel: self.channel()?,
            n: self.require(self.n, "n")?,
            alpha: self.require(self.alpha, "alpha")?,
            trials: self.trials.unwrap_or(DEFAULT_TRIALS),
            decoder: self.decoder_spec()?,
            codebook: CodebookSpec {
                messages: self.messages.unwrap_or(DEFAULT_MESSAGES),
                input_dist: self.law(&self.input_dist)?,
            },
            seed: self.seed(),
            budget: self.budget(),
            fast_forward: self.fast_forward.unwrap_or(true),
            keep_records: self.keep_records.unwrap_or(false),
        })
    }

    pub fn growth(&self) -> Result<GrowthConfig> {
        Ok(GrowthConfig {
            channel: self.channel()?,
            eta: self.eta.unwrap_or(DEFAULT_ETA),
            alpha: self.require(self.alpha, "alpha")?,
            lengths: self
                .lengths
                .clone()
                .ok_or_else(|| Error::Parse("missing key `lengths`".into()))?,
            trials: self.trials.unwrap_or(DEFAULT_TRIALS),
            messages: self.messages.unwrap_or(DEFAULT_MESSAGES),
            seed: self.seed(),
            budget: self.budget(),
            fast_forward: self.fast_forward.unwrap_or(true),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BSC: &str = "rows = [[0.9, 0.1], [0.1, 0.9]]\nstar = 0\n";

    #[test]
    fn minimal_channel() {
        let c = Config::parse(BSC).unwrap();
        assert_eq!(c.channel().unwrap(), ChannelModel::bsc(0.1).unwrap());
        assert_eq!(c.tolerance(), 1e-9);
        assert_eq!(c.experiment().unwrap_err().kind(), "parse");
    }

    #[test]
    fn rejects_unknown_keys_and_bad_rows() {
        assert_eq!(
            Config::parse(&format!("{BSC}colour = 1\n"))
                .unwrap_err()
                .kind(),
            "parse"
        );
        let bad = Config::parse("rows = [[0.9, 0.1], [0.9, 0.6]]\nstar = 0\n").unwrap();
        match bad.channel() {
            Err(Error::InvalidRow { row, .. }) => assert_eq!(row, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn experiment_defaults_and_overrides() {
        let text = format!(
            "{BSC}n = 20\nalpha = 0.1\ndecoder = \"joint\"\nthreshold = 5.0\nbudget = 4294967296\n"
        );
        let e = Config::parse(&text).unwrap().experiment().unwrap();
        assert_eq!(
            e.decoder,
            DecoderSpec::Joint {
                threshold: Some(5.0)
            }
        );
        assert_eq!(e.codebook.messages, DEFAULT_MESSAGES);
        assert_eq!(e.budget.max_symbols, 1 << 32);
        assert_eq!(e.budget.max_level, 1 << 32);
        assert!(e.fast_forward);
    }

    #[test]
    fn constant_composition_needs_a_law() {
        let text = format!("{BSC}n = 20\nalpha = 0.1\npreamble = \"constant_composition\"\n");
        assert!(Config::parse(&text).unwrap().experiment().is_err());
        let text = format!("{text}preamble_dist = [0.5, 0.5]\n");
        assert!(Config::parse(&text).unwrap().experiment().is_ok());
    }
}
