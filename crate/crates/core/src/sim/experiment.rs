use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decoders::{
    build_joint_codebook, build_training_codebook, default_joint_threshold,
    default_training_threshold, Codebook, JointScheme, PreambleRule, RandomGuess,
    SequentialDecoder, TrainingScheme,
};
use crate::format::{digest_hex, fmt_real, serialize_opt_ext};
use crate::probability::{ChannelModel, Distribution};
use crate::{Error, Result};

use super::trial::{Simulation, TrialRecord};

pub const DEFAULT_MAX_LEVEL: u64 = 1 << 24;
pub const DEFAULT_MAX_SYMBOLS: u64 = 1 << 30;

/// Stream index reserved for codebook generation; trial `i` uses stream `i`.
const CODEBOOK_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecoderSpec {
    Training {
        eta: f64,
        /// Defaults to `αN + ln N`.
        #[serde(serialize_with = "serialize_opt_ext")]
        threshold: Option<f64>,
        preamble: PreambleRule,
    },
    Joint {
        /// Defaults to `αN + ln N + ln M`.
        #[serde(serialize_with = "serialize_opt_ext")]
        threshold: Option<f64>,
    },
    /// Stops at time 1 with a uniformly drawn message.
    RandomGuess,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodebookSpec {
    pub messages: usize,
    /// Law of the information letters; uniform when absent.
    pub input_dist: Option<Distribution>,
}

/// Up-front limits on the asynchronism level and on the number of channel
/// symbols a run may touch (`A · trials`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_level: u64,
    pub max_symbols: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_level: DEFAULT_MAX_LEVEL,
            max_symbols: DEFAULT_MAX_SYMBOLS,
        }
    }
}

impl Budget {
    /// A single symbol budget; the level cap is raised to match if needed.
    pub fn symbols(max_symbols: u64) -> Self {
        Self {
            max_level: DEFAULT_MAX_LEVEL.max(max_symbols),
            max_symbols,
        }
    }

    pub fn check(&self, level: u64, trials: usize) -> Result<()> {
        if level > self.max_level {
            return Err(Error::BudgetExceeded(format!(
                "asynchronism level {level} exceeds the limit {}",
                self.max_level
            )));
        }
        let symbols = level as u128 * trials as u128;
        if symbols > self.max_symbols as u128 {
            return Err(Error::BudgetExceeded(format!(
                "{level} x {trials} trials = {symbols} symbols exceeds the limit {}",
                self.max_symbols
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub channel: ChannelModel,
    pub n: usize,
    pub alpha: f64,
    pub trials: usize,
    pub decoder: DecoderSpec,
    pub codebook: CodebookSpec,
    pub seed: u64,
    pub budget: Budget,
    /// Skip provably silent noise stretches instead of simulating every
    /// symbol. Changes the random draws but not their joint law.
    pub fast_forward: bool,
    pub keep_records: bool,
}

impl ExperimentConfig {
    pub fn level(&self) -> Result<u64> {
        asynchronism_level(self.alpha, self.n)
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        digest_hex(json.as_bytes())
    }
}

/// `A = ⌈e^{αN}⌉`.
pub fn asynchronism_level(alpha: f64, n: usize) -> Result<u64> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be finite and non-negative, got {alpha}"
        )));
    }
    let a = (alpha * n as f64).exp().ceil();
    if a >= u64::MAX as f64 {
        return Err(Error::BudgetExceeded(format!(
            "asynchronism level e^({alpha} x {n}) does not fit in 64 bits"
        )));
    }
    Ok((a as u64).max(1))
}

/// Codebook and decoder parameters shared by all trials of an experiment.
#[derive(Debug, Clone)]
pub enum Scheme {
    Training(TrainingScheme),
    Joint(JointScheme),
    RandomGuess(Codebook),
}

impl Scheme {
    /// Builds the codebook (from the reserved RNG stream) and the decoder
    /// tables.
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let ch = &cfg.channel;
        let m = cfg.codebook.messages;
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 messages, got {m}"
            )));
        }
        if cfg.n == 0 {
            return Err(Error::InvalidParameter(
                "codeword length must be positive".into(),
            ));
        }
        let input = cfg
            .codebook
            .input_dist
            .clone()
            .unwrap_or_else(|| Distribution::uniform(ch.inputs()));
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(CODEBOOK_STREAM);
        Ok(match &cfg.decoder {
            DecoderSpec::Training {
                eta,
                threshold,
                preamble,
            } => {
                let cb = build_training_codebook(ch, cfg.n, m, *eta, &input, preamble, &mut rng)?;
                let t = threshold.unwrap_or_else(|| default_training_threshold(cfg.alpha, cfg.n));
                Scheme::Training(TrainingScheme::new(ch, cb, t)?)
            }
            DecoderSpec::Joint { threshold } => {
                let cb = build_joint_codebook(ch, cfg.n, m, &input, &mut rng)?;
                let t = threshold.unwrap_or_else(|| default_joint_threshold(cfg.alpha, cfg.n, m));
                Scheme::Joint(JointScheme::new(ch, cb, t)?)
            }
            DecoderSpec::RandomGuess => {
                Scheme::RandomGuess(build_joint_codebook(ch, cfg.n, m, &input, &mut rng)?)
            }
        })
    }

    pub fn codebook(&self) -> &Codebook {
        match self {
            Scheme::Training(s) => s.codebook(),
            Scheme::Joint(s) => s.codebook(),
            Scheme::RandomGuess(cb) => cb,
        }
    }

    /// A fresh decoder; the random guesser draws its message from `rng`.
    pub fn decoder<R: Rng + ?Sized>(&self, rng: &mut R) -> Box<dyn SequentialDecoder + '_> {
        match self {
            Scheme::Training(s) => Box::new(s.decoder()),
            Scheme::Joint(s) => Box::new(s.decoder()),
            Scheme::RandomGuess(cb) => Box::new(RandomGuess {
                message: rng.random_range(0..cb.messages()),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub error_rate: f64,
    pub mean_delay: f64,
    /// `ln M / mean_delay`; absent when the mean delay is 0.
    #[serde(serialize_with = "serialize_opt_ext")]
    pub rate_nats: Option<f64>,
    pub trials: usize,
    pub errors: usize,
    pub messages: usize,
    pub n: usize,
    pub level: u64,
    pub config_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<TrialRecord>>,
}

impl ExperimentReport {
    pub const CSV_HEADER: &'static str =
        "config_digest,n,messages,level,trials,errors,error_rate,mean_delay,rate_nats";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.config_digest,
            self.n,
            self.messages,
            self.level,
            self.trials,
            self.errors,
            fmt_real(self.error_rate),
            fmt_real(self.mean_delay),
            self.rate_nats
                .map_or_else(|| "undefined".to_string(), fmt_real),
        )
    }
}

/// Trial `i` draws from stream `i` of the seeded generator.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let level = cfg.level()?;
    cfg.budget.check(level, cfg.trials)?;
    let scheme = Scheme::build(cfg)?;
    let codebook = scheme.codebook();
    let mut sim = Simulation::new(&cfg.channel, codebook, level)?;
    if cfg.fast_forward {
        let template = scheme.decoder(&mut trial_rng(cfg.seed, 0));
        sim = sim.with_fast_forward(&cfg.channel, template.as_ref());
    }
    let records: Vec<TrialRecord> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.seed, i);
            let mut decoder = scheme.decoder(&mut rng);
            sim.run_trial(decoder.as_mut(), &mut rng)
        })
        .collect();
    Ok(summarize(cfg, level, records))
}

fn summarize(cfg: &ExperimentConfig, level: u64, records: Vec<TrialRecord>) -> ExperimentReport {
    let trials = records.len();
    let errors = records.iter().filter(|r| r.is_error()).count();
    let total_delay: u128 = records.iter().map(|r| r.delay as u128).sum();
    let mean_delay = total_delay as f64 / trials as f64;
    let messages = cfg.codebook.messages;
    ExperimentReport {
        error_rate: errors as f64 / trials as f64,
        mean_delay,
        rate_nats: (mean_delay > 0.0).then(|| (messages as f64).ln() / mean_delay),
        trials,
        errors,
        messages,
        n: cfg.n,
        level,
        config_digest: cfg.digest(),
        records: cfg.keep_records.then_some(records),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::Kernel;

    fn config(decoder: DecoderSpec) -> ExperimentConfig {
        ExperimentConfig {
            channel: ChannelModel::bsc(0.1).unwrap(),
            n: 12,
            alpha: 0.2,
            trials: 300,
            decoder,
            codebook: CodebookSpec {
                messages: 4,
                input_dist: None,
            },
            seed: 17,
            budget: Budget::default(),
            fast_forward: true,
            keep_records: true,
        }
    }

    #[test]
    fn levels() {
        assert_eq!(asynchronism_level(0.0, 100).unwrap(), 1);
        assert_eq!(asynchronism_level(1.0, 1).unwrap(), 3);
        assert_eq!(asynchronism_level(0.5, 4).unwrap(), 8);
        assert!(asynchronism_level(-0.1, 4).is_err());
        assert!(asynchronism_level(1.0, 100).is_err());
    }

    #[test]
    fn budget_is_checked_before_trials() {
        let mut cfg = config(DecoderSpec::RandomGuess);
        cfg.alpha = 2.0;
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(err.kind(), "budget_exceeded");
        cfg.alpha = 0.2;
        cfg.budget.max_symbols = 100;
        assert_eq!(run_experiment(&cfg).unwrap_err().kind(), "budget_exceeded");
    }

    #[test]
    fn noiseless_synchronized_joint_is_error_free() {
        let mut cfg = config(DecoderSpec::Joint { threshold: None });
        cfg.channel = ChannelModel::new(Kernel::identity(2), 0).unwrap();
        cfg.alpha = 0.0;
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.level, 1);
        assert_eq!(r.errors, 0);
        assert!(r.mean_delay <= cfg.n as f64);
    }

    #[test]
    fn record_invariants() {
        for spec in [
            DecoderSpec::Training {
                eta: 0.25,
                threshold: None,
                preamble: PreambleRule::BestLetter,
            },
            DecoderSpec::Joint { threshold: None },
            DecoderSpec::RandomGuess,
        ] {
            let cfg = config(spec);
            let r = run_experiment(&cfg).unwrap();
            for rec in r.records.as_ref().unwrap() {
                assert!(rec.stop_time >= 1 && rec.stop_time < r.level + cfg.n as u64);
                assert!((1..=r.level).contains(&rec.start_time));
                assert_eq!(rec.delay, rec.stop_time.saturating_sub(rec.start_time));
            }
        }
    }

    #[test]
    fn reports_repeat_and_prefixes_are_stable() {
        let cfg = config(DecoderSpec::Joint { threshold: None });
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let mut double = cfg.clone();
        double.trials *= 2;
        let c = run_experiment(&double).unwrap();
        assert_eq!(a.records.unwrap()[..], c.records.unwrap()[..cfg.trials]);
    }

    #[test]
    fn csv_row_shape() {
        let r = run_experiment(&config(DecoderSpec::RandomGuess)).unwrap();
        assert_eq!(r.mean_delay, 0.0);
        assert_eq!(r.rate_nats, None);
        let row = r.csv_row();
        assert_eq!(
            row.split(',').count(),
            ExperimentReport::CSV_HEADER.split(',').count()
        );
        assert!(row.ends_with(",undefined"));
    }
}
