use serde::Serialize;

use crate::decoders::PreambleRule;
use crate::exponents::training_bound_constant;
use crate::format::serialize_opt_ext;
use crate::probability::ChannelModel;
use crate::{Error, Result};

use super::experiment::{run_experiment, Budget, CodebookSpec, DecoderSpec, ExperimentConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthConfig {
    pub channel: ChannelModel,
    pub eta: f64,
    pub alpha: f64,
    pub lengths: Vec<usize>,
    pub trials: usize,
    pub messages: usize,
    pub seed: u64,
    pub budget: Budget,
    pub fast_forward: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub level: u64,
    pub mean_delay: f64,
    pub error_rate: f64,
    #[serde(serialize_with = "serialize_opt_ext")]
    pub rate_nats: Option<f64>,
}

/// Smallest `α` for which the growth experiment runs: `η·K`.
pub fn growth_threshold(ch: &ChannelModel, eta: f64) -> Result<f64> {
    let k = training_bound_constant(ch, 1e-9)?;
    Ok(if eta == 0.0 { 0.0 } else { eta * k })
}

/// Mean delay of the default training scheme at each codeword length.
///
/// Refuses to run below `α = η·K`, where the preamble alone can already
/// beat the noise.
pub fn delay_growth_experiment(cfg: &GrowthConfig) -> Result<Vec<GrowthRow>> {
    if cfg.lengths.is_empty() {
        return Err(Error::InvalidParameter("no codeword lengths given".into()));
    }
    if cfg.lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "codeword lengths must be strictly increasing".into(),
        ));
    }
    let threshold = growth_threshold(&cfg.channel, cfg.eta)?;
    if cfg.alpha < threshold {
        return Err(Error::RegimeViolated {
            alpha: cfg.alpha,
            threshold,
        });
    }
    let configs: Vec<ExperimentConfig> = cfg
        .lengths
        .iter()
        .map(|&n| ExperimentConfig {
            channel: cfg.channel.clone(),
            n,
            alpha: cfg.alpha,
            trials: cfg.trials,
            decoder: DecoderSpec::Training {
                eta: cfg.eta,
                threshold: None,
                preamble: PreambleRule::BestLetter,
            },
            codebook: CodebookSpec {
                messages: cfg.messages,
                input_dist: None,
            },
            seed: cfg.seed,
            budget: cfg.budget,
            fast_forward: cfg.fast_forward,
            keep_records: false,
        })
        .collect();
    // Check every budget before running anything.
    for c in &configs {
        c.budget.check(c.level()?, c.trials)?;
    }
    configs
        .iter()
        .map(|c| {
            let r = run_experiment(c)?;
            Ok(GrowthRow {
                n: c.n,
                level: r.level,
                mean_delay: r.mean_delay,
                error_rate: r.error_rate,
                rate_nats: r.rate_nats,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> GrowthConfig {
        GrowthConfig {
            channel: ChannelModel::bsc(0.1).unwrap(),
            eta: 0.2,
            alpha: 0.15,
            lengths: vec![10, 20],
            trials: 100,
            messages: 2,
            seed: 3,
            budget: Budget::default(),
            fast_forward: true,
        }
    }

    #[test]
    fn refuses_below_threshold() {
        let mut cfg = config();
        cfg.alpha = 0.05;
        match delay_growth_experiment(&cfg) {
            Err(Error::RegimeViolated { threshold, .. }) => {
                assert!((threshold - 0.2 * 0.5108256237659907).abs() < 1e-9)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lengths_must_increase() {
        let mut cfg = config();
        cfg.lengths = vec![20, 20];
        assert!(delay_growth_experiment(&cfg).is_err());
    }

    #[test]
    fn produces_one_row_per_length() {
        let rows = delay_growth_experiment(&config()).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![10, 20]);
        assert_eq!(rows[0].level, 5);
    }

    #[test]
    fn without_preamble_decoding_is_forced() {
        // No preamble: every trial runs to A + N − 1.
        let mut cfg = config();
        cfg.eta = 0.0;
        cfg.alpha = 0.1;
        cfg.lengths = vec![20];
        let rows = delay_growth_experiment(&cfg).unwrap();
        assert_eq!(rows[0].level, 8);
        // delay = A + N − 1 − ν with ν uniform on 1..=8: mean 19 + 3.5.
        assert!(
            (rows[0].mean_delay - 22.5).abs() < 1.0,
            "{}",
            rows[0].mean_delay
        );
    }
}
