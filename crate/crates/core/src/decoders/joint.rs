use std::collections::VecDeque;

use super::score::{exceeds, LlrTable, LogLikelihood};
use super::{screen_threshold, Codebook, Decision, NoiseScreen, SequentialDecoder};
use crate::probability::ChannelModel;
use crate::{Error, Result};

/// `αN + ln N + ln M`: the training default plus a union bound over the `M`
/// codewords scored in every window.
pub fn default_joint_threshold(alpha: f64, n: usize, m: usize) -> f64 {
    alpha * n as f64 + (n as f64).ln() + (m as f64).ln()
}

#[derive(Debug, Clone)]
pub struct JointScheme {
    codebook: Codebook,
    llr: LlrTable,
    loglik: LogLikelihood,
    threshold: f64,
    screen: NoiseScreen,
}

impl JointScheme {
    pub fn new(ch: &ChannelModel, codebook: Codebook, threshold: f64) -> Result<Self> {
        if threshold.is_nan() {
            return Err(Error::InvalidParameter("threshold is NaN".into()));
        }
        codebook.check_alphabet(ch.inputs())?;
        let llr = LlrTable::new(ch);
        let dominant = ch.noise().mode();
        let t = screen_threshold(threshold);
        let min_active = codebook
            .codewords()
            .iter()
            .map(|c| llr.min_active(c, dominant, t))
            .min()
            .expect("codebook is non-empty");
        let screen = NoiseScreen {
            window: codebook.len(),
            min_active,
            dominant,
        };
        Ok(Self {
            codebook,
            llr,
            loglik: LogLikelihood::new(ch),
            threshold,
            screen,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn decoder(&self) -> JointDecoder<'_> {
        JointDecoder {
            scheme: self,
            history: VecDeque::with_capacity(self.codebook.len()),
        }
    }

    /// Best codeword score `max_m Λ_m` over a full window, with its index
    /// (lowest on ties).
    pub fn best_score(&self, window: &[usize]) -> (usize, f64) {
        self.best_score_iter(|| window.iter().copied())
    }

    fn best_score_iter<I: Iterator<Item = usize>>(&self, window: impl Fn() -> I) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (m, c) in self.codebook.codewords().iter().enumerate() {
            let v = self.llr.score(c, window()).value();
            if m == 0 || v > best.1 {
                best = (m, v);
            }
        }
        best
    }
}

#[derive(Debug, Clone)]
pub struct JointDecoder<'a> {
    scheme: &'a JointScheme,
    history: VecDeque<usize>,
}

impl SequentialDecoder for JointDecoder<'_> {
    fn observe(&mut self, y: usize) -> Decision {
        self.warm(y);
        if self.history.len() < self.scheme.codebook.len() {
            return Decision::Continue;
        }
        let (m, score) = self.scheme.best_score_iter(|| self.history.iter().copied());
        if exceeds(score, self.scheme.threshold) {
            Decision::Stop(m)
        } else {
            Decision::Continue
        }
    }

    fn force(&self) -> usize {
        let outputs: Vec<usize> = self.history.iter().copied().collect();
        let cb = &self.scheme.codebook;
        let skip = cb.len() - outputs.len();
        self.scheme
            .loglik
            .decode(cb.codewords().iter().map(|c| &c[skip..]), &outputs)
    }

    fn warm(&mut self, y: usize) {
        if self.history.len() == self.scheme.codebook.len() {
            self.history.pop_front();
        }
        self.history.push_back(y);
    }

    fn reset(&mut self) {
        self.history.clear();
    }

    fn screen(&self) -> Option<NoiseScreen> {
        Some(self.scheme.screen)
    }

    fn context_len(&self) -> usize {
        self.scheme.codebook.len()
    }
}
