use std::collections::VecDeque;

use super::score::{exceeds, ExtSum, LlrTable, LogLikelihood};
use super::{screen_threshold, Codebook, Decision, NoiseScreen, SequentialDecoder};
use crate::probability::ChannelModel;
use crate::{Error, Result};

/// `αN + ln N`: with about `e^{αN}` noise windows, a per-window false-alarm
/// probability near `e^{−αN}/N` keeps the expected number of false alarms
/// before the codeword below one.
pub fn default_training_threshold(alpha: f64, n: usize) -> f64 {
    alpha * n as f64 + (n as f64).ln()
}

/// Everything a training decoder needs that does not change between trials.
#[derive(Debug, Clone)]
pub struct TrainingScheme {
    codebook: Codebook,
    llr: LlrTable,
    loglik: LogLikelihood,
    threshold: f64,
    /// Set when the preamble repeats one letter: the statistic then depends
    /// only on the output counts in the window.
    constant_letter: Option<usize>,
    screen: NoiseScreen,
}

impl TrainingScheme {
    pub fn new(ch: &ChannelModel, codebook: Codebook, threshold: f64) -> Result<Self> {
        if threshold.is_nan() {
            return Err(Error::InvalidParameter("threshold is NaN".into()));
        }
        codebook.check_alphabet(ch.inputs())?;
        let llr = LlrTable::new(ch);
        let preamble = codebook.preamble();
        let constant_letter = match preamble.first() {
            Some(&x) if preamble.iter().all(|&p| p == x) => Some(x),
            _ => None,
        };
        let dominant = ch.noise().mode();
        let min_active = if preamble.is_empty() {
            usize::MAX
        } else {
            llr.min_active(preamble, dominant, screen_threshold(threshold))
        };
        let screen = NoiseScreen {
            window: preamble.len().max(1),
            min_active,
            dominant,
        };
        Ok(Self {
            codebook,
            llr,
            loglik: LogLikelihood::new(ch),
            threshold,
            constant_letter,
            screen,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn decoder(&self) -> TrainingDecoder<'_> {
        TrainingDecoder {
            scheme: self,
            detector: self.detector(),
            history: VecDeque::with_capacity(self.info_len()),
            state: State::Idle,
        }
    }

    pub fn detector(&self) -> PreambleDetector<'_> {
        PreambleDetector {
            scheme: self,
            window: VecDeque::with_capacity(self.codebook.preamble_len()),
            counts: vec![0; self.llr.outputs()],
        }
    }

    fn info_len(&self) -> usize {
        self.codebook.len() - self.codebook.preamble_len()
    }

    /// Log-likelihood-ratio statistic of a full preamble window.
    pub fn statistic(&self, window: &[usize]) -> f64 {
        self.llr
            .score(self.codebook.preamble(), window.iter().copied())
            .value()
    }

    /// Maximum-likelihood message given the information part of a codeword.
    pub fn decode_message(&self, window: &[usize]) -> Result<usize> {
        if window.len() != self.info_len() {
            return Err(Error::LengthMismatch {
                left: window.len(),
                right: self.info_len(),
            });
        }
        Ok(self.decode_info(window.iter().copied()))
    }

    fn decode_info(&self, outputs: impl Iterator<Item = usize>) -> usize {
        let outputs: Vec<usize> = outputs.collect();
        let cb = &self.codebook;
        self.loglik
            .decode((0..cb.messages()).map(|m| cb.info(m)), &outputs)
    }
}

/// The detection rule `S_i` on its own: a function of the last `⌊ηN⌋`
/// outputs and nothing else.
#[derive(Debug, Clone)]
pub struct PreambleDetector<'a> {
    scheme: &'a TrainingScheme,
    window: VecDeque<usize>,
    counts: Vec<u32>,
}

impl PreambleDetector<'_> {
    fn push(&mut self, y: usize) {
        let len = self.scheme.codebook.preamble_len();
        if len == 0 {
            return;
        }
        if self.window.len() == len {
            let old = self.window.pop_front().expect("window is full");
            self.counts[old] -= 1;
        }
        self.window.push_back(y);
        self.counts[y] += 1;
    }

    fn full(&self) -> bool {
        let len = self.scheme.codebook.preamble_len();
        len > 0 && self.window.len() == len
    }

    /// Statistic of the current window; `None` until the window is full.
    pub fn statistic(&self) -> Option<f64> {
        if !self.full() {
            return None;
        }
        let s = self.scheme;
        Some(match s.constant_letter {
            Some(x) => {
                let mut sum = ExtSum::default();
                for (y, &c) in self.counts.iter().enumerate() {
                    if c > 0 {
                        sum.add_n(s.llr.get(x, y), c);
                    }
                }
                sum.value()
            }
            None => s
                .llr
                .score(s.codebook.preamble(), self.window.iter().copied())
                .value(),
        })
    }

    /// Takes the next output and returns `S_i`.
    pub fn step(&mut self, y: usize) -> bool {
        self.push(y);
        self.statistic()
            .is_some_and(|v| exceeds(v, self.scheme.threshold))
    }

    fn clear(&mut self) {
        self.window.clear();
        self.counts.iter_mut().for_each(|c| *c = 0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Idle,
    Collecting { remaining: usize },
}

#[derive(Debug, Clone)]
pub struct TrainingDecoder<'a> {
    scheme: &'a TrainingScheme,
    detector: PreambleDetector<'a>,
    /// Last `N − ⌊ηN⌋` outputs.
    history: VecDeque<usize>,
    state: State,
}

impl TrainingDecoder<'_> {
    fn remember(&mut self, y: usize) {
        let cap = self.scheme.info_len();
        if cap == 0 {
            return;
        }
        if self.history.len() == cap {
            self.history.pop_front();
        }
        self.history.push_back(y);
    }

    fn decode_history(&self) -> usize {
        self.scheme.decode_info(self.history.iter().copied())
    }
}

impl SequentialDecoder for TrainingDecoder<'_> {
    fn observe(&mut self, y: usize) -> Decision {
        self.remember(y);
        match self.state {
            State::Idle => {
                if self.detector.step(y) {
                    let remaining = self.scheme.info_len();
                    if remaining == 0 {
                        return Decision::Stop(self.decode_history());
                    }
                    self.state = State::Collecting { remaining };
                }
                Decision::Continue
            }
            State::Collecting { remaining } => {
                if remaining == 1 {
                    Decision::Stop(self.decode_history())
                } else {
                    self.state = State::Collecting {
                        remaining: remaining - 1,
                    };
                    Decision::Continue
                }
            }
        }
    }

    fn force(&self) -> usize {
        self.decode_history()
    }

    fn warm(&mut self, y: usize) {
        self.remember(y);
        self.detector.push(y);
    }

    fn reset(&mut self) {
        self.history.clear();
        self.detector.clear();
        self.state = State::Idle;
    }

    fn is_idle(&self) -> bool {
        self.state == State::Idle
    }

    fn screen(&self) -> Option<NoiseScreen> {
        Some(self.scheme.screen)
    }

    fn context_len(&self) -> usize {
        self.scheme
            .codebook
            .preamble_len()
            .max(self.scheme.info_len())
    }
}
