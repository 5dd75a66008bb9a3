use rand::Rng;
use serde::Serialize;

use crate::decoders::{Codebook, SequentialDecoder};
use crate::probability::ChannelModel;
use crate::{Error, Result};

use super::sparse::{dense_noise, sparse_noise, SegmentOutcome, SparsePlan};
use super::stream::ChannelSampler;

/// One simulated transmission. Messages are 0-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub message: usize,
    pub start_time: u64,
    pub stop_time: u64,
    pub decoded: usize,
    pub delay: u64,
}

impl TrialRecord {
    pub fn is_error(&self) -> bool {
        self.decoded != self.message
    }
}

/// Fixed parts of a trial: channel, codebook, level `A` and the optional
/// noise fast-forward plan.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    sampler: ChannelSampler,
    codebook: &'a Codebook,
    level: u64,
    plan: Option<SparsePlan>,
}

impl<'a> Simulation<'a> {
    /// Plain symbol-by-symbol simulation.
    pub fn new(ch: &ChannelModel, codebook: &'a Codebook, level: u64) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidParameter(
                "asynchronism level must be at least 1".into(),
            ));
        }
        codebook.check_alphabet(ch.inputs())?;
        Ok(Self {
            sampler: ChannelSampler::new(ch),
            codebook,
            level,
            plan: None,
        })
    }

    /// Enables fast-forwarding through noise for decoders shaped like
    /// `template` (same screen and context length).
    pub fn with_fast_forward(
        mut self,
        ch: &ChannelModel,
        template: &dyn SequentialDecoder,
    ) -> Self {
        self.plan = template
            .screen()
            .and_then(|s| SparsePlan::new(ch.noise(), s, template.context_len()));
        self
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn plan(&self) -> Option<&SparsePlan> {
        self.plan.as_ref()
    }

    /// Last admissible stopping time `A + N − 1`.
    pub fn horizon(&self) -> u64 {
        self.level + self.codebook.len() as u64 - 1
    }

    /// Draws `m` uniform over the messages and `ν` uniform over `1..=A`, then
    /// runs the trial.
    pub fn run_trial<D, R>(&self, decoder: &mut D, rng: &mut R) -> TrialRecord
    where
        D: SequentialDecoder + ?Sized,
        R: Rng + ?Sized,
    {
        let m = rng.random_range(0..self.codebook.messages());
        let nu = rng.random_range(1..=self.level);
        self.run_trial_at(decoder, m, nu, rng)
    }

    /// Sends codeword `m` at time `nu` and feeds the outputs to `decoder`
    /// until it stops or the stream ends.
    pub fn run_trial_at<D, R>(&self, decoder: &mut D, m: usize, nu: u64, rng: &mut R) -> TrialRecord
    where
        D: SequentialDecoder + ?Sized,
        R: Rng + ?Sized,
    {
        assert!(
            (1..=self.level).contains(&nu),
            "start time {nu} outside 1..={}",
            self.level
        );
        let codeword = self.codebook.codeword(m);
        let n = codeword.len() as u64;
        let outcome = self
            .noise(decoder, 1, nu - 1, rng)
            .or_else(|| {
                codeword.iter().enumerate().find_map(|(j, &x)| {
                    match decoder.observe(self.sampler.output(x, rng)) {
                        crate::decoders::Decision::Stop(d) => Some((nu + j as u64, d)),
                        crate::decoders::Decision::Continue => None,
                    }
                })
            })
            .or_else(|| self.noise(decoder, nu + n, self.level - nu, rng));
        let (stop_time, decoded) = outcome.unwrap_or_else(|| (self.horizon(), decoder.force()));
        TrialRecord {
            message: m,
            start_time: nu,
            stop_time,
            decoded,
            delay: stop_time.saturating_sub(nu),
        }
    }

    fn noise<D, R>(
        &self,
        decoder: &mut D,
        start: u64,
        len: u64,
        rng: &mut R,
    ) -> Option<(u64, usize)>
    where
        D: SequentialDecoder + ?Sized,
        R: Rng + ?Sized,
    {
        let outcome = match &self.plan {
            Some(plan) => sparse_noise(plan, &self.sampler, decoder, start, len, rng),
            None => dense_noise(&self.sampler, decoder, start, len, rng),
        };
        match outcome {
            SegmentOutcome::Stop(t, d) => Some((t, d)),
            SegmentOutcome::Continue => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::{Decision, RandomGuess};
    use crate::probability::Kernel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Never;

    impl SequentialDecoder for Never {
        fn observe(&mut self, _y: usize) -> Decision {
            Decision::Continue
        }
        fn force(&self) -> usize {
            1
        }
        fn warm(&mut self, _y: usize) {}
        fn reset(&mut self) {}
    }

    fn setup() -> (ChannelModel, Codebook) {
        let ch = ChannelModel::new(Kernel::identity(2), 0).unwrap();
        let cb = Codebook::new(3, 0, vec![vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
        (ch, cb)
    }

    #[test]
    fn immediate_stop_has_zero_delay() {
        let (ch, cb) = setup();
        let sim = Simulation::new(&ch, &cb, 50).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let r = sim.run_trial(&mut RandomGuess { message: 0 }, &mut rng);
            assert_eq!(r.stop_time, 1);
            assert_eq!(r.delay, 0);
        }
    }

    #[test]
    fn silent_decoder_is_forced_at_horizon() {
        let (ch, cb) = setup();
        let sim = Simulation::new(&ch, &cb, 50).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let r = sim.run_trial(&mut Never, &mut rng);
            assert_eq!(r.stop_time, 52);
            assert_eq!(r.decoded, 1);
            assert_eq!(r.delay, 52 - r.start_time);
        }
    }

    #[test]
    fn fixed_seed_repeats() {
        let (ch, cb) = setup();
        let sim = Simulation::new(&ch, &cb, 1000).unwrap();
        let a = sim.run_trial(&mut Never, &mut ChaCha8Rng::seed_from_u64(3));
        let b = sim.run_trial(&mut Never, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }
}
