//! The channel output process: noise, codeword, noise.

use rand::Rng;

use crate::probability::{ChannelModel, Sampler};
use crate::{Error, Result};

/// One sampler per input letter.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    rows: Vec<Sampler>,
    star: usize,
}

impl ChannelSampler {
    pub fn new(ch: &ChannelModel) -> Self {
        Self {
            rows: ch.kernel().rows().iter().map(Sampler::new).collect(),
            star: ch.star(),
        }
    }

    #[inline]
    pub fn output<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        self.rows[x].draw(rng)
    }

    #[inline]
    pub fn noise<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.rows[self.star].draw(rng)
    }
}

/// Lazily generated outputs `Y_1, .., Y_{A+N−1}` for a codeword sent at
/// time `nu`. Symbols are drawn one at a time in time order, so collecting
/// the iterator gives exactly the materialized stream.
pub struct OutputStream<'a, R: Rng + ?Sized> {
    sampler: &'a ChannelSampler,
    codeword: &'a [usize],
    nu: u64,
    end: u64,
    time: u64,
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> OutputStream<'a, R> {
    pub fn new(
        sampler: &'a ChannelSampler,
        codeword: &'a [usize],
        nu: u64,
        level: u64,
        rng: &'a mut R,
    ) -> Result<Self> {
        if codeword.is_empty() {
            return Err(Error::EmptySequence);
        }
        if nu < 1 || nu > level {
            return Err(Error::InvalidParameter(format!(
                "start time {nu} outside 1..={level}"
            )));
        }
        Ok(Self {
            sampler,
            codeword,
            nu,
            end: level + codeword.len() as u64 - 1,
            time: 0,
            rng,
        })
    }

    /// Time of the last symbol returned (0 before the first).
    pub fn time(&self) -> u64 {
        self.time
    }
}

impl<R: Rng + ?Sized> Iterator for OutputStream<'_, R> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.time >= self.end {
            return None;
        }
        self.time += 1;
        let offset = self.time.wrapping_sub(self.nu);
        Some(
            if self.time >= self.nu && offset < self.codeword.len() as u64 {
                self.sampler
                    .output(self.codeword[offset as usize], self.rng)
            } else {
                self.sampler.noise(self.rng)
            },
        )
    }
}

/// Materialized output stream of length `A + N − 1`.
pub fn generate_output_stream<R: Rng + ?Sized>(
    ch: &ChannelModel,
    codeword: &[usize],
    nu: u64,
    level: u64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let sampler = ChannelSampler::new(ch);
    Ok(OutputStream::new(&sampler, codeword, nu, level, rng)?.collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::Kernel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn synchronized_stream_is_the_codeword_image() {
        let ch = ChannelModel::new(Kernel::identity(3), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = generate_output_stream(&ch, &[2, 1, 2], 1, 1, &mut rng).unwrap();
        assert_eq!(s, vec![2, 1, 2]);
    }

    #[test]
    fn noiseless_layout() {
        let ch = ChannelModel::new(Kernel::identity(3), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = generate_output_stream(&ch, &[2, 1], 3, 5, &mut rng).unwrap();
        assert_eq!(s, vec![0, 0, 2, 1, 0, 0]);
        assert!(generate_output_stream(&ch, &[2, 1], 0, 5, &mut rng).is_err());
        assert!(generate_output_stream(&ch, &[2, 1], 6, 5, &mut rng).is_err());
    }

    #[test]
    fn lazy_and_materialized_agree() {
        let ch = ChannelModel::bsc(0.2).unwrap();
        let sampler = ChannelSampler::new(&ch);
        let cw = [1, 1, 0, 1, 0];
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let whole = generate_output_stream(&ch, &cw, 40, 100, &mut a).unwrap();
        let mut lazy = OutputStream::new(&sampler, &cw, 40, 100, &mut b).unwrap();
        let mut collected = Vec::new();
        for y in lazy.by_ref() {
            collected.push(y);
        }
        assert_eq!(lazy.time(), 104);
        assert_eq!(whole, collected);
    }

    #[test]
    fn noise_frequencies() {
        // 10^5 noise symbols from Q⋆ = (0.9, 0.1): the count of ones has sd
        // sqrt(1e5 · 0.09) ≈ 94.9; allow 3 sd.
        let ch = ChannelModel::bsc(0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = generate_output_stream(&ch, &[1], 100_000, 100_000, &mut rng).unwrap();
        let ones = s[..99_999].iter().filter(|&&y| y == 1).count() as f64;
        assert!((ones - 9_999.9).abs() < 3.0 * 94.87, "{ones}");
    }
}
