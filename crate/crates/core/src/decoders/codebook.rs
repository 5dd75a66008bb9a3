//! Codebooks and their plain-text format.
//!
//! ```text
//! N=6
//! M=2
//! preamble_len=2
//! 1 1 0 1 0 0
//! 1 1 1 0 0 1
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::exponents::best_preamble_letter;
use crate::probability::{ChannelModel, Distribution, Sampler};
use crate::{Error, Result};

/// Redraws allowed per codeword when a joint codebook insists on distinct
/// codewords.
const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    n: usize,
    preamble_len: usize,
    codewords: Vec<Vec<usize>>,
}

impl Codebook {
    /// Validates lengths and the shared prefix of `preamble_len` letters.
    pub fn new(n: usize, preamble_len: usize, codewords: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "codeword length must be positive".into(),
            ));
        }
        if codewords.is_empty() {
            return Err(Error::InvalidParameter(
                "codebook needs at least one codeword".into(),
            ));
        }
        if preamble_len > n {
            return Err(Error::InvalidParameter(format!(
                "preamble length {preamble_len} exceeds codeword length {n}"
            )));
        }
        for (m, c) in codewords.iter().enumerate() {
            if c.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "codeword {m} has length {}, expected {n}",
                    c.len()
                )));
            }
            if c[..preamble_len] != codewords[0][..preamble_len] {
                return Err(Error::InvalidParameter(format!(
                    "codeword {m} does not start with the shared preamble"
                )));
            }
        }
        Ok(Self {
            n,
            preamble_len,
            codewords,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn messages(&self) -> usize {
        self.codewords.len()
    }

    pub fn preamble_len(&self) -> usize {
        self.preamble_len
    }

    pub fn preamble(&self) -> &[usize] {
        &self.codewords[0][..self.preamble_len]
    }

    pub fn codeword(&self, m: usize) -> &[usize] {
        &self.codewords[m]
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    /// Message-carrying part of codeword `m`.
    pub fn info(&self, m: usize) -> &[usize] {
        &self.codewords[m][self.preamble_len..]
    }

    pub fn check_alphabet(&self, inputs: usize) -> Result<()> {
        for (m, c) in self.codewords.iter().enumerate() {
            if let Some(&x) = c.iter().find(|&&x| x >= inputs) {
                return Err(Error::InvalidParameter(format!(
                    "codeword {m} uses letter {x} outside an input alphabet of size {inputs}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "N={}\nM={}\npreamble_len={}\n",
            self.n,
            self.messages(),
            self.preamble_len
        );
        for c in &self.codewords {
            let line: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut header = |key: &str| -> Result<usize> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing header line {key}=")))?;
            let value = line
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or_else(|| Error::Parse(format!("expected {key}=..., found {line:?}")))?;
            value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{key} is not a count: {value:?}")))
        };
        let n = header("N")?;
        let m = header("M")?;
        let preamble_len = header("preamble_len")?;
        let codewords = lines
            .map(|line| {
                line.split_whitespace()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| Error::Parse(format!("bad letter index {t:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if codewords.len() != m {
            return Err(Error::Parse(format!(
                "header announces {m} codewords, found {}",
                codewords.len()
            )));
        }
        Self::new(n, preamble_len, codewords)
    }
}

/// How the preamble string is chosen.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PreambleRule {
    /// Repeat the letter maximizing `E(Q(·|x), Q⋆)`.
    BestLetter,
    /// A string whose letter counts are closest to the given law.
    ConstantComposition(Distribution),
}

/// `⌊ηN⌋`, robust to `η·N` landing just below an integer.
pub fn preamble_length(eta: f64, n: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!(
            "eta must lie in [0, 1], got {eta}"
        )));
    }
    Ok(((eta * n as f64 + 1e-9).floor() as usize).min(n))
}

/// Letter counts summing to `len` closest to `len·P`, by largest remainders
/// (ties to the lower letter).
pub fn composition_counts(p: &Distribution, len: usize) -> Vec<usize> {
    let scaled: Vec<f64> = p.probs().iter().map(|q| q * len as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&i, &j| {
        let (ri, rj) = (scaled[i] - scaled[i].floor(), scaled[j] - scaled[j].floor());
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    for &x in order.iter().take(len.saturating_sub(assigned)) {
        counts[x] += 1;
    }
    counts
}

pub fn build_preamble(ch: &ChannelModel, len: usize, rule: &PreambleRule) -> Result<Vec<usize>> {
    match rule {
        PreambleRule::BestLetter => Ok(vec![best_preamble_letter(ch, 1e-9)?; len]),
        PreambleRule::ConstantComposition(p) => {
            if p.len() != ch.inputs() {
                return Err(Error::AlphabetMismatch {
                    left: p.len(),
                    right: ch.inputs(),
                });
            }
            Ok(composition_counts(p, len)
                .into_iter()
                .enumerate()
                .flat_map(|(x, c)| std::iter::repeat_n(x, c))
                .collect())
        }
    }
}

/// Codewords `preamble ‖ info` with a shared preamble of `⌊ηN⌋` letters and
/// information parts drawn i.i.d. from `input_dist`.
pub fn build_training_codebook<R: Rng + ?Sized>(
    ch: &ChannelModel,
    n: usize,
    m: usize,
    eta: f64,
    input_dist: &Distribution,
    rule: &PreambleRule,
    rng: &mut R,
) -> Result<Codebook> {
    let preamble_len = preamble_length(eta, n)?;
    check_input_law(ch, input_dist)?;
    let preamble = build_preamble(ch, preamble_len, rule)?;
    let sampler = Sampler::new(input_dist);
    let codewords = (0..m)
        .map(|_| {
            let mut c = preamble.clone();
            c.extend((preamble_len..n).map(|_| sampler.draw(rng)));
            c
        })
        .collect();
    Codebook::new(n, preamble_len, codewords)
}

/// Preamble-free codebook with distinct codewords drawn i.i.d. from
/// `input_dist`.
pub fn build_joint_codebook<R: Rng + ?Sized>(
    ch: &ChannelModel,
    n: usize,
    m: usize,
    input_dist: &Distribution,
    rng: &mut R,
) -> Result<Codebook> {
    check_input_law(ch, input_dist)?;
    let support = input_dist.support().count() as f64;
    if (m as f64).ln() > n as f64 * support.ln() + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "{m} distinct codewords of length {n} cannot be drawn from {support} letters"
        )));
    }
    let sampler = Sampler::new(input_dist);
    let mut seen = HashSet::new();
    let mut codewords = Vec::with_capacity(m);
    for _ in 0..m {
        let mut attempts = 0;
        loop {
            let c: Vec<usize> = (0..n).map(|_| sampler.draw(rng)).collect();
            if seen.insert(c.clone()) {
                codewords.push(c);
                break;
            }
            attempts += 1;
            if attempts >= MAX_REDRAWS {
                return Err(Error::InvalidParameter(format!(
                    "could not draw {m} distinct codewords of length {n}"
                )));
            }
        }
    }
    Codebook::new(n, 0, codewords)
}

fn check_input_law(ch: &ChannelModel, p: &Distribution) -> Result<()> {
    if p.len() != ch.inputs() {
        return Err(Error::AlphabetMismatch {
            left: p.len(),
            right: ch.inputs(),
        });
    }
    Ok(())
}
