//! Probability vectors, stochastic kernels and the basic information measures
//! built on them.
//!
//! Letters of every alphabet are plain indices `0..k`. Divergences use the
//! conventions `0·ln(0/q) = 0` and `p·ln(p/0) = +∞` for `p > 0`; `+∞` is an
//! ordinary `f64::INFINITY` return value, never an error.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::Rng;
use serde::Serialize;

use crate::format::digest_hex;
use crate::{Error, Result};

/// Slack allowed on the total mass of a probability vector before it is
/// rejected. Anything within the slack is renormalized.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates `probs` as a point of the simplex.
    ///
    /// Entries must be finite and non-negative and sum to one within
    /// [`SIMPLEX_TOLERANCE`]; the vector is renormalized to absorb that slack.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {p}, expected a finite non-negative value"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, expected 1"
            )));
        }
        Ok(Self::renormalized(probs, total))
    }

    /// Normalizes arbitrary non-negative weights with a positive total.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self::renormalized(weights, total))
    }

    fn renormalized(mut probs: Vec<f64>, total: f64) -> Self {
        if total != 1.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Self { probs }
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform distribution needs a non-empty alphabet");
        Self {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn point_mass(size: usize, letter: usize) -> Self {
        assert!(
            letter < size,
            "letter {letter} outside alphabet of size {size}"
        );
        let mut probs = vec![0.0; size];
        probs[letter] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, letter: usize) -> f64 {
        self.probs[letter]
    }

    /// Letters with strictly positive probability.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, _)| i)
    }

    /// Most likely letter, lowest index on ties.
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn total_variation(&self, other: &Distribution) -> Result<f64> {
        same_alphabet(self.len(), other.len())?;
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}

fn same_alphabet(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch { left, right })
    }
}

/// A stochastic matrix: one output distribution per input letter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Kernel {
    rows: Vec<Distribution>,
}

impl Kernel {
    /// Builds a kernel from raw rows, naming the offending row on failure.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(row, probs)| {
                Distribution::new(probs).map_err(|e| Error::InvalidRow {
                    row,
                    reason: match e {
                        Error::InvalidDistribution(reason) => reason,
                        other => other.to_string(),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<Distribution>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidParameter(
                "kernel needs at least one row".into(),
            ));
        };
        let outputs = first.len();
        for (row, d) in rows.iter().enumerate() {
            if d.len() != outputs {
                return Err(Error::InvalidRow {
                    row,
                    reason: format!("has {} outputs, expected {outputs}", d.len()),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(size: usize) -> Self {
        Self {
            rows: (0..size)
                .map(|x| Distribution::point_mass(size, x))
                .collect(),
        }
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, input: usize) -> &Distribution {
        &self.rows[input]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    /// Transition probability `Q(y|x)`.
    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.rows[input].probs[output]
    }

    /// Kernel composition `self` followed by `next`.
    pub fn compose(&self, next: &Kernel) -> Result<Kernel> {
        same_alphabet(self.outputs(), next.inputs())?;
        let rows = self
            .rows
            .iter()
            .map(|r| output_marginal(r, next))
            .collect::<Result<Vec<_>>>()?;
        Kernel::from_rows(rows)
    }
}

/// A channel: a kernel together with its designated no-input letter `⋆`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelModel {
    kernel: Kernel,
    star: usize,
}

impl ChannelModel {
    pub fn new(kernel: Kernel, star: usize) -> Result<Self> {
        if star >= kernel.inputs() {
            return Err(Error::InvalidParameter(format!(
                "no-input letter {star} outside input alphabet of size {}",
                kernel.inputs()
            )));
        }
        Ok(Self { kernel, star })
    }

    /// Binary symmetric channel with the given crossover and `⋆ = 0`.
    pub fn bsc(crossover: f64) -> Result<Self> {
        let kernel = Kernel::new(vec![
            vec![1.0 - crossover, crossover],
            vec![crossover, 1.0 - crossover],
        ])?;
        Self::new(kernel, 0)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn star(&self) -> usize {
        self.star
    }

    /// Output law under pure noise, `Q(·|⋆)`.
    pub fn noise(&self) -> &Distribution {
        self.kernel.row(self.star)
    }

    pub fn inputs(&self) -> usize {
        self.kernel.inputs()
    }

    pub fn outputs(&self) -> usize {
        self.kernel.outputs()
    }

    /// Short stable identifier of the matrix and `⋆`.
    pub fn digest(&self) -> String {
        let mut text = String::new();
        for row in self.kernel.rows() {
            for p in row.probs() {
                text.push_str(&format!("{p:?},"));
            }
            text.push(';');
        }
        text.push_str(&format!("star={}", self.star));
        digest_hex(text.as_bytes())
    }
}

/// `D(p‖q) = Σ p ln(p/q)` in nats.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_alphabet(p.len(), q.len())?;
    let mut total = 0.0;
    for (&a, &b) in p.probs.iter().zip(&q.probs) {
        if a > 0.0 {
            if b == 0.0 {
                return Ok(f64::INFINITY);
            }
            total += a * (a / b).ln();
        }
    }
    // Rounding can push an exact zero slightly negative.
    Ok(total.max(0.0))
}

/// Conditional divergence `D(W‖Q|P) = Σ_x P(x) D(W(·|x)‖Q(·|x))`.
///
/// Rows with `P(x) = 0` contribute nothing, even if their divergence is
/// infinite.
pub fn conditional_kl(w: &Kernel, q: &Kernel, p: &Distribution) -> Result<f64> {
    same_alphabet(w.inputs(), q.inputs())?;
    same_alphabet(w.outputs(), q.outputs())?;
    same_alphabet(p.len(), w.inputs())?;
    let mut total = 0.0;
    for (x, &px) in p.probs.iter().enumerate() {
        if px > 0.0 {
            let d = kl_divergence(w.row(x), q.row(x))?;
            if d.is_infinite() {
                return Ok(f64::INFINITY);
            }
            total += px * d;
        }
    }
    Ok(total)
}

/// Output law `(PQ)(y) = Σ_x P(x) Q(y|x)`.
pub fn output_marginal(p: &Distribution, q: &Kernel) -> Result<Distribution> {
    same_alphabet(p.len(), q.inputs())?;
    let mut out = vec![0.0; q.outputs()];
    for (row, &px) in q.rows().iter().zip(&p.probs) {
        if px > 0.0 {
            for (o, &r) in out.iter_mut().zip(&row.probs) {
                *o += px * r;
            }
        }
    }
    let total: f64 = out.iter().sum();
    Ok(Distribution::renormalized(out, total))
}

/// `I(P, Q) = Σ_x P(x) D(Q(·|x) ‖ PQ)` in nats.
pub fn mutual_information(p: &Distribution, q: &Kernel) -> Result<f64> {
    let out = output_marginal(p, q)?;
    let mut total = 0.0;
    for (x, &px) in p.probs.iter().enumerate() {
        if px > 0.0 {
            // Finite: every output reachable from x has positive marginal.
            total += px * kl_divergence(q.row(x), &out)?;
        }
    }
    Ok(total.max(0.0))
}

/// Repeated draws from one distribution.
#[derive(Debug, Clone)]
pub struct Sampler {
    index: WeightedIndex<f64>,
}

impl Sampler {
    pub fn new(d: &Distribution) -> Self {
        let index = WeightedIndex::new(d.probs()).expect("a distribution has positive mass");
        Self { index }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }
}

/// Draws one letter from `d`.
pub fn sample<R: Rng + ?Sized>(d: &Distribution, rng: &mut R) -> usize {
    Sampler::new(d).draw(rng)
}

/// Empirical conditional law of an output sequence given an input sequence.
/// Rows of input letters that never occur are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalType {
    pub rows: Vec<Option<Distribution>>,
}

impl ConditionalType {
    /// Number of input letters that occur in the sequence.
    pub fn defined_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }
}

pub fn empirical_conditional_type(
    x_seq: &[usize],
    y_seq: &[usize],
    inputs: usize,
    outputs: usize,
) -> Result<ConditionalType> {
    if x_seq.len() != y_seq.len() {
        return Err(Error::LengthMismatch {
            left: x_seq.len(),
            right: y_seq.len(),
        });
    }
    if x_seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts = vec![vec![0u64; outputs]; inputs];
    for (&x, &y) in x_seq.iter().zip(y_seq) {
        if x >= inputs || y >= outputs {
            return Err(Error::InvalidParameter(format!(
                "pair ({x}, {y}) outside a {inputs}x{outputs} alphabet"
            )));
        }
        counts[x][y] += 1;
    }
    let rows = counts
        .into_iter()
        .map(|row| {
            let n: u64 = row.iter().sum();
            (n > 0).then(|| {
                Distribution::from_weights(row.iter().map(|&c| c as f64).collect())
                    .expect("row with positive count")
            })
        })
        .collect();
    Ok(ConditionalType { rows })
}

/// Lattice points of the probability simplex with a fixed denominator:
/// every vector `(k_1, .., k_d) / n` with non-negative integers summing to
/// `n`. Points are produced in lexicographic order of the numerators.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    counts: Vec<usize>,
    subdivisions: usize,
    done: bool,
}

impl SimplexGrid {
    pub fn new(dim: usize, subdivisions: usize) -> Self {
        assert!(dim >= 1, "simplex dimension must be positive");
        let mut counts = vec![0; dim];
        counts[dim - 1] = subdivisions;
        Self {
            counts,
            subdivisions,
            done: false,
        }
    }

    /// Number of lattice points, `C(n + d - 1, d - 1)`.
    pub fn point_count(dim: usize, subdivisions: usize) -> u128 {
        let mut c: u128 = 1;
        for i in 0..(dim as u128 - 1) {
            c = c * (subdivisions as u128 + 1 + i) / (i + 1);
        }
        c
    }

    fn advance(&mut self) {
        // Odometer over the first d-1 coordinates; the last one takes the rest.
        let d = self.counts.len();
        if d == 1 {
            self.done = true;
            return;
        }
        let mut used: usize = self.counts[..d - 1].iter().sum();
        let mut i = d - 1;
        loop {
            if i == 0 {
                self.done = true;
                return;
            }
            i -= 1;
            if used < self.subdivisions {
                self.counts[i] += 1;
                used += 1;
                break;
            }
            used -= self.counts[i];
            self.counts[i] = 0;
        }
        self.counts[d - 1] = self.subdivisions - used;
    }
}

impl Iterator for SimplexGrid {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.done {
            return None;
        }
        let n = self.subdivisions as f64;
        let point = self.counts.iter().map(|&k| k as f64 / n).collect();
        self.advance();
        Some(point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn construction_rejects_bad_vectors() {
        assert!(Distribution::new(vec![]).is_err());
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![f64::NAN, 1.0]).is_err());
        let ok = Distribution::new(vec![0.1, 0.2, 0.7]).unwrap();
        assert!((ok.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn kernel_error_names_row() {
        let err = Kernel::new(vec![vec![0.5, 0.5], vec![0.75, 0.75]]).unwrap_err();
        assert_eq!(
            err,
            Error::InvalidRow {
                row: 1,
                reason: "entries sum to 1.5, expected 1".into()
            }
        );
        assert!(Kernel::new(vec![vec![1.0], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(
            kl_divergence(&d(&[0.3, 0.7]), &d(&[0.3, 0.7])).unwrap(),
            0.0
        );
        let v = kl_divergence(&d(&[0.5, 0.5]), &d(&[0.25, 0.75])).unwrap();
        assert!((v - 0.143_841_036_225_890_46).abs() < 1e-15);
        assert_eq!(
            kl_divergence(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(),
            f64::INFINITY
        );
        // 0 ln 0 convention
        assert!(kl_divergence(&d(&[0.0, 1.0]), &d(&[0.5, 0.5]))
            .unwrap()
            .is_finite());
        assert!(matches!(
            kl_divergence(&d(&[1.0]), &d(&[0.5, 0.5])),
            Err(Error::AlphabetMismatch { .. })
        ));
    }

    #[test]
    fn conditional_kl_examples() {
        let w = Kernel::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let q = Kernel::new(vec![vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
        let p = d(&[0.5, 0.5]);
        assert_eq!(conditional_kl(&w, &w, &p).unwrap(), 0.0);
        let v = conditional_kl(&w, &q, &p).unwrap();
        assert!((v - 0.031_211_053_256_367_9).abs() < 1e-15);
        let point = Distribution::point_mass(2, 1);
        assert_eq!(
            conditional_kl(&w, &q, &point).unwrap(),
            kl_divergence(w.row(1), q.row(1)).unwrap()
        );
    }

    #[test]
    fn conditional_kl_ignores_unused_infinite_rows() {
        let w = Kernel::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let q = Kernel::new(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        assert_eq!(conditional_kl(&w, &q, &d(&[1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(
            conditional_kl(&w, &q, &d(&[0.5, 0.5])).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn output_marginal_examples() {
        let q = Kernel::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert_eq!(
            output_marginal(&Distribution::point_mass(2, 1), &q).unwrap(),
            *q.row(1)
        );
        let out = output_marginal(&d(&[0.25, 0.75]), &q).unwrap();
        assert!((out.prob(0) - 0.375).abs() < 1e-15);
        assert!((out.prob(1) - 0.625).abs() < 1e-15);
        let sym = ChannelModel::bsc(0.3).unwrap();
        let out = output_marginal(&Distribution::uniform(2), sym.kernel()).unwrap();
        assert_eq!(out.probs(), &[0.5, 0.5]);
        assert!(output_marginal(&Distribution::uniform(3), &q).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let same = Kernel::new(vec![vec![0.2, 0.8], vec![0.2, 0.8]]).unwrap();
        assert!(mutual_information(&d(&[0.3, 0.7]), &same).unwrap() < 1e-15);
        let id = Kernel::identity(5);
        let v = mutual_information(&Distribution::uniform(5), &id).unwrap();
        assert!((v - 5f64.ln()).abs() < 1e-14);
        let bsc = ChannelModel::bsc(0.1).unwrap();
        let v = mutual_information(&Distribution::uniform(2), bsc.kernel()).unwrap();
        assert!((v - 0.368_064_207_168_497_1).abs() < 1e-14);
    }

    #[test]
    fn sampling_point_mass_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let point = Distribution::point_mass(4, 2);
        assert!((0..1000).all(|_| sample(&point, &mut rng) == 2));

        let u = Distribution::uniform(7);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = Sampler::new(&u);
            (0..200).map(|_| s.draw(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn sampling_frequencies_match_uniform() {
        // 10^6 draws; each frequency 0.25 with sd sqrt(0.1875/1e6) ~ 4.3e-4,
        // so 0.002 is beyond 4.6 sd.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let s = Sampler::new(&Distribution::uniform(4));
        let mut counts = [0u64; 4];
        let n = 1_000_000;
        for _ in 0..n {
            counts[s.draw(&mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.002, "{counts:?}");
        }
    }

    #[test]
    fn conditional_type_examples() {
        let t = empirical_conditional_type(&[0, 0], &[0, 1], 2, 2).unwrap();
        assert_eq!(t.rows[0].as_ref().unwrap().probs(), &[0.5, 0.5]);
        assert!(t.rows[1].is_none());

        let t = empirical_conditional_type(&[0, 1, 0, 1], &[0, 0, 1, 1], 2, 2).unwrap();
        assert_eq!(t.rows[0].as_ref().unwrap().probs(), &[0.5, 0.5]);
        assert_eq!(t.rows[1].as_ref().unwrap().probs(), &[0.5, 0.5]);

        let t = empirical_conditional_type(&[0, 1, 2, 1], &[1, 1, 1, 1], 3, 2).unwrap();
        for row in t.rows.iter().flatten() {
            assert_eq!(row.probs(), &[0.0, 1.0]);
        }
        assert_eq!(t.defined_rows(), 3);

        assert_eq!(
            empirical_conditional_type(&[0], &[0, 1], 2, 2),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        );
        assert_eq!(
            empirical_conditional_type(&[], &[], 2, 2),
            Err(Error::EmptySequence)
        );
    }

    #[test]
    fn simplex_grid_enumerates_lattice() {
        let pts: Vec<_> = SimplexGrid::new(3, 4).collect();
        assert_eq!(pts.len() as u128, SimplexGrid::point_count(3, 4));
        assert_eq!(pts.len(), 15);
        for p in &pts {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let mut dedup = pts.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), pts.len());
        assert_eq!(SimplexGrid::new(1, 7).count(), 1);
        assert_eq!(SimplexGrid::new(2, 10).count(), 11);
    }

    fn simplex(len: usize) -> impl Strategy<Value = Distribution> {
        prop::collection::vec(0.0f64..1.0, len)
            .prop_filter_map("zero mass", |w| Distribution::from_weights(w).ok())
    }

    fn simplex_pair(max_len: usize) -> impl Strategy<Value = (Distribution, Distribution)> {
        (1..=max_len).prop_flat_map(|k| {
            let v = || {
                prop::collection::vec(0.01f64..1.0, k)
                    .prop_map(|w| Distribution::from_weights(w).unwrap())
            };
            (v(), v())
        })
    }

    fn kernel(max_in: usize, max_out: usize) -> impl Strategy<Value = Kernel> {
        (1..=max_in, 1..=max_out).prop_flat_map(|(i, o)| {
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, o), i).prop_filter_map(
                "zero row",
                |rows| {
                    let rows = rows
                        .into_iter()
                        .map(Distribution::from_weights)
                        .collect::<Result<Vec<_>>>()
                        .ok()?;
                    Kernel::from_rows(rows).ok()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn kl_nonnegative_and_zero_iff_equal((p, q) in simplex_pair(8)) {
            let v = kl_divergence(&p, &q).unwrap();
            prop_assert!(v >= 0.0);
            prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
            let equal = p.probs().iter().zip(q.probs()).all(|(a, b)| (a - b).abs() <= 1e-12);
            if !equal {
                prop_assert!(v > 0.0);
            }
        }

        #[test]
        fn mutual_information_bounded(k in kernel(5, 5), w in prop::collection::vec(0.01f64..1.0, 5)) {
            let p = Distribution::from_weights(w[..k.inputs()].to_vec()).unwrap();
            let i = mutual_information(&p, &k).unwrap();
            let cap = (k.inputs() as f64).ln().min((k.outputs() as f64).ln());
            prop_assert!(i >= 0.0 && i <= cap + 1e-12, "I = {} > {}", i, cap);
        }

        #[test]
        fn output_marginal_stays_on_simplex(
            (k, p) in kernel(6, 6).prop_flat_map(|k| {
                let n = k.inputs();
                (Just(k), simplex(n).prop_filter("size", move |p| p.len() == n))
            })
        ) {
            let out = output_marginal(&p, &k).unwrap();
            prop_assert!(out.probs().iter().all(|v| *v >= 0.0));
            prop_assert!((out.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn conditional_kl_is_weighted_row_average(
            (w, q) in (1usize..5, 1usize..5).prop_flat_map(|(i, o)| {
                let row = move || prop::collection::vec(0.01f64..1.0, o)
                    .prop_map(|v| Distribution::from_weights(v).unwrap());
                let k = move || prop::collection::vec(row(), i)
                    .prop_map(|rows| Kernel::from_rows(rows).unwrap());
                (k(), k())
            }),
            weights in prop::collection::vec(0.0f64..1.0, 5),
        ) {
            prop_assume!(weights[..w.inputs()].iter().sum::<f64>() > 0.0);
            let p = Distribution::from_weights(weights[..w.inputs()].to_vec()).unwrap();
            // Independent route: sum over the joint alphabet of P(x)W(y|x) ln(W/Q).
            let mut joint = 0.0;
            for x in 0..w.inputs() {
                for y in 0..w.outputs() {
                    let a = p.prob(x) * w.prob(x, y);
                    if a > 0.0 {
                        joint += a * (w.prob(x, y).ln() - q.prob(x, y).ln());
                    }
                }
            }
            let v = conditional_kl(&w, &q, &p).unwrap();
            prop_assert!((v - joint).abs() <= 1e-12 * (1.0 + joint.abs()));
        }
    }
}
