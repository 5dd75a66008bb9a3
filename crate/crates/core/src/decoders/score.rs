//! Per-symbol scores in the extended reals.

use crate::probability::ChannelModel;

/// A sum of extended reals that keeps finite and infinite parts apart, so
/// that adding and removing terms never produces `∞ − ∞`.
///
/// The value is `−∞` if any `−∞` term is present, else `+∞` if any `+∞`
/// term is present, else the finite sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExtSum {
    finite: f64,
    pos: u32,
    neg: u32,
}

impl ExtSum {
    pub fn add(&mut self, v: f64) {
        if v == f64::INFINITY {
            self.pos += 1;
        } else if v == f64::NEG_INFINITY {
            self.neg += 1;
        } else {
            self.finite += v;
        }
    }

    /// Adds `count` copies of `v`.
    pub fn add_n(&mut self, v: f64, count: u32) {
        if v == f64::INFINITY {
            self.pos += count;
        } else if v == f64::NEG_INFINITY {
            self.neg += count;
        } else {
            self.finite += v * count as f64;
        }
    }

    pub fn value(&self) -> f64 {
        if self.neg > 0 {
            f64::NEG_INFINITY
        } else if self.pos > 0 {
            f64::INFINITY
        } else {
            self.finite
        }
    }

    /// Lexicographic key whose order matches the order of [`value`](Self::value):
    /// fewer `−∞` terms first, then more `+∞` terms, then the finite part.
    fn key(&self) -> (i64, i64, f64) {
        (-(self.neg as i64), self.pos as i64, self.finite)
    }
}

/// `v ≥ threshold`, except that a `+∞` threshold is never reached.
pub fn exceeds(v: f64, threshold: f64) -> bool {
    threshold != f64::INFINITY && v >= threshold
}

/// Log-likelihood ratios `s(x, y) = ln(Q(y|x) / Q⋆(y))`.
///
/// `Q(y|x) = 0` gives `−∞` (even when `Q⋆(y) = 0` too: the output rules the
/// letter out); otherwise `Q⋆(y) = 0` gives `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrTable {
    outputs: usize,
    table: Vec<f64>,
}

impl LlrTable {
    pub fn new(ch: &ChannelModel) -> Self {
        let q = ch.kernel();
        let noise = ch.noise();
        let mut table = Vec::with_capacity(q.inputs() * q.outputs());
        for x in 0..q.inputs() {
            for y in 0..q.outputs() {
                let (num, den) = (q.prob(x, y), noise.prob(y));
                table.push(if num == 0.0 {
                    f64::NEG_INFINITY
                } else if den == 0.0 {
                    f64::INFINITY
                } else {
                    num.ln() - den.ln()
                });
            }
        }
        Self {
            outputs: q.outputs(),
            table,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.outputs + y]
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// `Σ_j s(letters_j, outputs_j)` over aligned sequences.
    pub fn score(&self, letters: &[usize], outputs: impl IntoIterator<Item = usize>) -> ExtSum {
        let mut sum = ExtSum::default();
        for (&x, y) in letters.iter().zip(outputs) {
            sum.add(self.get(x, y));
        }
        sum
    }

    /// Smallest number of positions that must carry an output other than
    /// `dominant` before `Σ_j s(letters_j, y_j)` can reach `threshold`.
    /// Returns `letters.len() + 1` when no output sequence reaches it.
    pub fn min_active(&self, letters: &[usize], dominant: usize, threshold: f64) -> usize {
        // Baseline: every position shows the dominant output. Switching a
        // position to its best other output changes the sum by a "gain";
        // the best sum with k switches takes the k largest gains, and gains
        // (like the sums) are ordered lexicographically on the key.
        let mut base = ExtSum::default();
        let mut gains: Vec<(i64, i64, f64)> = Vec::with_capacity(letters.len());
        for &x in letters {
            let a = self.get(x, dominant);
            let b = (0..self.outputs)
                .filter(|&y| y != dominant)
                .map(|y| self.get(x, y))
                .fold(f64::NEG_INFINITY, f64::max);
            base.add(a);
            let (mut from, mut to) = (ExtSum::default(), ExtSum::default());
            from.add(a);
            to.add(b);
            let (fk, tk) = (from.key(), to.key());
            gains.push((tk.0 - fk.0, tk.1 - fk.1, tk.2 - fk.2));
        }
        if self.outputs == 1 {
            return if exceeds(base.value(), threshold) {
                0
            } else {
                letters.len() + 1
            };
        }
        gains.sort_by(|p, q| q.0.cmp(&p.0).then(q.1.cmp(&p.1)).then(q.2.total_cmp(&p.2)));
        let (mut neg, mut pos, mut finite) = (base.neg as i64, base.pos as i64, base.finite);
        for k in 0..=letters.len() {
            let value = if neg > 0 {
                f64::NEG_INFINITY
            } else if pos > 0 {
                f64::INFINITY
            } else {
                finite
            };
            if exceeds(value, threshold) {
                return k;
            }
            if let Some(g) = gains.get(k) {
                neg -= g.0;
                pos += g.1;
                finite += g.2;
            }
        }
        letters.len() + 1
    }
}

/// Log-likelihoods `ln Q(y|x)` for maximum-likelihood decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLikelihood {
    outputs: usize,
    table: Vec<f64>,
}

impl LogLikelihood {
    pub fn new(ch: &ChannelModel) -> Self {
        let q = ch.kernel();
        let table = (0..q.inputs())
            .flat_map(|x| (0..q.outputs()).map(move |y| q.prob(x, y).ln()))
            .collect();
        Self {
            outputs: q.outputs(),
            table,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.outputs + y]
    }

    /// Index of the most likely letter sequence among `candidates` given the
    /// aligned `outputs`; lowest index on ties (including all `−∞`).
    pub fn decode<'a, I>(&self, candidates: I, outputs: &[usize]) -> usize
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let mut best = (0, f64::NEG_INFINITY);
        for (m, letters) in candidates.into_iter().enumerate() {
            let ll: f64 = letters
                .iter()
                .zip(outputs)
                .map(|(&x, &y)| self.get(x, y))
                .sum();
            if m == 0 || ll > best.1 {
                best = (m, ll);
            }
        }
        best.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::Kernel;

    #[test]
    fn ext_sum_ordering() {
        let mut s = ExtSum::default();
        s.add(1.5);
        s.add(f64::INFINITY);
        assert_eq!(s.value(), f64::INFINITY);
        s.add(f64::NEG_INFINITY);
        assert_eq!(s.value(), f64::NEG_INFINITY);
        let mut t = ExtSum::default();
        t.add_n(0.5, 4);
        assert_eq!(t.value(), 2.0);
        assert!(!exceeds(f64::INFINITY, f64::INFINITY));
        assert!(exceeds(f64::NEG_INFINITY, f64::NEG_INFINITY));
    }

    #[test]
    fn llr_conventions() {
        let ch = ChannelModel::new(
            Kernel::new(vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5]]).unwrap(),
            0,
        )
        .unwrap();
        let t = LlrTable::new(&ch);
        assert_eq!(t.get(0, 0), 0.0);
        assert_eq!(t.get(1, 0), f64::NEG_INFINITY);
        assert_eq!(t.get(1, 2), f64::INFINITY);
        assert_eq!(t.get(0, 2), f64::NEG_INFINITY);
    }

    #[test]
    fn min_active_on_bsc_preamble() {
        let ch = ChannelModel::bsc(0.1).unwrap();
        let t = LlrTable::new(&ch);
        let l9 = 9f64.ln();
        // Window of 10 ones: sum = (2k − 10) ln 9 with k ones observed.
        let pre = vec![1; 10];
        assert_eq!(t.min_active(&pre, 0, 10.04), 8);
        assert_eq!(t.min_active(&pre, 0, 6.0 * l9 - 1e-9), 8);
        assert_eq!(t.min_active(&pre, 0, 6.0 * l9 + 1e-9), 9);
        assert_eq!(t.min_active(&pre, 0, f64::NEG_INFINITY), 0);
        assert_eq!(t.min_active(&pre, 0, f64::INFINITY), 11);
        assert_eq!(t.min_active(&pre, 0, 100.0), 11);
        // Noise letters score 0 regardless of output.
        assert_eq!(t.min_active(&[0, 0, 1], 0, 0.5), 1);
    }

    #[test]
    fn min_active_matches_exhaustive_search() {
        let ch = ChannelModel::new(
            Kernel::new(vec![
                vec![0.6, 0.3, 0.1],
                vec![0.1, 0.2, 0.7],
                vec![0.0, 0.5, 0.5],
            ])
            .unwrap(),
            0,
        )
        .unwrap();
        let t = LlrTable::new(&ch);
        let letters = [1, 2, 0, 1, 2, 2];
        for threshold in [-5.0, -1.0, 0.0, 1.0, 3.0, 6.0, 20.0] {
            let mut best = letters.len() + 1;
            for code in 0..3usize.pow(letters.len() as u32) {
                let ys: Vec<usize> = (0..letters.len())
                    .map(|j| code / 3usize.pow(j as u32) % 3)
                    .collect();
                let active = ys.iter().filter(|&&y| y != 0).count();
                if exceeds(t.score(&letters, ys.iter().copied()).value(), threshold) {
                    best = best.min(active);
                }
            }
            assert_eq!(
                t.min_active(&letters, 0, threshold),
                best,
                "threshold {threshold}"
            );
        }
    }

    #[test]
    fn ml_ties_pick_lowest() {
        let ch = ChannelModel::bsc(0.1).unwrap();
        let ll = LogLikelihood::new(&ch);
        let words: Vec<Vec<usize>> = vec![vec![0, 1], vec![0, 1], vec![1, 1]];
        assert_eq!(ll.decode(words.iter().map(|w| w.as_slice()), &[0, 1]), 0);
        assert_eq!(ll.decode(words.iter().map(|w| w.as_slice()), &[1, 1]), 2);
        let z = ChannelModel::new(Kernel::identity(2), 0).unwrap();
        let ll = LogLikelihood::new(&z);
        let words: Vec<Vec<usize>> = vec![vec![0], vec![0]];
        assert_eq!(ll.decode(words.iter().map(|w| w.as_slice()), &[1]), 0);
    }
}
