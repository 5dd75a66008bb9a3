//! Exact fast-forward through pure-noise stretches.
//!
//! Noise outputs are i.i.d. from `Q⋆`. Call an output *active* if it differs
//! from the most likely noise letter `y0`. A decoder exposing a
//! [`NoiseScreen`] cannot fire on a window with fewer than `k*` active
//! outputs, and in long noise stretches such windows are the norm.
//!
//! The stretch is cut into blocks of `B` symbols, chosen so that a screen
//! window spans at most `f + 1` consecutive blocks. Block activity counts
//! are i.i.d. `Binomial(B, p)` with `p = 1 − Q⋆(y0)`. A window with `k*`
//! active outputs forces some block among its `f + 1` to hold at least
//! `t = ⌈k*/(f+1)⌉` of them ("heavy"). Heavy blocks form a Bernoulli
//! process, so the gaps between them are geometric and can be drawn
//! directly; only blocks within `f` after a heavy one can end a firing
//! window, and only those are examined. Light counts are drawn from the
//! binomial conditioned below `t`, heavy counts from the binomial
//! conditioned at or above `t`, and symbols are materialized (uniform
//! positions, active letters from `Q⋆` conditioned off `y0`) only where the
//! decoder must actually look at them. Every quantity is drawn from its
//! exact conditional law, so the decoder's stopping behaviour has the same
//! distribution as in a symbol-by-symbol run.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::Rng;
use rand_distr::Geometric;

use crate::decoders::{Decision, NoiseScreen, SequentialDecoder};
use crate::probability::{Distribution, Sampler};

use super::stream::ChannelSampler;

/// Largest number of blocks a window may span.
const MAX_SPAN: usize = 32;
/// Estimated work per noise symbol above which plain simulation is used.
const MAX_RELATIVE_COST: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct SparsePlan {
    block: usize,
    span: usize,
    heavy_min: usize,
    min_active: usize,
    dominant: usize,
    context_blocks: usize,
    heavy_rate: f64,
    gap: Option<Geometric>,
    light: Option<WeightedIndex<f64>>,
    heavy: Option<WeightedIndex<f64>>,
    active: Option<Sampler>,
}

/// `ln P(Bin(n, p) = k)` for `k = 0..=n`.
fn binomial_log_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut cur = n as f64 * lq;
    out.push(cur);
    for k in 0..n {
        cur += ((n - k) as f64 / (k + 1) as f64).ln() + lp - lq;
        out.push(cur);
    }
    out
}

fn tail_probability(log_pmf: &[f64], from: usize) -> f64 {
    log_pmf
        .iter()
        .skip(from)
        .map(|l| l.exp())
        .sum::<f64>()
        .min(1.0)
}

fn weighted(log_pmf: &[f64]) -> Option<WeightedIndex<f64>> {
    let top = log_pmf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return None;
    }
    WeightedIndex::new(log_pmf.iter().map(|l| (l - top).exp())).ok()
}

impl SparsePlan {
    /// Picks block geometry for the given screen, or `None` when plain
    /// simulation is expected to be as cheap.
    pub fn new(noise: &Distribution, screen: NoiseScreen, context_len: usize) -> Option<Self> {
        let k = screen.min_active;
        let w = screen.window;
        if k == 0 || w == 0 {
            return None;
        }
        let p = 1.0 - noise.prob(screen.dominant);
        let mut best: Option<(f64, usize, usize, usize)> = None;
        for f in 1..=w.min(MAX_SPAN) {
            let b = w.div_ceil(f);
            let t = k.div_ceil(f + 1);
            let pi = if t > b || p <= 0.0 {
                0.0
            } else {
                tail_probability(&binomial_log_pmf(b, p), t)
            };
            let cost = pi * ((f + 1) * (f + 2)) as f64 / b as f64;
            if best.is_none_or(|(c, ..)| cost < c) {
                best = Some((cost, f, b, t));
            }
        }
        let (cost, span, block, heavy_min) = best?;
        if cost > MAX_RELATIVE_COST {
            return None;
        }
        let active_weights: Vec<f64> = noise
            .probs()
            .iter()
            .enumerate()
            .map(|(y, &q)| if y == screen.dominant { 0.0 } else { q })
            .collect();
        let active = Distribution::from_weights(active_weights)
            .ok()
            .map(|d| Sampler::new(&d));
        let (mut heavy_rate, mut gap, mut light, mut heavy) = (0.0, None, None, None);
        if p > 0.0 {
            let lp = binomial_log_pmf(block, p);
            if heavy_min <= block {
                heavy_rate = tail_probability(&lp, heavy_min);
            }
            if heavy_rate >= 1e-300 {
                gap = Geometric::new(heavy_rate).ok();
                heavy = weighted(&lp[heavy_min..]);
            } else {
                heavy_rate = 0.0;
            }
            light = weighted(&lp[..heavy_min.min(block + 1)]);
        }
        Some(Self {
            block,
            span,
            heavy_min,
            min_active: k,
            dominant: screen.dominant,
            context_blocks: context_len.div_ceil(block),
            heavy_rate,
            gap,
            light,
            heavy,
            active,
        })
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn heavy_rate(&self) -> f64 {
        self.heavy_rate
    }

    fn lead_blocks(&self) -> usize {
        self.span.max(self.context_blocks)
    }
}

/// Outcome of feeding a stretch of noise to a decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentOutcome {
    Continue,
    /// Stop at the given absolute time with the given message.
    Stop(u64, usize),
}

/// Feeds `len` noise symbols, the first at absolute time `start`, symbol by
/// symbol.
pub fn dense_noise<D, R>(
    sampler: &ChannelSampler,
    decoder: &mut D,
    start: u64,
    len: u64,
    rng: &mut R,
) -> SegmentOutcome
where
    D: SequentialDecoder + ?Sized,
    R: Rng + ?Sized,
{
    for i in 0..len {
        if let Decision::Stop(m) = decoder.observe(sampler.noise(rng)) {
            return SegmentOutcome::Stop(start + i, m);
        }
    }
    SegmentOutcome::Continue
}

struct Blocks<'a, R: Rng + ?Sized> {
    plan: &'a SparsePlan,
    rng: &'a mut R,
    counts: BTreeMap<u64, usize>,
    symbols: BTreeMap<u64, Vec<usize>>,
    heavies: BTreeSet<u64>,
    /// First block whose heaviness has not been drawn yet.
    frontier: u64,
    limit: u64,
}

impl<R: Rng + ?Sized> Blocks<'_, R> {
    /// Draws the next heavy block after the frontier, if any before `limit`.
    fn draw_heavy(&mut self) -> Option<u64> {
        if self.frontier >= self.limit {
            return None;
        }
        let gap = self.plan.gap.as_ref()?.sample(self.rng);
        let h = self.frontier.saturating_add(gap);
        if h >= self.limit {
            self.frontier = self.limit;
            return None;
        }
        self.heavies.insert(h);
        self.frontier = h + 1;
        Some(h)
    }

    fn first_heavy_from(&mut self, from: u64) -> Option<u64> {
        loop {
            if let Some(&h) = self.heavies.range(from..).next() {
                return Some(h);
            }
            self.draw_heavy()?;
        }
    }

    fn settle_through(&mut self, b: u64) {
        while self.frontier <= b && self.draw_heavy().is_some() {}
    }

    fn count(&mut self, j: u64) -> usize {
        if let Some(&c) = self.counts.get(&j) {
            return c;
        }
        let plan = self.plan;
        let c = if self.heavies.contains(&j) {
            plan.heavy_min
                + plan
                    .heavy
                    .as_ref()
                    .expect("heavy blocks exist only with a heavy law")
                    .sample(self.rng)
        } else {
            plan.light.as_ref().map_or(0, |w| w.sample(self.rng))
        };
        self.counts.insert(j, c);
        c
    }

    fn symbols(&mut self, j: u64) -> &[usize] {
        if !self.symbols.contains_key(&j) {
            let c = self.count(j);
            let plan = self.plan;
            let mut block = vec![plan.dominant; plan.block];
            if c > 0 {
                let active = plan
                    .active
                    .as_ref()
                    .expect("active outputs have positive mass");
                for pos in rand::seq::index::sample(self.rng, plan.block, c) {
                    block[pos] = active.draw(self.rng);
                }
            }
            self.symbols.insert(j, block);
        }
        &self.symbols[&j]
    }

    fn store(&mut self, j: u64, block: Vec<usize>) {
        let c = block.iter().filter(|&&y| y != self.plan.dominant).count();
        if c >= self.plan.heavy_min {
            self.heavies.insert(j);
        }
        self.counts.insert(j, c);
        self.symbols.insert(j, block);
    }

    fn forget_before(&mut self, j: u64) {
        self.counts = self.counts.split_off(&j);
        self.symbols = self.symbols.split_off(&j);
        self.heavies = self.heavies.split_off(&j);
    }
}

/// Feeds `len` noise symbols starting at absolute time `start`, skipping
/// stretches on which the decoder provably stays idle.
///
/// The decoder must be idle on entry whenever its screen is used; if it is
/// not, or once it leaves the idle state, the rest of the stretch is
/// simulated symbol by symbol.
pub fn sparse_noise<D, R>(
    plan: &SparsePlan,
    sampler: &ChannelSampler,
    decoder: &mut D,
    start: u64,
    len: u64,
    rng: &mut R,
) -> SegmentOutcome
where
    D: SequentialDecoder + ?Sized,
    R: Rng + ?Sized,
{
    let bsize = plan.block as u64;
    let total_blocks = len / bsize;
    let lead = plan.lead_blocks() as u64;
    let ctx = plan.context_blocks as u64;
    let span = plan.span as u64;
    if total_blocks < lead + ctx + 2 {
        return dense_noise(sampler, decoder, start, len, rng);
    }

    let mut blocks = Blocks {
        plan,
        rng,
        counts: BTreeMap::new(),
        symbols: BTreeMap::new(),
        heavies: BTreeSet::new(),
        frontier: lead,
        limit: total_blocks,
    };

    // Lead-in: plain simulation, recorded so later windows can look back.
    for j in 0..lead {
        let block: Vec<usize> = (0..plan.block).map(|_| sampler.noise(blocks.rng)).collect();
        for (i, &y) in block.iter().enumerate() {
            if let Decision::Stop(m) = decoder.observe(y) {
                return SegmentOutcome::Stop(start + j * bsize + i as u64, m);
            }
        }
        blocks.store(j, block);
    }
    if !decoder.is_idle() {
        let done = lead * bsize;
        return dense_noise(sampler, decoder, start + done, len - done, blocks.rng);
    }

    let mut synced = lead - 1;
    let mut cursor = lead;
    let keep = span.max(ctx) + 1;
    loop {
        let Some(h) = blocks.first_heavy_from(cursor.saturating_sub(span)) else {
            break;
        };
        let b = cursor.max(h);
        if b >= total_blocks {
            break;
        }
        blocks.settle_through(b);
        let active: usize = (b - span..=b).map(|j| blocks.count(j)).sum();
        if active >= plan.min_active {
            if synced + 1 != b {
                decoder.reset();
                for j in b - ctx..b {
                    for &y in blocks.symbols(j) {
                        decoder.warm(y);
                    }
                }
            }
            let block = blocks.symbols(b).to_vec();
            for (i, &y) in block.iter().enumerate() {
                if let Decision::Stop(m) = decoder.observe(y) {
                    return SegmentOutcome::Stop(start + b * bsize + i as u64, m);
                }
            }
            synced = b;
            if !decoder.is_idle() {
                let done = (b + 1) * bsize;
                return dense_noise(sampler, decoder, start + done, len - done, blocks.rng);
            }
        }
        cursor = b + 1;
        if cursor > keep && cursor.is_multiple_of(64) {
            blocks.forget_before(cursor - keep);
        }
    }

    // Bring the decoder's history up to the end of the last full block,
    // then finish the remainder symbol by symbol.
    blocks.settle_through(total_blocks - 1);
    if synced + 1 != total_blocks {
        decoder.reset();
        for j in total_blocks - ctx..total_blocks {
            for &y in blocks.symbols(j) {
                decoder.warm(y);
            }
        }
    }
    let done = total_blocks * bsize;
    dense_noise(sampler, decoder, start + done, len - done, blocks.rng)
}
