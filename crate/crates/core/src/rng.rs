//! Keyed random streams and table-inversion samplers.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by
//! `(seed, purpose, outer index)` with the ChaCha stream id set to an inner
//! index. A replicate, or a block of bootstrap draws inside a replicate, owns
//! its stream outright, so results do not depend on how work is scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; part of the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Trial = 1,
    ParametricBootstrap = 2,
    ConditionalBootstrap = 3,
    Randomisation = 4,
}

/// Generator for `(seed, purpose, outer, inner)`.
pub fn stream(seed: u64, purpose: Purpose, outer: u64, inner: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    key[16..24].copy_from_slice(&outer.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(inner);
    rng
}

/// Outer index used when a single observed trial is analysed.
pub const OBSERVED: u64 = u64::MAX;

/// Bootstrap and randomisation draws are produced in blocks of this size,
/// one stream per block.
pub const BLOCK: usize = 4096;

/// Block sizes covering `total` draws.
pub fn blocks(total: usize) -> impl Iterator<Item = (u64, usize)> {
    let n = total.div_ceil(BLOCK);
    (0..n).map(move |j| (j as u64, BLOCK.min(total - j * BLOCK)))
}

/// Sampler for a distribution on `0..=n` by inversion of its cumulative table.
#[derive(Debug, Clone)]
pub struct DiscreteTable {
    cdf: Vec<f64>,
}

impl DiscreteTable {
    /// Builds the table from log-probabilities; they need not be normalised.
    fn from_log_pmf(log_pmf: Vec<f64>) -> Self {
        let max = log_pmf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = log_pmf
            .iter()
            .map(|&l| {
                acc += (l - max).exp();
                acc
            })
            .collect();
        for c in &mut cdf {
            *c /= acc;
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Self { cdf }
    }

    /// Binomial(n, p) with `p ∈ [0, 1]`.
    pub fn binomial(n: u32, p: f64) -> Self {
        if p <= 0.0 || p >= 1.0 {
            let hit = if p >= 1.0 { n as usize } else { 0 };
            let cdf = (0..=n as usize).map(|k| if k >= hit { 1.0 } else { 0.0 }).collect();
            return Self { cdf };
        }
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        let lf = ln_factorials(n);
        let log_pmf = (0..=n as usize)
            .map(|k| lf[n as usize] - lf[k] - lf[n as usize - k] + k as f64 * lp + (n as usize - k) as f64 * lq)
            .collect();
        Self::from_log_pmf(log_pmf)
    }

    /// Number of marked items among `draws` taken without replacement from a
    /// population of `population` items, `marked` of them marked.
    pub fn hypergeometric(population: u32, marked: u32, draws: u32) -> Self {
        assert!(marked <= population && draws <= population);
        let lf = ln_factorials(population);
        let lc = |n: u32, k: u32| lf[n as usize] - lf[k as usize] - lf[(n - k) as usize];
        let lo = (draws + marked).saturating_sub(population);
        let hi = draws.min(marked);
        let log_pmf = (0..=hi)
            .map(|k| {
                if k < lo {
                    f64::NEG_INFINITY
                } else {
                    lc(marked, k) + lc(population - marked, draws - k)
                }
            })
            .collect();
        Self::from_log_pmf(log_pmf)
    }

    /// Probability of `k`.
    pub fn pmf(&self, k: usize) -> f64 {
        match k {
            0 => self.cdf[0],
            _ if k < self.cdf.len() => self.cdf[k] - self.cdf[k - 1],
            _ => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c <= u);
        k.min(self.cdf.len() - 1) as u32
    }
}

fn ln_factorials(n: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += f64::from(k).ln();
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn streams_are_keyed() {
        let a: u64 = stream(1, Purpose::Trial, 0, 0).random();
        let b: u64 = stream(1, Purpose::Trial, 0, 0).random();
        let c: u64 = stream(1, Purpose::Trial, 0, 1).random();
        let d: u64 = stream(1, Purpose::Trial, 1, 0).random();
        let e: u64 = stream(1, Purpose::ParametricBootstrap, 0, 0).random();
        let f: u64 = stream(2, Purpose::Trial, 0, 0).random();
        assert_eq!(a, b);
        let all = [a, c, d, e, f];
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                assert_ne!(all[i], all[j]);
            }
        }
    }

    #[test]
    fn blocks_cover_total() {
        let v: Vec<_> = blocks(2 * BLOCK + 5).collect();
        assert_eq!(v, vec![(0, BLOCK), (1, BLOCK), (2, 5)]);
        assert_eq!(blocks(0).count(), 0);
    }

    #[test]
    fn binomial_pmf_matches_closed_form() {
        let t = DiscreteTable::binomial(5, 0.3);
        let want = [0.16807, 0.36015, 0.3087, 0.1323, 0.02835, 0.00243];
        for (k, w) in want.iter().enumerate() {
            assert_abs_diff_eq!(t.pmf(k), *w, epsilon = 1e-12);
        }
    }

    #[test]
    fn binomial_edge_rates() {
        let mut rng = stream(3, Purpose::Trial, 0, 0);
        assert_eq!(DiscreteTable::binomial(10, 0.0).sample(&mut rng), 0);
        assert_eq!(DiscreteTable::binomial(10, 1.0).sample(&mut rng), 10);
    }

    #[test]
    fn binomial_sample_moments() {
        let t = DiscreteTable::binomial(101, 0.294);
        let mut rng = stream(5, Purpose::Trial, 0, 0);
        let n = 200_000;
        let mean = (0..n).map(|_| f64::from(t.sample(&mut rng))).sum::<f64>() / n as f64;
        let want = 101.0 * 0.294;
        let se = (101.0 * 0.294 * 0.706 / n as f64).sqrt();
        assert!((mean - want).abs() < 4.0 * se, "{mean} vs {want}");
    }

    #[test]
    fn hypergeometric_pmf() {
        // 10 items, 4 marked, draw 3: P(k) = C(4,k)C(6,3-k)/C(10,3)
        let t = DiscreteTable::hypergeometric(10, 4, 3);
        let want = [20.0 / 120.0, 60.0 / 120.0, 36.0 / 120.0, 4.0 / 120.0];
        for (k, w) in want.iter().enumerate() {
            assert_abs_diff_eq!(t.pmf(k), *w, epsilon = 1e-12);
        }
        // Lower support bound: 10 items, 8 marked, draw 5 → k ≥ 3.
        let t = DiscreteTable::hypergeometric(10, 8, 5);
        assert_eq!(t.pmf(2), 0.0);
        assert!(t.pmf(3) > 0.0);
    }
}
