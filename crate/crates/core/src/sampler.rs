//! Subcorpus sampling: the size distribution favoring small subcorpora and
//! uniform line selection without replacement.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::corpus::ParallelText;

/// Seeded random generator with a fixed draw sequence per seed.
///
/// Workers and grid cells derive their own generators through `derive_seed`
/// so concurrent runs stay reproducible.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn from_seed(seed: u64) -> Self {
        RandomSource {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Non-reproducible generator seeded from OS entropy.
    pub fn from_entropy() -> Self {
        RandomSource {
            rng: ChaCha20Rng::from_os_rng(),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub(crate) fn rng_mut(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}

/// Mixes a master seed with a label sequence (worker index, grid cell, ...)
/// into an independent stream seed. Same inputs, same output.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut state = splitmix64(master ^ 0x53a6_5a11_67a1_19ed);
    for &label in labels {
        state = splitmix64(state ^ splitmix64(label.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    state
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// The subcorpus-size distribution over k = 1..n-1 for a corpus of n lines:
/// p(k) proportional to -1/(k ln(1 - k/n)), normalized. Close to 1/k^2, so
/// small subcorpora dominate. For n = 1 the distribution degenerates to
/// p(1) = 1.
#[derive(Debug, Clone)]
pub struct SizeDistribution {
    corpus_size: usize,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SizeDistribution {
    pub fn new(corpus_size: usize) -> Self {
        assert!(corpus_size >= 1, "corpus must have at least one line");
        if corpus_size == 1 {
            return SizeDistribution {
                corpus_size,
                probs: vec![1.0],
                cumulative: vec![1.0],
            };
        }
        let weights: Vec<f64> = (1..corpus_size)
            .map(|k| unnormalized_weight(k, corpus_size))
            .collect();
        let total = kahan_sum(&weights);
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        let mut comp = 0.0;
        for &p in &probs {
            // Kahan-compensated running sum keeps the table monotone.
            let y = p - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            cumulative.push(acc);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        SizeDistribution {
            corpus_size,
            probs,
            cumulative,
        }
    }

    /// Number of lines in the corpus this distribution was built for.
    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    /// Largest admissible subcorpus size (n - 1, or 1 for n = 1).
    pub fn max_size(&self) -> usize {
        self.probs.len()
    }

    /// Probability of drawing size k; zero outside the support.
    pub fn prob(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.probs.len() {
            self.probs[k - 1]
        } else {
            0.0
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Draws a subcorpus size by inverse CDF over the precomputed table.
    pub fn sample_size(&self, rng: &mut RandomSource) -> usize {
        if self.probs.len() == 1 {
            return 1;
        }
        let u = rng.unit();
        self.cumulative.partition_point(|&c| c <= u) + 1
    }
}

/// Unnormalized Eq-style weight -1/(k ln(1 - k/n)) for 1 <= k < n.
pub fn unnormalized_weight(k: usize, n: usize) -> f64 {
    debug_assert!(k >= 1 && k < n);
    -1.0 / (k as f64 * (1.0 - k as f64 / n as f64).ln())
}

/// Compensated summation; the distribution tests check normalization to
/// 1e-12, which naive summation does not reliably reach at n = 10^6.
pub fn kahan_sum(values: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let y = v - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    acc
}

/// A set of distinct line indices drawn from a corpus, kept in ascending
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subcorpus {
    lines: Vec<usize>,
}

impl Subcorpus {
    /// Builds a subcorpus from explicit indices. Indices are sorted; they
    /// must be distinct and within the corpus.
    pub fn from_indices(mut lines: Vec<usize>, corpus_lines: usize) -> Self {
        lines.sort_unstable();
        assert!(!lines.is_empty(), "subcorpus must not be empty");
        assert!(
            lines.windows(2).all(|w| w[0] < w[1]),
            "subcorpus indices must be distinct"
        );
        assert!(
            *lines.last().unwrap() < corpus_lines,
            "subcorpus index out of range"
        );
        Subcorpus { lines }
    }

    /// The whole corpus as one subcorpus (used by tests and oracles; the
    /// sampler itself never draws k = n for n >= 2).
    pub fn full(corpus_lines: usize) -> Self {
        assert!(corpus_lines >= 1);
        Subcorpus {
            lines: (0..corpus_lines).collect(),
        }
    }

    pub fn lines(&self) -> &[usize] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

/// Draws a subcorpus: size from `dist`, then that many distinct lines
/// uniformly at random, returned in ascending order.
pub fn draw_subcorpus(
    text: &impl ParallelText,
    dist: &SizeDistribution,
    rng: &mut RandomSource,
) -> Subcorpus {
    debug_assert_eq!(dist.corpus_size(), text.line_count());
    let k = dist.sample_size(rng);
    let mut lines = index::sample(rng.rng_mut(), text.line_count(), k).into_vec();
    lines.sort_unstable();
    Subcorpus { lines }
}
