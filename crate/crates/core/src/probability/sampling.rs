use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Distribution, Symbol};

/// Generator used for every seeded stream in the crate.
pub type StreamRng = ChaCha8Rng;

/// Inverse-CDF sampler over a precomputed cumulative vector.
#[derive(Debug, Clone)]
pub struct Sampler {
    cdf: Vec<f64>,
    // last symbol with positive mass; absorbs draws above a cdf that sums to 1 − δ
    last: Symbol,
}

impl Sampler {
    pub fn new(dist: &Distribution) -> Self {
        let mut acc = 0.0;
        let cdf = dist
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last = dist
            .probs()
            .iter()
            .rposition(|&p| p > 0.0)
            .expect("a distribution has positive mass somewhere") as Symbol;
        Self { cdf, last }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Symbol {
        let u: f64 = rng.random();
        let y = self.cdf.partition_point(|&c| c <= u) as Symbol;
        y.min(self.last)
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Symbol]) {
        for slot in out {
            *slot = self.draw(rng);
        }
    }
}

/// `n` i.i.d. draws from `dist`.
pub fn sample_sequence<R: Rng + ?Sized>(dist: &Distribution, n: usize, rng: &mut R) -> Vec<Symbol> {
    let sampler = Sampler::new(dist);
    (0..n).map(|_| sampler.draw(rng)).collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of indices (sweep point, trial, …).
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Independent reproducible stream for `(master, path)`.
pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, path))
}
