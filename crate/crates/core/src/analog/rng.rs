//! Counter-keyed Gaussian draws. A draw depends only on
//! `(seed, layer, tile, site, cell)`, never on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Which physical noise source a draw belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Input = 0,
    Weight = 1,
    Output = 2,
    Program = 3,
}

const MAX_LAYER: u32 = 1 << 30;
/// Words reserved per cell; a normal sample uses far fewer.
const WORDS_PER_CELL_LOG2: u32 = 16;

#[derive(Debug, Clone)]
pub struct KeyedRng {
    base: ChaCha8Rng,
}

impl KeyedRng {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator positioned at the start of `cell`'s block.
    ///
    /// `layer` must be below 2^30 and `cell` below 2^52.
    pub fn stream(&self, layer: u32, tile: u32, site: Site, cell: u64) -> ChaCha8Rng {
        debug_assert!(layer < MAX_LAYER);
        debug_assert!(cell < 1 << 52);
        let mut r = self.base.clone();
        r.set_stream((u64::from(layer) << 34) | (u64::from(tile) << 2) | site as u64);
        r.set_word_pos(u128::from(cell) << WORDS_PER_CELL_LOG2);
        r
    }

    pub fn normal(&self, layer: u32, tile: u32, site: Site, cell: u64) -> f64 {
        self.stream(layer, tile, site, cell).sample(StandardNormal)
    }
}

/// `v + N(0, (σ·|v|)²)`. Exact identity when `σ = 0` or `v = 0`.
pub fn inject_noise<R: Rng + ?Sized>(v: f64, sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 || v == 0.0 {
        return v;
    }
    let z: f64 = rng.sample(StandardNormal);
    v + sigma * v.abs() * z
}
