//! Seeded generators for random elements, matrices and band operators.
//!
//! Everything is driven by an explicit 64-bit seed through ChaCha8 so that
//! fixtures are reproducible byte-for-byte across runs and platforms.

use crate::algebra::{CdComplex, CdNumber};
use crate::matrix::CdMatrix;
use crate::seq::BandPeriodicOp;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cd(rng: &mut ChaCha8Rng, level: u32, scale: f64) -> CdNumber {
    let coords = (0..1usize << level)
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    CdNumber::new(level, coords).expect("valid coords")
}

pub fn random_cdc(rng: &mut ChaCha8Rng, level: u32, scale: f64) -> CdComplex {
    CdComplex::new(random_cd(rng, level, scale), random_cd(rng, level, scale)).expect("same level")
}

pub fn random_matrix(rng: &mut ChaCha8Rng, level: u32, rows: usize, cols: usize, scale: f64) -> CdMatrix {
    let mut m = CdMatrix::zero(level, rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            *m.entry_mut(i, j) = random_cdc(rng, level, scale);
        }
    }
    m
}

/// Random band operator with period `n`, band radius `band` and fiber
/// dimension `d`; block entries are uniform in `[-scale, scale]`.
pub fn random_band_op(
    rng: &mut ChaCha8Rng,
    level: u32,
    d: usize,
    n: usize,
    band: usize,
    scale: f64,
) -> BandPeriodicOp {
    let mut op = BandPeriodicOp::zero(level, d, n, band);
    for j in 0..n {
        for m in -(band as i64)..=(band as i64) {
            let blk = random_matrix(rng, level, d, d, scale);
            op.set_block(j, m, blk).expect("in band");
        }
    }
    op
}

/// Random operator shifted to diagonal dominance: `I + t * B0 / bound(B0)`,
/// guaranteeing an invertibility margin of roughly `1 - t`.
pub fn random_dominant_op(
    rng: &mut ChaCha8Rng,
    level: u32,
    d: usize,
    n: usize,
    band: usize,
    t: f64,
) -> BandPeriodicOp {
    let b0 = random_band_op(rng, level, d, n, band, 1.0);
    let bound = b0.norm_bound().max(1e-300);
    let scaled = b0.scale_real(t / bound);
    BandPeriodicOp::identity(level, d, n)
        .add(&scaled)
        .expect("compatible")
}
