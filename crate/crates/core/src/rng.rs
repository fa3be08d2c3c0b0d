//! Counter-based seed derivation.
//!
//! Every random quantity in a run is drawn from its own ChaCha stream whose
//! seed is a hash of the master seed and a path of integer labels
//! (drop, realization, site, UE, antenna, ...). Results therefore do not depend
//! on the order in which work units are executed.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

/// Domain tags keeping the streams of unrelated quantities apart.
pub mod domain {
    pub const UE_DROP: u64 = 0x5545_4452;
    pub const SHADOWING: u64 = 0x5348_4144;
    pub const FADING: u64 = 0x4641_4445;
    pub const ESTIMATION: u64 = 0x4553_5449;
}

const fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes `master` together with `path` into a 64-bit stream seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &label in path {
        h = splitmix64(h ^ splitmix64(label.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

/// Proper complex Gaussian sample with unit variance (E|z|^2 = 1).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}
