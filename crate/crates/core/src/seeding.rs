//! Seed derivation and random draws.
//!
//! Every randomized stage gets its own stream derived from a single master
//! seed and a purpose label:
//!
//! ```text
//! sub_seed = splitmix64(master ^ fnv1a64(label))
//! ```
//!
//! Adding a new label never perturbs existing streams. Streams are
//! ChaCha8, so they are identical on every platform.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{Scalar, C};

pub type SimRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, label: &str) -> u64 {
    splitmix64(master ^ fnv1a64(label.as_bytes()))
}

/// Seed for the `index`-th member of a labelled family (chunks, trials, ...).
pub fn derive_indexed(master: u64, label: &str, index: u64) -> u64 {
    splitmix64(derive_seed(master, label) ^ splitmix64(index))
}

pub fn rng_from(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circularly-symmetric complex Gaussian with `E|z|² = power`.
pub fn complex_gaussian<T: Scalar, R: Rng + ?Sized>(rng: &mut R, power: T) -> C<T> {
    let s = (power.to_f64_lossy() * 0.5).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::of(re * s), T::of(im * s))
}

/// Uniform phase in `[0, 2π)`.
pub fn uniform_phase<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    let u: f64 = rng.random::<f64>();
    T::of(u * std::f64::consts::TAU)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_give_distinct_streams() {
        let a = derive_seed(42, "surface");
        let b = derive_seed(42, "random-pattern");
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(42, "surface"));
        assert_ne!(derive_indexed(1, "chunk", 0), derive_indexed(1, "chunk", 1));
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn complex_gaussian_power() {
        let mut rng = rng_from(3);
        let n = 200_000;
        let p: f64 = (0..n)
            .map(|_| complex_gaussian::<f64, _>(&mut rng, 2.0).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((p - 2.0).abs() < 0.03, "{p}");
    }
}
