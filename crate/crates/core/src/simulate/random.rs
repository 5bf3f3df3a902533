//! Seeded draws built from uniform primitives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Generator for curve `index` under `seed`; streams for different indices
/// are independent, so draws do not depend on evaluation order.
pub fn curve_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on `[0, 1)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Uniform on `(0, 1]`.
fn uniform_open0<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Standard normal by Box–Muller; one draw per pair of uniforms.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1 = uniform_open0(rng);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Normal with the given mean and variance.
pub fn normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, variance: f64) -> f64 {
    mean + variance.sqrt() * standard_normal(rng)
}

/// Poisson by sequential inversion; suited to small rates.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let u = uniform(rng);
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u > cdf && k < 10_000 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
        if p == 0.0 {
            break;
        }
    }
    k
}

/// Beta(2, 2) as the median of three uniforms.
pub fn beta22<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let mut u = [uniform(rng), uniform(rng), uniform(rng)];
    u.sort_by(f64::total_cmp);
    u[1]
}

/// Uniform on `[-a, a]`.
pub fn symmetric_uniform<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    a * (2.0 * uniform(rng) - 1.0)
}
