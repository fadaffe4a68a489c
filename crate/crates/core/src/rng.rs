//! Deterministic per-task random streams.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream index for a pair of labels, e.g. `(pair index, attempt)`.
pub fn pair_stream(a: u64, b: u64) -> u64 {
    (a << 20) ^ b
}

/// Modulus log-uniform in `[lo, hi]`, argument uniform.
pub fn log_uniform_complex<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Complex64 {
    let r = (rng.gen_range(lo.ln()..=hi.ln())).exp();
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, t)
}

/// Uniform point of the closed ball of the given radius in `ℂ^n = ℝ^{2n}`.
pub fn uniform_in_ball<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Vec<Complex64> {
    let g: Vec<f64> = (0..2 * n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let u: f64 = rng.gen();
    let scale = radius * u.powf(1.0 / (2 * n) as f64) / norm;
    g.chunks_exact(2)
        .map(|p| Complex64::new(p[0] * scale, p[1] * scale))
        .collect()
}
