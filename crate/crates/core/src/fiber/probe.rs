use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::{norm, FiberPoint, FibrationConfig};
use crate::mixedpoly::jacobian::{from_real, to_real};
use crate::mixedpoly::{MixedPolynomial, RealJacobian};
use crate::rng::{stream_rng, uniform_in_ball};

/// Smallest singular value of the Jacobian of `(Re f, Im f, ‖z‖²)` over
/// sampled points of `f⁻¹(δ) ∩ S_r`, for radii between `r1` and `r0`.
///
/// A diagnostic only: small values flag radii where the fiber is close to
/// tangent to the sphere. It does not decide the transversality condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransversalityProbe {
    pub radii: Vec<f64>,
    /// `None` where no point of the fiber on that sphere was found.
    pub min_singular_value: Vec<Option<f64>>,
    pub samples_per_radius: usize,
}

pub fn probe_transversality(
    f: &MixedPolynomial,
    cfg: &FibrationConfig,
    radii: usize,
    samples: usize,
    seed: u64,
) -> TransversalityProbe {
    let n = f.n();
    let target = Complex64::new(cfg.delta, 0.0);
    let rs: Vec<f64> = (0..radii)
        .map(|k| {
            let t = if radii > 1 { k as f64 / (radii - 1) as f64 } else { 0.0 };
            cfg.r1 + t * (cfg.r0 - cfg.r1)
        })
        .collect();
    let mins = rs
        .iter()
        .enumerate()
        .map(|(ri, &r)| {
            let mut best: Option<f64> = None;
            for s in 0..samples {
                let mut rng = stream_rng(seed, (ri * samples + s) as u64);
                let mut z = uniform_in_ball(&mut rng, n, 1.0);
                let nz = norm(&z).max(1e-300);
                z.iter_mut().for_each(|c| *c *= r / nz);
                if let Some(sigma) = sphere_fiber_point(f, &z, target, r).map(|p| combined_sigma(f, &p)) {
                    best = Some(best.map_or(sigma, |b: f64| b.min(sigma)));
                }
            }
            best
        })
        .collect();
    TransversalityProbe { radii: rs, min_singular_value: mins, samples_per_radius: samples }
}

fn combined_jacobian(f: &MixedPolynomial, z: &[Complex64]) -> DMatrix<f64> {
    let (_, dz, dzb) = f.wirtinger_unchecked(z);
    let j = RealJacobian::from_wirtinger(&dz, &dzb);
    let x = to_real(z);
    let m = x.len();
    DMatrix::from_fn(3, m, |r, c| match r {
        0 => j.re[c],
        1 => j.im[c],
        _ => 2.0 * x[c],
    })
}

fn combined_sigma(f: &MixedPolynomial, z: &[Complex64]) -> f64 {
    let a = combined_jacobian(f, z);
    (&a * a.transpose())
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
        .sqrt()
}

/// Gauss–Newton on `(f − target, ‖z‖² − r²) = 0`.
fn sphere_fiber_point(f: &MixedPolynomial, z0: &[Complex64], target: Complex64, r: f64) -> Option<Vec<Complex64>> {
    let mut x = to_real(z0);
    for _ in 0..80 {
        let z = from_real(&x);
        let v = f.eval_unchecked(&z) - target;
        let s = x.iter().map(|a| a * a).sum::<f64>() - r * r;
        let res = DVector::from_vec(vec![v.re, v.im, s]);
        if res.norm() < 1e-13 {
            return Some(z);
        }
        let a = combined_jacobian(f, &z);
        let step = a.pseudo_inverse(1e-14).ok()? * res;
        x.iter_mut().zip(step.iter()).for_each(|(a, d)| *a -= d);
        if !x.iter().all(|a| a.is_finite()) {
            return None;
        }
    }
    None
}

/// One row per point: `re(z1),im(z1),…,re(zn),im(zn),residual`.
pub fn write_points_csv<W: Write>(out: W, points: &[FiberPoint]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = points.first() {
        let mut header: Vec<String> = (1..=first.z.len())
            .flat_map(|j| [format!("re(z{j})"), format!("im(z{j})")])
            .collect();
        header.push("residual".into());
        w.write_record(&header)?;
    }
    for p in points {
        let mut row: Vec<String> = p.z.iter().flat_map(|c| [c.re.to_string(), c.im.to_string()]).collect();
        row.push(format!("{:e}", p.residual));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
