use num_complex::Complex64;

use super::{newton_to_target, norm, FiberError, FiberPoint, FibrationConfig};
use crate::mixedpoly::jacobian::{from_real, to_real};
use crate::mixedpoly::{MixedPolynomial, PolyError, RealJacobian, DEFAULT_REGULARITY_TOL};

/// `V(p)`: the minimal-norm solution of `J(p) V = i f(p)` in real coordinates.
pub fn horizontal_field(
    f: &MixedPolynomial,
    p: &[Complex64],
    cfg: &FibrationConfig,
) -> Result<Vec<f64>, FiberError> {
    if p.len() != f.n() {
        return Err(PolyError::DimensionMismatch { expected: f.n(), got: p.len() }.into());
    }
    let _ = cfg;
    field_unchecked(f, p)
}

fn field_unchecked(f: &MixedPolynomial, p: &[Complex64]) -> Result<Vec<f64>, FiberError> {
    let (value, dz, dzb) = f.wirtinger_unchecked(p);
    let jac = RealJacobian::from_wirtinger(&dz, &dzb);
    let sigma = jac.smallest_singular_value();
    if sigma <= DEFAULT_REGULARITY_TOL {
        return Err(FiberError::Critical { sigma });
    }
    let rhs = Complex64::i() * value;
    jac.min_norm_solve([rhs.re, rhs.im]).ok_or(FiberError::Critical { sigma })
}

fn rk4_step(f: &MixedPolynomial, x: &[f64], h: f64) -> Result<Vec<f64>, FiberError> {
    let eval = |y: &[f64]| field_unchecked(f, &from_real(y));
    let shift = |k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let k1 = eval(x)?;
    let k2 = eval(&shift(&k1, 0.5 * h))?;
    let k3 = eval(&shift(&k2, 0.5 * h))?;
    let k4 = eval(&shift(&k3, h))?;
    Ok((0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// The whole sampled trajectory `h_s(p)` for `s` from 0 to `theta`, one node per
/// integrator step, starting with `p` itself.
///
/// Fixed-step RK4 with `⌈|θ| / ode_step⌉` equal steps; after each step the
/// point is projected back onto `f = |target| e^{i(θ₀ + s)}`.
pub fn flow_trajectory(
    f: &MixedPolynomial,
    p: &FiberPoint,
    theta: f64,
    cfg: &FibrationConfig,
) -> Result<Vec<FiberPoint>, FiberError> {
    if p.z.len() != f.n() {
        return Err(PolyError::DimensionMismatch { expected: f.n(), got: p.z.len() }.into());
    }
    let mut out = vec![p.clone()];
    if theta == 0.0 {
        return Ok(out);
    }
    let steps = (theta.abs() / cfg.ode_step).ceil().max(1.0) as usize;
    let h = theta / steps as f64;
    let (delta, theta0) = (p.target.norm(), p.target.arg());
    let radius = cfg.working_radius();
    let mut x = to_real(&p.z);
    for k in 1..=steps {
        let predicted = rk4_step(f, &x, h)?;
        let target = Complex64::from_polar(delta, theta0 + h * k as f64);
        let fp = newton_to_target(f, &from_real(&predicted), target, cfg)?;
        let nz = norm(&fp.z);
        if nz > radius {
            return Err(FiberError::LeftBall { norm: nz, radius });
        }
        x = to_real(&fp.z);
        out.push(fp);
    }
    Ok(out)
}

/// `h_θ(p)`: the fiber point over `|target| e^{i(arg target + θ)}` reached by
/// flowing the horizontal field from `p`.
pub fn flow_monodromy(
    f: &MixedPolynomial,
    p: &FiberPoint,
    theta: f64,
    cfg: &FibrationConfig,
) -> Result<FiberPoint, FiberError> {
    let mut traj = flow_trajectory(f, p, theta, cfg)?;
    Ok(traj.pop().expect("trajectory contains the start point"))
}
