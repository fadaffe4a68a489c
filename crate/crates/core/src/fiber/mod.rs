//! The tubular Milnor fibration `f : ∂E(r₀, δ) → S¹_δ`, realised numerically.
//!
//! Points of a fiber `F_θ = f⁻¹(δe^{iθ}) ∩ B_{r₀}` are found by damped
//! Gauss–Newton with minimal-norm steps. The horizontal vector field is the
//! minimal-norm preimage of the angular velocity `i f(p)`, so its flow keeps
//! `|f|` fixed and advances `arg f` at unit speed; integrating it gives the
//! characteristic maps `h_θ`.
//!
//! Trajectories are confined to the open ball of radius `r₀ (1 − margin)`;
//! leaving it is an error rather than being corrected by a collar.

mod flow;
mod path;
mod probe;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mixedpoly::jacobian::{from_real, to_real};
use crate::mixedpoly::{MixedPolynomial, PolyError, DEFAULT_REGULARITY_TOL};

pub use flow::{flow_monodromy, flow_trajectory, horizontal_field};
pub use path::{
    correcting_loop, deform_node, deform_path_to_fiber, project_to_tube, rotation_number,
    rotation_number_with_tol, SampledPath,
};
pub use probe::{probe_transversality, write_points_csv, TransversalityProbe};

pub const DEFAULT_TOL_FIBER: f64 = 1e-9;
pub const DEFAULT_TOL_ANGLE: f64 = 1e-6;
pub const DEFAULT_ODE_STEP: f64 = 0.0031415;
pub const DEFAULT_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FiberError {
    #[error("invalid fibration config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("constant polynomial has no regular fibers")]
    ConstantPolynomial,
    #[error("seed point has norm {norm} outside the working ball of radius {radius}")]
    SeedOutsideBall { norm: f64, radius: f64 },
    #[error("Gauss-Newton did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("point left the working ball: norm {norm} > {radius}")]
    LeftBall { norm: f64, radius: f64 },
    #[error("mixed-critical point: smallest singular value {sigma:e}")]
    Critical { sigma: f64 },
    #[error("f vanishes at path node {index}")]
    ZeroValue { index: usize },
    #[error("loop not closed in the image: angle gap {gap:e}")]
    NotClosed { gap: f64 },
    #[error("path under-sampled: angle increment {increment} at node {index}")]
    UnderSampled { index: usize, increment: f64 },
    #[error("accumulated angle {turns} turns is not close to an integer")]
    NonIntegral { turns: f64 },
    #[error("path node {index} is off the tube: ||f| - delta| = {gap:e}")]
    OffTube { index: usize, gap: f64 },
    #[error("path has winding {winding}; compose with a correcting loop first")]
    NonzeroWinding { winding: i64 },
    #[error("empty path")]
    EmptyPath,
    #[error("flow failed at node {node}: {source}")]
    FlowFailed {
        node: usize,
        #[source]
        source: Box<FiberError>,
    },
}

/// Radii, fiber radius and tolerances of the working fibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FibrationConfig {
    pub r0: f64,
    pub r1: f64,
    pub delta: f64,
    pub tol_fiber: f64,
    pub tol_angle: f64,
    pub ode_step: f64,
    /// Trajectories must stay within `r0 (1 − margin)`.
    pub margin: f64,
    pub max_newton_iters: usize,
}

impl Default for FibrationConfig {
    fn default() -> Self {
        Self {
            r0: 1.0,
            r1: 0.5,
            delta: 1e-3,
            tol_fiber: DEFAULT_TOL_FIBER,
            tol_angle: DEFAULT_TOL_ANGLE,
            ode_step: DEFAULT_ODE_STEP,
            margin: DEFAULT_MARGIN,
            max_newton_iters: 60,
        }
    }
}

impl FibrationConfig {
    pub fn validate(&self) -> Result<(), FiberError> {
        let bad = |m: &str| Err(FiberError::InvalidConfig(m.to_string()));
        if !(self.r1 > 0.0 && self.r1 < self.r0) {
            return bad("need 0 < r1 < r0");
        }
        if !(self.delta > 0.0) {
            return bad("need delta > 0");
        }
        if !(self.tol_fiber > 0.0 && self.tol_angle > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.ode_step > 0.0 && self.ode_step <= 0.1) {
            return bad("ode_step must lie in (0, 0.1]");
        }
        if !(0.0..1.0).contains(&self.margin) {
            return bad("margin must lie in [0, 1)");
        }
        if self.max_newton_iters == 0 {
            return bad("max_newton_iters must be positive");
        }
        Ok(())
    }

    pub fn working_radius(&self) -> f64 {
        self.r0 * (1.0 - self.margin)
    }

    /// `1e-3 · r0^d` with `d` the minimal radial degree of `f`.
    pub fn default_delta(f: &MixedPolynomial, r0: f64) -> f64 {
        let d = f.min_radial_degree().unwrap_or(1).max(1);
        1e-3 * r0.powi(d as i32)
    }

    /// Whether `z` lies in `E(r0, δ)`: `‖z‖ ≤ r0` and `|f(z)| ≤ δ`.
    pub fn in_tube(&self, f: &MixedPolynomial, z: &[Complex64]) -> Result<bool, FiberError> {
        Ok(norm(z) <= self.r0 && f.evaluate(z)?.norm() <= self.delta)
    }

    /// Whether `z` lies on `∂E(r0, δ)` within `tol_fiber`.
    pub fn on_tube_boundary(&self, f: &MixedPolynomial, z: &[Complex64]) -> Result<bool, FiberError> {
        Ok(norm(z) <= self.r0 && (f.evaluate(z)?.norm() - self.delta).abs() <= self.tol_fiber)
    }

    /// Allowed deviation `||f| − δ|` for nodes of paths in `∂E`.
    pub(crate) fn tube_tol(&self) -> f64 {
        10.0 * self.tol_fiber
    }
}

/// A point `z` with `|f(z) − target| = residual`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberPoint {
    pub z: Vec<Complex64>,
    pub target: Complex64,
    pub residual: f64,
}

impl FiberPoint {
    /// Wraps an existing point, measuring its residual.
    pub fn new(f: &MixedPolynomial, z: Vec<Complex64>, target: Complex64) -> Result<Self, FiberError> {
        let residual = (f.evaluate(&z)? - target).norm();
        Ok(Self { z, target, residual })
    }

    pub fn angle(&self) -> f64 {
        self.target.arg()
    }
}

pub(crate) fn norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Damped Gauss–Newton onto `f(z) = target` from `z0` using minimal-norm
/// steps. Iterates until the residual drops three orders below `tol_fiber`
/// or stops improving; accepts when it is within `tol_fiber`.
pub(crate) fn newton_to_target(
    f: &MixedPolynomial,
    z0: &[Complex64],
    target: Complex64,
    cfg: &FibrationConfig,
) -> Result<FiberPoint, FiberError> {
    let radius = cfg.working_radius();
    let mut x = to_real(z0);
    let mut z = z0.to_vec();
    let mut r = f.eval_unchecked(&z) - target;
    let goal = 1e-3 * cfg.tol_fiber;
    let mut iterations = 0;
    while r.norm() > goal && iterations < cfg.max_newton_iters {
        iterations += 1;
        let (_, dz, dzb) = f.wirtinger_unchecked(&z);
        let jac = crate::mixedpoly::RealJacobian::from_wirtinger(&dz, &dzb);
        let sigma = jac.smallest_singular_value();
        if sigma <= DEFAULT_REGULARITY_TOL * 1e-4 {
            return Err(FiberError::Critical { sigma });
        }
        let Some(step) = jac.min_norm_solve([-r.re, -r.im]) else {
            return Err(FiberError::Critical { sigma });
        };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let xc: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
            let zc = from_real(&xc);
            let rc = f.eval_unchecked(&zc) - target;
            if rc.norm() < r.norm() {
                x = xc;
                z = zc;
                r = rc;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        let nz = norm(&z);
        if nz > radius {
            return Err(FiberError::LeftBall { norm: nz, radius });
        }
        if !improved {
            break;
        }
    }
    let residual = r.norm();
    if residual <= cfg.tol_fiber {
        Ok(FiberPoint { z, target, residual })
    } else {
        Err(FiberError::NoConvergence { iterations, residual })
    }
}

/// Locates a point of `f⁻¹(target)` inside the working ball, starting from `seed_point`.
pub fn find_fiber_point(
    f: &MixedPolynomial,
    target: Complex64,
    cfg: &FibrationConfig,
    seed_point: &[Complex64],
) -> Result<FiberPoint, FiberError> {
    cfg.validate()?;
    if seed_point.len() != f.n() {
        return Err(PolyError::DimensionMismatch { expected: f.n(), got: seed_point.len() }.into());
    }
    if f.is_constant() {
        return Err(FiberError::ConstantPolynomial);
    }
    let radius = cfg.working_radius();
    let nz = norm(seed_point);
    if nz > radius {
        return Err(FiberError::SeedOutsideBall { norm: nz, radius });
    }
    newton_to_target(f, seed_point, target, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixedpoly::parse_mixed_expression;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn p(s: &str) -> MixedPolynomial {
        parse_mixed_expression(s).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(FibrationConfig::default().validate().is_ok());
        let bad = [
            FibrationConfig { r1: 1.0, ..Default::default() },
            FibrationConfig { delta: 0.0, ..Default::default() },
            FibrationConfig { tol_angle: -1.0, ..Default::default() },
            FibrationConfig { ode_step: 0.2, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(FiberError::InvalidConfig(_))), "{cfg:?}");
        }
    }

    #[test]
    fn tube_predicates() {
        let f = p("z1");
        let cfg = FibrationConfig::default();
        assert!(cfg.in_tube(&f, &[c(1e-4, 0.0)]).unwrap());
        assert!(!cfg.in_tube(&f, &[c(0.5, 0.0)]).unwrap());
        assert!(cfg.on_tube_boundary(&f, &[c(0.0, 1e-3)]).unwrap());
    }

    #[test]
    fn linear_fiber_point_in_one_step() {
        let f = p("z1").with_arity(2);
        let cfg = FibrationConfig::default();
        let fp = find_fiber_point(&f, c(cfg.delta, 0.0), &cfg, &[c(0.3, -0.2), c(0.1, 0.4)]).unwrap();
        assert!((fp.z[0] - c(cfg.delta, 0.0)).norm() < 1e-15);
        assert_eq!(fp.z[1], c(0.1, 0.4));
    }

    #[test]
    fn product_fiber_point_keeps_symmetry() {
        let f = p("z1*z2");
        let cfg = FibrationConfig { r0: 2.0, r1: 1.0, ..Default::default() };
        let fp = find_fiber_point(&f, c(0.01, 0.0), &cfg, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((f.evaluate(&fp.z).unwrap() - c(0.01, 0.0)).norm() < 1e-10);
        assert!((fp.z[0] - c(0.1, 0.0)).norm() < 1e-10);
        assert_eq!(fp.z[0], fp.z[1]);
    }

    #[test]
    fn residual_self_check_on_higher_degree() {
        let f = p("z1^2*z2^3");
        let cfg = FibrationConfig::default();
        let fp = find_fiber_point(&f, c(cfg.delta, 0.0), &cfg, &[c(0.5, 0.1), c(0.4, -0.3)]).unwrap();
        let r = (f.evaluate(&fp.z).unwrap() - c(cfg.delta, 0.0)).norm();
        assert!(r <= cfg.tol_fiber);
        assert_eq!(r, fp.residual);
    }

    #[test]
    fn seed_outside_ball_rejected() {
        let f = p("z1");
        let cfg = FibrationConfig::default();
        assert!(matches!(
            find_fiber_point(&f, c(1e-3, 0.0), &cfg, &[c(2.0, 0.0)]),
            Err(FiberError::SeedOutsideBall { .. })
        ));
        assert!(matches!(
            find_fiber_point(&p("3 + 0*z1"), c(1e-3, 0.0), &cfg, &[c(0.1, 0.0)]),
            Err(FiberError::ConstantPolynomial)
        ));
    }

    #[test]
    fn critical_seed_fails() {
        let f = p("z1^2");
        let cfg = FibrationConfig::default();
        assert!(matches!(
            find_fiber_point(&f, c(1e-3, 0.0), &cfg, &[c(0.0, 0.0)]),
            Err(FiberError::Critical { .. })
        ));
    }
}
