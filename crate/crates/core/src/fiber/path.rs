use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{flow_monodromy, flow_trajectory, newton_to_target, FiberError, FiberPoint, FibrationConfig};
use crate::mixedpoly::{MixedPolynomial, PolyError};

/// A discretised path `σ(t_k)` with the accumulated angle `ψ(t_k)` of `f` along it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub nodes: Vec<Vec<Complex64>>,
    /// `ψ[0] = 0`; `ψ[k+1] − ψ[k] = arg(f(node_{k+1}) / f(node_k)) ∈ (−π, π]`.
    pub psi: Vec<f64>,
}

impl SampledPath {
    pub fn from_nodes(f: &MixedPolynomial, nodes: Vec<Vec<Complex64>>) -> Result<Self, FiberError> {
        if nodes.is_empty() {
            return Err(FiberError::EmptyPath);
        }
        let values = values_of(f, &nodes)?;
        let mut psi = Vec::with_capacity(nodes.len());
        psi.push(0.0);
        for k in 1..values.len() {
            psi.push(psi[k - 1] + (values[k] / values[k - 1]).arg());
        }
        Ok(Self { nodes, psi })
    }

    pub fn constant(f: &MixedPolynomial, z: Vec<Complex64>) -> Result<Self, FiberError> {
        Self::from_nodes(f, vec![z])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> &[Complex64] {
        &self.nodes[0]
    }

    pub fn last(&self) -> &[Complex64] {
        self.nodes.last().expect("non-empty path")
    }

    /// `σ · ω`: `other` is appended, dropping its first node when it repeats our last.
    pub fn concat(&self, f: &MixedPolynomial, other: &SampledPath) -> Result<Self, FiberError> {
        let mut nodes = self.nodes.clone();
        let skip = usize::from(other.nodes.first().map(|z| z.as_slice()) == Some(self.last()));
        nodes.extend(other.nodes.iter().skip(skip).cloned());
        Self::from_nodes(f, nodes)
    }

    /// `max_k ‖node_{k+1} − node_k‖`.
    pub fn max_gap(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| super::distance(&w[0], &w[1]))
            .fold(0.0, f64::max)
    }

    /// `max_k |arg f(node_k) − arg f(node_0)|`, with angles unwrapped along the path.
    pub fn angle_spread(&self, f: &MixedPolynomial) -> Result<f64, FiberError> {
        let values = values_of(f, &self.nodes)?;
        Ok(values.iter().map(|v| (v / values[0]).arg().abs()).fold(0.0, f64::max))
    }
}

/// Serialises as `{"nodes": [[re(z1), im(z1), …]], "psi": [...]}`.
impl Serialize for SampledPath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let nodes: Vec<Vec<f64>> = self
            .nodes
            .iter()
            .map(|z| z.iter().flat_map(|c| [c.re, c.im]).collect())
            .collect();
        let mut st = s.serialize_struct("SampledPath", 2)?;
        st.serialize_field("nodes", &nodes)?;
        st.serialize_field("psi", &self.psi)?;
        st.end()
    }
}

fn values_of(f: &MixedPolynomial, nodes: &[Vec<Complex64>]) -> Result<Vec<Complex64>, FiberError> {
    nodes
        .iter()
        .enumerate()
        .map(|(k, z)| {
            if z.len() != f.n() {
                return Err(PolyError::DimensionMismatch { expected: f.n(), got: z.len() }.into());
            }
            let v = f.eval_unchecked(z);
            if v.norm() == 0.0 {
                Err(FiberError::ZeroValue { index: k })
            } else {
                Ok(v)
            }
        })
        .collect()
}

/// Winding number of `f ∘ σ` about 0 for a loop that is closed in the image,
/// with the closure gap allowed up to `tol_angle` radians.
pub fn rotation_number_with_tol(
    f: &MixedPolynomial,
    path: &SampledPath,
    tol_angle: f64,
) -> Result<i64, FiberError> {
    let values = values_of(f, &path.nodes)?;
    let first = values[0];
    let last = *values.last().expect("non-empty");
    let gap = (last / first).arg().abs();
    if gap > tol_angle || ((last.norm() - first.norm()) / first.norm()).abs() > tol_angle {
        return Err(FiberError::NotClosed { gap });
    }
    let mut total = 0.0;
    for (k, w) in values.windows(2).enumerate() {
        let inc = (w[1] / w[0]).arg();
        if inc.abs() >= PI * (1.0 - 1e-12) {
            return Err(FiberError::UnderSampled { index: k, increment: inc });
        }
        total += inc;
    }
    let turns = total / TAU;
    let m = turns.round();
    if (turns - m).abs() > 0.01 {
        return Err(FiberError::NonIntegral { turns });
    }
    Ok(m as i64)
}

/// [`rotation_number_with_tol`] at the default angle tolerance.
pub fn rotation_number(f: &MixedPolynomial, path: &SampledPath) -> Result<i64, FiberError> {
    rotation_number_with_tol(f, path, super::DEFAULT_TOL_ANGLE)
}

/// `h_{−ψ}(z)` for a point `z` of the tube over angle `base + ψ`; lands on the
/// fiber over `δ e^{i·base}`.
pub fn deform_node(
    f: &MixedPolynomial,
    z: &[Complex64],
    base_angle: f64,
    psi: f64,
    cfg: &FibrationConfig,
) -> Result<Vec<Complex64>, FiberError> {
    if psi == 0.0 {
        return Ok(z.to_vec());
    }
    let start = FiberPoint::new(f, z.to_vec(), Complex64::from_polar(cfg.delta, base_angle + psi))?;
    let end = flow_monodromy(f, &start, -psi, cfg)?;
    Ok(end.z)
}

/// `σ̂(t_k) = h_{−ψ(t_k)}(σ(t_k))`: pushes every node of a path in `∂E(r₀, δ)`
/// with zero total winding into the fiber through its first node.
pub fn deform_path_to_fiber(
    f: &MixedPolynomial,
    path: &SampledPath,
    cfg: &FibrationConfig,
) -> Result<SampledPath, FiberError> {
    cfg.validate()?;
    let values = values_of(f, &path.nodes)?;
    for (k, v) in values.iter().enumerate() {
        let gap = (v.norm() - cfg.delta).abs();
        if gap > cfg.tube_tol() {
            return Err(FiberError::OffTube { index: k, gap });
        }
    }
    let recomputed = SampledPath::from_nodes(f, path.nodes.clone())?;
    let psi_end = *recomputed.psi.last().expect("non-empty");
    let winding = (psi_end / TAU).round() as i64;
    if winding != 0 {
        return Err(FiberError::NonzeroWinding { winding });
    }
    let base = values[0].arg();
    let deformed: Vec<Result<Vec<Complex64>, FiberError>> = path
        .nodes
        .par_iter()
        .zip(&recomputed.psi)
        .map(|(z, &psi)| deform_node(f, z, base, psi, cfg))
        .collect();
    let nodes = deformed
        .into_iter()
        .enumerate()
        .map(|(node, r)| r.map_err(|e| FiberError::FlowFailed { node, source: Box::new(e) }))
        .collect::<Result<Vec<_>, _>>()?;
    SampledPath::from_nodes(f, nodes)
}

/// `ω`: the flow of `base` through total angle `−2πm`, one node per integrator
/// step, so that `f ∘ ω` winds `−m` times.
pub fn correcting_loop(
    f: &MixedPolynomial,
    base: &FiberPoint,
    m: i64,
    cfg: &FibrationConfig,
) -> Result<SampledPath, FiberError> {
    let traj = flow_trajectory(f, base, -TAU * m as f64, cfg)?;
    SampledPath::from_nodes(f, traj.into_iter().map(|p| p.z).collect())
}

/// Moves `z` onto `|f| = δ` keeping `arg f(z)` fixed, by Gauss–Newton toward
/// `δ f(z) / |f(z)|`.
pub fn project_to_tube(
    f: &MixedPolynomial,
    z: &[Complex64],
    cfg: &FibrationConfig,
) -> Result<FiberPoint, FiberError> {
    if z.len() != f.n() {
        return Err(PolyError::DimensionMismatch { expected: f.n(), got: z.len() }.into());
    }
    let v = f.eval_unchecked(z);
    if v.norm() <= f64::MIN_POSITIVE {
        return Err(FiberError::ZeroValue { index: 0 });
    }
    newton_to_target(f, z, Complex64::from_polar(cfg.delta, v.arg()), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{distance, find_fiber_point};
    use crate::mixedpoly::parse_mixed_expression;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn p(s: &str) -> MixedPolynomial {
        parse_mixed_expression(s).unwrap()
    }

    fn circle(n: usize, radius: f64, turns: f64, other: Complex64) -> Vec<Vec<Complex64>> {
        (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64;
                vec![Complex64::from_polar(radius, TAU * turns * t), other]
            })
            .collect()
    }

    #[test]
    fn constant_path_has_zero_rotation() {
        let f = p("z1").with_arity(2);
        let path = SampledPath::constant(&f, vec![c(0.1, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(rotation_number(&f, &path).unwrap(), 0);
    }

    #[test]
    fn identity_winding() {
        let f = p("z1").with_arity(2);
        let path = SampledPath::from_nodes(&f, circle(64, 1e-3, 1.0, c(0.0, 0.0))).unwrap();
        assert_eq!(rotation_number(&f, &path).unwrap(), 1);
    }

    #[test]
    fn square_winds_twice() {
        // Oracle: sum of principal increments of arg(z^2) along the sampled circle is 2·2π.
        let f = p("z1^2").with_arity(2);
        let nodes = circle(64, 1e-3f64.sqrt(), 1.0, c(0.2, 0.1));
        let oracle: f64 = nodes
            .windows(2)
            .map(|w| (w[1][0] * w[1][0] / (w[0][0] * w[0][0])).arg())
            .sum::<f64>()
            / TAU;
        assert!((oracle - 2.0).abs() < 1e-12);
        let path = SampledPath::from_nodes(&f, nodes).unwrap();
        assert_eq!(rotation_number(&f, &path).unwrap(), 2);
    }

    #[test]
    fn rotation_is_reparametrization_invariant() {
        let f = p("z1^3*zb2 + z2").with_arity(2);
        let coarse = SampledPath::from_nodes(&f, circle(200, 0.3, 1.0, c(0.1, 0.0))).unwrap();
        let fine = SampledPath::from_nodes(&f, circle(400, 0.3, 1.0, c(0.1, 0.0))).unwrap();
        assert_eq!(rotation_number(&f, &coarse).unwrap(), rotation_number(&f, &fine).unwrap());
    }

    #[test]
    fn open_and_undersampled_loops_rejected() {
        let f = p("z1").with_arity(2);
        let open = SampledPath::from_nodes(&f, circle(64, 1e-3, 0.5, c(0.0, 0.0))).unwrap();
        assert!(matches!(rotation_number(&f, &open), Err(FiberError::NotClosed { .. })));
        let coarse = SampledPath::from_nodes(&f, circle(2, 1e-3, 1.0, c(0.0, 0.0))).unwrap();
        assert!(matches!(rotation_number(&f, &coarse), Err(FiberError::UnderSampled { .. })));
    }

    #[test]
    fn path_in_fiber_is_unchanged() {
        let f = p("z1").with_arity(2);
        let cfg = FibrationConfig::default();
        let nodes: Vec<_> = (0..10).map(|k| vec![c(cfg.delta, 0.0), c(0.05 * k as f64, 0.0)]).collect();
        let path = SampledPath::from_nodes(&f, nodes).unwrap();
        assert_eq!(deform_path_to_fiber(&f, &path, &cfg).unwrap(), path);
    }

    #[test]
    fn linear_deformation_flattens_angle() {
        // σ(t) = (δ e^{iα(t)}, γ(t)) with α(0) = α(1) = 0 deforms to (δ, γ(t)).
        let f = p("z1").with_arity(2);
        let cfg = FibrationConfig::default();
        let nodes: Vec<_> = (0..=40)
            .map(|k| {
                let t = k as f64 / 40.0;
                let alpha = 2.5 * (PI * t).sin();
                vec![Complex64::from_polar(cfg.delta, alpha), c(0.3 * t, -0.2 * t)]
            })
            .collect();
        let path = SampledPath::from_nodes(&f, nodes.clone()).unwrap();
        let out = deform_path_to_fiber(&f, &path, &cfg).unwrap();
        for (a, b) in out.nodes.iter().zip(&nodes) {
            assert!((a[0] - c(cfg.delta, 0.0)).norm() < 1e-12);
            assert_eq!(a[1], b[1]);
        }
        assert!(out.angle_spread(&f).unwrap() < 1e-9);
    }

    #[test]
    fn deformation_rejects_winding_and_off_tube_paths() {
        let f = p("z1").with_arity(2);
        let cfg = FibrationConfig::default();
        let winding = SampledPath::from_nodes(&f, circle(64, cfg.delta, 1.0, c(0.0, 0.0))).unwrap();
        assert!(matches!(
            deform_path_to_fiber(&f, &winding, &cfg),
            Err(FiberError::NonzeroWinding { winding: 1 })
        ));
        let off = SampledPath::from_nodes(&f, circle(64, 2.0 * cfg.delta, 1.0, c(0.0, 0.0))).unwrap();
        assert!(matches!(deform_path_to_fiber(&f, &off, &cfg), Err(FiberError::OffTube { index: 0, .. })));
    }

    #[test]
    fn correcting_loop_examples() {
        let f = p("z1").with_arity(2);
        let cfg = FibrationConfig::default();
        let base = FiberPoint::new(&f, vec![c(cfg.delta, 0.0), c(0.2, 0.0)], c(cfg.delta, 0.0)).unwrap();
        let trivial = correcting_loop(&f, &base, 0, &cfg).unwrap();
        assert_eq!(trivial.nodes, vec![base.z.clone()]);
        let once = correcting_loop(&f, &base, 1, &cfg).unwrap();
        assert_eq!(rotation_number(&f, &once).unwrap(), -1);
        for (k, z) in once.nodes.iter().enumerate() {
            let t = k as f64 / (once.len() - 1) as f64;
            assert!((z[0] - Complex64::from_polar(cfg.delta, -TAU * t)).norm() < 1e-12);
            assert_eq!(z[1], c(0.2, 0.0));
        }
    }

    #[test]
    fn correcting_loop_cancels_winding() {
        let f = p("z1*z2");
        let cfg = FibrationConfig::default();
        let base = find_fiber_point(&f, c(cfg.delta, 0.0), &cfg, &[c(0.2, 0.1), c(0.1, -0.1)]).unwrap();
        for m in [1, 2] {
            let sigma = correcting_loop(&f, &base, -m, &cfg).unwrap();
            assert_eq!(rotation_number(&f, &sigma).unwrap(), m);
            // ω starts where σ ends: at h^{m}(base).
            let end = FiberPoint::new(&f, sigma.last().to_vec(), base.target).unwrap();
            let omega = correcting_loop(&f, &end, m, &cfg).unwrap();
            let joined = sigma.concat(&f, &omega).unwrap();
            assert_eq!(rotation_number(&f, &joined).unwrap(), 0);
            assert!(distance(joined.last(), &base.z) < 1e-6);
        }
    }

    #[test]
    fn path_json_shape() {
        let f = p("z1").with_arity(2);
        let path = SampledPath::from_nodes(&f, vec![vec![c(1.0, 2.0), c(3.0, 4.0)]]).unwrap();
        let s = serde_json::to_string(&path).unwrap();
        assert_eq!(s, r#"{"nodes":[[1.0,2.0,3.0,4.0]],"psi":[0.0]}"#);
    }
}
