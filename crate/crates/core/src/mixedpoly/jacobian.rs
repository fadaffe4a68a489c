use num_complex::Complex64;

use super::MixedPolynomial;

/// Default threshold on the smallest singular value for regularity tests.
pub const DEFAULT_REGULARITY_TOL: f64 = 1e-8;

/// The 2 × 2n real Jacobian of `(Re f, Im f)`; columns are ordered
/// `x_1, y_1, …, x_n, y_n` with `z_j = x_j + i y_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealJacobian {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl RealJacobian {
    /// From the Wirtinger pair `a_j = ∂f/∂z_j`, `b_j = ∂f/∂z̄_j`:
    /// `∂f/∂x_j = a_j + b_j` and `∂f/∂y_j = i (a_j − b_j)`.
    pub fn from_wirtinger(dz: &[Complex64], dzb: &[Complex64]) -> Self {
        let mut re = Vec::with_capacity(2 * dz.len());
        let mut im = Vec::with_capacity(2 * dz.len());
        for (a, b) in dz.iter().zip(dzb) {
            let dx = a + b;
            let dy = Complex64::i() * (a - b);
            re.extend([dx.re, dy.re]);
            im.extend([dx.im, dy.im]);
        }
        Self { re, im }
    }

    pub fn cols(&self) -> usize {
        self.re.len()
    }

    /// Restriction to the columns of the listed (0-based) complex variables.
    pub fn select_variables(&self, vars: &[usize]) -> Self {
        let pick = |row: &[f64]| vars.iter().flat_map(|&j| [row[2 * j], row[2 * j + 1]]).collect();
        Self { re: pick(&self.re), im: pick(&self.im) }
    }

    /// All 2 × 2 minors `re_k im_l − re_l im_k`, `k < l`.
    pub fn minors(&self) -> Vec<f64> {
        let m = self.cols();
        let mut out = Vec::with_capacity(m * m.saturating_sub(1) / 2);
        for k in 0..m {
            for l in k + 1..m {
                out.push(self.re[k] * self.im[l] - self.re[l] * self.im[k]);
            }
        }
        out
    }

    /// `J Jᵀ` as `(g11, g12, g22)`.
    pub fn gram(&self) -> (f64, f64, f64) {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        (dot(&self.re, &self.re), dot(&self.re, &self.im), dot(&self.im, &self.im))
    }

    /// `det(J Jᵀ)` via Cauchy–Binet, which avoids the cancellation of `g11 g22 − g12²`.
    pub fn gram_det(&self) -> f64 {
        self.minors().iter().map(|m| m * m).sum()
    }

    pub fn singular_values(&self) -> (f64, f64) {
        let (g11, g12, g22) = self.gram();
        let tr = g11 + g22;
        let disc = ((g11 - g22).powi(2) + 4.0 * g12 * g12).sqrt();
        let lmax = 0.5 * (tr + disc);
        if lmax <= 0.0 {
            return (0.0, 0.0);
        }
        let lmin = self.gram_det() / lmax;
        (lmax.sqrt(), lmin.max(0.0).sqrt())
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.singular_values().1
    }

    /// `J · v`.
    pub fn apply(&self, v: &[f64]) -> [f64; 2] {
        let dot = |row: &[f64]| row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        [dot(&self.re), dot(&self.im)]
    }

    /// Minimal-norm solution `v = Jᵀ (J Jᵀ)⁻¹ b`; `None` when `J Jᵀ` is singular.
    pub fn min_norm_solve(&self, b: [f64; 2]) -> Option<Vec<f64>> {
        let (g11, g12, g22) = self.gram();
        let det = self.gram_det();
        if !(det > 0.0) || !det.is_finite() {
            return None;
        }
        let w0 = (g22 * b[0] - g12 * b[1]) / det;
        let w1 = (-g12 * b[0] + g11 * b[1]) / det;
        Some(self.re.iter().zip(&self.im).map(|(r, i)| r * w0 + i * w1).collect())
    }
}

/// True iff the smallest singular value of the real Jacobian at `z` exceeds `tol`.
/// A point of the wrong dimension is reported as not regular.
pub fn is_mixed_regular_point(f: &MixedPolynomial, z: &[Complex64], tol: f64) -> bool {
    f.wirtinger_jacobian(z)
        .map(|j| j.smallest_singular_value() > tol)
        .unwrap_or(false)
}

/// Packs complex coordinates into `(x_1, y_1, …)`.
pub(crate) fn to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub(crate) fn from_real(v: &[f64]) -> Vec<Complex64> {
    v.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}
