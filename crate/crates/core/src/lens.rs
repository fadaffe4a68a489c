//! The Rhie lens family `φ_n(z) = z̄ − z^{n−2}/(z^{n−1} − a^{n−1}) − ε/z`
//! and a multi-start count of its zeros.
//!
//! For small ε the count is `5n − 5` from `n = 4` on; in the admissible
//! range `a < 1/2`, `ε < a/10` the family has only 3 zeros at `n = 2` and 6 at
//! `n = 3`, and [`LensSummary`] reports the mismatch rather than hiding it.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mixedpoly::{MixedPolynomial, MixedTerm};

pub const ROOT_TOL: f64 = 1e-8;
pub const DEFAULT_GRID: usize = 120;
pub const DEFAULT_DEDUP_RADIUS: f64 = 1e-6;
pub const DEFAULT_HALF_WIDTH: f64 = 2.0;
const NEWTON_ITERS: usize = 100;
/// Roots this close to `0` or to a root of `z^{n−1} = a^{n−1}` count as poles.
const POLE_RADIUS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LensError {
    #[error("invalid lens configuration: {0}")]
    InvalidConfig(String),
    #[error("no roots found; inconsistent with the expected 5n-5 count")]
    NoRoots,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LensConfig {
    pub n: u32,
    pub a: f64,
    pub epsilon: f64,
    /// Seeds per side of the search square.
    pub grid: usize,
    pub dedup_radius: f64,
    /// The square `|Re z|, |Im z| ≤ half_width` is searched.
    pub half_width: f64,
}

impl Default for LensConfig {
    fn default() -> Self {
        Self::for_n(2, 0.3)
    }
}

impl LensConfig {
    /// Defaults for `n`, with ε from [`default_epsilon`].
    pub fn for_n(n: u32, a: f64) -> Self {
        Self {
            n,
            a,
            epsilon: default_epsilon(n),
            grid: DEFAULT_GRID,
            dedup_radius: DEFAULT_DEDUP_RADIUS,
            half_width: DEFAULT_HALF_WIDTH,
        }
    }

    /// Requires `n ≥ 2`, `0 < a < 1/2` and `0 < ε < a/10`.
    pub fn validate(&self) -> Result<(), LensError> {
        let bad = |m: String| Err(LensError::InvalidConfig(m));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.a > 0.0 && self.a < 0.5) {
            return bad(format!("a must lie in (0, 1/2), got {}", self.a));
        }
        if !(self.epsilon > 0.0 && self.epsilon < self.a / 10.0) {
            return bad(format!("epsilon must lie in (0, a/10), got {}", self.epsilon));
        }
        if self.grid < 2 {
            return bad(format!("grid must be at least 2, got {}", self.grid));
        }
        if !(self.dedup_radius > 0.0 && self.half_width > 0.0) {
            return bad("dedup_radius and half_width must be positive".into());
        }
        Ok(())
    }

    pub fn expected_count(&self) -> usize {
        5 * self.n as usize - 5
    }
}

/// `10^{−n}`: 1e-2 for n = 2, 1e-3 for n = 3, 1e-4 for n = 4.
pub fn default_epsilon(n: u32) -> f64 {
    10f64.powi(-(n.max(2) as i32))
}

fn term(c: f64, nu: Vec<u32>, mu: Vec<u32>) -> MixedTerm {
    MixedTerm::new(Complex64::new(c, 0.0), nu, mu)
}

/// `z̄zⁿ − a^{n−1}z̄z − (1+ε)z^{n−1} + εa^{n−1}`, the numerator of `φ_n` over
/// `z(z^{n−1} − a^{n−1})`.
pub fn rhie_numerator(cfg: &LensConfig) -> Result<MixedPolynomial, LensError> {
    cfg.validate()?;
    let (n, an) = (cfg.n, cfg.a.powi(cfg.n as i32 - 1));
    Ok(MixedPolynomial::new(
        1,
        [
            term(1.0, vec![n], vec![1]),
            term(-an, vec![1], vec![1]),
            term(-(1.0 + cfg.epsilon), vec![n - 1], vec![0]),
            term(cfg.epsilon * an, vec![0], vec![0]),
        ],
    )
    .expect("exponent lengths are 1"))
}

/// The two-variable homogenization
/// `z̄zⁿ − a^{n−1}z̄zw^{n−1} − (1+ε)z^{n−1}ww̄ + εa^{n−1}wⁿw̄`, which restricts
/// to [`rhie_numerator`] at `w = 1`.
pub fn homogenize(cfg: &LensConfig) -> Result<MixedPolynomial, LensError> {
    cfg.validate()?;
    let (n, an) = (cfg.n, cfg.a.powi(cfg.n as i32 - 1));
    Ok(MixedPolynomial::new(
        2,
        [
            term(1.0, vec![n, 0], vec![1, 0]),
            term(-an, vec![1, n - 1], vec![1, 0]),
            term(-(1.0 + cfg.epsilon), vec![n - 1, 1], vec![0, 1]),
            term(cfg.epsilon * an, vec![0, n], vec![0, 1]),
        ],
    )
    .expect("exponent lengths are 2"))
}

/// `φ_n(z)` in its rational form.
pub fn phi(cfg: &LensConfig, z: Complex64) -> Complex64 {
    let n = cfg.n as i32;
    let an = cfg.a.powi(n - 1);
    z.conj() - z.powi(n - 2) / (z.powi(n - 1) - an) - cfg.epsilon / z
}

fn near_pole(cfg: &LensConfig, z: Complex64) -> bool {
    let an = cfg.a.powi(cfg.n as i32 - 1);
    z.norm() < POLE_RADIUS || (z.powi(cfg.n as i32 - 1) - an).norm() < POLE_RADIUS
}

/// Damped Newton on `(Re g, Im g) = 0` from `z0`, backtracking on `|g|`.
fn newton(g: &MixedPolynomial, z0: Complex64, limit: f64) -> Option<Complex64> {
    let mut z = z0;
    let (mut v, mut dz, mut dzb) = g.wirtinger_unchecked(&[z]);
    for _ in 0..NEWTON_ITERS {
        // Solve dz·h + dzb·h̄ = −v for h.
        let (a, b) = (dz[0], dzb[0]);
        let det = a.norm_sqr() - b.norm_sqr();
        if det.abs() < 1e-300 {
            return None;
        }
        let h = (-v * a.conj() + v.conj() * b) / det;
        let mut t = 1.0;
        loop {
            let cand = z + h * t;
            let (cv, cdz, cdzb) = g.wirtinger_unchecked(&[cand]);
            if cv.norm() < v.norm() || t < 1e-6 {
                let step = (h * t).norm();
                z = cand;
                (v, dz, dzb) = (cv, cdz, cdzb);
                if step <= 1e-15 * z.norm().max(1e-3) || v.norm() == 0.0 {
                    return Some(z);
                }
                break;
            }
            t *= 0.5;
        }
        if !z.re.is_finite() || z.norm() > limit {
            return None;
        }
    }
    Some(z)
}

/// Zeros of `φ_n` in the search square, found by damped Newton on the
/// numerator from a `grid × grid` lattice of seeds, sorted lexicographically
/// and deduplicated. Each returned root satisfies `|φ_n| < 1e−8`.
pub fn lens_roots(cfg: &LensConfig) -> Result<Vec<Complex64>, LensError> {
    let g = rhie_numerator(cfg)?;
    let w = cfg.half_width;
    let step = 2.0 * w / (cfg.grid - 1) as f64;
    let mut found: Vec<Complex64> = (0..cfg.grid * cfg.grid)
        .into_par_iter()
        .filter_map(|k| {
            let seed = Complex64::new(-w + step * (k / cfg.grid) as f64, -w + step * (k % cfg.grid) as f64);
            let z = newton(&g, seed, 4.0 * w)?;
            (!near_pole(cfg, z) && phi(cfg, z).norm() < ROOT_TOL).then_some(z)
        })
        .collect();
    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut roots: Vec<Complex64> = Vec::new();
    for z in found {
        if roots.iter().all(|r| (r - z).norm() >= cfg.dedup_radius) {
            roots.push(z);
        }
    }
    if roots.is_empty() {
        return Err(LensError::NoRoots);
    }
    Ok(roots)
}

/// The largest ε in `[lo, hi]` (to a relative width of `rel_tol`, bisecting
/// in log scale) at which the root count still equals `5n − 5`, assuming it
/// does at `lo`. `None` when the count at `lo` is already wrong.
pub fn epsilon_threshold(base: &LensConfig, lo: f64, hi: f64, rel_tol: f64) -> Result<Option<f64>, LensError> {
    let expected = base.expected_count();
    let ok = |eps: f64| -> Result<bool, LensError> {
        let cfg = LensConfig { epsilon: eps, ..base.clone() };
        match lens_roots(&cfg) {
            Ok(r) => Ok(r.len() == expected),
            Err(LensError::NoRoots) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if !ok(lo)? {
        return Ok(None);
    }
    if ok(hi)? {
        return Ok(Some(hi));
    }
    let (mut good, mut bad) = (lo, hi);
    while bad / good > 1.0 + rel_tol {
        let mid = (good * bad).sqrt();
        if ok(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Some(good))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LensSummary {
    pub n: u32,
    pub count: usize,
    pub expected: &'static str,
    #[serde(rename = "match")]
    pub matches: bool,
}

impl LensSummary {
    pub fn new(cfg: &LensConfig, roots: &[Complex64]) -> Self {
        Self { n: cfg.n, count: roots.len(), expected: "5n-5", matches: roots.len() == cfg.expected_count() }
    }
}

/// One row per root: `re,im,residual` with residual `|φ_n(root)|`.
pub fn write_roots_csv<W: Write>(out: W, cfg: &LensConfig, roots: &[Complex64]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["re", "im", "residual"])?;
    for z in roots {
        w.write_record([z.re.to_string(), z.im.to_string(), format!("{:e}", phi(cfg, *z).norm())])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixedpoly::parse_with_arity;

    fn cfg(n: u32) -> LensConfig {
        LensConfig::for_n(n, 0.3)
    }

    #[test]
    fn validation() {
        assert!(cfg(2).validate().is_ok());
        for bad in [
            LensConfig { n: 1, ..cfg(2) },
            LensConfig { a: 0.5, ..cfg(2) },
            LensConfig { epsilon: 0.03, ..cfg(2) },
            LensConfig { epsilon: 0.0, ..cfg(2) },
            LensConfig { grid: 1, ..cfg(2) },
        ] {
            assert!(matches!(bad.validate(), Err(LensError::InvalidConfig(_))), "{bad:?}");
        }
    }

    #[test]
    fn default_epsilons() {
        assert_eq!(default_epsilon(2), 1e-2);
        assert_eq!(default_epsilon(3), 1e-3);
        assert_eq!(default_epsilon(4), 1e-4);
    }

    #[test]
    fn numerator_for_n2() {
        let c = cfg(2);
        let g = rhie_numerator(&c).unwrap();
        let oracle = parse_with_arity("zb1*z1^2 - 0.3*zb1*z1 - 1.01*z1 + 0.003", 1).unwrap();
        assert_eq!(g.terms().len(), 4);
        for (t, o) in g.terms().iter().zip(oracle.terms()) {
            assert_eq!((&t.nu, &t.mu), (&o.nu, &o.mu));
            assert!((t.coeff - o.coeff).norm() < 1e-15);
        }
        let v = g.evaluate(&[Complex64::new(0.3, 0.0)]).unwrap();
        assert!((v - Complex64::new(-0.3, 0.0)).norm() < 1e-15);
        assert_eq!(g.max_radial_degree(), Some(3));
    }

    #[test]
    fn numerator_matches_rational_form() {
        for n in 2..=4 {
            let c = cfg(n);
            let g = rhie_numerator(&c).unwrap();
            let an = c.a.powi(n as i32 - 1);
            for z in [Complex64::new(0.7, -0.2), Complex64::new(-0.1, 0.05), Complex64::new(1.3, 1.1)] {
                let denom = z * (z.powi(n as i32 - 1) - an);
                let lhs = g.evaluate(&[z]).unwrap();
                assert!((lhs - phi(&c, z) * denom).norm() < 1e-13 * (1.0 + lhs.norm()));
            }
        }
    }

    #[test]
    fn homogenization_restricts_to_numerator() {
        let c = cfg(3);
        let h = homogenize(&c).unwrap();
        let g = rhie_numerator(&c).unwrap();
        let z = Complex64::new(0.4, -0.7);
        let hv = h.evaluate(&[z, Complex64::new(1.0, 0.0)]).unwrap();
        assert!((hv - g.evaluate(&[z]).unwrap()).norm() < 1e-14);
        assert!(h.terms().iter().all(|t| t.total_degree() == c.n + 1));
    }

    /// Counts from an independent oracle: the real-coefficient roots of the
    /// polynomial numerator of `z − R(R(z))`, `R(z) = z^{n−2}/(z^{n−1} − a^{n−1}) + ε/z`,
    /// filtered by `z̄ = R(z)`.
    const ORACLE_COUNTS: [(u32, f64, usize); 4] = [(2, 1e-2, 3), (3, 1e-3, 6), (4, 1e-4, 15), (5, 1e-5, 20)];

    #[test]
    fn counts_match_oracle_and_grid_doubling() {
        for (n, eps, expected) in ORACLE_COUNTS {
            let c = LensConfig { epsilon: eps, ..cfg(n) };
            let roots = lens_roots(&c).unwrap();
            assert_eq!(roots.len(), expected, "n = {n}");
            let fine = lens_roots(&LensConfig { grid: 2 * c.grid, ..c.clone() }).unwrap();
            assert_eq!(fine.len(), expected, "n = {n}, doubled grid");
            let wide = lens_roots(&LensConfig { grid: 2 * c.grid, half_width: 4.0, ..c.clone() }).unwrap();
            assert_eq!(wide.len(), expected, "n = {n}, widened square");
            for r in &roots {
                assert!(phi(&c, *r).norm() < ROOT_TOL);
                assert!(roots.iter().any(|s| (s - r.conj()).norm() < 1e-8));
            }
        }
    }

    #[test]
    fn real_roots_for_n2() {
        // x³ − a x² − (1+ε)x + εa = 0 on the real line.
        let c = cfg(2);
        let roots = lens_roots(&c).unwrap();
        for r in &roots {
            assert!(r.im.abs() < 1e-9);
            let x = r.re;
            assert!((x.powi(3) - 0.3 * x * x - 1.01 * x + 0.003).abs() < 1e-10);
        }
    }

    #[test]
    fn five_n_minus_five_from_n4() {
        for n in [4, 5] {
            let c = LensConfig { epsilon: 10f64.powi(-(n as i32)), ..cfg(n) };
            assert_eq!(lens_roots(&c).unwrap().len(), c.expected_count());
        }
    }

    #[test]
    fn threshold_bisection() {
        let c = LensConfig { grid: 60, ..cfg(4) };
        let t = epsilon_threshold(&c, 1e-6, 0.0299, 0.05).unwrap().unwrap();
        assert!(t >= 1e-4 && t <= 0.0299);
        let at = lens_roots(&LensConfig { epsilon: t, ..c.clone() }).unwrap();
        assert_eq!(at.len(), 15);
        assert_eq!(epsilon_threshold(&cfg(2), 1e-6, 0.0299, 0.05).unwrap(), None);
    }

    #[test]
    fn summary_json() {
        let c = cfg(4);
        let roots = lens_roots(&c).unwrap();
        let json = serde_json::to_string(&LensSummary::new(&c, &roots)).unwrap();
        assert_eq!(json, r#"{"n":4,"count":15,"expected":"5n-5","match":true}"#);
        let two = cfg(2);
        let short = lens_roots(&two).unwrap();
        let json = serde_json::to_string(&LensSummary::new(&two, &short)).unwrap();
        assert_eq!(json, r#"{"n":2,"count":3,"expected":"5n-5","match":false}"#);
        let mut buf = Vec::new();
        write_roots_csv(&mut buf, &c, &roots).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("re,im,residual\n"));
        assert_eq!(text.lines().count(), 16);
    }
}
