//! Newton-support combinatorics and randomized checks of the hypotheses used
//! for connectivity: convenience, vanishing coordinate subspaces, face
//! functions, non-degeneracy of faces and uniform local tameness.
//!
//! Degrees are radial: a term `c z^ν z̄^μ` has weighted degree
//! `Σ p_i (ν_i + μ_i)` for a weight vector `P`.
//!
//! Non-degeneracy is only ever tested negatively. A [`Verdict::NoWitness`]
//! report says that a multi-start search did not find a mixed critical point
//! of the face function on the torus; it is not a certificate, and the search
//! does not distinguish strong from plain non-degeneracy.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_integer::Integer;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mixedpoly::{normalize_subset, MixedPolynomial, PolyError, RealJacobian};
use crate::rng::{log_uniform_complex, stream_rng, uniform_in_ball};

/// Largest `n` for which all `2ⁿ − 1` coordinate subspaces are enumerated.
pub const MAX_VARIABLES: usize = 12;
pub const DEFAULT_WEIGHT_BOUND: u32 = 5;
pub const DEFAULT_SEARCH_TOL: f64 = 1e-10;
pub const DEFAULT_TRIALS: usize = 1000;
/// Moduli of torus points searched for critical points lie in this range.
pub const TORUS_RANGE: (f64, f64) = (0.1, 10.0);
const MAX_WEIGHTS: u64 = 1_000_000;
const NEWTON_ITERS: usize = 80;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NewtonError {
    #[error("the zero polynomial has no Newton data")]
    ZeroPolynomial,
    #[error("{n} variables exceeds the limit of {MAX_VARIABLES} for subspace enumeration")]
    TooManyVariables { n: usize },
    #[error("weight vector must have a positive entry")]
    ZeroWeight,
    #[error("weight vector has length {got}, polynomial has {expected} variables")]
    WeightLength { expected: usize, got: usize },
    #[error("coordinate subspace {subset:?} is not a vanishing subspace")]
    NotVanishing { subset: Vec<usize> },
    #[error("weight enumeration would visit {count} vectors")]
    TooManyWeights { count: u64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Non-negative integer weights, not all zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct WeightVector(Vec<u32>);

impl WeightVector {
    pub fn new(p: Vec<u32>) -> Result<Self, NewtonError> {
        if p.iter().all(|&x| x == 0) {
            return Err(NewtonError::ZeroWeight);
        }
        Ok(Self(p))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `I(P) = {i : p_i = 0}`, 1-based.
    pub fn zero_set(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == 0)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn is_primitive(&self) -> bool {
        self.0.iter().fold(0u32, |g, &x| g.gcd(&x)) == 1
    }

    pub fn scaled(&self, k: u32) -> Self {
        Self(self.0.iter().map(|x| x * k).collect())
    }
}

impl TryFrom<Vec<u32>> for WeightVector {
    type Error = NewtonError;

    fn try_from(p: Vec<u32>) -> Result<Self, NewtonError> {
        Self::new(p)
    }
}

impl From<WeightVector> for Vec<u32> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonData {
    /// `{ν + μ}` over the terms of `f`.
    pub radial_support: BTreeSet<Vec<u32>>,
    pub convenient: bool,
    /// Every non-empty `I` (1-based, sorted) with `f^I ≡ 0`, in order of size then lexicographically.
    pub vanishing_subspaces: Vec<Vec<usize>>,
}

pub fn newton_data(f: &MixedPolynomial) -> Result<NewtonData, NewtonError> {
    if f.is_zero() {
        return Err(NewtonError::ZeroPolynomial);
    }
    let n = f.n();
    if n > MAX_VARIABLES {
        return Err(NewtonError::TooManyVariables { n });
    }
    let radial_support: BTreeSet<Vec<u32>> = f.terms().iter().map(|t| t.radial_exponent()).collect();
    let convenient = (0..n).all(|i| {
        radial_support
            .iter()
            .any(|v| v[i] > 0 && v.iter().enumerate().all(|(j, &e)| j == i || e == 0))
    });
    let mut vanishing_subspaces = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect();
        if f.vanishes_on_subspace(&subset)? {
            vanishing_subspaces.push(subset);
        }
    }
    vanishing_subspaces.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(NewtonData { radial_support, convenient, vanishing_subspaces })
}

/// `f_P`: the terms of minimal weighted radial degree.
pub fn face_function(f: &MixedPolynomial, p: &WeightVector) -> Result<MixedPolynomial, NewtonError> {
    if f.is_zero() {
        return Err(NewtonError::ZeroPolynomial);
    }
    if p.len() != f.n() {
        return Err(NewtonError::WeightLength { expected: f.n(), got: p.len() });
    }
    let w = p.as_slice();
    let dmin = f.terms().iter().map(|t| t.weighted_degree(w)).min().expect("nonzero polynomial");
    Ok(f.filter_terms(|t| t.weighted_degree(w) == dmin))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    WitnessFound,
    NoWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    pub face: WeightVector,
    pub verdict: Verdict,
    /// Full coordinate vector of the critical point, including fixed coordinates.
    pub witness: Option<Vec<Complex64>>,
    /// Scaled minor residual at the witness, or the best value seen when none was found.
    pub residual: f64,
    pub trials: usize,
    /// Variables (1-based) the face function was treated as a function of.
    #[serde(skip)]
    pub variables: Vec<usize>,
}

/// `‖2×2 minors‖ / max(1, ‖J‖²_F)`; zero exactly when `rank J < 2`.
pub fn critical_residual(j: &RealJacobian) -> f64 {
    let (g11, _, g22) = j.gram();
    j.gram_det().sqrt() / (g11 + g22).max(1.0)
}

/// Searches for a mixed critical point of `f_P` on the torus `(ℂ*)ⁿ` with
/// moduli in [`TORUS_RANGE`].
pub fn nondegeneracy_search(
    f: &MixedPolynomial,
    p: &WeightVector,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<DegeneracyReport, NewtonError> {
    let face = face_function(f, p)?;
    let free: Vec<usize> = (0..f.n()).collect();
    let search = CriticalSearch { g: &face, free: &free, fixed: &[], fixed_radius: 0.0 };
    Ok(search.run(p.clone(), trials, seed, tol))
}

/// Checks uniform local tameness along the vanishing subspace `ℂ^I`.
///
/// For each primitive weight vector with `I(P) = I` and entries at most
/// `weight_bound`, the face function `f_P` is searched for critical points as
/// a function of `{z_j : j ∉ I}` with `z_I ∈ (ℂ*)^I`, `Σ_{i∈I} |z_i|² ≤ ε`
/// resampled in every trial. Weight vectors sharing a face function are
/// searched once, under the lexicographically first of them.
pub fn tameness_search(
    f: &MixedPolynomial,
    subset: &[usize],
    epsilon: f64,
    weight_bound: u32,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<DegeneracyReport>, NewtonError> {
    let data = newton_data(f)?;
    let idx = normalize_subset(subset, f.n())?;
    if !data.vanishing_subspaces.contains(&idx) {
        return Err(NewtonError::NotVanishing { subset: idx });
    }
    let n = f.n();
    let fixed: Vec<usize> = idx.iter().map(|i| i - 1).collect();
    let free: Vec<usize> = (0..n).filter(|j| !fixed.contains(j)).collect();
    if free.is_empty() {
        // f ≡ 0 is excluded above, so I = {1..n} cannot vanish.
        return Ok(Vec::new());
    }
    let count = u64::from(weight_bound).saturating_pow(free.len() as u32);
    if count > MAX_WEIGHTS {
        return Err(NewtonError::TooManyWeights { count });
    }
    let mut faces: BTreeMap<String, (WeightVector, MixedPolynomial)> = BTreeMap::new();
    for w in weights_on(&free, n, weight_bound) {
        let face = face_function(f, &w)?;
        faces.entry(face.to_string()).or_insert((w, face));
    }
    let mut groups: Vec<(WeightVector, MixedPolynomial)> = faces.into_values().collect();
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    let radius = epsilon.max(0.0).sqrt();
    Ok(groups
        .iter()
        .enumerate()
        .map(|(k, (w, face))| {
            let search = CriticalSearch { g: face, free: &free, fixed: &fixed, fixed_radius: radius };
            search.run(w.clone(), trials, seed.wrapping_add(k as u64), tol)
        })
        .collect())
}

/// [`nondegeneracy_search`] over every distinct face function `f_P` with `P`
/// primitive and entries in `1..=weight_bound`, each face searched under the
/// lexicographically first weight producing it.
pub fn nondegeneracy_survey(
    f: &MixedPolynomial,
    weight_bound: u32,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<DegeneracyReport>, NewtonError> {
    if f.is_zero() {
        return Err(NewtonError::ZeroPolynomial);
    }
    if weight_bound == 0 {
        return Err(NewtonError::ZeroWeight);
    }
    let n = f.n();
    let count = u64::from(weight_bound).saturating_pow(n as u32);
    if count > MAX_WEIGHTS {
        return Err(NewtonError::TooManyWeights { count });
    }
    let free: Vec<usize> = (0..n).collect();
    let mut faces: BTreeMap<String, WeightVector> = BTreeMap::new();
    for w in weights_on(&free, n, weight_bound) {
        let key = face_function(f, &w)?.to_string();
        faces.entry(key).or_insert(w);
    }
    let mut weights: Vec<WeightVector> = faces.into_values().collect();
    weights.sort();
    weights
        .iter()
        .enumerate()
        .map(|(k, w)| nondegeneracy_search(f, w, trials, seed.wrapping_add(k as u64), tol))
        .collect()
}

/// Primitive weight vectors with entries in `1..=bound` on `free` and zero elsewhere.
fn weights_on(free: &[usize], n: usize, bound: u32) -> Vec<WeightVector> {
    let mut out = Vec::new();
    let mut digits = vec![1u32; free.len()];
    loop {
        let mut p = vec![0u32; n];
        for (&j, &d) in free.iter().zip(&digits) {
            p[j] = d;
        }
        let w = WeightVector(p);
        if w.is_primitive() {
            out.push(w);
        }
        let mut k = 0;
        loop {
            if k == digits.len() {
                return out;
            }
            if digits[k] < bound {
                digits[k] += 1;
                break;
            }
            digits[k] = 1;
            k += 1;
        }
    }
}

struct CriticalSearch<'a> {
    g: &'a MixedPolynomial,
    /// 0-based free variables.
    free: &'a [usize],
    /// 0-based variables held fixed within a trial.
    fixed: &'a [usize],
    fixed_radius: f64,
}

struct TrialOutcome {
    point: Vec<Complex64>,
    residual: f64,
}

impl CriticalSearch<'_> {
    fn run(&self, face: WeightVector, trials: usize, seed: u64, tol: f64) -> DegeneracyReport {
        let outcomes: Vec<TrialOutcome> =
            (0..trials).into_par_iter().map(|k| self.trial(seed, k as u64)).collect();
        let mut best = f64::INFINITY;
        for (k, o) in outcomes.iter().enumerate() {
            if o.residual < tol {
                return DegeneracyReport {
                    face,
                    verdict: Verdict::WitnessFound,
                    witness: Some(o.point.clone()),
                    residual: o.residual,
                    trials: k + 1,
                    variables: self.free.iter().map(|j| j + 1).collect(),
                };
            }
            best = best.min(o.residual);
        }
        DegeneracyReport {
            face,
            verdict: Verdict::NoWitness,
            witness: None,
            residual: best,
            trials,
            variables: self.free.iter().map(|j| j + 1).collect(),
        }
    }

    fn trial(&self, seed: u64, k: u64) -> TrialOutcome {
        let mut rng = stream_rng(seed, k);
        let n = self.g.n();
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        if !self.fixed.is_empty() {
            let zi = loop {
                let s = uniform_in_ball(&mut rng, self.fixed.len(), self.fixed_radius);
                if s.iter().all(|c| c.norm() > 0.0) {
                    break s;
                }
            };
            for (&i, v) in self.fixed.iter().zip(zi) {
                z[i] = v;
            }
        }
        for &j in self.free {
            z[j] = log_uniform_complex(&mut rng, TORUS_RANGE.0, TORUS_RANGE.1);
        }
        let jac = self.jacobian(&z);
        let mut t = least_direction(&jac) + rng.gen_range(-1e-3..1e-3);
        let (lo, hi) = (TORUS_RANGE.0 * 0.5, TORUS_RANGE.1 * 2.0);
        let mut g = self.system(&z, t);
        let mut gn = norm(&g);
        // Best iterate on the torus; trials whose iterates drift off it still
        // report how close they came.
        let mut best = TrialOutcome { residual: critical_residual(&jac), point: z.clone() };
        for _ in 0..NEWTON_ITERS {
            if gn == 0.0 {
                break;
            }
            let a = self.system_jacobian(&z, t);
            let Ok(pinv) = a.pseudo_inverse(1e-14) else { break };
            let step = -(pinv * DVector::from_vec(g.clone()));
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let (zc, tc) = self.displace(&z, t, &step, alpha);
                let gc = self.system(&zc, tc);
                let gcn = norm(&gc);
                if gcn.is_finite() && gcn < gn {
                    z = zc;
                    t = tc;
                    g = gc;
                    gn = gcn;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted || self.free.iter().any(|&j| !(lo..=hi).contains(&z[j].norm())) {
                break;
            }
            if self.on_torus(&z) {
                let residual = critical_residual(&self.jacobian(&z));
                if residual < best.residual {
                    best = TrialOutcome { residual, point: z.clone() };
                }
            }
        }
        best
    }

    fn on_torus(&self, z: &[Complex64]) -> bool {
        self.free.iter().all(|&j| (TORUS_RANGE.0..=TORUS_RANGE.1).contains(&z[j].norm()))
    }

    fn jacobian(&self, z: &[Complex64]) -> RealJacobian {
        let (_, dz, dzb) = self.g.wirtinger_unchecked(z);
        RealJacobian::from_wirtinger(&dz, &dzb).select_variables(self.free)
    }

    /// `cos t ∇Re f + sin t ∇Im f` over the free real coordinates; zero iff
    /// the free Jacobian has a left null vector `(cos t, sin t)`.
    fn system(&self, z: &[Complex64], t: f64) -> Vec<f64> {
        let j = self.jacobian(z);
        let (c, s) = (t.cos(), t.sin());
        j.re.iter().zip(&j.im).map(|(r, i)| c * r + s * i).collect()
    }

    fn system_jacobian(&self, z: &[Complex64], t: f64) -> DMatrix<f64> {
        let m = 2 * self.free.len();
        let mut a = DMatrix::zeros(m, m + 1);
        for (col, (j, part)) in self.free.iter().flat_map(|&j| [(j, 0), (j, 1)]).enumerate() {
            let x = if part == 0 { z[j].re } else { z[j].im };
            let h = 1e-6 * x.abs().max(1.0);
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            let d = if part == 0 { Complex64::new(h, 0.0) } else { Complex64::new(0.0, h) };
            zp[j] += d;
            zm[j] -= d;
            let gp = self.system(&zp, t);
            let gm = self.system(&zm, t);
            for r in 0..m {
                a[(r, col)] = (gp[r] - gm[r]) / (2.0 * h);
            }
        }
        let jac = self.jacobian(z);
        let (c, s) = (t.cos(), t.sin());
        for r in 0..m {
            a[(r, m)] = -s * jac.re[r] + c * jac.im[r];
        }
        a
    }

    fn displace(&self, z: &[Complex64], t: f64, step: &DVector<f64>, alpha: f64) -> (Vec<Complex64>, f64) {
        let mut out = z.to_vec();
        for (k, &j) in self.free.iter().enumerate() {
            out[j] += Complex64::new(alpha * step[2 * k], alpha * step[2 * k + 1]);
        }
        (out, t + alpha * step[2 * self.free.len()])
    }
}

/// Angle of the left singular direction of `J` with the smallest singular value.
fn least_direction(j: &RealJacobian) -> f64 {
    let (g11, g12, g22) = j.gram();
    0.5 * (2.0 * g12).atan2(g11 - g22) + std::f64::consts::FRAC_PI_2
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
