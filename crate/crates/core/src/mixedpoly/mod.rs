//! Mixed polynomials `f(z, z̄) = Σ c_{ν,μ} z^ν z̄^μ` in `n` complex variables.
//!
//! A [`MixedPolynomial`] is always kept in canonical merged form: terms are
//! sorted lexicographically on `(ν, μ)`, no exponent pair appears twice and no
//! stored coefficient is zero. The zero polynomial is the empty term list.

pub(crate) mod jacobian;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use jacobian::{is_mixed_regular_point, RealJacobian, DEFAULT_REGULARITY_TOL};
pub use parse::{parse_mixed_expression, parse_with_arity, ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("term exponent vectors have length {got}, expected {expected}")]
    ExponentLength { expected: usize, got: usize },
    #[error("coordinate subset must be non-empty")]
    EmptySubset,
    #[error("coordinate index {index} outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
}

/// One monomial `coeff · z^nu · z̄^mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTerm {
    pub coeff: Complex64,
    pub nu: Vec<u32>,
    pub mu: Vec<u32>,
}

impl MixedTerm {
    pub fn new(coeff: Complex64, nu: Vec<u32>, mu: Vec<u32>) -> Self {
        Self { coeff, nu, mu }
    }

    /// Componentwise `ν + μ`.
    pub fn radial_exponent(&self) -> Vec<u32> {
        self.nu.iter().zip(&self.mu).map(|(a, b)| a + b).collect()
    }

    pub fn total_degree(&self) -> u32 {
        self.nu.iter().chain(&self.mu).sum()
    }

    /// Weighted radial degree `Σ p_i (ν_i + μ_i)`.
    pub fn weighted_degree(&self, weights: &[u32]) -> u64 {
        self.nu
            .iter()
            .zip(&self.mu)
            .zip(weights)
            .map(|((a, b), p)| u64::from(*p) * u64::from(a + b))
            .sum()
    }

    fn is_supported_on(&self, mask: &[bool]) -> bool {
        self.nu
            .iter()
            .zip(&self.mu)
            .zip(mask)
            .all(|((a, b), keep)| *keep || (*a == 0 && *b == 0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct MixedPolynomial {
    n: usize,
    terms: Vec<MixedTerm>,
}

impl MixedPolynomial {
    /// Builds the canonical form of `Σ terms`, merging equal exponent pairs
    /// and dropping exact zeros.
    pub fn new(n: usize, terms: impl IntoIterator<Item = MixedTerm>) -> Result<Self, PolyError> {
        let mut merged: BTreeMap<(Vec<u32>, Vec<u32>), Complex64> = BTreeMap::new();
        for t in terms {
            if t.nu.len() != n || t.mu.len() != n {
                return Err(PolyError::ExponentLength {
                    expected: n,
                    got: t.nu.len().max(t.mu.len()),
                });
            }
            *merged.entry((t.nu, t.mu)).or_default() += t.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|((nu, mu), coeff)| MixedTerm { coeff, nu, mu })
            .collect();
        Ok(Self { n, terms })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self::new(n, [MixedTerm::new(c, vec![0; n], vec![0; n])]).expect("consistent exponent lengths")
    }

    /// The monomial `z_j` (0-based `j`).
    pub fn variable(n: usize, j: usize) -> Self {
        Self::monomial(n, j, false)
    }

    /// The monomial `z̄_j` (0-based `j`).
    pub fn conj_variable(n: usize, j: usize) -> Self {
        Self::monomial(n, j, true)
    }

    fn monomial(n: usize, j: usize, conj: bool) -> Self {
        assert!(j < n, "variable index {j} out of range for n = {n}");
        let mut e = vec![0; n];
        e[j] = 1;
        let (nu, mu) = if conj { (vec![0; n], e) } else { (e, vec![0; n]) };
        Self { n, terms: vec![MixedTerm::new(Complex64::new(1.0, 0.0), nu, mu)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[MixedTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no term involves a conjugate variable.
    pub fn is_holomorphic(&self) -> bool {
        self.terms.iter().all(|t| t.mu.iter().all(|&e| e == 0))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.total_degree() == 0)
    }

    /// Smallest total degree `|ν| + |μ|` among terms; `None` for zero.
    pub fn min_radial_degree(&self) -> Option<u32> {
        self.terms.iter().map(MixedTerm::total_degree).min()
    }

    pub fn max_radial_degree(&self) -> Option<u32> {
        self.terms.iter().map(MixedTerm::total_degree).max()
    }

    /// Term-wise conjugate: swaps `ν ↔ μ` and conjugates every coefficient.
    pub fn conjugate(&self) -> Self {
        Self::new(
            self.n,
            self.terms
                .iter()
                .map(|t| MixedTerm::new(t.coeff.conj(), t.mu.clone(), t.nu.clone())),
        )
        .expect("conjugation preserves exponent lengths")
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(
            self.n,
            self.terms
                .iter()
                .map(|t| MixedTerm::new(t.coeff * c, t.nu.clone(), t.mu.clone())),
        )
        .expect("scaling preserves exponent lengths")
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.n, Complex64::new(1.0, 0.0));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Re-embeds the polynomial in `new_n ≥ n` variables (new variables unused).
    pub fn with_arity(&self, new_n: usize) -> Self {
        assert!(new_n >= self.n, "cannot shrink arity from {} to {new_n}", self.n);
        let pad = |v: &Vec<u32>| {
            let mut v = v.clone();
            v.resize(new_n, 0);
            v
        };
        Self {
            n: new_n,
            terms: self
                .terms
                .iter()
                .map(|t| MixedTerm::new(t.coeff, pad(&t.nu), pad(&t.mu)))
                .collect(),
        }
    }

    fn check_dim(&self, z: &[Complex64]) -> Result<(), PolyError> {
        if z.len() == self.n {
            Ok(())
        } else {
            Err(PolyError::DimensionMismatch { expected: self.n, got: z.len() })
        }
    }

    /// `Σ c_{ν,μ} z^ν z̄^μ`.
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64, PolyError> {
        self.check_dim(z)?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[Complex64]) -> Complex64 {
        let zb: Vec<Complex64> = z.iter().map(|c| c.conj()).collect();
        self.terms
            .iter()
            .map(|t| {
                let mut v = t.coeff;
                for j in 0..self.n {
                    if t.nu[j] > 0 {
                        v *= z[j].powu(t.nu[j]);
                    }
                    if t.mu[j] > 0 {
                        v *= zb[j].powu(t.mu[j]);
                    }
                }
                v
            })
            .sum()
    }

    /// Value together with the Wirtinger derivative vectors
    /// `(∂f/∂z_j)_j` and `(∂f/∂z̄_j)_j`.
    pub fn eval_with_wirtinger(
        &self,
        z: &[Complex64],
    ) -> Result<(Complex64, Vec<Complex64>, Vec<Complex64>), PolyError> {
        self.check_dim(z)?;
        Ok(self.wirtinger_unchecked(z))
    }

    pub(crate) fn wirtinger_unchecked(
        &self,
        z: &[Complex64],
    ) -> (Complex64, Vec<Complex64>, Vec<Complex64>) {
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        let mut value = zero;
        let mut dz = vec![zero; n];
        let mut dzb = vec![zero; n];
        let zb: Vec<Complex64> = z.iter().map(|c| c.conj()).collect();
        let mut factors = vec![zero; 2 * n];
        for t in &self.terms {
            for j in 0..n {
                factors[2 * j] = z[j].powu(t.nu[j]);
                factors[2 * j + 1] = zb[j].powu(t.mu[j]);
            }
            value += t.coeff * factors.iter().product::<Complex64>();
            for j in 0..n {
                let others = |skip: usize| -> Complex64 {
                    factors
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != skip)
                        .map(|(_, f)| *f)
                        .product()
                };
                if t.nu[j] > 0 {
                    let d = f64::from(t.nu[j]) * z[j].powu(t.nu[j] - 1);
                    dz[j] += t.coeff * d * others(2 * j);
                }
                if t.mu[j] > 0 {
                    let d = f64::from(t.mu[j]) * zb[j].powu(t.mu[j] - 1);
                    dzb[j] += t.coeff * d * others(2 * j + 1);
                }
            }
        }
        (value, dz, dzb)
    }

    /// Real Jacobian of `(Re f, Im f)` in the coordinates `(x_1, y_1, …, x_n, y_n)`.
    pub fn wirtinger_jacobian(&self, z: &[Complex64]) -> Result<RealJacobian, PolyError> {
        let (_, dz, dzb) = self.eval_with_wirtinger(z)?;
        Ok(RealJacobian::from_wirtinger(&dz, &dzb))
    }

    /// `f^I`: substitutes `z_j = 0` for `j ∉ I` and renumbers the surviving
    /// variables in the order of `subset` (1-based indices, sorted, deduplicated).
    pub fn restrict_to_subspace(&self, subset: &[usize]) -> Result<Self, PolyError> {
        let idx = normalize_subset(subset, self.n)?;
        let mask = subset_mask(&idx, self.n);
        let terms = self.terms.iter().filter(|t| t.is_supported_on(&mask)).map(|t| {
            MixedTerm::new(
                t.coeff,
                idx.iter().map(|&i| t.nu[i - 1]).collect(),
                idx.iter().map(|&i| t.mu[i - 1]).collect(),
            )
        });
        Self::new(idx.len(), terms)
    }

    /// True when `f^I ≡ 0`, i.e. no term is supported on the coordinates in `subset`.
    pub fn vanishes_on_subspace(&self, subset: &[usize]) -> Result<bool, PolyError> {
        let idx = normalize_subset(subset, self.n)?;
        let mask = subset_mask(&idx, self.n);
        Ok(!self.terms.iter().any(|t| t.is_supported_on(&mask)))
    }

    /// Terms for which `keep` returns true, in canonical order.
    pub(crate) fn filter_terms(&self, keep: impl Fn(&MixedTerm) -> bool) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }
}

/// Sorted, deduplicated 1-based subset; errors on empty input or out-of-range indices.
pub(crate) fn normalize_subset(subset: &[usize], n: usize) -> Result<Vec<usize>, PolyError> {
    if subset.is_empty() {
        return Err(PolyError::EmptySubset);
    }
    let mut idx = subset.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if let Some(&bad) = idx.iter().find(|&&i| i == 0 || i > n) {
        return Err(PolyError::IndexOutOfRange { index: bad, n });
    }
    Ok(idx)
}

pub(crate) fn subset_mask(idx: &[usize], n: usize) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &i in idx {
        mask[i - 1] = true;
    }
    mask
}

impl Add for &MixedPolynomial {
    type Output = MixedPolynomial;

    fn add(self, rhs: &MixedPolynomial) -> MixedPolynomial {
        let n = self.n.max(rhs.n);
        let (a, b) = (self.with_arity(n), rhs.with_arity(n));
        MixedPolynomial::new(n, a.terms.into_iter().chain(b.terms)).expect("common arity")
    }
}

impl Neg for &MixedPolynomial {
    type Output = MixedPolynomial;

    fn neg(self) -> MixedPolynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &MixedPolynomial {
    type Output = MixedPolynomial;

    fn sub(self, rhs: &MixedPolynomial) -> MixedPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &MixedPolynomial {
    type Output = MixedPolynomial;

    fn mul(self, rhs: &MixedPolynomial) -> MixedPolynomial {
        let n = self.n.max(rhs.n);
        let (a, b) = (self.with_arity(n), rhs.with_arity(n));
        let terms = a.terms.iter().flat_map(|s| {
            b.terms.iter().map(move |t| {
                MixedTerm::new(
                    s.coeff * t.coeff,
                    s.nu.iter().zip(&t.nu).map(|(x, y)| x + y).collect(),
                    s.mu.iter().zip(&t.mu).map(|(x, y)| x + y).collect(),
                )
            })
        });
        MixedPolynomial::new(n, terms).expect("common arity")
    }
}

fn fmt_coeff(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    write!(f, "({}{}{}i)", c.re, sign, c.im.abs())
}

/// Prints in the expression grammar accepted by [`parse_mixed_expression`];
/// `parse_with_arity(&f.to_string(), f.n())` reproduces `f` exactly.
impl fmt::Display for MixedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            fmt_coeff(t.coeff, f)?;
            for (prefix, exps) in [("z", &t.nu), ("zb", &t.mu)] {
                for (j, &e) in exps.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => write!(f, "*{prefix}{}", j + 1)?,
                        _ => write!(f, "*{prefix}{}^{e}", j + 1)?,
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    re: f64,
    im: f64,
    nu: Vec<u32>,
    mu: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    n: usize,
    terms: Vec<TermJson>,
}

impl TryFrom<PolyJson> for MixedPolynomial {
    type Error = PolyError;

    fn try_from(j: PolyJson) -> Result<Self, PolyError> {
        MixedPolynomial::new(
            j.n,
            j.terms
                .into_iter()
                .map(|t| MixedTerm::new(Complex64::new(t.re, t.im), t.nu, t.mu)),
        )
    }
}

impl From<MixedPolynomial> for PolyJson {
    fn from(p: MixedPolynomial) -> Self {
        PolyJson {
            n: p.n,
            terms: p
                .terms
                .into_iter()
                .map(|t| TermJson { re: t.coeff.re, im: t.coeff.im, nu: t.nu, mu: t.mu })
                .collect(),
        }
    }
}
