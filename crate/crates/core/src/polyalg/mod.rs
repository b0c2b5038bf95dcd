//! Sparse multivariate polynomials with exact differentiation and closed-form
//! integration over the unit ball and the unit sphere.

mod io;
pub mod moments;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{check_dim, Result};

pub use moments::{
    ball_moment, ball_volume, omega, radial_weight_integral, sphere_moment, weight_normalization,
    weighted_ball_moment,
};

/// Exponent vector `α ∈ ℕ^d` of a monomial `x^α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(entries: Vec<u32>) -> Self {
        Exponent(entries)
    }

    pub fn zero(dim: usize) -> Self {
        Exponent(vec![0; dim])
    }

    /// Unit exponent `e_i`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Exponent(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    fn sum(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}

/// All exponent vectors of total degree exactly `n` in `dim` variables, in
/// graded lexicographic order (the first variable varies slowest, largest
/// power first).
pub fn homogeneous_exponents(dim: usize, n: u32) -> Vec<Exponent> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Exponent>) {
        if prefix.len() + 1 == dim {
            prefix.push(left);
            out.push(Exponent(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(dim, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        return out;
    }
    rec(dim, n, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// A polynomial in `dim` real variables stored as a sparse map from exponent
/// vectors to coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    dim: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl MultiPoly {
    pub fn zero(dim: usize) -> Self {
        MultiPoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(Exponent::zero(dim), c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, 1.0)
    }

    /// The coordinate function `x_i` (zero-based `i`).
    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim, "variable index {i} out of range for dim {dim}");
        Self::monomial(Exponent::unit(dim, i), 1.0)
    }

    pub fn monomial(exp: Exponent, coef: f64) -> Self {
        let mut p = Self::zero(exp.dim());
        p.add_term(exp, coef);
        p
    }

    /// `‖x‖^2 = x_1^2 + … + x_d^2`.
    pub fn norm_squared(dim: usize) -> Self {
        let mut p = Self::zero(dim);
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = 2;
            p.add_term(Exponent(e), 1.0);
        }
        p
    }

    /// `1 - ‖x‖^2`.
    pub fn one_minus_norm_squared(dim: usize) -> Self {
        let mut p = -&Self::norm_squared(dim);
        p.add_term(Exponent::zero(dim), 1.0);
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Exponent, f64)>) -> Result<Self> {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            check_dim(dim, e.dim())?;
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|e| e.total() as usize).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn coefficient(&self, exp: &Exponent) -> f64 {
        self.terms.get(exp).copied().unwrap_or(0.0)
    }

    /// Adds `coef · x^exp`, pruning the entry if it cancels to zero.
    pub fn add_term(&mut self, exp: Exponent, coef: f64) {
        debug_assert_eq!(exp.dim(), self.dim);
        if coef == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                v.insert(coef);
            }
            Entry::Occupied(mut o) => {
                let s = *o.get() + coef;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &MultiPoly, c: f64) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        if c == 0.0 {
            return Ok(());
        }
        for (e, v) in other.terms() {
            self.add_term(e.clone(), c * v);
        }
        Ok(())
    }

    pub fn scale(&self, c: f64) -> MultiPoly {
        if c == 0.0 {
            return MultiPoly::zero(self.dim);
        }
        MultiPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn checked_add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        let mut out = self.clone();
        out.add_scaled(other, 1.0)?;
        Ok(out)
    }

    pub fn checked_sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        let mut out = self.clone();
        out.add_scaled(other, -1.0)?;
        Ok(out)
    }

    pub fn checked_mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        check_dim(self.dim, other.dim)?;
        let mut out = MultiPoly::zero(self.dim);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a.sum(b), ca * cb);
            }
        }
        Ok(out)
    }

    /// Value at `x` by direct term summation.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "point dimension must match the polynomial");
        self.terms()
            .map(|(e, c)| {
                e.as_slice()
                    .iter()
                    .zip(x)
                    .fold(c, |acc, (&k, &xi)| acc * xi.powi(k as i32))
            })
            .sum()
    }

    /// `∂p/∂x_i`.
    pub fn partial(&self, i: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(self.dim);
        for (e, c) in self.terms() {
            let k = e.0[i];
            if k > 0 {
                let mut f = e.clone();
                f.0[i] -= 1;
                out.add_term(f, c * k as f64);
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.dim).map(|i| self.partial(i)).collect()
    }

    pub fn laplacian(&self) -> MultiPoly {
        let mut out = MultiPoly::zero(self.dim);
        for (e, c) in self.terms() {
            for i in 0..self.dim {
                let k = e.0[i];
                if k > 1 {
                    let mut f = e.clone();
                    f.0[i] -= 2;
                    out.add_term(f, c * (k * (k - 1)) as f64);
                }
            }
        }
        out
    }

    /// Euler operator `⟨x, ∇⟩ p`, which scales each monomial by its degree.
    /// On the unit sphere this is the radial derivative `dp/dr`.
    pub fn euler(&self) -> MultiPoly {
        let mut out = MultiPoly::zero(self.dim);
        for (e, c) in self.terms() {
            out.add_term(e.clone(), c * e.total() as f64);
        }
        out
    }

    /// Homogeneous component of degree `n`.
    pub fn homogeneous_part(&self, n: usize) -> MultiPoly {
        MultiPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.total() as usize == n)
                .map(|(e, &c)| (e.clone(), c))
                .collect(),
        }
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coef(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coef_norm(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Drops coefficients with `|c| <= tol`.
    pub fn pruned(&self, tol: f64) -> MultiPoly {
        MultiPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(e, &c)| (e.clone(), c))
                .collect(),
        }
    }

    /// `∫_{S^{d-1}} p dω`.
    pub fn integrate_sphere(&self) -> f64 {
        omega(self.dim) * self.sphere_mean()
    }

    /// `∫_{B^d} p dx`.
    pub fn integrate_ball(&self) -> f64 {
        omega(self.dim) * self.ball_mean()
    }

    /// `(1/ω_d) ∫_{S^{d-1}} p dω`.
    pub fn sphere_mean(&self) -> f64 {
        let d = self.dim;
        self.terms()
            .map(|(e, c)| c * moments::sphere_mean_with(d, |i| e.0[i]))
            .sum()
    }

    /// `(1/ω_d) ∫_{B^d} p dx`.
    pub fn ball_mean(&self) -> f64 {
        self.weighted_ball_mean(0.0)
    }

    /// `(1/ω_d) ∫_{B^d} p (1-‖x‖^2)^μ dx`.
    pub fn weighted_ball_mean(&self, mu: f64) -> f64 {
        let d = self.dim;
        self.terms()
            .map(|(e, c)| {
                let s = moments::sphere_mean_with(d, |i| e.0[i]);
                if s == 0.0 {
                    0.0
                } else {
                    c * s * radial_weight_integral(e.total() as usize, d, mu)
                }
            })
            .sum()
    }

    /// Max coefficient difference relative to the larger coefficient scale.
    pub fn relative_distance(&self, other: &MultiPoly) -> f64 {
        let diff = self.checked_sub(other).expect("dimension mismatch in comparison");
        let scale = self.max_abs_coef().max(other.max_abs_coef()).max(f64::MIN_POSITIVE);
        diff.max_abs_coef() / scale
    }
}

/// `(1/ω_d) ∫_{S^{d-1}} p q dω` without forming the product.
pub fn sphere_pairing(p: &MultiPoly, q: &MultiPoly) -> f64 {
    assert_eq!(p.dim, q.dim);
    let d = p.dim;
    let mut s = 0.0;
    for (a, ca) in p.terms() {
        for (b, cb) in q.terms() {
            let m = moments::sphere_mean_with(d, |i| a.0[i] + b.0[i]);
            s += ca * cb * m;
        }
    }
    s
}

/// `(1/ω_d) ∫_{B^d} p q (1-‖x‖^2)^μ dx` without forming the product.
pub fn weighted_ball_pairing(p: &MultiPoly, q: &MultiPoly, mu: f64) -> f64 {
    assert_eq!(p.dim, q.dim);
    let d = p.dim;
    let mut s = 0.0;
    for (a, ca) in p.terms() {
        for (b, cb) in q.terms() {
            let m = moments::sphere_mean_with(d, |i| a.0[i] + b.0[i]);
            if m != 0.0 {
                let deg = (a.total() + b.total()) as usize;
                s += ca * cb * m * radial_weight_integral(deg, d, mu);
            }
        }
    }
    s
}

/// `(1/ω_d) ∫_{B^d} p q dx`.
pub fn ball_pairing(p: &MultiPoly, q: &MultiPoly) -> f64 {
    weighted_ball_pairing(p, q, 0.0)
}

/// `(1/ω_d) ∫_{B^d} ∇p · ∇q dx` from precomputed gradients.
pub fn gradient_pairing(gp: &[MultiPoly], gq: &[MultiPoly]) -> f64 {
    gp.iter().zip(gq).map(|(a, b)| ball_pairing(a, b)).sum()
}

pub fn add(p: &MultiPoly, q: &MultiPoly) -> Result<MultiPoly> {
    p.checked_add(q)
}

pub fn mul(p: &MultiPoly, q: &MultiPoly) -> Result<MultiPoly> {
    p.checked_mul(q)
}

pub fn eval(p: &MultiPoly, x: &[f64]) -> f64 {
    p.eval(x)
}

pub fn gradient(p: &MultiPoly) -> Vec<MultiPoly> {
    p.gradient()
}

pub fn laplacian(p: &MultiPoly) -> MultiPoly {
    p.laplacian()
}

pub fn integrate_sphere(p: &MultiPoly) -> f64 {
    p.integrate_sphere()
}

pub fn integrate_ball(p: &MultiPoly) -> f64 {
    p.integrate_ball()
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(-1.0)
    }
}

// The operator forms panic on a dimension mismatch; use the `checked_*`
// methods where the dimensions are not known to agree.
impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_add(rhs).expect("dimension mismatch in polynomial addition")
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_sub(rhs).expect("dimension mismatch in polynomial subtraction")
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_mul(rhs).expect("dimension mismatch in polynomial product")
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.0.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}
