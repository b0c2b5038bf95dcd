//! Separable bases of the ball: the classical `W_μ` family, the Sobolev
//! families `U` (inner product I), `V` (inner product II), `Q` (the Δ inner
//! product), and the spherical-harmonic basis of the sphere inner product.
//!
//! Every element has the shape `[1-‖x‖²] q(2‖x‖²-1) Y(x)` with `Y` harmonic.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::harmonics::{dim_harmonic, dim_homogeneous, harmonic_basis};
use crate::onevar::{jacobi_coeffs, qk_coeffs, JacobiParams, Poly1};
use crate::polyalg::moments::{gamma_fn, radial_weight_integral};
use crate::polyalg::MultiPoly;

/// Which inner product a basis belongs to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    I,
    II,
    S,
    Delta,
    Wmu(f64),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::I => "I",
            Family::II => "II",
            Family::S => "S",
            Family::Delta => "Delta",
            Family::Wmu(_) => "Wmu",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OuterFactor {
    None,
    OneMinusR2,
}

/// `aλ + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineNorm {
    pub lambda_coef: f64,
    pub constant: f64,
}

impl AffineNorm {
    pub fn new(lambda_coef: f64, constant: f64) -> Self {
        AffineNorm { lambda_coef, constant }
    }

    pub fn at(&self, lambda: f64) -> f64 {
        self.lambda_coef * lambda + self.constant
    }
}

/// `[outer] · radial(2‖x‖²-1) · harmonic(x)`.
#[derive(Clone, Debug)]
pub struct SeparableForm {
    pub d: usize,
    pub n: usize,
    pub j: usize,
    /// 1-based index into the harmonic basis of degree `n - 2j`.
    pub nu: usize,
    pub radial: Poly1,
    pub harmonic: MultiPoly,
    pub outer: OuterFactor,
}

impl SeparableForm {
    pub fn to_poly(&self) -> MultiPoly {
        let mut p = &radial_multipoly(&self.radial, self.d) * &self.harmonic;
        if self.outer == OuterFactor::OneMinusR2 {
            p = &p * &MultiPoly::one_minus_norm_squared(self.d);
        }
        p
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let outer = match self.outer {
            OuterFactor::None => 1.0,
            OuterFactor::OneMinusR2 => 1.0 - r2,
        };
        outer * self.radial.eval(2.0 * r2 - 1.0) * self.harmonic.eval(x)
    }
}

/// `q(2‖x‖²-1)` as a polynomial in `d` variables.
pub fn radial_multipoly(q: &Poly1, d: usize) -> MultiPoly {
    let s = &MultiPoly::norm_squared(d).scale(2.0) - &MultiPoly::one(d);
    let mut out = MultiPoly::zero(d);
    for &c in q.coeffs().iter().rev() {
        out = &(&out * &s) + &MultiPoly::constant(d, c);
    }
    out
}

#[derive(Clone, Debug)]
pub struct BasisElement {
    pub family: Family,
    pub n: usize,
    pub j: usize,
    pub nu: usize,
    pub form: SeparableForm,
    /// Expanded form of `form`.
    pub poly: MultiPoly,
    pub closed_norm: AffineNorm,
}

impl BasisElement {
    fn new(family: Family, form: SeparableForm, closed_norm: AffineNorm) -> Self {
        let poly = form.to_poly();
        BasisElement { family, n: form.n, j: form.j, nu: form.nu, form, poly, closed_norm }
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "family": self.family.name(),
            "n": self.n,
            "j": self.j,
            "nu": self.nu,
            "closed_norm": [self.closed_norm.lambda_coef, self.closed_norm.constant],
            "poly": self.poly.to_json_value(),
        })
    }
}

fn beta0(d: usize) -> f64 {
    (d as f64 - 2.0) / 2.0
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {d}")));
    }
    Ok(())
}

/// Elements `radial_j · Y_ν^{n-2j}` for `j` in `js`, in `(j, ν)` order.
fn separable_family(
    family: Family,
    n: usize,
    d: usize,
    js: impl Iterator<Item = usize>,
    mut radial: impl FnMut(usize) -> Result<(Poly1, OuterFactor, AffineNorm)>,
) -> Result<Vec<BasisElement>> {
    let mut out = Vec::new();
    for j in js {
        let (q, outer, norm) = radial(j)?;
        let hb = harmonic_basis(n - 2 * j, d)?;
        for (i, y) in hb.elements.iter().enumerate() {
            let form = SeparableForm { d, n, j, nu: i + 1, radial: q.clone(), harmonic: y.clone(), outer };
            out.push(BasisElement::new(family, form, norm));
        }
    }
    Ok(out)
}

/// `c_μ ∫_B [P_j^{(μ,β)}(2‖x‖²-1) Y]² W_μ dx` with `β = n-2j+(d-2)/2` and
/// `c_μ` normalising the weight to unit mass.
pub fn wmu_norm(n: usize, j: usize, d: usize, mu: f64) -> f64 {
    let b = (n - 2 * j) as f64 + beta0(d);
    let jf = j as f64;
    let ratio = gamma_fn(jf + mu + 1.0) * gamma_fn(jf + b + 1.0) / (gamma_fn(jf + mu + b + 1.0) * gamma_fn(jf + 1.0));
    ratio / ((2.0 * jf + mu + b + 1.0) * 2.0 * radial_weight_integral(0, d, mu))
}

/// `P_{j,ν}^n(W_μ; x) = P_j^{(μ, n-2j+(d-2)/2)}(2‖x‖²-1) Y_ν^{n-2j}(x)`.
pub fn wmu_basis(n: usize, d: usize, mu: f64) -> Result<Vec<BasisElement>> {
    check_d(d)?;
    if !(mu > -1.0) {
        return Err(Error::InvalidParameter(format!("mu must exceed -1, got {mu}")));
    }
    separable_family(Family::Wmu(mu), n, d, 0..=n / 2, |j| {
        let b = (n - 2 * j) as f64 + beta0(d);
        let q = jacobi_coeffs(j, JacobiParams::new(mu, b))?;
        Ok((q, OuterFactor::None, AffineNorm::new(0.0, wmu_norm(n, j, d, mu))))
    })
}

/// `U_{0,ν}^n = Y_ν^n`, `U_{j,ν}^n = (1-‖x‖²) P_{j-1}^{(1,β)}(2‖x‖²-1) Y_ν^{n-2j}`.
pub fn basis_i(n: usize, d: usize) -> Result<Vec<BasisElement>> {
    check_d(d)?;
    separable_family(Family::I, n, d, 0..=n / 2, |j| u_radial(n, j, d))
}

fn u_radial(n: usize, j: usize, d: usize) -> Result<(Poly1, OuterFactor, AffineNorm)> {
    if j == 0 {
        return Ok((Poly1::constant(1.0), OuterFactor::None, AffineNorm::new(n as f64, 1.0)));
    }
    let b = (n - 2 * j) as f64 + beta0(d);
    let q = jacobi_coeffs(j - 1, JacobiParams::new(1.0, b))?;
    let norm = 2.0 * (j * j) as f64 / (n as f64 + beta0(d));
    Ok((q, OuterFactor::OneMinusR2, AffineNorm::new(norm, 0.0)))
}

/// Basis of inner product II: the `U` elements for `2j < n`, and for even `n`
/// the radial element `q_{n/2}(2‖x‖²-1)`.
///
/// The harmonic elements (`j = 0`, `n >= 1`) vanish at the origin and on
/// the sphere contribute nothing here, so their norm is `nλ`.
pub fn basis_ii(n: usize, d: usize) -> Result<Vec<BasisElement>> {
    check_d(d)?;
    separable_family(Family::II, n, d, 0..=n / 2, |j| {
        if n == 0 {
            return Ok((Poly1::constant(1.0), OuterFactor::None, AffineNorm::new(0.0, 1.0)));
        }
        if 2 * j == n {
            let q = qk_coeffs(j, d)?;
            let norm = 8.0 / (n as f64 + beta0(d));
            return Ok((q, OuterFactor::None, AffineNorm::new(norm, 0.0)));
        }
        if j == 0 {
            return Ok((Poly1::constant(1.0), OuterFactor::None, AffineNorm::new(n as f64, 0.0)));
        }
        u_radial(n, j, d)
    })
}

/// `Q_{0,ν}^n = Y_ν^n`, `Q_{j,ν}^n = (1-‖x‖²) P_{j-1}^{(2,β)}(2‖x‖²-1) Y_ν^{n-2j}`.
///
/// `closed_norm` holds the tabulated values `(2n+d)/d` and
/// `8j²(j+1)²/(d(n+d/2))`; the diagonal of [`crate::innerprod::gram_report`] compares them with
/// the inner product itself.
pub fn basis_delta(n: usize, d: usize) -> Result<Vec<BasisElement>> {
    check_d(d)?;
    let df = d as f64;
    separable_family(Family::Delta, n, d, 0..=n / 2, |j| {
        if j == 0 {
            return Ok((Poly1::constant(1.0), OuterFactor::None, AffineNorm::new(0.0, (2.0 * n as f64 + df) / df)));
        }
        let b = (n - 2 * j) as f64 + beta0(d);
        let q = jacobi_coeffs(j - 1, JacobiParams::new(2.0, b))?;
        let jf = j as f64;
        let norm = 8.0 * jf * jf * (jf + 1.0).powi(2) / (df * (n as f64 + df / 2.0));
        Ok((q, OuterFactor::OneMinusR2, AffineNorm::new(0.0, norm)))
    })
}

/// Spherical harmonics of degree `n`, with norm `λn² + 1` under the sphere
/// inner product.
pub fn basis_sphere(n: usize, d: usize) -> Result<Vec<BasisElement>> {
    check_d(d)?;
    separable_family(Family::S, n, d, 0..=0, |_| {
        Ok((Poly1::constant(1.0), OuterFactor::None, AffineNorm::new((n * n) as f64, 1.0)))
    })
}

pub fn basis(family: Family, n: usize, d: usize) -> Result<Vec<BasisElement>> {
    match family {
        Family::I => basis_i(n, d),
        Family::II => basis_ii(n, d),
        Family::S => basis_sphere(n, d),
        Family::Delta => basis_delta(n, d),
        Family::Wmu(mu) => wmu_basis(n, d, mu),
    }
}

/// All elements of degree `0..=max_degree`, ordered by `(n, j, ν)`.
pub fn basis_up_to(family: Family, max_degree: usize, d: usize) -> Result<Vec<BasisElement>> {
    let mut out = Vec::new();
    for n in 0..=max_degree {
        out.extend(basis(family, n, d)?);
    }
    Ok(out)
}

/// `-4j(n-j+(d-2)/2) P_{j-1,ν}^{n-2}(W_1; x)`, which equals `Δ U_{j,ν}^n`.
pub fn laplacian_u(n: usize, j: usize, nu: usize, d: usize) -> Result<MultiPoly> {
    if j == 0 || 2 * j > n {
        return Err(Error::IndexOutOfRange(format!("need 1 <= j <= n/2, got n={n}, j={j}")));
    }
    let p = wmu_basis(n - 2, d, 1.0)?
        .into_iter()
        .find(|e| e.j == j - 1 && e.nu == nu)
        .ok_or_else(|| Error::IndexOutOfRange(format!("nu={nu} out of range for n={n}, j={j}")))?;
    let c = -4.0 * j as f64 * ((n - j) as f64 + beta0(d));
    Ok(p.poly.scale(c))
}

/// `Δp - ⟨x,∇⟩²p - (d+1)⟨x,∇⟩p`, the operator exactly as tabulated for `W_1`.
pub fn apply_d(p: &MultiPoly) -> MultiPoly {
    weighted_operator(p, (p.dim() + 1) as f64)
}

/// `Δp - ⟨x,∇⟩²p - (2μ+d)⟨x,∇⟩p`, whose eigenspaces are `𝒱_n^d(W_μ)` with
/// eigenvalue [`ball_eigenvalue`].
pub fn apply_ball_operator(p: &MultiPoly, mu: f64) -> MultiPoly {
    weighted_operator(p, 2.0 * mu + p.dim() as f64)
}

/// `-n(n+2μ+d)`.
pub fn ball_eigenvalue(n: usize, d: usize, mu: f64) -> f64 {
    -(n as f64) * (n as f64 + 2.0 * mu + d as f64)
}

fn weighted_operator(p: &MultiPoly, c: f64) -> MultiPoly {
    let e = p.euler();
    &(&p.laplacian() - &e.euler()) - &e.scale(c)
}

/// Outcome of comparing `span U(n)` with `ℋ_n ⊕ (1-‖x‖²) 𝒱_{n-2}(W_1)`.
#[derive(Clone, Debug)]
pub struct DirectSumReport {
    pub n: usize,
    pub d: usize,
    pub expected_dim: usize,
    pub rank_u: usize,
    pub rank_sum: usize,
    pub rank_joint: usize,
    /// Smallest retained and largest discarded singular values of the joint
    /// matrix, relative to the largest.
    pub gap: (f64, f64),
}

impl DirectSumReport {
    pub fn holds(&self) -> bool {
        self.rank_u == self.expected_dim && self.rank_sum == self.expected_dim && self.rank_joint == self.expected_dim
    }
}

fn coefficient_matrix(polys: &[MultiPoly]) -> DMatrix<f64> {
    let mut exps = std::collections::BTreeSet::new();
    for p in polys {
        exps.extend(p.terms().map(|(e, _)| e.clone()));
    }
    let exps: Vec<_> = exps.into_iter().collect();
    DMatrix::from_fn(polys.len(), exps.len(), |i, k| polys[i].coefficient(&exps[k]))
}

fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> (usize, f64, f64) {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let kept: Vec<f64> = sv.iter().copied().filter(|s| *s > tol * top).collect();
    let dropped = sv.iter().copied().filter(|s| *s <= tol * top).fold(0.0, f64::max);
    let low = kept.iter().copied().fold(f64::INFINITY, f64::min);
    (kept.len(), low / top, dropped / top)
}

/// Checks `span U(n) = ℋ_n ⊕ (1-‖x‖²) 𝒱_{n-2}(W_1)` through ranks of the
/// stacked coefficient matrices.
pub fn direct_sum_check(n: usize, d: usize) -> Result<DirectSumReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("direct sum needs n >= 2, got {n}")));
    }
    let u: Vec<MultiPoly> = basis_i(n, d)?.into_iter().map(|e| e.poly).collect();
    let factor = MultiPoly::one_minus_norm_squared(d);
    let mut sum: Vec<MultiPoly> = harmonic_basis(n, d)?.elements.clone();
    sum.extend(wmu_basis(n - 2, d, 1.0)?.into_iter().map(|e| &factor * &e.poly));
    let mut joint = u.clone();
    joint.extend(sum.iter().cloned());
    let tol = 1e-10;
    let rank_u = numerical_rank(&coefficient_matrix(&u), tol).0;
    let rank_sum = numerical_rank(&coefficient_matrix(&sum), tol).0;
    let (rank_joint, low, high) = numerical_rank(&coefficient_matrix(&joint), tol);
    Ok(DirectSumReport {
        n,
        d,
        expected_dim: dim_homogeneous(n, d),
        rank_u,
        rank_sum,
        rank_joint,
        gap: (low, high),
    })
}

/// Number of basis elements of degree `n`: `Σ_j σ_{n-2j} = C(n+d-1, d-1)`.
pub fn family_size(n: usize, d: usize) -> usize {
    (0..=n / 2).map(|j| dim_harmonic(n - 2 * j, d)).sum()
}
