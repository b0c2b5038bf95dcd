//! Fourier coefficients, projections, reproducing kernels and Parseval
//! relations for the ball bases.
//!
//! Coefficients never differentiate the expanded function: inner products I
//! and II go through Green's identity and the Laplacian identity for `U`, the
//! Δ inner product through two Green steps, so point evaluators work as well
//! as polynomials.

use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::ballbasis::{basis, radial_multipoly, wmu_basis, BasisElement};
use crate::error::{check_dim, Error, Result};
use crate::harmonics::{harmonic_basis, zonal_kernel};
use crate::innerprod::{build_weighted_quadrature_cached, ip_exact, ip_i_green, BallQuadrature, InnerProductSpec, IpFamily};
use crate::polyalg::moments::{omega, radial_weight_integral};
use crate::polyalg::{ball_pairing, gradient_pairing, sphere_pairing, weighted_ball_pairing, MultiPoly};

/// A function on the ball that can be sampled pointwise.
pub trait BallFunction: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
}

impl BallFunction for MultiPoly {
    fn dim(&self) -> usize {
        MultiPoly::dim(self)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        MultiPoly::eval(self, x)
    }
}

/// Built-in non-polynomial test functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedKind {
    /// `exp(x_1 + ... + x_d)`
    ExpSum,
    /// `exp(-‖x‖²)`
    Gaussian,
    /// `cos(x_1)`
    CosX1,
}

#[derive(Clone, Copy, Debug)]
pub struct NamedFunction {
    pub kind: NamedKind,
    pub d: usize,
}

impl NamedFunction {
    pub const NAMES: [&'static str; 3] = ["exp_sum", "gaussian", "cos_x1"];

    pub fn parse(name: &str, d: usize) -> Result<Self> {
        let kind = match name {
            "exp_sum" => NamedKind::ExpSum,
            "gaussian" => NamedKind::Gaussian,
            "cos_x1" => NamedKind::CosX1,
            _ => {
                return Err(Error::Parse(format!(
                    "unknown function `{name}`; known: {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        Ok(NamedFunction { kind, d })
    }
}

impl BallFunction for NamedFunction {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self.kind {
            NamedKind::ExpSum => x.iter().sum::<f64>().exp(),
            NamedKind::Gaussian => (-x.iter().map(|v| v * v).sum::<f64>()).exp(),
            NamedKind::CosX1 => x[0].cos(),
        }
    }
}

/// Samples of a function on a ball rule and its sphere rule.
pub struct Samples {
    mu: f64,
    rule: Arc<BallQuadrature>,
    ball: Vec<f64>,
    sphere: Vec<f64>,
}

/// The function being expanded: a polynomial handled by exact moments, or a
/// sampled function handled by quadrature of a declared degree.
pub enum Integrand<'a> {
    Poly(&'a MultiPoly),
    Sampled { d: usize, degree: usize, origin: f64, samples: Vec<Samples> },
}

impl<'a> Integrand<'a> {
    /// Samples `f` on rules of exactness `degree` for the weights `(1-‖x‖²)^μ`, `μ ∈ mus`.
    pub fn sampled(f: &dyn BallFunction, degree: usize, mus: &[f64]) -> Result<Integrand<'a>> {
        let d = f.dim();
        let mut samples = Vec::new();
        for &mu in mus {
            if samples.iter().any(|s: &Samples| s.mu == mu) {
                continue;
            }
            let rule = build_weighted_quadrature_cached(d, degree, mu)?;
            let mut ball = Vec::with_capacity(rule.len());
            rule.for_each_node(|x, _| ball.push(f.eval(x)));
            let sphere = rule.sphere.nodes.iter().map(|x| f.eval(x)).collect();
            samples.push(Samples { mu, rule, ball, sphere });
        }
        Ok(Integrand::Sampled { d, degree, origin: f.eval(&vec![0.0; d]), samples })
    }

    pub fn dim(&self) -> usize {
        match self {
            Integrand::Poly(p) => p.dim(),
            Integrand::Sampled { d, .. } => *d,
        }
    }

    fn samples(&self, mu: f64) -> Result<&Samples> {
        match self {
            Integrand::Sampled { samples, .. } => samples
                .iter()
                .find(|s| s.mu == mu)
                .ok_or_else(|| Error::InvalidParameter(format!("no samples for weight exponent {mu}"))),
            Integrand::Poly(_) => unreachable!(),
        }
    }

    fn check_degree(&self, needed: usize) -> Result<()> {
        if let Integrand::Sampled { degree, .. } = self {
            if *degree < needed {
                return Err(Error::InsufficientExactness { required: needed, available: *degree });
            }
        }
        Ok(())
    }

    /// `(1/ω) ∫_S f p dω`.
    pub fn sphere_pair(&self, p: &MultiPoly) -> Result<f64> {
        match self {
            Integrand::Poly(f) => Ok(sphere_pairing(f, p)),
            Integrand::Sampled { d, .. } => {
                self.check_degree(p.degree())?;
                let s = self.samples(0.0).or_else(|_| self.first())?;
                let sum: f64 = s
                    .rule
                    .sphere
                    .nodes
                    .iter()
                    .zip(&s.rule.sphere.weights)
                    .zip(&s.sphere)
                    .map(|((x, w), fx)| w * fx * p.eval(x))
                    .sum();
                Ok(sum / omega(*d))
            }
        }
    }

    fn first(&self) -> Result<&Samples> {
        match self {
            Integrand::Sampled { samples, .. } => {
                samples.first().ok_or_else(|| Error::InvalidParameter("no samples".into()))
            }
            Integrand::Poly(_) => unreachable!(),
        }
    }

    /// `(1/ω) ∫_B f p (1-‖x‖²)^μ dx`.
    pub fn ball_pair(&self, p: &MultiPoly, mu: f64) -> Result<f64> {
        match self {
            Integrand::Poly(f) => Ok(weighted_ball_pairing(f, p, mu)),
            Integrand::Sampled { d, .. } => {
                self.check_degree(p.degree())?;
                let s = self.samples(mu)?;
                let mut sum = 0.0;
                let mut k = 0;
                s.rule.for_each_node(|x, w| {
                    sum += w * s.ball[k] * p.eval(x);
                    k += 1;
                });
                Ok(sum / omega(*d))
            }
        }
    }

    pub fn at_origin(&self) -> f64 {
        match self {
            Integrand::Poly(f) => f.eval(&vec![0.0; f.dim()]),
            Integrand::Sampled { origin, .. } => *origin,
        }
    }
}

fn beta0(d: usize) -> f64 {
    (d as f64 - 2.0) / 2.0
}

/// `q(2‖x‖²-1) Y(x)` of an element, without the `(1-‖x‖²)` factor.
fn inner_factor(e: &BasisElement) -> MultiPoly {
    &radial_multipoly(&e.form.radial, e.form.d) * &e.form.harmonic
}

/// `⟨f, e⟩` for the inner product `spec`, without differentiating `f`.
pub fn coefficient(spec: &InnerProductSpec, e: &BasisElement, f: &Integrand) -> Result<f64> {
    check_dim(spec.d, f.dim())?;
    let d = spec.d;
    let (n, j) = (e.n, e.j);
    let family_i = |lambda: f64| -> Result<f64> {
        let y = &e.form.harmonic;
        if j == 0 {
            return Ok((lambda * n as f64 + 1.0) * f.sphere_pair(y)?);
        }
        // U = 0 and dU/dr = -2jY on the sphere, ΔU = -4j(n-j+β0) P(W_1)
        let p = inner_factor(e);
        Ok(-2.0 * j as f64 * lambda * f.sphere_pair(y)?
            + 4.0 * j as f64 * ((n - j) as f64 + beta0(d)) * lambda * f.ball_pair(&p, 0.0)?)
    };
    match spec.family {
        IpFamily::I { lambda } => family_i(lambda),
        IpFamily::II { lambda } => {
            if n == 0 {
                Ok(f.at_origin())
            } else if 2 * j == n {
                // V(0) = 0 and dV/dr = 4 on the sphere
                Ok(4.0 * lambda * f.sphere_pair(&MultiPoly::one(d))? - lambda * f.ball_pair(&e.poly.laplacian(), 0.0)?)
            } else if j == 0 {
                Ok(lambda * n as f64 * f.sphere_pair(&e.form.harmonic)?)
            } else {
                family_i(lambda)
            }
        }
        IpFamily::Delta { c } => {
            // ∫ Δu Δv = ∫_S (u_r Δv - u (Δv)_r) + ∫_B u Δ²v with u = (1-‖x‖²) f
            let v = &MultiPoly::one_minus_norm_squared(d) * &e.poly;
            let lv = v.laplacian();
            let l2v = &MultiPoly::one_minus_norm_squared(d) * &lv.laplacian();
            Ok(c * omega(d) * (-2.0 * f.sphere_pair(&lv)? + f.ball_pair(&l2v, 0.0)?))
        }
        IpFamily::Wmu { mu } => Ok(f.ball_pair(&e.poly, mu)? / radial_weight_integral(0, d, mu)),
        IpFamily::S { lambda } => match f {
            Integrand::Poly(p) => Ok(lambda * sphere_pairing(&p.euler(), &e.poly.euler()) + sphere_pairing(p, &e.poly)),
            Integrand::Sampled { .. } => Err(Error::InvalidParameter(
                "the sphere inner product needs the radial derivative; sampled input is not supported".into(),
            )),
        },
    }
}

/// Squared norm of `e`: the closed form, except for the Δ family whose
/// tabulated norms are not those of the inner product; there the norm is
/// computed from moments.
pub fn element_norm(spec: &InnerProductSpec, e: &BasisElement) -> Result<f64> {
    match spec.family {
        IpFamily::Delta { .. } => ip_exact(spec, &e.poly, &e.poly),
        _ => Ok(e.closed_norm.at(spec.lambda())),
    }
}

/// `\hat f_{j,ν}^n = ⟨f, U_{j,ν}^n⟩_I`; `nu` is 1-based.
pub fn fourier_coeff_i(f: &MultiPoly, n: usize, j: usize, nu: usize, lambda: f64, d: usize) -> Result<f64> {
    let spec = InnerProductSpec::i(d, lambda)?;
    let e = find_element(&spec, n, j, nu)?;
    coefficient(&spec, &e, &Integrand::Poly(f))
}

fn find_element(spec: &InnerProductSpec, n: usize, j: usize, nu: usize) -> Result<BasisElement> {
    if 2 * j > n {
        return Err(Error::IndexOutOfRange(format!("need 2j <= n, got n={n}, j={j}")));
    }
    basis(spec.basis_family(), n, spec.d)?
        .into_iter()
        .find(|e| e.j == j && e.nu == nu)
        .ok_or_else(|| Error::IndexOutOfRange(format!("no element (n={n}, j={j}, nu={nu})")))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefEntry {
    pub n: usize,
    pub j: usize,
    pub nu: usize,
    pub value: f64,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct CoefficientTable {
    pub spec: InnerProductSpec,
    pub max_degree: usize,
    pub entries: Vec<CoefEntry>,
}

impl CoefficientTable {
    pub fn get(&self, n: usize, j: usize, nu: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.n == n && e.j == j && e.nu == nu).map(|e| e.value)
    }

    /// `Σ \hat f / H · basis element` over the table.
    pub fn reconstruct(&self) -> Result<MultiPoly> {
        let mut out = MultiPoly::zero(self.spec.d);
        for n in 0..=self.max_degree {
            for e in basis(self.spec.basis_family(), n, self.spec.d)? {
                let c = self
                    .entries
                    .iter()
                    .find(|t| t.n == n && t.j == e.j && t.nu == e.nu)
                    .ok_or_else(|| Error::IndexOutOfRange(format!("missing entry ({n}, {}, {})", e.j, e.nu)))?;
                out.add_scaled(&e.poly, c.value / c.norm)?;
            }
        }
        Ok(out)
    }

    pub fn to_json_value(&self) -> Value {
        let spec = self.spec.to_json_value();
        json!({
            "family": spec["family"],
            "d": self.spec.d,
            "params": spec["params"],
            "max_degree": self.max_degree,
            "entries": self.entries.iter().map(|e| json!([e.n, e.j, e.nu, e.value])).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,j,nu,value\n");
        for e in &self.entries {
            s.push_str(&format!("{},{},{},{:.16e}\n", e.n, e.j, e.nu, e.value));
        }
        s
    }
}

fn expand_integrand(spec: &InnerProductSpec, f: &Integrand, max_degree: usize) -> Result<CoefficientTable> {
    spec.validate()?;
    if matches!(spec.family, IpFamily::S { .. }) {
        return Err(Error::InvalidParameter(
            "the sphere inner product only sees boundary values; expansion on the ball is not defined".into(),
        ));
    }
    let mut elems = Vec::new();
    for n in 0..=max_degree {
        elems.extend(basis(spec.basis_family(), n, spec.d)?);
    }
    let entries = elems
        .par_iter()
        .map(|e| {
            Ok(CoefEntry { n: e.n, j: e.j, nu: e.nu, value: coefficient(spec, e, f)?, norm: element_norm(spec, e)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientTable { spec: *spec, max_degree, entries })
}

/// Full coefficient table of a polynomial through degree `max_degree`.
pub fn expand(f: &MultiPoly, spec: &InnerProductSpec, max_degree: usize) -> Result<CoefficientTable> {
    check_dim(spec.d, f.dim())?;
    expand_integrand(spec, &Integrand::Poly(f), max_degree)
}

/// Smallest quadrature degree accepted for sampled expansions.
pub fn min_sample_degree(max_degree: usize) -> usize {
    2 * max_degree + 2
}

/// Coefficient table of a sampled function using rules of exactness
/// `quad_degree`, which must be at least [`min_sample_degree`].
pub fn expand_sampled(
    f: &dyn BallFunction,
    spec: &InnerProductSpec,
    max_degree: usize,
    quad_degree: usize,
) -> Result<CoefficientTable> {
    check_dim(spec.d, f.dim())?;
    let required = min_sample_degree(max_degree);
    if quad_degree < required {
        return Err(Error::InsufficientExactness { required, available: quad_degree });
    }
    let mu = match spec.family {
        IpFamily::Wmu { mu } => mu,
        _ => 0.0,
    };
    let integrand = Integrand::sampled(f, quad_degree, &[0.0, mu])?;
    expand_integrand(spec, &integrand, max_degree)
}

/// Orthogonal projection onto `𝒱_n^d` of `spec`, summed over the basis.
pub fn project(f: &Integrand, spec: &InnerProductSpec, n: usize) -> Result<MultiPoly> {
    let mut out = MultiPoly::zero(spec.d);
    for e in basis(spec.basis_family(), n, spec.d)? {
        let c = coefficient(spec, &e, f)? / element_norm(spec, &e)?;
        out.add_scaled(&e.poly, c)?;
    }
    Ok(out)
}

/// `proj_{𝒱_n^d(I)} f` through the `U` basis.
pub fn project_i(f: &MultiPoly, n: usize, lambda: f64, d: usize) -> Result<MultiPoly> {
    check_dim(d, f.dim())?;
    project(&Integrand::Poly(f), &InnerProductSpec::i(d, lambda)?, n)
}

/// `proj_{𝒱_n^d(I)} f (x)` from the closed form
///
/// `Y_n f(x) + (1-‖x‖²) [ c_1 ∫_B f(y) P_{n-2}(W_1; x, y) dy
///   - (n+β0) Σ_{j>=1} (1/j) P_{j-1}^{(1,n-2j+β0)}(2‖x‖²-1) Y_{n-2j} f(x) ]`,
///
/// with the harmonic projections taken by sphere quadrature of the zonal
/// kernel and the ball integral by quadrature. Needs `quad_degree >= deg f + n`.
pub fn project_i_closed_form(f: &dyn BallFunction, n: usize, d: usize, quad_degree: usize, x: &[f64]) -> Result<f64> {
    check_dim(d, f.dim())?;
    check_dim(d, x.len())?;
    let rule = build_weighted_quadrature_cached(d, quad_degree, 0.0)?;
    let om = omega(d);
    let sphere_vals: Vec<f64> = rule.sphere.nodes.iter().map(|y| f.eval(y)).collect();
    // Y_m f(x) = (1/ω) ∫_S f(y) Z_m(x, y) dω(y)
    let y_proj = |m: usize| -> Result<f64> {
        let mut s = 0.0;
        for ((y, w), fy) in rule.sphere.nodes.iter().zip(&rule.sphere.weights).zip(&sphere_vals) {
            s += w * fy * zonal_kernel(m, d, x, y)?;
        }
        Ok(s / om)
    };
    let mut value = y_proj(n)?;
    if n < 2 {
        return Ok(value);
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let c1 = 1.0 / (om * radial_weight_integral(0, d, 1.0));
    let mut kernel_part = 0.0;
    rule.for_each_node(|y, w| {
        kernel_part += w * f.eval(y) * reproducing_kernel_wmu(n - 2, d, 1.0, x, y).unwrap_or(f64::NAN);
    });
    let mut sum = 0.0;
    for j in 1..=n / 2 {
        let b = (n - 2 * j) as f64 + beta0(d);
        let p = crate::onevar::jacobi_eval(j - 1, crate::onevar::JacobiParams::new(1.0, b), 2.0 * r2 - 1.0)?;
        sum += p * y_proj(n - 2 * j)? / j as f64;
    }
    value += (1.0 - r2) * (c1 * kernel_part - (n as f64 + beta0(d)) * sum);
    if !value.is_finite() {
        return Err(Error::Numerical("kernel evaluation failed".into()));
    }
    Ok(value)
}

/// `proj_{𝒱_n^d(W_μ)} g`, the `L²(W_μ)` projection.
pub fn proj_wmu(g: &MultiPoly, n: usize, d: usize, mu: f64) -> Result<MultiPoly> {
    check_dim(d, g.dim())?;
    project(&Integrand::Poly(g), &InnerProductSpec::wmu(d, mu)?, n)
}

fn kernel_norms(spec: &InnerProductSpec, n: usize) -> Result<Vec<(BasisElement, f64)>> {
    basis(spec.basis_family(), n, spec.d)?
        .into_iter()
        .map(|e| {
            let h = element_norm(spec, &e)?;
            Ok((e, h))
        })
        .collect()
}

/// `P_n(x, y) = Σ H^{-1} B(x) B(y)` over the basis of degree `n`.
pub fn reproducing_kernel(spec: &InnerProductSpec, n: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(spec.d, x.len())?;
    check_dim(spec.d, y.len())?;
    Ok(kernel_norms(spec, n)?.iter().map(|(e, h)| e.form.eval(x) * e.form.eval(y) / h).sum())
}

fn reproducing_kernel_wmu(n: usize, d: usize, mu: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(wmu_basis(n, d, mu)?.iter().map(|e| e.form.eval(x) * e.form.eval(y) / e.closed_norm.constant).sum())
}

/// `y ↦ P_n(x, y)` as a polynomial.
pub fn kernel_section(spec: &InnerProductSpec, n: usize, x: &[f64]) -> Result<MultiPoly> {
    check_dim(spec.d, x.len())?;
    let mut out = MultiPoly::zero(spec.d);
    for (e, h) in kernel_norms(spec, n)? {
        out.add_scaled(&e.poly, e.form.eval(x) / h)?;
    }
    Ok(out)
}

/// `proj f (x) = ⟨f, P_n(x, ·)⟩`; for inner product I through its Green form.
pub fn project_via_kernel_at(f: &MultiPoly, spec: &InnerProductSpec, n: usize, x: &[f64]) -> Result<f64> {
    let k = kernel_section(spec, n, x)?;
    match spec.family {
        IpFamily::I { lambda } => ip_i_green(f, &k, lambda, spec.d),
        _ => ip_exact(spec, f, &k),
    }
}

#[derive(Clone, Debug)]
pub struct ParsevalReport {
    pub lhs: f64,
    pub rhs_total: f64,
    pub relative_gap: f64,
    /// `(n, j, ν, contribution)`.
    pub terms: Vec<(usize, usize, usize, f64)>,
    /// Set when the series was cut below the degree of the input.
    pub truncated: bool,
}

impl ParsevalReport {
    fn new(lhs: f64, terms: Vec<(usize, usize, usize, f64)>, truncated: bool) -> Self {
        let rhs_total: f64 = terms.iter().map(|t| t.3).sum();
        let diff = (lhs - rhs_total).abs();
        let relative_gap = if diff == 0.0 { 0.0 } else { diff / lhs.abs() };
        ParsevalReport { lhs, rhs_total, relative_gap, terms, truncated }
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "lhs": self.lhs,
            "rhs_total": self.rhs_total,
            "relative_gap": self.relative_gap,
            "truncated": self.truncated,
            "terms": self.terms.iter().map(|&(n, j, nu, v)| json!([n, j, nu, v])).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,j,nu,value\n");
        for &(n, j, nu, v) in &self.terms {
            s.push_str(&format!("{n},{j},{nu},{v:.16e}\n"));
        }
        s
    }
}

/// `(1/ω) ∫_B |∇f|² = Σ_n n Σ_ν ⟨f,Y_ν^n⟩² + 2 Σ_n (n+β0) Σ_{j>=1} Σ_ν
/// (⟨f,Y_ν^{n-2j}⟩ - (n-j+β0) ⟨f, P_{j-1,ν}^{n-2}(W_1)⟩_{L²(B)})²` with
/// `⟨f,P⟩_{L²(B)} = (2/ω) ∫_B f P`.
pub fn parseval_gradient(f: &MultiPoly, d: usize, max_n: usize) -> Result<ParsevalReport> {
    check_dim(d, f.dim())?;
    let g = f.gradient();
    let lhs = gradient_pairing(&g, &g);
    let b = beta0(d);
    let mut terms = Vec::new();
    for n in 0..=max_n {
        for e in basis(crate::ballbasis::Family::I, n, d)? {
            let sy = sphere_pairing(f, &e.form.harmonic);
            let v = if e.j == 0 {
                n as f64 * sy * sy
            } else {
                let pb = 2.0 * ball_pairing(f, &inner_factor(&e));
                let t = sy - ((n - e.j) as f64 + b) * pb;
                2.0 * (n as f64 + b) * t * t
            };
            terms.push((n, e.j, e.nu, v));
        }
    }
    Ok(ParsevalReport::new(lhs, terms, max_n < f.degree()))
}

/// Gradient Parseval relation for `f = (1-‖x‖²) g`:
/// `(1/ω) ∫_B |∇f|² = 2 Σ_n (n+β0) Σ_{j>=1} Σ_ν (n-j+β0)² [\hat g_{j-1,ν}^{n-2}]²`
/// with `\hat g_{k,ν}^m = (2/ω) ∫_B g P_{k,ν}^m(W_1) (1-‖y‖²) dy`.
pub fn parseval_annihilated(g: &MultiPoly, d: usize, max_n: usize) -> Result<ParsevalReport> {
    check_dim(d, g.dim())?;
    let f = &MultiPoly::one_minus_norm_squared(d) * g;
    let grad = f.gradient();
    let lhs = gradient_pairing(&grad, &grad);
    let b = beta0(d);
    let mut terms = Vec::new();
    for n in 2..=max_n {
        for p in wmu_basis(n - 2, d, 1.0)? {
            let j = p.j + 1;
            let ghat = 2.0 * weighted_ball_pairing(g, &p.poly, 1.0);
            let w = (n - j) as f64 + b;
            terms.push((n, j, p.nu, 2.0 * (n as f64 + b) * w * w * ghat * ghat));
        }
    }
    let truncated = !g.is_zero() && max_n < g.degree() + 2;
    Ok(ParsevalReport::new(lhs, terms, truncated))
}

/// `(1/ω) ∫_S f² = Σ_n Σ_ν ⟨f, Y_ν^n⟩²`.
pub fn parseval_sphere(f: &MultiPoly, d: usize, max_n: usize) -> Result<ParsevalReport> {
    check_dim(d, f.dim())?;
    let lhs = sphere_pairing(f, f);
    let mut terms = Vec::new();
    for n in 0..=max_n {
        for (i, c) in harmonic_basis(n, d)?.coefficients(f)?.into_iter().enumerate() {
            terms.push((n, 0, i + 1, c * c));
        }
    }
    Ok(ParsevalReport::new(lhs, terms, max_n < f.degree()))
}

/// For each `λ`, the distance between `(1/λ) Σ \hat f² / H` (inner product I)
/// and the gradient Parseval sum; it decays like `1/λ`.
pub fn lambda_limit(f: &MultiPoly, d: usize, max_n: usize, lambdas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let target = parseval_gradient(f, d, max_n)?.rhs_total;
    lambdas
        .iter()
        .map(|&lam| {
            let t = expand(f, &InnerProductSpec::i(d, lam)?, max_n)?;
            let s: f64 = t.entries.iter().map(|e| e.value * e.value / e.norm).sum();
            Ok((lam, (s / lam - target).abs()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballbasis::basis_i;
    use crate::harmonics::project_yn;
    use crate::innerprod::ip_exact;
    use crate::polyalg::homogeneous_exponents;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, d: usize, deg: usize) -> MultiPoly {
        let mut p = MultiPoly::zero(d);
        for n in 0..=deg {
            for e in homogeneous_exponents(d, n as u32) {
                p.add_term(e, rng.random_range(-1.0..1.0));
            }
        }
        p
    }

    fn all_specs(d: usize) -> Vec<InnerProductSpec> {
        vec![
            InnerProductSpec::i(d, 0.7).unwrap(),
            InnerProductSpec::ii(d, 1.9).unwrap(),
            InnerProductSpec::delta(d).unwrap(),
            InnerProductSpec::wmu(d, 1.0).unwrap(),
            InnerProductSpec::wmu(d, 0.5).unwrap(),
        ]
    }

    #[test]
    fn coefficients_match_direct_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [2usize, 3] {
            for spec in all_specs(d) {
                let f = random_poly(&mut rng, d, 5);
                let ff = ip_exact(&spec, &f, &f).unwrap();
                for n in 0..=5 {
                    for e in basis(spec.basis_family(), n, d).unwrap() {
                        let a = coefficient(&spec, &e, &Integrand::Poly(&f)).unwrap();
                        let b = ip_exact(&spec, &f, &e.poly).unwrap();
                        let scale = (ff * ip_exact(&spec, &e.poly, &e.poly).unwrap()).sqrt();
                        assert!((a - b).abs() <= 1e-11 * scale, "{spec:?} n={n} j={}: {a} vs {b}", e.j);
                    }
                }
            }
        }
    }

    #[test]
    fn constant_and_basis_inputs() {
        for d in [2usize, 3] {
            let one = MultiPoly::one(d);
            let t = expand(&one, &InnerProductSpec::i(d, 2.0).unwrap(), 4).unwrap();
            for e in &t.entries {
                let want = if e.n == 0 { 1.0 } else { 0.0 };
                assert!((e.value - want).abs() < 1e-13);
            }
            let lam = 1.5;
            let u = basis_i(4, d).unwrap().into_iter().find(|e| e.j == 1).unwrap();
            let t = expand(&u.poly, &InnerProductSpec::i(d, lam).unwrap(), 5).unwrap();
            for e in &t.entries {
                let want = if (e.n, e.j, e.nu) == (4, 1, u.nu) { u.closed_norm.at(lam) } else { 0.0 };
                assert!((e.value - want).abs() < 1e-12, "{e:?}");
            }
            assert!((fourier_coeff_i(&u.poly, 4, 1, u.nu, lam, d).unwrap() - u.closed_norm.at(lam)).abs() < 1e-12);
        }
        assert!(fourier_coeff_i(&MultiPoly::one(2), 2, 2, 1, 1.0, 2).is_err());
    }

    #[test]
    fn reconstruction_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [2usize, 3] {
            for spec in all_specs(d) {
                for deg in [0usize, 3, 6] {
                    let f = random_poly(&mut rng, d, deg);
                    let t = expand(&f, &spec, deg).unwrap();
                    let back = t.reconstruct().unwrap();
                    assert!(back.relative_distance(&f) < 1e-10, "{spec:?} deg={deg}");
                }
            }
        }
    }

    #[test]
    fn projection_restricts_to_harmonic_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2usize, 3] {
            let f = random_poly(&mut rng, d, 6);
            for n in 0..=5 {
                let p = project_i(&f, n, 0.9, d).unwrap();
                let y = project_yn(&f, n, d).unwrap();
                for _ in 0..5 {
                    let mut x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    x.iter_mut().for_each(|v| *v /= r);
                    assert!((p.eval(&x) - y.eval(&x)).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn closed_form_projection_matches_basis_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [2usize, 3] {
            let f = random_poly(&mut rng, d, 4);
            for n in 0..=4 {
                let p = project_i(&f, n, 1.0, d).unwrap();
                for _ in 0..3 {
                    let x: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
                    let closed = project_i_closed_form(&f, n, d, 12, &x).unwrap();
                    assert!((closed - p.eval(&x)).abs() < 1e-10, "d={d} n={n}");
                }
            }
        }
    }

    #[test]
    fn annihilated_projection_is_weighted_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2usize, 3] {
            let g = random_poly(&mut rng, d, 4);
            let f = &MultiPoly::one_minus_norm_squared(d) * &g;
            for n in 0..=6 {
                let lhs = project_i(&f, n, 1.0, d).unwrap();
                let rhs = if n >= 2 {
                    &MultiPoly::one_minus_norm_squared(d) * &proj_wmu(&g, n - 2, d, 1.0).unwrap()
                } else {
                    MultiPoly::zero(d)
                };
                let scale = f.max_abs_coef();
                assert!((&lhs - &rhs).max_abs_coef() < 1e-10 * scale, "n={n}");
            }
        }
    }

    #[test]
    fn weighted_projection_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for d in [2usize, 3] {
            for mu in [0.0, 1.0, 2.5] {
                let g = random_poly(&mut rng, d, 5);
                let mut sum = MultiPoly::zero(d);
                for n in 0..=5 {
                    sum = &sum + &proj_wmu(&g, n, d, mu).unwrap();
                }
                assert!(sum.relative_distance(&g) < 1e-10);
                assert!(proj_wmu(&MultiPoly::one(d), 2, d, mu).unwrap().max_abs_coef() < 1e-14);
                let p = wmu_basis(3, d, mu).unwrap()[1].poly.clone();
                assert!(proj_wmu(&p, 3, d, mu).unwrap().relative_distance(&p) < 1e-11);
            }
        }
    }

    #[test]
    fn kernels_reproduce() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [2usize, 3] {
            for spec in all_specs(d) {
                for n in 0..=4 {
                    let elems = basis(spec.basis_family(), n, d).unwrap();
                    let p = &elems[elems.len() / 2].poly;
                    let f = random_poly(&mut rng, d, 4);
                    let proj = project(&Integrand::Poly(&f), &spec, n).unwrap();
                    for _ in 0..3 {
                        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-0.55..0.55)).collect();
                        let y: Vec<f64> = (0..d).map(|_| rng.random_range(-0.55..0.55)).collect();
                        let k = kernel_section(&spec, n, &x).unwrap();
                        assert!((ip_exact(&spec, &k, p).unwrap() - p.eval(&x)).abs() < 1e-10);
                        let kxy = reproducing_kernel(&spec, n, &x, &y).unwrap();
                        let kyx = reproducing_kernel(&spec, n, &y, &x).unwrap();
                        assert!((kxy - kyx).abs() < 1e-12 * (1.0 + kxy.abs()));
                        let via = project_via_kernel_at(&f, &spec, n, &x).unwrap();
                        assert!((via - proj.eval(&x)).abs() < 1e-10 * (1.0 + via.abs()));
                    }
                }
            }
            let (x, y) = (vec![0.3; d], vec![-0.1; d]);
            assert!((reproducing_kernel(&InnerProductSpec::i(d, 1.0).unwrap(), 0, &x, &y).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for d in [2usize, 3] {
            let x1 = MultiPoly::var(d, 0);
            let r = parseval_gradient(&x1, d, 1).unwrap();
            assert!((r.lhs - 1.0 / d as f64).abs() < 1e-12);
            assert!(r.relative_gap < 1e-12);
            let r = parseval_gradient(&MultiPoly::one(d), d, 3).unwrap();
            assert_eq!(r.lhs, 0.0);
            assert!(r.rhs_total < 1e-28);
            for _ in 0..5 {
                let f = random_poly(&mut rng, d, 6);
                let r = parseval_gradient(&f, d, 6).unwrap();
                assert!(r.relative_gap < 1e-10);
                assert!(r.terms.iter().all(|t| t.3 >= 0.0));
                assert!(!r.truncated);
                assert!(parseval_gradient(&f, d, 4).unwrap().truncated);
            }
        }
    }

    #[test]
    fn annihilated_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in [2usize, 3, 4] {
            let r = parseval_annihilated(&MultiPoly::one(d), d, 2).unwrap();
            assert!((r.lhs - 4.0 / (d as f64 + 2.0)).abs() < 1e-14);
            assert!(r.relative_gap < 1e-10);
            let z = parseval_annihilated(&MultiPoly::zero(d), d, 3).unwrap();
            assert_eq!(z.rhs_total, 0.0);
            for _ in 0..4 {
                let g = random_poly(&mut rng, d, 4);
                let r = parseval_annihilated(&g, d, 6).unwrap();
                assert!(r.relative_gap < 1e-10);
                let direct = parseval_gradient(&(&MultiPoly::one_minus_norm_squared(d) * &g), d, 6).unwrap();
                assert!((direct.rhs_total - r.rhs_total).abs() < 1e-10 * r.lhs);
            }
        }
    }

    #[test]
    fn sphere_parseval() {
        for d in [2usize, 3] {
            let f = MultiPoly::var(d, 0).scale((d as f64).sqrt());
            let r = parseval_sphere(&f, d, 2).unwrap();
            assert!((r.lhs - 1.0).abs() < 1e-14 && r.relative_gap < 1e-13);
            let r = parseval_sphere(&MultiPoly::norm_squared(d), d, 2).unwrap();
            assert!((r.lhs - 1.0).abs() < 1e-14 && r.relative_gap < 1e-13);
            let y = harmonic_basis(3, d).unwrap().elements[0].clone();
            let r = parseval_sphere(&y, d, 4).unwrap();
            assert_eq!(r.terms.iter().filter(|t| t.3 > 1e-20).count(), 1);
        }
    }

    #[test]
    fn lambda_limit_decays() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let f = random_poly(&mut rng, 3, 4);
        let lams: Vec<f64> = (2..=6).map(|k| 10f64.powi(k)).collect();
        let gaps = lambda_limit(&f, 3, 4, &lams).unwrap();
        for w in gaps.windows(2) {
            let ratio = w[0].1 / w[1].1;
            assert!((ratio - 10.0).abs() < 0.1, "{gaps:?}");
        }
    }

    #[test]
    fn sampled_polynomial_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2usize, 3] {
            let f = random_poly(&mut rng, d, 3);
            for spec in all_specs(d) {
                let a = expand(&f, &spec, 4).unwrap();
                let b = expand_sampled(&f, &spec, 4, 12).unwrap();
                for (x, y) in a.entries.iter().zip(&b.entries) {
                    assert!((x.value - y.value).abs() < 1e-11, "{spec:?}");
                }
            }
            assert!(matches!(
                expand_sampled(&f, &InnerProductSpec::i(d, 1.0).unwrap(), 4, 9),
                Err(Error::InsufficientExactness { .. })
            ));
        }
    }

    #[test]
    fn sampled_function_projection_on_sphere() {
        // Y_n of a smooth function equals the sphere trace of its Sobolev projection
        let d = 2;
        let f = NamedFunction::parse("exp_sum", d).unwrap();
        let spec = InnerProductSpec::i(d, 1.0).unwrap();
        let rule_deg = 40;
        let integrand = Integrand::sampled(&f, rule_deg, &[0.0]).unwrap();
        for n in 0..=4 {
            let p = project(&integrand, &spec, n).unwrap();
            let x = [0.6, 0.8];
            let closed = project_i_closed_form(&f, n, d, rule_deg, &x).unwrap();
            assert!((p.eval(&x) - closed).abs() < 1e-10);
        }
        assert!(NamedFunction::parse("nope", 2).is_err());
        assert!(expand(&MultiPoly::one(2), &InnerProductSpec::sphere(2, 1.0).unwrap(), 2).is_err());
    }
}
