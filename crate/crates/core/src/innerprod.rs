//! The inner products on the ball, each evaluated either from closed-form
//! monomial moments or by a product Gauss rule.
//!
//! * I:    `(λ/ω) ∫_B ∇f·∇g + (1/ω) ∫_S f g`
//! * II:   `(λ/ω) ∫_B ∇f·∇g + f(0) g(0)`
//! * S:    `(λ/ω) ∫_S (x·∇f)(x·∇g) + (1/ω) ∫_S f g`
//! * Δ:    `c ∫_B Δ[(1-‖x‖²)f] Δ[(1-‖x‖²)g]`
//! * W_μ:  `c_μ ∫_B f g (1-‖x‖²)^μ`

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::ballbasis::{basis_up_to, BasisElement, Family};
use crate::error::{check_dim, Error, Result};
use crate::onevar::gauss_jacobi_rule_cached;
use crate::polyalg::moments::{omega, radial_weight_integral};
use crate::polyalg::{ball_pairing, gradient_pairing, sphere_pairing, weighted_ball_pairing, MultiPoly};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IpFamily {
    I { lambda: f64 },
    II { lambda: f64 },
    S { lambda: f64 },
    Delta { c: f64 },
    Wmu { mu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerProductSpec {
    pub family: IpFamily,
    pub d: usize,
}

/// Default constant of the Δ inner product.
pub const DELTA_DEFAULT_C: f64 = 1.0 / PI;

impl InnerProductSpec {
    pub fn new(family: IpFamily, d: usize) -> Result<Self> {
        let s = InnerProductSpec { family, d };
        s.validate()?;
        Ok(s)
    }

    pub fn i(d: usize, lambda: f64) -> Result<Self> {
        Self::new(IpFamily::I { lambda }, d)
    }

    pub fn ii(d: usize, lambda: f64) -> Result<Self> {
        Self::new(IpFamily::II { lambda }, d)
    }

    pub fn sphere(d: usize, lambda: f64) -> Result<Self> {
        Self::new(IpFamily::S { lambda }, d)
    }

    pub fn delta(d: usize) -> Result<Self> {
        Self::new(IpFamily::Delta { c: DELTA_DEFAULT_C }, d)
    }

    pub fn wmu(d: usize, mu: f64) -> Result<Self> {
        Self::new(IpFamily::Wmu { mu }, d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {}", self.d)));
        }
        let ok = match self.family {
            IpFamily::I { lambda } | IpFamily::II { lambda } => lambda > 0.0 && lambda.is_finite(),
            IpFamily::S { lambda } => lambda >= 0.0 && lambda.is_finite(),
            IpFamily::Delta { c } => c > 0.0 && c.is_finite(),
            IpFamily::Wmu { mu } => mu > -1.0 && mu.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid inner product parameters {:?}", self.family)))
        }
    }

    /// The basis family orthogonal for this inner product.
    pub fn basis_family(&self) -> Family {
        match self.family {
            IpFamily::I { .. } => Family::I,
            IpFamily::II { .. } => Family::II,
            IpFamily::S { .. } => Family::S,
            IpFamily::Delta { .. } => Family::Delta,
            IpFamily::Wmu { mu } => Family::Wmu(mu),
        }
    }

    /// `λ` for the Sobolev families, 0 otherwise.
    pub fn lambda(&self) -> f64 {
        match self.family {
            IpFamily::I { lambda } | IpFamily::II { lambda } | IpFamily::S { lambda } => lambda,
            _ => 0.0,
        }
    }

    pub fn to_json_value(&self) -> Value {
        let (name, params) = match self.family {
            IpFamily::I { lambda } => ("I", json!({"lambda": lambda})),
            IpFamily::II { lambda } => ("II", json!({"lambda": lambda})),
            IpFamily::S { lambda } => ("S", json!({"lambda": lambda})),
            IpFamily::Delta { c } => ("Delta", json!({"c": c})),
            IpFamily::Wmu { mu } => ("Wmu", json!({"mu": mu})),
        };
        json!({"family": name, "d": self.d, "params": params})
    }

    /// Quadrature exactness needed for polynomials of degrees `a` and `b`.
    fn required_exactness(&self, a: usize, b: usize) -> usize {
        match self.family {
            IpFamily::I { .. } | IpFamily::II { .. } => (a + b).max(1),
            _ => a + b,
        }
    }

    fn weight_mu(&self) -> f64 {
        match self.family {
            IpFamily::Wmu { mu } => mu,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Path {
    Exact,
    Quadrature,
}

/// Polynomial together with the derived polynomials an inner product needs.
#[derive(Clone, Debug)]
struct Prepared {
    poly: MultiPoly,
    grad: Vec<MultiPoly>,
    euler: Option<MultiPoly>,
    delta_a: Option<MultiPoly>,
}

fn prepare(spec: &InnerProductSpec, f: &MultiPoly) -> Prepared {
    let mut p = Prepared { poly: f.clone(), grad: Vec::new(), euler: None, delta_a: None };
    match spec.family {
        IpFamily::I { .. } | IpFamily::II { .. } => p.grad = f.gradient(),
        IpFamily::S { .. } => p.euler = Some(f.euler()),
        IpFamily::Delta { .. } => p.delta_a = Some((&MultiPoly::one_minus_norm_squared(f.dim()) * f).laplacian()),
        IpFamily::Wmu { .. } => {}
    }
    p
}

fn exact_prepared(spec: &InnerProductSpec, f: &Prepared, g: &Prepared) -> f64 {
    match spec.family {
        IpFamily::I { lambda } => lambda * gradient_pairing(&f.grad, &g.grad) + sphere_pairing(&f.poly, &g.poly),
        IpFamily::II { lambda } => {
            let origin = vec![0.0; spec.d];
            lambda * gradient_pairing(&f.grad, &g.grad) + f.poly.eval(&origin) * g.poly.eval(&origin)
        }
        IpFamily::S { lambda } => {
            let (ef, eg) = (f.euler.as_ref().unwrap(), g.euler.as_ref().unwrap());
            lambda * sphere_pairing(ef, eg) + sphere_pairing(&f.poly, &g.poly)
        }
        IpFamily::Delta { c } => {
            c * omega(spec.d) * ball_pairing(f.delta_a.as_ref().unwrap(), g.delta_a.as_ref().unwrap())
        }
        IpFamily::Wmu { mu } => weighted_ball_pairing(&f.poly, &g.poly, mu) / radial_weight_integral(0, spec.d, mu),
    }
}

fn check_inputs(spec: &InnerProductSpec, f: &MultiPoly, g: &MultiPoly) -> Result<()> {
    spec.validate()?;
    check_dim(spec.d, f.dim())?;
    check_dim(spec.d, g.dim())
}

/// Inner product through closed-form moments.
pub fn ip_exact(spec: &InnerProductSpec, f: &MultiPoly, g: &MultiPoly) -> Result<f64> {
    check_inputs(spec, f, g)?;
    Ok(exact_prepared(spec, &prepare(spec, f), &prepare(spec, g)))
}

/// Inner product on the given quadrature rule; fails when the rule is not
/// exact for the integrand degree or carries the wrong radial weight.
pub fn ip_with_rule(spec: &InnerProductSpec, f: &MultiPoly, g: &MultiPoly, rule: &BallQuadrature) -> Result<f64> {
    check_inputs(spec, f, g)?;
    check_dim(spec.d, rule.d)?;
    if rule.mu != spec.weight_mu() {
        return Err(Error::InvalidParameter(format!(
            "quadrature weight exponent {} does not match inner product weight {}",
            rule.mu,
            spec.weight_mu()
        )));
    }
    let required = spec.required_exactness(f.degree(), g.degree());
    if rule.exactness_degree < required {
        return Err(Error::InsufficientExactness { required, available: rule.exactness_degree });
    }
    let (vf, vg) = (NodeValues::new(spec, &prepare(spec, f), rule), NodeValues::new(spec, &prepare(spec, g), rule));
    Ok(vf.pair(spec, &vg, rule))
}

/// Inner product by either path; the quadrature path sizes its own rule with
/// exactness `2·max(deg f, deg g) + 6`.
pub fn ip(spec: &InnerProductSpec, f: &MultiPoly, g: &MultiPoly, path: Path) -> Result<f64> {
    match path {
        Path::Exact => ip_exact(spec, f, g),
        Path::Quadrature => {
            check_inputs(spec, f, g)?;
            let rule = default_rule(spec, f.degree().max(g.degree()))?;
            ip_with_rule(spec, f, g, &rule)
        }
    }
}

fn default_rule(spec: &InnerProductSpec, max_degree: usize) -> Result<Arc<BallQuadrature>> {
    build_weighted_quadrature_cached(spec.d, 2 * max_degree + 6, spec.weight_mu())
}

/// Inner product I rewritten by Green's identity:
/// `(1/ω) ∫_S f [λ dg/dr + g] - (λ/ω) ∫_B f Δg`; `f` is never differentiated.
pub fn ip_i_green(f: &MultiPoly, g: &MultiPoly, lambda: f64, d: usize) -> Result<f64> {
    check_dim(d, f.dim())?;
    check_dim(d, g.dim())?;
    let boundary = &g.euler().scale(lambda) + g;
    Ok(sphere_pairing(f, &boundary) - lambda * ball_pairing(f, &g.laplacian()))
}

/// Inner product II against a radial element `v` with `v(0) = 0` and
/// `dv/dr = 4` on the sphere: `(4λ/ω) ∫_S f - (λ/ω) ∫_B f Δv`.
pub fn ip_ii_radial_green(f: &MultiPoly, v: &MultiPoly, lambda: f64, d: usize) -> Result<f64> {
    check_dim(d, f.dim())?;
    check_dim(d, v.dim())?;
    Ok(4.0 * lambda * f.sphere_mean() - lambda * ball_pairing(f, &v.laplacian()))
}

/// Product rule on the ball: Gauss–Jacobi in `s = r²` times a rule on the
/// sphere, for the weight `(1-‖x‖²)^μ`.
#[derive(Clone, Debug)]
pub struct BallQuadrature {
    pub d: usize,
    pub mu: f64,
    pub radii: Vec<f64>,
    pub radial_weights: Vec<f64>,
    pub sphere: SphereRule,
    pub exactness_degree: usize,
}

/// Rule on `S^{d-1}` exact for polynomials of degree `<= exactness_degree`.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub d: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl SphereRule {
    /// `∫_{S^{d-1}} f dω`.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Trapezoid rule on the circle, then `x_d = t` with Gegenbauer weight
/// `(1-t²)^{(k-3)/2}` for each further dimension `k`.
pub fn build_sphere_rule(d: usize, degree: usize) -> Result<SphereRule> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {d}")));
    }
    let m = degree + 1;
    let mut nodes: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / m as f64;
            vec![th.cos(), th.sin()]
        })
        .collect();
    let mut weights = vec![2.0 * PI / m as f64; m];
    for k in 3..=d {
        let a = (k as f64 - 3.0) / 2.0;
        let rule = gauss_jacobi_rule_cached(degree / 2 + 1, a, a)?;
        let mut nn = Vec::with_capacity(nodes.len() * rule.len());
        let mut nw = Vec::with_capacity(nodes.len() * rule.len());
        for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let s = (1.0 - t * t).sqrt();
            for (x, &w) in nodes.iter().zip(&weights) {
                let mut y: Vec<f64> = x.iter().map(|v| v * s).collect();
                y.push(t);
                nn.push(y);
                nw.push(w * wt);
            }
        }
        nodes = nn;
        weights = nw;
    }
    Ok(SphereRule { d, nodes, weights, exactness_degree: degree })
}

/// Unweighted ball rule exact through `degree`.
pub fn build_quadrature(d: usize, degree: usize) -> Result<BallQuadrature> {
    build_weighted_quadrature(d, degree, 0.0)
}

/// Ball rule exact through `degree` against `(1-‖x‖²)^μ`.
pub fn build_weighted_quadrature(d: usize, degree: usize, mu: f64) -> Result<BallQuadrature> {
    if !(mu > -1.0) {
        return Err(Error::InvalidParameter(format!("mu must exceed -1, got {mu}")));
    }
    let sphere = build_sphere_rule(d, degree)?;
    // ∫_0^1 h(r²) r^{d-1} (1-r²)^μ dr = 2^{-(β+μ+2)} ∫ h((1+t)/2) (1-t)^μ (1+t)^β dt
    let beta = (d as f64 - 2.0) / 2.0;
    let rule = gauss_jacobi_rule_cached(degree / 4 + 1, mu, beta)?;
    let scale = 0.5f64.powf(beta + mu + 2.0);
    let radii = rule.nodes.iter().map(|t| ((1.0 + t) / 2.0).sqrt()).collect();
    let radial_weights = rule.weights.iter().map(|w| w * scale).collect();
    Ok(BallQuadrature { d, mu, radii, radial_weights, sphere, exactness_degree: degree })
}

type RuleCache = RwLock<HashMap<(usize, usize, u64), Arc<BallQuadrature>>>;

fn rule_cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

pub fn build_weighted_quadrature_cached(d: usize, degree: usize, mu: f64) -> Result<Arc<BallQuadrature>> {
    let key = (d, degree, mu.to_bits());
    if let Some(r) = rule_cache().read().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(build_weighted_quadrature(d, degree, mu)?);
    Ok(rule_cache().write().unwrap().entry(key).or_insert(rule).clone())
}

impl BallQuadrature {
    pub fn len(&self) -> usize {
        self.radii.len() * self.sphere.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `visit(x, w)` for every ball node.
    pub fn for_each_node(&self, mut visit: impl FnMut(&[f64], f64)) {
        let mut x = vec![0.0; self.d];
        for (&r, &wr) in self.radii.iter().zip(&self.radial_weights) {
            for (xs, &ws) in self.sphere.nodes.iter().zip(&self.sphere.weights) {
                for (xi, si) in x.iter_mut().zip(xs) {
                    *xi = r * si;
                }
                visit(&x, wr * ws);
            }
        }
    }

    /// `∫_B f (1-‖x‖²)^μ dx`.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut s = 0.0;
        self.for_each_node(|x, w| s += w * f(x));
        s
    }
}

/// Values of a prepared polynomial at the nodes of a rule.
struct NodeValues {
    ball: Vec<Vec<f64>>,
    sphere: Vec<Vec<f64>>,
    point: f64,
}

fn eval_ball(p: &MultiPoly, rule: &BallQuadrature) -> Vec<f64> {
    let mut out = Vec::with_capacity(rule.len());
    rule.for_each_node(|x, _| out.push(p.eval(x)));
    out
}

fn eval_sphere(p: &MultiPoly, rule: &BallQuadrature) -> Vec<f64> {
    rule.sphere.nodes.iter().map(|x| p.eval(x)).collect()
}

impl NodeValues {
    fn new(spec: &InnerProductSpec, p: &Prepared, rule: &BallQuadrature) -> Self {
        let mut v = NodeValues { ball: Vec::new(), sphere: Vec::new(), point: 0.0 };
        match spec.family {
            IpFamily::I { .. } | IpFamily::II { .. } => {
                v.ball = p.grad.iter().map(|g| eval_ball(g, rule)).collect();
                if matches!(spec.family, IpFamily::I { .. }) {
                    v.sphere.push(eval_sphere(&p.poly, rule));
                } else {
                    v.point = p.poly.eval(&vec![0.0; spec.d]);
                }
            }
            IpFamily::S { .. } => {
                v.sphere.push(eval_sphere(p.euler.as_ref().unwrap(), rule));
                v.sphere.push(eval_sphere(&p.poly, rule));
            }
            IpFamily::Delta { .. } => v.ball.push(eval_ball(p.delta_a.as_ref().unwrap(), rule)),
            IpFamily::Wmu { .. } => v.ball.push(eval_ball(&p.poly, rule)),
        }
        v
    }

    fn pair(&self, spec: &InnerProductSpec, other: &NodeValues, rule: &BallQuadrature) -> f64 {
        let ball_dot = |a: &[f64], b: &[f64]| -> f64 {
            let mut s = 0.0;
            let mut k = 0;
            for &wr in &rule.radial_weights {
                for &ws in &rule.sphere.weights {
                    s += wr * ws * a[k] * b[k];
                    k += 1;
                }
            }
            s
        };
        let sphere_dot =
            |a: &[f64], b: &[f64]| -> f64 { rule.sphere.weights.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum() };
        let om = omega(spec.d);
        let grad = || -> f64 { self.ball.iter().zip(&other.ball).map(|(a, b)| ball_dot(a, b)).sum::<f64>() / om };
        match spec.family {
            IpFamily::I { lambda } => lambda * grad() + sphere_dot(&self.sphere[0], &other.sphere[0]) / om,
            IpFamily::II { lambda } => lambda * grad() + self.point * other.point,
            IpFamily::S { lambda } => {
                (lambda * sphere_dot(&self.sphere[0], &other.sphere[0]) + sphere_dot(&self.sphere[1], &other.sphere[1])) / om
            }
            IpFamily::Delta { c } => c * ball_dot(&self.ball[0], &other.ball[0]),
            IpFamily::Wmu { mu } => ball_dot(&self.ball[0], &other.ball[0]) / (om * radial_weight_integral(0, spec.d, mu)),
        }
    }
}

/// Gram matrix of `polys`, rows computed in parallel.
pub fn gram_matrix(spec: &InnerProductSpec, polys: &[MultiPoly], path: Path) -> Result<DMatrix<f64>> {
    spec.validate()?;
    for p in polys {
        check_dim(spec.d, p.dim())?;
    }
    let m = polys.len();
    let prepared: Vec<Prepared> = polys.par_iter().map(|p| prepare(spec, p)).collect();
    let rows: Vec<Vec<f64>> = match path {
        Path::Exact => (0..m)
            .into_par_iter()
            .map(|i| (0..m).map(|k| if k < i { 0.0 } else { exact_prepared(spec, &prepared[i], &prepared[k]) }).collect())
            .collect(),
        Path::Quadrature => {
            let deg = polys.iter().map(MultiPoly::degree).max().unwrap_or(0);
            let rule = default_rule(spec, deg)?;
            let values: Vec<NodeValues> = prepared.par_iter().map(|p| NodeValues::new(spec, p, &rule)).collect();
            (0..m)
                .into_par_iter()
                .map(|i| (0..m).map(|k| if k < i { 0.0 } else { values[i].pair(spec, &values[k], &rule) }).collect())
                .collect()
        }
    };
    Ok(DMatrix::from_fn(m, m, |i, k| if k >= i { rows[i][k] } else { rows[k][i] }))
}

/// Gram matrix of a basis family across degrees, compared with its closed
/// norms.
#[derive(Clone, Debug)]
pub struct GramReport {
    pub spec: InnerProductSpec,
    pub max_degree: usize,
    pub labels: Vec<(usize, usize, usize)>,
    pub matrix: DMatrix<f64>,
    pub max_offdiag: f64,
    /// `(measured, closed form)` per diagonal entry.
    pub diagonal: Vec<(f64, f64)>,
}

impl GramReport {
    /// Largest `|measured - closed| / closed` over the diagonal.
    pub fn max_diag_rel_err(&self) -> f64 {
        self.diagonal.iter().map(|(m, c)| (m - c).abs() / c.abs()).fold(0.0, f64::max)
    }

    /// `measured / closed` per diagonal entry.
    pub fn ratios(&self) -> Vec<f64> {
        self.diagonal.iter().map(|(m, c)| m / c).collect()
    }

    pub fn to_json_value(&self) -> Value {
        let m = self.matrix.nrows();
        let matrix: Vec<f64> = (0..m).flat_map(|i| (0..m).map(move |k| (i, k))).map(|(i, k)| self.matrix[(i, k)]).collect();
        let diag: Vec<Value> = self
            .labels
            .iter()
            .zip(&self.diagonal)
            .map(|(&(n, j, nu), &(meas, closed))| json!([n, j, nu, meas, closed, meas / closed]))
            .collect();
        json!({
            "spec": self.spec.to_json_value(),
            "degree_range": [0, self.max_degree],
            "labels": self.labels.iter().map(|&(n, j, nu)| json!([n, j, nu])).collect::<Vec<_>>(),
            "matrix": matrix,
            "max_offdiag": self.max_offdiag,
            "diag_vs_closed_form": {
                "max_rel_err": self.max_diag_rel_err(),
                "entries": diag,
            },
        })
    }
}

/// Closed-form norm of `e` under `spec`.
pub fn closed_norm_for(spec: &InnerProductSpec, e: &BasisElement) -> f64 {
    e.closed_norm.at(spec.lambda())
}

/// Gram report for the basis family matching `spec`, degrees `0..=max_degree`.
pub fn gram_report(spec: &InnerProductSpec, max_degree: usize, path: Path) -> Result<GramReport> {
    let elems = basis_up_to(spec.basis_family(), max_degree, spec.d)?;
    let polys: Vec<MultiPoly> = elems.iter().map(|e| e.poly.clone()).collect();
    let matrix = gram_matrix(spec, &polys, path)?;
    let m = polys.len();
    let mut max_offdiag: f64 = 0.0;
    for i in 0..m {
        for k in 0..m {
            if i != k {
                max_offdiag = max_offdiag.max(matrix[(i, k)].abs());
            }
        }
    }
    let diagonal = elems.iter().enumerate().map(|(i, e)| (matrix[(i, i)], closed_norm_for(spec, e))).collect();
    Ok(GramReport {
        spec: *spec,
        max_degree,
        labels: elems.iter().map(|e| (e.n, e.j, e.nu)).collect(),
        matrix,
        max_offdiag,
        diagonal,
    })
}
