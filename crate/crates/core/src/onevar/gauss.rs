use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::polyalg::moments::gamma_fn;

/// Gauss rule on `[-1, 1]` for the weight `(1-t)^α (1+t)^β`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Highest polynomial degree integrated exactly, `2m - 1`.
    pub exactness_degree: usize,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Recurrence coefficients of the orthonormal Jacobi polynomials:
/// `s p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}`.
fn jacobi_matrix_entries(k: usize, alpha: f64, beta: f64) -> (f64, f64) {
    let ab = alpha + beta;
    let kf = k as f64;
    let a = if k == 0 {
        (beta - alpha) / (ab + 2.0)
    } else {
        (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
    };
    // b_k for k >= 1; b_0 is unused
    let b = match k {
        0 => 0.0,
        1 => (4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt(),
        _ => {
            let c = 2.0 * kf + ab;
            (4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (c * c * (c + 1.0) * (c - 1.0))).sqrt()
        }
    };
    (a, b)
}

/// Total mass `∫_{-1}^1 (1-t)^α (1+t)^β dt`.
pub fn jacobi_weight_mass(alpha: f64, beta: f64) -> f64 {
    if alpha + beta + 2.0 < 150.0 {
        return 2f64.powf(alpha + beta + 1.0) * gamma_fn(alpha + 1.0) * gamma_fn(beta + 1.0)
            / gamma_fn(alpha + beta + 2.0);
    }
    ((alpha + beta + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(alpha + beta + 2.0))
        .exp()
}

/// `m`-point Gauss–Jacobi rule.
///
/// Nodes start from the eigenvalues of the symmetric Jacobi matrix, are
/// polished by Newton steps on the orthonormal recurrence, and weights come
/// from the Christoffel function `1 / Σ_{k<m} p_k(t)^2`.
pub fn gauss_jacobi_rule(m: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    if m == 0 {
        return Err(Error::InvalidParameter("Gauss rule needs at least one node".into()));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "Gauss-Jacobi parameters must exceed -1, got ({alpha}, {beta})"
        )));
    }
    let coeffs: Vec<(f64, f64)> = (0..=m).map(|k| jacobi_matrix_entries(k, alpha, beta)).collect();
    let mass = jacobi_weight_mass(alpha, beta);

    let mut jm = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        jm[(k, k)] = coeffs[k].0;
        if k + 1 < m {
            let b = coeffs[k + 1].1;
            jm[(k, k + 1)] = b;
            jm[(k + 1, k)] = b;
        }
    }
    let eig = SymmetricEigen::try_new(jm, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical(format!("Jacobi matrix eigensolve did not converge (m = {m})")))?;
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // p_0 .. p_m and p_m' at t
    let p0 = 1.0 / mass.sqrt();
    let eval = |t: f64| -> (f64, f64, f64) {
        let (mut pm1, mut p) = (0.0, p0);
        let (mut dm1, mut dp) = (0.0, 0.0);
        let mut christoffel = p * p;
        for k in 0..m {
            let (a, bk) = coeffs[k];
            let bnext = coeffs[k + 1].1;
            let pn = ((t - a) * p - bk * pm1) / bnext;
            let dn = (p + (t - a) * dp - bk * dm1) / bnext;
            pm1 = p;
            p = pn;
            dm1 = dp;
            dp = dn;
            if k + 1 < m {
                christoffel += p * p;
            }
        }
        (p, dp, christoffel)
    };

    let mut weights = Vec::with_capacity(m);
    for t in nodes.iter_mut() {
        for _ in 0..4 {
            let (p, dp, _) = eval(*t);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            *t -= step;
            if step.abs() <= 1e-16 * t.abs().max(1e-3) {
                break;
            }
        }
        let (_, _, c) = eval(*t);
        weights.push(1.0 / c);
    }
    if nodes.iter().any(|t| !t.is_finite() || t.abs() >= 1.0) || weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Numerical(format!("Gauss-Jacobi rule degenerated (m = {m})")));
    }
    Ok(GaussRule { nodes, weights, alpha, beta, exactness_degree: 2 * m - 1 })
}

fn rule_cache() -> &'static RwLock<HashMap<(usize, u64, u64), Arc<GaussRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, u64, u64), Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Cached [`gauss_jacobi_rule`], keyed by `(m, α, β)` with exact float equality.
pub fn gauss_jacobi_rule_cached(m: usize, alpha: f64, beta: f64) -> Result<Arc<GaussRule>> {
    let key = (m, alpha.to_bits(), beta.to_bits());
    if let Some(r) = rule_cache().read().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(gauss_jacobi_rule(m, alpha, beta)?);
    Ok(rule_cache().write().unwrap().entry(key).or_insert(rule).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onevar::{jacobi_eval, JacobiParams};

    /// Moments `M_k = ∫_{-1}^1 t^k (1-t)^α (1+t)^β dt` from integrating
    /// `d/dt [t^k (1-t)^{α+1} (1+t)^{β+1}]` by parts:
    /// `(k+α+β+2) M_{k+1} = k M_{k-1} + (β-α) M_k`.
    fn moments(kmax: usize, alpha: f64, beta: f64) -> Vec<f64> {
        let mut m = vec![jacobi_weight_mass(alpha, beta)];
        for k in 0..kmax {
            let prev = if k == 0 { 0.0 } else { m[k - 1] };
            m.push((k as f64 * prev + (beta - alpha) * m[k]) / (k as f64 + alpha + beta + 2.0));
        }
        m
    }

    #[test]
    fn one_point_legendre() {
        let r = gauss_jacobi_rule(1, 0.0, 0.0).unwrap();
        assert!(r.nodes[0].abs() < 1e-16);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_legendre_integrates_t_squared() {
        let r = gauss_jacobi_rule(2, 0.0, 0.0).unwrap();
        assert!((r.integrate(|t| t * t) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn half_integer_power() {
        // ∫ (1+t)^{3/2} dt = 2^{5/2} / (5/2), through the weight itself
        let r = gauss_jacobi_rule(4, 0.0, 1.5).unwrap();
        let want = 2f64.powf(2.5) / 2.5;
        assert!((r.integrate(|_| 1.0) - want).abs() < 1e-14 * want);
    }

    #[test]
    fn moments_reproduced_to_exactness_degree() {
        for &(a, b) in &[(0.0, 0.0), (0.0, 1.0), (0.0, 1.5), (1.0, 0.5), (2.0, 2.5), (-0.5, -0.5), (0.5, 0.0)] {
            for m in 1..=12 {
                let r = gauss_jacobi_rule(m, a, b).unwrap();
                let mom = moments(r.exactness_degree, a, b);
                for k in 0..=r.exactness_degree {
                    let want = mom[k];
                    let got = r.integrate(|t| t.powi(k as i32));
                    // odd moments of symmetric weights vanish; measure those against the mass
                    let scale = if want == 0.0 { mom[0] } else { want.abs() };
                    assert!((got - want).abs() <= 1e-13 * scale, "m={m} k={k} a={a} b={b}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn orthogonality_under_rule() {
        let d = 3usize;
        let mut params = vec![(0.0, d as f64 / 2.0)];
        for n in 0..6usize {
            for j in 0..=n / 2 {
                let beta = (n - 2 * j) as f64 + (d as f64 - 2.0) / 2.0;
                params.push((1.0, beta));
                params.push((2.0, beta));
            }
        }
        for &(a, b) in &params {
            let r = gauss_jacobi_rule(9, a, b).unwrap();
            let p = JacobiParams::new(a, b);
            let diag: Vec<f64> = (0..=8)
                .map(|i| r.integrate(|t| jacobi_eval(i, p, t).unwrap().powi(2)))
                .collect();
            for i in 0..=8 {
                for k in 0..i {
                    let off = r.integrate(|t| jacobi_eval(i, p, t).unwrap() * jacobi_eval(k, p, t).unwrap());
                    assert!(off.abs() <= 1e-12 * (diag[i] * diag[k]).sqrt(), "i={i} k={k} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gauss_jacobi_rule(0, 0.0, 0.0).is_err());
        assert!(gauss_jacobi_rule(3, -1.0, 0.0).is_err());
    }

    #[test]
    fn cache_returns_same_rule() {
        let a = gauss_jacobi_rule_cached(5, 0.0, 0.5).unwrap();
        let b = gauss_jacobi_rule_cached(5, 0.0, 0.5).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
