use super::Poly1;
use crate::error::{Error, Result};
use crate::polyalg::moments::pochhammer;

/// Parameters `(α, β)` of the Jacobi weight `(1-s)^α (1+s)^β`.
///
/// `α = -1` is admitted for degrees `k >= 1`, where `P_k^{(-1,β)}` is defined
/// through the integrated form
/// `P_k^{(-1,β)}(s) = P_k^{(-1,β)}(-1) + ((k+β)/2) ∫_{-1}^s P_{k-1}^{(0,β+1)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiParams {
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        JacobiParams { alpha, beta }
    }

    pub fn validate(&self, degree: usize) -> Result<()> {
        if !(self.beta > -1.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!("Jacobi beta must exceed -1, got {}", self.beta)));
        }
        if self.alpha == -1.0 {
            if degree == 0 {
                return Err(Error::InvalidParameter(
                    "Jacobi alpha = -1 is defined only for degree >= 1".into(),
                ));
            }
            return Ok(());
        }
        if !(self.alpha > -1.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Jacobi alpha must exceed -1 (or equal -1 with degree >= 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Coefficients `(a1, a2, a3, a4)` of
/// `a1 P_n = (a2 + a3 s) P_{n-1} - a4 P_{n-2}` for `n >= 2`.
fn recurrence(n: usize, a: f64, b: f64) -> (f64, f64, f64, f64) {
    let n = n as f64;
    let c = 2.0 * n + a + b;
    (
        2.0 * n * (n + a + b) * (c - 2.0),
        (c - 1.0) * (a * a - b * b),
        (c - 2.0) * (c - 1.0) * c,
        2.0 * (n + a - 1.0) * (n + b - 1.0) * c,
    )
}

/// Value at `P_k^{(α,β)}(-1) = (-1)^k (β+1)_k / k!`.
pub fn jacobi_at_minus_one(k: usize, beta: f64) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * pochhammer(beta + 1.0, k) / pochhammer(1.0, k)
}

/// Coefficient vector of `P_j^{(α,β)}` in the variable `s`.
pub fn jacobi_coeffs(j: usize, params: JacobiParams) -> Result<Poly1> {
    params.validate(j)?;
    let JacobiParams { alpha: a, beta: b } = params;
    if a == -1.0 {
        let lower = jacobi_coeffs(j - 1, JacobiParams::new(0.0, b + 1.0))?;
        let integral = lower.antiderivative_from(-1.0).scale((j as f64 + b) / 2.0);
        return Ok(&integral + &Poly1::constant(jacobi_at_minus_one(j, b)));
    }
    let p0 = Poly1::constant(1.0);
    if j == 0 {
        return Ok(p0);
    }
    let p1 = Poly1::new(vec![(a - b) / 2.0, (a + b + 2.0) / 2.0]);
    let (mut prev, mut cur) = (p0, p1);
    for n in 2..=j {
        let (a1, a2, a3, a4) = recurrence(n, a, b);
        let lin = Poly1::new(vec![a2, a3]);
        let next = (&(&lin * &cur) - &prev.scale(a4)).scale(1.0 / a1);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `P_j^{(α,β)}(s)` by the three-term recurrence (or the integrated form when
/// `α = -1`).
pub fn jacobi_eval(j: usize, params: JacobiParams, s: f64) -> Result<f64> {
    params.validate(j)?;
    let JacobiParams { alpha: a, beta: b } = params;
    if a == -1.0 {
        return Ok(jacobi_coeffs(j, params)?.eval(s));
    }
    if j == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0;
    let mut cur = (a - b) / 2.0 + (a + b + 2.0) / 2.0 * s;
    for n in 2..=j {
        let (a1, a2, a3, a4) = recurrence(n, a, b);
        let next = ((a2 + a3 * s) * cur - a4 * prev) / a1;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `d/ds P_j^{(α,β)}(s) = ½ (j+α+β+1) P_{j-1}^{(α+1,β+1)}(s)`.
pub fn jacobi_deriv(j: usize, params: JacobiParams, s: f64) -> Result<f64> {
    params.validate(j)?;
    if j == 0 {
        return Ok(0.0);
    }
    let JacobiParams { alpha: a, beta: b } = params;
    let lower = jacobi_eval(j - 1, JacobiParams::new(a + 1.0, b + 1.0), s)?;
    Ok(0.5 * (j as f64 + a + b + 1.0) * lower)
}

/// Gegenbauer polynomial `C_n^λ(t)`.
pub fn gegenbauer_eval(n: usize, lambda: f64, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * lambda * t;
    for k in 2..=n {
        let k = k as f64;
        let next = (2.0 * t * (k + lambda - 1.0) * cur - (k + 2.0 * lambda - 2.0) * prev) / k;
        prev = cur;
        cur = next;
    }
    cur
}

/// Chebyshev polynomial of the first kind `T_n(t)`.
pub fn chebyshev_t(n: usize, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, t);
    for _ in 2..=n {
        let next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Coefficients of the one-variable Sobolev polynomial
/// `q_k(s) = ∫_{-1}^s P_{k-1}^{(0,d/2)}(t) dt`, written through
/// `q_k = 2/(k+(d-2)/2) · (P_k^{(-1,(d-2)/2)}(s) - (-1)^k (d/2)_k/k!)`.
pub fn qk_coeffs(k: usize, d: usize) -> Result<Poly1> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {d}")));
    }
    if k == 0 {
        return Ok(Poly1::constant(1.0));
    }
    let beta = (d as f64 - 2.0) / 2.0;
    let p = jacobi_coeffs(k, JacobiParams::new(-1.0, beta))?;
    let shifted = &p - &Poly1::constant(jacobi_at_minus_one(k, beta));
    Ok(shifted.scale(2.0 / (k as f64 + beta)))
}

pub fn qk_eval(k: usize, d: usize, x: f64) -> Result<f64> {
    Ok(qk_coeffs(k, d)?.eval(x))
}

/// `(𝒥_β q)(s) = (1-s^2) q''(s) + (β-1-(β+3)s) q'(s) - (β+1) q(s)`.
pub fn apply_jbeta(q: &Poly1, beta: f64) -> Poly1 {
    let d1 = q.derivative();
    let d2 = d1.derivative();
    let one_minus_s2 = Poly1::new(vec![1.0, 0.0, -1.0]);
    let lin = Poly1::new(vec![beta - 1.0, -(beta + 3.0)]);
    let t = &(&one_minus_s2 * &d2) + &(&lin * &d1);
    &t - &q.scale(beta + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Explicit sum `P_n^{(α,β)}(s) = Σ_k C(n+α, n-k) C(n+β, k) ((s-1)/2)^k ((s+1)/2)^{n-k}`,
    /// with generalised binomials; valid for α = -1 as well.
    fn explicit_sum(n: usize, a: f64, b: f64, s: f64) -> f64 {
        fn binom(top: f64, k: usize) -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (top - i as f64) / (i + 1) as f64)
        }
        (0..=n)
            .map(|k| {
                binom(n as f64 + a, n - k)
                    * binom(n as f64 + b, k)
                    * ((s - 1.0) / 2.0).powi(k as i32)
                    * ((s + 1.0) / 2.0).powi((n - k) as i32)
            })
            .sum()
    }

    #[test]
    fn degree_zero_is_one() {
        assert_eq!(jacobi_eval(0, JacobiParams::new(0.3, 1.5), 0.2).unwrap(), 1.0);
    }

    #[test]
    fn value_at_one_for_alpha_one() {
        for beta in [0.0, 0.5, 2.5] {
            for j in 1..=5 {
                let v = jacobi_eval(j - 1, JacobiParams::new(1.0, beta), 1.0).unwrap();
                assert!((v - j as f64).abs() < 1e-13, "j={j} beta={beta}");
            }
        }
    }

    #[test]
    fn alpha_minus_one_value_at_minus_one() {
        for beta in [0.0, 0.5, 1.0] {
            for k in 1..=4 {
                let v = jacobi_eval(k, JacobiParams::new(-1.0, beta), -1.0).unwrap();
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let want = sign * pochhammer(beta + 1.0, k) / pochhammer(1.0, k);
                assert!((v - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn recurrence_and_integrated_form_match_explicit_sum() {
        for &(a, b) in &[(0.0, 0.0), (1.0, 0.5), (2.0, 1.5), (0.0, 1.5), (-1.0, 0.0), (-1.0, 0.5)] {
            for n in 0..9 {
                if a == -1.0 && n == 0 {
                    continue;
                }
                for &s in &[-1.0, -0.7, 0.1, 0.55, 1.0] {
                    let got = jacobi_eval(n, JacobiParams::new(a, b), s).unwrap();
                    let coef = jacobi_coeffs(n, JacobiParams::new(a, b)).unwrap().eval(s);
                    let want = explicit_sum(n, a, b, s);
                    let scale = 1.0 + want.abs();
                    assert!((got - want).abs() < 1e-12 * scale, "n={n} a={a} b={b} s={s}");
                    assert!((coef - want).abs() < 1e-12 * scale, "n={n} a={a} b={b} s={s}");
                }
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(jacobi_eval(0, JacobiParams::new(-1.0, 0.0), 0.0).is_err());
        assert!(jacobi_eval(2, JacobiParams::new(-1.5, 0.0), 0.0).is_err());
        assert!(jacobi_eval(2, JacobiParams::new(0.0, -1.0), 0.0).is_err());
    }

    #[test]
    fn derivative_relation_for_alpha_minus_one() {
        // d/dx P_k^{(-1,(d-2)/2)} = ½ (k + (d-2)/2) P_{k-1}^{(0,d/2)}
        let xs: Vec<f64> = (0..20).map(|i| -0.95 + 1.9 * (i as f64 * 0.618_033_988_7).fract()).collect();
        for d in [2usize, 3] {
            let beta = (d as f64 - 2.0) / 2.0;
            for k in 1..=6 {
                let poly = jacobi_coeffs(k, JacobiParams::new(-1.0, beta)).unwrap().derivative();
                for &x in &xs {
                    let rhs = 0.5
                        * (k as f64 + beta)
                        * jacobi_eval(k - 1, JacobiParams::new(0.0, d as f64 / 2.0), x).unwrap();
                    let via_deriv = jacobi_deriv(k, JacobiParams::new(-1.0, beta), x).unwrap();
                    let scale = rhs.abs().max(1e-300);
                    assert!((poly.eval(x) - rhs).abs() <= 1e-12 * scale.max(1.0));
                    assert!((via_deriv - rhs).abs() <= 1e-12 * scale.max(1.0));
                }
            }
        }
    }

    #[test]
    fn derivative_examples() {
        for s in [-0.9, 0.0, 0.4] {
            assert!((jacobi_deriv(1, JacobiParams::new(0.0, 0.0), s).unwrap() - 1.0).abs() < 1e-15);
        }
        let h = 1e-6;
        for &(a, b) in &[(0.0, 1.5), (1.0, 0.5), (2.0, 2.5), (-1.0, 0.5)] {
            for j in 1..7 {
                for &s in &[-0.8, -0.2, 0.3, 0.75] {
                    let p = JacobiParams::new(a, b);
                    let fd = (jacobi_eval(j, p, s + h).unwrap() - jacobi_eval(j, p, s - h).unwrap()) / (2.0 * h);
                    let dv = jacobi_deriv(j, p, s).unwrap();
                    assert!((fd - dv).abs() < 1e-6, "j={j} a={a} b={b} s={s}: {fd} vs {dv}");
                }
            }
        }
    }

    #[test]
    fn gegenbauer_examples() {
        assert_eq!(gegenbauer_eval(0, 0.7, 0.3), 1.0);
        assert!((gegenbauer_eval(1, 0.7, 0.3) - 2.0 * 0.7 * 0.3).abs() < 1e-15);
        for lambda in [0.5, 1.0, 1.5, 2.25] {
            for n in 0..=6 {
                let want = pochhammer(2.0 * lambda, n) / pochhammer(1.0, n);
                assert!((gegenbauer_eval(n, lambda, 1.0) - want).abs() < 1e-12 * want);
            }
        }
        // λ = 1/2 gives Legendre = Jacobi(0,0)
        for n in 0..8 {
            for t in [-0.6, 0.2, 0.9] {
                let l = jacobi_eval(n, JacobiParams::new(0.0, 0.0), t).unwrap();
                assert!((gegenbauer_eval(n, 0.5, t) - l).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn chebyshev_is_cosine() {
        for n in 0..10 {
            for th in [0.1f64, 0.7, 2.0] {
                assert!((chebyshev_t(n, th.cos()) - (n as f64 * th).cos()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn qk_examples() {
        for d in [2usize, 3, 4] {
            assert_eq!(qk_eval(0, d, 0.3).unwrap(), 1.0);
            for k in 1..=5 {
                assert!(qk_eval(k, d, -1.0).unwrap().abs() < 1e-13, "k={k} d={d}");
            }
        }
    }

    #[test]
    fn jbeta_examples() {
        for beta in [0.0, 0.5, 3.5] {
            let c = apply_jbeta(&Poly1::constant(1.0), beta);
            assert_eq!(c, Poly1::constant(-(beta + 1.0)));
            let s = apply_jbeta(&Poly1::identity(), beta);
            assert_eq!(s, Poly1::new(vec![beta - 1.0, -(2.0 * beta + 4.0)]));
        }
        for beta in [0.0, 0.5, 1.5, 2.5] {
            for j in 1..=5 {
                let p = jacobi_coeffs(j - 1, JacobiParams::new(1.0, beta)).unwrap();
                let lhs = apply_jbeta(&p, beta);
                let rhs = p.scale(-(j as f64) * (j as f64 + beta));
                let err = (&lhs - &rhs).max_abs_coef();
                assert!(err <= 1e-12 * rhs.max_abs_coef(), "j={j} beta={beta}");
            }
        }
    }

    #[test]
    fn jacobi_ode_residual() {
        // (1-s²)y'' - (1-β+(3+β)s)y' + (j-1)(j+β+1)y = 0 for y = P_{j-1}^{(1,β)}
        for beta in [0.0, 0.5, 2.0] {
            for j in 1..=6 {
                let y = jacobi_coeffs(j - 1, JacobiParams::new(1.0, beta)).unwrap();
                let (y1, y2) = (y.derivative(), y.derivative().derivative());
                for i in 0..20 {
                    let s = -0.97 + 1.94 * i as f64 / 19.0;
                    let r = (1.0 - s * s) * y2.eval(s) - (1.0 - beta + (3.0 + beta) * s) * y1.eval(s)
                        + ((j - 1) as f64) * (j as f64 + beta + 1.0) * y.eval(s);
                    assert!(r.abs() < 1e-10, "residual {r}");
                }
            }
        }
    }
}
