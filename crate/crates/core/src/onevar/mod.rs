//! One-variable special functions: Jacobi and Gegenbauer polynomials, the
//! Sobolev polynomials `q_k`, the operator `𝒥_β`, and Gauss–Jacobi rules.

mod gauss;
mod jacobi;
mod poly1;

pub use gauss::{gauss_jacobi_rule, gauss_jacobi_rule_cached, jacobi_weight_mass, GaussRule};
pub use jacobi::{
    apply_jbeta, chebyshev_t, gegenbauer_eval, jacobi_at_minus_one, jacobi_coeffs, jacobi_deriv,
    jacobi_eval, qk_coeffs, qk_eval, JacobiParams,
};
pub use poly1::Poly1;
