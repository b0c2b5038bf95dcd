//! Closed-form monomial moments over the unit sphere and the unit ball.
//!
//! For an exponent vector `a` with every entry even,
//!
//! ```text
//! (1/ω_d) ∫_{S^{d-1}} x^a dω = Π_i (1/2)_{a_i/2} / (d/2)_{|a|/2}
//! ```
//!
//! and the moment vanishes as soon as one entry is odd. Ball moments follow
//! from the polar factorisation `∫_B = ∫_0^1 r^{d-1} ∫_S`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use statrs::function::gamma::{gamma, ln_gamma};

/// Largest Pochhammer index served from the direct table.
const TABLE_LEN: usize = 120;

fn half_pochhammer_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_LEN + 1);
        let mut acc = 1.0;
        t.push(acc);
        for k in 0..TABLE_LEN {
            acc *= 0.5 + k as f64;
            t.push(acc);
        }
        t
    })
}

/// Rising factorial `(a)_k`.
pub fn pochhammer(a: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (a + i as f64))
}

fn ln_pochhammer(a: f64, k: usize) -> f64 {
    ln_gamma(a + k as f64) - ln_gamma(a)
}

/// Γ(k/2) for a positive integer `k`, computed by the half-step recurrence.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0, "gamma_half needs a positive argument");
    let (mut acc, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = k as f64 / 2.0;
    while x < target {
        acc *= x;
        x += 1.0;
    }
    acc
}

/// Γ(x), using the half-step recurrence when `2x` is a small positive integer.
pub fn gamma_fn(x: f64) -> f64 {
    let twice = 2.0 * x;
    if x > 0.0 && twice.fract() == 0.0 && twice <= 340.0 {
        gamma_half(twice as usize)
    } else {
        gamma(x)
    }
}

/// Surface area of the unit sphere `S^{d-1}`: `2π^{d/2}/Γ(d/2)`.
pub fn omega(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// Volume of the unit ball `B^d`.
pub fn ball_volume(d: usize) -> f64 {
    omega(d) / d as f64
}

/// Normalised sphere moment `(1/ω_d) ∫ x^e dω` where the exponent of
/// coordinate `i` is `exp(i)` for `i < d`.
pub(crate) fn sphere_mean_with(d: usize, exp: impl Fn(usize) -> u32) -> f64 {
    let mut total = 0usize;
    let mut max_half = 0usize;
    for i in 0..d {
        let e = exp(i) as usize;
        if e % 2 == 1 {
            return 0.0;
        }
        total += e;
        max_half = max_half.max(e / 2);
    }
    let half_total = total / 2;
    let dh = d as f64 / 2.0;
    if max_half <= TABLE_LEN && half_total <= 150 {
        let table = half_pochhammer_table();
        let mut num = 1.0;
        for i in 0..d {
            num *= table[exp(i) as usize / 2];
        }
        num / pochhammer(dh, half_total)
    } else {
        let mut ln_num = 0.0;
        for i in 0..d {
            ln_num += ln_pochhammer(0.5, exp(i) as usize / 2);
        }
        (ln_num - ln_pochhammer(dh, half_total)).exp()
    }
}

/// `∫_0^1 r^{m+d-1} (1-r^2)^μ dr`, the radial factor of a weighted ball moment
/// of total degree `m`.
pub fn radial_weight_integral(m: usize, d: usize, mu: f64) -> f64 {
    let a = (m + d) as f64 / 2.0;
    if mu == 0.0 {
        return 1.0 / (m + d) as f64;
    }
    if mu > 0.0 && mu.fract() == 0.0 && mu <= 60.0 {
        // B(a, k+1) = k! / (a (a+1) ... (a+k))
        let k = mu as usize;
        let mut v = 1.0;
        for i in 0..=k {
            v *= if i == 0 { 1.0 / a } else { i as f64 / (a + i as f64) };
        }
        return 0.5 * v;
    }
    if a + mu + 1.0 < 150.0 {
        0.5 * gamma_fn(a) * gamma_fn(mu + 1.0) / gamma_fn(a + mu + 1.0)
    } else {
        0.5 * (ln_gamma(a) + ln_gamma(mu + 1.0) - ln_gamma(a + mu + 1.0)).exp()
    }
}

/// `∫_{S^{d-1}} x^α dω`.
pub fn sphere_moment(alpha: &[u32], d: usize) -> f64 {
    assert_eq!(alpha.len(), d, "exponent length must equal the dimension");
    omega(d) * sphere_mean_with(d, |i| alpha[i])
}

/// `∫_{B^d} x^α dx`.
pub fn ball_moment(alpha: &[u32], d: usize) -> f64 {
    let total: u32 = alpha.iter().sum();
    sphere_moment(alpha, d) / (total as usize + d) as f64
}

/// `∫_{B^d} x^α (1-‖x‖^2)^μ dx`.
pub fn weighted_ball_moment(alpha: &[u32], d: usize, mu: f64) -> f64 {
    let total: u32 = alpha.iter().sum();
    sphere_moment(alpha, d) * radial_weight_integral(total as usize, d, mu)
}

/// Normalising constant `c_μ` of `W_μ(x) = (1-‖x‖^2)^μ`, so that
/// `c_μ ∫_B W_μ = 1`.
pub fn weight_normalization(d: usize, mu: f64) -> f64 {
    1.0 / (omega(d) * radial_weight_integral(0, d, mu))
}
