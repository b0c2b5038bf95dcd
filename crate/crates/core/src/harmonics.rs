//! Orthonormal bases of the homogeneous harmonic polynomials `ℋ_n^d` under the
//! normalised sphere measure `(1/ω_d) dω`, the zonal kernel, and the harmonic
//! projection `Y_n f`.
//!
//! A basis is seeded by the harmonic parts of the monomials `x^α` with
//! `|α| = n` and `α_1 ∈ {0, 1}` (these map bijectively onto `ℋ_n^d`), then
//! orthonormalised by Cholesky factorisation of the exact moment Gram matrix.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::onevar::{chebyshev_t, gegenbauer_eval};
use crate::polyalg::{homogeneous_exponents, sphere_pairing, MultiPoly};

/// `σ_n = C(n+d-1, d-1) - C(n+d-3, d-1)`.
pub fn dim_harmonic(n: usize, d: usize) -> usize {
    let all = binomial(n + d - 1, d - 1);
    if n >= 2 {
        all - binomial(n + d - 3, d - 1)
    } else {
        all
    }
}

/// Dimension of the polynomials of degree exactly `n` modulo lower degree,
/// `C(n+d-1, d-1)`.
pub fn dim_homogeneous(n: usize, d: usize) -> usize {
    binomial(n + d - 1, d - 1)
}

fn binomial(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut r: u128 = 1;
    for i in 0..b {
        r = r * (a - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    pub d: usize,
    pub n: usize,
    pub elements: Vec<MultiPoly>,
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `⟨f, Y_ν⟩ = (1/ω_d) ∫_S f Y_ν dω` for every `ν`.
    pub fn coefficients(&self, f: &MultiPoly) -> Result<Vec<f64>> {
        crate::error::check_dim(self.d, f.dim())?;
        Ok(self.elements.iter().map(|y| sphere_pairing(f, y)).collect())
    }

    /// JSON with one entry per element, `ν` counted from 1.
    pub fn to_json_value(&self) -> Value {
        let elems: Vec<Value> = self
            .elements
            .iter()
            .enumerate()
            .map(|(i, y)| json!({"d": self.d, "n": self.n, "nu": i + 1, "poly": y.to_json_value()}))
            .collect();
        Value::Array(elems)
    }

    pub fn from_json_value(v: &Value) -> Result<HarmonicBasis> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("harmonic basis must be a JSON array".into()))?;
        let mut elements = Vec::with_capacity(arr.len());
        let (mut d, mut n) = (0, 0);
        for e in arr {
            let get = |k: &str| {
                e.get(k)
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Parse(format!("missing integer field `{k}`")))
            };
            d = get("d")? as usize;
            n = get("n")? as usize;
            let p = e.get("poly").ok_or_else(|| Error::Parse("missing field `poly`".into()))?;
            elements.push(MultiPoly::from_json_value(p)?);
        }
        Ok(HarmonicBasis { d, n, elements })
    }
}

/// Harmonic component of a homogeneous polynomial of degree `n`:
/// `Σ_k (-1)^k ‖x‖^{2k} Δ^k p / (4^k k! Π_{i=1..k} (n + d/2 - 1 - i))`.
pub fn harmonic_part(p: &MultiPoly, n: usize) -> MultiPoly {
    let d = p.dim();
    let r2 = MultiPoly::norm_squared(d);
    let mut out = p.clone();
    let mut lap = p.clone();
    let mut rpow = MultiPoly::one(d);
    let mut c = 1.0;
    for k in 1..=n / 2 {
        lap = lap.laplacian();
        if lap.is_zero() {
            break;
        }
        rpow = &rpow * &r2;
        c *= -1.0 / (4.0 * k as f64 * (n as f64 + d as f64 / 2.0 - 1.0 - k as f64));
        out = &out + &(&rpow * &lap).scale(c);
    }
    out
}

fn seed_polynomials(n: usize, d: usize) -> Vec<MultiPoly> {
    homogeneous_exponents(d, n as u32)
        .into_iter()
        .filter(|e| e.as_slice()[0] <= 1)
        .map(|e| harmonic_part(&MultiPoly::monomial(e, 1.0), n))
        .collect()
}

/// Replaces `polys` by `L^{-1} polys` where `G = L L^T` is their sphere Gram.
fn cholesky_orthonormalize(polys: &[MultiPoly]) -> Result<Vec<MultiPoly>> {
    let m = polys.len();
    let g = DMatrix::from_fn(m, m, |i, j| sphere_pairing(&polys[i], &polys[j]));
    let chol = g
        .cholesky()
        .ok_or_else(|| Error::Numerical("harmonic Gram matrix is not positive definite".into()))?;
    let linv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(m, m))
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let d = polys.first().map_or(2, MultiPoly::dim);
    Ok((0..m)
        .map(|i| {
            let mut y = MultiPoly::zero(d);
            for (k, p) in polys.iter().enumerate().take(i + 1) {
                y.add_scaled(p, linv[(i, k)]).expect("same dimension");
            }
            y
        })
        .collect())
}

fn build_basis(n: usize, d: usize) -> Result<HarmonicBasis> {
    let seeds = seed_polynomials(n, d);
    // second pass removes the rounding left by the first
    let once = cholesky_orthonormalize(&seeds)?;
    let scale = once.iter().map(MultiPoly::max_abs_coef).fold(0.0, f64::max);
    let elements = cholesky_orthonormalize(&once)?
        .into_iter()
        .map(|y| y.pruned(1e-15 * scale))
        .collect::<Vec<_>>();
    if elements.len() != dim_harmonic(n, d) {
        return Err(Error::Numerical(format!(
            "harmonic basis has {} elements, expected {}",
            elements.len(),
            dim_harmonic(n, d)
        )));
    }
    Ok(HarmonicBasis { d, n, elements })
}

type BasisCache = RwLock<HashMap<(usize, usize), Arc<HarmonicBasis>>>;

fn cache() -> &'static BasisCache {
    static CACHE: OnceLock<BasisCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn disk_dir() -> &'static RwLock<Option<PathBuf>> {
    static DIR: OnceLock<RwLock<Option<PathBuf>>> = OnceLock::new();
    DIR.get_or_init(Default::default)
}

/// Directory for persisted bases; `None` keeps them in memory only.
pub fn set_cache_dir(dir: Option<PathBuf>) {
    *disk_dir().write().unwrap() = dir;
}

fn disk_file(dir: &Path, n: usize, d: usize) -> PathBuf {
    dir.join(format!("harmonic_d{d}_n{n}.json"))
}

fn load_from_disk(n: usize, d: usize) -> Option<HarmonicBasis> {
    let dir = disk_dir().read().unwrap().clone()?;
    let text = std::fs::read_to_string(disk_file(&dir, n, d)).ok()?;
    let v: Value = serde_json::from_str(&text).ok()?;
    let b = HarmonicBasis::from_json_value(&v).ok()?;
    (b.d == d && b.n == n && b.len() == dim_harmonic(n, d)).then_some(b)
}

fn store_on_disk(b: &HarmonicBasis) {
    let Some(dir) = disk_dir().read().unwrap().clone() else { return };
    if std::fs::create_dir_all(&dir).is_err() {
        return;
    }
    // write then rename so concurrent readers never see a partial file
    let path = disk_file(&dir, b.n, b.d);
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    if std::fs::write(&tmp, b.to_json_value().to_string()).is_ok() {
        let _ = std::fs::rename(&tmp, &path);
    }
}

/// Orthonormal basis of `ℋ_n^d`; cached per `(n, d)`.
pub fn harmonic_basis(n: usize, d: usize) -> Result<Arc<HarmonicBasis>> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {d}")));
    }
    if let Some(b) = cache().read().unwrap().get(&(n, d)) {
        return Ok(b.clone());
    }
    let basis = match load_from_disk(n, d) {
        Some(b) => b,
        None => {
            let b = build_basis(n, d)?;
            store_on_disk(&b);
            b
        }
    };
    Ok(cache().write().unwrap().entry((n, d)).or_insert(Arc::new(basis)).clone())
}

/// `Σ_ν Y_ν^n(x) Y_ν^n(y) = ‖x‖^n ((n+β)/β) C_n^β(x'·y)`, `β = (d-2)/2`; for
/// `d = 2` the limit `2 T_n(x'·y)` (and 1 at `n = 0`).
pub fn zonal_kernel(n: usize, d: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    crate::error::check_dim(d, x.len())?;
    crate::error::check_dim(d, y.len())?;
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (ny - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("y must lie on the unit sphere, |y| = {ny}")));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Ok(0.0);
    }
    let t = (x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / r).clamp(-1.0, 1.0);
    let angular = if d == 2 {
        2.0 * chebyshev_t(n, t)
    } else {
        let b = (d as f64 - 2.0) / 2.0;
        (n as f64 + b) / b * gegenbauer_eval(n, b, t)
    };
    Ok(r.powi(n as i32) * angular)
}

/// `Y_n f = Σ_ν ⟨f, Y_ν^n⟩ Y_ν^n`, the harmonic component of degree `n` of
/// `f` restricted to the sphere.
pub fn project_yn(f: &MultiPoly, n: usize, d: usize) -> Result<MultiPoly> {
    let basis = harmonic_basis(n, d)?;
    let coefs = basis.coefficients(f)?;
    let mut out = MultiPoly::zero(d);
    for (c, y) in coefs.iter().zip(&basis.elements) {
        out.add_scaled(y, *c)?;
    }
    Ok(out)
}
