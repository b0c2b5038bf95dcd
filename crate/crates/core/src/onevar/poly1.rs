use std::ops::{Add, Mul, Sub};

/// Dense univariate polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly1(Vec<f64>);

impl Poly1 {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly1(coeffs)
    }

    pub fn constant(c: f64) -> Self {
        Poly1(vec![c])
    }

    /// The identity polynomial `s`.
    pub fn identity() -> Self {
        Poly1(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Poly1 {
        if self.0.len() <= 1 {
            return Poly1::constant(0.0);
        }
        Poly1::new(self.0.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    /// Antiderivative that vanishes at `a`.
    pub fn antiderivative_from(&self, a: f64) -> Poly1 {
        let mut c = Vec::with_capacity(self.0.len() + 1);
        c.push(0.0);
        c.extend(self.0.iter().enumerate().map(|(k, &v)| v / (k + 1) as f64));
        let mut p = Poly1::new(c);
        let at = p.eval(a);
        p.0[0] -= at;
        p
    }

    pub fn scale(&self, c: f64) -> Poly1 {
        Poly1::new(self.0.iter().map(|v| v * c).collect())
    }

    /// `q(a·t + b)` as a polynomial in `t`.
    pub fn compose_affine(&self, a: f64, b: f64) -> Poly1 {
        let lin = Poly1(vec![b, a]);
        let mut out = Poly1::constant(0.0);
        for &c in self.0.iter().rev() {
            out = &(&out * &lin) + &Poly1::constant(c);
        }
        out
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &Poly1 {
    type Output = Poly1;
    fn add(self, rhs: &Poly1) -> Poly1 {
        let n = self.0.len().max(rhs.0.len());
        Poly1::new(
            (0..n)
                .map(|k| self.0.get(k).copied().unwrap_or(0.0) + rhs.0.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }
}

impl Sub for &Poly1 {
    type Output = Poly1;
    fn sub(self, rhs: &Poly1) -> Poly1 {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Poly1 {
    type Output = Poly1;
    fn mul(self, rhs: &Poly1) -> Poly1 {
        let mut c = vec![0.0; self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly1::new(c)
    }
}
