//! Text and JSON encodings of [`MultiPoly`].
//!
//! Text: one term per line, `coef e1 e2 … ed`, whitespace separated. Blank
//! lines and `#` comments are ignored.
//!
//! JSON: `{"dim": d, "terms": [[[e1, …, ed], coef], …]}`.
//!
//! Coefficients are written with the shortest representation that parses
//! back to the same `f64`, and terms are emitted in ascending exponent order.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::{Exponent, MultiPoly};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct PolyJson {
    dim: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl MultiPoly {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (e, c) in self.terms() {
            write!(s, "{c:?}").unwrap();
            for k in e.as_slice() {
                write!(s, " {k}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Parses the text format. `dim` is required only when the input has no
    /// terms; otherwise it is inferred and, if given, checked.
    pub fn from_text(text: &str, dim: Option<usize>) -> Result<MultiPoly> {
        let mut terms = Vec::new();
        let mut found_dim = dim;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let coef_str = fields.next().unwrap();
            let coef: f64 = coef_str.parse().map_err(|_| {
                Error::Parse(format!("line {}: bad coefficient {coef_str:?}", lineno + 1))
            })?;
            let exps = fields
                .map(|f| {
                    f.parse::<u32>().map_err(|_| {
                        Error::Parse(format!("line {}: bad exponent {f:?}", lineno + 1))
                    })
                })
                .collect::<Result<Vec<u32>>>()?;
            match found_dim {
                None => found_dim = Some(exps.len()),
                Some(d) if d != exps.len() => {
                    return Err(Error::Parse(format!(
                        "line {}: expected {d} exponents, found {}",
                        lineno + 1,
                        exps.len()
                    )))
                }
                _ => {}
            }
            terms.push((Exponent::new(exps), coef));
        }
        let dim = found_dim
            .ok_or_else(|| Error::Parse("empty polynomial text needs an explicit dimension".into()))?;
        if dim == 0 {
            return Err(Error::Parse("polynomial dimension must be positive".into()));
        }
        MultiPoly::from_terms(dim, terms)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(PolyJson {
            dim: self.dim,
            terms: self.terms().map(|(e, c)| (e.as_slice().to_vec(), c)).collect(),
        })
        .expect("polynomial serialisation cannot fail")
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<MultiPoly> {
        let pj: PolyJson = serde_json::from_value(v.clone())?;
        if pj.dim == 0 {
            return Err(Error::Parse("polynomial dimension must be positive".into()));
        }
        for (e, _) in &pj.terms {
            if e.len() != pj.dim {
                return Err(Error::Parse(format!(
                    "exponent {e:?} does not have length {}",
                    pj.dim
                )));
            }
        }
        MultiPoly::from_terms(pj.dim, pj.terms.into_iter().map(|(e, c)| (Exponent::new(e), c)))
    }

    pub fn from_json(text: &str) -> Result<MultiPoly> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        Self::from_json_value(&v)
    }

    /// Accepts either encoding, choosing JSON when the first non-blank
    /// character is `{`.
    pub fn parse_any(text: &str, dim: Option<usize>) -> Result<MultiPoly> {
        let p = if text.trim_start().starts_with('{') {
            Self::from_json(text)?
        } else {
            Self::from_text(text, dim)?
        };
        if let Some(d) = dim {
            crate::error::check_dim(d, p.dim())?;
        }
        Ok(p)
    }
}
