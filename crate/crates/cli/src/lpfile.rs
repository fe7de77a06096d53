//! LP problem files.
//!
//! A JSON object with `c` and optionally `A_ub`, `b_ub`, `A_eq`, `b_eq`
//! (row-major arrays) and `unbounded` (free variables instead of `x ≥ 0`).

use std::fmt;

use lpreach::GeneralLP;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpFile {
    pub c: Vec<f64>,
    #[serde(rename = "A_ub", default, skip_serializing_if = "Option::is_none")]
    pub a_ub: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_ub: Option<Vec<f64>>,
    #[serde(rename = "A_eq", default, skip_serializing_if = "Option::is_none")]
    pub a_eq: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_eq: Option<Vec<f64>>,
    #[serde(default)]
    pub unbounded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// 1-based; 0 when the error is not tied to a position.
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
        } else {
            f.write_str(&self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn unpositioned(message: String) -> ParseError {
    ParseError { line: 0, column: 0, message }
}

fn matrix(name: &str, rows: &[Vec<f64>], ncols: usize) -> Result<Array2<f64>, ParseError> {
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(unpositioned(format!(
            "{name} row {i} has {} entries, expected {ncols} (the length of c)",
            rows[i].len()
        )));
    }
    Ok(Array2::from_shape_fn((rows.len(), ncols), |(i, j)| rows[i][j]))
}

type Block = (Array2<f64>, Array1<f64>);

fn block(name: &str, a: &Option<Vec<Vec<f64>>>, b: &Option<Vec<f64>>, n: usize) -> Result<Option<Block>, ParseError> {
    match (a, b) {
        (None, None) => Ok(None),
        (Some(a), Some(b)) => {
            if a.len() != b.len() {
                return Err(unpositioned(format!("A_{name} has {} rows but b_{name} has {}", a.len(), b.len())));
            }
            Ok(Some((matrix(&format!("A_{name}"), a, n)?, Array1::from(b.clone()))))
        }
        _ => Err(unpositioned(format!("A_{name} and b_{name} must be given together"))),
    }
}

impl LpFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| {
            let mut message = e.to_string();
            // serde appends " at line L column C"; the position is reported separately
            if let Some(i) = message.rfind(" at line ") {
                message.truncate(i);
            }
            if message.contains("unknown field `bounds`") {
                message = "per-variable bounds are not supported; use `unbounded` for free variables, \
                           otherwise x ≥ 0"
                    .into();
            }
            ParseError { line: e.line(), column: e.column(), message }
        })
    }

    pub fn to_problem(&self) -> Result<GeneralLP, ParseError> {
        let n = self.c.len();
        if n == 0 {
            return Err(unpositioned("c is empty".into()));
        }
        let mut p = GeneralLP::new(Array1::from(self.c.clone())).free(self.unbounded);
        if let Some((a, b)) = block("ub", &self.a_ub, &self.b_ub, n)? {
            p = p.with_ub(a, b);
        }
        if let Some((a, b)) = block("eq", &self.a_eq, &self.b_eq, n)? {
            p = p.with_eq(a, b);
        }
        p.validate().map_err(|e| unpositioned(e.to_string()))?;
        Ok(p)
    }

    pub fn from_problem(p: &GeneralLP) -> Self {
        let rows = |a: &Array2<f64>| a.rows().into_iter().map(|r| r.to_vec()).collect::<Vec<_>>();
        let (a_ub, b_ub) = if p.m_ub() > 0 { (Some(rows(&p.a_ub)), Some(p.b_ub.to_vec())) } else { (None, None) };
        let (a_eq, b_eq) = if p.m_eq() > 0 { (Some(rows(&p.a_eq)), Some(p.b_eq.to_vec())) } else { (None, None) };
        Self { c: p.c.to_vec(), a_ub, b_ub, a_eq, b_eq, unbounded: p.unbounded }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("LP file serializes")
    }
}
