//! JSON matrix documents: `{"dims": [2, 2], "re": [[..], ..], "im": [[..], ..]}`.
//!
//! `re` and `im` are row-major nested lists of the same `n × n` shape with
//! `n = ∏ dims`. `im` may be omitted for real matrices.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, HermitianOp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixDoc {
    pub fn from_op(op: &HermitianOp) -> Self {
        let n = op.order();
        let m = op.matrix();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        Self {
            dims: op.dims().to_vec(),
            re,
            im: Some(im),
        }
    }

    pub fn to_op(&self) -> Result<HermitianOp> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::parse("dims must be a nonempty list of positive integers"));
        }
        let n = self
            .dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&n| n <= 4096)
            .ok_or_else(|| Error::parse("matrix order too large"))?;
        let check = |rows: &Vec<Vec<f64>>, what: &str| -> Result<()> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::parse(format!("{what} must be {n}x{n} for dims {:?}", self.dims)));
            }
            if rows.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::parse(format!("{what} has non-finite entries")));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        if let Some(im) = &self.im {
            check(im, "im")?;
        }
        let m = CMatrix::from_fn(n, n, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |im| im[i][j]);
            Complex64::new(self.re[i][j], im)
        });
        HermitianOp::new(self.dims.clone(), m).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Parse(m),
            other => other,
        })
    }
}

pub fn parse_matrix(text: &str) -> Result<HermitianOp> {
    let doc: MatrixDoc = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
    doc.to_op()
}

pub fn matrix_to_string(op: &HermitianOp) -> String {
    serde_json::to_string_pretty(&MatrixDoc::from_op(op)).expect("matrix document serialises")
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<HermitianOp> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(Error::Io)?;
    parse_matrix(&text).map_err(|e| e.context(path.display()))
}

pub fn write_matrix(path: impl AsRef<Path>, op: &HermitianOp) -> Result<()> {
    fs::write(path, matrix_to_string(op))?;
    Ok(())
}

/// Formats a float with 9 significant digits for CSV output.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}
