//! Wire formats: exact-matrix input JSON, normal-form report JSON, and the
//! real-matrix input. Scalars travel as strings to stay exact.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classify::{Block2, NormalForm};
use crate::error::{ArithError, Result};
use crate::padic::{parse_scalar, PadicScalar, Prime};
use crate::reals::MatR;
use crate::symplin::{Mat, MatQ};

/// Input format for exact matrices:
/// {"p": 2, "precision": 64, "entries": [["1","2"],["2","1/3"]]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixInput {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    pub entries: Vec<Vec<String>>,
}

impl MatrixInput {
    pub fn parse(text: &str) -> Result<MatrixInput> {
        serde_json::from_str(text).map_err(|e| ArithError::Parse(e.to_string()))
    }

    pub fn to_matrix(&self) -> Result<(Prime, MatQ)> {
        let p = Prime::new(self.p)?;
        let dim = self.entries.len();
        if dim == 0 || self.entries.iter().any(|r| r.len() != dim) {
            return Err(ArithError::Parse("entries must form a square matrix".into()));
        }
        let mut e = Vec::with_capacity(dim * dim);
        for row in &self.entries {
            for s in row {
                e.push(parse_scalar(p, s)?);
            }
        }
        Ok((p, Mat::from_vec(dim, e)))
    }
}

/// Serialize an exact matrix back to the input format.
pub fn matrix_to_input(m: &MatQ) -> MatrixInput {
    MatrixInput {
        p: m.prime().get(),
        precision: None,
        entries: (0..m.dim)
            .map(|i| (0..m.dim).map(|j| m.at(i, j).to_string()).collect())
            .collect(),
    }
}

/// Input format for real matrices: {"entries": [[1.0, 0.0], [0.0, 1.0]]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealMatrixInput {
    pub entries: Vec<Vec<f64>>,
}

impl RealMatrixInput {
    pub fn parse(text: &str) -> Result<RealMatrixInput> {
        serde_json::from_str(text).map_err(|e| ArithError::Parse(e.to_string()))
    }

    pub fn to_matrix(&self) -> Result<MatR> {
        let dim = self.entries.len();
        if dim == 0 || self.entries.iter().any(|r| r.len() != dim) {
            return Err(ArithError::Parse("entries must form a square matrix".into()));
        }
        let mut e = Vec::with_capacity(dim * dim);
        for row in &self.entries {
            e.extend_from_slice(row);
        }
        Ok(MatR { dim, e })
    }
}

/// Normal-form report JSON, shaped like
/// {"dim":4,"case":3,"c":"3","t1":"1","t2":"1","a":"-1","b":"0","r":"...","s":"..."};
/// degenerate cases carry "case":"deg1".."deg4".
pub fn normal_form_to_json(nf: &NormalForm) -> Value {
    let s = |x: &PadicScalar| x.to_string();
    match nf {
        NormalForm::Dim2(b) => json!({"dim": 2, "c": s(&b.c), "r": s(&b.r)}),
        NormalForm::Dim4Case1 { b1, b2 } => json!({
            "dim": 4, "case": 1,
            "c1": s(&b1.c), "r": s(&b1.r),
            "c2": s(&b2.c), "s": s(&b2.r),
        }),
        NormalForm::Dim4Case2 { c, r, s: sv } => json!({
            "dim": 4, "case": 2, "c": s(c), "r": s(r), "s": s(sv),
        }),
        NormalForm::Dim4Case3 { c, t1, t2, a, b, r, s: sv } => json!({
            "dim": 4, "case": 3,
            "c": s(c), "t1": s(t1), "t2": s(t2),
            "a": s(a), "b": s(b), "r": s(r), "s": s(sv),
        }),
        NormalForm::Deg1 { b1, b2 } => json!({
            "dim": 4, "case": "deg1",
            "c1": s(&b1.c), "r": s(&b1.r),
            "c2": s(&b2.c), "s": s(&b2.r),
        }),
        NormalForm::Deg2 { r } => json!({"dim": 4, "case": "deg2", "r": s(r)}),
        NormalForm::Deg3 { c, r, a } => json!({
            "dim": 4, "case": "deg3", "c": s(c), "r": s(r), "a": s(a),
        }),
        NormalForm::Deg4 { c } => json!({"dim": 4, "case": "deg4", "c": s(c)}),
    }
}

/// Parse a normal-form report back; inverse of `normal_form_to_json`.
pub fn normal_form_from_json(p: Prime, v: &Value) -> Result<NormalForm> {
    let field = |name: &str| -> Result<PadicScalar> {
        let s = v
            .get(name)
            .and_then(Value::as_str)
            .ok_or_else(|| ArithError::Parse(format!("missing field {name:?}")))?;
        parse_scalar(p, s)
    };
    let dim = v
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| ArithError::Parse("missing dim".into()))?;
    if dim == 2 {
        return Ok(NormalForm::Dim2(Block2 {
            c: field("c")?,
            r: field("r")?,
        }));
    }
    match v.get("case") {
        Some(Value::Number(n)) if n.as_u64() == Some(1) => Ok(NormalForm::Dim4Case1 {
            b1: Block2 { c: field("c1")?, r: field("r")? },
            b2: Block2 { c: field("c2")?, r: field("s")? },
        }),
        Some(Value::Number(n)) if n.as_u64() == Some(2) => Ok(NormalForm::Dim4Case2 {
            c: field("c")?,
            r: field("r")?,
            s: field("s")?,
        }),
        Some(Value::Number(n)) if n.as_u64() == Some(3) => Ok(NormalForm::Dim4Case3 {
            c: field("c")?,
            t1: field("t1")?,
            t2: field("t2")?,
            a: field("a")?,
            b: field("b")?,
            r: field("r")?,
            s: field("s")?,
        }),
        Some(Value::String(tag)) => match tag.as_str() {
            "deg1" => Ok(NormalForm::Deg1 {
                b1: Block2 { c: field("c1")?, r: field("r")? },
                b2: Block2 { c: field("c2")?, r: field("s")? },
            }),
            "deg2" => Ok(NormalForm::Deg2 { r: field("r")? }),
            "deg3" => Ok(NormalForm::Deg3 {
                c: field("c")?,
                r: field("r")?,
                a: field("a")?,
            }),
            "deg4" => Ok(NormalForm::Deg4 { c: field("c")? }),
            other => Err(ArithError::Parse(format!("unknown case {other:?}"))),
        },
        _ => Err(ArithError::Parse("missing or malformed case".into())),
    }
}
