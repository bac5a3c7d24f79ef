//! JSON problem files.
//!
//! ```json
//! {"n": 2, "nb": 0, "format": "dense",
//!  "objective": {"supp": [[2,0],[0,2]], "coe": [1, 1]},
//!  "ineq": [{"supp": [[0,0],[2,0]], "coe": [1, -1]}],
//!  "eq": []}
//! ```
//!
//! With `"format": "index"` each support row lists variable indices
//! (1-based) with repetition, so `[1,1,2]` is `x1^2 x2` and `[]` is the
//! constant monomial. Constraints may also be given as one `"constraints"`
//! list whose last `"numeq"` entries are equalities.

use serde::{Deserialize, Serialize};

use super::{Exponent, Polynomial, PopInstance};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuppFormat {
    #[default]
    Dense,
    Index,
}

#[derive(Debug, Serialize, Deserialize)]
struct PolyRecord {
    supp: Vec<Vec<i64>>,
    coe: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PopRecord {
    n: usize,
    #[serde(default)]
    nb: usize,
    #[serde(default)]
    format: SuppFormat,
    objective: PolyRecord,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ineq: Vec<PolyRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    eq: Vec<PolyRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constraints: Option<Vec<PolyRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    numeq: Option<usize>,
}

fn exponent_from_row(row: &[i64], n: usize, format: SuppFormat, ctx: &str) -> Result<Exponent> {
    match format {
        SuppFormat::Dense => {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            let mut v = Vec::with_capacity(n);
            for &e in row {
                if e < 0 {
                    return Err(Error::NegativeExponent {
                        value: e,
                        context: ctx.to_string(),
                    });
                }
                let e = u32::try_from(e)
                    .map_err(|_| Error::InvalidProblem(format!("exponent {e} too large in {ctx}")))?;
                v.push(e);
            }
            Ok(Exponent::new(v))
        }
        SuppFormat::Index => {
            let mut v = vec![0u32; n];
            for &i in row {
                if i < 1 || i as usize > n {
                    return Err(Error::InvalidProblem(format!(
                        "variable index {i} out of range 1..={n} in {ctx}"
                    )));
                }
                v[i as usize - 1] += 1;
            }
            Ok(Exponent::new(v))
        }
    }
}

fn poly_from_record<T: Scalar>(
    rec: &PolyRecord,
    n: usize,
    format: SuppFormat,
    ctx: &str,
) -> Result<Polynomial<T>> {
    if rec.supp.len() != rec.coe.len() {
        return Err(Error::InvalidProblem(format!(
            "{ctx}: {} support rows but {} coefficients",
            rec.supp.len(),
            rec.coe.len()
        )));
    }
    let mut terms = Vec::with_capacity(rec.supp.len());
    for (row, &c) in rec.supp.iter().zip(&rec.coe) {
        terms.push((exponent_from_row(row, n, format, ctx)?, T::of(c)));
    }
    Polynomial::canonicalize(n, terms)
}

fn poly_to_record<T: Scalar>(p: &Polynomial<T>) -> PolyRecord {
    PolyRecord {
        supp: p
            .supp()
            .iter()
            .map(|a| a.entries().iter().map(|&e| e as i64).collect())
            .collect(),
        coe: p.coe().iter().map(|c| c.to_f64_lossy()).collect(),
    }
}

/// Parses a problem file into a canonical [`PopInstance`].
pub fn parse_pop<T: Scalar>(text: &str) -> Result<PopInstance<T>> {
    let rec: PopRecord = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    let n = rec.n;
    let fmt = rec.format;
    let objective = poly_from_record(&rec.objective, n, fmt, "objective")?;
    let mut ineqs = Vec::new();
    for (j, g) in rec.ineq.iter().enumerate() {
        ineqs.push(poly_from_record(g, n, fmt, &format!("ineq[{j}]"))?);
    }
    let mut eqs = Vec::new();
    for (j, h) in rec.eq.iter().enumerate() {
        eqs.push(poly_from_record(h, n, fmt, &format!("eq[{j}]"))?);
    }
    let mut numeq = 0;
    if let Some(list) = &rec.constraints {
        for (j, g) in list.iter().enumerate() {
            ineqs.push(poly_from_record(g, n, fmt, &format!("constraints[{j}]"))?);
        }
        numeq = rec.numeq.unwrap_or(0);
    } else if rec.numeq.is_some_and(|k| k > 0) {
        return Err(Error::InvalidProblem(
            "numeq is only meaningful together with a \"constraints\" list".into(),
        ));
    }
    PopInstance::new(n, rec.nb, objective, ineqs, eqs)?.split_trailing_equalities(numeq)
}

/// Serializes in the dense format; `parse_pop(&to_json(p))` returns `p` for
/// `f64` instances.
pub fn to_json<T: Scalar>(pop: &PopInstance<T>) -> String {
    let rec = PopRecord {
        n: pop.nvars(),
        nb: pop.nbinary(),
        format: SuppFormat::Dense,
        objective: poly_to_record(pop.objective()),
        ineq: pop.ineqs().iter().map(poly_to_record).collect(),
        eq: pop.eqs().iter().map(poly_to_record).collect(),
        constraints: None,
        numeq: None,
    };
    serde_json::to_string_pretty(&rec).expect("problem records always serialize")
}

pub fn read_pop<T: Scalar>(path: impl AsRef<std::path::Path>) -> Result<PopInstance<T>> {
    parse_pop(&std::fs::read_to_string(path)?)
}
