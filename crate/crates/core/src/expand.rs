//! Transformations and pairwise interactions of raw predictors.

use std::str::FromStr;

use ndarray::{Array2, Axis};

use crate::data::RawTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExpansionOptions {
    pub log: bool,
    pub sqrt: bool,
    pub square: bool,
    pub interactions: bool,
}

impl ExpansionOptions {
    pub fn all() -> Self {
        ExpansionOptions {
            log: true,
            sqrt: true,
            square: true,
            interactions: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

impl FromStr for ExpansionOptions {
    type Err = Error;

    /// Comma separated subset of `log,sqrt,square,interactions`.
    fn from_str(s: &str) -> Result<Self> {
        let mut o = ExpansionOptions::default();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok {
                "log" => o.log = true,
                "sqrt" => o.sqrt = true,
                "square" => o.square = true,
                "interactions" => o.interactions = true,
                other => {
                    return Err(Error::InvalidConfig(format!("unknown expansion {other:?}")));
                }
            }
        }
        Ok(o)
    }
}

/// Expanded table plus the transforms that could not be applied.
#[derive(Debug, Clone)]
pub struct Expansion<F> {
    pub table: RawTable<F>,
    pub skipped: Vec<String>,
}

/// Appends the requested transforms of every original column, then all
/// pairwise products of the original columns.
///
/// Output order: originals, `log(·)` block, `sqrt(·)` block, `(·)^2` block,
/// then `a×b` for `a < b` in column order. `log` and `sqrt` are applied only
/// to strictly positive columns.
pub fn expand_features<F: Scalar>(raw: &RawTable<F>, opts: ExpansionOptions) -> Expansion<F> {
    let p = raw.ncols();
    let names = &raw.column_names;
    let mut cols: Vec<ndarray::Array1<F>> =
        (0..p).map(|j| raw.values.column(j).to_owned()).collect();
    let mut out_names = names.clone();
    let mut skipped = Vec::new();

    let positive = |j: usize| raw.values.column(j).iter().all(|&v| v > F::zero());

    if opts.log {
        for j in 0..p {
            if positive(j) {
                cols.push(raw.values.column(j).mapv(|v| v.ln()));
                out_names.push(format!("log({})", names[j]));
            } else {
                skipped.push(format!("log({})", names[j]));
            }
        }
    }
    if opts.sqrt {
        for j in 0..p {
            if positive(j) {
                cols.push(raw.values.column(j).mapv(|v| v.sqrt()));
                out_names.push(format!("sqrt({})", names[j]));
            } else {
                skipped.push(format!("sqrt({})", names[j]));
            }
        }
    }
    if opts.square {
        for j in 0..p {
            cols.push(raw.values.column(j).mapv(|v| v * v));
            out_names.push(format!("{}^2", names[j]));
        }
    }
    if opts.interactions {
        for a in 0..p {
            for b in a + 1..p {
                cols.push(&raw.values.column(a) * &raw.values.column(b));
                out_names.push(format!("{}×{}", names[a], names[b]));
            }
        }
    }

    let views: Vec<_> = cols.iter().map(|c| c.view().insert_axis(Axis(1))).collect();
    let values: Array2<F> = ndarray::concatenate(Axis(1), &views).expect("columns share length");
    Expansion {
        table: RawTable {
            values,
            column_names: out_names,
            response: raw.response.clone(),
        },
        skipped,
    }
}
