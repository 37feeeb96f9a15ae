//! Raw tables, standardized datasets and the mapping between them.

use ndarray::{Array1, Array2, ArrayView1, ShapeBuilder};

use crate::error::{Error, Result};
use crate::model::Model;
use crate::scalar::Scalar;

/// Predictor matrix, predictor names and response, on the original scale.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable<F> {
    pub values: Array2<F>,
    pub column_names: Vec<String>,
    pub response: Array1<F>,
}

impl<F: Scalar> RawTable<F> {
    pub fn new(values: Array2<F>, column_names: Vec<String>, response: Array1<F>) -> Result<Self> {
        let (n, p) = values.dim();
        if column_names.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: column_names.len(),
            });
        }
        if response.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: response.len(),
            });
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 rows, got {n}"
            )));
        }
        if p < 1 {
            return Err(Error::InvalidInput("need at least one predictor".into()));
        }
        if values.iter().chain(response.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(RawTable {
            values,
            column_names,
            response,
        })
    }

    /// Table with generated names `X1..Xp`.
    pub fn unnamed(values: Array2<F>, response: Array1<F>) -> Result<Self> {
        let names = (1..=values.ncols()).map(|j| format!("X{j}")).collect();
        Self::new(values, names, response)
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }
}

/// Divisor used for the column scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Unit sample variance, divisor `n - 1`.
    #[default]
    UnitVariance,
    /// Unit mean square, divisor `n`.
    UnitMeanSquare,
}

impl Normalization {
    fn divisor(self, n: usize) -> usize {
        match self {
            Normalization::UnitVariance => n - 1,
            Normalization::UnitMeanSquare => n,
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit-variance" | "n-1" => Ok(Normalization::UnitVariance),
            "unit-mean-square" | "n" => Ok(Normalization::UnitMeanSquare),
            other => Err(Error::InvalidConfig(format!(
                "unknown normalization {other:?}"
            ))),
        }
    }
}

/// Centered and scaled predictors with a centered response.
///
/// `x` is stored column-major so each predictor is a contiguous slice.
#[derive(Debug, Clone)]
pub struct Dataset<F> {
    x: Array2<F>,
    y: Array1<F>,
    x_means: Array1<F>,
    x_scales: Array1<F>,
    y_mean: F,
    column_names: Vec<String>,
}

/// Centers and scales `raw` with the default unit-variance normalization.
pub fn standardize<F: Scalar>(raw: &RawTable<F>) -> Result<Dataset<F>> {
    standardize_with(raw, Normalization::default())
}

pub fn standardize_with<F: Scalar>(raw: &RawTable<F>, norm: Normalization) -> Result<Dataset<F>> {
    let (n, p) = raw.values.dim();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 rows, got {n}"
        )));
    }
    if raw
        .values
        .iter()
        .chain(raw.response.iter())
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite);
    }
    let nf = F::lit(n as f64);
    let div = F::lit(norm.divisor(n) as f64);
    let mut x = Array2::<F>::zeros((n, p).f());
    let mut means = Array1::<F>::zeros(p);
    let mut scales = Array1::<F>::zeros(p);
    for j in 0..p {
        let col = raw.values.column(j);
        let mean = col.sum() / nf;
        let ss = col
            .iter()
            .map(|&v| (v - mean) * (v - mean))
            .fold(F::zero(), |a, b| a + b);
        let peak = col.iter().fold(F::zero(), |a, &v| a.max(v.abs()));
        // relative cutoff: a column whose spread is at rounding level is constant
        if ss <= (F::epsilon() * peak) * (F::epsilon() * peak) * nf {
            return Err(Error::ConstantColumn(j));
        }
        let scale = (ss / div).sqrt();
        means[j] = mean;
        scales[j] = scale;
        for i in 0..n {
            x[[i, j]] = (col[i] - mean) / scale;
        }
    }
    let y_mean = raw.response.sum() / nf;
    let y = raw.response.mapv(|v| v - y_mean);
    Ok(Dataset {
        x,
        y,
        x_means: means,
        x_scales: scales,
        y_mean,
        column_names: raw.column_names.clone(),
    })
}

impl<F: Scalar> Dataset<F> {
    /// Wraps data the caller has already prepared. No centering or scaling
    /// is applied and the stored constants are the identity map.
    pub fn from_prepared(x: Array2<F>, y: Array1<F>) -> Result<Self> {
        let (n, p) = x.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut xf = Array2::<F>::zeros((n, p).f());
        xf.assign(&x);
        Ok(Dataset {
            x: xf,
            y,
            x_means: Array1::zeros(p),
            x_scales: Array1::ones(p),
            y_mean: F::zero(),
            column_names: (1..=p).map(|j| format!("X{j}")).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<F> {
        &self.x
    }

    pub fn y(&self) -> &Array1<F> {
        &self.y
    }

    pub fn y_slice(&self) -> &[F] {
        self.y.as_slice().expect("response is contiguous")
    }

    /// Column `j` as a contiguous slice.
    pub fn col(&self, j: usize) -> &[F] {
        self.x
            .column(j)
            .to_slice()
            .expect("predictor matrix is column-major")
    }

    pub fn column_view(&self, j: usize) -> ArrayView1<'_, F> {
        self.x.column(j)
    }

    pub fn x_means(&self) -> &Array1<F> {
        &self.x_means
    }

    pub fn x_scales(&self) -> &Array1<F> {
        &self.x_scales
    }

    pub fn y_mean(&self) -> F {
        self.y_mean
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: names.len(),
            });
        }
        self.column_names = names;
        Ok(self)
    }

    /// Rows `rows` re-centered on their own means (no rescaling). Used for
    /// cross-validation training folds; returns the subset and the removed
    /// column means and response mean so held-out rows can be predicted.
    pub fn recentered_rows(&self, rows: &[usize]) -> (Dataset<F>, Array1<F>, F) {
        let p = self.p();
        let m = rows.len();
        let mf = F::lit(m as f64);
        let mut x = Array2::<F>::zeros((m, p).f());
        let mut means = Array1::<F>::zeros(p);
        for j in 0..p {
            let col = self.col(j);
            let mean = rows.iter().map(|&i| col[i]).fold(F::zero(), |a, b| a + b) / mf;
            means[j] = mean;
            let mut dst = x.column_mut(j);
            for (k, &i) in rows.iter().enumerate() {
                dst[k] = col[i] - mean;
            }
        }
        let y_mean = rows
            .iter()
            .map(|&i| self.y[i])
            .fold(F::zero(), |a, b| a + b)
            / mf;
        let y = rows
            .iter()
            .map(|&i| self.y[i] - y_mean)
            .collect::<Array1<F>>();
        let ds = Dataset {
            x,
            y,
            x_means: Array1::zeros(p),
            x_scales: Array1::ones(p),
            y_mean: F::zero(),
            column_names: self.column_names.clone(),
        };
        (ds, means, y_mean)
    }

    /// Dataset restricted to the listed predictor columns.
    pub fn select_columns(&self, cols: &[usize]) -> Dataset<F> {
        let n = self.n();
        let mut x = Array2::<F>::zeros((n, cols.len()).f());
        for (k, &j) in cols.iter().enumerate() {
            x.column_mut(k).assign(&self.x.column(j));
        }
        Dataset {
            x,
            y: self.y.clone(),
            x_means: cols.iter().map(|&j| self.x_means[j]).collect(),
            x_scales: cols.iter().map(|&j| self.x_scales[j]).collect(),
            y_mean: self.y_mean,
            column_names: cols.iter().map(|&j| self.column_names[j].clone()).collect(),
        }
    }

    /// Maps standardized coefficients of `model` to the raw scale.
    /// Returns the intercept and one slope per model index.
    pub fn raw_coefficients(&self, model: &Model, coefficients: &[F]) -> Result<(F, Vec<F>)> {
        if coefficients.len() != model.size() {
            return Err(Error::DimensionMismatch {
                expected: model.size(),
                found: coefficients.len(),
            });
        }
        let slopes: Vec<F> = model
            .indices()
            .iter()
            .zip(coefficients)
            .map(|(&j, &b)| b / self.x_scales[j])
            .collect();
        let shift = model
            .indices()
            .iter()
            .zip(&slopes)
            .fold(F::zero(), |a, (&j, &b)| a + b * self.x_means[j]);
        Ok((self.y_mean - shift, slopes))
    }

    /// Prediction on the standardized scale for a full-length coefficient vector.
    pub fn predict_full(&self, beta: &[F]) -> Array1<F> {
        let mut out = Array1::<F>::zeros(self.n());
        for (j, &b) in beta.iter().enumerate() {
            if b != F::zero() {
                out.scaled_add(b, &self.x.column(j));
            }
        }
        out
    }
}
