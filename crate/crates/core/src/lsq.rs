//! Least-squares refits on predictor subsets.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{sq_norm, PivotedQr};
use crate::model::Model;
use crate::scalar::Scalar;

/// Gram-matrix condition numbers above this are treated as singular.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit<F> {
    pub model: Model,
    pub coefficients: Vec<F>,
    pub mse: F,
}

fn gram_limit<F: Scalar>() -> F {
    // single precision cannot resolve 1e12; cap at the representable range
    let eps = F::epsilon().as_f64();
    F::lit(GRAM_CONDITION_LIMIT.min(1.0 / (100.0 * eps * eps)))
}

/// Ordinary least squares of `y` on the columns in `model`, no intercept
/// (the data are centered).
pub fn fit_least_squares<F: Scalar>(
    data: &Dataset<F>,
    model: &Model,
) -> Result<LeastSquaresFit<F>> {
    let n = data.n();
    let k = model.size();
    if let Some(&j) = model.indices().last() {
        if j >= data.p() {
            return Err(Error::InvalidInput(format!(
                "predictor index {j} out of range for p = {}",
                data.p()
            )));
        }
    }
    if k == 0 {
        return Ok(LeastSquaresFit {
            model: model.clone(),
            coefficients: Vec::new(),
            mse: sq_norm(data.y_slice()) / F::lit(n as f64),
        });
    }
    if k > n.saturating_sub(1) {
        return Err(Error::InvalidInput(format!(
            "model size {k} exceeds n - 1 = {}",
            n.saturating_sub(1)
        )));
    }
    let cols: Vec<&[F]> = model.indices().iter().map(|&j| data.col(j)).collect();
    let qr = PivotedQr::new(n, &cols);
    let cond = qr.condition_estimate();
    let gram_cond = cond * cond;
    if !(gram_cond <= gram_limit::<F>()) {
        return Err(Error::SingularGram {
            condition: gram_cond.as_f64(),
        });
    }
    let coefficients = qr.solve(data.y_slice());
    let mse = mse(data, model, &coefficients)?;
    Ok(LeastSquaresFit {
        model: model.clone(),
        coefficients,
        mse,
    })
}

/// `(1/n) ‖y − X_S β‖²`.
pub fn mse<F: Scalar>(data: &Dataset<F>, model: &Model, coefficients: &[F]) -> Result<F> {
    if coefficients.len() != model.size() {
        return Err(Error::DimensionMismatch {
            expected: model.size(),
            found: coefficients.len(),
        });
    }
    let mut resid = data.y_slice().to_vec();
    for (&j, &b) in model.indices().iter().zip(coefficients) {
        for (r, &x) in resid.iter_mut().zip(data.col(j)) {
            *r = *r - b * x;
        }
    }
    Ok(sq_norm(&resid) / F::lit(data.n() as f64))
}

/// MSE of the least-squares refit, or `+∞` when the Gram matrix is singular.
pub fn refit_mse<F: Scalar>(data: &Dataset<F>, model: &Model) -> Result<F> {
    match fit_least_squares(data, model) {
        Ok(fit) => Ok(fit.mse),
        Err(Error::SingularGram { .. }) => Ok(F::infinity()),
        Err(e) => Err(e),
    }
}
