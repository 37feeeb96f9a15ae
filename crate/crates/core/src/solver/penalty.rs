use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Penalty of `(1/n)‖y − Xβ‖² + λ₁ Σ w_j |β_j| + λ₂ ‖β‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec<F> {
    pub lambda1: F,
    pub lambda2: F,
    /// Per-predictor ℓ1 multipliers; `None` means all ones.
    pub weights: Option<Vec<F>>,
    /// Mixing parameter when built from `(λ, α)`.
    pub alpha: Option<F>,
}

impl<F: Scalar> PenaltySpec<F> {
    pub fn lasso(lambda: F) -> Self {
        PenaltySpec {
            lambda1: lambda,
            lambda2: F::zero(),
            weights: None,
            alpha: Some(F::one()),
        }
    }

    pub fn weighted_lasso(lambda: F, weights: Vec<F>) -> Self {
        PenaltySpec {
            weights: Some(weights),
            ..Self::lasso(lambda)
        }
    }

    /// `λ₁ = λα`, `λ₂ = λ(1 − α)`.
    pub fn elastic_net(lambda: F, alpha: F) -> Self {
        PenaltySpec {
            lambda1: lambda * alpha,
            lambda2: lambda * (F::one() - alpha),
            weights: None,
            alpha: Some(alpha),
        }
    }

    pub fn from_l1_l2(lambda1: F, lambda2: F) -> Self {
        PenaltySpec {
            lambda1,
            lambda2,
            weights: None,
            alpha: None,
        }
    }

    /// `(λ, α)` recovered from `(λ₁, λ₂)`; `None` when both are zero.
    pub fn lambda_alpha(&self) -> Option<(F, F)> {
        let lambda = self.lambda1 + self.lambda2;
        if lambda == F::zero() {
            None
        } else {
            Some((lambda, self.lambda1 / lambda))
        }
    }

    #[inline]
    pub fn weight(&self, j: usize) -> F {
        self.weights.as_ref().map_or(F::one(), |w| w[j])
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        let ok = |v: F| v.is_finite() && v >= F::zero();
        if !ok(self.lambda1) || !ok(self.lambda2) {
            return Err(Error::InvalidConfig(format!(
                "penalties must be finite and non-negative (λ₁ = {}, λ₂ = {})",
                self.lambda1, self.lambda2
            )));
        }
        if let Some(a) = self.alpha {
            if !(a > F::zero() && a <= F::one()) {
                return Err(Error::InvalidConfig(format!("alpha {a} outside (0, 1]")));
            }
        }
        if let Some(w) = &self.weights {
            if w.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: w.len(),
                });
            }
            if w.iter().any(|&v| !ok(v)) {
                return Err(Error::InvalidConfig(
                    "weights must be finite and non-negative".into(),
                ));
            }
        }
        Ok(())
    }
}
