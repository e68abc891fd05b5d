use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF};

use super::SlamError;

/// Squared Mahalanobis distance `nu^T S^-1 nu`, solved through a Cholesky
/// factor of `s`.
pub fn mahalanobis2(nu: &DVector<f64>, s: &DMatrix<f64>) -> Result<f64, SlamError> {
    if s.shape() != (nu.len(), nu.len()) {
        return Err(SlamError::Dimension(format!(
            "innovation {} against covariance {:?}",
            nu.len(),
            s.shape()
        )));
    }
    if nu.is_empty() {
        return Ok(0.0);
    }
    let chol = s.clone().cholesky().ok_or(SlamError::SingularInnovation)?;
    Ok(nu.dot(&chol.solve(nu)))
}

/// Value `q` with `P(chi2_dof <= q) = alpha`.
pub fn chi2_quantile(alpha: f64, dof: usize) -> Result<f64, SlamError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SlamError::BadAlpha(alpha));
    }
    if dof == 0 {
        return Err(SlamError::BadDof);
    }
    let dist = ChiSquared::new(dof as f64).map_err(|_| SlamError::BadDof)?;
    let mut q = dist.inverse_cdf(alpha);
    // polish with a few Newton steps on the cdf
    for _ in 0..4 {
        let pdf = dist.pdf(q);
        if pdf <= 0.0 || !pdf.is_finite() {
            break;
        }
        let next = q - (dist.cdf(q) - alpha) / pdf;
        if !(next > 0.0) || !next.is_finite() {
            break;
        }
        q = next;
    }
    Ok(q)
}
