//! Randomized approximations `f(x; z_n) = (1/n) Σ a_i Π_j w_ij φ(w_ij (x_j − y_ij))`
//! with coefficients fixed by a rule `a(y)` rather than fitted.

use crate::basis::{CenterScheme, Domain, RandomBasis};
use crate::error::{Error, Result};
use crate::kernels::NormalMixture;
use crate::quadrature::{adaptive_simpson, QuadratureConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxModel {
    basis: RandomBasis,
    coeffs: Vec<f64>,
    // ln(a_i / n), -inf where a_i = 0
    log_terms: Vec<f64>,
}

impl ApproxModel {
    pub fn new(basis: RandomBasis, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: coeffs.len(),
            });
        }
        if let Some(a) = coeffs.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return Err(Error::invalid(format!("coefficient {a} is not a nonnegative number")));
        }
        let ln_n = (basis.len() as f64).ln();
        let log_terms = coeffs.iter().map(|a| a.ln() - ln_n).collect();
        Ok(Self { basis, coeffs, log_terms })
    }

    pub fn basis(&self) -> &RandomBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `ln f(x; z_n)`. Returns `-inf` only when every coefficient is zero.
    pub fn log_eval(&self, x: &[f64]) -> Result<f64> {
        self.basis.check_point(x)?;
        Ok(self.basis.log_mixture_unchecked(&self.log_terms, x))
    }

    /// Scalar shortcut for one-dimensional models.
    pub fn log_eval_1d(&self, x: f64) -> f64 {
        debug_assert_eq!(self.basis.dim(), 1);
        self.basis.log_mixture_unchecked(&self.log_terms, &[x])
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.log_eval(x).map(f64::exp)
    }

    /// Rescale coefficients to `n · a_i / Σ a`, so the model integrates to 1 over ℝ^d.
    pub fn normalize(&self) -> Result<ApproxModel> {
        let total: f64 = self.coeffs.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        let n = self.coeffs.len() as f64;
        ApproxModel::new(self.basis.clone(), self.coeffs.iter().map(|a| n * a / total).collect())
    }
}

/// Mass of a one-dimensional target on `domain`, by adaptive quadrature.
pub fn target_mass(target: &NormalMixture, domain: &Domain, quad: &QuadratureConfig) -> Result<f64> {
    if domain.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: domain.dim(),
        });
    }
    Ok(adaptive_simpson(|x| target.density(x), domain.lo()[0], domain.hi()[0], quad)?.value)
}

/// Constant coefficients `a_i = c`, for centers drawn from `c⁻¹ f` on the domain.
pub fn coeffs_target_scheme(basis: RandomBasis, c: f64) -> Result<ApproxModel> {
    if basis.scheme() != CenterScheme::Target {
        return Err(Error::SchemeMismatch {
            expected: CenterScheme::Target,
            found: basis.scheme(),
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("target mass c must be positive, got {c}")));
    }
    let n = basis.len();
    ApproxModel::new(basis, vec![c; n])
}

/// Coefficients `a_i = β^d f(y_i)` for centers uniform on a hypercube of side `β`.
pub fn coeffs_uniform_scheme(basis: RandomBasis, target: &NormalMixture) -> Result<ApproxModel> {
    if basis.scheme() != CenterScheme::Uniform {
        return Err(Error::SchemeMismatch {
            expected: CenterScheme::Uniform,
            found: basis.scheme(),
        });
    }
    let beta = basis.domain().hypercube_side().ok_or(Error::NotHypercube)?;
    if basis.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: basis.dim(),
        });
    }
    let coeffs = basis.atoms().iter().map(|a| beta * target.density(a.y[0])).collect();
    ApproxModel::new(basis, coeffs)
}
