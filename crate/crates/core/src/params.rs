//! Model parameters and the closed-form quantities that depend only on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts the shift fraction κ (relative to the shifted mean) into
/// λ = κ/(1−κ) (relative to the unshifted mean).
pub fn kappa_to_lambda(kappa: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::domain(format!("kappa must lie in [0, 1), got {kappa}")));
    }
    Ok(kappa / (1.0 - kappa))
}

/// Inverse of [`kappa_to_lambda`].
pub fn lambda_to_kappa(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    Ok(lambda / (1.0 + lambda))
}

/// θ = ⟨χ, ζ, κ⟩. λ is always derived from κ, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ParameterVector {
    chi: f64,
    zeta: f64,
    kappa: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    chi: f64,
    zeta: f64,
    kappa: f64,
    #[serde(default, skip_deserializing)]
    lambda: f64,
}

impl TryFrom<RawParams> for ParameterVector {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ParameterVector::new(raw.chi, raw.zeta, raw.kappa)
    }
}

impl From<ParameterVector> for RawParams {
    fn from(p: ParameterVector) -> Self {
        RawParams {
            chi: p.chi,
            zeta: p.zeta,
            kappa: p.kappa,
            lambda: p.lambda(),
        }
    }
}

impl ParameterVector {
    /// Validates χ > 0, ζ ≥ 0, 0 ≤ κ < 1 and χ > κζ.
    pub fn new(chi: f64, zeta: f64, kappa: f64) -> Result<Self> {
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::domain(format!("chi must be positive, got {chi}")));
        }
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(Error::domain(format!("zeta must be nonnegative, got {zeta}")));
        }
        if !(0.0..1.0).contains(&kappa) {
            return Err(Error::domain(format!("kappa must lie in [0, 1), got {kappa}")));
        }
        if chi <= kappa * zeta {
            return Err(Error::Infeasible(format!(
                "chi = {chi} must exceed kappa*zeta = {}",
                kappa * zeta
            )));
        }
        Ok(ParameterVector { chi, zeta, kappa })
    }

    pub fn eysm(chi: f64, zeta: f64) -> Result<Self> {
        Self::new(chi, zeta, 0.0)
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda(&self) -> f64 {
        self.kappa / (1.0 - self.kappa)
    }

    pub fn is_supercritical(&self) -> bool {
        self.zeta > self.chi
    }

    /// Lorenz value where the curve meets the right boundary f = 1.
    pub fn lorenz_terminal(&self) -> f64 {
        if self.is_supercritical() {
            let lambda = self.lambda();
            (1.0 + lambda) * self.chi / self.zeta - lambda
        } else {
            1.0
        }
    }

    /// Fraction of total wealth held by the oligarchy, (1+λ)(1 − χ/ζ); zero when subcritical.
    pub fn oligarchy_fraction(&self) -> f64 {
        if self.is_supercritical() {
            (1.0 + self.lambda()) * (1.0 - self.chi / self.zeta)
        } else {
            0.0
        }
    }
}

/// Free-function form of [`ParameterVector::oligarchy_fraction`].
pub fn oligarchy_fraction(theta: &ParameterVector) -> f64 {
    theta.oligarchy_fraction()
}
