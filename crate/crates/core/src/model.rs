//! Parameters of a PDE instance and the regime thresholds derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::DriftVariant;

/// Order of the optional hyperviscous regularization `ε Λ^{1.75}`.
pub const REGULARIZATION_ORDER: f64 = 1.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Diffusion order, `0 < α <= 2`.
    pub alpha: f64,
    /// Order of the potential solve, `β > 0`.
    pub beta: f64,
    /// Chemosensitivity.
    pub chi: f64,
    /// Logistic growth rate.
    pub r: f64,
    /// Strength of the `ε Λ^{1.75}` term; `0` disables it.
    pub epsilon: f64,
    pub variant: DriftVariant,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 2.0,
            chi: 1.0,
            r: 1.0,
            epsilon: 0.0,
            variant: DriftVariant::Helmholtz,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::domain("alpha", self.alpha, "0 < alpha <= 2"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::domain("beta", self.beta, "beta > 0"));
        }
        if !(self.chi >= 0.0 && self.chi.is_finite()) {
            return Err(Error::domain("chi", self.chi, "chi >= 0"));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::domain("r", self.r, "r >= 0"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::domain("epsilon", self.epsilon, "epsilon >= 0"));
        }
        Ok(())
    }

    /// `min(r/(χ-r), 1)`, defined only when `χ > r`.
    pub fn s_defined(&self) -> Option<f64> {
        (self.chi > self.r).then(|| (self.r / (self.chi - self.r)).min(1.0))
    }

    /// Integrability exponent used for the `L^{1+s}` and `L^{2+s}` norms:
    /// [`Self::s_defined`] when available, else `1`.
    pub fn s_exponent(&self) -> f64 {
        self.s_defined().unwrap_or(1.0)
    }

    /// Strong threshold `max(1 - r/χ, 0)`; global classical solutions are
    /// expected for `α` above it.
    pub fn alpha_star_strong(&self) -> f64 {
        alpha_star_strong(self.chi, self.r)
    }

    /// Weak threshold `1 - min(r/(χ-r), 1)` when `r < χ/2`, else `0`.
    pub fn alpha_star_weak(&self) -> f64 {
        alpha_star_weak(self.chi, self.r)
    }
}

pub fn alpha_star_strong(chi: f64, r: f64) -> f64 {
    if chi <= 0.0 {
        return 0.0;
    }
    (1.0 - r / chi).max(0.0)
}

pub fn alpha_star_weak(chi: f64, r: f64) -> f64 {
    if r < chi / 2.0 {
        1.0 - (r / (chi - r)).min(1.0)
    } else {
        0.0
    }
}
