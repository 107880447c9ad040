use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

/// Coupling `λ` and power `σ` of `i u_t + Δu + λ|u|^σ u = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NlsParams {
    pub lambda: f64,
    pub sigma: f64,
}

impl NlsParams {
    pub fn new(lambda: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be positive and finite, got {sigma}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be finite, got {lambda}")));
        }
        Ok(NlsParams { lambda, sigma })
    }

    pub fn linear() -> Self {
        NlsParams { lambda: 0.0, sigma: 2.0 }
    }

    pub fn is_linear(&self) -> bool {
        self.lambda == 0.0
    }

    /// Classification of `σ` against the mass-critical power `4/d`.
    pub fn criticality(&self, dim: usize) -> Criticality {
        let critical = 4.0 / dim as f64;
        if (self.sigma - critical).abs() <= 1e-12 * critical {
            Criticality::Critical
        } else if self.sigma < critical {
            Criticality::Subcritical
        } else {
            Criticality::Supercritical
        }
    }

    /// Critical Sobolev order `s = d/2 - 2/σ`, clamped at 0.
    pub fn critical_order(&self, dim: usize) -> f64 {
        (dim as f64 / 2.0 - 2.0 / self.sigma).max(0.0)
    }
}

/// Couplings of the weakly coupled two-component system
/// `i u_t + Δu + k11|u|^{2p}u + k12|v|^{p+1}|u|^{p-1}u = 0` (and symmetrically for `v`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledParams {
    pub k11: f64,
    pub k12: f64,
    pub k22: f64,
    pub p: f64,
}

impl CoupledParams {
    pub fn new(k11: f64, k12: f64, k22: f64, p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("coupled power p must be >= 1, got {p}")));
        }
        Ok(CoupledParams { k11, k12, k22, p })
    }

    /// Single-equation parameters governing the first component when the second vanishes.
    pub fn first_component(&self) -> NlsParams {
        NlsParams { lambda: self.k11, sigma: 2.0 * self.p }
    }

    pub fn second_component(&self) -> NlsParams {
        NlsParams { lambda: self.k22, sigma: 2.0 * self.p }
    }
}
