//! Model parameters, scaling constants and the moderate-deviation coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight parameter `t` and aspect ratio `gamma` of the `[gamma N] x N` grid.
///
/// Weights are geometric with `P(w = k) = (1 - t^2) t^(2k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    t: f64,
    gamma: f64,
}

impl ModelParams {
    pub fn new(t: f64, gamma: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!("t = {t} must lie in (0, 1)")));
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma = {gamma} must be >= 1")));
        }
        Ok(Self { t, gamma })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn scaling(&self) -> ScalingConstants {
        scaling_constants(self)
    }
}

/// Centering `a0`, fluctuation scale `b0` and curvature `c2` of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub a0: f64,
    pub b0: f64,
    pub c2: f64,
}

impl ScalingConstants {
    /// `c2 a0^3 b0^3`, which equals 1/4 for every valid parameter pair.
    pub fn identity_product(&self) -> f64 {
        self.c2 * self.a0.powi(3) * self.b0.powi(3)
    }
}

pub fn scaling_constants(params: &ModelParams) -> ScalingConstants {
    let t = params.t;
    let g = params.gamma;
    let sg = g.sqrt();
    let a0 = (1.0 - t * t) / (t * ((g + 1.0) * t + 2.0 * sg));
    let b0 = t.cbrt() * g.powf(-1.0 / 6.0) * (t + sg).powf(2.0 / 3.0) * (1.0 + t * sg).powf(2.0 / 3.0) / (1.0 - t * t);
    let c2 = t * t * (t + t * g + 2.0 * sg).powi(3) * sg / (4.0 * (1.0 + t * sg).powi(2) * (t + sg).powi(2));
    ScalingConstants { a0, b0, c2 }
}

/// Scaled position `x = (N/a0 - n) / (b0 N^(1/3))` of the level `n`.
///
/// Callers own the rounding of `n`.
pub fn md_coordinate(size: u64, n: i64, consts: &ScalingConstants) -> f64 {
    let nf = size as f64;
    (nf / consts.a0 - n as f64) / (consts.b0 * nf.cbrt())
}

/// Inverse of [`md_coordinate`] before rounding: `N/a0 - x b0 N^(1/3)`.
pub fn md_level(size: u64, x: f64, consts: &ScalingConstants) -> f64 {
    let nf = size as f64;
    nf / consts.a0 - x * consts.b0 * nf.cbrt()
}
