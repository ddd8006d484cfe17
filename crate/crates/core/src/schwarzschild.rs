//! Exterior spatial Schwarzschild background `dr^2 / N^2 + r^2 dsigma^2`
//! on `S^2 x [r0, inf)`, geometric units (`G = c = 1`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative margin by which `r0` must exceed the horizon radius `2m`.
pub const HORIZON_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzschildBackground {
    m: f64,
    r0: f64,
}

impl SchwarzschildBackground {
    pub fn new(m: f64, r0: f64) -> Result<Self> {
        if !m.is_finite() || !r0.is_finite() {
            return Err(Error::InvalidBackground(format!(
                "non-finite m = {m} or r0 = {r0}"
            )));
        }
        if m >= 0.0 {
            if r0 <= 2.0 * m * (1.0 + HORIZON_MARGIN) || r0 <= 0.0 {
                return Err(Error::InvalidBackground(format!(
                    "r0 = {r0} must exceed the horizon 2m = {} by a relative margin {HORIZON_MARGIN}",
                    2.0 * m
                )));
            }
        } else if r0 <= 0.0 {
            return Err(Error::InvalidBackground(format!(
                "r0 = {r0} must be positive"
            )));
        }
        Ok(Self { m, r0 })
    }

    /// Euclidean background (`m = 0`).
    pub fn flat(r0: f64) -> Result<Self> {
        Self::new(0.0, r0)
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    fn check(&self, r: f64) -> Result<()> {
        if r.is_nan() || r < self.r0 {
            return Err(Error::OutOfDomain { r, r0: self.r0 });
        }
        Ok(())
    }

    /// `N(r) = sqrt(1 - 2m/r)`.
    pub fn lapse(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.lapse_unchecked(r))
    }

    /// `dN/dr = m / (r^2 N)`.
    pub fn lapse_derivative(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.m / (r * r * self.lapse_unchecked(r)))
    }

    /// Mean curvature of the coordinate sphere `{r}`: `H_S = 2N/r`.
    pub fn mean_curvature(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(2.0 * self.lapse_unchecked(r) / r)
    }

    pub(crate) fn lapse_unchecked(&self, r: f64) -> f64 {
        (1.0 - 2.0 * self.m / r).sqrt()
    }
}

/// Schwarzschild mass whose horizon has the given area: `m = R_H / 2`.
pub fn mass_from_horizon_area(area: f64) -> Result<f64> {
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::InvalidArea(area));
    }
    Ok((area / (16.0 * PI)).sqrt())
}

/// Area radius `R = sqrt(|Sigma| / 4 pi)`.
pub fn area_radius(area: f64) -> f64 {
    (area / (4.0 * PI)).sqrt()
}
