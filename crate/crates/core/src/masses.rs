//! Quasi-local mass functionals of a closed surface and the inequalities
//! between them.
//!
//! All functionals consume integral data only: area `|S|`, `oint H`,
//! optionally `oint H^2` and `oint H0` where `H0` is the mean curvature of an
//! isometric embedding in Euclidean space.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schwarzschild::area_radius;

/// Slack below which an inequality verdict fails.
pub const VERDICT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceData {
    pub area: f64,
    #[serde(rename = "total_H")]
    pub total_h: f64,
    #[serde(rename = "total_H2")]
    pub total_h2: Option<f64>,
    #[serde(rename = "total_H0")]
    pub total_h0: Option<f64>,
    /// The surface is metrically a round sphere.
    pub round: bool,
}

impl SurfaceData {
    pub fn new(
        area: f64,
        total_h: f64,
        total_h2: Option<f64>,
        total_h0: Option<f64>,
        round: bool,
    ) -> Result<Self> {
        let s = Self {
            area,
            total_h,
            total_h2,
            total_h0,
            round,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.area > 0.0) || !self.area.is_finite() {
            return Err(Error::InvalidArea(self.area));
        }
        let finite = |x: Option<f64>| x.is_none_or(f64::is_finite);
        if !self.total_h.is_finite() || !finite(self.total_h2) || !finite(self.total_h0) {
            return Err(Error::InvalidSurface("non-finite integral".into()));
        }
        if let Some(h2) = self.total_h2 {
            if h2 < 0.0 {
                return Err(Error::InvalidSurface(format!(
                    "oint H^2 = {h2} is negative"
                )));
            }
        }
        if self.round {
            if let Some(h0) = self.total_h0 {
                let want = (16.0 * PI * self.area).sqrt();
                if (h0 - want).abs() > 1e-10 * want.max(1.0) {
                    return Err(Error::InvalidSurface(format!(
                        "round surface needs oint H0 = sqrt(16 pi |S|) = {want}, got {h0}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `sqrt(|S| / 16 pi)`, half the area radius.
    pub fn half_area_radius(&self) -> f64 {
        (self.area / (16.0 * PI)).sqrt()
    }

    pub fn area_radius(&self) -> f64 {
        area_radius(self.area)
    }

    fn h0(&self) -> Result<f64> {
        match self.total_h0 {
            Some(h0) if h0 > 0.0 => Ok(h0),
            _ => Err(Error::Unavailable("oint H0")),
        }
    }
}

/// `m(S) = sqrt(|S|/16pi) [1 - (oint H)^2 / (16 pi |S|)]`.
pub fn mass_m(s: &SurfaceData) -> f64 {
    s.half_area_radius() * (1.0 - s.total_h * s.total_h / (16.0 * PI * s.area))
}

/// Hawking mass `sqrt(|S|/16pi) [1 - oint H^2 / 16 pi]`.
pub fn mass_hawking(s: &SurfaceData) -> Result<f64> {
    let h2 = s.total_h2.ok_or(Error::Unavailable("oint H^2"))?;
    Ok(s.half_area_radius() * (1.0 - h2 / (16.0 * PI)))
}

fn bracket(s: &SurfaceData) -> Result<(f64, f64)> {
    let h0 = s.h0()?;
    let ratio = s.total_h / h0;
    Ok((h0, 1.0 - ratio * ratio))
}

/// `m1 = sqrt(|S|/16pi) [1 - (oint H / oint H0)^2]`.
pub fn mass_m1(s: &SurfaceData) -> Result<f64> {
    let (_, b) = bracket(s)?;
    Ok(s.half_area_radius() * b)
}

/// `m2 = (oint H0 / 16 pi) [1 - (oint H / oint H0)^2]`.
pub fn mass_m2(s: &SurfaceData) -> Result<f64> {
    let (h0, b) = bracket(s)?;
    Ok(h0 / (16.0 * PI) * b)
}

/// Brown–York mass `(oint H0 - oint H) / 8 pi`.
pub fn mass_brown_york(s: &SurfaceData) -> Result<f64> {
    let h0 = s.total_h0.ok_or(Error::Unavailable("oint H0"))?;
    Ok((h0 - s.total_h) / (8.0 * PI))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: &'static str,
    pub holds: bool,
    pub slack: f64,
    /// The inequality is only guaranteed under a hypothesis the caller did
    /// not assert.
    pub conditional: bool,
}

impl Verdict {
    fn new(name: &'static str, slack: f64, conditional: bool) -> Self {
        Self {
            name,
            holds: slack >= -VERDICT_TOLERANCE,
            slack,
            conditional,
        }
    }
}

pub const BY_GE_M2: &str = "m_BY >= m2";
pub const M2_GE_M1: &str = "m2 >= m1";
pub const M1_GE_0: &str = "m1 >= 0";
pub const M1_GE_MH: &str = "m1 >= m_H";
pub const M_GE_MH: &str = "m >= m_H";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassReport {
    pub m: Option<f64>,
    #[serde(rename = "m_H")]
    pub m_h: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    #[serde(rename = "m_BY")]
    pub m_by: Option<f64>,
    /// Caller asserts the surface bounds a nonnegative-scalar-curvature
    /// domain in which it has positive mean curvature.
    pub filling_hypothesis: bool,
    pub verdicts: Vec<Verdict>,
    pub absent_verdicts: Vec<&'static str>,
}

impl MassReport {
    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

/// Computes every available mass and the verdicts for
/// `m_BY >= m2 >= m1 >= m_H`, `m1 >= 0` and `m >= m_H`.
///
/// `m2 >= m1` and `m1 >= 0` are marked conditional unless
/// `filling_hypothesis` is set.
pub fn verify_chain(s: &SurfaceData, filling_hypothesis: bool) -> MassReport {
    let m = mass_m(s);
    let m_h = mass_hawking(s).ok();
    let m1 = mass_m1(s).ok();
    let m2 = mass_m2(s).ok();
    let m_by = mass_brown_york(s).ok();

    let mut verdicts = Vec::new();
    let mut absent = Vec::new();
    let mut push = |name, slack: Option<f64>, conditional| match slack {
        Some(x) => verdicts.push(Verdict::new(name, x, conditional)),
        None => absent.push(name),
    };
    push(BY_GE_M2, m_by.zip(m2).map(|(a, b)| a - b), false);
    push(
        M2_GE_M1,
        m2.zip(m1).map(|(a, b)| a - b),
        !filling_hypothesis,
    );
    push(M1_GE_0, m1, !filling_hypothesis);
    push(M1_GE_MH, m1.zip(m_h).map(|(a, b)| a - b), false);
    push(M_GE_MH, m_h.map(|h| m - h), false);

    MassReport {
        m: Some(m),
        m_h,
        m1,
        m2,
        m_by,
        filling_hypothesis,
        verdicts,
        absent_verdicts: absent,
    }
}

/// Gaps of the localized Penrose inequality for a round outer boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenroseGap {
    /// `m(S_O) - sqrt(|S_H| / 16 pi)`.
    pub gap_mass: f64,
    /// `8 pi R sqrt(1 - R_H / R) - oint H`.
    pub gap_equiv: f64,
}

pub fn localized_penrose_gap(outer: &SurfaceData, horizon_area: f64) -> Result<PenroseGap> {
    if !outer.round {
        return Err(Error::InvalidSurface(
            "outer boundary must be metrically round".into(),
        ));
    }
    if !(horizon_area > 0.0) {
        return Err(Error::InvalidArea(horizon_area));
    }
    if horizon_area >= outer.area {
        return Err(Error::InvalidSurface(format!(
            "horizon area {horizon_area} must be strictly below the outer area {}",
            outer.area
        )));
    }
    if !(outer.total_h > 0.0) {
        return Err(Error::InvalidSurface(format!(
            "outer boundary needs positive mean curvature, oint H = {}",
            outer.total_h
        )));
    }
    let r = outer.area_radius();
    let r_h = area_radius(horizon_area);
    let gap_mass = mass_m(outer) - (horizon_area / (16.0 * PI)).sqrt();
    let gap_equiv = 8.0 * PI * r * (1.0 - r_h / r).sqrt() - outer.total_h;
    Ok(PenroseGap {
        gap_mass,
        gap_equiv,
    })
}
