//! Closed-form and 1-D quadrature generators of surface data.
//!
//! Nothing here touches the sphere grid: spheroid integrals run on their own
//! Gauss rule along the meridian, and rotationally symmetric bodies are
//! evaluated from their radial profile. These serve as independent oracles
//! for the flow and the mass functionals.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{initial_state, FlowConfig};
use crate::masses::SurfaceData;
use crate::quadrature::gauss_legendre;
use crate::schwarzschild::{mass_from_horizon_area, SchwarzschildBackground};
use crate::sphere::{ScalarField, SphereGrid};

pub const DEFAULT_SPHEROID_NODES: usize = 512;

/// The coordinate sphere `{r = R}` of a Schwarzschild background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateSphereSpec {
    pub background: SchwarzschildBackground,
    pub radius: f64,
}

impl CoordinateSphereSpec {
    pub fn new(background: SchwarzschildBackground, radius: f64) -> Result<Self> {
        if radius < background.r0() || radius <= 2.0 * background.mass() {
            return Err(Error::OutOfDomain {
                r: radius,
                r0: background.r0().max(2.0 * background.mass()),
            });
        }
        Ok(Self { background, radius })
    }

    /// Sphere of radius `R` on the background with `r0 = R`.
    pub fn at(mass: f64, radius: f64) -> Result<Self> {
        Self::new(SchwarzschildBackground::new(mass, radius)?, radius)
    }
}

pub fn schwarzschild_sphere_data(spec: &CoordinateSphereSpec) -> Result<SurfaceData> {
    let r = spec.radius;
    let n2 = 1.0 - 2.0 * spec.background.mass() / r;
    SurfaceData::new(
        4.0 * PI * r * r,
        8.0 * PI * r * n2.sqrt(),
        Some(16.0 * PI * n2),
        Some(8.0 * PI * r),
        true,
    )
}

/// Meridian profile of a closed surface of revolution in Euclidean space,
/// parameterized by `t in [0, pi]` from the north to the south pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RevolutionSurface {
    /// Equatorial semi-axis `a`, polar semi-axis `c`.
    Spheroid { a: f64, c: f64 },
}

struct MeridianPoint {
    rho: f64,
    drho: f64,
    d2rho: f64,
    dz: f64,
    d2z: f64,
}

impl RevolutionSurface {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Spheroid { a, c } => {
                if !(a > 0.0 && c > 0.0) || !a.is_finite() || !c.is_finite() {
                    return Err(Error::InvalidSurface(format!(
                        "spheroid axes must be positive, got a = {a}, c = {c}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_round(&self) -> bool {
        match *self {
            Self::Spheroid { a, c } => a == c,
        }
    }

    fn point(&self, t: f64) -> MeridianPoint {
        match *self {
            Self::Spheroid { a, c } => {
                let (s, co) = t.sin_cos();
                MeridianPoint {
                    rho: a * s,
                    drho: a * co,
                    d2rho: -a * s,
                    dz: -c * s,
                    d2z: -c * co,
                }
            }
        }
    }

    /// Principal curvatures `(meridian, parallel)` w.r.t. the outward normal,
    /// the area element factor `rho |gamma'|`, and `rho |gamma'|` times the
    /// parallel curvature (regular at the poles).
    fn local(&self, t: f64) -> (f64, f64, f64, f64) {
        let p = self.point(t);
        let speed = p.drho.hypot(p.dz);
        let k_meridian = -(p.drho * p.d2z - p.d2rho * p.dz) / speed.powi(3);
        let k_parallel = -p.dz / (p.rho * speed);
        (k_meridian, k_parallel, p.rho * speed, -p.dz)
    }

    /// `(area, oint H, oint H^2, min principal curvature)` from an `n`-point
    /// Gauss rule along the meridian.
    pub fn integrals(&self, n: usize) -> Result<(f64, f64, f64, f64)> {
        self.validate()?;
        let (nodes, weights) = gauss_legendre(n);
        let half = 0.5 * PI;
        let (mut area, mut th, mut th2) = (0.0, 0.0, 0.0);
        let mut k_min = f64::INFINITY;
        for (x, w) in nodes.iter().zip(&weights) {
            let t = half * (x + 1.0);
            let (k1, k2, da, rho_k2) = self.local(t);
            let h = k1 + k2;
            area += w * da;
            th += w * (da * k1 + rho_k2);
            th2 += w * da * h * h;
            k_min = k_min.min(k1).min(k2);
        }
        let scale = 2.0 * PI * half;
        Ok((scale * area, scale * th, scale * th2, k_min))
    }
}

/// Surface data of a Euclidean spheroid. Its Euclidean embedding is
/// itself, so `oint H0 = oint H`.
pub fn spheroid_data(a: f64, c: f64, n_quad: usize) -> Result<SurfaceData> {
    let surface = RevolutionSurface::Spheroid { a, c };
    let (area, total_h, total_h2, k_min) = surface.integrals(n_quad)?;
    if k_min < 0.0 {
        return Err(Error::InvalidSurface(format!(
            "surface is not convex: principal curvature {k_min}"
        )));
    }
    SurfaceData::new(
        area,
        total_h,
        Some(total_h2),
        Some(total_h),
        surface.is_round(),
    )
}

/// `(oint H0)^2 / (16 pi |S|)`; at least one for convex Euclidean surfaces.
pub fn minkowski_ratio(s: &SurfaceData) -> Result<f64> {
    let h0 = s.total_h0.ok_or(Error::Unavailable("oint H0"))?;
    Ok(h0 * h0 / (16.0 * PI * s.area))
}

/// Radial profile of a rotationally symmetric body
/// `f(r)^{-1} dr^2 + r^2 dsigma^2` on `[R_H, R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyProfile {
    /// `f = 1 - R_H / r`.
    Schwarzschild,
    /// `f = (1 - R_H/r)(1 + eps (R - r)/(R - R_H))`. Leaves `f(R)` unchanged.
    Tilted { eps: f64 },
    /// `f = (1 - 2 eps)(1 - R_H/r)`, mass profile `R_H/2 + eps (r - R_H)`,
    /// scalar curvature `4 eps / r^2`.
    ScaledMass { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotSymBody {
    pub horizon_radius: f64,
    pub outer_radius: f64,
    pub profile: BodyProfile,
}

impl RotSymBody {
    pub fn new(horizon_radius: f64, outer_radius: f64, profile: BodyProfile) -> Result<Self> {
        if !(horizon_radius > 0.0) || !horizon_radius.is_finite() {
            return Err(Error::InvalidSurface(format!(
                "horizon radius {horizon_radius} must be positive"
            )));
        }
        if !(outer_radius > horizon_radius) || !outer_radius.is_finite() {
            return Err(Error::InvalidSurface(format!(
                "outer radius {outer_radius} must exceed the horizon radius {horizon_radius}"
            )));
        }
        match profile {
            BodyProfile::Schwarzschild => {}
            BodyProfile::Tilted { eps } if eps > -1.0 && eps.is_finite() => {}
            BodyProfile::ScaledMass { eps } if eps < 0.5 && eps.is_finite() => {}
            _ => {
                return Err(Error::InvalidSurface(format!(
                    "profile {profile:?} is not positive on (R_H, R]"
                )))
            }
        }
        Ok(Self {
            horizon_radius,
            outer_radius,
            profile,
        })
    }

    /// Schwarzschild annulus of mass `m` between its horizon and `R`.
    pub fn schwarzschild(mass: f64, outer_radius: f64) -> Result<Self> {
        Self::new(2.0 * mass, outer_radius, BodyProfile::Schwarzschild)
    }

    pub fn f(&self, r: f64) -> f64 {
        let (rh, big_r) = (self.horizon_radius, self.outer_radius);
        let base = 1.0 - rh / r;
        match self.profile {
            BodyProfile::Schwarzschild => base,
            BodyProfile::Tilted { eps } => base * (1.0 + eps * (big_r - r) / (big_r - rh)),
            BodyProfile::ScaledMass { eps } => (1.0 - 2.0 * eps) * base,
        }
    }

    /// `m(r) = (r/2)(1 - f(r))`.
    pub fn mass_profile(&self, r: f64) -> f64 {
        0.5 * r * (1.0 - self.f(r))
    }

    /// Scalar curvature `4 m'(r) / r^2`, with `m'` by finite differences of
    /// step `1e-5 (R - R_H)` (one-sided against the ends).
    pub fn scalar_curvature(&self, r: f64) -> f64 {
        let (lo, hi) = (self.horizon_radius, self.outer_radius);
        let h = 1e-5 * (hi - lo);
        let dm = if r - h < lo {
            (-3.0 * self.mass_profile(r) + 4.0 * self.mass_profile(r + h)
                - self.mass_profile(r + 2.0 * h))
                / (2.0 * h)
        } else if r + h > hi {
            (3.0 * self.mass_profile(r) - 4.0 * self.mass_profile(r - h)
                + self.mass_profile(r - 2.0 * h))
                / (2.0 * h)
        } else {
            (self.mass_profile(r + h) - self.mass_profile(r - h)) / (2.0 * h)
        };
        4.0 * dm / (r * r)
    }

    /// Minimum scalar curvature over `n` uniformly spaced radii in `[R_H, R]`.
    pub fn min_scalar_curvature(&self, n: usize) -> f64 {
        let (lo, hi) = (self.horizon_radius, self.outer_radius);
        (0..n.max(2))
            .map(|k| lo + (hi - lo) * k as f64 / (n.max(2) - 1) as f64)
            .map(|r| self.scalar_curvature(r))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn horizon_area(&self) -> f64 {
        4.0 * PI * self.horizon_radius * self.horizon_radius
    }

    /// Mean curvature of the outer sphere, `(2/R) sqrt(f(R))`.
    pub fn outer_mean_curvature(&self) -> f64 {
        2.0 * self.f(self.outer_radius).sqrt() / self.outer_radius
    }

    /// Schwarzschild exterior matched to the horizon area, `m = R_H / 2`,
    /// starting at `r0 = R`.
    pub fn exterior_background(&self) -> Result<SchwarzschildBackground> {
        SchwarzschildBackground::new(
            mass_from_horizon_area(self.horizon_area())?,
            self.outer_radius,
        )
    }

    /// Flow configuration whose boundary data is the body's outer mean
    /// curvature.
    pub fn exterior_flow(&self, grid: &Arc<SphereGrid>, r_max: f64) -> Result<FlowConfig> {
        let phi = ScalarField::constant(grid, self.outer_mean_curvature());
        FlowConfig::new(self.exterior_background()?, phi, r_max)
    }
}

pub fn rotsym_body_outer_data(body: &RotSymBody) -> Result<SurfaceData> {
    let r = body.outer_radius;
    let f = body.f(r);
    SurfaceData::new(
        4.0 * PI * r * r,
        8.0 * PI * r * f.sqrt(),
        Some(16.0 * PI * f),
        Some(8.0 * PI * r),
        true,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GluingMatch {
    /// `|4 pi R^2 - 4 pi r0^2|`.
    pub metric_match: f64,
    /// `sup |H_u(r0) - (2/R) sqrt(f(R))|`, `H_u = 2 / (r0 v)` from the flow's
    /// initial state.
    pub mean_curvature_match: f64,
}

pub fn gluing_match_check(body: &RotSymBody, config: &FlowConfig) -> Result<GluingMatch> {
    let bg = config.background();
    let m = mass_from_horizon_area(body.horizon_area())?;
    if (bg.mass() - m).abs() > 1e-12 * (1.0 + m) {
        return Err(Error::ConfigurationMismatch(format!(
            "exterior mass {} differs from the horizon mass {m}",
            bg.mass()
        )));
    }
    let r = body.outer_radius;
    if (bg.r0() - r).abs() > 1e-12 * r {
        return Err(Error::ConfigurationMismatch(format!(
            "exterior starts at r0 = {} but the body ends at R = {r}",
            bg.r0()
        )));
    }
    let metric_match = (4.0 * PI * r * r - 4.0 * PI * bg.r0() * bg.r0()).abs();
    let state = initial_state(config)?;
    let r0 = bg.r0();
    let h_body = body.outer_mean_curvature();
    let mean_curvature_match = state
        .v
        .values()
        .iter()
        .map(|v| (2.0 / (r0 * v) - h_body).abs())
        .fold(0.0, f64::max);
    Ok(GluingMatch {
        metric_match,
        mean_curvature_match,
    })
}
