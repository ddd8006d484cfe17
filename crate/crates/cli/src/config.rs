//! JSON run configurations. Unknown keys are rejected everywhere.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use qsflow::oracles::{
    rotsym_body_outer_data, schwarzschild_sphere_data, spheroid_data, DEFAULT_SPHEROID_NODES,
};
use qsflow::sphere::random_band_limited;
use qsflow::{
    BodyProfile, CoordinateSphereSpec, Error, FlowConfig, RotSymBody, ScalarField,
    SchwarzschildBackground, SphereGrid, SurfaceData,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, Result};

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema {
        path: path.to_owned(),
        detail: e.to_string(),
    })
}

/// Input of `qsflow flow`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowRunConfig {
    pub mass: f64,
    pub r0: f64,
    pub band_limit: usize,
    /// Defaults to `10^3 max(r0, 1)`.
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub step_safety: Option<f64>,
    /// Defaults to roughly 500 samples per run.
    #[serde(default)]
    pub sample_stride: Option<usize>,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    pub boundary: BoundaryData,
}

/// Prescribed mean curvature `phi` of the inner sphere. `base` defaults to
/// the Schwarzschild value `H_S(r0)`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryData {
    Schwarzschild,
    Constant {
        value: f64,
    },
    /// `base (1 + amplitude Y_lm / max|Y_lm|)`.
    HarmonicPerturbation {
        degree: usize,
        order: i64,
        amplitude: f64,
        #[serde(default)]
        base: Option<f64>,
    },
    /// `base (1 + amplitude n)` with `n` a random field on degrees
    /// `1..=max_degree`, scaled to `max|n| = 1`.
    Random {
        max_degree: usize,
        amplitude: f64,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        base: Option<f64>,
    },
}

impl BoundaryData {
    pub fn sample(
        &self,
        grid: &Arc<SphereGrid>,
        background: &SchwarzschildBackground,
        seed: Option<u64>,
    ) -> Result<ScalarField> {
        let h_s = background.mean_curvature(background.r0())?;
        let perturbed =
            |n: ScalarField, amplitude: f64, base: Option<f64>| -> Result<ScalarField> {
                let peak = n.norm_inf();
                if !(peak > 0.0) {
                    return Err(Error::InvalidBoundaryData(
                        "perturbation vanishes on the grid".into(),
                    )
                    .into());
                }
                Ok(n.scale(amplitude / peak)
                    .add_scalar(1.0)
                    .scale(base.unwrap_or(h_s)))
            };
        match *self {
            BoundaryData::Schwarzschild => Ok(ScalarField::constant(grid, h_s)),
            BoundaryData::Constant { value } => Ok(ScalarField::constant(grid, value)),
            BoundaryData::HarmonicPerturbation {
                degree,
                order,
                amplitude,
                base,
            } => {
                if order.unsigned_abs() as usize > degree {
                    return Err(Error::InvalidBoundaryData(format!(
                        "order {order} exceeds degree {degree}"
                    ))
                    .into());
                }
                perturbed(ScalarField::harmonic(grid, degree, order), amplitude, base)
            }
            BoundaryData::Random {
                max_degree,
                amplitude,
                seed: own_seed,
                base,
            } => {
                let seed = seed.or(own_seed).unwrap_or(0);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                perturbed(
                    random_band_limited(grid, 1, max_degree, &mut rng),
                    amplitude,
                    base,
                )
            }
        }
    }
}

impl FlowRunConfig {
    /// Builds the core configuration. `band_limit` and `seed` override the
    /// file's values when given.
    pub fn build(&self, band_limit: Option<usize>, seed: Option<u64>) -> Result<FlowConfig> {
        let background = SchwarzschildBackground::new(self.mass, self.r0)?;
        let grid = SphereGrid::with_band_limit(band_limit.unwrap_or(self.band_limit))?;
        let phi = self.boundary.sample(&grid, &background, seed)?;
        let r_max = self
            .r_max
            .unwrap_or_else(|| FlowConfig::default_r_max(&background));
        let mut config = FlowConfig::new(background, phi, r_max)?;
        if let Some(s) = self.step_safety {
            config = config.with_step_safety(s)?;
        }
        if let Some(s) = self.sample_stride {
            config = config.with_sample_stride(s)?;
        }
        if !self.checkpoints.is_empty() {
            config = config.with_checkpoints(self.checkpoints.clone())?;
        }
        Ok(config)
    }
}

/// Input of `qsflow masses`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassesRunConfig {
    pub surface: SurfaceSource,
    /// Asserts that the surface bounds a domain of nonnegative scalar
    /// curvature in which it has positive mean curvature.
    #[serde(default)]
    pub nonnegative_scalar_curvature_filling: bool,
    /// Area of an enclosed horizon; enables the localized Penrose gaps.
    /// Defaults to the body's horizon for `rotsym_body`.
    #[serde(default)]
    pub horizon_area: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSource {
    SchwarzschildSphere {
        mass: f64,
        radius: f64,
    },
    Spheroid {
        a: f64,
        c: f64,
        #[serde(default)]
        n_quad: Option<usize>,
    },
    RotsymBody {
        horizon_radius: f64,
        outer_radius: f64,
        #[serde(default)]
        profile: Option<BodyProfile>,
    },
    Literal {
        area: f64,
        #[serde(rename = "total_H")]
        total_h: f64,
        #[serde(rename = "total_H2", default)]
        total_h2: Option<f64>,
        #[serde(rename = "total_H0", default)]
        total_h0: Option<f64>,
        #[serde(default)]
        round: bool,
    },
}

impl SurfaceSource {
    pub fn body(&self) -> Result<Option<RotSymBody>> {
        match *self {
            SurfaceSource::RotsymBody {
                horizon_radius,
                outer_radius,
                profile,
            } => Ok(Some(RotSymBody::new(
                horizon_radius,
                outer_radius,
                profile.unwrap_or(BodyProfile::Schwarzschild),
            )?)),
            _ => Ok(None),
        }
    }

    pub fn data(&self) -> Result<SurfaceData> {
        let data = match *self {
            SurfaceSource::SchwarzschildSphere { mass, radius } => {
                schwarzschild_sphere_data(&CoordinateSphereSpec::at(mass, radius)?)?
            }
            SurfaceSource::Spheroid { a, c, n_quad } => {
                spheroid_data(a, c, n_quad.unwrap_or(DEFAULT_SPHEROID_NODES))?
            }
            SurfaceSource::RotsymBody { .. } => {
                rotsym_body_outer_data(&self.body()?.expect("rotsym source"))?
            }
            SurfaceSource::Literal {
                area,
                total_h,
                total_h2,
                total_h0,
                round,
            } => SurfaceData::new(area, total_h, total_h2, total_h0, round)?,
        };
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(json: &str) -> serde_json::Result<FlowRunConfig> {
        serde_json::from_str(json)
    }

    #[test]
    fn flow_schema() {
        let c =
            flow(r#"{"mass": 1, "r0": 4, "band_limit": 8, "boundary": {"kind": "schwarzschild"}}"#)
                .unwrap();
        assert_eq!(c.boundary, BoundaryData::Schwarzschild);
        assert_eq!(c.r_max, None);
        let built = c.build(None, None).unwrap();
        assert_eq!(built.r_max(), 4000.0);
        assert_eq!(built.grid().band_limit, 8);
        assert_eq!(c.build(Some(5), None).unwrap().grid().band_limit, 5);

        assert!(flow(r#"{"mass": 1, "r0": 4, "band_limit": 8, "boundary": {"kind": "schwarzschild"}, "extra": 1}"#).is_err());
        assert!(flow(r#"{"mass": 1, "r0": 4, "band_limit": 8, "boundary": {"kind": "constant", "value": 1, "x": 2}}"#).is_err());
        assert!(
            flow(r#"{"mass": 1, "r0": 4, "band_limit": 8, "boundary": {"kind": "spiral"}}"#)
                .is_err()
        );
        assert!(flow(r#"{"mass": 1, "r0": 4, "boundary": {"kind": "schwarzschild"}}"#).is_err());
    }

    #[test]
    fn boundary_sampling() {
        let grid = SphereGrid::with_band_limit(6).unwrap();
        let bg = SchwarzschildBackground::new(1.0, 4.0).unwrap();
        let h_s = bg.mean_curvature(4.0).unwrap();
        let b = BoundaryData::HarmonicPerturbation {
            degree: 2,
            order: 1,
            amplitude: 0.25,
            base: None,
        };
        let phi = b.sample(&grid, &bg, None).unwrap();
        assert!((phi.max() - 1.25 * h_s).abs() < 1e-12);
        assert!((phi.min() - 0.75 * h_s).abs() < 1e-12);

        let r = BoundaryData::Random {
            max_degree: 3,
            amplitude: 0.3,
            seed: Some(4),
            base: Some(1.0),
        };
        let a = r.sample(&grid, &bg, None).unwrap();
        assert_eq!(a.values(), r.sample(&grid, &bg, Some(4)).unwrap().values());
        assert_ne!(a.values(), r.sample(&grid, &bg, Some(5)).unwrap().values());
        assert!((a.norm_inf() - 1.3).abs() < 1e-12 || (a.min() - 0.7).abs() < 1e-12);

        let bad = BoundaryData::HarmonicPerturbation {
            degree: 1,
            order: 2,
            amplitude: 0.1,
            base: None,
        };
        assert!(bad.sample(&grid, &bg, None).is_err());
    }

    #[test]
    fn masses_schema() {
        let c: MassesRunConfig = serde_json::from_str(
            r#"{"surface": {"kind": "literal", "area": 12.566370614359172, "total_H": 25.132741228718345}}"#,
        )
        .unwrap();
        let s = c.surface.data().unwrap();
        assert_eq!(s.total_h0, None);
        assert!(!c.nonnegative_scalar_curvature_filling);

        let c: MassesRunConfig = serde_json::from_str(
            r#"{"surface": {"kind": "rotsym_body", "horizon_radius": 2, "outer_radius": 4,
                "profile": {"kind": "scaled_mass", "eps": 0.1}}}"#,
        )
        .unwrap();
        assert!(c.surface.body().unwrap().is_some());
        assert!(c.surface.data().unwrap().round);

        let bad = r#"{"surface": {"kind": "spheroid", "a": 1, "c": 0.5, "b": 2}}"#;
        assert!(serde_json::from_str::<MassesRunConfig>(bad).is_err());
        let bad = r#"{"surface": {"kind": "rotsym_body", "horizon_radius": 2, "outer_radius": 4,
                "profile": {"kind": "tilted", "eps": 0.1, "tilt": 1}}}"#;
        assert!(serde_json::from_str::<MassesRunConfig>(bad).is_err());
    }
}
