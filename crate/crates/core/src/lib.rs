//! Numerical laboratory for quasi-spherical metrics on a Schwarzschild
//! background.
//!
//! - [`sphere`]: band-limited fields on `S^2` with exact Gauss–Legendre
//!   quadrature and a spectral Laplace–Beltrami operator.
//! - [`schwarzschild`]: lapse, coordinate-sphere mean curvature and horizon
//!   mass conversions.
//! - [`flow`]: the radial quasi-spherical flow, its monotone quantity `Q(r)`,
//!   the dissipation rate and ADM mass extraction.
//! - [`masses`]: the quasi-local mass functionals and their inequality chain.
//! - [`oracles`]: closed-form and 1-D quadrature surface data used as
//!   independent references.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod masses;
pub mod oracles;
pub mod quadrature;
pub mod schwarzschild;
pub mod sphere;

pub use error::{Error, Result};
pub use flow::{FlowConfig, FlowSample, FlowState, FlowTrace};
pub use masses::{MassReport, PenroseGap, SurfaceData, Verdict};
pub use oracles::{BodyProfile, CoordinateSphereSpec, RevolutionSurface, RotSymBody};
pub use schwarzschild::SchwarzschildBackground;
pub use sphere::{GridSpec, ScalarField, SphereGrid};
