//! Radial flow of the quasi-spherical conformal factor `v` on a Schwarzschild
//! background.
//!
//! `v(r, x)` solves
//!
//! ```text
//! dv/dr = (v^2 / 2r) Lap v + (v - v^3) / 2r
//! ```
//!
//! on `S^2 x [r0, r_max]` with `v(r0) = 2 / (r0 phi)`, so that the inner
//! sphere has mean curvature `phi` in `(u/N)^2 dr^2 + r^2 dsigma^2`, `u = N v`.
//! Along the flow
//!
//! ```text
//! Q(r) = oint_{S^2} (2r - 4m - 2r N / v) d omega
//! ```
//!
//! is non-increasing with `dQ/dr = -oint u^{-1} (u - 1)^2 d omega`, and tends
//! to `8 pi (m0 - m)` where `v = 1 + m0 / r + O(r^-2)`.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::schwarzschild::SchwarzschildBackground;
use crate::sphere::{GridSpec, ScalarField};

pub const DEFAULT_STEP_SAFETY: f64 = 0.5;

/// Samples kept by the default `sample_stride`.
pub const TARGET_SAMPLES: usize = 500;

/// Mass extraction needs `r_a >= ASYMPTOTIC_FACTOR * max(r0, |2m|)`.
pub const ASYMPTOTIC_FACTOR: f64 = 50.0;

/// Largest step as a fraction of `r`, independent of the parabolic bound.
pub const MAX_RELATIVE_STEP: f64 = 0.05;

/// Tolerance on the energy fraction discarded when projecting `phi`.
pub const PROJECTION_RESIDUAL_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct FlowConfig {
    background: SchwarzschildBackground,
    phi: ScalarField,
    phi_projection_residual: f64,
    r_max: f64,
    step_safety: f64,
    sample_stride: usize,
    checkpoints: Vec<f64>,
}

impl FlowConfig {
    /// Validates the boundary data and projects it to the grid's band limit.
    /// The sample stride defaults to roughly [`TARGET_SAMPLES`] samples.
    pub fn new(background: SchwarzschildBackground, phi: ScalarField, r_max: f64) -> Result<Self> {
        if !(r_max > background.r0()) || !r_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "r_max = {r_max} must exceed r0 = {}",
                background.r0()
            )));
        }
        check_boundary_data(&phi)?;
        let (projected, residual) = phi.project_with_residual();
        check_boundary_data(&projected)?;
        let mut config = Self {
            background,
            phi: projected,
            phi_projection_residual: residual,
            r_max,
            step_safety: DEFAULT_STEP_SAFETY,
            sample_stride: 1,
            checkpoints: Vec::new(),
        };
        config.sample_stride = config.default_sample_stride();
        Ok(config)
    }

    pub fn with_step_safety(mut self, step_safety: f64) -> Result<Self> {
        if !(step_safety > 0.0 && step_safety <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step_safety = {step_safety} must lie in (0, 1]"
            )));
        }
        self.step_safety = step_safety;
        Ok(self)
    }

    pub fn with_sample_stride(mut self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidConfig(
                "sample_stride must be positive".into(),
            ));
        }
        self.sample_stride = stride;
        Ok(self)
    }

    /// Radii in `(r0, r_max)` the integrator lands on exactly.
    pub fn with_checkpoints(mut self, mut radii: Vec<f64>) -> Result<Self> {
        if let Some(bad) = radii
            .iter()
            .find(|&&r| !(r > self.background.r0() && r < self.r_max))
        {
            return Err(Error::InvalidConfig(format!(
                "checkpoint {bad} outside ({}, {})",
                self.background.r0(),
                self.r_max
            )));
        }
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        self.checkpoints = radii;
        Ok(self)
    }

    /// `10^3 * max(r0, 1)`.
    pub fn default_r_max(background: &SchwarzschildBackground) -> f64 {
        1e3 * background.r0().max(1.0)
    }

    pub fn background(&self) -> &SchwarzschildBackground {
        &self.background
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    /// Energy fraction of the input `phi` discarded by the projection.
    pub fn phi_projection_residual(&self) -> f64 {
        self.phi_projection_residual
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn step_safety(&self) -> f64 {
        self.step_safety
    }

    pub fn sample_stride(&self) -> usize {
        self.sample_stride
    }

    pub fn grid(&self) -> GridSpec {
        self.phi.spec()
    }

    fn default_sample_stride(&self) -> usize {
        let per_log = (0.5 * self.grid().max_eigenvalue()).max(1.0 / MAX_RELATIVE_STEP);
        let steps = (self.r_max / self.background.r0()).ln() * per_log / self.step_safety;
        ((steps / TARGET_SAMPLES as f64).round() as usize).max(1)
    }
}

fn check_boundary_data(phi: &ScalarField) -> Result<()> {
    if !phi.is_positive() {
        return Err(Error::InvalidBoundaryData(format!(
            "phi must be strictly positive, min = {}",
            phi.min()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub r: f64,
    pub v: ScalarField,
}

impl FlowState {
    /// `u = N v` on the sphere of radius `r`.
    pub fn u(&self, background: &SchwarzschildBackground) -> ScalarField {
        self.v.scale(background.lapse_unchecked(self.r))
    }

    /// Running mass `s(r) = r (<v> - 1)`.
    pub fn mean_mass(&self) -> f64 {
        self.r * self.v.add_scalar(-1.0).mean()
    }
}

/// One row of a flow trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub r: f64,
    pub q: f64,
    pub d: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub m0_running: f64,
}

impl FlowSample {
    fn capture(background: &SchwarzschildBackground, state: &FlowState) -> Self {
        Self {
            r: state.r,
            q: monotone_quantity(background, state),
            d: dissipation_rate(background, state),
            v_min: state.v.min(),
            v_max: state.v.max(),
            m0_running: state.mean_mass(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub background: SchwarzschildBackground,
    pub samples: Vec<FlowSample>,
    /// Richardson mass from the states at `r_max / 2` and `r_max`; absent
    /// when `r_max / 2` is outside the asymptotic regime.
    pub m0_estimate: Option<f64>,
    /// `|Q(r_max) - 8 pi (m0 - m)|`, absent with `m0_estimate`.
    pub q_limit_check: Option<f64>,
    pub steps: usize,
    pub final_state: FlowState,
    pub phi_projection_residual: f64,
}

pub const CSV_HEADER: &str = "r,Q,D,v_min,v_max,m0_running";

impl FlowTrace {
    pub fn last(&self) -> &FlowSample {
        self.samples
            .last()
            .expect("trace always holds the initial sample")
    }

    /// Writes `r,Q,D,v_min,v_max,m0_running` rows with shortest round-trip
    /// decimal formatting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.r, s.q, s.d, s.v_min, s.v_max, s.m0_running
            )?;
        }
        Ok(())
    }
}

/// `v(r0) = 2 / (r0 phi)`, projected.
pub fn initial_state(config: &FlowConfig) -> Result<FlowState> {
    check_boundary_data(&config.phi)?;
    let r0 = config.background.r0();
    let v = config.phi.reciprocal()?.scale(2.0 / r0).project();
    if !v.is_positive() {
        return Err(Error::InvalidBoundaryData(format!(
            "projected initial v lost positivity (min {})",
            v.min()
        )));
    }
    Ok(FlowState { r: r0, v })
}

/// Right-hand side `(v^2 / 2r) Lap v + (v - v^3) / 2r`, projected to `L`.
pub fn rhs(r: f64, v: &ScalarField) -> Result<ScalarField> {
    if !v.is_positive() {
        return Err(Error::BlowUp {
            radius: r,
            detail: format!("v reached {} inside the right-hand side", v.min()),
            last_state: Box::new(FlowState { r, v: v.clone() }),
        });
    }
    let lap = v.laplacian();
    let inv = 0.5 / r;
    let g = v.zip_map(&lap, |a, l| inv * (a * a * l + a - a * a * a));
    Ok(g.project())
}

/// Parabolic step bound `min(2r / (v_max^2 L(L+1)), 0.05 r)`.
pub fn max_stable_step(state: &FlowState) -> f64 {
    let v_max = state.v.max();
    let parabolic = 2.0 * state.r / (v_max * v_max * state.v.spec().max_eigenvalue());
    parabolic.min(MAX_RELATIVE_STEP * state.r)
}

/// One classical RK4 step of size `dr`.
pub fn step(state: &FlowState, dr: f64) -> Result<FlowState> {
    let bound = max_stable_step(state);
    if !(dr > 0.0) || dr > bound * (1.0 + 1e-12) {
        return Err(Error::InvalidStep {
            r: state.r,
            dr,
            reason: format!("must lie in (0, {bound}]"),
        });
    }
    let blow_up = |e: Error| match e {
        Error::BlowUp { radius, detail, .. } => Error::BlowUp {
            radius,
            detail,
            last_state: Box::new(state.clone()),
        },
        other => other,
    };
    let r = state.r;
    let v = &state.v;
    let half = 0.5 * dr;
    let k1 = rhs(r, v).map_err(blow_up)?;
    let k2 = rhs(r + half, &v.zip_map(&k1, |a, k| a + half * k)).map_err(blow_up)?;
    let k3 = rhs(r + half, &v.zip_map(&k2, |a, k| a + half * k)).map_err(blow_up)?;
    let k4 = rhs(r + dr, &v.zip_map(&k3, |a, k| a + dr * k)).map_err(blow_up)?;
    let sixth = dr / 6.0;
    let combined: Vec<f64> = v
        .values()
        .iter()
        .zip(k1.values())
        .zip(k2.values())
        .zip(k3.values())
        .zip(k4.values())
        .map(|((((a, b1), b2), b3), b4)| a + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4))
        .collect();
    let next = ScalarField::new(v.grid().clone(), combined)
        .map_err(|e| Error::BlowUp {
            radius: r + dr,
            detail: e.to_string(),
            last_state: Box::new(state.clone()),
        })?
        .project();
    if !next.is_positive() {
        return Err(Error::BlowUp {
            radius: r + dr,
            detail: format!("min v = {} after step from r = {r}", next.min()),
            last_state: Box::new(state.clone()),
        });
    }
    Ok(FlowState { r: r + dr, v: next })
}

/// Integrates from `r0` to `r_max`.
pub fn run(config: &FlowConfig) -> Result<FlowTrace> {
    run_observed(config, |_| {})
}

/// As [`run`], calling `observer` on the initial state and after every
/// accepted step.
pub fn run_observed<F: FnMut(&FlowState)>(
    config: &FlowConfig,
    mut observer: F,
) -> Result<FlowTrace> {
    let bg = config.background;
    let r_max = config.r_max;
    let r_half = 0.5 * r_max;
    let mut stops: Vec<f64> = config.checkpoints.clone();
    if r_half > bg.r0() {
        stops.push(r_half);
    }
    stops.push(r_max);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut state = initial_state(config)?;
    observer(&state);
    let mut samples = vec![FlowSample::capture(&bg, &state)];
    let mut half_state = None;
    let mut steps = 0usize;
    let mut next_stop = 0usize;

    while state.r < r_max {
        let target = stops[next_stop];
        let mut dr = config.step_safety * max_stable_step(&state);
        let landing = state.r + dr >= target;
        if landing {
            dr = target - state.r;
        }
        let mut next = step(&state, dr)?;
        if landing {
            next.r = target;
            next_stop += 1;
        }
        steps += 1;
        state = next;
        observer(&state);
        if state.r == r_half {
            half_state = Some(state.clone());
        }
        if steps.is_multiple_of(config.sample_stride) || state.r == r_max {
            samples.push(FlowSample::capture(&bg, &state));
        }
    }

    let m0_estimate = match half_state.as_ref() {
        Some(half) => match adm_mass_estimate(&bg, half, &state) {
            Ok(m0) => Some(m0),
            Err(Error::InsufficientAsymptoticRegime(_)) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let q_final = samples.last().map(|s| s.q).unwrap_or_default();
    let q_limit_check = m0_estimate.map(|m0| (q_final - 8.0 * PI * (m0 - bg.mass())).abs());
    Ok(FlowTrace {
        background: bg,
        samples,
        m0_estimate,
        q_limit_check,
        steps,
        final_state: state,
        phi_projection_residual: config.phi_projection_residual,
    })
}

/// `Q(r) = oint_{S^2} (2r - 4m - 2r N / v) d omega`.
pub fn monotone_quantity(background: &SchwarzschildBackground, state: &FlowState) -> f64 {
    let r = state.r;
    let m = background.mass();
    let n = background.lapse_unchecked(r);
    // 2r (v - N) / v - 4m, which avoids cancelling O(r) terms.
    state.v.map(|v| 2.0 * r * (v - n) / v).integrate() - 16.0 * PI * m
}

/// `dQ/dr = -oint u^{-1} (u - 1)^2 d omega`, `u = N v`.
pub fn dissipation_rate(background: &SchwarzschildBackground, state: &FlowState) -> f64 {
    -state
        .u(background)
        .map(|u| (u - 1.0) * (u - 1.0) / u)
        .integrate()
}

/// Two-point Richardson estimate `2 s(r_b) - s(r_a)` of the ADM mass, with
/// `s(r) = r (<v> - 1)` and `r_b = 2 r_a`.
pub fn adm_mass_estimate(
    background: &SchwarzschildBackground,
    inner: &FlowState,
    outer: &FlowState,
) -> Result<f64> {
    let (ra, rb) = (inner.r, outer.r);
    if (rb - 2.0 * ra).abs() > 1e-12 * rb {
        return Err(Error::InvalidConfig(format!(
            "Richardson mass needs r_b = 2 r_a, got r_a = {ra}, r_b = {rb}"
        )));
    }
    let scale = background.r0().max(2.0 * background.mass().abs());
    let needed = ASYMPTOTIC_FACTOR * scale;
    if ra < needed {
        return Err(Error::InsufficientAsymptoticRegime(format!(
            "r_a = {ra} < {ASYMPTOTIC_FACTOR} * max(r0, |2m|) = {needed}"
        )));
    }
    Ok(2.0 * outer.mean_mass() - inner.mean_mass())
}

/// `|Q(r_max) - 8 pi (m0 - m)|`, or `None` without a mass estimate.
pub fn limit_consistency(trace: &FlowTrace) -> Option<f64> {
    let m0 = trace.m0_estimate?;
    Some((trace.last().q - 8.0 * PI * (m0 - trace.background.mass())).abs())
}

/// Finite-difference check of `dQ/dr` against the dissipation rate.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeCheck {
    pub r: f64,
    pub finite_difference: f64,
    pub dissipation: f64,
    pub relative_error: f64,
    /// Whether the change in `Q` across the stencil dominates its rounding
    /// floor by [`RESOLUTION_FACTOR`]. Far out `Q` changes by less than its
    /// round-off and the difference quotient carries no information.
    pub resolved: bool,
}

/// Required ratio of `|Q(r_{k+1}) - Q(r_{k-1})|` to the rounding floor
/// `8 pi r eps` of a single `Q` sample.
pub const RESOLUTION_FACTOR: f64 = 1e6;

/// Second-order three-point derivative of the sampled `Q` at every interior
/// sample, compared with the recorded dissipation rate.
pub fn derivative_checks(samples: &[FlowSample]) -> Vec<DerivativeCheck> {
    samples
        .windows(3)
        .map(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            let h1 = b.r - a.r;
            let h2 = c.r - b.r;
            let fd = -h2 / (h1 * (h1 + h2)) * a.q
                + (h2 - h1) / (h1 * h2) * b.q
                + h1 / (h2 * (h1 + h2)) * c.q;
            let err = (fd - b.d).abs();
            let relative_error = if b.d != 0.0 { err / b.d.abs() } else { err };
            let floor = 8.0 * PI * c.r * f64::EPSILON;
            DerivativeCheck {
                r: b.r,
                finite_difference: fd,
                dissipation: b.d,
                relative_error,
                resolved: (c.q - a.q).abs() >= RESOLUTION_FACTOR * floor,
            }
        })
        .collect()
}

/// Indices `k` with `Q(r_{k+1}) > Q(r_k) + tol (1 + |Q(r_k)|)`.
pub fn monotonicity_violations(samples: &[FlowSample], tol: f64) -> Vec<usize> {
    samples
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].q > w[0].q + tol * (1.0 + w[0].q.abs()))
        .map(|(k, _)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{random_band_limited, SphereGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn grid(l: usize) -> Arc<SphereGrid> {
        SphereGrid::with_band_limit(l).unwrap()
    }

    fn schwarzschild_seed(l: usize, m: f64, r0: f64, r_max: f64) -> FlowConfig {
        let bg = SchwarzschildBackground::new(m, r0).unwrap();
        let phi = ScalarField::constant(&grid(l), bg.mean_curvature(r0).unwrap());
        FlowConfig::new(bg, phi, r_max).unwrap()
    }

    // Oracle: w = v^2 solves w' = (w - w^2)/r, so w = A r / (1 + A r),
    // A = c^2 / (r0 (1 - c^2)), for constant data v(r0) = c on a flat background.
    fn separable_v(c: f64, r0: f64, r: f64) -> f64 {
        let a = c * c / (r0 * (1.0 - c * c));
        (a * r / (1.0 + a * r)).sqrt()
    }

    #[test]
    fn initial_state_examples() {
        let cfg = schwarzschild_seed(6, 1.0, 4.0, 400.0);
        let s = initial_state(&cfg).unwrap();
        for v in s.v.values() {
            assert!((v - 2f64.sqrt()).abs() < 1e-13);
        }
        let flat = SchwarzschildBackground::flat(1.0).unwrap();
        let g = grid(4);
        let cfg = FlowConfig::new(flat, ScalarField::constant(&g, 1.0), 10.0).unwrap();
        assert!(initial_state(&cfg)
            .unwrap()
            .v
            .values()
            .iter()
            .all(|v| (v - 2.0).abs() < 1e-13));
        let cfg = FlowConfig::new(flat, ScalarField::constant(&g, 2.0), 10.0).unwrap();
        assert!(initial_state(&cfg)
            .unwrap()
            .v
            .values()
            .iter()
            .all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn nonpositive_boundary_data_rejected() {
        let flat = SchwarzschildBackground::flat(1.0).unwrap();
        let phi = ScalarField::from_fn(&grid(4), |t, _| t.cos());
        assert!(matches!(
            FlowConfig::new(flat, phi, 10.0),
            Err(Error::InvalidBoundaryData(_))
        ));
        let phi = ScalarField::constant(&grid(4), 1.0);
        assert!(FlowConfig::new(flat, phi, 0.5).is_err());
    }

    #[test]
    fn rhs_examples() {
        let g = grid(6);
        let one = ScalarField::constant(&g, 1.0);
        assert!(rhs(3.0, &one).unwrap().norm_inf() < 1e-12);

        // v = N^{-1} with m = 1, r = 4: rhs = -(m / r^2) v^3.
        let v = ScalarField::constant(&g, 2f64.sqrt());
        let want = -(1.0 / 16.0) * 2f64.sqrt().powi(3);
        assert!((want + 0.176_776_695_3).abs() < 1e-9);
        for x in rhs(4.0, &v).unwrap().values() {
            assert!((x - want).abs() < 1e-13);
        }

        let c = 1.7;
        let r = 2.5;
        let v = ScalarField::constant(&g, c);
        for x in rhs(r, &v).unwrap().values() {
            assert!((x - (c - c * c * c) / (2.0 * r)).abs() < 1e-13);
        }

        let bad = ScalarField::constant(&g, -0.1);
        assert!(matches!(rhs(1.0, &bad), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn step_preserves_fixed_point() {
        let g = grid(8);
        let state = FlowState {
            r: 2.0,
            v: ScalarField::constant(&g, 1.0),
        };
        let dr = max_stable_step(&state);
        let next = step(&state, dr).unwrap();
        assert!((next.v.add_scalar(-1.0)).norm_inf() < 1e-14);
        assert_eq!(next.r, 2.0 + dr);
    }

    #[test]
    fn step_rejects_unstable_or_negative_increments() {
        let g = grid(8);
        let state = FlowState {
            r: 2.0,
            v: ScalarField::constant(&g, 1.0),
        };
        let bound = max_stable_step(&state);
        assert!(matches!(
            step(&state, 1.5 * bound),
            Err(Error::InvalidStep { .. })
        ));
        assert!(matches!(step(&state, 0.0), Err(Error::InvalidStep { .. })));
        assert!(matches!(step(&state, -0.1), Err(Error::InvalidStep { .. })));
    }

    #[test]
    fn step_blow_up_carries_last_good_state() {
        let g = grid(4);
        let mut vals = vec![1.0; g.spec().node_count()];
        vals[3] = -0.5;
        let state = FlowState {
            r: 3.0,
            v: ScalarField::new(g.clone(), vals).unwrap(),
        };
        match step(&state, 1e-3) {
            Err(Error::BlowUp {
                last_state, radius, ..
            }) => {
                assert_eq!(last_state.r, 3.0);
                assert_eq!(radius, 3.0);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn schwarzschild_seed_tracks_closed_form() {
        let cfg = schwarzschild_seed(6, 1.0, 4.0, 400.0);
        let bg = *cfg.background();
        let mut worst: f64 = 0.0;
        let trace = run_observed(&cfg, |s| {
            let want = 1.0 / bg.lapse(s.r).unwrap();
            worst = worst.max(s.v.add_scalar(-want).norm_inf());
        })
        .unwrap();
        assert!(worst <= 1e-8, "worst deviation {worst}");
        for s in &trace.samples {
            assert!(s.q.abs() <= 1e-8 * 4.0, "Q = {} at r = {}", s.q, s.r);
        }
        let m0 = trace.m0_estimate.unwrap();
        assert!((m0 - 1.0).abs() < 1e-4, "m0 = {m0}");
        assert!(limit_consistency(&trace).unwrap() < 1e-3);
    }

    #[test]
    fn flat_separable_solution() {
        let flat = SchwarzschildBackground::flat(1.0).unwrap();
        let g = grid(4);
        let cfg = FlowConfig::new(flat, ScalarField::constant(&g, 1.0), 1000.0)
            .unwrap()
            .with_checkpoints(vec![2.0, 10.0, 100.0])
            .unwrap();
        let mut worst: f64 = 0.0;
        let trace = run_observed(&cfg, |s| {
            let want = separable_v(2.0, 1.0, s.r);
            worst = worst.max(s.v.add_scalar(-want).norm_inf());
        })
        .unwrap();
        assert!(worst < 1e-8, "worst {worst}");
        let m0 = trace.m0_estimate.unwrap();
        assert!((m0 - 0.375).abs() < 1e-4, "m0 = {m0}");
        let lc = limit_consistency(&trace).unwrap();
        assert!(lc <= 0.05 * 8.0 * PI * 0.375, "limit residual {lc}");
    }

    #[test]
    fn flat_round_sphere_stays_euclidean() {
        let flat = SchwarzschildBackground::flat(1.0).unwrap();
        let g = grid(4);
        let cfg = FlowConfig::new(flat, ScalarField::constant(&g, 2.0), 1000.0).unwrap();
        let trace = run(&cfg).unwrap();
        assert!(trace.m0_estimate.unwrap().abs() < 1e-10);
        // Q carries round-off of order 8 pi r eps.
        let worst = trace
            .samples
            .iter()
            .map(|s| (s.q.abs() / s.r).max(s.d.abs()))
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "Q or D drifted to {worst}");
        assert!(limit_consistency(&trace).unwrap() < 1e-9);
    }

    #[test]
    fn monotone_quantity_examples() {
        let g = grid(4);
        let bg = SchwarzschildBackground::new(1.0, 2.5).unwrap();
        let r = 7.0;
        let state = FlowState {
            r,
            v: ScalarField::constant(&g, 1.0 / bg.lapse(r).unwrap()),
        };
        assert!(monotone_quantity(&bg, &state).abs() < 1e-12);

        let flat = SchwarzschildBackground::flat(1.0).unwrap();
        let c = 1.6;
        let state = FlowState {
            r,
            v: ScalarField::constant(&g, c),
        };
        let want = 4.0 * PI * 2.0 * r * (1.0 - 1.0 / c);
        assert!((monotone_quantity(&flat, &state) - want).abs() < 1e-12);
        let state = FlowState {
            r,
            v: ScalarField::constant(&g, 1.0),
        };
        assert_eq!(monotone_quantity(&flat, &state), 0.0);
    }

    #[test]
    fn dissipation_examples() {
        let g = grid(4);
        let flat = SchwarzschildBackground::flat(1.0).unwrap();
        let at = |c: f64| FlowState {
            r: 3.0,
            v: ScalarField::constant(&g, c),
        };
        assert_eq!(dissipation_rate(&flat, &at(1.0)), 0.0);
        assert!((dissipation_rate(&flat, &at(2.0)) + 2.0 * PI).abs() < 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let noise = random_band_limited(&g, 0, 4, &mut rng);
            let v = noise.scale(0.3 / noise.norm_inf()).add_scalar(1.0);
            let s = FlowState { r: 3.0, v };
            assert!(dissipation_rate(&flat, &s) <= 0.0);
        }
    }

    #[test]
    fn adm_mass_examples() {
        let g = grid(4);
        let m = 1.0;
        let bg = SchwarzschildBackground::new(m, 4.0).unwrap();
        let at = |r: f64| FlowState {
            r,
            v: ScalarField::constant(&g, 1.0 / bg.lapse(r).unwrap()),
        };
        // Expansion of (1 - 2m/r)^{-1/2}: Richardson leaves
        // -(5/4) m^3 / a^2 - (105/32) m^4 / a^3 + O(a^-4).
        for a in [200.0, 400.0, 1000.0] {
            let got = adm_mass_estimate(&bg, &at(a), &at(2.0 * a)).unwrap();
            let series = m - 1.25 * m.powi(3) / (a * a) - 3.28125 * m.powi(4) / (a * a * a);
            assert!(
                (got - series).abs() < 20.0 * m.powi(5) / a.powi(4),
                "a = {a}"
            );
            assert!((got - m).abs() <= 1e-4);
        }
        let one = |r: f64| FlowState {
            r,
            v: ScalarField::constant(&g, 1.0),
        };
        assert_eq!(
            adm_mass_estimate(&bg, &one(300.0), &one(600.0)).unwrap(),
            0.0
        );
        assert!(matches!(
            adm_mass_estimate(&bg, &at(20.0), &at(40.0)),
            Err(Error::InsufficientAsymptoticRegime(_))
        ));
        assert!(matches!(
            adm_mass_estimate(&bg, &at(300.0), &at(500.0)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn short_runs_report_no_mass() {
        let cfg = schwarzschild_seed(4, 1.0, 4.0, 40.0);
        let trace = run(&cfg).unwrap();
        assert!(trace.m0_estimate.is_none());
        assert!(limit_consistency(&trace).is_none());
        assert_eq!(trace.last().r, 40.0);
    }

    #[test]
    fn constant_data_stays_angularly_constant() {
        let bg = SchwarzschildBackground::new(0.5, 3.0).unwrap();
        let cfg = FlowConfig::new(bg, ScalarField::constant(&grid(8), 0.4), 60.0).unwrap();
        let mut worst: f64 = 0.0;
        run_observed(&cfg, |s| {
            worst = worst.max(s.v.add_scalar(-s.v.mean()).norm_inf());
        })
        .unwrap();
        assert!(worst <= 1e-9, "angular spread {worst}");
    }

    #[test]
    fn perturbed_run_is_monotone_and_deterministic() {
        let g = grid(12);
        let bg = SchwarzschildBackground::new(1.0, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = random_band_limited(&g, 1, 4, &mut rng);
        let hs = bg.mean_curvature(4.0).unwrap();
        let phi = noise
            .scale(0.3 / noise.norm_inf())
            .add_scalar(1.0)
            .scale(hs);
        let cfg = FlowConfig::new(bg, phi, 60.0)
            .unwrap()
            .with_sample_stride(1)
            .unwrap();
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        assert!(monotonicity_violations(&a.samples, 1e-8).is_empty());
        assert!(a.samples.iter().all(|s| s.v_min > 0.0 && s.d <= 0.0));
        let checks = derivative_checks(&a.samples);
        let resolved: Vec<_> = checks.iter().filter(|c| c.resolved).collect();
        assert!(resolved.len() > checks.len() / 4);
        let worst = resolved
            .iter()
            .map(|c| c.relative_error)
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "derivative mismatch {worst}");
        let mut csv = Vec::new();
        a.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("r,Q,D,v_min,v_max,m0_running\n"));
        assert_eq!(text.lines().count(), a.samples.len() + 1);
    }

    #[test]
    fn checkpoints_must_be_interior() {
        let cfg = schwarzschild_seed(4, 1.0, 4.0, 40.0);
        assert!(cfg.clone().with_checkpoints(vec![3.0]).is_err());
        assert!(cfg.clone().with_checkpoints(vec![40.0]).is_err());
        assert!(cfg.with_checkpoints(vec![10.0, 5.0, 10.0]).is_ok());
    }

    #[test]
    fn default_stride_targets_a_few_hundred_samples() {
        let cfg = schwarzschild_seed(15, 1.0, 4.0, 4000.0);
        let trace = run(&cfg).unwrap();
        let n = trace.samples.len();
        assert!((200..=1500).contains(&n), "{n} samples");
        assert!(trace.samples.windows(2).all(|w| w[0].r < w[1].r));
        assert_eq!(trace.samples[0].r, 4.0);
    }
}
