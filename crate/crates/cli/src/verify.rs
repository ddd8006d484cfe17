//! Invariant suites behind `qsflow verify`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use qsflow::flow::{derivative_checks, run, run_observed};
use qsflow::masses::{
    localized_penrose_gap, mass_brown_york, mass_hawking, mass_m, mass_m1, mass_m2, verify_chain,
};
use qsflow::oracles::{
    gluing_match_check, minkowski_ratio, rotsym_body_outer_data, schwarzschild_sphere_data,
    spheroid_data, DEFAULT_SPHEROID_NODES,
};
use qsflow::sphere::{normalized_legendre, random_band_limited};
use qsflow::{
    BodyProfile, CoordinateSphereSpec, FlowConfig, RotSymBody, ScalarField,
    SchwarzschildBackground, SphereGrid, SurfaceData,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::output::write_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Spectral,
    Flow,
    Masses,
    Penrose,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Spectral, Suite::Flow, Suite::Masses, Suite::Penrose];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Spectral => "spectral",
            Suite::Flow => "flow",
            Suite::Masses => "masses",
            Suite::Penrose => "penrose",
        }
    }
}

/// A suite name on the command line; `all` selects every suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection(pub Vec<Suite>);

impl FromStr for Selection {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(Selection(Suite::ALL.to_vec()));
        }
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .map(|suite| Selection(vec![suite]))
            .ok_or_else(|| CliError::UnknownSuite(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    pub band_limit: Option<usize>,
}

/// One row of the report: passes when `max_violation <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub passed: bool,
    pub max_violation: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(check: impl Into<String>, max_violation: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            passed: max_violation <= tolerance,
            max_violation,
            tolerance,
        }
    }

    fn count(check: impl Into<String>, failures: usize) -> Self {
        Self::new(check, failures as f64, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64, checks: Vec<Check>) -> Self {
        Self {
            suite: suite.name(),
            seed,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

pub fn run_suite(suite: Suite, options: VerifyOptions) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Spectral => spectral(options)?,
        Suite::Flow => flow(options)?,
        Suite::Masses => masses(options)?,
        Suite::Penrose => penrose(options)?,
    };
    Ok(SuiteReport::new(suite, options.seed, checks))
}

/// Runs the selected suites, concurrently when there are several, and
/// writes `verify_<suite>.json` for each.
pub fn cmd_verify(
    selection: &Selection,
    out: &Path,
    options: VerifyOptions,
) -> Result<Vec<SuiteReport>> {
    let reports: Vec<Result<SuiteReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = selection
            .0
            .iter()
            .map(|&suite| scope.spawn(move || run_suite(suite, options)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect()
    });
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    for report in &reports {
        write_json(out, &format!("verify_{}.json", report.suite), report)?;
    }
    Ok(reports)
}

pub fn render_table(reports: &[SuiteReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:<52} {:<6} {:>13} {:>10}",
        "suite", "check", "status", "max violation", "tolerance"
    );
    for r in reports {
        for c in &r.checks {
            let _ = writeln!(
                out,
                "{:<10} {:<52} {:<6} {:>13.3e} {:>10.1e}",
                r.suite,
                c.check,
                if c.passed { "pass" } else { "FAIL" },
                c.max_violation,
                c.tolerance
            );
        }
    }
    out
}

fn rng(options: VerifyOptions, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    rng.set_stream(stream);
    rng
}

fn spectral(options: VerifyOptions) -> Result<Vec<Check>> {
    let limits = options.band_limit.map_or(vec![8, 15, 31], |l| vec![l]);
    let mut rng = rng(options, 1);
    let mut checks = Vec::new();
    for l_max in limits {
        let grid = SphereGrid::with_band_limit(l_max)?;
        let mut quad: f64 = 0.0;
        let mut eigen: f64 = 0.0;
        for l in 0..=2 * l_max {
            for am in 0..=l {
                let p: Vec<f64> = grid
                    .colatitudes()
                    .iter()
                    .map(|t| normalized_legendre(l, am, t.cos()))
                    .collect();
                let partners: &[bool] = if am == 0 { &[true] } else { &[true, false] };
                for &cosine in partners {
                    let values: Vec<f64> = p
                        .iter()
                        .flat_map(|&pv| {
                            grid.longitudes().iter().map(move |&ph| {
                                if am == 0 {
                                    pv / (2.0 * PI).sqrt()
                                } else if cosine {
                                    pv * (am as f64 * ph).cos() / PI.sqrt()
                                } else {
                                    pv * (am as f64 * ph).sin() / PI.sqrt()
                                }
                            })
                        })
                        .collect();
                    let want = if l == 0 { (4.0 * PI).sqrt() } else { 0.0 };
                    quad = quad.max((grid.integrate(&values) - want).abs());
                    if l <= l_max {
                        let y = ScalarField::new(grid.clone(), values)?;
                        let resid = (&y.laplacian() + &y.scale((l * (l + 1)) as f64)).norm_inf();
                        eigen = eigen.max(resid / y.norm_inf());
                    }
                }
            }
        }
        let mut divergence: f64 = 0.0;
        let mut round_trip: f64 = 0.0;
        for _ in 0..8 {
            let f = random_band_limited(&grid, 0, l_max, &mut rng);
            divergence = divergence.max(f.laplacian().integrate().abs() / f.norm_inf());
            let back = ScalarField::from_coefficients(&grid, &f.coefficients());
            round_trip = round_trip.max((&back - &f).norm_inf());
        }
        checks.push(Check::new(
            format!("L={l_max} quadrature of Y_lm, l <= 2L"),
            quad,
            1e-12,
        ));
        checks.push(Check::new(
            format!("L={l_max} Laplacian eigenfunctions"),
            eigen,
            1e-10,
        ));
        checks.push(Check::new(
            format!("L={l_max} integral of Laplacian"),
            divergence,
            1e-10,
        ));
        checks.push(Check::new(
            format!("L={l_max} analysis/synthesis round trip"),
            round_trip,
            1e-12,
        ));
    }
    Ok(checks)
}

/// Randomized flow invariants; the derivative check needs `L >= 15` for the
/// spatial truncation to sit below its tolerance.
fn flow(options: VerifyOptions) -> Result<Vec<Check>> {
    let l_small = options.band_limit.unwrap_or(8);
    let l_fd = options.band_limit.unwrap_or(15);
    let mut rng = rng(options, 2);
    let mut checks = Vec::new();

    let mut drift: f64 = 0.0;
    for (m, r0) in [(0.5, 2.0), (1.0, 4.0), (2.0, 9.0)] {
        let bg = SchwarzschildBackground::new(m, r0)?;
        let grid = SphereGrid::with_band_limit(l_small)?;
        let phi = ScalarField::constant(&grid, bg.mean_curvature(r0)?);
        run_observed(&FlowConfig::new(bg, phi, 50.0 * r0)?, |s| {
            let exact = 1.0 / bg.lapse(s.r).unwrap_or(f64::NAN);
            drift = drift.max(s.v.add_scalar(-exact).norm_inf());
        })?;
    }
    checks.push(Check::new("schwarzschild data stays v = 1/N", drift, 1e-8));

    let flat = SchwarzschildBackground::flat(1.0)?;
    let grid = SphereGrid::with_band_limit(l_small)?;
    let mut sep: f64 = 0.0;
    let config = FlowConfig::new(flat, ScalarField::constant(&grid, 1.0), 1e3)?
        .with_checkpoints(vec![2.0, 10.0, 100.0])?;
    let trace = run_observed(&config, |s| {
        if [2.0, 10.0, 100.0].contains(&s.r) {
            sep = sep.max(
                s.v.map(|v| v * v - 4.0 * s.r / (4.0 * s.r - 3.0))
                    .norm_inf(),
            );
        }
    })?;
    checks.push(Check::new("separable solution v^2 = 4r/(4r-3)", sep, 1e-6));
    let m0 = trace
        .m0_estimate
        .map_or(f64::INFINITY, |m| (m - 0.375).abs());
    checks.push(Check::new("separable ADM mass 3/8", m0, 1e-4));

    let mut spread: f64 = 0.0;
    let bg = SchwarzschildBackground::new(0.5, 3.0)?;
    run_observed(
        &FlowConfig::new(bg, ScalarField::constant(&grid, 0.4), 60.0)?,
        |s| {
            spread = spread.max(s.v.add_scalar(-s.v.mean()).norm_inf());
        },
    )?;
    checks.push(Check::new(
        "constant data stays angularly constant",
        spread,
        1e-9,
    ));

    let mut monotone: f64 = 0.0;
    let mut sign: f64 = 0.0;
    let mut positivity = 0;
    let mut fd: f64 = 0.0;
    let grid = SphereGrid::with_band_limit(l_fd)?;
    for _ in 0..4 {
        let m: f64 = rng.random_range(0.0..2.0);
        let r0 = (2.0 * m * rng.random_range(1.5f64..4.0)).max(1.0);
        let bg = SchwarzschildBackground::new(m, r0)?;
        let noise = random_band_limited(&grid, 1, 4, &mut rng);
        let amplitude = rng.random_range(0.05..0.3);
        let phi = noise
            .scale(amplitude / noise.norm_inf())
            .add_scalar(1.0)
            .scale(bg.mean_curvature(r0)?);
        let config = FlowConfig::new(bg, phi, 8.0 * r0)?.with_sample_stride(1)?;
        let trace = run(&config)?;
        for w in trace.samples.windows(2) {
            monotone = monotone.max((w[1].q - w[0].q) / (1.0 + w[0].q.abs()));
            sign = sign.max(w[1].d);
            positivity += usize::from(w[1].v_min <= 0.0);
        }
        for c in derivative_checks(&trace.samples)
            .iter()
            .filter(|c| c.resolved)
        {
            fd = fd.max(c.relative_error);
        }
    }
    checks.push(Check::new(
        "Q non-increasing (relative increase)",
        monotone.max(0.0),
        1e-8,
    ));
    checks.push(Check::new("dissipation rate <= 0", sign.max(0.0), 0.0));
    checks.push(Check::count("samples with min v <= 0", positivity));
    checks.push(Check::new(
        "centered dQ/dr vs dissipation (relative)",
        fd,
        1e-3,
    ));
    Ok(checks)
}

fn random_surface(rng: &mut ChaCha8Rng) -> Result<SurfaceData> {
    let area: f64 = rng.random_range(0.1..500.0);
    let h0 = (16.0 * PI * area).sqrt() * rng.random_range(1.0..3.0);
    let total_h = h0 * rng.random_range(-1.0..2.5);
    let h2 = total_h * total_h / area * rng.random_range(1.0..4.0);
    Ok(SurfaceData::new(area, total_h, Some(h2), Some(h0), false)?)
}

fn masses(options: VerifyOptions) -> Result<Vec<Check>> {
    let mut rng = rng(options, 3);
    let mut checks = Vec::new();

    let mut identity: f64 = 0.0;
    let mut holder: f64 = 0.0;
    for _ in 0..100 {
        let s = random_surface(&mut rng)?;
        let h0 = s.total_h0.expect("generated with H0");
        let lhs = mass_brown_york(&s)? - mass_m2(&s)?;
        let rhs = h0 / (16.0 * PI) * (1.0 - s.total_h / h0).powi(2);
        identity = identity.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        holder = holder.max(mass_hawking(&s)? - mass_m(&s));
    }
    checks.push(Check::new(
        "m_BY - m2 = (H0/16pi)(1 - H/H0)^2",
        identity,
        1e-12,
    ));
    checks.push(Check::new("m >= m_H", holder.max(0.0), 1e-10));

    let mut round: f64 = 0.0;
    for _ in 0..100 {
        let r: f64 = rng.random_range(0.2..40.0);
        let x: f64 = rng.random_range(0.0..1.4);
        let s = SurfaceData::new(
            4.0 * PI * r * r,
            8.0 * PI * r * x,
            None,
            Some(8.0 * PI * r),
            true,
        )?;
        let m = mass_m(&s);
        round = round
            .max((mass_m1(&s)? - m).abs() / (1.0 + m.abs()))
            .max((mass_m2(&s)? - m).abs() / (1.0 + m.abs()));
    }
    checks.push(Check::new("round surfaces: m = m1 = m2", round, 1e-12));

    let s = schwarzschild_sphere_data(&CoordinateSphereSpec::at(1.0, 4.0)?)?;
    let report = verify_chain(&s, true);
    let want = [4.0 * (1.0 - 0.5f64.sqrt()), 1.0, 1.0, 1.0, 1.0];
    let got = [report.m_by, report.m2, report.m1, report.m_h, report.m];
    let dev = got
        .iter()
        .zip(want)
        .map(|(g, w)| g.map_or(f64::INFINITY, |g| (g - w).abs()))
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "schwarzschild sphere m=1 R=4 report",
        dev,
        1e-12,
    ));
    checks.push(Check::count(
        "schwarzschild sphere verdicts failing",
        report.verdicts.iter().filter(|v| !v.holds).count(),
    ));

    let mut below: f64 = 0.0;
    let mut not_strict = 0;
    let mut sphere: f64 = 0.0;
    for k in 0..10 {
        let c = 0.3 + 0.7 * k as f64 / 9.0;
        let ratio = minkowski_ratio(&spheroid_data(1.0, c, DEFAULT_SPHEROID_NODES)?)?;
        below = below.max(1.0 - ratio);
        if k == 9 {
            sphere = (ratio - 1.0).abs();
        } else {
            not_strict += usize::from(ratio - 1.0 <= 1e-10);
        }
    }
    checks.push(Check::new(
        "minkowski ratio >= 1 on spheroids",
        below.max(0.0),
        1e-10,
    ));
    checks.push(Check::new(
        "minkowski equality on the round sphere",
        sphere,
        1e-10,
    ));
    checks.push(Check::count(
        "non-round spheroids with ratio = 1",
        not_strict,
    ));
    Ok(checks)
}

fn penrose(options: VerifyOptions) -> Result<Vec<Check>> {
    let mut rng = rng(options, 4);
    let mut checks = Vec::new();

    let body = RotSymBody::schwarzschild(1.0, 4.0)?;
    let gap = localized_penrose_gap(&rotsym_body_outer_data(&body)?, body.horizon_area())?;
    checks.push(Check::new(
        "schwarzschild annulus gap_mass",
        gap.gap_mass.abs(),
        1e-10,
    ));
    checks.push(Check::new(
        "schwarzschild annulus gap_equiv",
        gap.gap_equiv.abs(),
        1e-10,
    ));
    let grid = SphereGrid::with_band_limit(options.band_limit.unwrap_or(8))?;
    let config = body.exterior_flow(&grid, 40.0)?;
    checks.push(Check::new(
        "outer mean curvature is constant",
        config.phi().max() - config.phi().min(),
        1e-10,
    ));

    let mut mismatches = 0;
    for _ in 0..100 {
        let r: f64 = rng.random_range(0.5..30.0);
        let r_h = r * rng.random_range(0.02..0.98);
        let total_h = 8.0 * PI * r * rng.random_range(0.02..1.3);
        let s = SurfaceData::new(4.0 * PI * r * r, total_h, None, Some(8.0 * PI * r), true)?;
        let g = localized_penrose_gap(&s, 4.0 * PI * r_h * r_h)?;
        mismatches += usize::from((g.gap_mass >= 0.0) != (g.gap_equiv >= 0.0));
    }
    checks.push(Check::count(
        "gap_mass and gap_equiv sign mismatches",
        mismatches,
    ));

    let mut oracle: f64 = 0.0;
    let mut metric: f64 = 0.0;
    let mut curvature: f64 = 0.0;
    for _ in 0..8 {
        let rh: f64 = rng.random_range(0.2..3.0);
        let outer = rh * rng.random_range(1.2..8.0);
        let eps = rng.random_range(-0.4..0.4);
        let a = schwarzschild_sphere_data(&CoordinateSphereSpec::at(0.5 * rh, outer)?)?;
        let b = rotsym_body_outer_data(&RotSymBody::new(rh, outer, BodyProfile::Schwarzschild)?)?;
        oracle = oracle
            .max((a.area - b.area).abs())
            .max((a.total_h - b.total_h).abs());
        for profile in [
            BodyProfile::Schwarzschild,
            BodyProfile::Tilted { eps },
            BodyProfile::ScaledMass { eps },
        ] {
            let body = RotSymBody::new(rh, outer, profile)?;
            let config = body.exterior_flow(&grid, 10.0 * outer)?;
            let g = gluing_match_check(&body, &config)?;
            metric = metric.max(g.metric_match / (outer * outer));
            curvature = curvature.max(g.mean_curvature_match);
        }
    }
    checks.push(Check::new("sphere and annulus oracles agree", oracle, 0.0));
    checks.push(Check::new("gluing metric match (relative)", metric, 1e-12));
    checks.push(Check::new("gluing mean curvature match", curvature, 1e-12));

    let mut misclassified = 0;
    for eps in [-0.2, -0.05, 0.05, 0.2] {
        let body = RotSymBody::new(2.0, 6.0, BodyProfile::ScaledMass { eps })?;
        let nonnegative = body.min_scalar_curvature(64) >= -1e-8;
        misclassified += usize::from(nonnegative != (eps >= 0.0));
    }
    checks.push(Check::count(
        "scaled-mass curvature sign misclassified",
        misclassified,
    ));
    Ok(checks)
}
