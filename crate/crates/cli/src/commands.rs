use std::path::{Path, PathBuf};
use std::time::Instant;

use qsflow::flow::{run, FlowTrace};
use qsflow::masses::{localized_penrose_gap, verify_chain};
use qsflow::{Error, FlowConfig, MassReport, PenroseGap, SurfaceData};
use serde::Serialize;

use crate::config::{load, FlowRunConfig, MassesRunConfig};
use crate::error::{CliError, Result};
use crate::output::{write_atomic, write_json};

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMING_FILE: &str = "timing.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";
pub const MASSES_FILE: &str = "masses.json";

/// Command-line overrides shared by the subcommands.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub band_limit: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSummary {
    pub mass: f64,
    pub r0: f64,
    pub r_max: f64,
    pub band_limit: usize,
    pub step_safety: f64,
    pub sample_stride: usize,
    pub steps: usize,
    pub samples: usize,
    pub m0_estimate: Option<f64>,
    #[serde(rename = "Q_rmax")]
    pub q_rmax: f64,
    pub limit_consistency: Option<f64>,
    pub phi_projection_residual: f64,
}

impl FlowSummary {
    fn new(config: &FlowConfig, trace: &FlowTrace) -> Self {
        Self {
            mass: trace.background.mass(),
            r0: trace.background.r0(),
            r_max: config.r_max(),
            band_limit: config.grid().band_limit,
            step_safety: config.step_safety(),
            sample_stride: config.sample_stride(),
            steps: trace.steps,
            samples: trace.samples.len(),
            m0_estimate: trace.m0_estimate,
            q_rmax: trace.last().q,
            limit_consistency: trace.q_limit_check,
            phi_projection_residual: trace.phi_projection_residual,
        }
    }
}

/// Wall time lives apart from the summary so the summary stays
/// byte-reproducible.
#[derive(Debug, Serialize)]
struct Timing {
    wall_time_seconds: f64,
}

#[derive(Debug, Serialize)]
struct LastState {
    r: f64,
    v_min: f64,
    v_max: f64,
    v_mean: f64,
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    error: String,
    radius: f64,
    detail: String,
    last_state: LastState,
}

/// Writes `diagnostics.json` for a blow-up; other errors pass through.
pub fn report_failure(out: &Path, err: Error) -> CliError {
    if let Error::BlowUp {
        radius,
        detail,
        last_state,
    } = &err
    {
        let diag = Diagnostics {
            error: err.to_string(),
            radius: *radius,
            detail: detail.clone(),
            last_state: LastState {
                r: last_state.r,
                v_min: last_state.v.min(),
                v_max: last_state.v.max(),
                v_mean: last_state.v.mean(),
            },
        };
        if let Err(write_err) = write_json(out, DIAGNOSTICS_FILE, &diag) {
            return write_err;
        }
    }
    err.into()
}

/// Runs a flow from a config file, writing the trace, summary and timing.
/// Nothing but `diagnostics.json` is written when the flow fails.
pub fn cmd_flow(config_path: &Path, out: &Path, overrides: Overrides) -> Result<FlowSummary> {
    let file: FlowRunConfig = load(config_path)?;
    let config = file.build(overrides.band_limit, overrides.seed)?;
    let start = Instant::now();
    let trace = run(&config).map_err(|e| report_failure(out, e))?;
    let wall = start.elapsed().as_secs_f64();

    let mut csv = Vec::new();
    trace.write_csv(&mut csv).expect("writing to memory");
    let summary = FlowSummary::new(&config, &trace);
    write_atomic(out, TRACE_FILE, &csv)?;
    write_json(out, SUMMARY_FILE, &summary)?;
    write_json(
        out,
        TIMING_FILE,
        &Timing {
            wall_time_seconds: wall,
        },
    )?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassesOutput {
    pub surface: SurfaceData,
    #[serde(flatten)]
    pub report: MassReport,
    pub penrose_gap: Option<PenroseGap>,
    /// Smallest sampled scalar curvature of a `rotsym_body` source.
    pub min_scalar_curvature: Option<f64>,
}

const SCALAR_CURVATURE_SAMPLES: usize = 257;

pub fn masses(config: &MassesRunConfig) -> Result<MassesOutput> {
    let surface = config.surface.data()?;
    let body = config.surface.body()?;
    let report = verify_chain(&surface, config.nonnegative_scalar_curvature_filling);
    let horizon_area = config
        .horizon_area
        .or_else(|| body.map(|b| b.horizon_area()));
    let penrose_gap = horizon_area
        .map(|a| localized_penrose_gap(&surface, a))
        .transpose()?;
    Ok(MassesOutput {
        surface,
        report,
        penrose_gap,
        min_scalar_curvature: body.map(|b| b.min_scalar_curvature(SCALAR_CURVATURE_SAMPLES)),
    })
}

pub fn cmd_masses(config_path: &Path, out: &Path) -> Result<(MassesOutput, PathBuf)> {
    let config: MassesRunConfig = load(config_path)?;
    let output = masses(&config)?;
    let path = write_json(out, MASSES_FILE, &output)?;
    Ok((output, path))
}
