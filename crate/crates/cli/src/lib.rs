//! Batch front-end for `qsflow`: JSON configs in, CSV and JSON results out.
//!
//! Exit codes are 0 on success, 1 for failed verification or I/O errors,
//! 2 for invalid input and 3 when a flow blows up.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

pub use error::{CliError, Result};
