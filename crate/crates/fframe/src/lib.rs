//! Std companion to `fframe-core`: file formats, parallel drivers and the
//! `fframe` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;

pub use error::{CliError, Result};
