//! File formats, reports and the `gasdemand` command-line tool around
//! [`gasdemand_core`].

#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod csvio;
pub mod persist;
pub mod report;
pub mod svg;

pub use gasdemand_core as core;
