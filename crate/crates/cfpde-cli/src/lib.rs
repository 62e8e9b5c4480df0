//! Support library for the `cfpde` command-line driver: evaluation grids,
//! method/exact comparison tables and the deterministic CSV emitter.

pub mod grid;
pub mod report;

pub use grid::GridSpec;
pub use report::{error_table, fmt_float, solve_table, write_csv, ErrorReport, Method, ReportRow};
