//! Benchmark harness: problem configuration, reference tables, digit-level
//! comparison and table output.

mod config;
mod format;
mod reference;

pub use config::{
    asymmetric_depths, fifth_cosines, parse_list, tenth_cosines, uniform_depths, BenchmarkConfig,
    Depth, PhaseSource,
};
pub use format::{check_places, emit, sci, OutputFormat, MAX_PLACES, MIN_PLACES};
pub use reference::{
    compare, compare_grid, Comparison, Discrepancy, ReferenceTable, GRID_TOL, ZERO_CELL,
};
