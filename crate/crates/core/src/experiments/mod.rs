//! Built-in problems, the convergence-table batch and the flat config format.

mod config;
mod examples;
mod table1;

pub use config::{load_config, parse_config, RunConfig, SEED_ENV};
pub use examples::{
    builtin_example, builtin_example_with, piecewise_spectrum, BuiltinExample, ExampleId,
    FINE_CELLS, REFERENCE_MODES,
};
pub use table1::{
    reference_values, run_table1, summarize, write_field_csv, write_profile_csv, write_summary_csv,
    write_table1_csv, CellSummary, RunReport, Table1Config, TimeKernels,
};
