//! Experiment driver: random campaigns, CSV output, exhaustive oracles and
//! the command-line front end.

mod cli;
mod config;
mod oracle;
mod sweep;

pub use cli::{cli_main, EXIT_INFEASIBLE};
pub use config::{parse_list, ExperimentConfig, ExperimentRecord, OUT_DIR_ENV};
pub use oracle::{chain_oracle, ChainOracle, CHAIN_ORACLE_MAX_N};
pub use sweep::{
    generate_instance, measure, run_point, run_sweep, run_sweep_to_file, sweep_points, write_csv, Generated,
    Measurement, SweepPoint,
};
