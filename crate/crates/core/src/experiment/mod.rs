//! Configuration, sweeps, tabular output and the validation suite behind the
//! command-line harness.

pub mod config;
pub mod sweeps;
pub mod table;
pub mod validate;

pub use config::{
    parse_config, parse_override, ExperimentConfig, OutputFormat, RawConfig, SequenceChoice,
};
pub use sweeps::{
    checked_basis, dwell_sweep, eta1_sweep, phase_sweep, seed_sweep, spectrum, write_outputs,
    ExperimentOutput, Summary,
};
pub use table::{read_sweep_csv, Cell, SweepRow, SweepTable};
pub use validate::{validate, PropertyResult, ValidationReport};
