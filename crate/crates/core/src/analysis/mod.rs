//! Configuration parsing, studies, exports and full runs.

pub mod config;
pub mod export;
pub mod run;
pub mod studies;

pub use config::{config_echo, parse_config, parse_f64, settings_echo, Settings};
pub use export::{cross_section, cross_section_csv, Table};
pub use run::{read_table, run_full, Command, RunOutput, SECTION_POINTS};
pub use studies::*;
