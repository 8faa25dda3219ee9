//! Seeded Monte-Carlo experiments for confined OMP, emitting CSV tables.
//!
//! ```no_run
//! use confined_omp_bench::{run_experiment, Experiment, ExperimentConfig};
//!
//! let cfg = ExperimentConfig::from_pairs(Experiment::NuVsK, &[("trials", "100")]).unwrap();
//! let table = run_experiment(&cfg).unwrap();
//! print!("{}", table.to_csv_string());
//! ```

pub mod config;
mod error;
pub mod experiments;
pub mod seed;
pub mod table;

pub use config::{read_config_file, Algorithm, Experiment, ExperimentConfig};
pub use error::{BenchError, Result};
pub use experiments::run_experiment;
pub use table::{Table, Value};
