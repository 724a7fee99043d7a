//! Census orchestration, file formats and the command line for exact
//! interval exchange experiments built on `iet-core`.
//!
//! - [`config`]: census configuration.
//! - [`census`]: per-sample records, run in parallel with ordered output.
//! - [`summary`]: per-window tables, regression and soundness checks.
//! - [`io`]: JSONL and CSV.
//! - [`claims`]: the generated claim map.
//! - [`cli`]: the `iet` command.

pub mod census;
pub mod claims;
pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod record;
mod serial;
pub mod summary;

pub use census::{run_census, Census};
pub use config::SamplerConfig;
pub use error::DataError;
pub use record::CensusRecord;
pub use summary::{summarize, SummaryTable};
