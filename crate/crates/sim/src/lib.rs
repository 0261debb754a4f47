//! Monte Carlo BER experiments on top of `rstc-core`: scheme selection,
//! reproducible seeding, parallel sweeps, CSV output and comparison reports.
//!
//! A sweep is fully determined by its [`SimConfig`]. Every trial draws its
//! randomness from streams keyed by a hash of the master seed and the trial's
//! coordinates, so results do not depend on thread count or scheduling.
// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod seeding;
pub mod sweep;
pub mod trial;

pub use config::{parse_snr_list, BaselineReceiver, Scheme, SimConfig};
pub use error::{Result, SimError};
pub use output::{emit_csv, format_ber, read_csv, write_csv};
pub use report::{compare_report, crossing, gain_db};
pub use sweep::{run_point, run_sweep, BerPoint};
pub use trial::{run_trial, TrialCounts};
