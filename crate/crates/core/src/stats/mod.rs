//! Significance testing, rater agreement and threshold auditing.

pub mod bootstrap;
pub mod kappa;
pub mod sweep;

pub use bootstrap::{paired_bootstrap, BootstrapResult};
pub use kappa::{bin_values, fleiss_kappa, Binning, KappaResult, RatingsTable};
pub use sweep::{theta_sweep, Grid, PairDumpRow, ReviewLabels, SweepOutput, SweepRow, SystemPredictions};
