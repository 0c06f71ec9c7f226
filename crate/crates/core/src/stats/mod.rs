//! Numerical kernels shared by the simulator and the empirical analyses.

pub mod correlation;
pub mod ols;
pub mod special;

pub use correlation::{cross_correlation, diff, log_diff, pearson, CorrelationError, CrossCorrelation};
pub use ols::{ols, OlsFit};
pub use special::{beta_inc, f_cdf, f_sf, ln_gamma};
