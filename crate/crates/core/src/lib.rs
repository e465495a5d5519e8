//! Statistics of the sum of correlated squared κ-μ shadowed random variables
//! and the performance of maximal ratio combining (MRC) receivers built on it.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: special functions (log-gamma, Bessel, ₁F₁, ₂F₁, incomplete
//!   gamma, Q-function, quadrature) evaluated with explicit error estimates.
//! - [`model`]: validated channel parameters, the eigenvalues of **DC** and the
//!   δ_k recursion that drives every power series in the crate.
//! - [`analytic`]: PDF, MGF and asymptotic MGF of the combined SNR.
//! - [`performance`]: SER, BER and ergodic capacity.
//! - [`montecarlo`]: physical-model sampler used as the independent oracle.
//!
//! With the default `parallel` feature the heavy loops (Monte Carlo trials,
//! grid evaluations) run on rayon; disabling it gives a sequential build with
//! identical output.

pub mod analytic;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod par;
pub mod performance;
pub mod specfun;

pub use analytic::PdfSeries;
pub use error::{Error, Result};
pub use model::{ChannelParams, SeriesCoefficients, TruncationPolicy};
pub use montecarlo::SampleBatch;
pub use performance::{ConstellationFamily, ConstellationSpec};
pub use specfun::EvalResult;
