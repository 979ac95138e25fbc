//! Precoded block-sparse uplink multiple access.
//!
//! Users spread a short message of `d` symbols over a frame of `T` slots with a
//! per-user precoder; the base station sees a block-sparse linear system
//! `y = sqrt(rho0 * M) * B * s + z` and recovers the active users with greedy
//! block matching pursuit (BOMP) or its interference-cancelling variant (ICBOMP).
//!
//! Module map:
//!
//! - [`model`]: scenario configuration, precoders, channels, modulation and frame synthesis.
//! - [`operator`]: the matrix-free block dictionary and the restricted least-squares kernel.
//! - [`recovery`]: BOMP, ICBOMP and genie-aided baseline receivers.
//! - [`codec`]: the genie error-correction / detection function.
//! - [`analysis`]: coherence measurements and the recovery guarantees built on them.
//! - [`harness`]: Monte-Carlo driver, error counting, the supported-load table and file outputs.
//! - [`oracle`]: explicit dense reference computations used by the self-test and test suites.

pub mod analysis;
pub mod codec;
mod error;
pub mod exec;
pub mod harness;
pub mod kv;
pub(crate) mod linalg;
pub mod model;
pub mod operator;
pub mod oracle;
pub mod recovery;
pub mod rng;

pub use error::{Error, Result};
pub use exec::Execution;

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dense complex matrix (column-major).
pub type CMatrix = nalgebra::DMatrix<C64>;
