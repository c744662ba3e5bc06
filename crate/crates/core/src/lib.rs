//! Explicit deep ReLU networks that reproduce quasi-optimal tensor-product
//! polynomial approximations.
//!
//! The pipeline has five stages, one module each:
//!
//! - [`multiindex`]: bound functions `b(ν)`, quasi-optimal index sets
//!   `Λ_M = {M smallest b(ν)}`, sublevel-set volume estimates and tail sums.
//! - [`orthopoly`]: shifted Legendre / monomial families on `[0,1]` in monic
//!   factored form, tensor products and expansions (the `u_Q` oracle).
//! - [`netcore`]: a layered ReLU network IR with evaluation, composition,
//!   complexity audit and JSON persistence.
//! - [`synth`]: weight-by-weight construction of squaring, product, factor and
//!   per-index subnetworks and the assembled network `u_NN`.
//! - [`verify`]: error measurement, convergence studies and bound checks.
//!
//! Networks are stored with `f64` weights. Evaluation is generic over
//! [`Scalar`], so the same network can be run in double-double arithmetic
//! when the error budgets fall below `f64` resolution.

pub mod error;
pub mod multiindex;
pub mod netcore;
pub mod orthopoly;
pub mod sampling;
pub mod scalar;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
pub use multiindex::{BoundFunction, BoundKind, MultiIndex, QuasiOptimalIndexSet};
pub use netcore::{Activation, ComplexityAudit, Layer, ReluNetwork};
pub use orthopoly::{FamilyKind, PolynomialFamily, QuasiOptimalExpansion};
pub use sampling::SamplerSpec;
pub use scalar::{Precision, Scalar};
