//! Partial least squares regression (PLSR) with an unbiased estimate of its
//! degrees of freedom.
//!
//! The crate fits the full PLSR path through a Lanczos-style recursion over
//! pseudo-weights and offers two independent engines for the degrees of
//! freedom of the fit:
//!
//! * [`dof_lanczos`] propagates the Jacobian of the regression coefficients
//!   through the recursion, which also yields an approximate hat matrix and
//!   a coefficient covariance.
//! * [`dof_krylov`] evaluates the trace of the fitted-value Jacobian directly
//!   from the Krylov representation `span{Ky, ..., K^m y}` with `K = X Xᵀ`.
//!
//! Both are checked against the finite-difference and closed-form instruments
//! in [`oracle`]. On top of them, [`selection`] implements BIC and k-fold
//! cross-validation model selection, [`baselines`] provides PCR, ridge and OLS
//! for complexity comparisons, [`comparison`] benchmarks PLS against PCR and
//! ridge on repeated splits, and [`simulate`] runs the radial-basis simulation
//! study.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod comparison;
pub mod dataprep;
pub mod dof_krylov;
pub mod dof_lanczos;
mod error;
pub mod linalg;
pub mod oracle;
pub mod pls;
pub mod selection;
pub mod simulate;

pub use error::{PlsError, Result};

pub use dataprep::{MomentSummary, RawDataset, StandardizedData};
pub use pls::PlsModel;
