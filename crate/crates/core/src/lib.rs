//! Asymptotic interference limits for CDMA signature selection with
//! finite-rate feedback, plus a seeded Monte Carlo engine to validate them.
//!
//! A receiver picks one signature vector out of a random codebook of
//! `2^R_fb` isotropic unit vectors and feeds the index back to the user.
//! When the processing gain `n`, the number of users `m` and the feedback
//! budget `R_fb` grow together with fixed ratios `tau = max(n,m)/min(n,m)`
//! and `c = R_fb/n`, the average residual interference converges to a
//! deterministic limit. This crate computes those limits exactly and
//! checks them against simulation of the finite system:
//!
//! * [`spectrum`] — the limiting eigenvalue measure of the normalized
//!   Wishart interference Gram matrix, with controlled-accuracy
//!   integration.
//! * [`ratefn`] — the tilt exponent `psi(x, alpha)`, its maximization
//!   `psi_bar(x)`, and the fixed point giving the limit for the
//!   interference-minimization selection rule.
//! * [`dirmatch`] — the limit for the direction-matching selection rule
//!   (closed form in the full-rank regime, a binary relative-entropy
//!   fixed point in the rank-deficient regime).
//! * [`randmat`] — seeded complex Gaussian matrices, isotropic codebooks,
//!   Hermitian eigendecomposition and column-space projectors.
//! * [`sim`] — the Monte Carlo engine for both selection criteria and an
//!   order-statistic cross-check oracle.
//! * [`cli`] — sweep orchestration, CSV and SVG output for the
//!   `cdma-sigopt` binary.
//!
//! Every random quantity is a pure function of `(master seed, trial
//! index, purpose tag)`, so sweeps reproduce bit-identically regardless
//! of thread count. See the crate examples for runnable entry points
//! into each capability.

pub mod cli;
pub mod dirmatch;
pub mod randmat;
pub mod ratefn;
pub mod sim;
pub mod spectrum;

pub use dirmatch::{solve_dirmatch, DirMatchBranch, DirMatchResult};
pub use randmat::{Codebook, InterferenceScene, MatrixModel, SystemDims};
pub use ratefn::{solve_xc, FixedPointResult, RateFnContext};
pub use sim::{run_sweep, CellSpec, Criterion, McEstimate, SweepPlan};
pub use spectrum::SpectrumParams;
