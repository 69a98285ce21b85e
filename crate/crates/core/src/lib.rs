//! Sensitivity of conjugate Bayesian inference to local-mixture perturbations
//! of the prior.
//!
//! A base prior `pi0(mu; theta)` is perturbed to
//! `pi0 (1 + l2 q2 + l3 q3 + l4 q4)`, where `q_j` is the `j`-th mean-derivative
//! of `pi0` divided by `pi0`. The crate evaluates the perturbed posterior in
//! closed form, measures local and global sensitivity (direction function,
//! posterior-mean shift, predictive Kullback–Leibler divergence), searches the
//! feasible perturbation region for worst cases, and marginalises over
//! perturbations in a two-component normal mixture by MCMC.
//!
//! Runnable walkthroughs live in `examples/`; the `lmrobust` binary exposes
//! the same analyses from the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod mixture;
pub mod numerics;
pub mod optimizer;
pub mod perturbation;
pub mod posterior;
pub mod prior;
pub mod sensitivity;
pub mod simulate;

pub use error::{Error, Result};
pub use perturbation::{
    boundary_point, boundary_quartic, ray_to_boundary, skew_ridge_point, symmetric_boundary_point,
    BoundaryChartPoint, ChartValidity, Feasibility, FeasibleRegion, PerturbationVector,
};
pub use posterior::PosteriorContext;
pub use prior::{NefPrior, PriorFamily, QFunction};
