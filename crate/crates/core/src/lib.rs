//! Conservative Hermite–DG solver for the 1D-1V Vlasov–Poisson system.
//!
//! Velocity is expanded in asymmetrically weighted Hermite functions and
//! each Hermite coefficient is a modal DG field on a periodic mesh. The
//! fully discrete schemes conserve mass, momentum and total energy to
//! roundoff.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod app;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod filter;
pub mod hermite;
pub mod mesh;
pub mod poisson;
pub mod quadrature;
pub mod scenarios;
pub mod skyline;
pub mod timestepper;
pub mod vlasov;

pub use error::{Error, Result};
