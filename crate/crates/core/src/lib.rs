//! Desk-scale numerical verification of pair-partition central limit
//! formulas, CAR/CCR quasi-free moments, and Khintchine-type two-sided
//! norm equivalences, with observed constants reported against fixed
//! budgets.
//!
//! Layout follows the computation, bottom up:
//! [`linalg`] is the dense complex kernel, [`partitions`] the pair-partition
//! combinatorics, [`quasifree`] the CAR matrices and Wick evaluator,
//! [`climit`] the random-sign central limit model, [`khintchine`] the
//! two-sided norm machinery and its convex solvers, and [`opspaces`] the
//! fixed-level operator-space norms.

pub mod climit;
pub mod khintchine;
pub mod linalg;
pub mod opspaces;
pub mod partitions;
pub mod quasifree;
pub mod testutil;

pub use linalg::CMatrix;
