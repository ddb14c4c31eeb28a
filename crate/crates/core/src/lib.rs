//! Inertial primal-dual proximal splitting solvers — centralized,
//! diagonally preconditioned, stochastic-minibatch, and asynchronous
//! distributed — built on one randomized inertial Krasnosel'skii–Mann
//! fixed-point engine.

pub mod distnet;
pub mod error;
pub mod km;
pub mod linops;
pub mod minibatch;
pub mod pd;
pub mod prox;
pub mod trace;

pub use error::{Error, Result};
