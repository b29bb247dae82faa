//! Finite-dimensional realization engine for Schur-class multipliers on the
//! Drury-Arveson space of the unit ball.
//!
//! The crate constructs, evaluates and certifies transfer-function
//! realizations S(lambda) = D + C (I - Z(lambda)A)^{-1} Z(lambda)B:
//! kernel evaluation and comparison, weak-coisometry certificates,
//! observability gramians and strong-stability checks, de Branges-Rovnyak
//! functional models with their input-operator parametrization,
//! Beurling-Lax inner representers built from homogeneous interpolation
//! data, and characteristic functions of commutative row contractions.

pub mod beurling;
pub mod demo;
pub mod charfun;
pub mod colligation;
pub mod error;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod mindex;
pub mod model;
pub mod observability;

pub use error::{EngineError, Result};
