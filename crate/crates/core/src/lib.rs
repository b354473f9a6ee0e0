//! Exact value to production-price transformation for N-branch economies.
//!
//! [`model`] holds absolute tables and their capital-normalized coefficients,
//! [`linalg`] the small dense kernels, [`solver`] the price system, capital
//! allocation and rate-of-profit searches, and [`dynamics`] the scenario engine.

#![no_std]

extern crate alloc;

pub mod dynamics;
pub mod linalg;
pub mod model;
pub mod solver;
