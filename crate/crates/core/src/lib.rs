//! Pseudospectral simulation of the nonlinear Schrödinger equation
//! `i u_t + Δu + λ|u|^σ u = 0` on periodic boxes in one and two dimensions,
//! with estimate checks for the finite speed of disturbance and
//! concatenation experiments.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod estimates;
pub mod experiments;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
