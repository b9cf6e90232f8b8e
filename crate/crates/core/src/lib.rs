//! Exact Bethe Ansatz treatment of the spin-changing-collision Hamiltonian
//! and simulation of active (SU(1,1)-type) atom interferometers built on it.

pub mod bethe;
pub mod eigenbasis;
pub mod error;
pub mod experiment;
pub mod interferometer;
pub mod metrology;
pub mod model;

pub use error::{Result, SccError};
