//! Bosonic quantum dynamics in the L-functional representation over truncated Fock spaces.

pub mod dyson;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod inclusive;
pub mod keldysh;
pub mod lfunctional;
pub mod poly;
pub mod quadrature;
pub mod sample;
pub mod selfcheck;

pub use error::{Error, Result};
pub use fock::{FockOperator, FockSpace, Ladder, Matrix, ModeSet, PolyCoefficients, Spectrum, C64};
pub use lfunctional::{CorrelationTable, GaussianL, LFunctional, Sigma, Word};
