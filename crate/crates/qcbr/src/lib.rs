//! Quantum case-based reasoning on a classical statevector simulator.
//!
//! The crate bundles a dense simulator ([`qsim`]), a data re-uploading
//! variational classifier ([`vqc`]), gradient-free optimizers ([`optim`]),
//! a warm-startable VQE over diagonal Ising Hamiltonians ([`vqe`]), the
//! social workers' scheduling model and dataset generator ([`swp`]),
//! PCA/ICA feature reduction ([`preprocess`]), and the case memory with
//! its retrieve/reuse/revise/retain cycle ([`casemem`]).

pub mod casemem;
pub mod error;
pub mod io;
pub mod optim;
pub mod preprocess;
pub mod qsim;
pub mod swp;
pub mod vqc;
pub mod vqe;

pub use error::{QcbrError, Result};
