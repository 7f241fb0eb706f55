//! Tools for asking when a closed quantum system, specified by nothing more
//! than a finite-dimensional Hamiltonian, admits a tensor factorization into
//! "system" and "environment" with quasi-classical dynamics.
//!
//! The crate provides:
//!
//! - [`hilbert`]: dense complex operators, states, tensor products, partial
//!   traces, spectral evolution, and entropy primitives.
//! - [`gpo`]: generalized Pauli (clock/shift) algebra on odd-dimensional
//!   spaces, the conjugate pair `phi`/`pi`, Schwinger-basis expansions,
//!   shift profiles, and operator collimation.
//! - [`factorization`]: generalized Gell-Mann generators, factorization-change
//!   unitaries, and the split of a Hamiltonian into self terms plus a
//!   diagonal (operator-Schmidt) interaction.
//! - [`entropy`]: closed-form O(t^2) entanglement growth, pointer-observable
//!   variance rates, pointer-entropy derivatives, reduced-dynamics terms, and
//!   decoherence rates/timescales, each paired with exact-evolution oracles.
//! - [`cpo`]: the candidate pointer observable (the product operator most
//!   compatible with the interaction Hamiltonian) and peaked trial states.
//! - [`sweep`]: the factorization sweep that scores each candidate split by
//!   its Schwinger entropy and searches for the quasi-classical one.
//! - [`ensemble`]: the self-Hamiltonian ensemble correlating collimation,
//!   variance rates, and pointer-entropy growth.

pub mod cpo;
pub mod ensemble;
pub mod entropy;
mod error;
pub mod factorization;
pub mod gpo;
pub mod hilbert;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
