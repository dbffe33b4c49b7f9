//! Asymptotic Hofer growth of autonomous Hamiltonian flows on open surfaces
//! of infinite area.
//!
//! The growth rate of `t -> d(id, phi_H^t)` is `c_plus(H) - c_minus(H)`, where
//! `c_plus` is the largest energy whose superlevel set still carries a
//! non-contractible circle and `c_minus` is the mirror value for sublevel
//! sets. This crate computes both values on combinatorial surfaces, checks
//! them against brute-force cycle enumeration, builds the commuting
//! decomposition `H = K + H0` with its upper-bound certificate, and integrates
//! closed-form flows in charts to verify the structural identities.

pub mod surface;
pub mod field;
pub mod minimax;
pub mod oracle;
pub mod decomposition;
pub mod flow;
pub mod report;
