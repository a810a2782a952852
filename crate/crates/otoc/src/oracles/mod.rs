//! Independent ground-truth engines used to validate the MPO simulator.
//!
//! Three oracles live here, each built on different mathematics than the
//! tensor-network evolution it checks:
//!
//! * [`ed`] — exact diagonalization of small chains. Heisenberg operators
//!   are evolved through a full Hermitian eigendecomposition, so results
//!   are exact in time (no Trotter error) and limited only by chain
//!   length.
//! * [`free_fermion`] — closed-form quasiparticle amplitudes for the
//!   transverse-field chain, evaluated by converged quadrature over the
//!   single-particle dispersion.
//! * [`special`] — the special functions (Bessel `J_n`, Airy `Ai`, and a
//!   log-space perturbative growth form) that the analytic comparisons
//!   need at tight tolerances.
//!
//! Every evaluation is pure: no shared state, independently callable
//! across `(x, t)` points.

pub mod ed;
pub mod free_fermion;
pub mod special;
