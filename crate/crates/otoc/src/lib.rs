//! Operator-spreading toolkit for one-dimensional spin-1/2 chains.
//!
//! The crate evolves a local Heisenberg-picture operator as a matrix-product
//! operator (MPO) under Trotterized unitary dynamics and measures how it
//! spreads: out-of-time-ordered correlators (OTOCs), operator entanglement
//! across every cut, and fits of the early-growth wavefront to a universal
//! form `C(x, t) ~ exp(-lambda (x - v_B t - x_0)^{1+p} / t^p)`.
//!
//! Modules, bottom up:
//!
//! - [`tensor`]: dense complex tensors, contraction, truncated SVD,
//!   Hermitian exponentials.
//! - [`mpo`]: matrix-product operators, canonical forms, operator
//!   entanglement, local super-operator expectations.
//! - [`snapshot`]: binary (de)serialization of MPO states for
//!   checkpoint/resume.
//! - [`hamiltonian`]: spin-chain Hamiltonians (mixed-field Ising,
//!   transverse-field Ising, Heisenberg) as bond terms.
//! - [`trotter`]: Trotter decompositions of the bond terms into layered
//!   two-site gates.
//! - [`evolve`]: Heisenberg-picture time evolution of an MPO under a gate
//!   plan, with truncation tracking.
//! - [`observables`]: squared commutators / OTOC grids, operator
//!   entanglement profiles, and an entanglement-vs-commutator bound check.
//! - [`oracles`]: independent cross-checks — exact diagonalization,
//!   free-fermion quadrature, Bessel/Airy evaluators, and the perturbative
//!   early-time form.
//! - [`fit`]: wavefront extraction and nonlinear fits of competing spreading
//!   forms, plus the data collapse onto the universal scaling variable.

// Link the BLAS/LAPACK provider into every binary that uses this library.
extern crate blas_src;

pub mod error;
pub mod evolve;
pub mod fit;
pub mod hamiltonian;
pub mod mpo;
pub mod observables;
pub mod oracles;
pub mod snapshot;
pub mod tensor;
pub mod trotter;

pub use error::{Error, Result};
pub use evolve::{apply_bond_gate, evolve, EvolutionSample, TrajectoryRecord};
pub use fit::{
    collapse, estimate_velocity, extract_window, fit_competitor, fit_competitor_seeded,
    fit_xs_form, fit_xs_form_seeded, upper_envelope, CollapsePoint, CompetitorModel, FitParams,
    FitResult, FitWindow, VelocityEstimate, WindowConfig, WindowPoint, XsFormGuess,
    DEFAULT_CROSSING_THRESHOLD, DEFAULT_RESTART_SEED,
};
pub use hamiltonian::{
    build_bond_terms, commutator, dense_hamiltonian, lift_single_site, lift_two_site, Boundary,
    HamiltonianSpec, Model,
};
pub use mpo::{
    canonicalize, entanglement_at_cut, expectation_local_superop, identity_mpo, local_pauli_mpo,
    mpo_to_dense, operator_norm, MatrixProductOperator, OperatorStateView, Pauli,
};
pub use observables::{
    boundary_decay_check, renyi_bound_check, squared_commutator, BoundaryDecayReport,
    EntanglementProfile, EntanglementRecorder, OtocGrid, OtocRecorder, RenyiBoundReport,
};
pub use oracles::ed::{
    dense_commutator_norm_sq, dense_operator_entanglement, ed_operator_entanglement, ed_otoc,
    ed_otoc_from_commutator, EdEvolution, SpectralDecomposition,
};
pub use oracles::free_fermion::{
    analytic_clock_factor, free_fermion_amplitudes, free_fermion_otoc, FreeFermionAmplitudes,
    FreeFermionSpec,
};
pub use oracles::special::{airy_ai, bessel_j, bessel_j_prime, perturbative_form};
pub use snapshot::{read_snapshot, write_snapshot};
pub use tensor::{contract, exp_i_hermitian, kron, svd_truncate, DenseTensor, SvdFactorization};
pub use trotter::{build_trotter_plan, GateLayer, TrotterPlan};
