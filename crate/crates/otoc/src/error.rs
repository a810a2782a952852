//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by tensor algebra, MPO manipulation, evolution, oracles,
/// fitting, and serialization.
#[derive(Debug, Error)]
pub enum Error {
    // ---- tensor algebra ----
    #[error("tensor data length {len} does not match product of dims {dims:?}")]
    ShapeDataMismatch { dims: Vec<usize>, len: usize },
    #[error("tensor dims {dims:?} contain a zero extent")]
    ZeroExtent { dims: Vec<usize> },
    #[error("axis {axis} out of range for rank-{rank} tensor")]
    AxisOutOfRange { axis: usize, rank: usize },
    #[error("axis {axis} of {operand} appears more than once in the contraction pairs")]
    DuplicateAxis { operand: &'static str, axis: usize },
    #[error(
        "contracted extents differ: axis {axis_a} of a has extent {extent_a}, \
         axis {axis_b} of b has extent {extent_b}"
    )]
    ExtentMismatch {
        axis_a: usize,
        extent_a: usize,
        axis_b: usize,
        extent_b: usize,
    },
    #[error("expected a matrix-shaped (rank-2) tensor, got rank {rank}")]
    NotMatrix { rank: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian within {tol:.1e} (max deviation {dev:.3e})")]
    NotHermitian { dev: f64, tol: f64 },
    #[error("non-finite entry encountered in {context}")]
    NonFinite { context: &'static str },
    #[error("chi_max must be at least 1")]
    InvalidChiMax,
    #[error("eps_rel must be non-negative and finite, got {eps_rel}")]
    InvalidEpsRel { eps_rel: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    // ---- MPO ----
    #[error("site index {site} out of range 1..={length}")]
    SiteOutOfRange { site: usize, length: usize },
    #[error("bond index {bond} out of range 1..={max}")]
    BondOutOfRange { bond: usize, max: usize },
    #[error("chain length {length} exceeds the dense-reconstruction limit {limit}")]
    ChainTooLarge { length: usize, limit: usize },
    #[error("chain length must be at least {min}, got {length}")]
    ChainTooSmall { length: usize, min: usize },
    #[error("operator has zero norm")]
    ZeroNorm,
    #[error("MPO invariant violated: {0}")]
    InvalidMpo(String),
    #[error("ortho center must be adjacent to bond {bond} (at site {bond} or {}), found {found:?}", bond + 1)]
    CenterNotAdjacent { bond: usize, found: Option<usize> },

    // ---- evolution ----
    #[error("invalid Hamiltonian spec: {0}")]
    InvalidSpec(String),
    #[error("Trotter step dt must be positive, got {dt}")]
    InvalidDt { dt: f64 },
    #[error("Trotter order must be 1 or 2, got {order}")]
    InvalidOrder { order: u32 },
    #[error("non-finite tensor entries detected after step {step} (t = {t})")]
    NonFiniteAtStep { step: usize, t: f64 },
    #[error("t_max must be non-negative and finite, got {t_max}")]
    InvalidTMax { t_max: f64 },

    // ---- oracles ----
    #[error("Bessel order {n} exceeds the supported limit {limit}")]
    BesselOrderTooLarge { n: usize, limit: usize },
    #[error("Bessel argument {x} outside supported range [0, {limit}]")]
    BesselArgumentOutOfRange { x: f64, limit: f64 },
    #[error("Airy argument {z} outside supported range |z| <= {limit}")]
    AiryArgumentOutOfRange { z: f64, limit: f64 },
    #[error("quadrature failed to converge below {target:.1e} at {points} points (delta {delta:.3e})")]
    QuadratureNotConverged { points: usize, delta: f64, target: f64 },
    #[error("invalid free-fermion spec: {0}")]
    InvalidFreeFermionSpec(String),
    #[error("perturbative form requires a*t > 0, got a*t = {at}")]
    NonPositiveLogArgument { at: f64 },
    #[error("perturbative form requires b*x <= {limit}, got {bx}")]
    PerturbativeOrderTooLarge { bx: f64, limit: f64 },

    // ---- fitting ----
    #[error("fit window is empty (no grid points satisfy the window constraints)")]
    EmptyWindow,
    #[error("invalid fit window: {0}")]
    InvalidWindow(String),
    #[error("need at least {min} probes crossing the threshold, found {found}")]
    TooFewCrossings { found: usize, min: usize },
    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    // ---- serialization / snapshots ----
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    // ---- backend ----
    #[error("linear algebra backend error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
