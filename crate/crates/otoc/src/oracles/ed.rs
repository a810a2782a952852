//! Exact-diagonalization oracle for small chains.
//!
//! Heisenberg operators `W(t) = e^{iHt} X_r e^{-iHt}` are built from a
//! full Hermitian eigendecomposition of the dense Hamiltonian, so every
//! result here is exact in time — no Trotter splitting, no bond
//! truncation. The only approximation is floating-point roundoff, which
//! keeps these routines suitable as ground truth for the tensor-network
//! evolution at small `L`.
//!
//! Single-site probe operators are never materialized as matrices: a
//! Pauli on one site acts on computational-basis indices as a signed bit
//! permutation, so conjugations and commutators with probes cost `O(4^L)`
//! element operations instead of dense matrix products.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{dense_hamiltonian, lift_single_site, HamiltonianSpec};
use crate::mpo::Pauli;
use crate::tensor::{contract, eigh_hermitian, svd_truncate, DenseTensor};

/// Largest chain accepted by [`ed_otoc`]; `2^L × 2^L` dense algebra.
pub const ED_OTOC_LIMIT: usize = 12;

/// Largest chain accepted by [`ed_operator_entanglement`]; the regrouped
/// matricization there is `4^{L/2}`-sized, which caps out earlier.
pub const ED_ENTANGLEMENT_LIMIT: usize = 10;

/// Relative tolerance for the Hermiticity check on input matrices.
const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalues and eigenvectors of a Hermitian matrix, the engine behind
/// exact time evolution.
///
/// Eigenvalues are ascending; eigenvectors are the columns of a unitary
/// matrix in the same order. Reconstruction `E diag(λ) E†` reproduces the
/// input to `1e-10` in max-entry norm (pinned by a unit test).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DenseTensor,
}

impl SpectralDecomposition {
    /// Diagonalizes a Hermitian matrix.
    ///
    /// # Errors
    ///
    /// [`Error::NotHermitian`] when the input deviates from its adjoint
    /// by more than `1e-12` relative; shape and LAPACK errors propagate.
    pub fn new(h: &DenseTensor) -> Result<Self> {
        let view = h.as_matrix()?;
        let n = view.nrows();
        if view.ncols() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: view.ncols(),
            });
        }
        let mut dev = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                let upper = view[[i, j]];
                let lower = view[[j, i]];
                dev = dev.max((upper - lower.conj()).norm());
                scale = scale.max(upper.norm()).max(lower.norm());
            }
        }
        let tol = HERMITICITY_TOL * scale.max(1.0);
        if dev > tol {
            return Err(Error::NotHermitian { dev, tol });
        }
        let (eigenvalues, eigenvectors) = eigh_hermitian(&view)?;
        Ok(Self {
            eigenvalues: eigenvalues.to_vec(),
            eigenvectors: DenseTensor::from_matrix(&eigenvectors.view()),
        })
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary matrix whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &DenseTensor {
        &self.eigenvectors
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Rebuilds `E diag(λ) E†`; equals the input up to roundoff.
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.from_diagonal(&phases)
    }

    /// Propagator `e^{iHt} = E diag(e^{iλt}) E†`.
    pub fn propagator(&self, t: f64) -> Result<DenseTensor> {
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&v| Complex64::new(0.0, v * t).exp())
            .collect();
        self.from_diagonal(&phases)
    }

    /// Transforms `A` into the eigenbasis: `E† A E`.
    pub fn to_eigenbasis(&self, a: &DenseTensor) -> Result<DenseTensor> {
        let half = contract(&self.eigenvectors.conj(), a, &[(0, 0)])?;
        contract(&half, &self.eigenvectors, &[(1, 0)])
    }

    /// Transforms an eigenbasis matrix back: `E M E†`.
    pub fn from_eigenbasis(&self, m: &DenseTensor) -> Result<DenseTensor> {
        let half = contract(&self.eigenvectors, m, &[(1, 0)])?;
        contract(&half, &self.eigenvectors.conj(), &[(1, 1)])
    }

    /// `E diag(d) E†` with a single matrix product (columns pre-scaled).
    fn from_diagonal(&self, diagonal: &[Complex64]) -> Result<DenseTensor> {
        let dim = self.dim();
        let mut scaled = self.eigenvectors.clone();
        let data = scaled.data_mut();
        for row in 0..dim {
            let base = row * dim;
            for (col, &d) in diagonal.iter().enumerate() {
                data[base + col] *= d;
            }
        }
        contract(&scaled, &self.eigenvectors.conj(), &[(1, 1)])
    }
}

/// Precomputed spectral data for evolving one local operator: holds
/// `E`, `λ`, and the eigenbasis form of `X_r`, so each requested time
/// costs two dense matrix products.
#[derive(Debug, Clone)]
pub struct EdEvolution {
    length: usize,
    decomposition: SpectralDecomposition,
    operator_in_eigenbasis: DenseTensor,
}

impl EdEvolution {
    /// Prepares exact Heisenberg evolution of `X_r` under `spec`.
    ///
    /// # Errors
    ///
    /// [`Error::ChainTooLarge`] beyond [`ED_OTOC_LIMIT`] sites;
    /// [`Error::SiteOutOfRange`] for `r` outside `1..=L`; invalid specs
    /// propagate from the Hamiltonian builder.
    pub fn new(spec: &HamiltonianSpec, r: usize) -> Result<Self> {
        let h = dense_hamiltonian(spec)?;
        let decomposition = SpectralDecomposition::new(&h)?;
        let x = lift_single_site(spec.l, r, &Pauli::X.matrix())?;
        let operator_in_eigenbasis = decomposition.to_eigenbasis(&x)?;
        Ok(Self {
            length: spec.l,
            decomposition,
            operator_in_eigenbasis,
        })
    }

    /// Chain length.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Dense `W(t) = e^{iHt} X_r e^{-iHt}`.
    ///
    /// In the eigenbasis the evolution is elementwise:
    /// `M_{ij}(t) = e^{iλ_i t} X̃_{ij} e^{-iλ_j t}`.
    pub fn operator_at(&self, t: f64) -> Result<DenseTensor> {
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "evolution time must be finite, got {t}"
            )));
        }
        let dim = self.decomposition.dim();
        let phases: Vec<Complex64> = self
            .decomposition
            .eigenvalues()
            .iter()
            .map(|&v| Complex64::new(0.0, v * t).exp())
            .collect();
        let mut modulated = self.operator_in_eigenbasis.clone();
        let data = modulated.data_mut();
        for i in 0..dim {
            let base = i * dim;
            let pi = phases[i];
            for (j, &pj) in phases.iter().enumerate() {
                data[base + j] *= pi * pj.conj();
            }
        }
        self.decomposition.from_eigenbasis(&modulated)
    }
}

/// The action of a single-site Pauli on computational-basis indices:
/// `V|b⟩ = phase[b]·|perm[b]⟩`. Site 1 is the most significant bit,
/// matching the dense lifting convention.
fn pauli_basis_action(
    length: usize,
    site: usize,
    probe: Pauli,
) -> Result<(Vec<usize>, Vec<Complex64>)> {
    if site == 0 || site > length {
        return Err(Error::SiteOutOfRange { site, length });
    }
    let dim = 1usize << length;
    let mask = 1usize << (length - site);
    let one = Complex64::new(1.0, 0.0);
    let mut perm = Vec::with_capacity(dim);
    let mut phase = Vec::with_capacity(dim);
    for b in 0..dim {
        let bit_set = b & mask != 0;
        let (target, factor) = match probe {
            Pauli::I => (b, one),
            Pauli::X => (b ^ mask, one),
            Pauli::Y => (
                b ^ mask,
                if bit_set {
                    Complex64::new(0.0, -1.0)
                } else {
                    Complex64::new(0.0, 1.0)
                },
            ),
            Pauli::Z => (b, if bit_set { -one } else { one }),
        };
        perm.push(target);
        phase.push(factor);
    }
    Ok((perm, phase))
}

/// Exact squared commutator
/// `C(t) = 2 − (2/2^L)·Re Tr(W(t) V W(t) V)` between the evolved
/// `W(t) = e^{iHt} X_r e^{-iHt}` and the probe Pauli `V` on site `r'`,
/// at each requested time. The trace form is valid because both `W` and
/// `V` are Hermitian and unitary.
///
/// # Errors
///
/// [`Error::ChainTooLarge`] beyond 12 sites; [`Error::SiteOutOfRange`]
/// for bad `r` or `r'`; [`Error::InvalidArgument`] for non-finite times.
pub fn ed_otoc(
    spec: &HamiltonianSpec,
    r: usize,
    r_prime: usize,
    probe: Pauli,
    times: &[f64],
) -> Result<Vec<f64>> {
    let evolution = EdEvolution::new(spec, r)?;
    let (perm, phase) = pauli_basis_action(spec.l, r_prime, probe)?;
    let dim = 1usize << spec.l;
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let w = evolution.operator_at(t)?;
        let data = w.data();
        // Tr(W·VWV) with (VWV)[j,i] = phase[perm[j]]·W[perm[j],perm[i]]·phase[i].
        let mut trace = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            let row = i * dim;
            let col = perm[i];
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..dim {
                acc += data[row + j] * phase[perm[j]] * data[perm[j] * dim + col];
            }
            trace += acc * phase[i];
        }
        values.push(2.0 - 2.0 * trace.re / dim as f64);
    }
    Ok(values)
}

/// The same squared commutator evaluated literally:
/// `C(t) = ‖[W(t), V]‖²_F / 2^L`. Algebraically identical to [`ed_otoc`]
/// for Hermitian unitary operators; kept as an independent cross-check of
/// the trace form.
///
/// # Errors
///
/// Same domain as [`ed_otoc`].
pub fn ed_otoc_from_commutator(
    spec: &HamiltonianSpec,
    r: usize,
    r_prime: usize,
    probe: Pauli,
    times: &[f64],
) -> Result<Vec<f64>> {
    let evolution = EdEvolution::new(spec, r)?;
    let (perm, phase) = pauli_basis_action(spec.l, r_prime, probe)?;
    let dim = 1usize << spec.l;
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let w = evolution.operator_at(t)?;
        values.push(commutator_frobenius_sq(w.data(), dim, &perm, &phase) / dim as f64);
    }
    Ok(values)
}

/// `‖[W, V]‖²_F` for a dense operator and the signed bit permutation of a
/// single-site Pauli, using
/// `(WV)[i,j] = W[i,perm[j]]·phase[j]` and
/// `(VW)[i,j] = phase[perm[i]]·W[perm[i],j]`.
fn commutator_frobenius_sq(
    data: &[Complex64],
    dim: usize,
    perm: &[usize],
    phase: &[Complex64],
) -> f64 {
    let mut total = 0.0_f64;
    for i in 0..dim {
        let row = i * dim;
        let swapped_row = perm[i] * dim;
        let left_phase = phase[perm[i]];
        for j in 0..dim {
            let wv = data[row + perm[j]] * phase[j];
            let vw = left_phase * data[swapped_row + j];
            total += (wv - vw).norm_sqr();
        }
    }
    total
}

/// Normalized squared commutator norm
/// `‖[W, V]‖² = Tr([W,V]†[W,V]) / 2^L` between a dense operator and a
/// single-site Pauli, in the infinite-temperature trace convention
/// (same-site calibration: `‖[X, Z]‖² = 4`).
///
/// # Errors
///
/// [`Error::SiteOutOfRange`] for a bad site;
/// [`Error::InvalidArgument`] when the operator is not `2^L × 2^L`.
pub fn dense_commutator_norm_sq(
    w: &DenseTensor,
    length: usize,
    site: usize,
    probe: Pauli,
) -> Result<f64> {
    let dim = 1usize << length;
    let view = w.as_matrix()?;
    if view.nrows() != dim || view.ncols() != dim {
        return Err(Error::InvalidArgument(format!(
            "operator is {}x{}, expected {dim}x{dim} for {length} sites",
            view.nrows(),
            view.ncols()
        )));
    }
    let (perm, phase) = pauli_basis_action(length, site, probe)?;
    Ok(commutator_frobenius_sq(w.data(), dim, &perm, &phase) / dim as f64)
}

/// Operator entanglement of a dense operator across a cut after
/// `cut` sites: reshapes `W[i,j]` into the matricization
/// `M[(i_A, j_A), (i_B, j_B)]`, takes its singular values, normalizes
/// the spectrum, and returns `(S_vn, S_renyi2)`.
///
/// This is the dense counterpart of the MPO bond-spectrum entropy; the
/// two agree to SVD accuracy on any operator both can represent.
///
/// # Errors
///
/// [`Error::ChainTooLarge`] beyond [`ED_ENTANGLEMENT_LIMIT`] sites;
/// [`Error::BondOutOfRange`] unless `1 <= cut <= L-1`;
/// [`Error::ShapeDataMismatch`]/[`Error::NotMatrix`] for a tensor that is
/// not `2^L × 2^L`.
pub fn dense_operator_entanglement(
    w: &DenseTensor,
    length: usize,
    cut: usize,
) -> Result<(f64, f64)> {
    if length > ED_ENTANGLEMENT_LIMIT {
        return Err(Error::ChainTooLarge {
            length,
            limit: ED_ENTANGLEMENT_LIMIT,
        });
    }
    if cut == 0 || cut >= length {
        return Err(Error::BondOutOfRange {
            bond: cut,
            max: length.saturating_sub(1),
        });
    }
    let dim = 1usize << length;
    let view = w.as_matrix()?;
    if view.nrows() != dim || view.ncols() != dim {
        return Err(Error::InvalidArgument(format!(
            "operator is {}x{}, expected {dim}x{dim} for {length} sites",
            view.nrows(),
            view.ncols()
        )));
    }
    let right_sites = length - cut;
    let rows = 1usize << (2 * cut);
    let cols = 1usize << (2 * right_sites);
    let right_mask = (1usize << right_sites) - 1;
    let data = w.data();
    let mut regrouped = vec![Complex64::new(0.0, 0.0); rows * cols];
    for i in 0..dim {
        let i_left = i >> right_sites;
        let i_right = i & right_mask;
        for j in 0..dim {
            let j_left = j >> right_sites;
            let j_right = j & right_mask;
            let row = (i_left << cut) | j_left;
            let col = (i_right << right_sites) | j_right;
            regrouped[row * cols + col] = data[i * dim + j];
        }
    }
    let matrix = DenseTensor::new(vec![rows, cols], regrouped)?;
    let factorization = svd_truncate(&matrix, rows.min(cols), 0.0)?;
    let (s_vn, s_renyi2, _) = crate::mpo::entropies_from_schmidt(&factorization.singular_values)?;
    Ok((s_vn, s_renyi2))
}

/// Exact operator entanglement `(S_vn, S_renyi2)` of
/// `W(t) = e^{iHt} X_r e^{-iHt}` across the cut after site `cut`.
///
/// # Errors
///
/// Same domain as [`dense_operator_entanglement`], plus spec and site
/// validation from the evolution builder.
pub fn ed_operator_entanglement(
    spec: &HamiltonianSpec,
    r: usize,
    cut: usize,
    t: f64,
) -> Result<(f64, f64)> {
    if spec.l > ED_ENTANGLEMENT_LIMIT {
        return Err(Error::ChainTooLarge {
            length: spec.l,
            limit: ED_ENTANGLEMENT_LIMIT,
        });
    }
    if cut == 0 || cut >= spec.l {
        return Err(Error::BondOutOfRange {
            bond: cut,
            max: spec.l.saturating_sub(1),
        });
    }
    let evolution = EdEvolution::new(spec, r)?;
    let w = evolution.operator_at(t)?;
    dense_operator_entanglement(&w, spec.l, cut)
}
