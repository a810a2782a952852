//! Matrix-product operators for spin-1/2 chains: canonical forms, norms,
//! operator entanglement at cuts, and local super-operator expectations.
//!
//! # Conventions
//!
//! Sites are numbered `1..=L` and bonds/cuts `1..=L-1`, with cut `x` lying
//! between sites `x` and `x+1`. Each site tensor has axes
//! `(left-bond, physical-out, physical-in, right-bond)`.
//!
//! Operator-state inner products carry a factor 1/2 per site, so that
//! `<W|W> = Tr(W' W)/2^L` (with `W'` the conjugate transpose) and every
//! unitary — in particular a single Pauli — has operator norm exactly 1.
//! Canonical (isometric) tensors are defined in the same halved metric:
//! a left-isometric tensor satisfies `(1/2) sum_s A_s' A_s = I` over the
//! four fused physical values `s`. A product tensor holding one Pauli matrix
//! is then literally isometric, so canonicalization leaves product MPOs
//! bit-identical and the orthogonality-center tensor carries the full norm:
//! `<W|W> = ||T_c||_F^2 / 2`.
//!
//! Gauge moves fix QR phases so triangular factors have real non-negative
//! diagonals, making canonical forms deterministic. Moves across bonds of
//! dimension 1 are performed in closed form; a tensor that is exactly
//! norm-2 (e.g. an untouched identity or Pauli tensor) passes through
//! unchanged, which keeps the identity tail of an evolved local operator
//! exact outside its light cone.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use ndarray::prelude::*;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{contract, lq_positive, qr_positive, svd_truncate, DenseTensor};

/// Largest chain length for which dense reconstruction is permitted.
pub const DENSE_LIMIT: usize = 12;

/// Relative threshold below which Schmidt values are treated as zero in
/// entropy formulas.
pub const SPECTRUM_FLOOR: f64 = 1e-14;

/// Single-site Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    /// Identity.
    I,
    /// sigma_x.
    X,
    /// sigma_y.
    Y,
    /// sigma_z.
    Z,
}

impl Pauli {
    /// The 2x2 matrix as a rank-2 tensor.
    pub fn matrix(self) -> DenseTensor {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let data = match self {
            Pauli::I => vec![one, z, z, one],
            Pauli::X => vec![z, one, one, z],
            Pauli::Y => vec![z, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), z],
            Pauli::Z => vec![one, z, z, -one],
        };
        DenseTensor::new(vec![2, 2], data).expect("static shape")
    }

    /// All four labels in conventional order.
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" => Ok(Pauli::I),
            "X" | "x" => Ok(Pauli::X),
            "Y" | "y" => Ok(Pauli::Y),
            "Z" | "z" => Ok(Pauli::Z),
            other => Err(Error::InvalidSpec(format!(
                "unknown Pauli label {other:?}; expected one of I, X, Y, Z"
            ))),
        }
    }
}

/// A matrix-product operator on a spin-1/2 chain.
///
/// Invariants (enforced by construction and preserved by every operation):
/// `bond_dims` has length `L+1` with `bond_dims[0] = bond_dims[L] = 1`, and
/// the tensor for site `r` (1-based) has extents
/// `(bond_dims[r-1], 2, 2, bond_dims[r])`. When `ortho_center = Some(c)`,
/// tensors left of site `c` are left-isometric and tensors right of it are
/// right-isometric in the halved metric described in the module docs.
#[derive(Debug, Clone)]
pub struct MatrixProductOperator {
    pub(crate) site_tensors: Vec<DenseTensor>,
    pub(crate) bond_dims: Vec<usize>,
    pub(crate) ortho_center: Option<usize>,
    physical_dim: usize,
}

impl MatrixProductOperator {
    /// Builds an MPO from rank-4 site tensors, validating the chain shape.
    ///
    /// No canonical structure is asserted (`ortho_center` is `None`).
    pub fn new(site_tensors: Vec<DenseTensor>) -> Result<Self> {
        Self::with_center(site_tensors, None)
    }

    pub(crate) fn with_center(
        site_tensors: Vec<DenseTensor>,
        ortho_center: Option<usize>,
    ) -> Result<Self> {
        let length = site_tensors.len();
        if length == 0 {
            return Err(Error::ChainTooSmall { length: 0, min: 1 });
        }
        let mut bond_dims = Vec::with_capacity(length + 1);
        bond_dims.push(1usize);
        for (i, t) in site_tensors.iter().enumerate() {
            let d = t.dims();
            if d.len() != 4 {
                return Err(Error::InvalidMpo(format!(
                    "site {} tensor has rank {}, expected 4",
                    i + 1,
                    d.len()
                )));
            }
            if d[1] != 2 || d[2] != 2 {
                return Err(Error::InvalidMpo(format!(
                    "site {} tensor has physical extents {}x{}, expected 2x2",
                    i + 1,
                    d[1],
                    d[2]
                )));
            }
            if d[0] != bond_dims[i] {
                return Err(Error::InvalidMpo(format!(
                    "site {} left bond {} does not match previous right bond {}",
                    i + 1,
                    d[0],
                    bond_dims[i]
                )));
            }
            bond_dims.push(d[3]);
        }
        if bond_dims[0] != 1 || bond_dims[length] != 1 {
            return Err(Error::InvalidMpo(
                "edge bond dimensions must be 1".to_string(),
            ));
        }
        if let Some(c) = ortho_center {
            if c == 0 || c > length {
                return Err(Error::SiteOutOfRange { site: c, length });
            }
        }
        Ok(Self {
            site_tensors,
            bond_dims,
            ortho_center,
            physical_dim: 2,
        })
    }

    /// Chain length `L`.
    pub fn length(&self) -> usize {
        self.site_tensors.len()
    }

    /// Local physical dimension (always 2).
    pub fn physical_dim(&self) -> usize {
        self.physical_dim
    }

    /// Bond dimensions, length `L+1`; entry `i` is the bond between sites
    /// `i` and `i+1` (edges at indices 0 and `L` are always 1).
    pub fn bond_dims(&self) -> &[usize] {
        &self.bond_dims
    }

    /// Largest bond dimension along the chain.
    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims.iter().copied().max().unwrap_or(1)
    }

    /// Site tensors in chain order; slice index `r-1` holds site `r`.
    pub fn site_tensors(&self) -> &[DenseTensor] {
        &self.site_tensors
    }

    /// The rank-4 tensor at 1-based site `r`.
    pub fn site_tensor(&self, r: usize) -> Result<&DenseTensor> {
        if r == 0 || r > self.length() {
            return Err(Error::SiteOutOfRange {
                site: r,
                length: self.length(),
            });
        }
        Ok(&self.site_tensors[r - 1])
    }

    /// Orthogonality center (1-based), or `None` when no canonical structure
    /// is asserted.
    pub fn ortho_center(&self) -> Option<usize> {
        self.ortho_center
    }

    /// True when every tensor entry is finite.
    pub fn all_finite(&self) -> bool {
        self.site_tensors.iter().all(DenseTensor::all_finite)
    }
}

/// The same tensors reinterpreted as a matrix-product state with physical
/// dimension 4 (out and in legs fused, out more significant).
///
/// Fusing is a pure reindexing — the row-major layouts of `(chi_l, 2, 2,
/// chi_r)` and `(chi_l, 4, chi_r)` coincide — so [`OperatorStateView::unfuse`]
/// recovers the MPO bit-exactly. Under the halved metric of the module docs
/// the view's squared norm equals `Tr(W' W)/2^L`.
#[derive(Debug, Clone)]
pub struct OperatorStateView {
    site_tensors: Vec<DenseTensor>,
    bond_dims: Vec<usize>,
    ortho_center: Option<usize>,
}

impl OperatorStateView {
    /// Reinterprets an MPO as an operator-state MPS.
    pub fn fuse(w: &MatrixProductOperator) -> Self {
        let site_tensors = w
            .site_tensors
            .iter()
            .map(|t| {
                let d = t.dims();
                t.clone()
                    .reshape(vec![d[0], 4, d[3]])
                    .expect("fusing preserves total length")
            })
            .collect();
        Self {
            site_tensors,
            bond_dims: w.bond_dims.clone(),
            ortho_center: w.ortho_center,
        }
    }

    /// Recovers the rank-4 MPO form, bit-identically.
    pub fn unfuse(self) -> MatrixProductOperator {
        let site_tensors: Vec<DenseTensor> = self
            .site_tensors
            .into_iter()
            .map(|t| {
                let d = t.dims().to_vec();
                t.reshape(vec![d[0], 2, 2, d[2]])
                    .expect("unfusing preserves total length")
            })
            .collect();
        MatrixProductOperator::with_center(site_tensors, self.ortho_center)
            .expect("view invariants match MPO invariants")
    }

    /// Rank-3 site tensors `(left-bond, fused physical, right-bond)`.
    pub fn site_tensors(&self) -> &[DenseTensor] {
        &self.site_tensors
    }

    /// Bond dimensions, identical to the underlying MPO's.
    pub fn bond_dims(&self) -> &[usize] {
        &self.bond_dims
    }

    /// Norm of the operator state, `sqrt(Tr(W' W)/2^L)`.
    pub fn norm(&self) -> f64 {
        let mpo = self.clone().unfuse();
        operator_norm(&mpo)
    }
}

/// MPO for a single Pauli operator at site `r` of a length-`L` chain:
/// identity everywhere else, every bond dimension 1.
///
/// The result is canonical about site `r` (every product tensor is exactly
/// isometric in the halved metric).
///
/// # Examples
///
/// ```
/// use otoc::{local_pauli_mpo, operator_norm, Pauli};
/// # fn main() -> otoc::Result<()> {
/// let w = local_pauli_mpo(5, 3, Pauli::X)?;
/// assert_eq!(w.length(), 5);
/// assert!(w.bond_dims().iter().all(|&b| b == 1));
/// // Pauli strings are unit vectors in the halved metric.
/// assert!((operator_norm(&w) - 1.0).abs() < 1e-12);
/// # Ok(())
/// # }
/// ```
pub fn local_pauli_mpo(length: usize, r: usize, which: Pauli) -> Result<MatrixProductOperator> {
    if length == 0 {
        return Err(Error::ChainTooSmall { length: 0, min: 1 });
    }
    if r == 0 || r > length {
        return Err(Error::SiteOutOfRange { site: r, length });
    }
    let site_tensors = (1..=length)
        .map(|site| {
            let m = if site == r {
                which.matrix()
            } else {
                Pauli::I.matrix()
            };
            m.reshape(vec![1, 2, 2, 1]).expect("same length")
        })
        .collect();
    MatrixProductOperator::with_center(site_tensors, Some(r))
}

/// MPO of the identity operator on `length` sites.
pub fn identity_mpo(length: usize) -> Result<MatrixProductOperator> {
    local_pauli_mpo(length, 1, Pauli::I)
}

/// Orthogonalizes site `i` toward the right, absorbing the triangular
/// factor into site `i+1`. Requires `1 <= i < L`.
///
/// Fast paths: a tensor with right bond 1 and squared Frobenius norm exactly
/// 2 is already isometric and passes through untouched (the neighbor is not
/// modified either); any other right-bond-1 tensor is handled by closed-form
/// column normalization. Both paths keep tensors proportional to a product
/// pattern exactly proportional to it, preserving exact identity tails.
pub(crate) fn right_ortho_step(w: &mut MatrixProductOperator, i: usize) -> Result<()> {
    let t = &w.site_tensors[i - 1];
    let d = t.dims();
    let (cl, cr) = (d[0], d[3]);

    if cr == 1 {
        let fro = t.frobenius_sq();
        if fro == 2.0 {
            return Ok(());
        }
        if fro == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let norm = fro.sqrt();
        let scale = Complex64::new(SQRT_2 / norm, 0.0);
        let r_scalar = Complex64::new(norm / SQRT_2, 0.0);
        w.site_tensors[i - 1] = t.scaled(scale);
        w.site_tensors[i] = w.site_tensors[i].scaled(r_scalar);
        return Ok(());
    }

    let rows = cl * 4;
    let m = ArrayView2::from_shape((rows, cr), t.data()).expect("row-major reshape");
    let scaled = m.mapv(|z| z * std::f64::consts::FRAC_1_SQRT_2);
    let (q, r) = qr_positive(&scaled.view())?;
    let k = q.ncols();
    let new_t = DenseTensor::new(
        vec![cl, 2, 2, k],
        q.iter().map(|z| z * SQRT_2).collect(),
    )?;
    let r_tensor = DenseTensor::from_matrix(&r.view());
    let next = contract(&r_tensor, &w.site_tensors[i], &[(1, 0)])?;
    w.site_tensors[i - 1] = new_t;
    w.site_tensors[i] = next;
    w.bond_dims[i] = k;
    Ok(())
}

/// Orthogonalizes site `i` toward the left, absorbing the triangular factor
/// into site `i-1`. Requires `2 <= i <= L`. Mirror of [`right_ortho_step`].
pub(crate) fn left_ortho_step(w: &mut MatrixProductOperator, i: usize) -> Result<()> {
    let t = &w.site_tensors[i - 1];
    let d = t.dims();
    let (cl, cr) = (d[0], d[3]);

    if cl == 1 {
        let fro = t.frobenius_sq();
        if fro == 2.0 {
            return Ok(());
        }
        if fro == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let norm = fro.sqrt();
        let scale = Complex64::new(SQRT_2 / norm, 0.0);
        let l_scalar = Complex64::new(norm / SQRT_2, 0.0);
        w.site_tensors[i - 1] = t.scaled(scale);
        w.site_tensors[i - 2] = w.site_tensors[i - 2].scaled(l_scalar);
        return Ok(());
    }

    let cols = 4 * cr;
    let m = ArrayView2::from_shape((cl, cols), t.data()).expect("row-major reshape");
    let scaled = m.mapv(|z| z * std::f64::consts::FRAC_1_SQRT_2);
    let (l, q) = lq_positive(&scaled.view())?;
    let k = q.nrows();
    let new_t = DenseTensor::new(
        vec![k, 2, 2, cr],
        q.iter().map(|z| z * SQRT_2).collect(),
    )?;
    let l_tensor = DenseTensor::from_matrix(&l.view());
    let prev = contract(&w.site_tensors[i - 2], &l_tensor, &[(3, 0)])?;
    w.site_tensors[i - 1] = new_t;
    w.site_tensors[i - 2] = prev;
    w.bond_dims[i - 1] = k;
    Ok(())
}

/// Moves a tracked orthogonality center to site `to` by successive gauge
/// steps. Errors if no center is currently asserted.
pub(crate) fn move_center(w: &mut MatrixProductOperator, to: usize) -> Result<()> {
    let length = w.length();
    if to == 0 || to > length {
        return Err(Error::SiteOutOfRange { site: to, length });
    }
    let mut c = w.ortho_center.ok_or_else(|| {
        Error::InvalidMpo("move_center requires an orthogonality center".to_string())
    })?;
    while c < to {
        right_ortho_step(w, c)?;
        c += 1;
        w.ortho_center = Some(c);
    }
    while c > to {
        left_ortho_step(w, c)?;
        c -= 1;
        w.ortho_center = Some(c);
    }
    Ok(())
}

/// Brings an MPO to mixed-canonical form about site `center`.
///
/// The dense operator it represents is unchanged (to rounding); tensors of
/// a bond-dimension-1 product MPO pass through bit-identically. If a center
/// is already tracked, only the gauge moves between the two centers are
/// performed, which makes repeated calls idempotent.
pub fn canonicalize(
    mut w: MatrixProductOperator,
    center: usize,
) -> Result<MatrixProductOperator> {
    let length = w.length();
    if center == 0 || center > length {
        return Err(Error::SiteOutOfRange {
            site: center,
            length,
        });
    }
    if w.ortho_center.is_some() {
        move_center(&mut w, center)?;
        return Ok(w);
    }
    for i in 1..center {
        right_ortho_step(&mut w, i)?;
    }
    for i in ((center + 1)..=length).rev() {
        left_ortho_step(&mut w, i)?;
    }
    w.ortho_center = Some(center);
    Ok(w)
}

/// Operator norm `sqrt(Tr(W' W)/2^L)`, computed by transfer-matrix
/// contraction in `O(L chi^3)` without assuming canonical form.
///
/// Equals 1 for any exactly represented unitary; in particular it is
/// bit-exactly 1 for Pauli product MPOs.
pub fn operator_norm(w: &MatrixProductOperator) -> f64 {
    let mut env = DenseTensor::new(vec![1, 1], vec![Complex64::new(1.0, 0.0)])
        .expect("static shape");
    for t in &w.site_tensors {
        // env'[b_conj, b] = (1/2) sum conj(T[a_conj,s,s',b_conj])
        //                              env[a_conj,a] T[a,s,s',b]
        let step = contract(&env, t, &[(1, 0)]).expect("chain extents match");
        let tc = t.conj();
        let next = contract(&tc, &step, &[(0, 0), (1, 1), (2, 2)])
            .expect("chain extents match");
        env = next.scaled(Complex64::new(0.5, 0.0));
    }
    let val = env.as_scalar().expect("edges have bond dimension 1");
    val.re.max(0.0).sqrt()
}

/// Schmidt data of the operator state across cut `x` (between sites `x` and
/// `x+1`): von Neumann entropy, second Renyi entropy, and the Schmidt
/// spectrum normalized so its squares sum to 1.
///
/// Entropies use the natural logarithm; Schmidt values below
/// [`SPECTRUM_FLOOR`] times the largest are treated as exact zeros in the
/// entropy sums. Errors on a zero-norm MPO.
pub fn entanglement_at_cut(
    w: &MatrixProductOperator,
    x: usize,
) -> Result<(f64, f64, Vec<f64>)> {
    let length = w.length();
    if x == 0 || x >= length {
        return Err(Error::BondOutOfRange {
            bond: x,
            max: length.saturating_sub(1),
        });
    }
    let canon = canonicalize(w.clone(), x)?;
    center_bond_entropies(&canon, x)
}

/// Schmidt data across the bond to the right of site `x`, which must
/// already hold the orthogonality center. Shared core of
/// [`entanglement_at_cut`] and the walking profile recorder.
pub(crate) fn center_bond_entropies(
    w: &MatrixProductOperator,
    x: usize,
) -> Result<(f64, f64, Vec<f64>)> {
    debug_assert_eq!(w.ortho_center, Some(x));
    let t = &w.site_tensors[x - 1];
    let d = t.dims();
    let m = DenseTensor::new(
        vec![d[0] * 4, d[3]],
        t.data()
            .iter()
            .map(|z| z * std::f64::consts::FRAC_1_SQRT_2)
            .collect(),
    )?;
    let k = m.dims()[0].min(m.dims()[1]);
    let f = svd_truncate(&m, k, 0.0)?;
    entropies_from_schmidt(&f.singular_values)
}

/// Computes entropies and the normalized spectrum from raw Schmidt values.
pub(crate) fn entropies_from_schmidt(values: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    let total: f64 = values.iter().map(|s| s * s).sum();
    if total <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let largest = values.iter().copied().fold(0.0, f64::max);
    let floor = SPECTRUM_FLOOR * largest;
    let norm = total.sqrt();
    let spectrum: Vec<f64> = values.iter().map(|s| s / norm).collect();
    let mut s_vn = 0.0;
    let mut sum_p2 = 0.0;
    for &s in values {
        if s <= floor {
            continue;
        }
        let p = (s * s) / total;
        s_vn -= p * p.ln();
        sum_p2 += p * p;
    }
    let s_renyi2 = -sum_p2.ln();
    Ok((s_vn.max(0.0), s_renyi2.max(0.0), spectrum))
}

/// Normalized local super-operator expectation
/// `Tr(W' O W O) / Tr(W' W)` for a single-site operator `o` at `r_probe`.
///
/// For Hermitian unitary `o` the result lies in `[-1, 1]` (up to rounding),
/// and the squared commutator is `2 - 2 Re` of it. Errors if the MPO has
/// zero norm or `o` is not 2x2.
pub fn expectation_local_superop(
    w: &MatrixProductOperator,
    r_probe: usize,
    o: &DenseTensor,
) -> Result<Complex64> {
    let length = w.length();
    if r_probe == 0 || r_probe > length {
        return Err(Error::SiteOutOfRange {
            site: r_probe,
            length,
        });
    }
    if o.dims() != [2, 2] {
        return Err(Error::InvalidSpec(format!(
            "probe operator must be 2x2, got {:?}",
            o.dims()
        )));
    }

    let half = Complex64::new(0.5, 0.0);
    let one = DenseTensor::new(vec![1, 1], vec![Complex64::new(1.0, 0.0)])?;
    let mut num = one.clone();
    let mut den = one;
    for (idx, t) in w.site_tensors.iter().enumerate() {
        let site = idx + 1;
        let tc = t.conj();

        // Denominator: plain norm transfer step.
        let step = contract(&den, t, &[(1, 0)])?;
        den = contract(&tc, &step, &[(0, 0), (1, 1), (2, 2)])?.scaled(half);

        // Numerator: sandwich O on both physical legs at the probe site,
        // T_mod[a,q,p,b] = sum_{r,s} O[q,r] T[a,r,s,b] O[s,p].
        let t_mod;
        let t_num = if site == r_probe {
            let t2 = contract(o, t, &[(1, 1)])?.permuted(&[1, 0, 2, 3])?;
            t_mod = contract(&t2, o, &[(2, 0)])?.permuted(&[0, 1, 3, 2])?;
            &t_mod
        } else {
            t
        };
        let step = contract(&num, t_num, &[(1, 0)])?;
        num = contract(&tc, &step, &[(0, 0), (1, 1), (2, 2)])?.scaled(half);
    }
    let n2 = den.as_scalar().expect("edge bonds are 1").re;
    if n2 <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let raw = num.as_scalar().expect("edge bonds are 1");
    Ok(raw / n2)
}

/// Dense `2^L x 2^L` matrix of the operator, by sequential contraction.
/// Site 1 is the most significant bit of both row and column indices.
/// Refuses chains longer than [`DENSE_LIMIT`] sites.
pub fn mpo_to_dense(w: &MatrixProductOperator) -> Result<DenseTensor> {
    let length = w.length();
    if length > DENSE_LIMIT {
        return Err(Error::ChainTooLarge {
            length,
            limit: DENSE_LIMIT,
        });
    }
    let mut acc = DenseTensor::new(vec![1, 1, 1], vec![Complex64::new(1.0, 0.0)])?;
    for t in &w.site_tensors {
        let d = acc.dims().to_vec();
        let step = contract(&acc, t, &[(2, 0)])?; // (R, C, s, s', chi')
        let merged = step.permuted(&[0, 2, 1, 3, 4])?;
        let chi = *merged.dims().last().expect("rank 5");
        acc = merged.reshape(vec![d[0] * 2, d[1] * 2, chi])?;
    }
    let d = acc.dims().to_vec();
    acc.reshape(vec![d[0], d[1]])
}
