//! Dense complex tensor algebra: reshaping, contraction, truncated SVD, QR,
//! and Hermitian matrix exponentials.
//!
//! Every value is stored in row-major (C) layout: the last axis varies
//! fastest, axis 0 is the slowest. All arithmetic is complex `f64`; there are
//! no mixed-precision paths. All operations are pure functions of their
//! inputs and may run concurrently on disjoint data.

use ndarray::prelude::*;
use ndarray_linalg::{Eigh, JobSvd, QR, SVDDC, SVD, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used when checking that a matrix is Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A dense complex tensor in row-major layout.
///
/// Axis 0 is the slowest-varying index; the linear offset of element
/// `(i_0, ..., i_{r-1})` is `((i_0 * d_1 + i_1) * d_2 + i_2) * ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl DenseTensor {
    /// Builds a tensor from explicit extents and row-major data.
    ///
    /// Errors if any extent is zero or the data length does not equal the
    /// product of the extents.
    pub fn new(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::ZeroExtent { dims });
        }
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(Error::ShapeDataMismatch {
                dims,
                len: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    /// All-zero tensor with the given extents.
    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::ZeroExtent { dims });
        }
        let len = dims.iter().product();
        Ok(Self {
            dims,
            data: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    /// Rank-0 tensor holding a single scalar.
    pub fn scalar(value: Complex64) -> Self {
        Self {
            dims: Vec::new(),
            data: vec![value],
        }
    }

    /// The `n`x`n` identity matrix as a rank-2 tensor.
    pub fn identity(n: usize) -> Result<Self> {
        let mut t = Self::zeros(vec![n, n])?;
        for i in 0..n {
            t.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Ok(t)
    }

    /// Builds a rank-2 tensor from an `ndarray` matrix.
    pub fn from_matrix(m: &ArrayView2<'_, Complex64>) -> Self {
        let dims = vec![m.nrows(), m.ncols()];
        let data = m.iter().copied().collect();
        Self { dims, data }
    }

    /// Extents along each axis.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of axes.
    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    /// Row-major data slice.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Mutable row-major data slice. The extents cannot be changed through
    /// this accessor, so the shape/data invariant is preserved.
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Consumes the tensor, returning its row-major data.
    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    /// Total number of stored values.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// True when the tensor holds exactly one value (rank 0 counts).
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// The single value of a rank-0 or one-element tensor.
    pub fn as_scalar(&self) -> Option<Complex64> {
        if self.data.len() == 1 {
            Some(self.data[0])
        } else {
            None
        }
    }

    /// Reinterprets the data with new extents (same total length). This is a
    /// pure relabeling of indices; the data vector is moved, not copied.
    pub fn reshape(self, dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, self.data)
    }

    /// Returns a copy with axes reordered so that output axis `i` is input
    /// axis `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let rank = self.rank();
        if perm.len() != rank {
            return Err(Error::AxisOutOfRange {
                axis: perm.len(),
                rank,
            });
        }
        let mut seen = vec![false; rank];
        for &p in perm {
            if p >= rank {
                return Err(Error::AxisOutOfRange { axis: p, rank });
            }
            if seen[p] {
                return Err(Error::DuplicateAxis {
                    operand: "permutation",
                    axis: p,
                });
            }
            seen[p] = true;
        }
        let view = self.as_view();
        let permuted = view.permuted_axes(perm.to_vec());
        let dims: Vec<usize> = permuted.shape().to_vec();
        let data: Vec<Complex64> = permuted.iter().copied().collect();
        Ok(Self { dims, data })
    }

    /// Borrowed dynamic-rank `ndarray` view over the same data.
    pub fn as_view(&self) -> ArrayViewD<'_, Complex64> {
        ArrayViewD::from_shape(IxDyn(&self.dims), &self.data)
            .expect("dims/data invariant guarantees a valid view")
    }

    /// Borrowed rank-2 view; errors unless the tensor has exactly two axes.
    pub fn as_matrix(&self) -> Result<ArrayView2<'_, Complex64>> {
        if self.rank() != 2 {
            return Err(Error::NotMatrix { rank: self.rank() });
        }
        Ok(ArrayView2::from_shape((self.dims[0], self.dims[1]), &self.data)
            .expect("dims/data invariant guarantees a valid view"))
    }

    /// Entry-wise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Squared Frobenius norm (sum of squared entry magnitudes).
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// True when all entries are finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Scales every entry by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }
}

/// Result of a truncated singular value decomposition `m = U diag(s) V`.
///
/// `left_isometry` is `U` (rows x kept), `right_isometry` is `V` as stored
/// (kept x cols, i.e. already the "V-transpose" factor), and the product
/// `U diag(s) V` reconstructs `m` up to the reported `discarded_weight`.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    /// Left factor with orthonormal columns.
    pub left_isometry: DenseTensor,
    /// Kept singular values, non-increasing, all non-negative.
    pub singular_values: Vec<f64>,
    /// Right factor with orthonormal rows.
    pub right_isometry: DenseTensor,
    /// Sum of squares of dropped singular values divided by the sum of
    /// squares of all singular values (0 when nothing was dropped).
    pub discarded_weight: f64,
}

/// Contracts two tensors over the given `(axis-of-a, axis-of-b)` pairs.
///
/// The result's axes are the unpaired axes of `a` (in their original order)
/// followed by the unpaired axes of `b`. With no pairs this is the outer
/// product; contracting all axes of both operands yields a rank-0 scalar.
pub fn contract(
    a: &DenseTensor,
    b: &DenseTensor,
    index_pairs: &[(usize, usize)],
) -> Result<DenseTensor> {
    let (ra, rb) = (a.rank(), b.rank());
    let mut paired_a = vec![false; ra];
    let mut paired_b = vec![false; rb];
    for &(ax_a, ax_b) in index_pairs {
        if ax_a >= ra {
            return Err(Error::AxisOutOfRange { axis: ax_a, rank: ra });
        }
        if ax_b >= rb {
            return Err(Error::AxisOutOfRange { axis: ax_b, rank: rb });
        }
        if paired_a[ax_a] {
            return Err(Error::DuplicateAxis { operand: "a", axis: ax_a });
        }
        if paired_b[ax_b] {
            return Err(Error::DuplicateAxis { operand: "b", axis: ax_b });
        }
        if a.dims[ax_a] != b.dims[ax_b] {
            return Err(Error::ExtentMismatch {
                axis_a: ax_a,
                extent_a: a.dims[ax_a],
                axis_b: ax_b,
                extent_b: b.dims[ax_b],
            });
        }
        paired_a[ax_a] = true;
        paired_b[ax_b] = true;
    }

    let free_a: Vec<usize> = (0..ra).filter(|&i| !paired_a[i]).collect();
    let free_b: Vec<usize> = (0..rb).filter(|&i| !paired_b[i]).collect();

    // Reorder so the contraction reduces to one matrix product:
    // a -> (free_a..., paired_a...), b -> (paired_b..., free_b...).
    let mut perm_a = free_a.clone();
    perm_a.extend(index_pairs.iter().map(|p| p.0));
    let mut perm_b: Vec<usize> = index_pairs.iter().map(|p| p.1).collect();
    perm_b.extend(free_b.iter().copied());

    let pa = a.permuted(&perm_a)?;
    let pb = b.permuted(&perm_b)?;

    let m: usize = free_a.iter().map(|&i| a.dims[i]).product();
    let k: usize = index_pairs.iter().map(|p| a.dims[p.0]).product();
    let n: usize = free_b.iter().map(|&i| b.dims[i]).product();

    let ma = ArrayView2::from_shape((m, k), pa.data()).expect("contiguous");
    let mb = ArrayView2::from_shape((k, n), pb.data()).expect("contiguous");
    let mc = ma.dot(&mb);

    let mut dims: Vec<usize> = free_a.iter().map(|&i| a.dims[i]).collect();
    dims.extend(free_b.iter().map(|&i| b.dims[i]));
    let (data, offset) = mc.into_raw_vec_and_offset();
    debug_assert_eq!(offset, Some(0));
    DenseTensor::new(dims, data)
}

/// Kronecker product of two matrix-shaped tensors:
/// `kron(a, b)[(i*rb + k), (j*cb + l)] = a[i, j] * b[k, l]`.
pub fn kron(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    if a.rank() != 2 {
        return Err(Error::NotMatrix { rank: a.rank() });
    }
    if b.rank() != 2 {
        return Err(Error::NotMatrix { rank: b.rank() });
    }
    let (ra, ca) = (a.dims()[0], a.dims()[1]);
    let (rb, cb) = (b.dims()[0], b.dims()[1]);
    let outer = contract(a, b, &[])?; // (ra, ca, rb, cb)
    outer
        .permuted(&[0, 2, 1, 3])?
        .reshape(vec![ra * rb, ca * cb])
}

/// Truncated SVD of a matrix-shaped tensor.
///
/// Keeps at most `chi_max` singular values and additionally drops any value
/// below `eps_rel` times the largest one. The reconstruction error in
/// Frobenius norm equals the square root of the sum of squares of the
/// dropped values.
///
/// The backend (LAPACK `zgesdd`, with `zgesvd` as a fallback) is
/// deterministic for identical input bits; ties between equal singular
/// values keep the backend's stable output ordering, so repeated runs
/// truncate identically.
pub fn svd_truncate(m: &DenseTensor, chi_max: usize, eps_rel: f64) -> Result<SvdFactorization> {
    if m.rank() != 2 {
        return Err(Error::NotMatrix { rank: m.rank() });
    }
    if chi_max == 0 {
        return Err(Error::InvalidChiMax);
    }
    if !(eps_rel >= 0.0 && eps_rel.is_finite()) {
        return Err(Error::InvalidEpsRel { eps_rel });
    }
    if !m.all_finite() {
        return Err(Error::NonFinite {
            context: "svd_truncate input",
        });
    }
    let mat = m.as_matrix()?;
    let (rows, cols) = (mat.nrows(), mat.ncols());

    // zgesdd is substantially faster on the blocky truncation workloads here;
    // fall back to the slower but more robust zgesvd if it fails to converge.
    let (u, s, vt) = match mat.svddc(JobSvd::Some) {
        Ok((u, s, vt)) => (
            u.expect("JobSvd::Some returns U"),
            s,
            vt.expect("JobSvd::Some returns VT"),
        ),
        Err(_) => {
            let (u, s, vt) = mat.svd(true, true)?;
            let k = rows.min(cols);
            let u = u.expect("requested U").slice_move(s![.., ..k]);
            let vt = vt.expect("requested VT").slice_move(s![..k, ..]);
            (u, s, vt)
        }
    };

    let k = s.len();
    let largest = if k > 0 { s[0] } else { 0.0 };
    let cutoff = eps_rel * largest;
    let significant = s.iter().take_while(|&&v| v >= cutoff && v > 0.0).count();
    // A zero matrix has no positive singular values; keep one (zero) value so
    // the factor shapes stay valid.
    let keep = significant.clamp(1, chi_max.min(k));

    let total: f64 = s.iter().map(|v| v * v).sum();
    let dropped: f64 = s.iter().skip(keep).map(|v| v * v).sum();
    let discarded_weight = if total > 0.0 { dropped / total } else { 0.0 };

    let left = u.slice(s![.., ..keep]);
    let right = vt.slice(s![..keep, ..]);
    Ok(SvdFactorization {
        left_isometry: DenseTensor::new(
            vec![rows, keep],
            left.iter().copied().collect(),
        )?,
        singular_values: s.iter().take(keep).copied().collect(),
        right_isometry: DenseTensor::new(
            vec![keep, cols],
            right.iter().copied().collect(),
        )?,
        discarded_weight,
    })
}

/// `e^{i theta h}` for Hermitian `h`, via eigendecomposition.
///
/// Errors if `h` is not square or deviates from Hermiticity by more than
/// [`HERMITICITY_TOL`] in max-entry norm. The result is unitary to the same
/// tolerance.
pub fn exp_i_hermitian(h: &DenseTensor, theta: f64) -> Result<DenseTensor> {
    let mat = h.as_matrix()?;
    let n = mat.nrows();
    if mat.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: mat.ncols(),
        });
    }
    if !h.all_finite() || !theta.is_finite() {
        return Err(Error::NonFinite {
            context: "exp_i_hermitian input",
        });
    }
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let d = (mat[[i, j]] - mat[[j, i]].conj()).norm();
            dev = dev.max(d);
        }
    }
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            dev,
            tol: HERMITICITY_TOL,
        });
    }

    let (evals, evecs) = eigh_hermitian(&mat)?;
    // U = V diag(e^{i theta lambda}) V^H
    let phases = evals.mapv(|lam| Complex64::from_polar(1.0, theta * lam));
    let scaled = &evecs * &phases; // scales column j by phases[j]
    let vh = evecs.t().mapv(|z| z.conj());
    let u = scaled.dot(&vh);
    Ok(DenseTensor::from_matrix(&u.view()))
}

/// Hermitian eigendecomposition returning ascending eigenvalues and a matrix
/// whose **columns** are the matching eigenvectors.
///
/// ndarray-linalg 0.18 hands row-major complex input to LAPACK as if it were
/// column-major, which silently diagonalizes the transpose and returns
/// conjugated eigenvectors. Passing a column-major copy sidesteps that; the
/// unit tests pin `H V = V diag(e)` so a future backend change cannot slip
/// through.
pub(crate) fn eigh_hermitian(
    h: &ArrayView2<'_, Complex64>,
) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let mut hf = Array2::<Complex64>::zeros(h.raw_dim().f());
    hf.assign(h);
    let (e, v) = hf.eigh(UPLO::Lower)?;
    Ok((e, v.as_standard_layout().to_owned()))
}

/// Thin QR with the gauge fixed so `R` has a real, non-negative diagonal.
///
/// The phase fix makes canonical forms deterministic and leaves matrices
/// that are already isometries with positive diagonal untouched.
pub(crate) fn qr_positive(
    m: &ArrayView2<'_, Complex64>,
) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
    let (mut q, mut r) = m.qr()?;
    let k = r.nrows().min(r.ncols());
    for i in 0..k {
        let d = r[[i, i]];
        let mag = d.norm();
        if mag > 0.0 {
            let phase = d / mag;
            let conj_phase = phase.conj();
            q.column_mut(i).mapv_inplace(|z| z * phase);
            r.row_mut(i).mapv_inplace(|z| z * conj_phase);
        }
    }
    Ok((q, r))
}

/// Thin LQ (`m = L Q`, rows of `Q` orthonormal) with `L`'s diagonal fixed
/// real and non-negative. Implemented through [`qr_positive`] of `m^H`.
pub(crate) fn lq_positive(
    m: &ArrayView2<'_, Complex64>,
) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
    let mh = m.t().mapv(|z| z.conj());
    let (q, r) = qr_positive(&mh.as_standard_layout().view())?;
    let l = r.t().mapv(|z| z.conj());
    let qh = q.t().mapv(|z| z.conj());
    Ok((
        l.as_standard_layout().to_owned(),
        qh.as_standard_layout().to_owned(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_tensor(dims: &[usize], rng: &mut ChaCha8Rng) -> DenseTensor {
        let len = dims.iter().product();
        let data = (0..len)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        DenseTensor::new(dims.to_vec(), data).unwrap()
    }

    /// Independent oracle: naive triple-loop matrix product.
    fn naive_matmul(a: &DenseTensor, b: &DenseTensor) -> Vec<Complex64> {
        let (m, k) = (a.dims()[0], a.dims()[1]);
        let n = b.dims()[1];
        assert_eq!(k, b.dims()[0]);
        let mut out = vec![c(0.0, 0.0); m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = c(0.0, 0.0);
                for l in 0..k {
                    acc += a.data()[i * k + l] * b.data()[l * n + j];
                }
                out[i * n + j] = acc;
            }
        }
        out
    }

    /// Independent oracle: scaled-and-squared Taylor series for e^{i theta h}.
    fn series_exp_i(h: &DenseTensor, theta: f64) -> Vec<Complex64> {
        let n = h.dims()[0];
        let m: Vec<Complex64> = h.data().iter().map(|z| z * c(0.0, theta)).collect();
        let norm: f64 = m.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
        let squarings = norm.log2().ceil().max(0.0) as usize + 2;
        let scale = 1.0 / (1u64 << squarings) as f64;
        let scaled = DenseTensor::new(
            vec![n, n],
            m.iter().map(|z| z * scale).collect(),
        )
        .unwrap();
        // Taylor sum of the scaled matrix.
        let mut acc = DenseTensor::identity(n).unwrap();
        let mut term = DenseTensor::identity(n).unwrap();
        for k in 1..=25 {
            let prod = naive_matmul(&term, &scaled);
            term = DenseTensor::new(
                vec![n, n],
                prod.iter().map(|z| z / k as f64).collect(),
            )
            .unwrap();
            let summed: Vec<Complex64> = acc
                .data()
                .iter()
                .zip(term.data())
                .map(|(x, y)| x + y)
                .collect();
            acc = DenseTensor::new(vec![n, n], summed).unwrap();
        }
        // Square back up.
        for _ in 0..squarings {
            let sq = naive_matmul(&acc, &acc);
            acc = DenseTensor::new(vec![n, n], sq).unwrap();
        }
        acc.into_data()
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn pauli_x() -> DenseTensor {
        DenseTensor::new(
            vec![2, 2],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap()
    }

    fn pauli_z() -> DenseTensor {
        DenseTensor::new(
            vec![2, 2],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn new_rejects_bad_shapes() {
        assert!(matches!(
            DenseTensor::new(vec![2, 0], vec![]),
            Err(Error::ZeroExtent { .. })
        ));
        assert!(matches!(
            DenseTensor::new(vec![2, 2], vec![c(1.0, 0.0); 3]),
            Err(Error::ShapeDataMismatch { .. })
        ));
    }

    #[test]
    fn contract_identity_with_basis_vector() {
        let id = DenseTensor::identity(2).unwrap();
        let v = DenseTensor::new(vec![2], vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = contract(&id, &v, &[(1, 0)]).unwrap();
        assert_eq!(r.dims(), &[2]);
        assert_eq!(r.data(), &[c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn contract_pauli_x_with_itself_over_both_axes() {
        let x = pauli_x();
        let r = contract(&x, &x, &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(r.rank(), 0);
        assert!((r.as_scalar().unwrap() - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn contract_matches_naive_matmul_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_tensor(&[3, 4], &mut rng);
        let b = random_tensor(&[4, 5], &mut rng);
        let r = contract(&a, &b, &[(1, 0)]).unwrap();
        assert_eq!(r.dims(), &[3, 5]);
        assert!(max_diff(r.data(), &naive_matmul(&a, &b)) < 1e-13);
    }

    #[test]
    fn contract_is_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_tensor(&[2, 3, 4], &mut rng);
        let b = random_tensor(&[4, 3, 5], &mut rng);
        let alpha = c(0.37, -1.21);
        let scaled = contract(&a.scaled(alpha), &b, &[(2, 0), (1, 1)]).unwrap();
        let plain = contract(&a, &b, &[(2, 0), (1, 1)]).unwrap();
        assert!(max_diff(scaled.data(), plain.scaled(alpha).data()) < 1e-13);
    }

    #[test]
    fn contract_higher_rank_matches_explicit_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_tensor(&[2, 3, 4], &mut rng);
        let b = random_tensor(&[3, 2, 5], &mut rng);
        // Contract a-axis0 with b-axis1 and a-axis1 with b-axis0.
        let r = contract(&a, &b, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(r.dims(), &[4, 5]);
        let (da, db) = (a.data(), b.data());
        for x in 0..4 {
            for y in 0..5 {
                let mut acc = c(0.0, 0.0);
                for i in 0..2 {
                    for j in 0..3 {
                        acc += da[(i * 3 + j) * 4 + x] * db[(j * 2 + i) * 5 + y];
                    }
                }
                assert!((r.data()[x * 5 + y] - acc).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn contract_rejects_mismatched_extents() {
        let a = DenseTensor::zeros(vec![2, 3]).unwrap();
        let b = DenseTensor::zeros(vec![4, 2]).unwrap();
        assert!(matches!(
            contract(&a, &b, &[(1, 0)]),
            Err(Error::ExtentMismatch { .. })
        ));
        assert!(matches!(
            contract(&a, &b, &[(5, 0)]),
            Err(Error::AxisOutOfRange { .. })
        ));
    }

    #[test]
    fn svd_of_identity_keeps_unit_singular_values() {
        let id = DenseTensor::identity(2).unwrap();
        let f = svd_truncate(&id, 2, 0.0).unwrap();
        assert_eq!(f.singular_values.len(), 2);
        assert!((f.singular_values[0] - 1.0).abs() < 1e-12);
        assert!((f.singular_values[1] - 1.0).abs() < 1e-12);
        assert_eq!(f.discarded_weight, 0.0);
    }

    #[test]
    fn svd_of_rank_one_outer_product() {
        // Outer product of unit vectors (1,0,0) and (0.6, 0.8i).
        let u = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let v = [c(0.6, 0.0), c(0.0, 0.8)];
        let mut data = Vec::new();
        for a in &u {
            for b in &v {
                data.push(a * b);
            }
        }
        let m = DenseTensor::new(vec![3, 2], data).unwrap();
        let f = svd_truncate(&m, 1, 0.0).unwrap();
        assert_eq!(f.singular_values.len(), 1);
        assert!((f.singular_values[0] - 1.0).abs() < 1e-12);
        assert!(f.discarded_weight < 1e-24);
    }

    fn reconstruct(f: &SvdFactorization) -> DenseTensor {
        let mut left = f.left_isometry.clone();
        let keep = f.singular_values.len();
        let rows = left.dims()[0];
        // Scale columns of U by the singular values, then multiply by V.
        for r in 0..rows {
            for k in 0..keep {
                left.data_mut()[r * keep + k] *= f.singular_values[k];
            }
        }
        contract(&left, &f.right_isometry, &[(1, 0)]).unwrap()
    }

    #[test]
    fn svd_reconstructs_and_reports_dropped_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = random_tensor(&[8, 8], &mut rng);

        let full = svd_truncate(&m, 8, 0.0).unwrap();
        let recon = reconstruct(&full);
        assert!(max_diff(recon.data(), m.data()) < 1e-12);

        // Frobenius identity: sum of squared singular values.
        let sum_sq: f64 = full.singular_values.iter().map(|s| s * s).sum();
        assert!((sum_sq - m.frobenius_sq()).abs() < 1e-12 * m.frobenius_sq());

        // Truncated: Frobenius error must equal the dropped-tail formula.
        let trunc = svd_truncate(&m, 4, 0.0).unwrap();
        let recon4 = reconstruct(&trunc);
        let err_sq: f64 = recon4
            .data()
            .iter()
            .zip(m.data())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        let dropped_sq: f64 = full.singular_values.iter().skip(4).map(|s| s * s).sum();
        assert!((err_sq.sqrt() - dropped_sq.sqrt()).abs() < 1e-12);
        let expected_weight = dropped_sq / sum_sq;
        assert!((trunc.discarded_weight - expected_weight).abs() < 1e-14);
    }

    #[test]
    fn svd_factors_are_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let m = random_tensor(&[6, 9], &mut rng);
        let f = svd_truncate(&m, 4, 0.0).unwrap();
        let u = f.left_isometry.as_matrix().unwrap();
        let uhu = u.t().mapv(|z| z.conj()).dot(&u);
        let v = f.right_isometry.as_matrix().unwrap();
        let vvh = v.dot(&v.t().mapv(|z| z.conj()));
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((uhu[[i, j]] - c(expect, 0.0)).norm() < 1e-12);
                assert!((vvh[[i, j]] - c(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_eps_rel_drops_small_values() {
        // diag(1, 1e-3) with eps_rel = 1e-2 keeps only the leading value.
        let m = DenseTensor::new(
            vec![2, 2],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1e-3, 0.0)],
        )
        .unwrap();
        let f = svd_truncate(&m, 2, 1e-2).unwrap();
        assert_eq!(f.singular_values.len(), 1);
        assert!((f.discarded_weight - 1e-6 / (1.0 + 1e-6)).abs() < 1e-18);
    }

    #[test]
    fn svd_rejects_non_finite_input() {
        let m = DenseTensor::new(
            vec![1, 2],
            vec![c(f64::NAN, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            svd_truncate(&m, 1, 0.0),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let h = DenseTensor::zeros(vec![3, 3]).unwrap();
        let u = exp_i_hermitian(&h, 0.7).unwrap();
        assert!(max_diff(u.data(), DenseTensor::identity(3).unwrap().data()) < 1e-14);
    }

    #[test]
    fn exp_of_pauli_z_quarter_turn() {
        let u = exp_i_hermitian(&pauli_z(), std::f64::consts::FRAC_PI_2).unwrap();
        let expect = [c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)];
        assert!(max_diff(u.data(), &expect) < 1e-12);
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> DenseTensor {
        let a = random_tensor(&[n, n], rng);
        let mut data = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = a.data()[i * n + j] + a.data()[j * n + i].conj();
            }
        }
        DenseTensor::new(vec![n, n], data).unwrap()
    }

    #[test]
    fn exp_is_unitary_and_matches_series_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let h = random_hermitian(4, &mut rng);
        let theta = 0.83;
        let u = exp_i_hermitian(&h, theta).unwrap();

        let um = u.as_matrix().unwrap();
        let uhu = um.t().mapv(|z| z.conj()).dot(&um);
        let id = DenseTensor::identity(4).unwrap();
        assert!(max_diff(uhu.as_slice().unwrap(), id.data()) < 1e-12);

        let oracle = series_exp_i(&h, theta);
        assert!(max_diff(u.data(), &oracle) < 1e-10);
    }

    #[test]
    fn exp_group_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let h = random_hermitian(4, &mut rng);
        let (t1, t2) = (0.31, -0.54);
        let u1 = exp_i_hermitian(&h, t1).unwrap();
        let u2 = exp_i_hermitian(&h, t2).unwrap();
        let u12 = exp_i_hermitian(&h, t1 + t2).unwrap();
        let prod = contract(&u1, &u2, &[(1, 0)]).unwrap();
        assert!(max_diff(prod.data(), u12.data()) < 1e-11);
    }

    #[test]
    fn exp_rejects_non_hermitian() {
        let m = DenseTensor::new(
            vec![2, 2],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            exp_i_hermitian(&m, 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eigh_wrapper_diagonalizes_with_column_eigenvectors() {
        // Regression guard for the backend layout workaround: H V = V diag(e)
        // must hold with V's columns as eigenvectors.
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for n in [2usize, 5, 8] {
            let h = random_hermitian(n, &mut rng);
            let hm = h.as_matrix().unwrap();
            let (e, v) = eigh_hermitian(&hm).unwrap();
            assert!(e.windows(2).into_iter().all(|w| w[0] <= w[1]));
            let hv = hm.dot(&v);
            let ve = &v * &e.mapv(|x| c(x, 0.0));
            assert!(max_diff(hv.as_slice().unwrap(), ve.as_slice().unwrap()) < 1e-12 * h.max_abs().max(1.0));
        }
    }

    #[test]
    fn qr_positive_reconstructs_with_real_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let m = random_tensor(&[6, 4], &mut rng);
        let mm = m.as_matrix().unwrap();
        let (q, r) = qr_positive(&mm).unwrap();
        let recon = q.dot(&r);
        assert!(max_diff(recon.as_slice().unwrap(), m.data()) < 1e-13);
        for i in 0..4 {
            assert!(r[[i, i]].im.abs() < 1e-13);
            assert!(r[[i, i]].re >= -1e-13);
        }
        // Q columns orthonormal.
        let qhq = q.t().mapv(|z| z.conj()).dot(&q);
        let id = DenseTensor::identity(4).unwrap();
        assert!(max_diff(qhq.as_slice().unwrap(), id.data()) < 1e-13);
    }

    #[test]
    fn lq_positive_reconstructs_with_orthonormal_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let m = random_tensor(&[3, 7], &mut rng);
        let mm = m.as_matrix().unwrap();
        let (l, q) = lq_positive(&mm).unwrap();
        let recon = l.dot(&q);
        assert!(max_diff(recon.as_slice().unwrap(), m.data()) < 1e-13);
        let qqh = q.dot(&q.t().mapv(|z| z.conj()));
        let id = DenseTensor::identity(3).unwrap();
        assert!(max_diff(qqh.as_slice().unwrap(), id.data()) < 1e-13);
        for i in 0..3 {
            assert!(l[[i, i]].im.abs() < 1e-13);
            assert!(l[[i, i]].re >= -1e-13);
        }
    }

    #[test]
    fn permuted_reorders_axes() {
        let t = DenseTensor::new(
            vec![2, 3],
            (0..6).map(|k| c(k as f64, 0.0)).collect(),
        )
        .unwrap();
        let p = t.permuted(&[1, 0]).unwrap();
        assert_eq!(p.dims(), &[3, 2]);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(p.data()[j * 2 + i], t.data()[i * 3 + j]);
            }
        }
    }
}
