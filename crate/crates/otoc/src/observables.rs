//! Observables over evolved operator states: squared commutators
//! `C(x,t)`, operator-entanglement profiles `S(x,t)` / `S⁽²⁾(x,t)`, and
//! the Rényi-entropy bound that ties the two together.
//!
//! The recorders here plug into the evolution loop's sampling callback:
//! each receives an immutable snapshot, clones it once, and walks the
//! orthogonality center across the chain so that every probe site or cut
//! costs one local canonical-form move instead of a full
//! recanonicalization.
//!
//! Norm convention: `‖A‖²` of a commutator always means
//! `Tr(A†A)/2^L`, the infinite-temperature trace, so that same-site
//! Paulis calibrate to `‖[X,Z]‖² = 4` and the Rényi bound's "sum < 2"
//! condition reads exactly as stated.

use crate::error::{Error, Result};
use crate::evolve::EvolutionSample;
use crate::hamiltonian::HamiltonianSpec;
use crate::mpo::{
    canonicalize, center_bond_entropies, move_center, MatrixProductOperator, Pauli,
};
use crate::oracles::ed::{
    dense_commutator_norm_sq, dense_operator_entanglement, EdEvolution, ED_ENTANGLEMENT_LIMIT,
};
use crate::tensor::{contract, DenseTensor};

/// Squared commutators on a (probe site × time) grid, plus the per-time
/// operator norms of the evolved state.
///
/// Values lie in `[0, 4 + 1e-6]` for Hermitian unitary operators; tail
/// values below `1e-16` are reported exactly as computed (no flooring),
/// so downstream window extraction sees the raw floating-point tail.
#[derive(Debug, Clone)]
pub struct OtocGrid {
    /// Site of the operator evolved by the trajectory.
    pub base_site: usize,
    /// Probed sites, in the caller's order.
    pub probe_sites: Vec<usize>,
    /// Pauli used as the probe `V`.
    pub probe_pauli: Pauli,
    /// Recorded times, ascending.
    pub times: Vec<f64>,
    /// `values[p][k]` is `C(probe_sites[p], times[k])`.
    pub values: Vec<Vec<f64>>,
    /// Operator norm of the evolved state at each recorded time.
    pub norms: Vec<f64>,
}

/// Accumulates an [`OtocGrid`] from evolution snapshots.
#[derive(Debug, Clone)]
pub struct OtocRecorder {
    base_site: usize,
    probe_sites: Vec<usize>,
    probe_pauli: Pauli,
    /// Indices into `probe_sites`, ascending by site, so each snapshot is
    /// evaluated in one left-to-right center walk.
    walk_order: Vec<usize>,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

impl OtocRecorder {
    /// New recorder for the commutator of the evolved operator (based at
    /// `base_site`) with `probe_pauli` at each of `probe_sites`.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] when no probe sites are given or any
    /// site index is zero (upper range is checked against the chain at
    /// record time).
    pub fn new(base_site: usize, probe_sites: Vec<usize>, probe_pauli: Pauli) -> Result<Self> {
        if probe_sites.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one probe site is required".to_string(),
            ));
        }
        if base_site == 0 || probe_sites.contains(&0) {
            return Err(Error::InvalidArgument(
                "site indices start at 1".to_string(),
            ));
        }
        let mut walk_order: Vec<usize> = (0..probe_sites.len()).collect();
        walk_order.sort_by_key(|&i| probe_sites[i]);
        let values = vec![Vec::new(); probe_sites.len()];
        Ok(Self {
            base_site,
            probe_sites,
            probe_pauli,
            walk_order,
            times: Vec::new(),
            values,
            norms: Vec::new(),
        })
    }

    /// Evaluates every probe on one snapshot and appends a time column.
    ///
    /// # Errors
    ///
    /// [`Error::SiteOutOfRange`] if a probe site exceeds the chain;
    /// [`Error::ZeroNorm`] on a zero operator state.
    pub fn record(&mut self, sample: &EvolutionSample<'_>) -> Result<()> {
        let length = sample.mpo.length();
        for &site in self.probe_sites.iter().chain(std::iter::once(&self.base_site)) {
            if site > length {
                return Err(Error::SiteOutOfRange { site, length });
            }
        }
        let first = self.probe_sites[self.walk_order[0]];
        let mut w = canonicalize(sample.mpo.clone(), first)?;
        for &idx in &self.walk_order {
            let site = self.probe_sites[idx];
            move_center(&mut w, site)?;
            let c = commutator_at_center(&w, site, self.probe_pauli)?;
            self.values[idx].push(c);
        }
        self.times.push(sample.time);
        self.norms.push(sample.norm);
        Ok(())
    }

    /// Finishes recording and returns the grid.
    pub fn into_grid(self) -> OtocGrid {
        OtocGrid {
            base_site: self.base_site,
            probe_sites: self.probe_sites,
            probe_pauli: self.probe_pauli,
            times: self.times,
            values: self.values,
            norms: self.norms,
        }
    }
}

/// Squared commutator between the operator state and a single-site Pauli:
/// `C = 2 − 2·Re⟨W|V W V⟩ / ⟨W|W⟩`.
///
/// Evaluated in the equivalent difference form
/// `C = ‖T − V T V‖²_F / ‖T‖²_F` on the orthogonality-center tensor
/// (Pauli conjugation preserves the Frobenius norm exactly, entry by
/// entry, so the two forms are identical; the difference form cannot go
/// negative and returns an exact 0 whenever the center tensor commutes
/// with the probe bitwise).
///
/// # Errors
///
/// [`Error::SiteOutOfRange`] for a bad probe site; [`Error::ZeroNorm`]
/// on a zero operator state.
pub fn squared_commutator(
    w: &MatrixProductOperator,
    r_probe: usize,
    probe: Pauli,
) -> Result<f64> {
    let length = w.length();
    if r_probe == 0 || r_probe > length {
        return Err(Error::SiteOutOfRange {
            site: r_probe,
            length,
        });
    }
    let canon = canonicalize(w.clone(), r_probe)?;
    commutator_at_center(&canon, r_probe, probe)
}

/// The difference-form evaluation; requires the center at `site`.
fn commutator_at_center(
    w: &MatrixProductOperator,
    site: usize,
    probe: Pauli,
) -> Result<f64> {
    debug_assert_eq!(w.ortho_center(), Some(site));
    let t = &w.site_tensors()[site - 1];
    let conjugated = conjugate_physical(t, &probe.matrix())?;
    let mut difference = 0.0_f64;
    let mut norm = 0.0_f64;
    for (original, flipped) in t.data().iter().zip(conjugated.data()) {
        difference += (original - flipped).norm_sqr();
        norm += original.norm_sqr();
    }
    if norm <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(difference / norm)
}

/// Conjugates the physical legs of a site tensor by a single-site
/// operator: `T'[a,s,s',b] = Σ V[s,p] T[a,p,q,b] V[q,s']`.
fn conjugate_physical(t: &DenseTensor, v: &DenseTensor) -> Result<DenseTensor> {
    let half = contract(v, t, &[(1, 1)])?.permuted(&[1, 0, 2, 3])?;
    contract(&half, v, &[(2, 0)])?.permuted(&[0, 1, 3, 2])
}

/// Operator-entanglement entropies on a (cut × time) grid.
///
/// Entries are nonnegative and bounded by `log χ` for a state truncated
/// at bond dimension `χ`.
#[derive(Debug, Clone)]
pub struct EntanglementProfile {
    /// Bond indices (cut `x` separates sites `1..=x` from the rest).
    pub cuts: Vec<usize>,
    /// Recorded times, ascending.
    pub times: Vec<f64>,
    /// `s_vn[c][k]` is the von Neumann entropy at `cuts[c]`, `times[k]`.
    pub s_vn: Vec<Vec<f64>>,
    /// Second Rényi entropy on the same grid.
    pub s_renyi2: Vec<Vec<f64>>,
}

/// Accumulates an [`EntanglementProfile`] from evolution snapshots.
#[derive(Debug, Clone)]
pub struct EntanglementRecorder {
    cuts: Vec<usize>,
    walk_order: Vec<usize>,
    times: Vec<f64>,
    s_vn: Vec<Vec<f64>>,
    s_renyi2: Vec<Vec<f64>>,
}

impl EntanglementRecorder {
    /// New recorder over the given bond cuts.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] when no cuts are given or a cut is
    /// zero (upper range is checked against the chain at record time).
    pub fn new(cuts: Vec<usize>) -> Result<Self> {
        if cuts.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one cut is required".to_string(),
            ));
        }
        if cuts.contains(&0) {
            return Err(Error::InvalidArgument("cut indices start at 1".to_string()));
        }
        let mut walk_order: Vec<usize> = (0..cuts.len()).collect();
        walk_order.sort_by_key(|&i| cuts[i]);
        let rows = vec![Vec::new(); cuts.len()];
        Ok(Self {
            cuts,
            walk_order,
            times: Vec::new(),
            s_vn: rows.clone(),
            s_renyi2: rows,
        })
    }

    /// Evaluates every cut on one snapshot and appends a time column.
    ///
    /// # Errors
    ///
    /// [`Error::BondOutOfRange`] if a cut is not interior to the chain;
    /// [`Error::ZeroNorm`] on a zero operator state.
    pub fn record(&mut self, sample: &EvolutionSample<'_>) -> Result<()> {
        let length = sample.mpo.length();
        for &cut in &self.cuts {
            if cut >= length {
                return Err(Error::BondOutOfRange {
                    bond: cut,
                    max: length.saturating_sub(1),
                });
            }
        }
        let first = self.cuts[self.walk_order[0]];
        let mut w = canonicalize(sample.mpo.clone(), first)?;
        for &idx in &self.walk_order {
            let cut = self.cuts[idx];
            move_center(&mut w, cut)?;
            let (s_vn, s_renyi2, _) = center_bond_entropies(&w, cut)?;
            self.s_vn[idx].push(s_vn);
            self.s_renyi2[idx].push(s_renyi2);
        }
        self.times.push(sample.time);
        Ok(())
    }

    /// Finishes recording and returns the profile.
    pub fn into_profile(self) -> EntanglementProfile {
        EntanglementProfile {
            cuts: self.cuts,
            times: self.times,
            s_vn: self.s_vn,
            s_renyi2: self.s_renyi2,
        }
    }
}

/// Both sides of the Rényi-entropy bound
/// `S⁽²⁾ ≤ −log(1 − ½ Σ_{r'∈B, O} ‖[W(t), O_{r'}]‖²)` at one
/// `(cut, t)` point, evaluated densely.
#[derive(Debug, Clone)]
pub struct RenyiBoundReport {
    /// Second Rényi entropy of the evolved operator across the cut.
    pub lhs: f64,
    /// `Σ_{r'∈B, O∈{I,X,Y,Z}} ‖[W(t), O_{r'}]‖²` over the right block.
    pub commutator_sum: f64,
    /// `−log(1 − ½·sum)`; `None` when the sum reaches 2 and the bound
    /// degenerates.
    pub rhs: Option<f64>,
    /// `lhs ≤ rhs + 1e-9` where the bound is defined.
    pub satisfied: Option<bool>,
    /// `rhs − lhs` where defined.
    pub margin: Option<f64>,
}

/// Evaluates the Rényi bound exactly on a small chain: evolves `X_r`
/// densely, computes `S⁽²⁾` across `cut` from the operator
/// matricization, and sums the squared commutator norms over every site
/// of the right block `B = {cut+1, …, L}` with all four Paulis (the
/// identity contributes zero but is summed as stated).
///
/// # Errors
///
/// [`Error::ChainTooLarge`] beyond 10 sites; [`Error::BondOutOfRange`]
/// for a non-interior cut; site and spec validation propagate.
pub fn renyi_bound_check(
    spec: &HamiltonianSpec,
    r: usize,
    cut: usize,
    t: f64,
) -> Result<RenyiBoundReport> {
    let (w, _) = dense_evolved_operator(spec, r, cut, t)?;
    let (_, lhs) = dense_operator_entanglement(&w, spec.l, cut)?;
    let mut commutator_sum = 0.0_f64;
    for site in (cut + 1)..=spec.l {
        for probe in Pauli::ALL {
            commutator_sum += dense_commutator_norm_sq(&w, spec.l, site, probe)?;
        }
    }
    let rhs = if commutator_sum < 2.0 {
        Some(-(1.0 - 0.5 * commutator_sum).ln())
    } else {
        None
    };
    Ok(RenyiBoundReport {
        lhs,
        commutator_sum,
        rhs,
        satisfied: rhs.map(|bound| lhs <= bound + 1e-9),
        margin: rhs.map(|bound| bound - lhs),
    })
}

/// Spatial structure of the commutator sum entering the Rényi bound: the
/// per-site totals `Σ_O ‖[W(t), O_{r'}]‖²` across the right block, a
/// fitted exponential decay rate, and the geometric-series bound that
/// rate implies for the full sum.
#[derive(Debug, Clone)]
pub struct BoundaryDecayReport {
    /// Sites of the right block, `cut+1 ..= L`.
    pub sites: Vec<usize>,
    /// Per-site commutator totals, same order as `sites`.
    pub per_site_sums: Vec<f64>,
    /// Decay rate `a` fitted to `sum ∝ e^{−2a·(site − (cut+1))}` by
    /// log-linear least squares over the nonzero entries.
    pub decay_rate: f64,
    /// Sum over the whole block.
    pub full_sum: f64,
    /// The boundary site's total alone.
    pub boundary_sum: f64,
    /// `boundary_sum / (1 − e^{−2a})`, the geometric estimate of the full
    /// sum from the boundary term; `None` unless `a > 0`.
    pub geometric_estimate: Option<f64>,
}

/// Quantifies how well the boundary site dominates the Rényi-bound sum:
/// fits an exponential decay rate `a` to the per-site commutator totals
/// and reports the geometric-series estimate
/// `boundary/(1 − e^{−2a})` alongside the exact full sum.
///
/// The rate is a fitted parameter of this check, not a model constant.
///
/// # Errors
///
/// Same domain as [`renyi_bound_check`]; additionally
/// [`Error::InvalidArgument`] when fewer than two per-site totals are
/// nonzero, leaving nothing to fit.
pub fn boundary_decay_check(
    spec: &HamiltonianSpec,
    r: usize,
    cut: usize,
    t: f64,
) -> Result<BoundaryDecayReport> {
    let (w, _) = dense_evolved_operator(spec, r, cut, t)?;
    let sites: Vec<usize> = ((cut + 1)..=spec.l).collect();
    let mut per_site_sums = Vec::with_capacity(sites.len());
    for &site in &sites {
        let mut total = 0.0_f64;
        for probe in Pauli::ALL {
            total += dense_commutator_norm_sq(&w, spec.l, site, probe)?;
        }
        per_site_sums.push(total);
    }
    let points: Vec<(f64, f64)> = per_site_sums
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0)
        .map(|(offset, &s)| (offset as f64, s.ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "decay fit needs at least two nonzero per-site sums".to_string(),
        ));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut covariance = 0.0_f64;
    let mut variance = 0.0_f64;
    for &(x, y) in &points {
        covariance += (x - mean_x) * (y - mean_y);
        variance += (x - mean_x) * (x - mean_x);
    }
    let slope = covariance / variance;
    let decay_rate = -0.5 * slope;
    let full_sum: f64 = per_site_sums.iter().sum();
    let boundary_sum = per_site_sums[0];
    let geometric_estimate = (decay_rate > 0.0)
        .then(|| boundary_sum / (1.0 - (-2.0 * decay_rate).exp()));
    Ok(BoundaryDecayReport {
        sites,
        per_site_sums,
        decay_rate,
        full_sum,
        boundary_sum,
        geometric_estimate,
    })
}

/// Shared validation + dense evolution for the bound checks.
fn dense_evolved_operator(
    spec: &HamiltonianSpec,
    r: usize,
    cut: usize,
    t: f64,
) -> Result<(DenseTensor, usize)> {
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
    Ok((evolution.operator_at(t)?, spec.l))
}
