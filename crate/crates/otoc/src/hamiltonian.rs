//! Spin-chain Hamiltonians as sums of two-site bond terms.
//!
//! Supported models on an open chain of `L` sites:
//!
//! - `mixed_field_ising` / `transverse_field_ising`:
//!   `H = -(J sum ZZ + hx sum X + hz sum Z)`, optionally divided by
//!   `E0 = sqrt(4 J^2 + 2 hx^2 + 2 hz^2)` so that a bond term has unit
//!   Frobenius scale. The transverse-field model is exactly the `hz = 0`
//!   member of the family and is named separately so configurations are
//!   unambiguous.
//! - `heisenberg_xxx`: `H = J sum (XX + YY + ZZ)` in the Pauli basis,
//!   optionally divided by the same `E0` (which reduces to `2|J|`).
//!
//! Single-site fields are split onto adjacent bonds with weight 1/2 on
//! interior sites and weight 1 on the chain-end site of a terminal bond, so
//! the bond terms sum to `H` exactly.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpo::Pauli;
use crate::tensor::{contract, kron, DenseTensor};

/// Which spin-chain model to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Ising chain with both transverse (`hx`) and longitudinal (`hz`) fields.
    MixedFieldIsing,
    /// Ising chain with a transverse field only (`hz = 0`).
    TransverseFieldIsing,
    /// Isotropic Heisenberg chain, Pauli-basis convention.
    HeisenbergXxx,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Model::MixedFieldIsing => "mixed_field_ising",
            Model::TransverseFieldIsing => "transverse_field_ising",
            Model::HeisenbergXxx => "heisenberg_xxx",
        };
        f.write_str(s)
    }
}

/// Boundary condition. Only open chains are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Open ends: couplings on bonds `1..=L-1` only.
    #[default]
    Open,
}

/// Full specification of a chain Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    /// Model family.
    pub model: Model,
    /// Two-site coupling.
    #[serde(rename = "J")]
    pub j: f64,
    /// Transverse field (Ising family only; must be 0 for Heisenberg).
    #[serde(default)]
    pub hx: f64,
    /// Longitudinal field (mixed-field Ising only; must be 0 otherwise).
    #[serde(default)]
    pub hz: f64,
    /// Divide every term by `E0 = sqrt(4 J^2 + 2 hx^2 + 2 hz^2)`.
    #[serde(rename = "normalize_E0")]
    pub normalize_e0: bool,
    /// Chain length.
    #[serde(rename = "L")]
    pub l: usize,
    /// Boundary condition (open; present for config explicitness).
    #[serde(default)]
    pub boundary: Boundary,
}

impl HamiltonianSpec {
    /// Normalization scale `sqrt(4 J^2 + 2 hx^2 + 2 hz^2)`.
    pub fn e0(&self) -> f64 {
        (4.0 * self.j * self.j + 2.0 * self.hx * self.hx + 2.0 * self.hz * self.hz).sqrt()
    }

    /// The per-term prefactor actually applied: `1/E0` when
    /// `normalize_E0` is set, otherwise 1.
    pub fn energy_scale(&self) -> f64 {
        if self.normalize_e0 {
            1.0 / self.e0()
        } else {
            1.0
        }
    }

    /// Checks parameter consistency; every builder calls this first.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("J", self.j), ("hx", self.hx), ("hz", self.hz)] {
            if !v.is_finite() {
                return Err(Error::InvalidSpec(format!("{name} must be finite, got {v}")));
            }
        }
        match self.model {
            Model::TransverseFieldIsing => {
                if self.hz != 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "transverse_field_ising requires hz = 0 (got hz = {}); \
                         use mixed_field_ising for a longitudinal field",
                        self.hz
                    )));
                }
            }
            Model::MixedFieldIsing => {
                if self.hz == 0.0 {
                    return Err(Error::InvalidSpec(
                        "mixed_field_ising requires hz != 0; \
                         use transverse_field_ising when hz = 0"
                            .to_string(),
                    ));
                }
            }
            Model::HeisenbergXxx => {
                if self.hx != 0.0 || self.hz != 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "heisenberg_xxx has no field terms; got hx = {}, hz = {}",
                        self.hx, self.hz
                    )));
                }
            }
        }
        if self.normalize_e0 && !(self.e0() > 0.0) {
            return Err(Error::InvalidSpec(
                "normalize_E0 requires at least one nonzero coupling".to_string(),
            ));
        }
        Ok(())
    }
}

/// Two-site term `a (x) b` as a 4x4 matrix.
fn two_site(a: Pauli, b: Pauli) -> DenseTensor {
    kron(&a.matrix(), &b.matrix()).expect("2x2 inputs")
}

/// Adds `coeff * m` into `acc` entrywise.
fn axpy(acc: &mut DenseTensor, coeff: f64, m: &DenseTensor) {
    for (dst, src) in acc.data_mut().iter_mut().zip(m.data()) {
        *dst += Complex64::new(coeff, 0.0) * src;
    }
}

/// Builds the ordered list of `(bond, 4x4 Hermitian term)` whose sum equals
/// the Hamiltonian exactly. Bonds are 1-based: bond `b` couples sites `b`
/// and `b+1`. Errors if `L < 2` or the spec is inconsistent.
pub fn build_bond_terms(spec: &HamiltonianSpec) -> Result<Vec<(usize, DenseTensor)>> {
    spec.validate()?;
    let length = spec.l;
    if length < 2 {
        return Err(Error::ChainTooSmall { length, min: 2 });
    }
    let scale = spec.energy_scale();
    let mut terms = Vec::with_capacity(length - 1);
    for bond in 1..length {
        let mut h = DenseTensor::zeros(vec![4, 4])?;
        match spec.model {
            Model::MixedFieldIsing | Model::TransverseFieldIsing => {
                // Field weights: 1/2 on interior sites (each field is shared
                // by two bonds), 1 on the chain-end site of a terminal bond.
                let w_left = if bond == 1 { 1.0 } else { 0.5 };
                let w_right = if bond == length - 1 { 1.0 } else { 0.5 };
                axpy(&mut h, -scale * spec.j, &two_site(Pauli::Z, Pauli::Z));
                axpy(&mut h, -scale * spec.hx * w_left, &two_site(Pauli::X, Pauli::I));
                axpy(&mut h, -scale * spec.hx * w_right, &two_site(Pauli::I, Pauli::X));
                axpy(&mut h, -scale * spec.hz * w_left, &two_site(Pauli::Z, Pauli::I));
                axpy(&mut h, -scale * spec.hz * w_right, &two_site(Pauli::I, Pauli::Z));
            }
            Model::HeisenbergXxx => {
                let c = scale * spec.j;
                axpy(&mut h, c, &two_site(Pauli::X, Pauli::X));
                axpy(&mut h, c, &two_site(Pauli::Y, Pauli::Y));
                axpy(&mut h, c, &two_site(Pauli::Z, Pauli::Z));
            }
        }
        terms.push((bond, h));
    }
    Ok(terms)
}

/// Dense `2^L x 2^L` Hamiltonian assembled from the bond terms.
/// Refuses chains longer than [`crate::mpo::DENSE_LIMIT`] sites.
pub fn dense_hamiltonian(spec: &HamiltonianSpec) -> Result<DenseTensor> {
    let length = spec.l;
    if length > crate::mpo::DENSE_LIMIT {
        return Err(Error::ChainTooLarge {
            length,
            limit: crate::mpo::DENSE_LIMIT,
        });
    }
    let terms = build_bond_terms(spec)?;
    let dim = 1usize << length;
    let mut h = DenseTensor::zeros(vec![dim, dim])?;
    for (bond, term) in &terms {
        let lifted = lift_two_site(length, *bond, term)?;
        for (dst, src) in h.data_mut().iter_mut().zip(lifted.data()) {
            *dst += src;
        }
    }
    Ok(h)
}

/// Embeds a 4x4 operator acting on sites `(bond, bond+1)` into the full
/// `2^L`-dimensional space (identity elsewhere).
pub fn lift_two_site(length: usize, bond: usize, m: &DenseTensor) -> Result<DenseTensor> {
    if bond == 0 || bond >= length {
        return Err(Error::BondOutOfRange {
            bond,
            max: length.saturating_sub(1),
        });
    }
    let left = DenseTensor::identity(1usize << (bond - 1))?;
    let right = DenseTensor::identity(1usize << (length - bond - 1))?;
    let lm = kron(&left, m)?;
    kron(&lm, &right)
}

/// Embeds a 2x2 operator acting on `site` into the full space.
pub fn lift_single_site(length: usize, site: usize, m: &DenseTensor) -> Result<DenseTensor> {
    if site == 0 || site > length {
        return Err(Error::SiteOutOfRange { site, length });
    }
    let left = DenseTensor::identity(1usize << (site - 1))?;
    let right = DenseTensor::identity(1usize << (length - site))?;
    let lm = kron(&left, m)?;
    kron(&lm, &right)
}

/// Commutator `[a, b] = ab - ba` of two square matrices.
pub fn commutator(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    let ab = contract(a, b, &[(1, 0)])?;
    let ba = contract(b, a, &[(1, 0)])?;
    let data = ab
        .data()
        .iter()
        .zip(ba.data())
        .map(|(x, y)| x - y)
        .collect();
    DenseTensor::new(ab.dims().to_vec(), data)
}
