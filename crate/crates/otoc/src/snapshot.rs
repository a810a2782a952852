//! Binary MPO snapshots for checkpoint/resume.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size          field
//! 0       4             magic bytes "WMPO"
//! 4       4             format version (u32), currently 1
//! 8       8             chain length L (u64)
//! 16      8             physical dimension (u64), currently always 2
//! 24      8*(L+1)       bond dimensions (u64 each)
//! ...     1             orthogonality-center flag (0 = none, 1 = present)
//! ...     8             orthogonality center (u64, 1-based; 0 when absent)
//! ...     16*sum(...)   site tensors in chain order, row-major
//!                       (re, im) f64 pairs; extents derived from bond_dims
//! ```
//!
//! The round trip preserves every `f64` bit, so resumed runs continue from
//! exactly the stored state.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mpo::MatrixProductOperator;
use crate::tensor::DenseTensor;

/// Magic bytes identifying an MPO snapshot.
pub const SNAPSHOT_MAGIC: [u8; 4] = *b"WMPO";

/// Current snapshot format version.
pub const SNAPSHOT_VERSION: u32 = 1;

/// Writes an MPO snapshot to a stream.
pub fn write_snapshot_to<S: Write>(w: &MatrixProductOperator, mut out: S) -> Result<()> {
    out.write_all(&SNAPSHOT_MAGIC)?;
    out.write_u32::<LittleEndian>(SNAPSHOT_VERSION)?;
    out.write_u64::<LittleEndian>(w.length() as u64)?;
    out.write_u64::<LittleEndian>(w.physical_dim() as u64)?;
    for &b in w.bond_dims() {
        out.write_u64::<LittleEndian>(b as u64)?;
    }
    match w.ortho_center() {
        Some(c) => {
            out.write_u8(1)?;
            out.write_u64::<LittleEndian>(c as u64)?;
        }
        None => {
            out.write_u8(0)?;
            out.write_u64::<LittleEndian>(0)?;
        }
    }
    for t in w.site_tensors() {
        for z in t.data() {
            out.write_f64::<LittleEndian>(z.re)?;
            out.write_f64::<LittleEndian>(z.im)?;
        }
    }
    Ok(())
}

/// Reads an MPO snapshot from a stream, validating magic, version, and
/// shape consistency.
pub fn read_snapshot_from<S: Read>(mut input: S) -> Result<MatrixProductOperator> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if magic != SNAPSHOT_MAGIC {
        return Err(Error::SnapshotFormat(format!(
            "bad magic bytes {magic:?}; not an MPO snapshot"
        )));
    }
    let version = input.read_u32::<LittleEndian>()?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::SnapshotFormat(format!(
            "unsupported snapshot version {version}, expected {SNAPSHOT_VERSION}"
        )));
    }
    let length = input.read_u64::<LittleEndian>()? as usize;
    if length == 0 || length > 1 << 20 {
        return Err(Error::SnapshotFormat(format!(
            "implausible chain length {length}"
        )));
    }
    let physical = input.read_u64::<LittleEndian>()? as usize;
    if physical != 2 {
        return Err(Error::SnapshotFormat(format!(
            "unsupported physical dimension {physical}, expected 2"
        )));
    }
    let mut bond_dims = Vec::with_capacity(length + 1);
    for _ in 0..=length {
        let b = input.read_u64::<LittleEndian>()? as usize;
        if b == 0 {
            return Err(Error::SnapshotFormat(
                "zero bond dimension in snapshot".to_string(),
            ));
        }
        bond_dims.push(b);
    }
    if bond_dims[0] != 1 || bond_dims[length] != 1 {
        return Err(Error::SnapshotFormat(
            "edge bond dimensions must be 1".to_string(),
        ));
    }
    let has_center = input.read_u8()?;
    let center_raw = input.read_u64::<LittleEndian>()? as usize;
    let ortho_center = match has_center {
        0 => None,
        1 => {
            if center_raw == 0 || center_raw > length {
                return Err(Error::SnapshotFormat(format!(
                    "orthogonality center {center_raw} out of range for L={length}"
                )));
            }
            Some(center_raw)
        }
        other => {
            return Err(Error::SnapshotFormat(format!(
                "bad orthogonality-center flag {other}"
            )));
        }
    };
    let mut site_tensors = Vec::with_capacity(length);
    for site in 0..length {
        let dims = vec![bond_dims[site], 2, 2, bond_dims[site + 1]];
        let len: usize = dims.iter().product();
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            let re = input.read_f64::<LittleEndian>()?;
            let im = input.read_f64::<LittleEndian>()?;
            data.push(Complex64::new(re, im));
        }
        site_tensors.push(DenseTensor::new(dims, data)?);
    }
    MatrixProductOperator::with_center(site_tensors, ortho_center)
}

/// Writes an MPO snapshot to a file (buffered).
pub fn write_snapshot(w: &MatrixProductOperator, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut buf = BufWriter::new(file);
    write_snapshot_to(w, &mut buf)?;
    buf.flush()?;
    Ok(())
}

/// Reads an MPO snapshot from a file (buffered).
pub fn read_snapshot(path: &Path) -> Result<MatrixProductOperator> {
    let file = File::open(path)?;
    read_snapshot_from(BufReader::new(file))
}
