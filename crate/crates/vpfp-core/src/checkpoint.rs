//! Binary checkpoint of a [`HermiteCoefField`], all integers and floats
//! little-endian:
//!
//! ```text
//! offset  size  content
//! 0       8     magic "VPFPCKPT"
//! 8       4     u32 format version (1)
//! 12      4     u32 reserved (0)
//! 16      8     u64 n_z
//! 24      8     u64 n_x
//! 32      8     u64 n_v
//! 40      8     f64 time
//! 48      64    config hash, lowercase hex ASCII
//! 112     8·N   f64 coefficients, z-major, then x, then Hermite index
//! ```

use std::io::{self, Read, Write};

use crate::kinetic_solver::HermiteCoefField;

pub const MAGIC: &[u8; 8] = b"VPFPCKPT";
pub const VERSION: u32 = 1;
const HASH_LEN: usize = 64;

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn write_checkpoint(mut w: impl Write, state: &HermiteCoefField, config_hash: &str) -> io::Result<()> {
    if config_hash.len() != HASH_LEN || !config_hash.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "config hash must be 64 hex characters"));
    }
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    for n in [state.n_z(), state.n_x(), state.n_v()] {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    w.write_all(&state.time.to_le_bytes())?;
    w.write_all(config_hash.as_bytes())?;
    let mut buf = Vec::with_capacity(8 * state.coeffs().len());
    for c in state.coeffs() {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()
}

/// The state and the config hash it was written with.
pub fn read_checkpoint(mut r: impl Read) -> io::Result<(HermiteCoefField, String)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("not a checkpoint file"));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(invalid(format!("unsupported checkpoint version {version}")));
    }
    r.read_exact(&mut word)?;
    let mut quad = [0u8; 8];
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        r.read_exact(&mut quad)?;
        *d = usize::try_from(u64::from_le_bytes(quad)).map_err(|_| invalid("dimension overflows usize"))?;
    }
    r.read_exact(&mut quad)?;
    let time = f64::from_le_bytes(quad);
    let mut hash = [0u8; HASH_LEN];
    r.read_exact(&mut hash)?;
    let hash = String::from_utf8(hash.to_vec()).map_err(|_| invalid("config hash is not ASCII"))?;
    let len = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| invalid("tensor size overflows"))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * len {
        return Err(invalid(format!("expected {} coefficient bytes, found {}", 8 * len, bytes.len())));
    }
    let coeffs = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let state = HermiteCoefField::from_coeffs(dims[0], dims[1], dims[2], coeffs, time)
        .map_err(|e| invalid(e.to_string()))?;
    Ok((state, hash))
}
