//! Binary field snapshots.
//!
//! Little-endian layout:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `GBNY` |
//! | 4     | format version, `u32` = 1 |
//! | 8     | `n`, `u64` |
//! | 8     | `L`, `f64` |
//! | 8     | `t`, `f64` |
//! | 8     | `ε`, `f64` |
//! | 1     | channel mask: bit 0 `u`, bit 1 `v`, bit 2 `z` |
//!
//! followed by each present channel in order `u, v, z`: `u` as `n`
//! interleaved `(re, im)` pairs, `v` and `z` as `n` values, all `f64`.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::GBenneyState;
use crate::spectral::{make_grid, ComplexField, Grid, RealField, Representation};

pub const MAGIC: [u8; 4] = *b"GBNY";
pub const VERSION: u32 = 1;
pub const HEADER_BYTES: usize = 41;

const U_BIT: u8 = 0b001;
const V_BIT: u8 = 0b010;
const Z_BIT: u8 = 0b100;

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub grid: Arc<Grid>,
    pub t: f64,
    pub epsilon: f64,
    pub u: Option<ComplexField>,
    pub v: Option<RealField>,
    pub z: Option<RealField>,
}

impl Snapshot {
    pub fn from_state(state: &GBenneyState, epsilon: f64) -> Self {
        Snapshot {
            grid: state.u.grid().clone(),
            t: state.t,
            epsilon,
            u: Some(state.u.clone()),
            v: Some(state.v.clone()),
            z: state.z.clone(),
        }
    }

    /// Single-channel snapshot of an NLS solution; `ε` is recorded as 0.
    pub fn from_nls(u: &ComplexField, t: f64) -> Self {
        Snapshot {
            grid: u.grid().clone(),
            t,
            epsilon: 0.0,
            u: Some(u.clone()),
            v: None,
            z: None,
        }
    }

    pub fn channel_mask(&self) -> u8 {
        let mut m = 0;
        if self.u.is_some() {
            m |= U_BIT;
        }
        if self.v.is_some() {
            m |= V_BIT;
        }
        if self.z.is_some() {
            m |= Z_BIT;
        }
        m
    }

    /// Size in bytes of the encoded snapshot.
    pub fn encoded_len(&self) -> usize {
        encoded_len(self.grid.n(), self.channel_mask())
    }

    pub fn into_state(self) -> Result<GBenneyState> {
        match (self.u, self.v) {
            (Some(u), Some(v)) => GBenneyState::new(self.t, u, v, self.z),
            _ => Err(Error::param("a state needs both the u and v channels")),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let n = self.grid.n();
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(n as u64).to_le_bytes());
        for x in [self.grid.length(), self.t, self.epsilon] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out.push(self.channel_mask());
        if let Some(u) = &self.u {
            for c in u.to_physical().values() {
                out.extend_from_slice(&c.re.to_le_bytes());
                out.extend_from_slice(&c.im.to_le_bytes());
            }
        }
        for f in [&self.v, &self.z].into_iter().flatten() {
            for x in f.values() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    /// Inverse of [`Snapshot::encode`]; `path` only labels errors.
    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self> {
        let fail = |message: String| Error::Format {
            path: path.to_path_buf(),
            message,
        };
        if bytes.len() < HEADER_BYTES {
            return Err(fail(format!(
                "truncated header: {} of {HEADER_BYTES} bytes",
                bytes.len()
            )));
        }
        if bytes[..4] != MAGIC {
            return Err(fail(format!("bad magic {:?}", &bytes[..4])));
        }
        let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().unwrap() };
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(fail(format!("unsupported version {version}")));
        }
        let n = u64::from_le_bytes(word(8));
        let length = f64::from_le_bytes(word(16));
        let t = f64::from_le_bytes(word(24));
        let epsilon = f64::from_le_bytes(word(32));
        let mask = bytes[40];
        if mask & !(U_BIT | V_BIT | Z_BIT) != 0 {
            return Err(fail(format!("unknown channel bits in mask {mask:#010b}")));
        }
        let n = usize::try_from(n).map_err(|_| fail(format!("grid size {n} too large")))?;
        let expected = n
            .checked_mul(8 * channel_words(mask))
            .and_then(|b| b.checked_add(HEADER_BYTES))
            .ok_or_else(|| fail(format!("grid size {n} too large")))?;
        if bytes.len() != expected {
            return Err(fail(format!(
                "expected {expected} bytes for n = {n} and mask {mask:#05b}, found {}",
                bytes.len()
            )));
        }
        let grid = make_grid(n, length).map_err(|e| fail(e.to_string()))?;

        let mut values = bytes[HEADER_BYTES..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let real = |values: &mut dyn Iterator<Item = f64>| -> Result<RealField> {
            RealField::new(grid.clone(), values.take(n).collect()).map_err(|e| fail(e.to_string()))
        };
        let u = if mask & U_BIT != 0 {
            let data: Vec<Complex64> = (0..n)
                .map(|_| {
                    let re = values.next().unwrap_or_default();
                    let im = values.next().unwrap_or_default();
                    Complex64::new(re, im)
                })
                .collect();
            Some(ComplexField::new(
                grid.clone(),
                data,
                Representation::Physical,
            )?)
        } else {
            None
        };
        let v = if mask & V_BIT != 0 {
            Some(real(&mut values)?)
        } else {
            None
        };
        let z = if mask & Z_BIT != 0 {
            Some(real(&mut values)?)
        } else {
            None
        };
        Ok(Snapshot {
            grid,
            t,
            epsilon,
            u,
            v,
            z,
        })
    }
}

fn channel_words(mask: u8) -> usize {
    2 * usize::from(mask & U_BIT != 0)
        + usize::from(mask & V_BIT != 0)
        + usize::from(mask & Z_BIT != 0)
}

/// Encoded size for `n` points and a channel mask.
pub fn encoded_len(n: usize, mask: u8) -> usize {
    HEADER_BYTES + 8 * n * channel_words(mask)
}

pub fn write_snapshot(snapshot: &Snapshot, path: &Path) -> Result<()> {
    std::fs::write(path, snapshot.encode()).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Snapshot::decode(&bytes, path)
}
