//! Binary state container: `MFQSTATE`, a little-endian `u32` version and
//! `u64` header length, a JSON header, then the raw little-endian payload.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{check_memory, GridSpec};
use super::wave::WaveFunction;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"MFQSTATE";
const VERSION: u32 = 1;
const LAYOUT: &str = "row-major, axis 0 slowest; each value stored as (re, im)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Complex64,
    Complex128,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    grid: GridSpec,
    axes: usize,
    time: f64,
    dtype: Precision,
    byte_order: String,
    layout: String,
    len: usize,
}

pub fn write_checkpoint<W: Write>(psi: &WaveFunction, precision: Precision, mut out: W) -> Result<()> {
    let header = Header {
        grid: psi.grid,
        axes: psi.axes,
        time: psi.time,
        dtype: precision,
        byte_order: "little-endian".into(),
        layout: LAYOUT.into(),
        len: psi.values.len(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;
    let mut buf = Vec::with_capacity(psi.values.len() * 16);
    for z in &psi.values {
        match precision {
            Precision::Complex128 => {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
            Precision::Complex64 => {
                buf.extend_from_slice(&(z.re as f32).to_le_bytes());
                buf.extend_from_slice(&(z.im as f32).to_le_bytes());
            }
        }
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<WaveFunction> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a state checkpoint".into()));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let mut long = [0u8; 8];
    input.read_exact(&mut long)?;
    let hlen = u64::from_le_bytes(long);
    if hlen > 1 << 20 {
        return Err(Error::Format(format!("implausible header length {hlen}")));
    }
    let mut json = vec![0u8; hlen as usize];
    input.read_exact(&mut json)?;
    let h: Header = serde_json::from_slice(&json).map_err(|e| Error::Format(e.to_string()))?;
    let grid =
        GridSpec::new(h.grid.dim, h.grid.n_particles, h.grid.points_per_axis, h.grid.box_half_width, h.grid.epsilon)?;
    check_memory(grid.points_per_axis, h.axes, "checkpoint")?;
    if h.len != grid.points_per_axis.pow(h.axes as u32) {
        return Err(Error::Format(format!("payload length {} does not match the grid", h.len)));
    }
    let width = match h.dtype {
        Precision::Complex128 => 16,
        Precision::Complex64 => 8,
    };
    let mut raw = vec![0u8; h.len * width];
    input.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(width)
        .map(|c| match h.dtype {
            Precision::Complex128 => Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            ),
            Precision::Complex64 => Complex64::new(
                f32::from_le_bytes(c[..4].try_into().unwrap()) as f64,
                f32::from_le_bytes(c[4..].try_into().unwrap()) as f64,
            ),
        })
        .collect();
    let mut psi = WaveFunction::from_values(grid, h.axes, values)?;
    psi.time = h.time;
    Ok(psi)
}
