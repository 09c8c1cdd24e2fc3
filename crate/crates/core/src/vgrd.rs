//! The `VGRD` binary container.
//!
//! Layout (all little-endian): magic `b"VGRD"`, `u32` version (= 1), `u32` nx, ny, nz,
//! six `f32` bounds (min xyz then max xyz), then `nx * ny * nz` `f32` values with x
//! varying fastest. The same container carries volumes, persistence images (nz = 1),
//! feature matrices and network parameters.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"VGRD";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 3 * 4 + 6 * 4;

/// Untyped container contents. Unlike [`VolumeGrid`](crate::field::VolumeGrid) any
/// axis may have extent 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RawGrid {
    pub dims: [u32; 3],
    pub bounds: [f32; 6],
    pub values: Vec<f32>,
}

impl RawGrid {
    pub fn new(dims: [u32; 3], bounds: [f32; 6], values: Vec<f32>) -> Result<Self> {
        let raw = RawGrid { dims, bounds, values };
        raw.check()?;
        Ok(raw)
    }

    /// A `rows x cols` matrix stored row-major (`nx = cols`, `ny = rows`, `nz = 1`).
    pub fn matrix(rows: usize, cols: usize, values: Vec<f32>) -> Result<Self> {
        let r = u32::try_from(rows).map_err(|_| Error::Format("too many rows".into()))?;
        let c = u32::try_from(cols).map_err(|_| Error::Format("too many cols".into()))?;
        Self::new([c, r, 1], [0.0, 0.0, 0.0, 1.0, 1.0, 1.0], values)
    }

    pub fn len(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + 4 * self.values.len()
    }

    fn check(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::Format(format!("zero extent in dims {:?}", self.dims)));
        }
        if self.values.len() != self.len() {
            return Err(Error::Format(format!(
                "expected {} values, found {}",
                self.len(),
                self.values.len()
            )));
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        self.check()?;
        let mut buf = Vec::with_capacity(self.encoded_len());
        buf.extend_from_slice(&MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        for d in self.dims {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        for b in self.bounds {
            buf.extend_from_slice(&b.to_le_bytes());
        }
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Reads one record; trailing bytes are left in the reader.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        let truncated = |e: std::io::Error| Error::Format(format!("truncated header: {e}"));
        r.read_exact(&mut header[..4]).map_err(truncated)?;
        if header[0..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        r.read_exact(&mut header[4..]).map_err(truncated)?;
        let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
        let version = word(4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let dims = [word(8), word(12), word(16)];
        let mut bounds = [0f32; 6];
        for (k, b) in bounds.iter_mut().enumerate() {
            *b = f32::from_bits(word(20 + 4 * k));
        }
        if dims.contains(&0) {
            return Err(Error::Format(format!("zero extent in dims {dims:?}")));
        }
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
            .ok_or_else(|| Error::Format("dims overflow".into()))?;
        let mut body = vec![0u8; n.checked_mul(4).ok_or_else(|| Error::Format("dims overflow".into()))?];
        r.read_exact(&mut body)
            .map_err(|_| Error::Format(format!("truncated body: expected {n} values")))?;
        let values = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(RawGrid { dims, bounds, values })
    }

    /// Parses a buffer holding exactly one record.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cursor = bytes;
        let raw = Self::read_from(&mut cursor)?;
        if !cursor.is_empty() {
            return Err(Error::Format(format!("{} trailing bytes", cursor.len())));
        }
        Ok(raw)
    }
}
