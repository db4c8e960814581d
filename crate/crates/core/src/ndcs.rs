//! The NDCS binary container.
//!
//! All integers and floats are little-endian. Layouts:
//!
//! ```text
//! signal        "NDCS" u32:1 u32:d    u32:N                 u8:complex  values
//! field         "NDCS" u32:1 u32:d    u32:N    u32:channels u8:complex  values
//! coefficients  "NDCS" u32:1 u32:d    u32:N    u8:'H'       u8:complex  values
//! matrix        "NDCS" u32:1 u32:rows u32:cols u8:'M'       u8:complex  values
//! ```
//!
//! `values` are float64 in storage order, interleaved `re, im` when the
//! complex flag is 1. Readers are typed: a payload of one kind is rejected by
//! the reader of another kind (the byte after the third integer is 0/1 for a
//! signal, the channel count for a field, and a tag letter otherwise).

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{MixedField, NdSignal, C64};

const MAGIC: &[u8; 4] = b"NDCS";
const VERSION: u32 = 1;
const TAG_COEFFICIENTS: u8 = b'H';
const TAG_MATRIX: u8 = b'M';

/// A dense `rows × cols` matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

fn is_real(values: &[C64]) -> bool {
    values.iter().all(|v| v.im.to_bits() == 0)
}

fn header(a: u32, b: u32, c: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(32);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&a.to_le_bytes());
    out.extend_from_slice(&b.to_le_bytes());
    if c != u32::MAX {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out
}

fn push_values(out: &mut Vec<u8>, values: &[C64]) {
    let real = is_real(values);
    out.push(u8::from(!real));
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        if !real {
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
}

fn to_u32(v: usize, what: &str) -> u32 {
    u32::try_from(v).unwrap_or_else(|_| panic!("{what} = {v} does not fit the NDCS u32 field"))
}

pub fn encode_signal(x: &NdSignal) -> Vec<u8> {
    let mut out = header(to_u32(x.d(), "d"), to_u32(x.side(), "N"), u32::MAX);
    push_values(&mut out, x.data());
    out
}

pub fn encode_field(g: &MixedField) -> Vec<u8> {
    let mut out = header(to_u32(g.d(), "d"), to_u32(g.side(), "N"), to_u32(g.channels(), "channels"));
    push_values(&mut out, g.data());
    out
}

/// Haar coefficients in their flat order (see [`crate::haar::HaarCoefficients`]).
pub fn encode_coefficients(d: usize, n: usize, values: &[C64]) -> Vec<u8> {
    let mut out = header(to_u32(d, "d"), to_u32(n, "N"), u32::MAX);
    out.push(TAG_COEFFICIENTS);
    push_values(&mut out, values);
    out
}

pub fn encode_matrix(m: &DenseMatrix) -> Vec<u8> {
    let mut out = header(to_u32(m.rows, "rows"), to_u32(m.cols, "cols"), u32::MAX);
    out.push(TAG_MATRIX);
    push_values(&mut out, &m.data);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err(Error::Format("missing NDCS magic".into()));
        }
        let mut r = Reader { bytes, pos: 4 };
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported NDCS version {version}")));
        }
        Ok(r)
    }

    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos + k;
        if end > self.bytes.len() {
            return Err(Error::Format("truncated NDCS payload".into()));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn values(&mut self, count: usize) -> Result<Vec<C64>> {
        let flag = self.u8()?;
        let complex = match flag {
            0 => false,
            1 => true,
            other => return Err(Error::Format(format!("invalid complex flag {other}"))),
        };
        let per = if complex { 16 } else { 8 };
        if self.bytes.len() - self.pos != count * per {
            return Err(Error::Format(format!(
                "expected {} value bytes, found {}",
                count * per,
                self.bytes.len() - self.pos
            )));
        }
        (0..count)
            .map(|_| {
                let re = self.f64()?;
                let im = if complex { self.f64()? } else { 0.0 };
                Ok(C64::new(re, im))
            })
            .collect()
    }
}

fn cube_len(d: u32, n: u32) -> Result<usize> {
    (n as usize)
        .checked_pow(d)
        .filter(|_| d > 0 && n > 0)
        .ok_or_else(|| Error::Format(format!("invalid cube d={d}, N={n}")))
}

pub fn decode_signal(bytes: &[u8]) -> Result<NdSignal> {
    let mut r = Reader::new(bytes)?;
    let (d, n) = (r.u32()?, r.u32()?);
    let values = r.values(cube_len(d, n)?)?;
    NdSignal::from_vec(d as usize, n as usize, values)
}

pub fn decode_field(bytes: &[u8]) -> Result<MixedField> {
    let mut r = Reader::new(bytes)?;
    let (d, n, c) = (r.u32()?, r.u32()?, r.u32()?);
    if c == 0 {
        return Err(Error::Format("field with zero channels".into()));
    }
    let values = r.values(cube_len(d, n)? * c as usize)?;
    MixedField::from_vec(d as usize, n as usize, c as usize, values)
}

/// Returns `(d, N, values)`.
pub fn decode_coefficients(bytes: &[u8]) -> Result<(usize, usize, Vec<C64>)> {
    let mut r = Reader::new(bytes)?;
    let (d, n) = (r.u32()?, r.u32()?);
    if r.u8()? != TAG_COEFFICIENTS {
        return Err(Error::Format("not a Haar coefficient payload".into()));
    }
    let values = r.values(cube_len(d, n)?)?;
    Ok((d as usize, n as usize, values))
}

pub fn decode_matrix(bytes: &[u8]) -> Result<DenseMatrix> {
    let mut r = Reader::new(bytes)?;
    let (rows, cols) = (r.u32()? as usize, r.u32()? as usize);
    if r.u8()? != TAG_MATRIX {
        return Err(Error::Format("not a matrix payload".into()));
    }
    let data = r.values(rows * cols)?;
    Ok(DenseMatrix { rows, cols, data })
}

pub fn write_signal(path: impl AsRef<Path>, x: &NdSignal) -> Result<()> {
    Ok(std::fs::write(path, encode_signal(x))?)
}

pub fn read_signal(path: impl AsRef<Path>) -> Result<NdSignal> {
    decode_signal(&std::fs::read(path)?)
}

pub fn write_field(path: impl AsRef<Path>, g: &MixedField) -> Result<()> {
    Ok(std::fs::write(path, encode_field(g))?)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<MixedField> {
    decode_field(&std::fs::read(path)?)
}
