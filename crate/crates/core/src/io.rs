//! Binary tensor (`FT3B`) and mask (`FTMK`) files, plus atomic writes.
//!
//! Both formats are little-endian:
//!
//! ```text
//! FT3B: magic "FT3B" | version u16 = 1 | reserved u16 = 0 | n1 n2 n3 u64
//!       | n1·n2·n3 × f64 in i-fastest, then j, then k order
//! FTMK: magic "FTMK" | version u16 = 1 | reserved u16 = 0 | n1 n2 n3 u64
//!       | count u64 | count × u64 strictly increasing offsets
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tensor::{Mask, Tensor3};

pub const TENSOR_MAGIC: &[u8; 4] = b"FT3B";
pub const MASK_MAGIC: &[u8; 4] = b"FTMK";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 2 + 3 * 8;

fn write_header(out: &mut Vec<u8>, magic: &[u8; 4], dims: (usize, usize, usize)) {
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    for d in [dims.0, dims.1, dims.2] {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("truncated file at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Format(format!("value {v} does not fit in usize")))
    }
}

fn read_header(r: &mut Reader<'_>, magic: &[u8; 4]) -> Result<(usize, usize, usize)> {
    let got = r.take(4)?;
    if got != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(got),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let _reserved = r.u16()?;
    let (n1, n2, n3) = (r.usize()?, r.usize()?, r.usize()?);
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(Error::Format(format!("zero extent in {n1}x{n2}x{n3}")));
    }
    Ok((n1, n2, n3))
}

pub fn encode_tensor(x: &Tensor3) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * x.len());
    write_header(&mut out, TENSOR_MAGIC, x.dims());
    for v in x.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<Tensor3> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let (n1, n2, n3) = read_header(&mut r, TENSOR_MAGIC)?;
    let count = n1
        .checked_mul(n2)
        .and_then(|v| v.checked_mul(n3))
        .ok_or_else(|| Error::Format("tensor extents overflow".into()))?;
    let payload = bytes.len() - r.pos;
    if Some(payload) != count.checked_mul(8) {
        return Err(Error::Format(format!(
            "payload is {payload} bytes, expected {} for {n1}x{n2}x{n3}",
            count.saturating_mul(8)
        )));
    }
    let data = r
        .take(payload)?
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Tensor3::from_vec(n1, n2, n3, data)
}

pub fn encode_mask(m: &Mask) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 + 8 * m.len());
    write_header(&mut out, MASK_MAGIC, m.dims());
    out.extend_from_slice(&(m.len() as u64).to_le_bytes());
    for &o in m.indices() {
        out.extend_from_slice(&(o as u64).to_le_bytes());
    }
    out
}

pub fn decode_mask(bytes: &[u8]) -> Result<Mask> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let (n1, n2, n3) = read_header(&mut r, MASK_MAGIC)?;
    let count = r.usize()?;
    if bytes.len() - r.pos != count.saturating_mul(8) {
        return Err(Error::Format(format!(
            "mask declares {count} offsets but carries {} bytes",
            bytes.len() - r.pos
        )));
    }
    let mut indices = Vec::with_capacity(count);
    for _ in 0..count {
        indices.push(r.usize()?);
    }
    Mask::new(n1, n2, n3, indices)
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write_tensor(path: &Path, x: &Tensor3) -> Result<()> {
    write_atomic(path, &encode_tensor(x))
}

pub fn read_tensor(path: &Path) -> Result<Tensor3> {
    decode_tensor(&fs::read(path)?)
}

pub fn write_mask(path: &Path, m: &Mask) -> Result<()> {
    write_atomic(path, &encode_mask(m))
}

pub fn read_mask(path: &Path) -> Result<Mask> {
    decode_mask(&fs::read(path)?)
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
