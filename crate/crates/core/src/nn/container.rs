//! Flat binary tensor container: the magic bytes, then for each tensor a
//! little-endian `u32` name length, UTF-8 name, `u32` rows, `u32` cols and
//! `rows * cols` little-endian `f64` values.

use std::io::{Read, Write};

use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"GNNSDE01";

pub fn write_tensors<'t>(
    w: &mut impl Write,
    tensors: impl IntoIterator<Item = (&'t str, &'t Tensor)>,
) -> Result<()> {
    w.write_all(MAGIC)?;
    for (name, t) in tensors {
        let len = u32::try_from(name.len()).map_err(|_| Error::Container("name too long".into()))?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(t.rows() as u32).to_le_bytes())?;
        w.write_all(&(t.cols() as u32).to_le_bytes())?;
        for x in t.data() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_tensors(r: &mut impl Read) -> Result<Vec<(String, Tensor)>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Container("missing GNNSDE01 magic".into()));
    }
    let mut cur = &bytes[MAGIC.len()..];
    let mut out = Vec::new();
    while !cur.is_empty() {
        let len = read_u32(&mut cur)? as usize;
        let name = String::from_utf8(take(&mut cur, len)?.to_vec())
            .map_err(|_| Error::Container("tensor name is not UTF-8".into()))?;
        let rows = read_u32(&mut cur)? as usize;
        let cols = read_u32(&mut cur)? as usize;
        let data = take(&mut cur, rows * cols * 8)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        out.push((name, Tensor::from_vec(rows, cols, data)?));
    }
    Ok(out)
}

fn take<'b>(cur: &mut &'b [u8], n: usize) -> Result<&'b [u8]> {
    if cur.len() < n {
        return Err(Error::Container("truncated tensor record".into()));
    }
    let (head, tail) = cur.split_at(n);
    *cur = tail;
    Ok(head)
}

fn read_u32(cur: &mut &[u8]) -> Result<u32> {
    Ok(u32::from_le_bytes(take(cur, 4)?.try_into().unwrap()))
}
