use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::{EmbeddingMatrix, FORMAT_VERSION, VEMB_MAGIC};
use crate::error::{Error, FormatError, Result};

/// Serializes a matrix into the VEMB container.
pub fn encode_embeddings(matrix: &EmbeddingMatrix) -> Result<Vec<u8>> {
    let n = u32::try_from(matrix.len())
        .map_err(|_| Error::Config(format!("{} rows exceed the u32 row limit", matrix.len())))?;
    let dim = u32::try_from(matrix.dim())
        .map_err(|_| Error::Config(format!("dimension {} exceeds u32", matrix.dim())))?;

    let id_bytes: usize = matrix.ids().iter().map(|id| 2 + id.len()).sum();
    let mut out = Vec::with_capacity(20 + id_bytes + matrix.data().len() * 4);
    out.extend_from_slice(VEMB_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&dim.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    for id in matrix.ids() {
        let len = u16::try_from(id.len())
            .map_err(|_| Error::Config(format!("sample id of {} bytes exceeds u16", id.len())))?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(id.as_bytes());
    }
    for v in matrix.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn write_embeddings(matrix: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_embeddings(matrix)?).map_err(super::with_path(path))?;
    Ok(())
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    decode_embeddings(&fs::read(path).map_err(super::with_path(path))?)
}

/// Parses a VEMB container, validating every header field against the payload size.
pub fn decode_embeddings(bytes: &[u8]) -> Result<EmbeddingMatrix> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    if cur.take(4, "magic")? != VEMB_MAGIC {
        return Err(FormatError::new("bad magic, expected VEMB").into());
    }
    let version = cur.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(FormatError::new(format!("unsupported version {version}")).into());
    }
    let n = cur.u32("row count")? as usize;
    let dim = cur.u32("dimension")? as usize;
    if dim == 0 {
        return Err(FormatError::new("dimension is zero").into());
    }
    let id_count = cur.u32("id count")? as usize;
    if id_count != n {
        return Err(
            FormatError::new(format!("id table has {id_count} entries for {n} rows")).into(),
        );
    }
    // Every id costs at least its two length bytes.
    if n.saturating_mul(2) > cur.remaining() {
        return Err(
            FormatError::new(format!("{n} ids cannot fit in {} bytes", cur.remaining())).into(),
        );
    }

    let mut ids = Vec::with_capacity(n);
    let mut seen = HashSet::with_capacity(n);
    for i in 0..n {
        let len = cur.u16("id length")? as usize;
        let raw = cur.take(len, "id bytes")?;
        let id = std::str::from_utf8(raw)
            .map_err(|_| FormatError::new(format!("id {i} is not valid UTF-8")))?
            .to_owned();
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        ids.push(id);
    }

    let payload = n
        .checked_mul(dim)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| FormatError::new("payload size overflows"))?;
    if payload != cur.remaining() {
        return Err(FormatError::new(format!(
            "payload is {} bytes, header implies {payload}",
            cur.remaining()
        ))
        .into());
    }
    let data = cur
        .take(payload, "payload")?
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    EmbeddingMatrix::new(ids, dim, data)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8], FormatError> {
        if len > self.remaining() {
            return Err(FormatError::new(format!("truncated while reading {what}")));
        }
        let out = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn u16(&mut self, what: &str) -> Result<u16, FormatError> {
        let b = self.take(2, what)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, what: &str) -> Result<u32, FormatError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}
