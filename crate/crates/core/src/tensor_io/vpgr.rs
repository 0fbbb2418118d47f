use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{PatchGrid, FORMAT_VERSION, VPGR_MAGIC};
use crate::error::{Error, FormatError, Result};

const CHUNK: usize = 1 << 20;

/// Streams [`PatchGrid`]s out of a VPGR container one image at a time.
///
/// Yields `None` after the declared image count has been read and the input
/// is exhausted. Any error ends the stream.
pub struct PatchGridReader<R> {
    inner: R,
    remaining: u32,
    index: usize,
    seen: HashSet<String>,
    done: bool,
}

impl<R: Read> PatchGridReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut inner, &mut magic, None, "magic")?;
        if &magic != VPGR_MAGIC {
            return Err(FormatError::new("bad magic, expected VPGR").into());
        }
        let version = read_u32(&mut inner, None, "version")?;
        if version != FORMAT_VERSION {
            return Err(FormatError::new(format!("unsupported version {version}")).into());
        }
        let remaining = read_u32(&mut inner, None, "image count")?;
        Ok(Self {
            inner,
            remaining,
            index: 0,
            seen: HashSet::new(),
            done: false,
        })
    }

    /// Images still expected according to the header.
    pub fn remaining(&self) -> usize {
        self.remaining as usize
    }

    fn read_image(&mut self) -> Result<PatchGrid> {
        let at = Some(self.index);
        let len = read_u16(&mut self.inner, at, "id length")? as usize;
        let mut raw = vec![0u8; len];
        read_exact(&mut self.inner, &mut raw, at, "id bytes")?;
        let id = String::from_utf8(raw)
            .map_err(|_| FormatError::at_image(self.index, "id is not valid UTF-8"))?;
        let rows = read_u16(&mut self.inner, at, "rows")? as usize;
        let cols = read_u16(&mut self.inner, at, "cols")? as usize;
        let dim = read_u32(&mut self.inner, at, "dimension")? as usize;
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(FormatError::at_image(
                self.index,
                format!("empty grid {rows}x{cols}x{dim}"),
            )
            .into());
        }
        let payload = rows
            .checked_mul(cols)
            .and_then(|c| c.checked_mul(dim))
            .and_then(|c| c.checked_mul(4))
            .ok_or_else(|| FormatError::at_image(self.index, "payload size overflows"))?;

        // Grow the buffer as bytes arrive so a lying header cannot force a huge allocation.
        let mut bytes = Vec::new();
        while bytes.len() < payload {
            let step = (payload - bytes.len()).min(CHUNK);
            let start = bytes.len();
            bytes.resize(start + step, 0);
            read_exact(&mut self.inner, &mut bytes[start..], at, "tensor payload")?;
        }
        let values: Vec<f64> = bytes
            .chunks_exact(4)
            .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
            .collect();
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "image {} (`{id}`) value {pos}",
                self.index
            )));
        }
        if !self.seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        PatchGrid::new(id, rows, cols, dim, values)
    }

    fn check_eof(&mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        loop {
            match self.inner.read(&mut probe) {
                Ok(0) => return Ok(()),
                Ok(_) => {
                    return Err(FormatError::new(format!(
                        "trailing bytes after {} declared images",
                        self.index
                    ))
                    .into())
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }
}

impl<R: Read> Iterator for PatchGridReader<R> {
    type Item = Result<PatchGrid>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if self.remaining == 0 {
            self.done = true;
            return self.check_eof().err().map(Err);
        }
        let out = self.read_image();
        match out {
            Ok(_) => {
                self.remaining -= 1;
                self.index += 1;
            }
            Err(_) => self.done = true,
        }
        Some(out)
    }
}

pub fn read_patch_grids(path: impl AsRef<Path>) -> Result<PatchGridReader<BufReader<File>>> {
    let path = path.as_ref();
    PatchGridReader::new(BufReader::new(
        File::open(path).map_err(super::with_path(path))?,
    ))
}

/// Writes grids as a VPGR container, narrowing values to float32.
pub fn encode_patch_grids<W: Write>(out: &mut W, grids: &[PatchGrid]) -> Result<()> {
    let count = u32::try_from(grids.len())
        .map_err(|_| Error::Config("too many images for one VPGR file".into()))?;
    out.write_all(VPGR_MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&count.to_le_bytes())?;
    for g in grids {
        let len = u16::try_from(g.sample_id().len()).map_err(|_| {
            Error::Config(format!("sample id `{}` exceeds u16 bytes", g.sample_id()))
        })?;
        let rows = u16::try_from(g.rows())
            .map_err(|_| Error::Config(format!("grid `{}` has too many rows", g.sample_id())))?;
        let cols = u16::try_from(g.cols())
            .map_err(|_| Error::Config(format!("grid `{}` has too many cols", g.sample_id())))?;
        let dim = u32::try_from(g.dim()).map_err(|_| {
            Error::Config(format!("grid `{}` dimension exceeds u32", g.sample_id()))
        })?;
        out.write_all(&len.to_le_bytes())?;
        out.write_all(g.sample_id().as_bytes())?;
        out.write_all(&rows.to_le_bytes())?;
        out.write_all(&cols.to_le_bytes())?;
        out.write_all(&dim.to_le_bytes())?;
        for &v in g.values() {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn write_patch_grids(path: impl AsRef<Path>, grids: &[PatchGrid]) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path).map_err(super::with_path(path))?);
    encode_patch_grids(&mut out, grids)?;
    out.flush()?;
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], image: Option<usize>, what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            let reason = format!("truncated while reading {what}");
            match image {
                Some(i) => FormatError::at_image(i, reason).into(),
                None => FormatError::new(reason).into(),
            }
        } else {
            Error::Io(e)
        }
    })
}

fn read_u16<R: Read>(r: &mut R, image: Option<usize>, what: &str) -> Result<u16> {
    let mut b = [0u8; 2];
    read_exact(r, &mut b, image, what)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R, image: Option<usize>, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, image, what)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode(grids: &[PatchGrid]) -> Vec<u8> {
        let mut out = Vec::new();
        encode_patch_grids(&mut out, grids).unwrap();
        out
    }

    fn collect(bytes: &[u8]) -> Result<Vec<PatchGrid>> {
        PatchGridReader::new(bytes)?.collect()
    }

    #[test]
    fn one_image_two_by_two_by_three() {
        let values: Vec<f64> = (0..12).map(f64::from).collect();
        let grid = PatchGrid::new("img-0", 2, 2, 3, values).unwrap();
        let back = collect(&encode(std::slice::from_ref(&grid))).unwrap();
        assert_eq!(back, vec![grid]);
    }

    #[test]
    fn truncated_payload_names_the_image() {
        let a = PatchGrid::new("a", 1, 1, 2, vec![1.0, 2.0]).unwrap();
        let b = PatchGrid::new("b", 2, 1, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut bytes = encode(&[a, b]);
        bytes.truncate(bytes.len() - 3);
        match collect(&bytes) {
            Err(Error::Format(FormatError { image: Some(1), .. })) => {}
            other => panic!("expected format error at image 1, got {other:?}"),
        }
    }

    #[test]
    fn siglip_sized_grid_is_accepted() {
        let (rows, cols, dim) = (27, 27, 1152);
        let values = (0..rows * cols * dim)
            .map(|i| ((i % 97) as f64) / 97.0)
            .collect();
        let grid = PatchGrid::new("scan.png", rows, cols, dim, values).unwrap();
        let back = collect(&encode(&[grid])).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(
            (back[0].rows(), back[0].cols(), back[0].dim()),
            (27, 27, 1152)
        );
    }

    #[test]
    fn extra_image_beyond_count_is_rejected() {
        let a = PatchGrid::new("a", 1, 1, 1, vec![1.0]).unwrap();
        let mut bytes = encode(&[a.clone(), a]);
        bytes[8] = 1; // declare one image, carry two
        assert!(matches!(collect(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn zero_rows_rejected() {
        let a = PatchGrid::new("a", 1, 1, 1, vec![1.0]).unwrap();
        let mut bytes = encode(&[a]);
        // header(12) + id len(2) + "a"(1) puts rows at 15
        bytes[15] = 0;
        assert!(matches!(collect(&bytes), Err(Error::Format(_))));
    }
}
