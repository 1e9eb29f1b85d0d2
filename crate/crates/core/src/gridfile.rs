//! Binary container for gridded space-time data.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `WBEN` |
//! | 4     | format version (u32) |
//! | 12    | `nx`, `ny`, `nt` (u32 each) |
//! | 40    | `l1`, `l2`, `c`, `t_final`, `dt` (f64 each) |
//! | 8 * (nt+1)(ny+1)(nx+1) | values, time-major, then y, then x |
//! | 8     | FNV-1a 64 checksum of every preceding byte |
//!
//! A single snapshot is stored with `nt = 0`.

use std::fs::File;
use std::hash::Hasher;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use fnv::FnvHasher;

use crate::error::{ensure, Error, Result};

pub const MAGIC: [u8; 4] = *b"WBEN";
pub const FORMAT_VERSION: u32 = 1;
/// Bytes before the value array.
pub const HEADER_LEN: usize = 4 + 4 + 3 * 4 + 5 * 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridHeader {
    pub nx: u32,
    pub ny: u32,
    pub nt: u32,
    pub l1: f64,
    pub l2: f64,
    pub c: f64,
    pub t_final: f64,
    pub dt: f64,
}

impl GridHeader {
    pub fn level_len(&self) -> usize {
        (self.nx as usize + 1) * (self.ny as usize + 1)
    }

    pub fn value_count(&self) -> usize {
        self.level_len() * (self.nt as usize + 1)
    }

    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        let mut at = 0;
        let mut put = |bytes: &[u8]| {
            out[at..at + bytes.len()].copy_from_slice(bytes);
            at += bytes.len();
        };
        put(&MAGIC);
        put(&FORMAT_VERSION.to_le_bytes());
        for v in [self.nx, self.ny, self.nt] {
            put(&v.to_le_bytes());
        }
        for v in [self.l1, self.l2, self.c, self.t_final, self.dt] {
            put(&v.to_le_bytes());
        }
        out
    }

    fn decode(bytes: &[u8; HEADER_LEN]) -> Result<Self> {
        if bytes[..4] != MAGIC {
            return Err(Error::Format(format!("bad magic {:?}", &bytes[..4])));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format version {version}")));
        }
        Ok(GridHeader {
            nx: u32_at(8),
            ny: u32_at(12),
            nt: u32_at(16),
            l1: f64_at(20),
            l2: f64_at(28),
            c: f64_at(36),
            t_final: f64_at(44),
            dt: f64_at(52),
        })
    }
}

/// Passes bytes through to `inner` while hashing them.
struct HashingWriter<W> {
    inner: W,
    hash: FnvHasher,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hash.write(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Values are converted in blocks of this many entries.
const CHUNK: usize = 8192;

/// Serializes header and values, returning the checksum that was appended.
pub fn write_grid<W: Write>(writer: W, header: &GridHeader, values: &[f64]) -> Result<u64> {
    ensure(values.len() == header.value_count(), || {
        format!("header describes {} values, got {}", header.value_count(), values.len())
    })?;
    let mut w = HashingWriter { inner: writer, hash: FnvHasher::default() };
    w.write_all(&header.encode())?;
    let mut buf = Vec::with_capacity(CHUNK * 8);
    for block in values.chunks(CHUNK) {
        buf.clear();
        for v in block {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    let sum = w.hash.finish();
    w.inner.write_all(&sum.to_le_bytes())?;
    w.inner.flush()?;
    Ok(sum)
}

/// Parses a grid stream, verifying magic, version, length and checksum.
pub fn read_grid<R: Read>(mut reader: R) -> Result<(GridHeader, Vec<f64>)> {
    let mut hash = FnvHasher::default();
    let mut head = [0u8; HEADER_LEN];
    read_exact_or_format(&mut reader, &mut head, "header")?;
    hash.write(&head);
    let header = GridHeader::decode(&head)?;
    let count = header.value_count();

    let mut values = Vec::with_capacity(count);
    let mut buf = vec![0u8; CHUNK * 8];
    let mut remaining = count;
    while remaining > 0 {
        let take = remaining.min(CHUNK);
        let bytes = &mut buf[..take * 8];
        read_exact_or_format(&mut reader, bytes, "value array")?;
        hash.write(bytes);
        values.extend(bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())));
        remaining -= take;
    }

    let mut tail = [0u8; 8];
    read_exact_or_format(&mut reader, &mut tail, "checksum")?;
    let stored = u64::from_le_bytes(tail);
    let computed = hash.finish();
    if stored != computed {
        return Err(Error::Format(format!("checksum mismatch: stored {stored:016x}, computed {computed:016x}")));
    }
    let mut extra = [0u8; 1];
    if reader.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after checksum".into()));
    }
    Ok((header, values))
}

fn read_exact_or_format<R: Read>(reader: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    reader.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Format(format!("file truncated in {what}")),
        _ => Error::Io(e),
    })
}

/// Writes to a temporary sibling and renames it into place, so readers never
/// observe a partial file.
pub fn write_grid_file(path: &Path, header: &GridHeader, values: &[f64]) -> Result<u64> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("grid");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let file = File::create(&tmp)?;
        let sum = write_grid(BufWriter::new(&file), header, values)?;
        file.sync_all()?;
        std::fs::rename(&tmp, path)?;
        Ok(sum)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

pub fn read_grid_file(path: &Path) -> Result<(GridHeader, Vec<f64>)> {
    let file = File::open(path)?;
    read_grid(BufReader::new(file)).map_err(|e| match e {
        Error::Format(reason) => Error::Cache { path: path.to_path_buf(), reason },
        other => other,
    })
}
