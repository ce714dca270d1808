//! On-disk formats for [`CdsIndex`] and [`OtsIndex`].
//!
//! All integers are little-endian.
//!
//! CDS (`.cdsi`):
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 4 | magic `CDSI` |
//! | 4 | 1 | version (1) |
//! | 5 | 1 | pivot count, 0 meaning 256 |
//! | 6 | 1 | flags, bit 0 = fast path allowed |
//! | 7 | 1 | reserved, 0 |
//! | 8 | 4 | k |
//! | 12 | 8 | n |
//! | 20 | 8 | FNV-1a 64 of the text |
//! | 28 | \|C\| | pivot bytes, ascending |
//! | | n_c | residues |
//! | | 4·⌈n/k⌉ | τ |
//!
//! `n_c` is not stored: it is the last τ entry, and the residue run fills
//! whatever lies between the pivots and τ.
//!
//! OTS (`.otsi`): magic `OTSI`, version, 3 reserved bytes, q (u32), n (u64),
//! n̂ (u64), bitmap length (1 B, = 32), the 32-byte sampled-alphabet bitmap,
//! fingerprint (u64), flags (1 B), then ŷ and ρ\[1..=⌊n̂/q⌋\] as u64.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ots::OtsIndex;
use crate::sampling::{CdsIndex, PivotSet, PositionSample};
use crate::Fingerprint;

pub const CDS_MAGIC: &[u8; 4] = b"CDSI";
pub const OTS_MAGIC: &[u8; 4] = b"OTSI";
pub const FORMAT_VERSION: u8 = 1;

const CDS_HEADER: usize = 28;
const OTS_HEADER: usize = 70;
const BITMAP_LEN: u8 = 32;
const FLAG_FAST_PATH: u8 = 1;

/// Either kind of persisted index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyIndex {
    Cds(CdsIndex),
    Ots(OtsIndex),
}

impl AnyIndex {
    pub fn fingerprint(&self) -> Fingerprint {
        match self {
            AnyIndex::Cds(i) => i.fingerprint(),
            AnyIndex::Ots(i) => i.fingerprint(),
        }
    }

    pub fn stored_size(&self) -> usize {
        match self {
            AnyIndex::Cds(i) => cds_file_size(i),
            AnyIndex::Ots(i) => ots_file_size(i),
        }
    }
}

impl From<CdsIndex> for AnyIndex {
    fn from(i: CdsIndex) -> Self {
        AnyIndex::Cds(i)
    }
}

impl From<OtsIndex> for AnyIndex {
    fn from(i: OtsIndex) -> Self {
        AnyIndex::Ots(i)
    }
}

pub fn cds_file_size(index: &CdsIndex) -> usize {
    CDS_HEADER + index.pivots().len() + index.n_c() + 4 * index.sample().tau().len()
}

pub fn ots_file_size(index: &OtsIndex) -> usize {
    OTS_HEADER + index.n_hat() + 8 * index.rho().len()
}

pub fn encode_cds(index: &CdsIndex) -> Vec<u8> {
    let sample = index.sample();
    let mut buf = Vec::with_capacity(cds_file_size(index));
    buf.extend_from_slice(CDS_MAGIC);
    buf.push(FORMAT_VERSION);
    buf.push(index.pivots().len() as u8);
    buf.push(if index.fast_path_ok() {
        FLAG_FAST_PATH
    } else {
        0
    });
    buf.push(0);
    buf.extend_from_slice(&sample.k().to_le_bytes());
    buf.extend_from_slice(&(sample.n() as u64).to_le_bytes());
    buf.extend_from_slice(&index.fingerprint().hash.to_le_bytes());
    buf.extend(index.pivots().iter());
    buf.extend_from_slice(sample.residues());
    for t in sample.tau() {
        buf.extend_from_slice(&t.to_le_bytes());
    }
    buf
}

pub fn encode_ots(index: &OtsIndex) -> Vec<u8> {
    let mut buf = Vec::with_capacity(ots_file_size(index));
    buf.extend_from_slice(OTS_MAGIC);
    buf.push(FORMAT_VERSION);
    buf.extend_from_slice(&[0; 3]);
    buf.extend_from_slice(&index.q().to_le_bytes());
    buf.extend_from_slice(&(index.n() as u64).to_le_bytes());
    buf.extend_from_slice(&(index.n_hat() as u64).to_le_bytes());
    buf.push(BITMAP_LEN);
    let mut bitmap = [0u8; 32];
    for (b, &on) in index.sampled_bitmap().iter().enumerate() {
        if on {
            bitmap[b / 8] |= 1 << (b % 8);
        }
    }
    buf.extend_from_slice(&bitmap);
    buf.extend_from_slice(&index.fingerprint().hash.to_le_bytes());
    buf.push(0);
    buf.extend_from_slice(index.sampled_text());
    for r in index.rho() {
        buf.extend_from_slice(&r.to_le_bytes());
    }
    buf
}

/// Writes the index and returns the byte count.
pub fn save_index<W: Write>(index: &AnyIndex, mut sink: W) -> Result<usize> {
    let bytes = match index {
        AnyIndex::Cds(i) => encode_cds(i),
        AnyIndex::Ots(i) => encode_ots(i),
    };
    sink.write_all(&bytes)?;
    sink.flush()?;
    Ok(bytes.len())
}

pub fn save_index_file(index: &AnyIndex, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let bytes = match index {
        AnyIndex::Cds(i) => encode_cds(i),
        AnyIndex::Ots(i) => encode_ots(i),
    };
    fs::write(path, &bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(bytes.len())
}

pub fn load_index<R: Read>(mut source: R) -> Result<AnyIndex> {
    let mut buf = Vec::new();
    source.read_to_end(&mut buf)?;
    decode_index(&buf)
}

pub fn load_index_file(path: impl AsRef<Path>) -> Result<AnyIndex> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_index(&buf)
}

pub fn decode_index(buf: &[u8]) -> Result<AnyIndex> {
    let mut r = Reader { buf, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic == CDS_MAGIC {
        decode_cds(r).map(AnyIndex::Cds)
    } else if magic == OTS_MAGIC {
        decode_ots(r).map(AnyIndex::Ots)
    } else {
        Err(Error::format(0, format!("unknown magic {magic:02x?}")))
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                Error::format(self.buf.len(), format!("truncated while reading {what}"))
            })?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn version(&mut self) -> Result<()> {
        let at = self.pos;
        match self.u8("version")? {
            FORMAT_VERSION => Ok(()),
            v => Err(Error::format(at, format!("unsupported version {v}"))),
        }
    }
}

fn usize_at(v: u64, at: usize, what: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::format(at, format!("{what} {v} too large")))
}

fn decode_cds(mut r: Reader<'_>) -> Result<CdsIndex> {
    r.version()?;
    let pivot_count = match r.u8("pivot count")? {
        0 => 256,
        c => c as usize,
    };
    let flags_at = r.pos;
    let flags = r.u8("flags")?;
    if flags & !FLAG_FAST_PATH != 0 {
        return Err(Error::format(
            flags_at,
            format!("unknown flags {flags:#04x}"),
        ));
    }
    if r.u8("reserved")? != 0 {
        return Err(Error::format(7, "reserved byte is not zero"));
    }
    let k = r.u32("k")?;
    if k == 0 || k > crate::sampling::MAX_BLOCK_SIZE {
        return Err(Error::format(8, format!("block size {k} outside 1..=256")));
    }
    let n = usize_at(r.u64("n")?, 12, "text length")?;
    let hash = r.u64("fingerprint")?;

    let pivot_at = r.pos;
    let pivot_bytes = r.take(pivot_count, "pivots")?;
    if pivot_bytes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::format(
            pivot_at,
            "pivot bytes not strictly ascending",
        ));
    }
    let pivots = PivotSet::new(pivot_bytes.iter().copied())
        .map_err(|e| Error::format(pivot_at, e.to_string()))?;

    let blocks = n.div_ceil(k as usize);
    let tau_len = blocks
        .checked_mul(4)
        .filter(|&l| l <= r.remaining())
        .ok_or_else(|| Error::format(r.buf.len(), "truncated: too short for the block map"))?;
    let residue_at = r.pos;
    let residues = r.take(r.remaining() - tau_len, "residues")?.to_vec();
    let tau_at = r.pos;
    let tau: Vec<u32> = r
        .take(tau_len, "block map")?
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if tau.last().map_or(0, |&t| t as usize) != residues.len() {
        return Err(Error::format(
            residue_at,
            format!(
                "{} residues but the block map counts {}",
                residues.len(),
                tau.last().copied().unwrap_or(0)
            ),
        ));
    }
    let sample = PositionSample::from_parts(residues, tau, k, n)
        .map_err(|e| Error::format(tau_at, e.to_string()))?;
    let index = CdsIndex::from_parts(
        sample,
        pivots,
        Fingerprint {
            hash,
            len: n as u64,
        },
    )
    .map_err(|e| Error::format(CDS_HEADER, e.to_string()))?;
    if index.fast_path_ok() != (flags & FLAG_FAST_PATH != 0) {
        return Err(Error::format(
            flags_at,
            "fast-path flag disagrees with the stored gaps",
        ));
    }
    Ok(index)
}

fn decode_ots(mut r: Reader<'_>) -> Result<OtsIndex> {
    r.version()?;
    if r.take(3, "reserved")? != [0, 0, 0] {
        return Err(Error::format(5, "reserved bytes are not zero"));
    }
    let q = r.u32("q")?;
    if q == 0 {
        return Err(Error::format(8, "interval factor q is zero"));
    }
    let n = usize_at(r.u64("n")?, 12, "text length")?;
    let n_hat = usize_at(r.u64("sampled length")?, 20, "sampled length")?;
    let bitmap_len = r.u8("bitmap length")?;
    if bitmap_len != BITMAP_LEN {
        return Err(Error::format(
            28,
            format!("bitmap length {bitmap_len}, expected 32"),
        ));
    }
    let bitmap = r.take(32, "alphabet bitmap")?;
    let mut sampled = [false; 256];
    for (b, slot) in sampled.iter_mut().enumerate() {
        *slot = bitmap[b / 8] & (1 << (b % 8)) != 0;
    }
    let hash = r.u64("fingerprint")?;
    let flags_at = r.pos;
    if r.u8("flags")? != 0 {
        return Err(Error::format(flags_at, "unknown flags"));
    }
    let text_at = r.pos;
    let sampled_text = r.take(n_hat, "sampled text")?.to_vec();
    let rho_at = r.pos;
    let rho_len = n_hat / q as usize;
    let rho: Vec<u64> = r
        .take(rho_len * 8, "position map")?
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if r.remaining() != 0 {
        return Err(Error::format(
            r.pos,
            "trailing bytes after the position map",
        ));
    }
    OtsIndex::from_parts(
        sampled,
        sampled_text,
        rho,
        q,
        Fingerprint {
            hash,
            len: n as u64,
        },
    )
    .map_err(|e| {
        let at = if e.to_string().contains("position map") {
            rho_at
        } else {
            text_at
        };
        Error::format(at, e.to_string())
    })
}
