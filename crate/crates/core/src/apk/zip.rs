//! Minimal ZIP central-directory reader.
//!
//! Only what APKs need: single-disk archives, stored and deflate entries.
//! Every offset read from the archive is bounds-checked against the input.

use std::io::Read;

use flate2::read::DeflateDecoder;

const EOCD_SIG: u32 = 0x0605_4b50;
const CDH_SIG: u32 = 0x0201_4b50;
const LFH_SIG: u32 = 0x0403_4b50;
const EOCD_LEN: usize = 22;
const CDH_LEN: usize = 46;
const LFH_LEN: usize = 30;
const MAX_COMMENT: usize = 0xFFFF;

/// Upper bound on a single decompressed entry.
pub const MAX_ENTRY_SIZE: u64 = 256 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct CentralEntry {
    pub name: String,
    pub method: u16,
    pub crc32: u32,
    pub compressed_size: u64,
    pub uncompressed_size: u64,
    pub local_header_offset: u64,
}

impl CentralEntry {
    pub fn is_dir(&self) -> bool {
        self.name.ends_with('/')
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub(crate) enum ArchiveError {
    #[error("end of central directory record not found")]
    NoEndRecord,
    #[error("multi-disk or zip64 archives are not supported")]
    Unsupported,
    #[error("central directory out of bounds")]
    DirectoryOutOfBounds,
    #[error("bad central directory header at offset {0}")]
    BadDirectoryHeader(usize),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub(crate) enum EntryError {
    #[error("local header out of bounds")]
    LocalHeaderOutOfBounds,
    #[error("bad local header signature")]
    BadLocalHeader,
    #[error("entry data out of bounds")]
    DataOutOfBounds,
    #[error("unsupported compression method {0}")]
    UnsupportedMethod(u16),
    #[error("inflate failed: {0}")]
    Inflate(String),
    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: u64, actual: u64 },
    #[error("crc mismatch: expected {expected:08x}, got {actual:08x}")]
    CrcMismatch { expected: u32, actual: u32 },
}

fn u16_at(data: &[u8], off: usize) -> Option<u16> {
    data.get(off..off + 2).map(|b| u16::from_le_bytes([b[0], b[1]]))
}

fn u32_at(data: &[u8], off: usize) -> Option<u32> {
    data.get(off..off + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

fn find_end_record(data: &[u8]) -> Option<usize> {
    if data.len() < EOCD_LEN {
        return None;
    }
    let last = data.len() - EOCD_LEN;
    let first = last.saturating_sub(MAX_COMMENT);
    (first..=last).rev().find(|&pos| {
        u32_at(data, pos) == Some(EOCD_SIG)
            // comment length must reach exactly to the end of the file
            && u16_at(data, pos + 20).map(usize::from) == Some(data.len() - pos - EOCD_LEN)
    })
    .or_else(|| (first..=last).rev().find(|&pos| u32_at(data, pos) == Some(EOCD_SIG)))
}

/// Parses the end record and the central directory.
pub(crate) fn read_central_directory(data: &[u8]) -> Result<Vec<CentralEntry>, ArchiveError> {
    let eocd = find_end_record(data).ok_or(ArchiveError::NoEndRecord)?;
    let field16 = |off| u16_at(data, eocd + off).ok_or(ArchiveError::NoEndRecord);
    let field32 = |off| u32_at(data, eocd + off).ok_or(ArchiveError::NoEndRecord);

    let disk = field16(4)?;
    let cd_disk = field16(6)?;
    let total = field16(10)?;
    let cd_size = field32(12)?;
    let cd_offset = field32(16)?;
    if disk != 0 || cd_disk != 0 || total == 0xFFFF || cd_size == u32::MAX || cd_offset == u32::MAX
    {
        return Err(ArchiveError::Unsupported);
    }
    let start = cd_offset as usize;
    let end = start
        .checked_add(cd_size as usize)
        .filter(|&end| end <= eocd)
        .ok_or(ArchiveError::DirectoryOutOfBounds)?;
    let dir = &data[start..end];

    let mut entries = Vec::with_capacity(usize::from(total).min(dir.len() / CDH_LEN));
    let mut pos = 0usize;
    for _ in 0..total {
        let bad = ArchiveError::BadDirectoryHeader(start + pos);
        if u32_at(dir, pos) != Some(CDH_SIG) || pos + CDH_LEN > dir.len() {
            return Err(bad);
        }
        let method = u16_at(dir, pos + 10).ok_or(bad.clone())?;
        let crc32 = u32_at(dir, pos + 16).ok_or(bad.clone())?;
        let compressed_size = u32_at(dir, pos + 20).ok_or(bad.clone())?;
        let uncompressed_size = u32_at(dir, pos + 24).ok_or(bad.clone())?;
        let name_len = usize::from(u16_at(dir, pos + 28).ok_or(bad.clone())?);
        let extra_len = usize::from(u16_at(dir, pos + 30).ok_or(bad.clone())?);
        let comment_len = usize::from(u16_at(dir, pos + 32).ok_or(bad.clone())?);
        let local_header_offset = u32_at(dir, pos + 42).ok_or(bad.clone())?;
        let name_start = pos + CDH_LEN;
        let name_bytes = dir.get(name_start..name_start + name_len).ok_or(bad.clone())?;
        let next = name_start + name_len + extra_len + comment_len;
        if next > dir.len() {
            return Err(bad);
        }
        entries.push(CentralEntry {
            name: String::from_utf8_lossy(name_bytes).into_owned(),
            method,
            crc32,
            compressed_size: u64::from(compressed_size),
            uncompressed_size: u64::from(uncompressed_size),
            local_header_offset: u64::from(local_header_offset),
        });
        pos = next;
    }
    Ok(entries)
}

/// Reads, decompresses and CRC-checks one entry.
pub(crate) fn read_entry(data: &[u8], entry: &CentralEntry) -> Result<Vec<u8>, EntryError> {
    let lfh = usize::try_from(entry.local_header_offset)
        .ok()
        .filter(|&off| off.checked_add(LFH_LEN).is_some_and(|end| end <= data.len()))
        .ok_or(EntryError::LocalHeaderOutOfBounds)?;
    if u32_at(data, lfh) != Some(LFH_SIG) {
        return Err(EntryError::BadLocalHeader);
    }
    let name_len = usize::from(u16_at(data, lfh + 26).ok_or(EntryError::LocalHeaderOutOfBounds)?);
    let extra_len = usize::from(u16_at(data, lfh + 28).ok_or(EntryError::LocalHeaderOutOfBounds)?);
    let data_start = lfh + LFH_LEN + name_len + extra_len;
    let raw = usize::try_from(entry.compressed_size)
        .ok()
        .and_then(|len| data_start.checked_add(len))
        .and_then(|end| data.get(data_start..end))
        .ok_or(EntryError::DataOutOfBounds)?;

    if entry.uncompressed_size > MAX_ENTRY_SIZE {
        return Err(EntryError::SizeMismatch {
            expected: entry.uncompressed_size,
            actual: MAX_ENTRY_SIZE,
        });
    }
    let payload = match entry.method {
        0 => raw.to_vec(),
        8 => {
            let mut out = Vec::with_capacity(entry.uncompressed_size.min(1 << 20) as usize);
            DeflateDecoder::new(raw)
                .take(entry.uncompressed_size + 1)
                .read_to_end(&mut out)
                .map_err(|e| EntryError::Inflate(e.to_string()))?;
            out
        }
        other => return Err(EntryError::UnsupportedMethod(other)),
    };
    if payload.len() as u64 != entry.uncompressed_size {
        return Err(EntryError::SizeMismatch {
            expected: entry.uncompressed_size,
            actual: payload.len() as u64,
        });
    }
    let actual = crc32fast::hash(&payload);
    if actual != entry.crc32 {
        return Err(EntryError::CrcMismatch {
            expected: entry.crc32,
            actual,
        });
    }
    Ok(payload)
}
