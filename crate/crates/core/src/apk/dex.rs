//! DEX string table extraction.
//!
//! Reads the header, the `string_ids` table and the `string_data_item`s it
//! points at. Nothing else in the file is touched.

use std::collections::BTreeSet;

const HEADER_LEN: usize = 0x70;
const ENDIAN_CONSTANT: u32 = 0x1234_5678;
const STRING_IDS_SIZE_OFF: usize = 0x38;
const STRING_IDS_OFF_OFF: usize = 0x3C;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum DexError {
    #[error("file shorter than the DEX header")]
    Truncated,
    #[error("unsupported endian tag {0:#010x}")]
    EndianTag(u32),
    #[error("string_ids table ({count} ids at {offset:#x}) exceeds file length {len}")]
    StringIdsOutOfBounds { offset: u32, count: u32, len: usize },
}

/// A string that could not be decoded; the rest of the table is still read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedString {
    pub index: u32,
    pub reason: &'static str,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct DexStrings {
    pub strings: BTreeSet<String>,
    pub skipped: Vec<SkippedString>,
}

/// `dex\n0NN\0`
pub fn has_dex_magic(data: &[u8]) -> bool {
    data.len() >= 8
        && &data[..4] == b"dex\n"
        && data[4] == b'0'
        && data[5].is_ascii_digit()
        && data[6].is_ascii_digit()
        && data[7] == 0
}

fn u32_at(data: &[u8], off: usize) -> Option<u32> {
    data.get(off..off + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

/// Decodes an unsigned LEB128 value of at most five bytes.
/// Returns the value and the number of bytes consumed.
pub(crate) fn read_uleb128(data: &[u8]) -> Option<(u32, usize)> {
    let mut result: u32 = 0;
    for (i, &byte) in data.iter().take(5).enumerate() {
        let bits = u32::from(byte & 0x7f);
        if i == 4 && bits > 0x0f {
            return None;
        }
        result |= bits << (7 * i);
        if byte & 0x80 == 0 {
            return Some((result, i + 1));
        }
    }
    None
}

/// Decodes a NUL-terminated modified UTF-8 string into UTF-16 code units.
/// Returns `None` on malformed sequences or a missing terminator.
pub(crate) fn decode_mutf8(data: &[u8]) -> Option<Vec<u16>> {
    let mut units = Vec::new();
    let mut i = 0;
    loop {
        let a = *data.get(i)?;
        match a {
            0 => return Some(units),
            0x01..=0x7f => {
                units.push(u16::from(a));
                i += 1;
            }
            _ if a & 0xe0 == 0xc0 => {
                let b = *data.get(i + 1)?;
                if b & 0xc0 != 0x80 {
                    return None;
                }
                units.push((u16::from(a & 0x1f) << 6) | u16::from(b & 0x3f));
                i += 2;
            }
            _ if a & 0xf0 == 0xe0 => {
                let b = *data.get(i + 1)?;
                let c = *data.get(i + 2)?;
                if b & 0xc0 != 0x80 || c & 0xc0 != 0x80 {
                    return None;
                }
                units.push(
                    (u16::from(a & 0x0f) << 12) | (u16::from(b & 0x3f) << 6) | u16::from(c & 0x3f),
                );
                i += 3;
            }
            _ => return None,
        }
    }
}

fn read_string_item(data: &[u8], offset: u32) -> Result<String, &'static str> {
    let start = offset as usize;
    let item = data.get(start..).filter(|s| !s.is_empty()).ok_or("data offset out of bounds")?;
    let (utf16_len, used) = read_uleb128(item).ok_or("bad uleb128 length")?;
    let units = decode_mutf8(&item[used..]).ok_or("invalid modified UTF-8")?;
    if units.len() != utf16_len as usize {
        return Err("declared length does not match decoded length");
    }
    String::from_utf16(&units).map_err(|_| "unpaired surrogate")
}

/// Extracts every decodable string from one DEX image.
pub fn read_strings(data: &[u8]) -> Result<DexStrings, DexError> {
    if data.len() < HEADER_LEN {
        return Err(DexError::Truncated);
    }
    let endian = u32_at(data, 0x28).ok_or(DexError::Truncated)?;
    if endian != ENDIAN_CONSTANT {
        return Err(DexError::EndianTag(endian));
    }
    let count = u32_at(data, STRING_IDS_SIZE_OFF).ok_or(DexError::Truncated)?;
    let offset = u32_at(data, STRING_IDS_OFF_OFF).ok_or(DexError::Truncated)?;
    let table_end = u64::from(offset) + 4 * u64::from(count);
    if (count > 0 && (offset as usize) < HEADER_LEN) || table_end > data.len() as u64 {
        return Err(DexError::StringIdsOutOfBounds {
            offset,
            count,
            len: data.len(),
        });
    }

    let mut out = DexStrings::default();
    for index in 0..count {
        let data_off = u32_at(data, offset as usize + 4 * index as usize)
            .expect("string_ids bounds checked above");
        match read_string_item(data, data_off) {
            Ok(s) => {
                out.strings.insert(s);
            }
            Err(reason) => out.skipped.push(SkippedString { index, reason }),
        }
    }
    Ok(out)
}
