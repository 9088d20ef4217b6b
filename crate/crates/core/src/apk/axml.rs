//! `AndroidManifest.xml` permission extraction.
//!
//! Handles the compiled chunk format as well as plain-text XML. When the
//! structure is damaged, permissions are recovered by scanning the string
//! pool (or failing that, the raw bytes) for `android.permission.*` tokens.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;

pub const PERMISSION_PREFIX: &str = "android.permission.";
const ANDROID_NS: &str = "http://schemas.android.com/apk/res/android";
const ATTR_NAME_RES_ID: u32 = 0x0101_0003;

const RES_STRING_POOL_TYPE: u16 = 0x0001;
const RES_XML_TYPE: u16 = 0x0003;
const RES_XML_START_ELEMENT_TYPE: u16 = 0x0102;
const RES_XML_RESOURCE_MAP_TYPE: u16 = 0x0180;
const UTF8_FLAG: u32 = 1 << 8;
const NO_INDEX: u32 = 0xFFFF_FFFF;
const TYPE_STRING: u8 = 0x03;

const PERMISSION_ELEMENTS: [&str; 3] = [
    "uses-permission",
    "uses-permission-sdk-23",
    "uses-permission-sdk-m",
];

static PERMISSION_TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"android\.permission\.[A-Z_]+").expect("valid pattern"));

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("chunk at offset {offset:#x}: {reason}")]
    Chunk { offset: usize, reason: &'static str },
    #[error("string pool: {0}")]
    StringPool(&'static str),
    #[error("xml: {0}")]
    Xml(String),
}

/// Permissions declared by a manifest.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct DeclaredPermissions {
    /// Bare names; the `android.permission.` prefix is removed.
    pub permissions: BTreeSet<String>,
    /// Set when structural parsing failed and a token scan was used instead.
    pub fallback: Option<ManifestError>,
}

impl DeclaredPermissions {
    pub fn fallback_used(&self) -> bool {
        self.fallback.is_some()
    }
}

pub fn strip_permission_prefix(name: &str) -> String {
    name.strip_prefix(PERMISSION_PREFIX).unwrap_or(name).to_string()
}

pub fn is_binary_xml(data: &[u8]) -> bool {
    u16_at(data, 0) == Some(RES_XML_TYPE)
}

/// Parses a manifest in either encoding.
pub fn parse_permissions(data: &[u8]) -> DeclaredPermissions {
    let structured = if is_binary_xml(data) {
        parse_binary(data)
    } else {
        parse_text(data)
    };
    match structured {
        Ok(permissions) => DeclaredPermissions {
            permissions,
            fallback: None,
        },
        Err(err) => DeclaredPermissions {
            permissions: scan_fallback(data),
            fallback: Some(err),
        },
    }
}

fn u16_at(data: &[u8], off: usize) -> Option<u16> {
    data.get(off..off.checked_add(2)?)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
}

fn u32_at(data: &[u8], off: usize) -> Option<u32> {
    data.get(off..off.checked_add(4)?)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

#[derive(Debug, Clone, Copy)]
struct ChunkHeader {
    kind: u16,
    header_size: usize,
    size: usize,
}

fn chunk_header(data: &[u8], offset: usize) -> Result<ChunkHeader, ManifestError> {
    let err = |reason| ManifestError::Chunk { offset, reason };
    let kind = u16_at(data, offset).ok_or(err("truncated header"))?;
    let header_size = usize::from(u16_at(data, offset + 2).ok_or(err("truncated header"))?);
    let size = u32_at(data, offset + 4).ok_or(err("truncated header"))? as usize;
    if header_size < 8 || size < header_size {
        return Err(err("inconsistent sizes"));
    }
    if offset.checked_add(size).is_none_or(|end| end > data.len()) {
        return Err(err("chunk exceeds input"));
    }
    Ok(ChunkHeader {
        kind,
        header_size,
        size,
    })
}

/// Decoded string pool. Undecodable entries are kept as `None`.
#[derive(Debug, Default)]
struct StringPool {
    strings: Vec<Option<String>>,
}

impl StringPool {
    fn get(&self, index: u32) -> Option<&str> {
        if index == NO_INDEX {
            return None;
        }
        self.strings.get(index as usize)?.as_deref()
    }

    fn parse(chunk: &[u8], header_size: usize) -> Result<Self, ManifestError> {
        let count = u32_at(chunk, 8).ok_or(ManifestError::StringPool("truncated header"))?;
        let flags = u32_at(chunk, 16).ok_or(ManifestError::StringPool("truncated header"))?;
        let strings_start =
            u32_at(chunk, 20).ok_or(ManifestError::StringPool("truncated header"))? as usize;
        let offsets_end = (count as usize)
            .checked_mul(4)
            .and_then(|n| n.checked_add(header_size))
            .filter(|&end| end <= chunk.len())
            .ok_or(ManifestError::StringPool("offset table exceeds chunk"))?;
        if strings_start > chunk.len() || (count > 0 && strings_start < offsets_end) {
            return Err(ManifestError::StringPool("bad strings start"));
        }
        let utf8 = flags & UTF8_FLAG != 0;
        let strings = (0..count as usize)
            .map(|i| {
                let rel = u32_at(chunk, header_size + 4 * i)? as usize;
                let at = strings_start.checked_add(rel)?;
                if utf8 {
                    decode_utf8_entry(chunk, at)
                } else {
                    decode_utf16_entry(chunk, at)
                }
            })
            .collect();
        Ok(Self { strings })
    }
}

fn decode_utf8_entry(data: &[u8], at: usize) -> Option<String> {
    fn length(data: &[u8], at: usize) -> Option<(usize, usize)> {
        let first = *data.get(at)?;
        if first & 0x80 != 0 {
            let second = *data.get(at + 1)?;
            Some(((usize::from(first & 0x7f) << 8) | usize::from(second), 2))
        } else {
            Some((usize::from(first), 1))
        }
    }
    let (_chars, a) = length(data, at)?;
    let (bytes, b) = length(data, at + a)?;
    let start = at + a + b;
    let raw = data.get(start..start.checked_add(bytes)?)?;
    String::from_utf8(raw.to_vec()).ok()
}

fn decode_utf16_entry(data: &[u8], at: usize) -> Option<String> {
    let first = usize::from(u16_at(data, at)?);
    let (len, skip) = if first & 0x8000 != 0 {
        let second = usize::from(u16_at(data, at + 2)?);
        (((first & 0x7fff) << 16) | second, 4)
    } else {
        (first, 2)
    };
    let start = at + skip;
    let raw = data.get(start..start.checked_add(len.checked_mul(2)?)?)?;
    let units: Vec<u16> = raw
        .chunks_exact(2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .collect();
    String::from_utf16(&units).ok()
}

fn parse_binary(data: &[u8]) -> Result<BTreeSet<String>, ManifestError> {
    let root = chunk_header(data, 0)?;
    if root.kind != RES_XML_TYPE {
        return Err(ManifestError::Chunk {
            offset: 0,
            reason: "not an XML chunk",
        });
    }
    let end = root.size;
    let mut pool: Option<StringPool> = None;
    let mut resource_ids: Vec<u32> = Vec::new();
    let mut found = BTreeSet::new();
    let mut offset = root.header_size;

    while offset < end {
        let header = chunk_header(data, offset)?;
        let chunk = &data[offset..offset + header.size];
        match header.kind {
            RES_STRING_POOL_TYPE => pool = Some(StringPool::parse(chunk, header.header_size)?),
            RES_XML_RESOURCE_MAP_TYPE => {
                resource_ids = chunk[header.header_size..]
                    .chunks_exact(4)
                    .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                    .collect();
            }
            RES_XML_START_ELEMENT_TYPE => {
                let pool = pool.as_ref().ok_or(ManifestError::StringPool("element before pool"))?;
                if let Some(value) = permission_from_element(chunk, &header, pool, &resource_ids)
                    .map_err(|reason| ManifestError::Chunk { offset, reason })?
                {
                    found.insert(strip_permission_prefix(&value));
                }
            }
            _ => {}
        }
        offset += header.size;
    }
    if pool.is_none() {
        return Err(ManifestError::StringPool("missing"));
    }
    Ok(found)
}

fn permission_from_element(
    chunk: &[u8],
    header: &ChunkHeader,
    pool: &StringPool,
    resource_ids: &[u32],
) -> Result<Option<String>, &'static str> {
    let ext = header.header_size;
    let name_idx = u32_at(chunk, ext + 4).ok_or("truncated element")?;
    let attr_start = usize::from(u16_at(chunk, ext + 8).ok_or("truncated element")?);
    let attr_size = usize::from(u16_at(chunk, ext + 10).ok_or("truncated element")?);
    let attr_count = usize::from(u16_at(chunk, ext + 12).ok_or("truncated element")?);

    let Some(name) = pool.get(name_idx) else {
        return Ok(None);
    };
    if !PERMISSION_ELEMENTS.contains(&name) {
        return Ok(None);
    }
    if attr_count > 0 && attr_size < 20 {
        return Err("attribute record too small");
    }
    for i in 0..attr_count {
        let at = ext + attr_start + i * attr_size;
        if at + 20 > chunk.len() {
            return Err("attribute exceeds chunk");
        }
        let ns = u32_at(chunk, at).ok_or("truncated attribute")?;
        let attr_name = u32_at(chunk, at + 4).ok_or("truncated attribute")?;
        let raw_value = u32_at(chunk, at + 8).ok_or("truncated attribute")?;
        let data_type = chunk[at + 15];
        let typed = u32_at(chunk, at + 16).ok_or("truncated attribute")?;

        let is_name = resource_ids.get(attr_name as usize) == Some(&ATTR_NAME_RES_ID)
            || (pool.get(attr_name) == Some("name")
                && pool.get(ns).is_none_or(|uri| uri == ANDROID_NS));
        if !is_name {
            continue;
        }
        let value = pool
            .get(raw_value)
            .or_else(|| (data_type == TYPE_STRING).then(|| pool.get(typed)).flatten());
        return Ok(value.map(str::to_string));
    }
    Ok(None)
}

fn parse_text(data: &[u8]) -> Result<BTreeSet<String>, ManifestError> {
    let text = std::str::from_utf8(data).map_err(|e| ManifestError::Xml(e.to_string()))?;
    let text = text.trim_start_matches('\u{feff}');
    let doc = roxmltree::Document::parse(text).map_err(|e| ManifestError::Xml(e.to_string()))?;
    Ok(doc
        .descendants()
        .filter(|n| n.is_element() && PERMISSION_ELEMENTS.contains(&n.tag_name().name()))
        .filter_map(|n| n.attribute((ANDROID_NS, "name")).or_else(|| n.attribute("name")))
        .map(strip_permission_prefix)
        .collect())
}

fn scan_tokens<'a>(texts: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
    texts
        .into_iter()
        .flat_map(|t| PERMISSION_TOKEN.find_iter(t))
        .map(|m| strip_permission_prefix(m.as_str()))
        .collect()
}

/// Token scan over the string pool when it is intact, else over the raw
/// bytes read both as 8-bit text and as UTF-16LE.
fn scan_fallback(data: &[u8]) -> BTreeSet<String> {
    if is_binary_xml(data) {
        if let Some(pool) = first_string_pool(data) {
            return scan_tokens(pool.strings.iter().flatten().map(String::as_str));
        }
    }
    let narrow: String = data
        .iter()
        .map(|&b| if b.is_ascii_graphic() { b as char } else { ' ' })
        .collect();
    let wide: String = data
        .chunks_exact(2)
        .map(|b| {
            let unit = u16::from_le_bytes([b[0], b[1]]);
            match u8::try_from(unit) {
                Ok(c) if c.is_ascii_graphic() => c as char,
                _ => ' ',
            }
        })
        .collect();
    scan_tokens([narrow.as_str(), wide.as_str()])
}

fn first_string_pool(data: &[u8]) -> Option<StringPool> {
    let header_size = usize::from(u16_at(data, 2)?);
    let offset = header_size.max(8);
    let header = chunk_header(data, offset).ok()?;
    if header.kind != RES_STRING_POOL_TYPE {
        return None;
    }
    StringPool::parse(&data[offset..offset + header.size], header.header_size).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_stripping() {
        assert_eq!(strip_permission_prefix("android.permission.SEND_SMS"), "SEND_SMS");
        assert_eq!(
            strip_permission_prefix("com.vendor.permission.C2D_MESSAGE"),
            "com.vendor.permission.C2D_MESSAGE"
        );
    }

    #[test]
    fn plain_text_manifest() {
        let xml = br#"<?xml version="1.0" encoding="utf-8"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="a.b">
  <uses-permission android:name="android.permission.INTERNET"/>
  <application/>
  <uses-permission android:name="com.example.permission.X"/>
</manifest>"#;
        let got = parse_permissions(xml);
        assert!(!got.fallback_used());
        let want: BTreeSet<String> = ["INTERNET", "com.example.permission.X"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(got.permissions, want);
    }

    #[test]
    fn broken_text_manifest_falls_back_to_token_scan() {
        let xml = b"<manifest><uses-permission android:name=\"android.permission.CAMERA\"";
        let got = parse_permissions(xml);
        assert!(got.fallback_used());
        assert_eq!(got.permissions.into_iter().collect::<Vec<_>>(), vec!["CAMERA"]);
    }

    #[test]
    fn zero_sized_chunk_is_rejected() {
        let mut data = vec![0u8; 16];
        data[0..2].copy_from_slice(&RES_XML_TYPE.to_le_bytes());
        data[2..4].copy_from_slice(&8u16.to_le_bytes());
        data[4..8].copy_from_slice(&16u32.to_le_bytes());
        // second chunk header claims size 0
        data[10..12].copy_from_slice(&8u16.to_le_bytes());
        let got = parse_permissions(&data);
        assert!(got.fallback_used());
        assert!(got.permissions.is_empty());
    }
}
