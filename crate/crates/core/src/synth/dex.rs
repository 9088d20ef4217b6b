//! Minimal DEX images: a header and a string table, nothing else.

const HEADER_LEN: usize = 0x70;

fn push_uleb128(out: &mut Vec<u8>, mut value: u32) {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

/// Modified UTF-8: NUL as `C0 80`, supplementary characters as two
/// three-byte surrogates.
pub fn encode_mutf8(s: &str) -> Vec<u8> {
    let mut out = Vec::with_capacity(s.len());
    for unit in s.encode_utf16() {
        match unit {
            0x01..=0x7f => out.push(unit as u8),
            0x00 | 0x80..=0x7ff => {
                out.push(0xc0 | (unit >> 6) as u8);
                out.push(0x80 | (unit & 0x3f) as u8);
            }
            _ => {
                out.push(0xe0 | (unit >> 12) as u8);
                out.push(0x80 | ((unit >> 6) & 0x3f) as u8);
                out.push(0x80 | (unit & 0x3f) as u8);
            }
        }
    }
    out
}

/// Builds a DEX file whose string table holds `strings` (sorted, deduplicated).
pub fn build_dex<S: AsRef<str>>(strings: &[S]) -> Vec<u8> {
    let mut sorted: Vec<&str> = strings.iter().map(AsRef::as_ref).collect();
    sorted.sort_unstable();
    sorted.dedup();

    let ids_off = HEADER_LEN;
    let data_off = ids_off + 4 * sorted.len();
    let mut ids = Vec::with_capacity(4 * sorted.len());
    let mut data = Vec::new();
    for s in &sorted {
        ids.extend_from_slice(&((data_off + data.len()) as u32).to_le_bytes());
        push_uleb128(&mut data, s.encode_utf16().count() as u32);
        data.extend_from_slice(&encode_mutf8(s));
        data.push(0);
    }

    let mut out = vec![0u8; HEADER_LEN];
    out[..8].copy_from_slice(b"dex\n035\0");
    let put = |out: &mut Vec<u8>, at: usize, v: u32| out[at..at + 4].copy_from_slice(&v.to_le_bytes());
    let file_size = (data_off + data.len()) as u32;
    put(&mut out, 0x20, file_size);
    put(&mut out, 0x24, HEADER_LEN as u32);
    put(&mut out, 0x28, 0x1234_5678);
    put(&mut out, 0x38, sorted.len() as u32);
    put(&mut out, 0x3C, if sorted.is_empty() { 0 } else { ids_off as u32 });
    put(&mut out, 0x68, data.len() as u32);
    put(&mut out, 0x6C, data_off as u32);
    out.extend_from_slice(&ids);
    out.extend_from_slice(&data);
    let checksum = adler2::adler32_slice(&out[12..]);
    put(&mut out, 0x08, checksum);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apk::dex::{decode_mutf8, read_strings};

    #[test]
    fn mutf8_round_trip() {
        for s in ["", "abc", "nul\0byte", "é", "\u{1F600}", "日本"] {
            let mut bytes = encode_mutf8(s);
            assert!(!bytes.contains(&0));
            bytes.push(0);
            let units = decode_mutf8(&bytes).unwrap();
            assert_eq!(String::from_utf16(&units).unwrap(), s);
        }
        assert_eq!(encode_mutf8("\0"), vec![0xc0, 0x80]);
    }

    #[test]
    fn table_round_trip() {
        let strings = ["getDeviceId", "Landroid/app/Activity;", "\u{1F600}", "a\0b", "getDeviceId"];
        let dex = build_dex(&strings);
        let got = read_strings(&dex).unwrap();
        assert!(got.skipped.is_empty());
        let want: std::collections::BTreeSet<String> = strings.iter().map(|s| s.to_string()).collect();
        assert_eq!(got.strings, want);
    }

    #[test]
    fn empty_table() {
        let dex = build_dex::<&str>(&[]);
        assert_eq!(dex.len(), HEADER_LEN);
        assert!(read_strings(&dex).unwrap().strings.is_empty());
    }
}
