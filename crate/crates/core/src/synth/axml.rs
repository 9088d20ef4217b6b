//! Compiled (binary XML) `AndroidManifest.xml` writer.

use crate::apk::axml::PERMISSION_PREFIX;

const ANDROID_NS: &str = "http://schemas.android.com/apk/res/android";
const NO_INDEX: u32 = 0xFFFF_FFFF;
const TYPE_STRING: u8 = 0x03;

/// A manifest declaring a package and a list of permissions.
#[derive(Debug, Clone)]
pub struct ManifestBuilder {
    package: String,
    permissions: Vec<String>,
    utf8_pool: bool,
    element: String,
}

impl ManifestBuilder {
    pub fn new(package: impl Into<String>) -> Self {
        Self {
            package: package.into(),
            permissions: Vec::new(),
            utf8_pool: false,
            element: "uses-permission".into(),
        }
    }

    /// Adds a permission; bare names get the `android.permission.` prefix.
    pub fn permission(mut self, name: &str) -> Self {
        let full = if name.contains('.') {
            name.to_string()
        } else {
            format!("{PERMISSION_PREFIX}{name}")
        };
        self.permissions.push(full);
        self
    }

    pub fn permissions<S: AsRef<str>>(self, names: &[S]) -> Self {
        names.iter().fold(self, |b, n| b.permission(n.as_ref()))
    }

    /// Stores the string pool as UTF-8 instead of UTF-16.
    pub fn utf8_pool(mut self, yes: bool) -> Self {
        self.utf8_pool = yes;
        self
    }

    /// Element name used for the declarations (default `uses-permission`).
    pub fn element(mut self, name: &str) -> Self {
        self.element = name.into();
        self
    }

    pub fn build(&self) -> Vec<u8> {
        // fixed pool slots, then one per permission
        let mut strings: Vec<&str> = vec![
            "name",
            "package",
            ANDROID_NS,
            "android",
            "manifest",
            &self.element,
            &self.package,
        ];
        let first_perm = strings.len() as u32;
        strings.extend(self.permissions.iter().map(String::as_str));

        let mut body = string_pool(&strings, self.utf8_pool);
        // resource map: pool index 0 ("name") is android:name
        chunk(&mut body, 0x0180, 8, &0x0101_0003u32.to_le_bytes());
        namespace(&mut body, 0x0100, 3, 2);
        start_element(&mut body, NO_INDEX, 4, &[(NO_INDEX, 1, 6)]);
        for i in 0..self.permissions.len() as u32 {
            start_element(&mut body, NO_INDEX, 5, &[(2, 0, first_perm + i)]);
            end_element(&mut body, 5);
        }
        end_element(&mut body, 4);
        namespace(&mut body, 0x0101, 3, 2);

        let mut out = Vec::with_capacity(body.len() + 8);
        out.extend_from_slice(&0x0003u16.to_le_bytes());
        out.extend_from_slice(&8u16.to_le_bytes());
        out.extend_from_slice(&((body.len() + 8) as u32).to_le_bytes());
        out.extend_from_slice(&body);
        out
    }
}

/// Appends the common 8-byte chunk header followed by `payload`, which
/// starts with the rest of the chunk's header.
fn chunk(out: &mut Vec<u8>, kind: u16, header_size: u16, payload: &[u8]) {
    out.extend_from_slice(&kind.to_le_bytes());
    out.extend_from_slice(&header_size.to_le_bytes());
    out.extend_from_slice(&((payload.len() + 8) as u32).to_le_bytes());
    out.extend_from_slice(payload);
}

fn u32s(values: &[u32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn string_pool(strings: &[&str], utf8: bool) -> Vec<u8> {
    let mut data = Vec::new();
    let mut offsets = Vec::with_capacity(strings.len());
    for s in strings {
        offsets.push(data.len() as u32);
        if utf8 {
            let chars = s.chars().count();
            for len in [chars, s.len()] {
                if len < 0x80 {
                    data.push(len as u8);
                } else {
                    data.push(0x80 | (len >> 8) as u8);
                    data.push(len as u8);
                }
            }
            data.extend_from_slice(s.as_bytes());
            data.push(0);
        } else {
            let units: Vec<u16> = s.encode_utf16().collect();
            if units.len() < 0x8000 {
                data.extend_from_slice(&(units.len() as u16).to_le_bytes());
            } else {
                data.extend_from_slice(&(0x8000 | (units.len() >> 16) as u16).to_le_bytes());
                data.extend_from_slice(&(units.len() as u16).to_le_bytes());
            }
            data.extend(units.iter().flat_map(|u| u.to_le_bytes()));
            data.extend_from_slice(&[0, 0]);
        }
    }
    while data.len() % 4 != 0 {
        data.push(0);
    }
    let header_size = 28u32;
    let strings_start = header_size + 4 * strings.len() as u32;
    let flags = if utf8 { 1 << 8 } else { 0 };
    let mut payload = u32s(&[strings.len() as u32, 0, flags, strings_start, 0]);
    payload.extend(u32s(&offsets));
    payload.extend(data);
    let mut out = Vec::new();
    chunk(&mut out, 0x0001, header_size as u16, &payload);
    out
}

fn namespace(out: &mut Vec<u8>, kind: u16, prefix: u32, uri: u32) {
    chunk(out, kind, 16, &u32s(&[1, NO_INDEX, prefix, uri]));
}

/// `attrs` are `(namespace, name, string value)` pool indices.
fn start_element(out: &mut Vec<u8>, ns: u32, name: u32, attrs: &[(u32, u32, u32)]) {
    let mut payload = u32s(&[1, NO_INDEX, ns, name]);
    for v in [20u16, 20, attrs.len() as u16, 0, 0, 0] {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    for &(ans, aname, value) in attrs {
        payload.extend(u32s(&[ans, aname, value]));
        payload.extend_from_slice(&8u16.to_le_bytes());
        payload.push(0);
        payload.push(TYPE_STRING);
        payload.extend_from_slice(&value.to_le_bytes());
    }
    chunk(out, 0x0102, 16, &payload);
}

fn end_element(out: &mut Vec<u8>, name: u32) {
    chunk(out, 0x0103, 16, &u32s(&[1, NO_INDEX, NO_INDEX, name]));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apk::axml::parse_permissions;

    #[test]
    fn permissions_round_trip() {
        for utf8 in [false, true] {
            let bytes = ManifestBuilder::new("com.example.demo")
                .permissions(&["SEND_SMS", "READ_CONTACTS", "com.vendor.permission.X"])
                .utf8_pool(utf8)
                .build();
            let got = parse_permissions(&bytes);
            assert!(!got.fallback_used(), "{:?}", got.fallback);
            let want: Vec<&str> = vec!["READ_CONTACTS", "SEND_SMS", "com.vendor.permission.X"];
            assert_eq!(got.permissions.iter().map(String::as_str).collect::<Vec<_>>(), want);
        }
    }

    #[test]
    fn sdk23_element() {
        let bytes = ManifestBuilder::new("p").element("uses-permission-sdk-23").permission("CAMERA").build();
        assert!(parse_permissions(&bytes).permissions.contains("CAMERA"));
    }

    #[test]
    fn no_permissions() {
        let got = parse_permissions(&ManifestBuilder::new("p").build());
        assert!(got.permissions.is_empty() && !got.fallback_used());
    }
}
