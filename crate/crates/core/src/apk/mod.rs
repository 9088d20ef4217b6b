//! APK ingestion: open the archive and harvest raw evidence.
//!
//! Three channels feed feature detection:
//! - strings from every DEX string table in the package,
//! - permissions declared in `AndroidManifest.xml`,
//! - entry paths plus printable runs from every entry payload.

pub mod axml;
pub mod dex;
mod zip;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use log::warn;
use sha2::{Digest, Sha256};

pub use axml::DeclaredPermissions;

pub const MANIFEST_PATH: &str = "AndroidManifest.xml";
pub const DEFAULT_MIN_STRING_LEN: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: not an archive: {reason}")]
    NotAnArchive { path: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no {MANIFEST_PATH} entry")]
    NoManifest,
}

/// Non-fatal problems found while reading a package.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestWarning {
    EntryCorrupt { entry: String, reason: String },
    DuplicateEntry(String),
    MalformedDex { entry: String, reason: String },
    UndecodableString { entry: String, index: u32, reason: &'static str },
    MalformedManifest(String),
    NoManifest,
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EntryCorrupt { entry, reason } => write!(f, "entry {entry} corrupt: {reason}"),
            Self::DuplicateEntry(entry) => write!(f, "duplicate entry {entry} ignored"),
            Self::MalformedDex { entry, reason } => write!(f, "malformed dex {entry}: {reason}"),
            Self::UndecodableString {
                entry,
                index,
                reason,
            } => write!(f, "{entry}: string #{index} skipped: {reason}"),
            Self::MalformedManifest(reason) => {
                write!(f, "malformed manifest, token scan used: {reason}")
            }
            Self::NoManifest => write!(f, "no {MANIFEST_PATH}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub path: String,
    pub payload: Vec<u8>,
}

/// Decompressed contents of an APK.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApkPackage {
    pub source_path: String,
    /// Hex SHA-256 of the archive bytes as read.
    pub sha256: String,
    /// In central-directory order; paths are unique.
    pub entries: Vec<Entry>,
    pub warnings: Vec<IngestWarning>,
}

impl ApkPackage {
    pub fn entry(&self, path: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.path == path)
    }
}

/// Reads and unpacks an APK from disk.
pub fn open_package(path: impl AsRef<Path>) -> Result<ApkPackage, IngestError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    open_bytes(&path.display().to_string(), &bytes)
}

/// Unpacks an in-memory APK. Corrupt entries are skipped and reported as
/// warnings; only a missing or unreadable central directory is fatal.
pub fn open_bytes(source_path: &str, bytes: &[u8]) -> Result<ApkPackage, IngestError> {
    let directory =
        zip::read_central_directory(bytes).map_err(|e| IngestError::NotAnArchive {
            path: source_path.to_string(),
            reason: e.to_string(),
        })?;

    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for record in directory.iter().filter(|r| !r.is_dir()) {
        if !seen.insert(record.name.clone()) {
            warnings.push(IngestWarning::DuplicateEntry(record.name.clone()));
            continue;
        }
        match zip::read_entry(bytes, record) {
            Ok(payload) => entries.push(Entry {
                path: record.name.clone(),
                payload,
            }),
            Err(e) => {
                warn!("{source_path}: entry {} corrupt: {e}", record.name);
                warnings.push(IngestWarning::EntryCorrupt {
                    entry: record.name.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(ApkPackage {
        source_path: source_path.to_string(),
        sha256: hex::encode(Sha256::digest(bytes)),
        entries,
        warnings,
    })
}

/// Union of all DEX string tables, with per-entry problems.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct DexHarvest {
    pub strings: BTreeSet<String>,
    pub warnings: Vec<IngestWarning>,
}

/// Mines every entry that starts with the DEX magic (multidex included).
pub fn extract_dex_strings(pkg: &ApkPackage) -> DexHarvest {
    let mut harvest = DexHarvest::default();
    for entry in pkg.entries.iter().filter(|e| dex::has_dex_magic(&e.payload)) {
        match dex::read_strings(&entry.payload) {
            Ok(table) => {
                harvest.strings.extend(table.strings);
                harvest
                    .warnings
                    .extend(table.skipped.into_iter().map(|s| IngestWarning::UndecodableString {
                        entry: entry.path.clone(),
                        index: s.index,
                        reason: s.reason,
                    }));
            }
            Err(e) => harvest.warnings.push(IngestWarning::MalformedDex {
                entry: entry.path.clone(),
                reason: e.to_string(),
            }),
        }
    }
    harvest
}

/// Permissions requested by the package manifest.
pub fn extract_manifest_permissions(pkg: &ApkPackage) -> Result<DeclaredPermissions, IngestError> {
    let manifest = pkg.entry(MANIFEST_PATH).ok_or(IngestError::NoManifest)?;
    Ok(axml::parse_permissions(&manifest.payload))
}

fn printable_runs(payload: &[u8], min_len: usize, out: &mut BTreeSet<String>) {
    for run in payload.split(|b| !(0x20..=0x7e).contains(b)) {
        if run.len() >= min_len {
            // printable ASCII is valid UTF-8
            out.insert(String::from_utf8_lossy(run).into_owned());
        }
    }
}

/// Entry paths plus every maximal printable-ASCII run of at least
/// `min_len` bytes (values below 1 are treated as 1).
pub fn harvest_raw_strings(pkg: &ApkPackage, min_len: usize) -> BTreeSet<String> {
    let min_len = min_len.max(1);
    let mut out = BTreeSet::new();
    for entry in &pkg.entries {
        out.insert(entry.path.clone());
        printable_runs(&entry.payload, min_len, &mut out);
    }
    out
}

/// Everything feature detection looks at for one package.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct EvidenceBundle {
    pub dex_strings: BTreeSet<String>,
    pub manifest_permissions: BTreeSet<String>,
    pub raw_strings: BTreeSet<String>,
    pub fallback_used: bool,
    pub warnings: Vec<IngestWarning>,
}

impl EvidenceBundle {
    pub fn collect(pkg: &ApkPackage, min_len: usize) -> Self {
        let dex = extract_dex_strings(pkg);
        let mut warnings = pkg.warnings.clone();
        warnings.extend(dex.warnings);

        let (manifest_permissions, fallback_used) = match extract_manifest_permissions(pkg) {
            Ok(declared) => {
                let fallback_used = declared.fallback_used();
                if let Some(err) = declared.fallback {
                    warnings.push(IngestWarning::MalformedManifest(err.to_string()));
                }
                (declared.permissions, fallback_used)
            }
            Err(_) => {
                warnings.push(IngestWarning::NoManifest);
                (BTreeSet::new(), false)
            }
        };

        Self {
            dex_strings: dex.strings,
            manifest_permissions,
            raw_strings: harvest_raw_strings(pkg, min_len),
            fallback_used,
            warnings,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn package(entries: &[(&str, &[u8])]) -> ApkPackage {
        ApkPackage {
            source_path: "mem".into(),
            sha256: String::new(),
            entries: entries
                .iter()
                .map(|(p, b)| Entry {
                    path: p.to_string(),
                    payload: b.to_vec(),
                })
                .collect(),
            warnings: vec![],
        }
    }

    #[test]
    fn raw_strings_find_hidden_commands() {
        let pkg = package(&[("assets/.hidden", b"\x00\x01chmod 755 /data\xff\x00ab")]);
        let got = harvest_raw_strings(&pkg, 4);
        assert!(got.contains("chmod 755 /data"));
        assert!(got.contains("assets/.hidden"));
        assert!(!got.contains("ab"));
    }

    #[test]
    fn raw_strings_binary_only_yields_paths() {
        let pkg = package(&[("lib/x.so", &[0u8, 1, 2, 0xff, b'a', b'b', 0x80])]);
        let got = harvest_raw_strings(&pkg, 4);
        assert_eq!(got.into_iter().collect::<Vec<_>>(), vec!["lib/x.so"]);
    }

    #[test]
    fn raw_strings_min_len_one() {
        let pkg = package(&[("x", b"a")]);
        assert!(harvest_raw_strings(&pkg, 1).contains("a"));
        assert!(harvest_raw_strings(&pkg, 0).contains("a"));
    }

    #[test]
    fn no_dex_means_no_strings() {
        let pkg = package(&[("res/raw/a.txt", b"getDeviceId")]);
        let got = extract_dex_strings(&pkg);
        assert!(got.strings.is_empty());
        assert!(got.warnings.is_empty());
    }

    #[test]
    fn missing_manifest() {
        let pkg = package(&[("classes.dex", b"")]);
        assert!(matches!(
            extract_manifest_permissions(&pkg),
            Err(IngestError::NoManifest)
        ));
        let ev = EvidenceBundle::collect(&pkg, 4);
        assert!(ev.warnings.contains(&IngestWarning::NoManifest));
    }
}
