use std::io::{Cursor, Write};

use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipWriter};

use super::axml::ManifestBuilder;
use super::dex::build_dex;

/// In-memory APK assembled from named entries.
#[derive(Debug, Clone, Default)]
pub struct ApkBuilder {
    entries: Vec<(String, Vec<u8>, bool)>,
}

impl ApkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a deflated entry.
    pub fn entry(mut self, name: impl Into<String>, data: impl Into<Vec<u8>>) -> Self {
        self.entries.push((name.into(), data.into(), true));
        self
    }

    /// Adds an uncompressed entry.
    pub fn stored(mut self, name: impl Into<String>, data: impl Into<Vec<u8>>) -> Self {
        self.entries.push((name.into(), data.into(), false));
        self
    }

    pub fn build(&self) -> Vec<u8> {
        let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
        for (name, data, deflate) in &self.entries {
            let method = if *deflate {
                CompressionMethod::Deflated
            } else {
                CompressionMethod::Stored
            };
            let options = SimpleFileOptions::default()
                .compression_method(method)
                .last_modified_time(DateTime::default());
            zip.start_file(name.as_str(), options).expect("in-memory zip");
            zip.write_all(data).expect("in-memory zip");
        }
        zip.finish().expect("in-memory zip").into_inner()
    }
}

/// Keyword evidence to plant in a generated package.
#[derive(Debug, Clone, Default)]
pub struct PlantedApp {
    pub package: String,
    /// Written to the DEX string table.
    pub dex_strings: Vec<String>,
    /// Declared in the manifest (bare names or fully qualified).
    pub permissions: Vec<String>,
    /// Written one per line, as `sh -c <command>`, to a hidden asset.
    pub commands: Vec<String>,
}

/// Strings every generated DEX carries so that the table is never trivial.
const BOILERPLATE: [&str; 6] = [
    "<init>",
    "Landroid/app/Activity;",
    "Ljava/lang/Object;",
    "V",
    "onCreate",
    "setContentView",
];

impl PlantedApp {
    pub fn build(&self) -> Vec<u8> {
        let mut strings: Vec<String> = BOILERPLATE.iter().map(|s| s.to_string()).collect();
        strings.push(format!("L{};", self.package.replace('.', "/")));
        strings.extend(self.dex_strings.iter().cloned());
        let manifest = ManifestBuilder::new(self.package.as_str())
            .permissions(&self.permissions)
            .build();
        let mut apk = ApkBuilder::new()
            .entry("AndroidManifest.xml", manifest)
            .entry("classes.dex", build_dex(&strings))
            .stored("resources.arsc", vec![0u8; 16]);
        if !self.commands.is_empty() {
            let script: String = self.commands.iter().map(|c| format!("sh -c {c}\n")).collect();
            apk = apk.entry("assets/.cache/init.sh", script.into_bytes());
        }
        apk.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apk::{open_bytes, EvidenceBundle, DEFAULT_MIN_STRING_LEN};

    #[test]
    fn planted_evidence_is_recovered() {
        let app = PlantedApp {
            package: "com.example.one".into(),
            dex_strings: vec!["getDeviceId".into()],
            permissions: vec!["SEND_SMS".into()],
            commands: vec!["chmod 777 /data/x".into()],
        };
        let pkg = open_bytes("one.apk", &app.build()).unwrap();
        assert!(pkg.warnings.is_empty(), "{:?}", pkg.warnings);
        let ev = EvidenceBundle::collect(&pkg, DEFAULT_MIN_STRING_LEN);
        assert!(ev.dex_strings.contains("getDeviceId"));
        assert!(ev.dex_strings.contains("Lcom/example/one;"));
        assert!(ev.manifest_permissions.contains("SEND_SMS"));
        assert!(ev.raw_strings.iter().any(|s| s.contains("chmod 777")));
    }

    #[test]
    fn builds_are_deterministic() {
        let app = PlantedApp {
            package: "p.q".into(),
            ..Default::default()
        };
        assert_eq!(app.build(), app.build());
    }
}
