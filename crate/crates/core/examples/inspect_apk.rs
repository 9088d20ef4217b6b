//! Prints the evidence extracted from one APK.
//!
//! ```text
//! cargo run --example inspect_apk -- path/to/app.apk
//! ```
//!
//! Without an argument a small synthetic package is inspected instead.

use droidscan::apk::{open_bytes, open_package, EvidenceBundle, DEFAULT_MIN_STRING_LEN};
use droidscan::synth::PlantedApp;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pkg = match std::env::args().nth(1) {
        Some(path) => open_package(path)?,
        None => {
            let app = PlantedApp {
                package: "com.example.flashlight".into(),
                dex_strings: vec!["Landroid/telephony/SmsManager;->sendTextMessage".into()],
                permissions: vec!["SEND_SMS".into(), "CAMERA".into()],
                commands: vec!["chmod 755 /data/data/com.example.flashlight/bin".into()],
            };
            open_bytes("synthetic.apk", &app.build())?
        }
    };
    println!("{} (sha256 {})", pkg.source_path, pkg.sha256);
    for e in &pkg.entries {
        println!("  {:>8}  {}", e.payload.len(), e.path);
    }

    let ev = EvidenceBundle::collect(&pkg, DEFAULT_MIN_STRING_LEN);
    println!("permissions ({}{}):", ev.manifest_permissions.len(), if ev.fallback_used { ", token scan" } else { "" });
    for p in &ev.manifest_permissions {
        println!("  {p}");
    }
    println!("dex strings: {}", ev.dex_strings.len());
    for s in ev.dex_strings.iter().take(20) {
        println!("  {s:?}");
    }
    println!("raw strings: {}", ev.raw_strings.len());
    for w in &ev.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
