//! Labelled APK corpora with a known keyword concept.
//!
//! An app is suspicious when it carries both keywords of at least one
//! concept pair: (`SEND_SMS` permission, `getSubscriberId` call) or
//! (`chown` command, `DexClassLoader` call). Benign apps carry at most
//! one concept keyword. Every other catalog keyword is planted as
//! label-independent noise.

use std::io;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::apk::PlantedApp;
use crate::features::{Category, Feature, FeatureCatalog, Label};

pub const CONCEPT_PAIRS: [[(Category, &str); 2]; 2] = [
    [(Category::Permission, "SEND_SMS"), (Category::Api, "getSubscriberId")],
    [(Category::Command, "chown"), (Category::Api, "DexClassLoader")],
];

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub apps: usize,
    pub seed: u64,
    /// Probability of planting each noise keyword.
    pub noise_rate: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            apps: 200,
            seed: 42,
            noise_rate: 0.08,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticApp {
    pub file_name: String,
    pub label: Label,
    pub app: PlantedApp,
}

fn concept_keywords() -> Vec<(Category, &'static str)> {
    CONCEPT_PAIRS.iter().flatten().copied().collect()
}

/// Text a keyword lands in once planted.
fn planted_text(f: &Feature) -> String {
    match f.category {
        Category::Command => format!("sh -c {}", f.keyword),
        _ => f.keyword.clone(),
    }
}

fn plant(app: &mut PlantedApp, category: Category, keyword: &str) {
    match category {
        Category::Api => app.dex_strings.push(keyword.to_string()),
        Category::Command => app.commands.push(keyword.to_string()),
        Category::Permission => app.permissions.push(keyword.to_string()),
    }
}

/// Noise keywords whose planted text cannot trip a concept feature.
fn noise_pool(catalog: &FeatureCatalog) -> Vec<Feature> {
    let concept = concept_keywords();
    catalog
        .features()
        .iter()
        .filter(|f| !concept.iter().any(|&(c, k)| c == f.category && k == f.keyword))
        .filter(|f| {
            let text = planted_text(f);
            concept
                .iter()
                .all(|&(c, k)| c == Category::Permission || !text.contains(k))
        })
        .cloned()
        .collect()
}

/// Generates the apps in memory. The catalog must contain the concept keywords.
pub fn keyword_corpus(spec: &CorpusSpec, catalog: &FeatureCatalog) -> Vec<SyntheticApp> {
    for (category, keyword) in concept_keywords() {
        assert!(
            catalog.features().iter().any(|f| f.category == category && f.keyword == keyword),
            "catalog lacks concept keyword {}:{keyword}",
            category.tag()
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = noise_pool(catalog);
    let mut labels: Vec<Label> = (0..spec.apps)
        .map(|i| if i % 2 == 0 { Label::Benign } else { Label::Suspicious })
        .collect();
    labels.shuffle(&mut rng);

    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let mut app = PlantedApp {
                package: format!("com.synth.pkg{i:04}"),
                ..Default::default()
            };
            match label {
                Label::Suspicious => {
                    let pairs: &[usize] = match rng.random_range(0..5) {
                        0 | 1 => &[0],
                        2 | 3 => &[1],
                        _ => &[0, 1],
                    };
                    for &p in pairs {
                        for (category, keyword) in CONCEPT_PAIRS[p] {
                            plant(&mut app, category, keyword);
                        }
                    }
                }
                Label::Benign => {
                    if rng.random_bool(0.6) {
                        let (category, keyword) = *concept_keywords().choose(&mut rng).expect("non-empty");
                        plant(&mut app, category, keyword);
                    }
                }
            }
            for f in &noise {
                if rng.random_bool(spec.noise_rate) {
                    plant(&mut app, f.category, &f.keyword);
                }
            }
            SyntheticApp {
                file_name: format!("app_{i:04}.apk"),
                label,
                app,
            }
        })
        .collect()
}

/// Writes the corpus as `<dir>/app_NNNN.apk` plus `<dir>/labels.csv`.
pub fn write_keyword_corpus(
    dir: impl AsRef<Path>,
    spec: &CorpusSpec,
    catalog: &FeatureCatalog,
) -> io::Result<Vec<SyntheticApp>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let apps = keyword_corpus(spec, catalog);
    let mut labels = String::from("sample_id,label\n");
    for a in &apps {
        std::fs::write(dir.join(&a.file_name), a.app.build())?;
        labels.push_str(&format!("{},{}\n", a.file_name, a.label));
    }
    std::fs::write(dir.join("labels.csv"), labels)?;
    Ok(apps)
}
