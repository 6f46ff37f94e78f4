//! Image-QA dataset manifests: loading, validation, image-level train/test
//! splitting, and seeded contamination injection.
//!
//! The manifest file format is JSON Lines: the first line is a header object
//! `{"schema_version":1,"root":"<dir>","provenance":{...}}`, every following
//! line one sample `{"id","image","question","answer","round","genre"}`.
//! Paths use forward slashes relative to `root`; encoding is UTF-8, no BOM.
//!
//! Split and contamination selection are driven by [`crate::hashing::hash64`]
//! keyed permutations instead of a stateful RNG, so they are pure functions
//! of (inputs, seed) and byte-identical across platforms and call orders.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::hashing::hash64;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read manifest {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: malformed manifest line: {source}")]
    MalformedLine { path: PathBuf, line: usize, source: serde_json::Error },
    #[error("manifest {path} is missing its header line")]
    MissingHeader { path: PathBuf },
    #[error("{path}: unsupported manifest schema_version {found} (expected {expected})")]
    SchemaVersion { path: PathBuf, found: u32, expected: u32 },
    #[error("duplicate sample id {id:?} (lines {first_line} and {second_line})")]
    DuplicateId { id: String, first_line: usize, second_line: usize },
    #[error("manifest {path} contains no samples")]
    EmptyManifest { path: PathBuf },
    #[error("sample {id:?}: {field} is empty after normalization")]
    EmptyField { id: String, field: &'static str },
    #[error("sample {id:?}: round index must be >= 1, got {round}")]
    BadRoundIndex { id: String, round: i64 },
    #[error("cannot split an empty manifest")]
    SplitEmptyManifest,
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    BadTrainFraction(f64),
    #[error("replacement fraction must lie in (0, 1], got {0}")]
    BadReplacementFraction(f64),
    #[error(
        "split with fraction {fraction} leaves {side} side empty ({n_images} images total)"
    )]
    DegenerateSplit { fraction: f64, side: &'static str, n_images: usize },
    #[error(
        "replacement count k={k} out of range: need 1 <= k <= min(|train|={train}, |test|={test})"
    )]
    BadReplacementCount { k: usize, train: usize, test: usize },
    #[error("failed to write manifest {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

/// One image-question-answer record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QASample {
    pub id: String,
    #[serde(rename = "image")]
    pub image_ref: String,
    pub question: String,
    pub answer: String,
    #[serde(rename = "round")]
    pub round_index: u32,
    pub genre: Option<String>,
}

/// Optional provenance block recorded in a manifest header by the split and
/// contamination operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub operation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replacement_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub injected_ids: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evicted_ids: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestHeader {
    schema_version: u32,
    root: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

/// A versioned, ordered collection of QA samples. Sample order is the
/// canonical iteration order and is stable across loads.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    root: String,
    samples: Vec<QASample>,
    schema_version: u32,
    provenance: Option<Provenance>,
}

impl DatasetManifest {
    /// Build a manifest in memory, enforcing id uniqueness and per-sample
    /// invariants. `root` is the directory image refs resolve against.
    pub fn new(root: impl Into<String>, samples: Vec<QASample>) -> Result<Self, DatasetError> {
        validate_samples(&samples)?;
        Ok(Self {
            root: root.into(),
            samples,
            schema_version: MANIFEST_SCHEMA_VERSION,
            provenance: None,
        })
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn samples(&self) -> &[QASample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Distinct image refs in first-appearance order.
    pub fn image_refs(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.samples
            .iter()
            .filter(|s| seen.insert(s.image_ref.as_str()))
            .map(|s| s.image_ref.as_str())
            .collect()
    }

    /// Resolve an image ref against the manifest root.
    pub fn image_path(&self, sample: &QASample) -> PathBuf {
        Path::new(&self.root).join(&sample.image_ref)
    }

    /// Content digest of the manifest's canonical serialization, used to
    /// identify the dataset in reports without embedding filesystem paths.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for sample in &self.samples {
            hasher.update(serde_json::to_vec(sample).expect("sample serializes"));
            hasher.update([0x0a]);
        }
        hex_digest(&hasher.finalize())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn validate_samples(samples: &[QASample]) -> Result<(), DatasetError> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (idx, sample) in samples.iter().enumerate() {
        if let Some(&first) = seen.get(sample.id.as_str()) {
            return Err(DatasetError::DuplicateId {
                id: sample.id.clone(),
                first_line: first + 2,
                second_line: idx + 2,
            });
        }
        seen.insert(&sample.id, idx);
        validate_sample(sample)?;
    }
    Ok(())
}

fn validate_sample(sample: &QASample) -> Result<(), DatasetError> {
    let empty_after_nfc = |s: &str| s.nfc().collect::<String>().trim().is_empty();
    if empty_after_nfc(&sample.question) {
        return Err(DatasetError::EmptyField { id: sample.id.clone(), field: "question" });
    }
    if empty_after_nfc(&sample.answer) {
        return Err(DatasetError::EmptyField { id: sample.id.clone(), field: "answer" });
    }
    if sample.round_index < 1 {
        return Err(DatasetError::BadRoundIndex {
            id: sample.id.clone(),
            round: i64::from(sample.round_index),
        });
    }
    Ok(())
}

/// Load a manifest. Image files are not decoded here; refs stay lazy.
///
/// A relative header root is resolved against the manifest file's directory,
/// so shipped fixtures stay relocatable.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest, DatasetError> {
    let path = path.as_ref();
    let content = fs::read_to_string(path)
        .map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    let mut lines = content.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());

    let (_, header_line) = lines
        .next()
        .ok_or_else(|| DatasetError::MissingHeader { path: path.to_path_buf() })?;
    let header: ManifestHeader = serde_json::from_str(header_line).map_err(|source| {
        DatasetError::MalformedLine { path: path.to_path_buf(), line: 1, source }
    })?;
    if header.schema_version != MANIFEST_SCHEMA_VERSION {
        return Err(DatasetError::SchemaVersion {
            path: path.to_path_buf(),
            found: header.schema_version,
            expected: MANIFEST_SCHEMA_VERSION,
        });
    }

    let mut samples = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let sample: QASample = serde_json::from_str(line).map_err(|source| {
            DatasetError::MalformedLine { path: path.to_path_buf(), line: line_no, source }
        })?;
        if let Some(&first) = seen.get(&sample.id) {
            return Err(DatasetError::DuplicateId {
                id: sample.id,
                first_line: first,
                second_line: line_no,
            });
        }
        seen.insert(sample.id.clone(), line_no);
        validate_sample(&sample)?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(DatasetError::EmptyManifest { path: path.to_path_buf() });
    }

    let root = {
        let header_root = Path::new(&header.root);
        if header_root.is_absolute() {
            header.root.clone()
        } else {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            path_to_slash(&base.join(header_root))
        }
    };

    Ok(DatasetManifest {
        root,
        samples,
        schema_version: header.schema_version,
        provenance: header.provenance,
    })
}

fn path_to_slash(path: &Path) -> String {
    path.to_string_lossy().replace('\\', "/")
}

/// Write a manifest in the canonical JSONL form: header line plus one sample
/// per line, each terminated by `\n`. Byte-deterministic for equal inputs.
pub fn save_manifest(
    manifest: &DatasetManifest,
    path: impl AsRef<Path>,
) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let header = ManifestHeader {
        schema_version: manifest.schema_version,
        root: manifest.root.clone(),
        provenance: manifest.provenance.clone(),
    };
    let mut out = Vec::new();
    let write_err = |source: std::io::Error| DatasetError::Write { path: path.to_path_buf(), source };
    writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes"))
        .map_err(write_err)?;
    for sample in &manifest.samples {
        writeln!(out, "{}", serde_json::to_string(sample).expect("sample serializes"))
            .map_err(write_err)?;
    }
    fs::write(path, out).map_err(|source| DatasetError::Write { path: path.to_path_buf(), source })
}

/// Parameters for the image-level train/test split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self, DatasetError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(DatasetError::BadTrainFraction(train_fraction));
        }
        Ok(Self { train_fraction, seed })
    }
}

/// Parameters for contamination injection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub replacement_fraction: f64,
    pub seed: u64,
}

impl ContaminationSpec {
    pub fn new(replacement_fraction: f64, seed: u64) -> Result<Self, DatasetError> {
        if !(replacement_fraction > 0.0 && replacement_fraction <= 1.0) {
            return Err(DatasetError::BadReplacementFraction(replacement_fraction));
        }
        Ok(Self { replacement_fraction, seed })
    }
}

/// round-half-away-from-zero, pinned so counts are platform-independent.
pub fn round_half_away(x: f64) -> i64 {
    if x >= 0.0 {
        (x + 0.5).floor() as i64
    } else {
        (x - 0.5).ceil() as i64
    }
}

/// Split a manifest into train and test partitions by image: all QA rounds
/// of one image land on the same side, so no image content leaks across the
/// split. Deterministic given the seed.
pub fn split(
    manifest: &DatasetManifest,
    spec: &SplitSpec,
) -> Result<(DatasetManifest, DatasetManifest), DatasetError> {
    if manifest.is_empty() {
        return Err(DatasetError::SplitEmptyManifest);
    }
    SplitSpec::new(spec.train_fraction, spec.seed)?;

    let images = manifest.image_refs();
    let n_images = images.len();
    let n_train = round_half_away(spec.train_fraction * n_images as f64) as usize;
    if n_train == 0 {
        return Err(DatasetError::DegenerateSplit {
            fraction: spec.train_fraction,
            side: "train",
            n_images,
        });
    }
    if n_train >= n_images {
        return Err(DatasetError::DegenerateSplit {
            fraction: spec.train_fraction,
            side: "test",
            n_images,
        });
    }

    // Keyed-hash permutation: rank images by hash64(seed, "split", ref) and
    // take the first n_train as the training side.
    let seed = spec.seed.to_string();
    let mut ranked: Vec<&str> = images.clone();
    ranked.sort_by_key(|r| (hash64(&[&seed, "split", r]), r.to_string()));
    let train_images: HashSet<&str> = ranked[..n_train].iter().copied().collect();

    let partition = |keep: bool, op: &str| -> DatasetManifest {
        let samples: Vec<QASample> = manifest
            .samples
            .iter()
            .filter(|s| train_images.contains(s.image_ref.as_str()) == keep)
            .cloned()
            .collect();
        DatasetManifest {
            root: manifest.root.clone(),
            samples,
            schema_version: manifest.schema_version,
            provenance: Some(Provenance {
                operation: op.to_string(),
                seed: Some(spec.seed),
                train_fraction: Some(spec.train_fraction),
                ..Provenance::default()
            }),
        }
    };

    Ok((partition(true, "split-train"), partition(false, "split-test")))
}

/// Replace `k = round(replacement_fraction * |test|)` seeded-uniformly chosen
/// training samples with seeded-uniformly chosen test samples, preserving the
/// training-set size. The injected and evicted ids are recorded in the result
/// manifest's provenance header.
pub fn inject_contamination(
    train: &DatasetManifest,
    test: &DatasetManifest,
    spec: &ContaminationSpec,
) -> Result<DatasetManifest, DatasetError> {
    ContaminationSpec::new(spec.replacement_fraction, spec.seed)?;
    let k = round_half_away(spec.replacement_fraction * test.len() as f64) as usize;
    if k < 1 || k > train.len().min(test.len()) {
        return Err(DatasetError::BadReplacementCount { k, train: train.len(), test: test.len() });
    }

    let seed = spec.seed.to_string();
    let rank = |samples: &[QASample], label: &str| -> Vec<String> {
        let mut ids: Vec<&String> = samples.iter().map(|s| &s.id).collect();
        ids.sort_by_key(|id| (hash64(&[&seed, label, id]), (*id).clone()));
        ids.into_iter().take(k).cloned().collect()
    };
    let injected_ids = rank(&test.samples, "inject");
    let evicted_ids = rank(&train.samples, "evict");

    let injected_set: HashSet<&String> = injected_ids.iter().collect();
    let evicted_set: HashSet<&String> = evicted_ids.iter().collect();
    let injected_samples: Vec<&QASample> = test
        .samples
        .iter()
        .filter(|s| injected_set.contains(&s.id))
        .collect();

    // Evicted slots, in training order, receive injected samples in test order.
    let mut replacement = injected_samples.into_iter();
    let samples: Vec<QASample> = train
        .samples
        .iter()
        .map(|s| {
            if evicted_set.contains(&s.id) {
                replacement.next().expect("one injected sample per evicted slot").clone()
            } else {
                s.clone()
            }
        })
        .collect();
    validate_samples(&samples)?;

    Ok(DatasetManifest {
        root: train.root.clone(),
        samples,
        schema_version: train.schema_version,
        provenance: Some(Provenance {
            operation: "contaminate".to_string(),
            seed: Some(spec.seed),
            replacement_fraction: Some(spec.replacement_fraction),
            injected_ids: Some(injected_ids),
            evicted_ids: Some(evicted_ids),
            ..Provenance::default()
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample(id: &str, image: &str) -> QASample {
        QASample {
            id: id.to_string(),
            image_ref: image.to_string(),
            question: format!("what is in {image}?"),
            answer: format!("the {id} answer text"),
            round_index: 1,
            genre: None,
        }
    }

    fn manifest_with_images(n_images: usize) -> DatasetManifest {
        let samples = (0..n_images)
            .map(|i| sample(&format!("q{i}"), &format!("img{i}.png")))
            .collect();
        DatasetManifest::new("images", samples).unwrap()
    }

    #[test]
    fn split_ninety_ten_on_ten_images() {
        let manifest = manifest_with_images(10);
        let spec = SplitSpec::new(0.9, 7).unwrap();
        let (train, test) = split(&manifest, &spec).unwrap();
        assert_eq!(train.image_refs().len(), 9);
        assert_eq!(test.image_refs().len(), 1);
    }

    #[test]
    fn split_is_deterministic() {
        let manifest = manifest_with_images(12);
        let spec = SplitSpec::new(0.75, 99).unwrap();
        let (t1, s1) = split(&manifest, &spec).unwrap();
        let (t2, s2) = split(&manifest, &spec).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn split_is_a_partition_with_no_image_leakage() {
        let mut samples = Vec::new();
        for i in 0..8 {
            for r in 1..=3u32 {
                let mut s = sample(&format!("q{i}-{r}"), &format!("img{i}.png"));
                s.round_index = r;
                samples.push(s);
            }
        }
        let manifest = DatasetManifest::new("images", samples).unwrap();
        let (train, test) = split(&manifest, &SplitSpec::new(0.5, 3).unwrap()).unwrap();

        let mut all_ids: Vec<&str> = train
            .samples()
            .iter()
            .chain(test.samples())
            .map(|s| s.id.as_str())
            .collect();
        all_ids.sort_unstable();
        let mut expected: Vec<&str> = manifest.samples().iter().map(|s| s.id.as_str()).collect();
        expected.sort_unstable();
        assert_eq!(all_ids, expected);

        let train_imgs: HashSet<_> = train.image_refs().into_iter().collect();
        let test_imgs: HashSet<_> = test.image_refs().into_iter().collect();
        assert!(train_imgs.is_disjoint(&test_imgs));
    }

    #[test]
    fn split_rejects_degenerate_fractions() {
        let manifest = manifest_with_images(3);
        assert!(SplitSpec::new(1.0, 1).is_err());
        assert!(SplitSpec::new(0.0, 1).is_err());
        // 0.01 * 3 rounds to 0 train images.
        let spec = SplitSpec { train_fraction: 0.01, seed: 1 };
        assert!(matches!(split(&manifest, &spec), Err(DatasetError::DegenerateSplit { .. })));
    }

    #[test]
    fn contamination_preserves_train_size_and_full_replacement_covers_test() {
        let manifest = manifest_with_images(10);
        let (train, test) = split(&manifest, &SplitSpec::new(0.9, 7).unwrap()).unwrap();
        let spec = ContaminationSpec::new(1.0, 11).unwrap();
        let contaminated = inject_contamination(&train, &test, &spec).unwrap();

        assert_eq!(contaminated.len(), train.len());
        let ids: HashSet<&str> = contaminated.samples().iter().map(|s| s.id.as_str()).collect();
        for t in test.samples() {
            assert!(ids.contains(t.id.as_str()), "test sample {} not injected", t.id);
        }
        let prov = contaminated.provenance().unwrap();
        assert_eq!(prov.operation, "contaminate");
        assert_eq!(prov.injected_ids.as_ref().unwrap().len(), test.len());
    }

    #[test]
    fn contamination_rejects_out_of_range_k() {
        let manifest = manifest_with_images(4);
        let (train, test) = split(&manifest, &SplitSpec::new(0.75, 7).unwrap()).unwrap();
        // |test| = 1, fraction 0.1 -> k = 0.
        let spec = ContaminationSpec { replacement_fraction: 0.1, seed: 1 };
        assert!(matches!(
            inject_contamination(&train, &test, &spec),
            Err(DatasetError::BadReplacementCount { .. })
        ));
    }

    #[test]
    fn manifest_rejects_duplicate_ids() {
        let samples = vec![sample("q1", "a.png"), sample("q1", "b.png")];
        assert!(matches!(
            DatasetManifest::new("images", samples),
            Err(DatasetError::DuplicateId { .. })
        ));
    }

    #[test]
    fn round_half_away_from_zero() {
        assert_eq!(round_half_away(0.5), 1);
        assert_eq!(round_half_away(1.5), 2);
        assert_eq!(round_half_away(2.4), 2);
        assert_eq!(round_half_away(-0.5), -1);
        assert_eq!(round_half_away(9.0), 9);
    }
}
