//! TOML harness configuration for `augeval evaluate`.
//!
//! Relative paths are resolved against the config file's directory, so the
//! shipped demo config works from any working directory. Every knob has an
//! explicit value after defaulting and is echoed into the run document.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use augeval_core::imageops::TransformSet;
use augeval_core::metrics::TokenizerConfig;
use augeval_core::models::ModelEndpoint;
use augeval_core::runner::FailurePolicy;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    pub dataset: DatasetSection,
    pub run: RunSection,
    #[serde(default)]
    pub tokenizer: TokenizerConfig,
    pub endpoints: Vec<ModelEndpoint>,
    #[serde(default)]
    pub report: Option<ReportSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub manifest: PathBuf,
}

fn default_parallelism() -> usize {
    4
}

fn default_transforms() -> Vec<String> {
    TransformSet::standard().ids()
}

fn default_formats() -> String {
    "all".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub cache_dir: PathBuf,
    pub out_dir: PathBuf,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub failure_policy: FailurePolicy,
    #[serde(default = "default_transforms")]
    pub transforms: Vec<String>,
    #[serde(default = "default_formats")]
    pub formats: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    pub clean: String,
    pub contaminated: String,
}

impl HarnessConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: HarnessConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.dataset.manifest = absolutize(base, &config.dataset.manifest);
        config.run.cache_dir = absolutize(base, &config.run.cache_dir);
        config.run.out_dir = absolutize(base, &config.run.out_dir);
        Ok(config)
    }
}

fn absolutize(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use augeval_core::models::EndpointKind;

    #[test]
    fn demo_style_config_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        std::fs::write(
            &path,
            r#"
[dataset]
manifest = "data/manifest.jsonl"

[run]
cache_dir = "build/cache"
out_dir = "build/report"
parallelism = 2
failure_policy = "skip"
transforms = ["id", "fliph", "bgr"]

[report]
clean = "clean"
contaminated = "conta"

[[endpoints]]
id = "clean"
kind = "stub"
memorized_fraction = 0.0
mem_seed = 7
base_keep_fraction = 0.5

[[endpoints]]
id = "conta"
kind = "stub"
memorized_fraction = 1.0
mem_seed = 7
base_keep_fraction = 0.5

[endpoints.retention]
fliph = 0.6
bgr = 0.4

[[endpoints]]
id = "vlm"
kind = "remote_http"
base_url = "https://models.example/v1"
model_name = "test-vlm"
api_key_env_var = "MODEL_KEY"
"#,
        )
        .unwrap();
        let config = HarnessConfig::load(&path).unwrap();
        assert!(config.dataset.manifest.ends_with("data/manifest.jsonl"));
        assert!(config.dataset.manifest.is_absolute() || config.dataset.manifest.starts_with(dir.path()));
        assert_eq!(config.run.parallelism, 2);
        assert_eq!(config.run.failure_policy, FailurePolicy::Skip);
        assert_eq!(config.endpoints.len(), 3);
        match &config.endpoints[1].kind {
            EndpointKind::Stub(stub) => {
                assert_eq!(stub.retention["fliph"], 0.6);
            }
            other => panic!("expected stub endpoint, got {other:?}"),
        }
        match &config.endpoints[2].kind {
            EndpointKind::RemoteHttp(remote) => {
                assert_eq!(remote.api_key_env_var, "MODEL_KEY");
                assert_eq!(remote.temperature, 0.0);
            }
            other => panic!("expected remote endpoint, got {other:?}"),
        }
    }

    #[test]
    fn defaults_fill_every_knob() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        std::fs::write(
            &path,
            r#"
[dataset]
manifest = "m.jsonl"

[run]
cache_dir = "cache"
out_dir = "out"

[[endpoints]]
id = "clean"
kind = "stub"
memorized_fraction = 0.0
mem_seed = 1
base_keep_fraction = 0.5
"#,
        )
        .unwrap();
        let config = HarnessConfig::load(&path).unwrap();
        assert_eq!(config.run.parallelism, 4);
        assert_eq!(config.run.failure_policy, FailurePolicy::Strict);
        assert_eq!(config.run.transforms.len(), 10);
        assert_eq!(config.run.formats, "all");
        assert!(config.tokenizer.lowercase && config.tokenizer.cjk_per_char);
    }
}
