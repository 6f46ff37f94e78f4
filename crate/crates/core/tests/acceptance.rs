//! Acceptance suite: one test per acceptance criterion, each printing a
//! single pass/fail line. Run with:
//!
//!     cargo test -p augeval-core --test acceptance -- --nocapture

mod support;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use augeval_core::dataset::{
    inject_contamination, load_manifest, save_manifest, split, ContaminationSpec,
    DatasetManifest, QASample, SplitSpec,
};
use augeval_core::hashing::SplitMix64;
use augeval_core::imageops::{self, InputFormat, Transform, TransformSet};
use augeval_core::metrics::{
    bleu_corpus, modified_precision, rouge_n, TokenSeq, TokenizerConfig,
};
use augeval_core::models::{
    EndpointKind, ModelEndpoint, ModelError, RecordedResponse, RemoteClient, RemoteHttpConfig,
    ReplayTransport, StubModelConfig,
};
use augeval_core::report::{emit, ReportFormat};
use augeval_core::runner::{compare, run, EvaluationPlan, FailurePolicy, RunResult};
use augeval_core::selftest;
use base64::Engine;

fn criterion(number: u32, label: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("[PASS] criterion {number}: {label}"),
        Err(message) => {
            println!("[FAIL] criterion {number}: {label}: {message}");
            panic!("criterion {number} failed: {message}");
        }
    }
}

fn fixture_manifest() -> DatasetManifest {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/demo/manifest.jsonl");
    load_manifest(path).expect("fixture manifest loads")
}

fn seq(tokens: &[&str]) -> TokenSeq {
    TokenSeq::from_tokens(tokens.iter().copied())
}

#[derive(serde::Deserialize)]
struct OracleGolden {
    mem_seed: u64,
    base_keep_fraction: f64,
    retention: BTreeMap<String, f64>,
    transforms: Vec<String>,
    grid: BTreeMap<String, BTreeMap<String, OracleScores>>,
}

#[derive(serde::Deserialize)]
struct OracleScores {
    bleu: f64,
    rouge1_f: f64,
    rouge2_f: f64,
}

fn oracle() -> OracleGolden {
    serde_json::from_str(include_str!("goldens/stub_grid_oracle.json")).unwrap()
}

fn oracle_plan(golden: &OracleGolden, cache_dir: PathBuf, parallelism: usize) -> EvaluationPlan {
    EvaluationPlan {
        endpoints: vec![
            ModelEndpoint {
                id: "clean".to_string(),
                kind: EndpointKind::Stub(StubModelConfig {
                    memorized_fraction: 0.0,
                    mem_seed: golden.mem_seed,
                    retention: BTreeMap::new(),
                    base_keep_fraction: golden.base_keep_fraction,
                }),
            },
            ModelEndpoint {
                id: "contaminated".to_string(),
                kind: EndpointKind::Stub(StubModelConfig {
                    memorized_fraction: 1.0,
                    mem_seed: golden.mem_seed,
                    retention: golden.retention.clone(),
                    base_keep_fraction: golden.base_keep_fraction,
                }),
            },
        ],
        transforms: TransformSet::from_ids(&golden.transforms).unwrap(),
        test_set: fixture_manifest(),
        cache_dir,
        parallelism,
        tokenizer: TokenizerConfig::default(),
        failure_policy: FailurePolicy::Strict,
    }
}

fn check_grid_matches_oracle(result: &RunResult, golden: &OracleGolden) -> Result<(), String> {
    for (endpoint, by_transform) in &golden.grid {
        for (transform, expected) in by_transform {
            let got = result
                .scores(endpoint, transform)
                .ok_or_else(|| format!("missing cell {endpoint}/{transform}"))?;
            if got.bleu != expected.bleu
                || got.rouge1_f != expected.rouge1_f
                || got.rouge2_f != expected.rouge2_f
            {
                return Err(format!(
                    "cell {endpoint}/{transform}: got {got:?}, oracle says \
                     bleu={} rouge1={} rouge2={}",
                    expected.bleu, expected.rouge1_f, expected.rouge2_f
                ));
            }
        }
    }
    Ok(())
}

#[test]
fn criterion_1_transform_algebra() {
    criterion(1, "transform algebra bit-exact on 1000 seeded rasters", || {
        let started = Instant::now();
        let suite = selftest::transform_algebra_suite(1000, 64);
        if !suite.ok() {
            return Err(format!("{} checks failed: {:?}", suite.failed, suite.failures));
        }
        if suite.passed != 1000 * 6 {
            return Err(format!("expected 6000 checks, ran {}", suite.passed));
        }
        let elapsed = started.elapsed();
        if elapsed >= Duration::from_secs(10) {
            return Err(format!("took {elapsed:?}, budget is 10s"));
        }
        Ok(())
    });
}

#[test]
fn criterion_2_metric_golden_values() {
    criterion(2, "metric golden values", || {
        let started = Instant::now();

        let cand = seq(&["the", "cat", "sat"]);
        let reference = seq(&["the", "cat", "sat", "on", "the", "mat"]);
        let rouge = rouge_n(&cand, &reference, 1);
        if (rouge - 2.0 / 3.0).abs() > 1e-12 {
            return Err(format!("rouge_1 worked example: got {rouge}, want 2/3"));
        }

        let repeats = seq(&["the", "the", "the", "the"]);
        let two = seq(&["the", "cat"]);
        let p1 = modified_precision(&repeats, &two, 1);
        if p1 != 0.25 {
            return Err(format!("clipped p1: got {p1}, want exactly 0.25"));
        }
        let bleu = bleu_corpus(&[(repeats, two)]).map_err(|e| e.to_string())?;
        if (bleu - 0.2686424829558855).abs() > 1e-12 {
            return Err(format!("bleu golden: got {bleu}"));
        }

        let suite = selftest::metric_golden_suite(None);
        if !suite.ok() {
            return Err(format!("golden suite failures: {:?}", suite.failures));
        }

        let elapsed = started.elapsed();
        if elapsed >= Duration::from_secs(1) {
            return Err(format!("took {elapsed:?}, budget is 1s"));
        }
        Ok(())
    });
}

#[test]
fn criterion_3_dataset_protocol() {
    criterion(3, "dataset split/contamination protocol on 200 random fixtures", || {
        let mut rng = SplitMix64::new(0xdad5);
        for case in 0..200u32 {
            let n_images = 2 + (rng.next_u64() % 30) as usize;
            let mut samples = Vec::new();
            for i in 0..n_images {
                let rounds = 1 + (rng.next_u64() % 3) as u32;
                for r in 1..=rounds {
                    samples.push(QASample {
                        id: format!("c{case}-i{i}-r{r}"),
                        image_ref: format!("img{i}.png"),
                        question: format!("question {i}"),
                        answer: format!("answer about image {i} round {r}"),
                        round_index: r,
                        genre: None,
                    });
                }
            }
            let manifest = DatasetManifest::new("images", samples).map_err(|e| e.to_string())?;
            let seed = rng.next_u64();
            let fraction = 0.2 + (rng.next_u64() % 60) as f64 / 100.0;
            let spec = SplitSpec { train_fraction: fraction, seed };
            let Ok((train, test)) = split(&manifest, &spec) else {
                continue; // degenerate count for tiny manifests
            };

            // Partition: id multiset equality.
            let mut combined: Vec<&str> = train
                .samples()
                .iter()
                .chain(test.samples())
                .map(|s| s.id.as_str())
                .collect();
            combined.sort_unstable();
            let mut expected: Vec<&str> =
                manifest.samples().iter().map(|s| s.id.as_str()).collect();
            expected.sort_unstable();
            if combined != expected {
                return Err(format!("case {case}: split is not a partition"));
            }

            // Image-level: no leakage.
            let train_imgs: std::collections::HashSet<_> =
                train.image_refs().into_iter().collect();
            for img in test.image_refs() {
                if train_imgs.contains(img) {
                    return Err(format!("case {case}: image {img} leaked across the split"));
                }
            }

            // Determinism byte-exact.
            let (train2, test2) = split(&manifest, &spec).map_err(|e| e.to_string())?;
            if train2 != train || test2 != test {
                return Err(format!("case {case}: split not deterministic"));
            }

            // Contamination: size preservation; full replacement covers test.
            let cspec = ContaminationSpec { replacement_fraction: 1.0, seed };
            if test.len() <= train.len() {
                let contaminated =
                    inject_contamination(&train, &test, &cspec).map_err(|e| e.to_string())?;
                if contaminated.len() != train.len() {
                    return Err(format!("case {case}: contamination changed train size"));
                }
                let ids: std::collections::HashSet<&str> =
                    contaminated.samples().iter().map(|s| s.id.as_str()).collect();
                for t in test.samples() {
                    if !ids.contains(t.id.as_str()) {
                        return Err(format!(
                            "case {case}: full replacement missing test id {}",
                            t.id
                        ));
                    }
                }
                let again =
                    inject_contamination(&train, &test, &cspec).map_err(|e| e.to_string())?;
                if again.samples() != contaminated.samples() {
                    return Err(format!("case {case}: contamination not deterministic"));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_4_contamination_inflation() {
    criterion(4, "contamination inflation matches brute-force oracle exactly", || {
        let started = Instant::now();
        let golden = oracle();
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let result = run(&oracle_plan(&golden, dir.path().to_path_buf(), 4))
            .map_err(|e| e.to_string())?;

        check_grid_matches_oracle(&result, &golden)?;

        let clean = result.scores("clean", "id").unwrap();
        let conta = result.scores("contaminated", "id").unwrap();
        if !(conta.bleu > clean.bleu
            && conta.rouge1_f > clean.rouge1_f
            && conta.rouge2_f > clean.rouge2_f)
        {
            return Err(format!(
                "contaminated does not strictly exceed clean at identity: {conta:?} vs {clean:?}"
            ));
        }

        let elapsed = started.elapsed();
        if elapsed >= Duration::from_secs(30) {
            return Err(format!("took {elapsed:?}, budget is 30s"));
        }
        Ok(())
    });
}

#[test]
fn criterion_5_betweenness_and_monotonicity() {
    criterion(5, "between-ness and retention monotonicity vs oracle grid", || {
        let golden = oracle();
        if golden.retention["fliph"] != 0.6
            || golden.retention["rot90"] != 0.4
            || golden.retention["rot150"] != 0.2
        {
            return Err("oracle golden does not pin retention 0.6/0.4/0.2".to_string());
        }
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let result = run(&oracle_plan(&golden, dir.path().to_path_buf(), 4))
            .map_err(|e| e.to_string())?;
        check_grid_matches_oracle(&result, &golden)?;

        let clean_id = result.scores("clean", "id").unwrap().rouge1_f;
        let conta_id = result.scores("contaminated", "id").unwrap().rouge1_f;
        let mut previous = conta_id;
        for transform in ["fliph", "rot90", "rot150"] {
            let value = result.scores("contaminated", transform).unwrap().rouge1_f;
            if !(clean_id <= value && value <= conta_id) {
                return Err(format!(
                    "{transform}: rouge1 {value} outside [{clean_id}, {conta_id}]"
                ));
            }
            if value > previous {
                return Err(format!(
                    "{transform}: rouge1 {value} not monotone nonincreasing (prev {previous})"
                ));
            }
            previous = value;
        }
        Ok(())
    });
}

#[test]
fn criterion_6_closest_to_target_ranking() {
    criterion(6, "closest-to-target ranking and verbatim table rendering", || {
        let fixture = include_bytes!("goldens/table2_scores.json");
        let run_result = RunResult::from_canonical_json(fixture, "table2_scores.json")
            .map_err(|e| e.to_string())?;
        let gap = compare(&run_result, "original", "contaminated").map_err(|e| e.to_string())?;

        let ranking = &gap.rankings["contaminated"]["bleu"];
        if ranking[0].transform_id != "fliph" {
            return Err(format!("ranking head is {}, want fliph", ranking[0].transform_id));
        }
        if (ranking[0].distance - 0.0017).abs() > 1e-12 {
            return Err(format!("fliph distance {} != 0.0017", ranking[0].distance));
        }
        let bgr = ranking
            .iter()
            .find(|e| e.transform_id == "bgr")
            .ok_or("bgr missing from ranking")?;
        if (bgr.distance - 0.0321).abs() > 1e-12 {
            return Err(format!("bgr distance {} != 0.0321", bgr.distance));
        }
        let fliph_pos = ranking.iter().position(|e| e.transform_id == "fliph").unwrap();
        let bgr_pos = ranking.iter().position(|e| e.transform_id == "bgr").unwrap();
        if fliph_pos >= bgr_pos {
            return Err("fliph does not rank ahead of bgr".to_string());
        }

        let markdown = String::from_utf8(
            emit(&run_result, &gap, ReportFormat::Markdown).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        for (_, _, scores) in run_result.cells() {
            for value in [scores.bleu, scores.rouge1_f, scores.rouge2_f] {
                let rendered = format!("{value:.4}");
                if !markdown.contains(&rendered) {
                    return Err(format!("markdown missing fixture value {rendered}"));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_7_determinism_under_parallelism_and_cache() {
    criterion(7, "byte-identical runs across parallelism and warm cache", || {
        let golden = oracle();
        let mut documents = Vec::new();
        for parallelism in [1usize, 4, 16] {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let result = run(&oracle_plan(&golden, dir.path().to_path_buf(), parallelism))
                .map_err(|e| e.to_string())?;
            documents.push(result.to_canonical_json());
        }
        if documents[0] != documents[1] || documents[1] != documents[2] {
            return Err("run documents differ across parallelism".to_string());
        }

        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let plan = oracle_plan(&golden, dir.path().to_path_buf(), 4);
        let cold = run(&plan).map_err(|e| e.to_string())?;
        let warm = run(&plan).map_err(|e| e.to_string())?;
        if warm.stats.endpoint_calls != 0 {
            return Err(format!("warm rerun made {} endpoint calls", warm.stats.endpoint_calls));
        }
        if !warm.predictions.iter().all(|p| p.from_cache) {
            return Err("warm rerun has non-cache predictions".to_string());
        }
        if warm.to_canonical_json() != cold.to_canonical_json() {
            return Err("warm rerun document differs from cold run".to_string());
        }
        Ok(())
    });
}

#[test]
fn criterion_8_remote_client_conformance() {
    criterion(8, "remote client record/replay conformance", || {
        fn client_with(
            responses: Vec<RecordedResponse>,
            max_retries: u32,
        ) -> (RemoteClient, std::sync::Arc<ReplayTransport>) {
            std::env::set_var("AUGEVAL_ACCEPT_KEY", "k");
            let transport = std::sync::Arc::new(ReplayTransport::new(responses));
            struct Shared(std::sync::Arc<ReplayTransport>);
            impl augeval_core::models::HttpTransport for Shared {
                fn post_json(
                    &self,
                    url: &str,
                    bearer: &str,
                    body: &serde_json::Value,
                    timeout: Duration,
                ) -> Result<augeval_core::models::TransportOutcome, ModelError> {
                    self.0.post_json(url, bearer, body, timeout)
                }
            }
            let client = RemoteClient::with_transport(
                "vlm",
                RemoteHttpConfig {
                    base_url: "https://models.example".to_string(),
                    model_name: "test-vlm".to_string(),
                    api_key_env_var: "AUGEVAL_ACCEPT_KEY".to_string(),
                    timeout_secs: 1.0,
                    max_retries,
                    temperature: 0.0,
                    max_in_flight: 2,
                    retry_backoff_ms: 1,
                },
                Box::new(Shared(transport.clone())),
            )
            .unwrap();
            (client, transport)
        }

        let ok_body = support::completion_body("a red chest");
        let sample = fixture_manifest().samples()[0].clone();
        let raster = imageops::Raster::from_fn(8, 5, |x, y| [x as u8 * 30, y as u8 * 50, 9]);
        let transformed = imageops::apply(&raster, &Transform::rotate(90.0).unwrap());

        // Success.
        let (client, transport) =
            client_with(vec![RecordedResponse::Http { status: 200, body: ok_body.clone() }], 0);
        let prediction = client
            .predict(&sample.question, &transformed, &sample.id, "rot90")
            .map_err(|e| format!("success case: {e}"))?;
        if prediction.text != "a red chest" {
            return Err(format!("success case text {:?}", prediction.text));
        }

        // Request never contains the gold answer; image block decodes back
        // to the transformed raster.
        let request = &transport.requests()[0];
        let body_text = request.body.to_string();
        if body_text.contains(&sample.answer) {
            return Err("request body contains the gold answer".to_string());
        }
        let url = request.body["messages"][0]["content"][1]["image_url"]["url"]
            .as_str()
            .ok_or("missing image_url")?;
        let b64 = url
            .strip_prefix("data:image/png;base64,")
            .ok_or("image url is not a PNG data URL")?;
        let png = base64::engine::general_purpose::STANDARD
            .decode(b64)
            .map_err(|e| format!("data url not base64: {e}"))?;
        let decoded = imageops::decode(&png, InputFormat::Png).map_err(|e| e.to_string())?;
        if decoded != transformed {
            return Err("data URL does not decode to the transformed raster".to_string());
        }

        // 429 then success.
        let (client, _) = client_with(
            vec![
                RecordedResponse::Http { status: 429, body: "slow down".to_string() },
                RecordedResponse::Http { status: 200, body: ok_body.clone() },
            ],
            1,
        );
        let prediction = client
            .predict(&sample.question, &transformed, &sample.id, "rot90")
            .map_err(|e| format!("429-then-success: {e}"))?;
        if prediction.retries != 1 {
            return Err(format!("429 case: retries {}", prediction.retries));
        }

        // Permanent 4xx.
        let (client, transport) = client_with(
            vec![RecordedResponse::Http { status: 400, body: "bad request".to_string() }],
            3,
        );
        match client.predict(&sample.question, &transformed, &sample.id, "rot90") {
            Err(ModelError::Http { status: 400, body }) => {
                if body != "bad request" {
                    return Err("4xx body not surfaced".to_string());
                }
            }
            other => return Err(format!("4xx case: {other:?}")),
        }
        if transport.requests().len() != 1 {
            return Err("permanent 4xx was retried".to_string());
        }

        // Timeout after retries.
        let (client, _) =
            client_with(vec![RecordedResponse::Timeout, RecordedResponse::Timeout], 1);
        match client.predict(&sample.question, &transformed, &sample.id, "rot90") {
            Err(ModelError::Timeout { attempts: 2 }) => {}
            other => return Err(format!("timeout case: {other:?}")),
        }

        // Malformed body.
        let (client, _) = client_with(
            vec![RecordedResponse::Http { status: 200, body: "<html>oops</html>".to_string() }],
            0,
        );
        match client.predict(&sample.question, &transformed, &sample.id, "rot90") {
            Err(ModelError::MalformedResponse(_)) => {}
            other => return Err(format!("malformed case: {other:?}")),
        }

        Ok(())
    });
}

#[test]
fn acceptance_fixture_sanity() {
    // The goldens the criteria rely on: regenerate with
    // scripts/gen_grid_oracle.py and scripts/gen_split_golden.py if the
    // fixture changes.
    let manifest = fixture_manifest();
    assert_eq!(manifest.len(), 46);
    assert_eq!(manifest.image_refs().len(), 20);
    let dir = tempfile::tempdir().unwrap();
    save_manifest(&manifest, dir.path().join("copy.jsonl")).unwrap();
}
