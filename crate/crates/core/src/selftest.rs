//! User-facing health checks: the transform-algebra identities and the metric
//! golden values, runnable via `augeval selftest`.
//!
//! The default golden data is compiled in; a directory override lets
//! operators point at an external copy (and lets tests exercise the failure
//! path with a corrupted file).

use std::path::Path;

use serde::Deserialize;

use crate::hashing::SplitMix64;
use crate::imageops::{apply, Raster, Transform};
use crate::metrics::{bleu_corpus, rouge_n, score_pairs, MetricScores, TokenSeq};

const EMBEDDED_METRIC_GOLDENS: &str = include_str!("../goldens/metrics.json");
const GOLDEN_TOLERANCE: f64 = 1e-12;

/// Outcome of one named check suite.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), passed: 0, failed: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.failures.len() < 10 {
                self.failures.push(describe());
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// Deterministic raster: seeded dimensions in [1, max_dim] and seeded pixels.
pub fn seeded_raster(rng: &mut SplitMix64, max_dim: u32) -> Raster {
    let w = 1 + (rng.next_u64() % u64::from(max_dim)) as u32;
    let h = 1 + (rng.next_u64() % u64::from(max_dim)) as u32;
    let mut pixels = Vec::with_capacity(w as usize * h as usize * 3);
    while pixels.len() < w as usize * h as usize * 3 {
        pixels.extend_from_slice(&rng.next_u64().to_le_bytes());
    }
    pixels.truncate(w as usize * h as usize * 3);
    Raster::new(w, h, pixels).expect("seeded raster is well-formed")
}

/// Bit-exact transform identities over seeded random rasters: the BGR swap,
/// both flips and the half turn are involutions, four quarter turns compose
/// to the identity, and the half turn equals flipping both axes.
pub fn transform_algebra_suite(raster_count: usize, max_dim: u32) -> SuiteResult {
    let mut suite = SuiteResult::new("transform-algebra");
    let mut rng = SplitMix64::new(0x5eed);
    let rot90 = Transform::rotate(90.0).unwrap();
    let rot180 = Transform::rotate(180.0).unwrap();

    for i in 0..raster_count {
        let z = seeded_raster(&mut rng, max_dim);
        let dims = (z.width(), z.height());

        let involutions =
            [("bgr", Transform::BgrSwap), ("fliph", Transform::FlipH), ("flipv", Transform::FlipV), ("rot180", rot180.clone())];
        for (name, t) in involutions {
            let twice = apply(&apply(&z, &t), &t);
            suite.check(twice == z, || format!("raster {i} {dims:?}: {name} is not an involution"));
        }

        let four_turns = apply(&apply(&apply(&apply(&z, &rot90), &rot90), &rot90), &rot90);
        suite.check(four_turns == z, || format!("raster {i} {dims:?}: rot90^4 != identity"));

        let half_turn = apply(&z, &rot180);
        let both_flips = apply(&apply(&z, &Transform::FlipV), &Transform::FlipH);
        suite.check(half_turn == both_flips, || {
            format!("raster {i} {dims:?}: rot180 != fliph(flipv)")
        });
    }
    suite
}

#[derive(Deserialize)]
struct MetricGoldens {
    rouge_cases: Vec<RougeCase>,
    bleu_cases: Vec<BleuCase>,
    score_cases: Vec<ScoreCase>,
}

#[derive(Deserialize)]
struct RougeCase {
    candidate: Vec<String>,
    reference: Vec<String>,
    n: usize,
    expected: f64,
}

#[derive(Deserialize)]
struct BleuCase {
    pairs: Vec<(Vec<String>, Vec<String>)>,
    expected: f64,
}

#[derive(Deserialize)]
struct ScoreCase {
    pairs: Vec<(Vec<String>, Vec<String>)>,
    expected: MetricScores,
}

fn to_pairs(pairs: &[(Vec<String>, Vec<String>)]) -> Vec<(TokenSeq, TokenSeq)> {
    pairs
        .iter()
        .map(|(c, r)| (TokenSeq::from_tokens(c.clone()), TokenSeq::from_tokens(r.clone())))
        .collect()
}

/// Compare the metric implementations against golden values produced by the
/// independent reference script. `golden_dir`, when given, must contain a
/// `metrics.json`; otherwise the compiled-in goldens are used.
pub fn metric_golden_suite(golden_dir: Option<&Path>) -> SuiteResult {
    let mut suite = SuiteResult::new("metric-goldens");
    let content = match golden_dir {
        Some(dir) => match std::fs::read_to_string(dir.join("metrics.json")) {
            Ok(content) => content,
            Err(e) => {
                suite.check(false, || format!("cannot read metrics.json: {e}"));
                return suite;
            }
        },
        None => EMBEDDED_METRIC_GOLDENS.to_string(),
    };
    let goldens: MetricGoldens = match serde_json::from_str(&content) {
        Ok(goldens) => goldens,
        Err(e) => {
            suite.check(false, || format!("metrics.json is corrupt: {e}"));
            return suite;
        }
    };

    for (i, case) in goldens.rouge_cases.iter().enumerate() {
        let got = rouge_n(
            &TokenSeq::from_tokens(case.candidate.clone()),
            &TokenSeq::from_tokens(case.reference.clone()),
            case.n,
        );
        suite.check((got - case.expected).abs() <= GOLDEN_TOLERANCE, || {
            format!("rouge case {i}: got {got}, expected {}", case.expected)
        });
    }
    for (i, case) in goldens.bleu_cases.iter().enumerate() {
        match bleu_corpus(&to_pairs(&case.pairs)) {
            Ok(got) => suite.check((got - case.expected).abs() <= GOLDEN_TOLERANCE, || {
                format!("bleu case {i}: got {got}, expected {}", case.expected)
            }),
            Err(e) => suite.check(false, || format!("bleu case {i}: {e}")),
        }
    }
    for (i, case) in goldens.score_cases.iter().enumerate() {
        match score_pairs(&to_pairs(&case.pairs)) {
            Ok(got) => {
                let close = (got.bleu - case.expected.bleu).abs() <= GOLDEN_TOLERANCE
                    && (got.rouge1_f - case.expected.rouge1_f).abs() <= GOLDEN_TOLERANCE
                    && (got.rouge2_f - case.expected.rouge2_f).abs() <= GOLDEN_TOLERANCE;
                suite.check(close, || {
                    format!("score case {i}: got {got:?}, expected {:?}", case.expected)
                });
            }
            Err(e) => suite.check(false, || format!("score case {i}: {e}")),
        }
    }
    suite
}

/// Run every suite. `golden_dir` overrides the compiled-in golden data.
pub fn run_all(golden_dir: Option<&Path>) -> Vec<SuiteResult> {
    vec![transform_algebra_suite(300, 48), metric_golden_suite(golden_dir)]
}
