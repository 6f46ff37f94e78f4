//! Text tokenization and n-gram overlap metrics (BLEU, ROUGE-1, ROUGE-2).
//!
//! The exact variant computed here is pinned and echoed into every report:
//!
//! * tokenizer — NFC normalization, optional lowercasing, CJK ideographs as
//!   single-character tokens, other tokens are maximal alphanumeric runs;
//! * ROUGE-N — F1 over clipped n-gram overlap, macro-averaged per pair;
//! * BLEU — corpus-level, max order 4, uniform weights, single reference,
//!   pooled clipped precisions, brevity penalty `exp(1 - r/c)` for `c <= r`,
//!   and epsilon smoothing `1/(2*denominator)` for zero numerators at n >= 2.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// One-line description of the metric variant, embedded in report metadata.
pub const METRIC_VARIANT: &str = "bleu: corpus-level order-4 uniform weights, clipped pooled \
     precisions, eps=1/(2*den) smoothing for zero numerators at n>=2, bp=exp(1-r/c) for c<=r; \
     rouge: F1 over clipped n-gram overlap, macro-averaged per pair";

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("metric computation requires at least one candidate/reference pair")]
    EmptyPairList,
}

/// Tokenizer knobs. Defaults (lowercase on, CJK-per-character on) make the
/// metrics meaningful for both English and Chinese answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    #[serde(default = "default_true")]
    pub lowercase: bool,
    #[serde(default = "default_true")]
    pub cjk_per_char: bool,
}

fn default_true() -> bool {
    true
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self { lowercase: true, cjk_per_char: true }
    }
}

/// An ordered sequence of normalized tokens, as produced by [`tokenize`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    /// Wrap pre-tokenized content. Callers outside tests should prefer
    /// [`tokenize`], which applies the canonical normalization.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(tokens.into_iter().map(Into::into).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// BLEU / ROUGE-1-F / ROUGE-2-F for one grid cell. All values lie in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub bleu: f64,
    pub rouge1_f: f64,
    pub rouge2_f: f64,
}

impl MetricScores {
    pub fn get(&self, metric: MetricKind) -> f64 {
        match metric {
            MetricKind::Bleu => self.bleu,
            MetricKind::Rouge1 => self.rouge1_f,
            MetricKind::Rouge2 => self.rouge2_f,
        }
    }
}

/// The three reported metric columns, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Bleu,
    Rouge1,
    Rouge2,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Bleu, MetricKind::Rouge1, MetricKind::Rouge2];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Bleu => "bleu",
            MetricKind::Rouge1 => "rouge1_f",
            MetricKind::Rouge2 => "rouge2_f",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Bleu => "BLEU",
            MetricKind::Rouge1 => "ROUGE-1",
            MetricKind::Rouge2 => "ROUGE-2",
        }
    }
}

fn is_cjk_ideograph(c: char) -> bool {
    matches!(u32::from(c),
        0x4E00..=0x9FFF
        | 0x3400..=0x4DBF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2A6DF
        | 0x2A700..=0x2EBEF
        | 0x30000..=0x3134F)
}

/// NFC-normalize, optionally lowercase, then emit CJK ideographs as
/// single-character tokens and every other maximal alphanumeric run as one
/// token. All remaining codepoints act as separators and are dropped.
pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> TokenSeq {
    let normalized: String = text.nfc().collect();
    let cased: String = if cfg.lowercase {
        normalized.chars().flat_map(char::to_lowercase).collect()
    } else {
        normalized
    };

    let mut tokens = Vec::new();
    let mut run = String::new();
    for c in cased.chars() {
        if cfg.cjk_per_char && is_cjk_ideograph(c) {
            if !run.is_empty() {
                tokens.push(std::mem::take(&mut run));
            }
            tokens.push(c.to_string());
        } else if c.is_alphanumeric() {
            run.push(c);
        } else if !run.is_empty() {
            tokens.push(std::mem::take(&mut run));
        }
    }
    if !run.is_empty() {
        tokens.push(run);
    }
    TokenSeq(tokens)
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for window in tokens.windows(n) {
        *counts.entry(window).or_insert(0) += 1;
    }
    counts
}

fn clipped_overlap(cand: &HashMap<&[String], usize>, refc: &HashMap<&[String], usize>) -> usize {
    cand.iter()
        .map(|(gram, &count)| count.min(refc.get(gram).copied().unwrap_or(0)))
        .sum()
}

/// Clipped (modified) n-gram precision for one candidate/reference pair:
/// each candidate n-gram counts at most as often as it occurs in the
/// reference. Returns 0 when the candidate has no n-grams.
pub fn modified_precision(candidate: &TokenSeq, reference: &TokenSeq, n: usize) -> f64 {
    let cand = ngram_counts(candidate.tokens(), n);
    let refc = ngram_counts(reference.tokens(), n);
    let total: usize = cand.values().sum();
    if total == 0 {
        return 0.0;
    }
    clipped_overlap(&cand, &refc) as f64 / total as f64
}

/// F1 over clipped n-gram overlap. Returns 0 when either side has no
/// n-grams or precision and recall are both zero.
pub fn rouge_n(candidate: &TokenSeq, reference: &TokenSeq, n: usize) -> f64 {
    let cand = ngram_counts(candidate.tokens(), n);
    let refc = ngram_counts(reference.tokens(), n);
    let cand_total: usize = cand.values().sum();
    let ref_total: usize = refc.values().sum();
    if cand_total == 0 || ref_total == 0 {
        return 0.0;
    }
    let overlap = clipped_overlap(&cand, &refc) as f64;
    let p = overlap / cand_total as f64;
    let r = overlap / ref_total as f64;
    if p + r == 0.0 {
        return 0.0;
    }
    2.0 * p * r / (p + r)
}

/// Corpus-level BLEU over (candidate, reference) pairs, single reference per
/// candidate. Clipped n-gram counts are pooled across the corpus before the
/// precision division.
///
/// A zero pooled unigram numerator short-circuits to 0. For n >= 2 a zero
/// numerator with a nonzero denominator is smoothed to `1/(2*denominator)`.
/// Orders whose pooled denominator is zero (every candidate shorter than n
/// tokens) contribute no n-gram slots at all and are excluded from the
/// geometric mean, so a corpus of perfectly matching one-token pairs still
/// scores 1.
pub fn bleu_corpus(pairs: &[(TokenSeq, TokenSeq)]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyPairList);
    }

    let mut numerators = [0usize; 4];
    let mut denominators = [0usize; 4];
    let mut cand_len = 0usize;
    let mut ref_len = 0usize;

    for (cand, reference) in pairs {
        cand_len += cand.len();
        ref_len += reference.len();
        for n in 1..=4 {
            let cc = ngram_counts(cand.tokens(), n);
            let rc = ngram_counts(reference.tokens(), n);
            numerators[n - 1] += clipped_overlap(&cc, &rc);
            denominators[n - 1] += cc.values().sum::<usize>();
        }
    }

    if numerators[0] == 0 {
        return Ok(0.0);
    }

    let mut log_sum = 0.0;
    let mut orders = 0u32;
    for n in 0..4 {
        let den = denominators[n];
        if den == 0 {
            continue;
        }
        let p = if numerators[n] == 0 {
            1.0 / (2.0 * den as f64)
        } else {
            numerators[n] as f64 / den as f64
        };
        log_sum += p.ln();
        orders += 1;
    }
    let geo = (log_sum / f64::from(orders)).exp();

    let bp = if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    Ok(bp * geo)
}

/// Pooled BLEU plus per-pair macro-averaged ROUGE-1/ROUGE-2 F1.
pub fn score_pairs(pairs: &[(TokenSeq, TokenSeq)]) -> Result<MetricScores, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyPairList);
    }
    let bleu = bleu_corpus(pairs)?;
    let mut r1 = 0.0;
    let mut r2 = 0.0;
    for (cand, reference) in pairs {
        r1 += rouge_n(cand, reference, 1);
        r2 += rouge_n(cand, reference, 2);
    }
    let count = pairs.len() as f64;
    Ok(MetricScores { bleu, rouge1_f: r1 / count, rouge2_f: r2 / count })
}
