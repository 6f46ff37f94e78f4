"""Independent reference implementations used to generate golden files.

Everything here is deliberately written from the documented contracts alone
(hash definition, tokenizer rules, metric formulas, stub semantics) so the
frozen values it produces are an independent check on the Rust crate, not a
transcription of it.

IEEE-754 doubles behave identically in CPython and Rust as long as the
operation order matches, so golden floats are frozen at full precision
(shortest round-trip repr) and compared exactly.
"""

import json
import math
import unicodedata

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1


def fnv1a64(parts):
    h = FNV_OFFSET
    for i, part in enumerate(parts):
        if i > 0:
            h ^= 0x1F
            h = (h * FNV_PRIME) & MASK64
        for b in part.encode("utf-8"):
            h ^= b
            h = (h * FNV_PRIME) & MASK64
    return h


def mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def hash64(parts):
    return mix64(fnv1a64(parts))


def below_fraction(h, fraction):
    if fraction >= 1.0:
        return True
    if fraction <= 0.0:
        return False
    return float(h) / 18446744073709551616.0 < fraction


# --- tokenizer ---------------------------------------------------------------

CJK_RANGES = (
    (0x4E00, 0x9FFF),
    (0x3400, 0x4DBF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2A6DF),
    (0x2A700, 0x2EBEF),
    (0x30000, 0x3134F),
)


def is_cjk(ch):
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in CJK_RANGES)


def tokenize(text, lowercase=True, cjk_per_char=True):
    text = unicodedata.normalize("NFC", text)
    if lowercase:
        text = text.lower()
    tokens = []
    run = ""
    for ch in text:
        if cjk_per_char and is_cjk(ch):
            if run:
                tokens.append(run)
                run = ""
            tokens.append(ch)
        elif ch.isalnum():
            run += ch
        else:
            if run:
                tokens.append(run)
                run = ""
    if run:
        tokens.append(run)
    return tokens


# --- metrics ------------------------------------------------------------------


def ngram_counts(tokens, n):
    counts = {}
    for i in range(len(tokens) - n + 1):
        key = tuple(tokens[i : i + n])
        counts[key] = counts.get(key, 0) + 1
    return counts


def rouge_n(candidate, reference, n):
    cand = ngram_counts(candidate, n)
    ref = ngram_counts(reference, n)
    cand_total = sum(cand.values())
    ref_total = sum(ref.values())
    if cand_total == 0 or ref_total == 0:
        return 0.0
    overlap = sum(min(c, ref.get(g, 0)) for g, c in cand.items())
    p = overlap / cand_total
    r = overlap / ref_total
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def bleu_corpus(pairs):
    assert pairs, "bleu_corpus needs at least one pair"
    nums = [0, 0, 0, 0]
    dens = [0, 0, 0, 0]
    cand_len = 0
    ref_len = 0
    for cand, ref in pairs:
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, 5):
            cc = ngram_counts(cand, n)
            rc = ngram_counts(ref, n)
            nums[n - 1] += sum(min(c, rc.get(g, 0)) for g, c in cc.items())
            dens[n - 1] += sum(cc.values())
    if nums[0] == 0:
        return 0.0
    log_sum = 0.0
    orders = 0
    for n in range(1, 5):
        num, den = nums[n - 1], dens[n - 1]
        if den == 0:
            continue  # no n-gram slots at this order anywhere in the corpus
        p = (1.0 / (2.0 * den)) if num == 0 else (num / den)
        log_sum += math.log(p)
        orders += 1
    geo = math.exp(log_sum / orders)
    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * geo


def score_pairs(pairs):
    assert pairs
    bleu = bleu_corpus(pairs)
    r1 = 0.0
    r2 = 0.0
    for cand, ref in pairs:
        r1 += rouge_n(cand, ref, 1)
        r2 += rouge_n(cand, ref, 2)
    return (bleu, r1 / len(pairs), r2 / len(pairs))


# --- stub model ---------------------------------------------------------------


def stub_predict(cfg, sample_id, gold_answer, transform_id):
    """cfg: dict with memorized_fraction, mem_seed, retention (dict), base_keep_fraction."""
    seed = str(cfg["mem_seed"])
    memorized = below_fraction(hash64([seed, sample_id]), cfg["memorized_fraction"])
    if memorized:
        if transform_id == "id":
            return gold_answer
        retention = 1.0 if transform_id == "id" else cfg["retention"].get(transform_id, 0.0)
        if below_fraction(hash64([seed, sample_id, transform_id]), retention):
            return gold_answer
    gold_tokens = tokenize(gold_answer)
    keep = math.ceil(cfg["base_keep_fraction"] * len(gold_tokens))
    return " ".join(gold_tokens[:keep])


# --- manifest I/O --------------------------------------------------------------


def load_manifest(path):
    with open(path, encoding="utf-8") as f:
        lines = [ln for ln in f.read().split("\n") if ln]
    header = json.loads(lines[0])
    samples = [json.loads(ln) for ln in lines[1:]]
    return header, samples


def round_half_away(x):
    return math.floor(x + 0.5) if x >= 0 else math.ceil(x - 0.5)


def split_images(samples, train_fraction, seed):
    """Image-level split: distinct image refs in first-appearance order are
    permuted by hash64(seed, "split", ref); the first round(f*n) go to train."""
    images = []
    for s in samples:
        if s["image"] not in images:
            images.append(s["image"])
    ranked = sorted(images, key=lambda ref: (hash64([str(seed), "split", ref]), ref))
    n_train = round_half_away(train_fraction * len(images))
    train_imgs = set(ranked[:n_train])
    train = [s for s in samples if s["image"] in train_imgs]
    test = [s for s in samples if s["image"] not in train_imgs]
    return sorted(train_imgs), sorted(set(images) - train_imgs), train, test


def contamination_selection(train, test, replacement_fraction, seed):
    k = round_half_away(replacement_fraction * len(test))
    injected = sorted(test, key=lambda s: (hash64([str(seed), "inject", s["id"]]), s["id"]))[:k]
    evicted = sorted(train, key=lambda s: (hash64([str(seed), "evict", s["id"]]), s["id"]))[:k]
    return [s["id"] for s in injected], [s["id"] for s in evicted]
