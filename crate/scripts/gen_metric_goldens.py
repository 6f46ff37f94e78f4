#!/usr/bin/env python3
"""Generate crates/core/goldens/metrics.json from the reference metric
implementations in oracle_lib.py. Run from the repository root:

    python3 scripts/gen_metric_goldens.py
"""

import json
import pathlib

from oracle_lib import bleu_corpus, rouge_n, score_pairs

ROUGE_CASES = [
    # Worked example: P = 3/3, R = 3/6, F = 2/3.
    (["the", "cat", "sat"], ["the", "cat", "sat", "on", "the", "mat"], 1),
    (["the", "cat", "sat"], ["the", "cat", "sat", "on", "the", "mat"], 2),
    # Identity.
    (["a", "red", "chest"], ["a", "red", "chest"], 1),
    # Zero overlap bigrams.
    (["a", "b"], ["c", "d"], 2),
    # Clipping: candidate repeats a token more often than the reference has it.
    (["the", "the", "the", "the"], ["the", "cat"], 1),
    # CJK single-character tokens.
    (["打", "开", "宝", "箱"], ["打", "开", "箱", "子"], 1),
    (["打", "开", "宝", "箱"], ["打", "开", "箱", "子"], 2),
]

BLEU_CASES = [
    # Clipped p1 = 1/4 with eps smoothing at higher orders.
    [((["the", "the", "the", "the"]), ["the", "cat"])],
    # Perfect corpus.
    [
        (["a", "red", "chest", "appears"], ["a", "red", "chest", "appears"]),
        (["the", "boss", "drops", "loot"], ["the", "boss", "drops", "loot"]),
    ],
    # Brevity penalty: candidate is a 4-token prefix of an 8-token reference.
    [
        (
            ["the", "chest", "holds", "gold"],
            ["the", "chest", "holds", "gold", "and", "a", "silver", "key"],
        )
    ],
    # Mixed two-pair corpus with partial overlap.
    [
        (["open", "the", "wooden", "door"], ["open", "the", "iron", "door", "slowly"]),
        (["press", "x", "to", "jump"], ["press", "x", "to", "jump", "twice"]),
    ],
]

SCORE_CASES = [
    # Three-pair fixture with hand-enumerable n-grams.
    [
        (
            ["the", "wooden", "chest", "contains", "a", "golden", "key"],
            ["the", "wooden", "chest", "contains", "a", "golden", "key", "and", "a", "map"],
        ),
        (["打", "开", "宝", "箱"], ["打", "开", "宝", "箱"]),
        (["press", "x", "to", "jump"], ["hold", "y", "to", "crouch"]),
    ],
    # All-perfect pairs.
    [
        (["yes"], ["yes"]),
        (["the", "red", "door"], ["the", "red", "door"]),
    ],
    # All-disjoint vocabulary.
    [
        (["x", "y"], ["a", "b"]),
        (["z", "w"], ["c", "d"]),
    ],
]


def main():
    doc = {
        "rouge_cases": [
            {"candidate": c, "reference": r, "n": n, "expected": rouge_n(c, r, n)}
            for c, r, n in ROUGE_CASES
        ],
        "bleu_cases": [
            {"pairs": [[c, r] for c, r in pairs], "expected": bleu_corpus(pairs)}
            for pairs in BLEU_CASES
        ],
        "score_cases": [],
    }
    for pairs in SCORE_CASES:
        bleu, r1, r2 = score_pairs(pairs)
        doc["score_cases"].append(
            {
                "pairs": [[c, r] for c, r in pairs],
                "expected": {"bleu": bleu, "rouge1_f": r1, "rouge2_f": r2},
            }
        )
    out = pathlib.Path(__file__).resolve().parent.parent / "crates/core/goldens/metrics.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
