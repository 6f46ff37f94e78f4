#!/usr/bin/env python3
"""Freeze the seeded split and contamination selections for the demo fixture
(seed 7, train fraction 0.9, replacement fraction 0.5) by enumerating the
keyed-hash permutation independently of the Rust implementation. Run from
the repo root:

    python3 scripts/gen_split_golden.py
"""

import json
import pathlib

from oracle_lib import contamination_selection, load_manifest, split_images

REPO = pathlib.Path(__file__).resolve().parent.parent
SEED = 7
TRAIN_FRACTION = 0.9
REPLACEMENT_FRACTION = 0.5


def main():
    _, samples = load_manifest(REPO / "fixtures/demo/manifest.jsonl")
    train_images, test_images, train, test = split_images(samples, TRAIN_FRACTION, SEED)
    injected, evicted = contamination_selection(train, test, REPLACEMENT_FRACTION, SEED)

    doc = {
        "seed": SEED,
        "train_fraction": TRAIN_FRACTION,
        "replacement_fraction": REPLACEMENT_FRACTION,
        "train_images": train_images,
        "test_images": test_images,
        "train_sample_ids": [s["id"] for s in train],
        "test_sample_ids": [s["id"] for s in test],
        "injected_ids": injected,
        "evicted_ids": evicted,
    }
    out = REPO / "crates/core/tests/goldens/split_seed7.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    print(f"  train images: {len(train_images)}, test images: {len(test_images)}")
    print(f"  train samples: {len(train)}, test samples: {len(test)}")
    print(f"  injected: {injected}")
    print(f"  evicted: {evicted}")


if __name__ == "__main__":
    main()
