#!/usr/bin/env python3
"""Brute-force oracle for the stub evaluation grid on the demo fixture:
enumerates every sample's stub output for a clean and a contaminated stub
under each transform, recomputes BLEU/ROUGE from the reference metric
implementations, and freezes the full grid. Run from the repo root:

    python3 scripts/gen_grid_oracle.py
"""

import json
import pathlib

from oracle_lib import load_manifest, score_pairs, stub_predict, tokenize

REPO = pathlib.Path(__file__).resolve().parent.parent

MEM_SEED = 7
BASE_KEEP = 0.5
RETENTION = {"fliph": 0.6, "rot90": 0.4, "rot150": 0.2}
TRANSFORMS = ["id", "fliph", "rot90", "rot150"]

ENDPOINTS = {
    "clean": {
        "memorized_fraction": 0.0,
        "mem_seed": MEM_SEED,
        "retention": {},
        "base_keep_fraction": BASE_KEEP,
    },
    "contaminated": {
        "memorized_fraction": 1.0,
        "mem_seed": MEM_SEED,
        "retention": RETENTION,
        "base_keep_fraction": BASE_KEEP,
    },
}


def main():
    _, samples = load_manifest(REPO / "fixtures/demo/manifest.jsonl")
    # The harness aggregates in sample-id-sorted order; mirror that exactly
    # so the floating-point sums agree bit for bit.
    samples = sorted(samples, key=lambda s: s["id"])

    grid = {}
    for endpoint, cfg in ENDPOINTS.items():
        grid[endpoint] = {}
        for transform in TRANSFORMS:
            pairs = []
            for s in samples:
                text = stub_predict(cfg, s["id"], s["answer"], transform)
                pairs.append((tokenize(text), tokenize(s["answer"])))
            bleu, r1, r2 = score_pairs(pairs)
            grid[endpoint][transform] = {"bleu": bleu, "rouge1_f": r1, "rouge2_f": r2}

    doc = {
        "mem_seed": MEM_SEED,
        "base_keep_fraction": BASE_KEEP,
        "retention": RETENTION,
        "transforms": TRANSFORMS,
        "grid": grid,
    }
    out = REPO / "crates/core/tests/goldens/stub_grid_oracle.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    for endpoint in grid:
        for transform in TRANSFORMS:
            cell = grid[endpoint][transform]
            print(f"  {endpoint:13s} {transform:7s} bleu={cell['bleu']:.6f} "
                  f"r1={cell['rouge1_f']:.6f} r2={cell['rouge2_f']:.6f}")


if __name__ == "__main__":
    main()
