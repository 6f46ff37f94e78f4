#!/usr/bin/env python3
"""Generate the shipped synthetic demo dataset: 20 PNG images with 46 QA
rounds total, in the manifest format the harness ingests. Fully
deterministic; rerunning reproduces the same bytes. Run from the repo root:

    python3 scripts/gen_fixture.py
"""

import json
import pathlib

from PIL import Image

ROOT = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "demo"

# 8 images with 3 rounds, 10 with 2, 2 with 1 -> 46 rounds over 20 images.
ROUNDS = [3] * 8 + [2] * 10 + [1] * 2

GENRES = ["rpg", "anime", "shooter", "other"]

QA_TEMPLATES = [
    ("What item sits inside the opened chest?", "a wooden chest holding three golden coins and a silver key"),
    ("What color is the banner above the gate?", "the banner above the stone gate is deep crimson with gold trim"),
    ("How many enemies guard the bridge?", "four armored knights guard the narrow bridge crossing"),
    ("地图上标记的宝箱在哪里?", "宝箱藏在瀑布后面的山洞里"),
    ("Which weapon is displayed on the altar?", "a curved silver blade with runes along the edge"),
    ("What does the sign near the door say?", "the sign warns travelers about the sleeping dragon below"),
    ("玩家需要先击败哪个首领?", "先击败守桥的石像巨人才能继续前进"),
    ("Where is the merchant standing?", "the merchant stands beside the fountain in the market square"),
    ("What potion is brewing in the cauldron?", "a bright green healing potion bubbles in the iron cauldron"),
    ("How do you unlock the second floor?", "pull the torch lever twice and the stair gate slides open"),
    ("这个房间里有几个守卫?", "房间里一共有三个巡逻的守卫"),
    ("What reward drops after the boss fight?", "the boss drops a rare amulet and two hundred gold pieces"),
]


def make_image(index: int, width: int = 24, height: int = 16) -> Image.Image:
    """Deterministic per-index pattern, asymmetric horizontally, vertically
    and across the R/B channels so every transform changes the bytes."""
    img = Image.new("RGB", (width, height))
    px = img.load()
    for y in range(height):
        for x in range(width):
            r = (x * 11 + index * 37) % 256
            g = (y * 23 + index * 53) % 256
            b = (x * 5 + y * 7 + index * 71) % 256
            px[x, y] = (r, g, b)
    # Off-center marker block breaks any accidental symmetry.
    for y in range(2, 6):
        for x in range(3, 9):
            px[x, y] = ((index * 97 + 13) % 256, 255 - index * 9 % 256, index * 3 % 256)
    return img


def main():
    images_dir = ROOT / "images"
    images_dir.mkdir(parents=True, exist_ok=True)

    lines = [json.dumps({"schema_version": 1, "root": "images"}, ensure_ascii=False)]
    total_rounds = 0
    for i, rounds in enumerate(ROUNDS):
        name = f"img{i:02d}.png"
        make_image(i).save(images_dir / name, format="PNG")
        for r in range(1, rounds + 1):
            question, answer = QA_TEMPLATES[(i * 3 + r) % len(QA_TEMPLATES)]
            sample = {
                "id": f"img{i:02d}-r{r}",
                "image": name,
                "question": question,
                "answer": answer,
                "round": r,
                "genre": GENRES[i % len(GENRES)],
            }
            lines.append(json.dumps(sample, ensure_ascii=False))
            total_rounds += 1

    manifest = ROOT / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {manifest}: {len(ROUNDS)} images, {total_rounds} rounds")


if __name__ == "__main__":
    main()
