#!/usr/bin/env python3
# Copyright 2026 The tkg Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the bundled JSONL fixtures under data/.

    python3 tools/gen_fixture.py [--root data]

Output is deterministic; rerunning overwrites the same bytes.
"""

import argparse
import json
import os
import random

BRANDS = ["Lumiere", "Aquavera", "Botanix", "Dermaline", "Velvet Co", "Nordic Glow",
          "Sunkiss", "Pure Leaf", "Mirabel", "Oakridge"]

# leaf path -> product nouns
CATEGORIES = {
    ("Beauty", "Skin Care", "Face", "Serums"): ["Serum", "Essence", "Ampoule"],
    ("Beauty", "Skin Care", "Face", "Moisturizers"): ["Cream", "Moisturizer", "Gel"],
    ("Beauty", "Skin Care", "Face", "Cleansers"): ["Cleanser", "Foam", "Wash"],
    ("Beauty", "Skin Care", "Body", "Lotions"): ["Lotion", "Butter", "Balm"],
    ("Beauty", "Hair Care", "Shampoos"): ["Shampoo", "Wash"],
    ("Beauty", "Hair Care", "Conditioners"): ["Conditioner", "Mask"],
    ("Beauty", "Makeup", "Lips"): ["Lipstick", "Gloss", "Tint"],
    ("Beauty", "Makeup", "Eyes"): ["Mascara", "Liner", "Shadow"],
    ("Beauty", "Fragrance"): ["Perfume", "Mist", "Cologne"],
}

ADJECTIVES = ["Ultra", "Deep", "Daily", "Intense", "Gentle", "Advanced", "Overnight",
              "Radiant", "Pure", "Calming"]
BENEFITS = ["Hydrating", "Plumping", "Brightening", "Soothing", "Firming", "Clarifying",
            "Nourishing", "Smoothing", "Repairing", "Volumizing", "Moisturizing", "Matte"]
AREAS = ["Face", "Skin", "Body", "Hair", "Eye", "Lip", ""]

# attribute vocabulary per leaf cluster; shared words link items across brands
CLUSTER_WORDS = {
    ("Beauty", "Skin Care", "Face", "Serums"): ["hyaluronic", "vitamin", "glow", "hydrating",
                                               "lightweight", "dewy", "serum"],
    ("Beauty", "Skin Care", "Face", "Moisturizers"): ["moisturizing", "moisturising", "ceramide",
                                                     "rich", "barrier", "creamy", "nongreasy"],
    ("Beauty", "Skin Care", "Face", "Cleansers"): ["foaming", "gentle", "fresh", "clean",
                                                  "residue", "cleansing"],
    ("Beauty", "Skin Care", "Body", "Lotions"): ["shea", "cocoa", "softening", "absorbs",
                                                "scent", "scents"],
    ("Beauty", "Hair Care", "Shampoos"): ["lather", "sulfate", "volume", "scalp", "shine"],
    ("Beauty", "Hair Care", "Conditioners"): ["detangling", "silky", "frizz", "argan", "shine"],
    ("Beauty", "Makeup", "Lips"): ["pigment", "colour", "color", "longwear", "creamy", "matte"],
    ("Beauty", "Makeup", "Eyes"): ["smudge", "waterproof", "volume", "lengthening", "pigment"],
    ("Beauty", "Fragrance"): ["floral", "woody", "citrus", "lasting", "scent", "notes"],
}
COMMON = ["vegan", "fragrance", "sensitive", "price", "packaging", "texture", "favourite",
          "favorite", "organic", "routine"]
OPENERS = ["Really like this", "Works well", "Honestly", "Not sure about this", "Great",
           "Bought this again", "Okay overall", "Love it"]


def words(rng, pool, n):
    return [rng.choice(pool) for _ in range(n)]


def sentence(rng, vocab):
    w = words(rng, vocab, rng.randint(3, 6))
    return " ".join(w).capitalize() + "."


def main_fixture(rng, n_items=200, n_users=160, n_reviews=1000):
    leaves = list(CATEGORIES)
    items = []
    for i in range(n_items):
        leaf = leaves[i % len(leaves)]
        asin = "B%07d" % (i + 1)
        area = rng.choice(AREAS)
        title = " ".join(x for x in [rng.choice(ADJECTIVES), rng.choice(BENEFITS), area,
                                     rng.choice(CATEGORIES[leaf])] if x)
        vocab = CLUSTER_WORDS[leaf] + COMMON
        rec = {"asin": asin, "title": title, "categories": [list(leaf)]}
        if i % 23 != 5:
            rec["brand"] = BRANDS[(i * 7 + i // 9) % len(BRANDS)]
        if i % 11 != 3:
            rec["description"] = " ".join(sentence(rng, vocab) for _ in range(rng.randint(1, 3)))
        if i % 4 == 0:
            rec["price"] = round(rng.uniform(5, 80), 2)
        related = {}
        for kind in ("also_bought", "also_viewed", "bought_together"):
            if rng.random() < 0.6:
                picks = sorted({"B%07d" % rng.randint(1, n_items) for _ in range(rng.randint(1, 4))})
                if rng.random() < 0.2:
                    picks.append("X%05d" % rng.randint(1, 999))  # outside the catalog
                related[kind] = picks
        if related:
            rec["related"] = related
        items.append(rec)
    # a second category path for a few items, and one uncategorized item
    for i in range(0, n_items, 37):
        items[i]["categories"].append(["Beauty", "Gifts"])
    items[-1]["categories"] = []

    users = ["U%04d" % (u + 1) for u in range(n_users)]
    # each user leans towards two leaf clusters
    taste = {u: rng.sample(range(len(leaves)), 2) for u in users}
    by_leaf = {k: [it for j, it in enumerate(items) if j % len(leaves) == k]
               for k in range(len(leaves))}
    reviews = []
    seen = set()
    while len(reviews) < n_reviews:
        u = rng.choice(users)
        leaf_idx = rng.choice(taste[u]) if rng.random() < 0.85 else rng.randrange(len(leaves))
        item = rng.choice(by_leaf[leaf_idx])
        if (u, item["asin"]) in seen:
            continue
        seen.add((u, item["asin"]))
        leaf = leaves[leaf_idx]
        vocab = CLUSTER_WORDS[leaf] + COMMON
        text = rng.choice(OPENERS) + ". " + " ".join(
            sentence(rng, vocab) for _ in range(rng.randint(1, 2)))
        if len(reviews) % 97 == 13:
            text = ""
        reviews.append({"reviewerID": u, "asin": item["asin"], "reviewText": text,
                        "overall": float(rng.randint(1, 5)),
                        "unixReviewTime": 1400000000 + len(reviews) * 3600})
    return items, reviews


def serum_fixture():
    leaf = ["Beauty", "Skin Care", "Serum"]
    items = [
        {"asin": "A", "title": "Ultra Hydrating Face Serum", "categories": [leaf],
         "brand": "Lumiere", "description": "Hyaluronic acid serum for deep hydration."},
        {"asin": "B", "title": "Collagen Plumping Serum", "categories": [leaf],
         "brand": "Dermaline", "description": "Collagen boost for plump, firm skin."},
        {"asin": "C", "title": "Deep Hydrating Serum", "categories": [leaf],
         "brand": "Aquavera", "description": "Lightweight hydrating serum, vegan."},
    ]
    reviews = [
        {"reviewerID": "U1", "asin": "A", "reviewText": "Very hydrating", "overall": 5.0},
        {"reviewerID": "U2", "asin": "B",
         "reviewText": "Leaves my skin hydrated, not greasy, subtle scent", "overall": 4.0},
        {"reviewerID": "U1", "asin": "C", "reviewText": "Hydrating and light", "overall": 5.0},
    ]
    return items, reviews


def directional_fixture(rng, n_groups=6, items_per_group=8, users_per_group=10):
    # Every item has its own brand and type, so the base graph only links
    # users to items through purchases. Descriptions and reviews share a
    # group vocabulary; the topic graph adds user-word-item paths.
    items, reviews = [], []
    group_words = [["alpha%d" % g, "beta%d" % g, "gamma%d" % g, "delta%d" % g] for g in range(n_groups)]
    for g in range(n_groups):
        for j in range(items_per_group):
            asin = "D%02d%02d" % (g, j)
            w = group_words[g]
            items.append({"asin": asin, "title": "Item %s" % asin,
                          "categories": [["Catalog", "Type %s" % asin]],
                          "brand": "Brand %s" % asin,
                          "description": " ".join(w[:3])})
        for u in range(users_per_group):
            user = "G%02dU%02d" % (g, u)
            picks = rng.sample(range(items_per_group), 4)
            for j in picks:
                reviews.append({"reviewerID": user, "asin": "D%02d%02d" % (g, j),
                                "reviewText": " ".join(group_words[g][1:]), "overall": 5.0})
    return items, reviews


def write_jsonl(path, rows, extra_lines=()):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")
        for line in extra_lines:
            f.write(line + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--root", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()

    rng = random.Random(20261016)
    items, reviews = main_fixture(rng)
    items.append(dict(items[10]))  # duplicate asin
    write_jsonl(os.path.join(args.root, "fixture", "metadata.jsonl"), items,
                extra_lines=['{"title": "no asin"}', "{not json"])
    reviews.append({"reviewerID": "U0001", "asin": "B9999999", "reviewText": "unknown item",
                    "overall": 3.0})
    write_jsonl(os.path.join(args.root, "fixture", "reviews.jsonl"), reviews,
                extra_lines=["[1, 2"])

    items, reviews = serum_fixture()
    write_jsonl(os.path.join(args.root, "serum", "metadata.jsonl"), items)
    write_jsonl(os.path.join(args.root, "serum", "reviews.jsonl"), reviews)

    items, reviews = directional_fixture(random.Random(7))
    write_jsonl(os.path.join(args.root, "directional", "metadata.jsonl"), items)
    write_jsonl(os.path.join(args.root, "directional", "reviews.jsonl"), reviews)


if __name__ == "__main__":
    main()
