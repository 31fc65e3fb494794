#!/usr/bin/env python3
"""Writes the synthetic Conj Dev/Test fixtures under data/.

Label totals and bucket sizes are fixed per split; the sentences
themselves are templated. Re-running reproduces the files byte for
byte.
"""

import argparse
import json
import random
from pathlib import Path

SUBJECTS = ["Maria", "The committee", "The visitors", "Our neighbor", "The engineer", "The town",
            "The farmer", "The museum", "The orchestra", "The student", "The company", "The captain"]
VERBS = ["visited", "painted", "repaired", "described", "studied", "collected", "sold", "opened",
         "planted", "recorded", "inspected", "praised"]
NOUNS = ["bridge", "library", "garden", "harbor", "castle", "river", "school", "station", "market",
         "tower", "chapel", "valley", "theater", "archive", "stadium", "factory", "orchard", "lighthouse"]
QUANTIFIERS = ["all", "some", "several", "many", "most", "every", "each", "few"]
NEGATIONS = ["not", "never"]

SPLITS = {
    # labels: entailment, neutral, contradiction
    # buckets: and, or, but, multiple, quantifier, negation
    "dev": dict(n=623, labels=(204, 281, 138), conj=(320, 293, 99), multiple=152, quant=131, neg=70,
                non_boolean=211),
    "test": dict(n=1000, labels=(332, 467, 201), conj=(537, 471, 135), multiple=229, quant=175, neg=101,
                 non_boolean=None),
}


def conjunction_plan(rng, n, conj, multiple):
    """Per-record list of conjunction tokens matching the bucket totals."""
    a, o, b = conj
    extra = a + o + b - n  # records carrying two distinct conjunction types
    repeats = multiple - extra  # records repeating one type
    assert 0 <= extra <= n and repeats >= 0, (n, conj, multiple)
    # Two-type records take pairs from the largest remaining pools.
    left = {"and": a, "or": o, "but": b}
    plans = []
    for _ in range(extra):
        first, second = sorted(left, key=lambda k: -left[k])[:2]
        left[first] -= 1
        left[second] -= 1
        plans.append([first, second])
    singles = [w for w, c in left.items() for _ in range(c)]
    assert len(plans) + len(singles) == n
    plans += [[w] for w in singles]
    rng.shuffle(plans)
    single_idx = [i for i, p in enumerate(plans) if len(p) == 1]
    for i in rng.sample(single_idx, repeats):
        plans[i] = plans[i] * 2
    return plans


def flags(rng, n, k):
    out = [True] * k + [False] * (n - k)
    rng.shuffle(out)
    return out


def sentence(rng, conjs, quant, neg):
    subj = rng.choice(SUBJECTS)
    if quant:
        subj = rng.choice(QUANTIFIERS).capitalize() + " " + rng.choice(NOUNS) + " visitors"
    verb = rng.choice(VERBS)
    nouns = rng.sample(NOUNS, len(conjs) + 1)
    words = [subj]
    words += ["has", rng.choice(NEGATIONS), verb] if neg else [verb]
    words += ["the", nouns[0]]
    for c, noun in zip(conjs, nouns[1:]):
        words += [c, "the", noun]
    premise = " ".join(words) + "."
    # Hypothesis drops the first conjunct.
    hyp_words = words[: words.index("the")] + words[words.index("the") + 3:]
    hypothesis = " ".join(hyp_words) + "."
    return premise, hypothesis


def build(name, cfg, seed):
    rng = random.Random(f"{seed}:{name}")
    n = cfg["n"]
    plans = conjunction_plan(rng, n, cfg["conj"], cfg["multiple"])
    quant = flags(rng, n, cfg["quant"])
    neg = flags(rng, n, cfg["neg"])
    labels = ["entailment"] * cfg["labels"][0] + ["neutral"] * cfg["labels"][1] + \
        ["contradiction"] * cfg["labels"][2]
    rng.shuffle(labels)
    boolean = flags(rng, n, n - cfg["non_boolean"]) if cfg["non_boolean"] is not None else None
    rows = []
    for i in range(n):
        premise, hypothesis = sentence(rng, plans[i], quant[i], neg[i])
        row = {"id": f"{name}-{i + 1:04d}", "premise": premise, "hypothesis": hypothesis,
               "label": labels[i], "label_source": "human"}
        if boolean is not None:
            row["boolean"] = boolean[i]
        rows.append(row)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    ap.add_argument("--seed", type=int, default=2020)
    args = ap.parse_args()
    for name, cfg in SPLITS.items():
        rows = build(name, cfg, args.seed)
        path = args.out / f"conj_{name}.jsonl"
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))
        print(f"wrote {len(rows)} records to {path}")


if __name__ == "__main__":
    main()
