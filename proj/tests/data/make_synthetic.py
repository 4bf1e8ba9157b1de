#!/usr/bin/env python3
"""Regenerates synthetic200.jsonl: 100 human/rewrite pairs whose classes
differ only in a small set of planted marker words."""

import json
import random
import sys

FILLER = """the a of and to in was he she it his her that had with for on as at by
but not from they which be one said were all we when there an been would so no
if out them more up into could their what some time then man door room house
night road light hand eyes face voice window street car letter money police
inspector doctor lady gentleman stairs garden table chair floor wall clock glass
paper book train station river bridge town village church inn hotel office desk
knife gun shot body blood murder crime clue alibi motive witness suspect answer
question morning evening afternoon hour minute moment day week year old young
little long great small dark cold quiet sudden strange silent heavy open shut
looked walked turned stood sat came went saw heard knew thought found told asked
took gave left kept held opened closed waited watched followed reached stopped
moved spoke replied nodded smiled laughed frowned shook fell rose""".split()

NAMES = """Poirot Hastings Japp Marple Holmes Watson Lestrade Ashby Barton Crale
Dorset Ellery Fenwick Garth Hale Ingram Jessop Kemble Lydgate Morley""".split()

PLANTED = {
    0: ["whilst", "upon", "shall", "presently", "fancy", "motor", "wireless", "fellow"],
    1: ["delved", "tapestry", "palpable", "amidst", "intricate", "unraveling", "pivotal", "enigmatic"],
}


def sentence(rng, shared, planted, length):
    words = []
    for _ in range(length):
        r = rng.random()
        if r < 0.06:
            words.append(rng.choice(planted))
        elif r < 0.12:
            words.append(rng.choice(shared))
        else:
            words.append(rng.choice(FILLER))
    words[0] = words[0][0].upper() + words[0][1:]
    punct = [",", ";"]
    text = ""
    for i, w in enumerate(words):
        text += ("" if i == 0 else " ") + w
        if 0 < i < length - 2 and rng.random() < 0.08:
            text += rng.choice(punct)
    return text + "."


def excerpt(rng, shared, planted):
    parts, total = [], 0
    target = rng.randint(92, 125)
    while total < target - 8:
        n = rng.randint(8, 18)
        parts.append(sentence(rng, shared, planted, n))
        total += n
    return " ".join(parts)


def main(path, seed=20240601, pairs=100):
    rng = random.Random(seed)
    with open(path, "w", encoding="utf-8") as out:
        for k in range(pairs):
            shared = rng.sample(NAMES, 2)
            sid = "synthetic-%05d" % k
            human = excerpt(rng, shared, PLANTED[0])
            rewrite = excerpt(rng, shared, PLANTED[1])
            for sample in (
                {"id": sid, "text": human, "label": 0, "source": "synthetic"},
                {"id": sid + "-gen", "text": rewrite, "label": 1, "source": "rewritten:" + sid},
            ):
                sample["word_count"] = len(sample["text"].split())
                out.write(json.dumps(sample, ensure_ascii=False, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "synthetic200.jsonl")
