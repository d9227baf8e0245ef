"""Regenerates the mini parallel corpus and its translation table.

Source sentences come from a small topical grammar. Target sentences are
word-for-word renderings into an invented language that puts adjectives
after nouns. Output is deterministic.

    python3 generate.py
"""

import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
N_SENTENCES = 1000

TOPICS = {
    "farm": {
        "agents": ["farmer", "dog", "horse", "cow", "boy", "girl"],
        "verbs": ["feeds", "watches", "follows", "carries", "finds"],
        "objects": ["hay", "apple", "bucket", "fence", "lamb", "egg"],
        "adjectives": ["old", "brown", "small", "happy", "muddy"],
        "places": ["barn", "field", "stable", "meadow"],
    },
    "city": {
        "agents": ["driver", "woman", "man", "police", "student", "child"],
        "verbs": ["buys", "sells", "sees", "takes", "loses"],
        "objects": ["ticket", "newspaper", "coffee", "umbrella", "phone", "key"],
        "adjectives": ["busy", "tall", "grey", "noisy", "modern"],
        "places": ["street", "station", "shop", "office"],
    },
    "sea": {
        "agents": ["sailor", "fisherman", "captain", "gull", "whale", "crab"],
        "verbs": ["catches", "pulls", "throws", "sees", "follows"],
        "objects": ["net", "fish", "rope", "anchor", "shell", "wave"],
        "adjectives": ["blue", "salty", "wet", "cold", "deep"],
        "places": ["harbor", "boat", "beach", "island"],
    },
    "school": {
        "agents": ["teacher", "pupil", "student", "girl", "boy", "principal"],
        "verbs": ["reads", "writes", "opens", "finds", "loses"],
        "objects": ["book", "pencil", "letter", "map", "lesson", "notebook"],
        "adjectives": ["clever", "quiet", "young", "new", "small"],
        "places": ["classroom", "library", "garden", "hall"],
    },
    "kitchen": {
        "agents": ["cook", "mother", "father", "cat", "child", "woman"],
        "verbs": ["cooks", "cuts", "eats", "washes", "carries"],
        "objects": ["bread", "soup", "knife", "plate", "onion", "cheese"],
        "adjectives": ["hot", "fresh", "hungry", "clean", "sweet"],
        "places": ["kitchen", "table", "oven", "cellar"],
    },
}
FUNCTION = ["the", "a", "in", "near", "and", "with", "today", "often"]

# words the table renders as phrases, and words it has no entry for
MULTIWORD = {"principal": "ozu velan", "police": "kar mitu", "notebook": "lipa sorin",
             "umbrella": "tasu remi", "anchor": "noru feka"}
MISSING = {"muddy", "gull", "cellar", "modern", "shell"}

SYLLABLES = [c + v for c in "bdfgklmnprstvz" for v in "aeiou"]


def invent_lexicon(words, rng):
    taken, lex = set(), {}
    for w in words:
        n = 2 if len(w) < 6 else 3
        while True:
            t = "".join(rng.choice(SYLLABLES) for _ in range(n))
            if t not in taken:
                break
        taken.add(t)
        lex[w] = t
    return lex


def sentence(rng):
    topic = TOPICS[rng.choice(sorted(TOPICS))]
    adj = topic["adjectives"]
    src, tgt_order = [], []

    def np(noun):
        det = rng.choice(["the", "a"])
        if rng.random() < 0.5:
            a = rng.choice(adj)
            src.extend([det, a, noun])
            tgt_order.extend([det, noun, a])
        else:
            src.extend([det, noun])
            tgt_order.extend([det, noun])

    np(rng.choice(topic["agents"]))
    if rng.random() < 0.2:
        src.append("often")
        tgt_order.append("often")
    verb = rng.choice(topic["verbs"])
    src.append(verb)
    tgt_order.append(verb)
    np(rng.choice(topic["objects"]))
    if rng.random() < 0.3:
        src.append("and")
        tgt_order.append("and")
        np(rng.choice(topic["objects"]))
    if rng.random() < 0.6:
        prep = rng.choice(["in", "near", "with"]) if rng.random() < 0.5 else "in"
        src.append(prep)
        tgt_order.append(prep)
        np(rng.choice(topic["places"]))
    if rng.random() < 0.15:
        src.append("today")
        tgt_order.append("today")
    return src, tgt_order


def main():
    rng = random.Random(20240917)
    vocab = sorted({w for t in TOPICS.values() for ws in t.values() for w in ws} | set(FUNCTION))
    lex = invent_lexicon(vocab, rng)

    src_lines, tgt_lines = [], []
    for _ in range(N_SENTENCES):
        src, order = sentence(rng)
        src_lines.append(" ".join(src).capitalize() + ".")
        tgt_lines.append(" ".join(lex[w] for w in order).capitalize() + ".")

    (HERE / "source.txt").write_text("\n".join(src_lines) + "\n", encoding="utf-8")
    (HERE / "target.txt").write_text("\n".join(tgt_lines) + "\n", encoding="utf-8")
    with open(HERE / "translations.tsv", "w", encoding="utf-8") as f:
        for w in vocab:
            if w in MISSING:
                continue
            f.write(f"{w}\t{MULTIWORD.get(w, lex[w])}\n")


if __name__ == "__main__":
    main()
