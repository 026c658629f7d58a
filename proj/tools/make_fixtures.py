#!/usr/bin/env python3
"""Regenerates the bundled fixtures in data/. Output is deterministic."""

import csv
import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

THEMES = {
    "sci.space": [
        "orbit", "rocket", "launch", "shuttle", "satellite", "lunar", "mission", "nasa", "spacecraft",
        "astronaut", "telescope", "payload", "booster", "planetary", "mars", "probe", "gravity", "capsule",
    ],
    "sci.crypt": [
        "encryption", "cipher", "key", "privacy", "clipper", "escrow", "algorithm", "crypto", "decryption",
        "security", "wiretap", "chip", "password", "secure", "protocol", "signature", "government", "backdoor",
    ],
    "rec.autos": [
        "engine", "dealer", "transmission", "brake", "sedan", "mileage", "tire", "horsepower", "warranty",
        "clutch", "gasoline", "highway", "driver", "radiator", "exhaust", "wheel", "coupe", "mechanic",
    ],
    "sci.med": [
        "patient", "doctor", "disease", "symptom", "treatment", "clinic", "diagnosis", "medication", "therapy",
        "infection", "vitamin", "surgery", "allergy", "nutrition", "physician", "dosage", "chronic", "immune",
    ],
}

FILLER = ["people", "think", "question", "anyone", "really", "thing", "point", "years", "good", "know"]
# connectors are stopwords only, so the theme vocabulary carries the content
TEMPLATES = [
    "The {a} and the {b} were about {c}.",
    "Was it the {a}, or the {b}, or {c}?",
    "There is {a} in {b} with {c}.",
    "Some {a} for {b} from {c}.",
    "Then {a}, {b} and more {c} again.",
]

def weighted_words(rng, vocab, count):
    # Zipf-like weights give each document a few dominant words.
    weights = [1.0 / (i + 1) for i in range(len(vocab))]
    order = vocab[:]
    rng.shuffle(order)
    return rng.choices(order, weights=weights, k=count)


def synthetic_corpus(rng):
    docs = []
    for label, vocab in THEMES.items():
        for i in range(15):
            sentences = []
            for _ in range(6):
                a, b, c = weighted_words(rng, vocab, 3)
                if rng.random() < 0.15:
                    c = rng.choice(FILLER)
                sentences.append(rng.choice(TEMPLATES).format(a=a, b=b, c=c))
            docs.append({"id": f"{label}-{i:02d}", "text": " ".join(sentences), "label": label})
    rng.shuffle(docs)
    return docs


REFERENCE_LISTS = [
    ("one", ["sale", "discount", "price", "pricing", "prices", "purchase", "dealer", "sales", "offer", "shipping"]),
    ("two", ["space", "launch", "spacecraft", "lunar", "nasa", "satellite", "orbit", "rocket", "moon", "satellites"]),
    ("three", ["encryption", "security", "cryptography", "key", "privacy", "crypto", "decryption", "data", "secure",
               "vulnerabilities"]),
]

CATEGORIES = [
    "comp.graphics", "comp.os.ms-windows.misc", "comp.sys.ibm.pc.hardware", "comp.sys.mac.hardware",
    "comp.windows.x", "talk.politics.guns", "talk.politics.mideast", "misc.forsale", "talk.politics.misc",
    "talk.religion.misc", "rec.sport.baseball", "rec.sport.hockey", "rec.autos", "alt.atheism",
    "soc.religion.christian", "sci.crypt", "sci.electronics", "sci.med", "sci.space", "rec.motorcycles",
]


def agreement_rows():
    # 7 unanimous rows, 3 with three agreeing, 6 with two agreeing, 4 with no agreement:
    # at least 2 -> 16/20, at least 3 -> 10/20, all 4 -> 7/20.
    c = CATEGORIES
    rows = []
    for i in range(7):
        rows.append([c[i]] * 4)
    for i in range(7, 10):
        rows.append([c[i]] * 3 + [c[i + 1]])
    for i in range(10, 16):
        rows.append([c[i], c[i], c[(i + 1) % 20], c[(i + 2) % 20]])
    for i in range(16, 20):
        rows.append([c[i], c[(i + 1) % 20], c[(i + 2) % 20], c[(i + 3) % 20]])
    return rows


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def write_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)


def main():
    DATA.mkdir(exist_ok=True)
    rng = random.Random(20240601)
    write_jsonl(DATA / "synthetic60.jsonl", synthetic_corpus(rng))

    base = {
        "corpus": {"kind": "jsonl", "path": "synthetic60.jsonl"},
        "preprocess": {"min_token_len": 3, "stopword_list_id": "english-standard", "normalize_mode": "stem"},
        "provider": {"kind": "mock", "model": "mock-chat"},
        "embedder": {"kind": "mock", "model": "mock-embed"},
        "extraction": {"max_phrases_per_doc": 5, "coherence_threshold": 0.10, "prompt_version": "extract-v1"},
        "clustering": {"mode": "auto", "seed": 42},
        "eval": {"enabled": True},
        "report": {"formats": ["json", "csv", "md"]},
        "concurrency": 4,
    }
    (DATA / "example_config.json").write_text(json.dumps(base, indent=2) + "\n")
    sweep = json.loads(json.dumps(base))
    sweep["clustering"] = {"mode": "fixed", "k_sweep": [10, 20, 30, 40, 50], "seed": 42}
    (DATA / "sweep_config.json").write_text(json.dumps(sweep, indent=2) + "\n")

    write_jsonl(DATA / "reference_topics.jsonl", [{"topic_id": t, "words": w} for t, w in REFERENCE_LISTS])
    # each list's words co-occur in two dedicated documents and nowhere else
    docs = []
    for t, words in REFERENCE_LISTS:
        for j in range(2):
            docs.append({"id": f"{t}-{j}", "text": " ".join(words)})
    write_jsonl(DATA / "reference_corpus.jsonl", docs)

    write_csv(DATA / "agreement_labels.csv", agreement_rows())
    write_csv(DATA / "agreement_unanimous.csv", [[c] * 4 for c in CATEGORIES])


if __name__ == "__main__":
    main()
