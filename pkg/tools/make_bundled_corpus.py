"""Regenerate the synthetic corpus shipped in src/smtpcfg/data."""

from pathlib import Path

from smtpcfg.corpus import dump_corpus
from smtpcfg.synthetic import make_corpus

if __name__ == "__main__":
    records = make_corpus(40, 8, seed=2024, temperatures=(0.3, 0.9), unparseable=5)
    for r in records:
        r.extra["model"] = "synthetic-lm"
    path = Path(__file__).resolve().parents[1] / "src" / "smtpcfg" / "data" / "synthetic.jsonl"
    dump_corpus(records, path)
    print(path)
