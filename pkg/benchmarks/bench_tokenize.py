"""Compare the compiled and pure-Python scanners on the bundled corpus.

    python3 benchmarks/bench_tokenize.py [--repeat 20]
"""

import argparse
import time

from smtpcfg import _pyscan
from smtpcfg.corpus import bundled_corpus_path, load_corpus
from smtpcfg.parser import parse_program
from smtpcfg.tokens import tokenize

try:
    from smtpcfg import _cscan
except ImportError:
    _cscan = None


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    programs = [s.smt_program for r in load_corpus(bundled_corpus_path()) for s in r.samples]
    text = "\n".join(programs)
    print(f"{len(programs)} programs, {len(text)} characters, best of {args.repeat}")

    backends = [("python", _pyscan.scan)]
    if _cscan is not None:
        backends.insert(0, ("cython", _cscan.scan))
        assert _cscan.scan(text) == _pyscan.scan(text), "scanners disagree"
    else:
        print("compiled scanner not built; timing the Python scanner only")

    times = {}
    for name, scan in backends:
        times[name] = best_of(lambda: [scan(p) for p in programs], args.repeat)
        print(f"scan      {name:7s} {times[name] * 1e3:9.2f} ms")
    for name, scan in backends:
        t = best_of(lambda: [tokenize(p, scanner=scan) for p in programs], args.repeat)
        print(f"tokenize  {name:7s} {t * 1e3:9.2f} ms")

    def parse_all():
        for p in programs:
            try:
                parse_program(tokenize(p))
            except Exception:
                pass

    print(f"tokenize+parse (import-time backend) {best_of(parse_all, max(1, args.repeat // 4)) * 1e3:9.2f} ms")
    if "cython" in times:
        print(f"scan speedup {times['python'] / times['cython']:.1f}x")


if __name__ == "__main__":
    main()
