import json

import pytest

from smtpcfg.cli import EXIT_CORPUS, EXIT_OK, EXIT_USAGE, main
from smtpcfg.corpus import bundled_corpus_path, dump_corpus
from smtpcfg.synthetic import make_corpus


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("c") / "corpus.jsonl"
    dump_corpus(make_corpus(14, 5, seed=11, temperatures=(0.4, 1.0), unparseable=2), path)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_no_command(capsys):
    assert run(capsys)[0] == EXIT_USAGE


def test_unknown_flag(capsys):
    assert run(capsys, "coverage", "--bogus")[0] == EXIT_USAGE


def test_missing_corpus(capsys, tmp_path):
    assert run(capsys, "parse", str(tmp_path / "none.jsonl"))[0] == EXIT_CORPUS


def test_malformed_corpus(capsys, tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"question_id": "q"}\n')
    code, _, err = run(capsys, "metrics", str(p))
    assert code == EXIT_CORPUS and "line 1" in err


def test_bad_config(capsys, tmp_path, corpus):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"folds": 1}))
    assert run(capsys, "metrics", corpus, "--config", str(cfg))[0] == EXIT_USAGE


def test_parse(capsys, corpus):
    code, out, err = run(capsys, "parse", corpus)
    assert code == EXIT_OK
    assert "programs 70  parsed 65  failed 5" in err
    assert out.startswith("question_id,")


def test_metrics(capsys, corpus):
    code, out, _ = run(capsys, "metrics", corpus)
    plain = out.splitlines()
    code_v, verbose, _ = run(capsys, "metrics", corpus, "--verbose")
    assert code == code_v == EXIT_OK
    assert len(plain) == 14 and "grammar_entropy" in plain[0]
    assert len(verbose.splitlines()[0]) > len(plain[0])


def test_evaluate_stdout(capsys, corpus):
    code, out, _ = run(capsys, "evaluate", corpus)
    assert code == EXIT_OK
    assert "# task: ground_truth" in out and "# task: consistency" in out


def test_analyze_writes_files(capsys, corpus, tmp_path):
    out = tmp_path / "a"
    assert run(capsys, "analyze", corpus, "--out", str(out))[0] == EXIT_OK
    for name in ("metrics.csv", "labels.csv", "exclusions.csv", "report_ground_truth.csv", "report_consistency.json"):
        assert (out / name).is_file()
    assert "q0002" in (out / "exclusions.csv").read_text()
    assert any((out / "reliability" / "ground_truth").iterdir())


def test_fuse(capsys, corpus, tmp_path):
    out = tmp_path / "f"
    code, _, err = run(capsys, "fuse", corpus, "--out", str(out), "--seed", "3")
    assert code == EXIT_OK and "out-of-fold auroc" in err
    model = (out / "model.txt").read_text().splitlines()
    assert model[-1].startswith("__bias__ ")
    assert (out / "folds.csv").read_text().count("\n") == 14


def test_solve_and_benchmark(capsys, corpus, tmp_path):
    solver = tmp_path / "s"
    solver.write_text("#!/bin/sh\ncat > /dev/null\necho unsat\n")
    solver.chmod(0o755)
    dest = tmp_path / "solved.jsonl"
    code, _, _ = run(capsys, "solve", corpus, "--output", str(dest), "--solver", str(solver), "--overwrite")
    assert code == EXIT_OK
    lines = [json.loads(l) for l in dest.read_text().splitlines()]
    assert {s["solver_verdict"] for r in lines for s in r["samples"]} == {"unsat"}
    code, out, _ = run(capsys, "benchmark", str(dest))
    assert code == EXIT_OK
    header, row = out.splitlines()
    assert header.startswith("dataset,model,accuracy")
    tp, tn, fp, fn = map(int, row.split(",")[-4:])
    assert tp == fp == 0 and tn + fn == 14


def test_solve_missing_solver(capsys, corpus, tmp_path):
    code = run(capsys, "solve", corpus, "--output", str(tmp_path / "x.jsonl"), "--solver", "no-such-solver-xyz", "--overwrite")[0]
    assert code == 3


def test_temperature(capsys, corpus):
    code, out, _ = run(capsys, "temperature", corpus)
    assert code == EXIT_OK
    assert len(out.splitlines()) == 1 + 13 * 2


def test_coverage(capsys):
    code, out, _ = run(capsys, "coverage", "--N", "16", "--H", "4")
    assert code == EXIT_OK
    assert out.splitlines()[1].startswith("16,4,0.5671432904")


@pytest.mark.parametrize("kind,extra", [("gaussian", []), ("exponential", ["--lam", "0.5"]), ("uniform", [])])
def test_schedule(capsys, kind, extra):
    code, out, _ = run(capsys, "schedule", "--kind", kind, "--n", "5", *extra)
    assert code == EXIT_OK
    rows = out.splitlines()
    assert rows[0] == "index,temperature" and len(rows) == 6


def test_schedule_needs_lambda(capsys):
    assert run(capsys, "schedule", "--kind", "exponential", "--n", "5")[0] == EXIT_USAGE


def test_bundled_corpus_parses(capsys):
    code, _, err = run(capsys, "parse", str(bundled_corpus_path()))
    assert code == EXIT_OK and "programs 320" in err
