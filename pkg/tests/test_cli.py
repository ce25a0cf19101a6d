import csv
import io
import json
import subprocess
import sys

import pytest

from affordance.affordance import make_axis, rank_manipulable
from affordance.cli import build_parser, experiment_config, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_affordances(capsys):
    code, out, err = run(capsys, "affordances", "sword", "door", "-n", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("sword: ") and len(lines[0].split(": ")[1].split(", ")) == 5
    assert "unlock" in lines[1]


def test_missing_tokens_warn_and_exit_codes(capsys):
    code, out, err = run(capsys, "affordances", "sword", "qqqq")
    assert code == 0 and "qqqq" in err
    code, out, err = run(capsys, "affordances", "qqqq")
    assert code != 0
    code, out, err = run(capsys, "manipulability", "qqqq", "zzzz")
    assert code != 0 and "zzzz" in err


def test_manipulability_matches_rank(capsys, store):
    words = ["mountain", "pebble", "lamp", "forest", "key", "qqqq"]
    code, out, _ = run(capsys, "manipulability", *words)
    assert code == 0
    order = [line.split("\t")[0] for line in out.splitlines()]
    assert order == rank_manipulable(store, make_axis(store, "forest", "tree"), words)


def test_project2d_endpoints(capsys, tmp_path):
    dest = tmp_path / "p.csv"
    code, _, _ = run(capsys, "project2d", "--xaxis", "forest,tree", "--yaxis", "king,queen",
                     "forest", "tree", "--out", str(dest))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(dest.read_text())))
    assert [r["token"] for r in rows] == ["forest", "tree"]
    assert float(rows[0]["x"]) > float(rows[1]["x"])
    assert all(len(r["x"].split(".")[1]) == 6 for r in rows)


def test_cooc_build(capsys, tmp_path):
    corpus = tmp_path / "c.txt"
    corpus.write_text("ride the horse\nride a horse then feed the horse\n")
    dest = tmp_path / "t.csv"
    code, out, _ = run(capsys, "cooc", "build", str(corpus), "--out", str(dest))
    assert code == 0
    text = dest.read_text().splitlines()
    assert text[0] == "#radius=9" and "ride,horse,3" in text


def test_compare_and_replay(capsys, tmp_path):
    out = tmp_path / "res"
    code, stdout, _ = run(capsys, "compare", "--world", "cottage", "--strategy", "baseline,affordance",
                          "--epochs", "3", "--steps", "30", "--runs", "2", "--out", str(out))
    assert code == 0 and stdout.startswith("strategy,runs")
    assert (out / "baseline_run1.csv").exists() and (out / "affordance_run1.csv").exists()
    code, stdout, _ = run(capsys, "train", "--world", "cottage", "--strategy", "affordance",
                          "--epochs", "5", "--steps", "30", "--runs", "1", "--out", str(tmp_path / "t"))
    assert code == 0
    q = tmp_path / "t" / "affordance_run0_qtable.csv"
    code, stdout, _ = run(capsys, "replay", "--world", "cottage", "--qtable", str(q), "--steps", "20")
    assert code == 0 and "final score:" in stdout


def test_every_config_key_has_a_flag(tmp_path):
    from dataclasses import fields
    from affordance.harness import ExperimentConfig
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices["compare"]
    flags = {opt for a in sub._actions for opt in a.option_strings}
    for f in fields(ExperimentConfig):
        name = f.name
        if name == "external":
            assert "--external" in flags
            continue
        alias = {"strategies": "--strategies"}.get(name, "--" + name)
        assert alias in flags, name


def test_flags_override_config_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"world": "vault", "epochs": 9, "gamma": 0.5, "intrinsic": True}))
    args = build_parser().parse_args(["compare", "--config", str(p), "--epochs", "2", "--no-intrinsic",
                                      "--verb-budget", "12", "--strategy", "random", "--strategy",
                                      "baseline", "--axis", "mountain,pebble"])
    c = experiment_config(args)
    assert (c.world, c.epochs, c.gamma, c.intrinsic, c.verb_budget) == ("vault", 2, 0.5, False, 12)
    assert c.strategies == ["random", "baseline"] and c.axis == ["mountain", "pebble"]
    args = build_parser().parse_args(["compare", "--external", "dfrotz -m zork1.z5", "--max-score", "350"])
    c = experiment_config(args)
    assert c.world is None and c.external == {"argv": ["dfrotz", "-m", "zork1.z5"], "max_score": 350}


def test_config_errors_exit_nonzero(capsys, tmp_path):
    code, _, err = run(capsys, "compare", "--world", "cottage", "--epochs", "0", "--out", str(tmp_path))
    assert code == 2 and "epochs" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "affordance", "affordances", "horse", "-n", "3"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("horse: ")
