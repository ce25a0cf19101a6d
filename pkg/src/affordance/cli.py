"""Command line interface.

    affordance affordances sword -n 10
    affordance manipulability pebble mountain lamp
    affordance project2d --xaxis king,queen --yaxis woman,man king queen boy girl
    affordance cooc build corpus.txt --out cooc.csv
    affordance train --world cottage --strategy affordance --epochs 50 --out results/
    affordance compare --world vault --strategy baseline,affordance --runs 10 --out results/
    affordance replay --world cottage --qtable results/affordance_run0_qtable.csv
"""

from __future__ import annotations

import argparse
import logging
import shlex
import sys
from dataclasses import fields
from pathlib import Path

from .action_space import CONCEPTNET_CACHE_ENV, build_cooccurrence
from .affordance import (CanonicalPairSet, DEFAULT_AXIS, affordant_verbs, build_affordance_model,
                         make_axis, manipulability_score, project_2d, rank_manipulable,
                         write_projection_csv)
from .embeddings import Lexicon, TokenNotFound, load_embeddings
from .harness import ExperimentConfig, ExperimentError, replay, run_experiment
from .synthetic import DATA_DIR, bundled_embeddings_path

logger = logging.getLogger("affordance")


def _flag(name: str) -> list[str]:
    dashed = "--" + name.replace("_", "-")
    return [dashed, "--" + name] if "_" in name else [dashed]


def _add_resource_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("word vectors and lexicon")
    g.add_argument("--embeddings", help="word vector file (default: bundled synthetic vectors)")
    g.add_argument(*_flag("embeddings_format"), dest="embeddings_format",
                   choices=["word2vec-text", "glove-text"], default=None)
    g.add_argument("--verbs", help="verb list, one per line, most frequent first")
    g.add_argument("--nouns", help="noun list, one per line, most frequent first")
    g.add_argument("--adjectives", help="adjective list, one per line")
    g.add_argument("--pairs", help="canonical 'verb noun' pair file")
    g.add_argument("--axis", help="manipulability axis as 'positive,negative' (default forest,tree)")


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    _add_resource_flags(p)
    p.add_argument("--config", help="JSON config; flags override its keys")
    p.add_argument("--world", help="world JSON file or bundled world name (cottage, library, vault)")
    p.add_argument("--external", help="interpreter command line to drive instead of a scripted world")
    p.add_argument("--prompt", help="prompt regex for --external (default '>')")
    p.add_argument(*_flag("score_pattern"), dest="score_pattern", help="score regex for --external")
    p.add_argument("--timeout", type=float, help="read timeout in seconds for --external")
    p.add_argument(*_flag("max_score"), dest="max_score", type=int,
                   help="maximum score of the --external game")
    p.add_argument("--strategy", "--strategies", action="append",
                   help="strategy name(s), repeatable or comma separated")
    for name, typ in (("epochs", int), ("steps", int), ("runs", int), ("seed", int), ("jobs", int),
                      ("gamma", float), ("epsilon_initial", float), ("epsilon_decay", float),
                      ("epsilon_floor", float), ("intrinsic_bonus", float), ("manipulation_k", int),
                      ("verb_budget", int), ("noun_budget", int), ("cooc_threshold", int),
                      ("freeform_top", int)):
        p.add_argument(*_flag(name), dest=name, type=typ)
    p.add_argument("--intrinsic", action=argparse.BooleanOptionalAction, default=None,
                   help="add a bonus for states never seen before")
    p.add_argument("--cooccurrence", help="co-occurrence table CSV (for the cooccurrence strategy)")
    p.add_argument(*_flag("conceptnet_cache"), dest="conceptnet_cache",
                   help=f"ConceptNet cache directory (or set {CONCEPTNET_CACHE_ENV})")
    p.add_argument(*_flag("conceptnet_offline"), dest="conceptnet_offline",
                   action=argparse.BooleanOptionalAction, default=None,
                   help="never contact the live ConceptNet API (default on)")
    p.add_argument("--out", help="output directory")


def experiment_config(args) -> ExperimentConfig:
    overrides = {}
    names = {f.name for f in fields(ExperimentConfig)}
    for name in names:
        val = getattr(args, name, None)
        if val is not None:
            overrides[name] = val
    if args.strategy:
        overrides["strategies"] = [s for item in args.strategy for s in item.split(",") if s]
    if args.axis:
        overrides["axis"] = args.axis.split(",")
    if args.external:
        ext = {"argv": shlex.split(args.external)}
        for key in ("prompt", "score_pattern", "timeout", "max_score"):
            if getattr(args, key) is not None:
                ext[key] = getattr(args, key)
        overrides["external"] = ext
        overrides["world"] = None
    if args.config:
        return ExperimentConfig.from_json(args.config, **overrides)
    return ExperimentConfig.from_dict(overrides)


def _store(args):
    return load_embeddings(args.embeddings or bundled_embeddings_path(),
                           args.embeddings_format or "word2vec-text")


def _lexicon(args) -> Lexicon:
    return Lexicon.from_files(args.verbs or DATA_DIR / "verbs.txt", args.nouns or DATA_DIR / "nouns.txt",
                              args.adjectives or DATA_DIR / "adjectives.txt")


def _axis_pair(text: str | None, default=DEFAULT_AXIS) -> tuple[str, str]:
    if not text:
        return default
    parts = text.split(",")
    if len(parts) != 2:
        raise SystemExit(f"axis must be 'positive,negative', got {text!r}")
    return parts[0], parts[1]


def cmd_affordances(args) -> int:
    store = _store(args)
    pairs = CanonicalPairSet.from_file(args.pairs) if args.pairs else CanonicalPairSet()
    model = build_affordance_model(store, pairs)
    verbs = _lexicon(args).verbs
    ok = 0
    for noun in args.nouns_:
        try:
            ranked = affordant_verbs(model, noun, args.n, verbs)
        except TokenNotFound:
            print(f"warning: {noun!r} not in embeddings", file=sys.stderr)
            continue
        ok += 1
        print(f"{noun}: " + ", ".join(v for v, _ in ranked))
        if args.scores:
            for v, s in ranked:
                print(f"  {v}\t{s:.6f}")
    return 0 if ok else 1


def cmd_manipulability(args) -> int:
    store = _store(args)
    axis = make_axis(store, *_axis_pair(args.axis))
    missing = [n for n in args.nouns_ if n not in store]
    for n in missing:
        print(f"warning: {n!r} not in embeddings", file=sys.stderr)
    ranked = rank_manipulable(store, axis, args.nouns_)
    for n in ranked:
        print(f"{n}\t{manipulability_score(store, axis, n):.6f}")
    return 0 if ranked else 1


def cmd_project2d(args) -> int:
    store = _store(args)
    ax = make_axis(store, *_axis_pair(args.xaxis))
    ay = make_axis(store, *_axis_pair(args.yaxis))
    for w in args.words:
        if w not in store:
            print(f"warning: {w!r} not in embeddings", file=sys.stderr)
    rows = project_2d(store, ax, ay, args.words)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_projection_csv(rows, fh)
    else:
        write_projection_csv(rows, sys.stdout)
    return 0 if rows else 1


def cmd_cooc_build(args) -> int:
    table = build_cooccurrence(args.corpus, _lexicon(args), args.verb_k, args.noun_k, args.radius)
    out = args.out or "cooccurrence.csv"
    table.save(out)
    print(f"wrote {len(table)} verb/noun pairs to {out}")
    return 0


def _print_summary(out: Path) -> None:
    print((out / "summary.csv").read_text(encoding="utf-8"), end="")


def cmd_train(args) -> int:
    cfg = experiment_config(args)
    if len(cfg.strategies) != 1:
        cfg.strategies = cfg.strategies[-1:]
    record = run_experiment(cfg, save_qtables=True)
    _print_summary(Path(cfg.out))
    return 0 if record.scores else 1


def cmd_compare(args) -> int:
    cfg = experiment_config(args)
    record = run_experiment(cfg)
    _print_summary(Path(cfg.out))
    return 0 if record.scores else 1


def cmd_replay(args) -> int:
    cfg = experiment_config(args)
    rec, commands = replay(cfg, args.qtable, args.steps)
    for cmd, score in commands:
        if cmd != "look":
            print(f"> {cmd}  [{score}]")
    print(f"final score: {rec.score}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affordance", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("affordances", help="rank the verbs afforded by each noun")
    _add_resource_flags(p)
    p.add_argument("nouns_", nargs="+", metavar="noun")
    p.add_argument("-n", type=int, default=10)
    p.add_argument("--scores", action="store_true", help="also print similarities")
    p.set_defaults(func=cmd_affordances)

    p = sub.add_parser("manipulability", help="order nouns from most to least manipulable")
    _add_resource_flags(p)
    p.add_argument("nouns_", nargs="+", metavar="noun")
    p.set_defaults(func=cmd_manipulability)

    p = sub.add_parser("project2d", help="project words onto two difference axes (CSV)")
    _add_resource_flags(p)
    p.add_argument("--xaxis", required=True, help="positive,negative")
    p.add_argument("--yaxis", required=True, help="positive,negative")
    p.add_argument("--out")
    p.add_argument("words", nargs="+")
    p.set_defaults(func=cmd_project2d)

    p = sub.add_parser("cooc", help="co-occurrence tables")
    csub = p.add_subparsers(dest="cooc_command", required=True)
    b = csub.add_parser("build", help="count verb/noun co-occurrences in a corpus")
    _add_resource_flags(b)
    b.add_argument("corpus")
    b.add_argument("--radius", type=int, default=9)
    b.add_argument("--verb-k", dest="verb_k", type=int, default=1000)
    b.add_argument("--noun-k", dest="noun_k", type=int, default=30000)
    b.add_argument("--out")
    b.set_defaults(func=cmd_cooc_build)

    for name, func, text in (("train", cmd_train, "train one strategy and save its Q-tables"),
                             ("compare", cmd_compare, "compare strategies over several runs")):
        p = sub.add_parser(name, help=text)
        _add_experiment_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("replay", help="play one greedy episode from a saved Q-table")
    _add_experiment_flags(p)
    p.add_argument("--qtable", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ExperimentError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
