"""Command-line interface: ``signpred <command> [options]``."""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import datasets, experiment
from . import model as lr
from .features import FeatureExtractor, FeatureRecipe, RecipeError
from .graph import (
    GraphError,
    Holdout,
    SignedDigraph,
    mask_edges,
    read_edge_list,
    read_holdout,
    write_edge_list,
    write_holdout,
)

log = logging.getLogger("signpred")


class CliError(Exception):
    pass


@contextlib.contextmanager
def _output(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _set_threads(n):
    if n:
        import numba

        numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))


def _seeds(args, cfg) -> list[int]:
    if args.seeds:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    else:
        seeds = list(cfg.seeds)
    repeats = args.repeats if args.repeats is not None else len(seeds)
    if len(seeds) < repeats:
        raise CliError(f"--repeats {repeats} needs at least {repeats} seeds, got {len(seeds)}")
    return seeds[:repeats]


def _graph(args, cfg, which: str = "dataset", path_attr: str = "input") -> tuple[str, SignedDigraph]:
    name = getattr(args, which, None)
    path = getattr(args, path_attr, None)
    if bool(name) == bool(path):
        raise CliError(f"give exactly one of --{which} or --{path_attr.replace('_', '-')}")
    if name:
        return name.lower(), datasets.load_dataset(cfg, name)
    return Path(path).stem, read_edge_list(path)


def _l2(text: str):
    if text == experiment.AUTO_L2:
        return text
    return float(text)


def _recipes(text: str) -> list[FeatureRecipe]:
    return [FeatureRecipe.parse(part) for part in text.split(",") if part.strip()]


def _masked(args, g: SignedDigraph):
    """Masked graph plus holdout, from --holdout or from --fraction/--seed."""
    if getattr(args, "holdout", None):
        with open(args.holdout, encoding="utf-8") as fh:
            holdout = read_holdout(g, fh)
        sign = g.sign.copy()
        sign[holdout.edge_ids] = 0
        return g.with_signs(sign), holdout
    if not g.fully_observed:
        return g, None
    return mask_edges(g, args.fraction, args.seed)


# -- commands -----------------------------------------------------------------


def cmd_fetch(args, cfg) -> int:
    path = datasets.fetch(cfg, args.name)
    print(path)
    return 0


def cmd_stats(args, cfg) -> int:
    name, g = _graph(args, cfg)
    stats = experiment.dataset_stats(g)
    with _output(args.out) as out:
        if args.format == "json":
            out.write(json.dumps({"dataset": name, **stats.to_dict()}, indent=1) + "\n")
        elif args.format == "csv":
            out.write(stats.type_csv())
        else:
            out.write(stats.text() + "\n")
    return 0


def cmd_holdout(args, cfg) -> int:
    _, g = _graph(args, cfg)
    masked, holdout = mask_edges(g, args.fraction, args.seed)
    with _output(args.out) as out:
        write_holdout(g, holdout, out)
    if args.masked_out:
        with open(args.masked_out, "w", encoding="utf-8") as fh:
            write_edge_list(masked, fh, header=(f"masked seed={args.seed} fraction={args.fraction!r}",))
    return 0


def cmd_features(args, cfg) -> int:
    recipe = FeatureRecipe.parse(args.recipe)
    _, g = _graph(args, cfg)
    masked, _ = _masked(args, g)
    extractor = FeatureExtractor(masked)
    ids = np.arange(masked.edge_count)
    X = extractor.matrix(recipe, ids)
    labels = masked.labels
    with _output(args.out) as out:
        out.write(",".join(["src", "dst", "sign"] + recipe.columns) + "\n")
        for e in range(len(ids)):
            s = int(masked.sign[e])
            head = f"{labels[masked.src[e]]},{labels[masked.dst[e]]},{'?' if s == 0 else s}"
            out.write(head + "," + ",".join(repr(float(v)) for v in X[e]) + "\n")
    return 0


def cmd_train(args, cfg) -> int:
    recipe = FeatureRecipe.parse(args.recipe)
    _, g = _graph(args, cfg)
    masked, holdout = _masked(args, g)
    if holdout is None:
        holdout = Holdout(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int8), 0, 0.0)
    split = experiment.Split.from_masked(masked, holdout)
    model = split.train(recipe, l2=args.l2, tolerance=args.tolerance, max_iterations=args.max_iterations)
    model.metadata["recipe"] = recipe.name
    if args.out is None:
        raise CliError("train needs --out for the model file")
    model.save(args.out)
    return 0


def _write_reports(args, reports) -> None:
    with _output(args.out) as out:
        if args.format == "json":
            out.write(experiment.reports_json(reports, timings=args.timings))
        elif args.format == "csv":
            out.write("dataset,train_dataset,recipe,mean,std,baseline," + ",".join(
                f"seed_{s}" for s in reports[0].seeds) + "\n")
            for r in reports:
                out.write(
                    f"{r.dataset},{r.train_dataset or r.dataset},{r.recipe},{r.mean!r},{r.std!r},{r.baseline!r},"
                    + ",".join(repr(a) for a in r.accuracies)
                    + "\n"
                )
        else:
            out.write("\n\n".join(r.text() for r in reports) + "\n")


def cmd_evaluate(args, cfg) -> int:
    recipes = _recipes(args.recipe)
    name, g = _graph(args, cfg)
    if args.model:
        return _evaluate_saved(args, name, g)
    seeds = _seeds(args, cfg)
    levels = None
    if args.curve_out:
        levels = list(range(args.max_embeddedness + 1))
    reports = experiment.run_holdout(
        g,
        recipes,
        fraction=args.fraction,
        repeats=len(seeds),
        seeds=seeds,
        l2=args.l2,
        levels=levels,
        dataset=name,
        tolerance=args.tolerance,
        max_iterations=args.max_iterations,
    )
    _write_reports(args, reports)
    if args.curve_out:
        with open(args.curve_out, "w", encoding="utf-8") as fh:
            for r in reports:
                fh.write(f"# recipe={r.recipe}\n")
                fh.write(experiment.curve_csv(r.curve))
    return 0


def _evaluate_saved(args, name, g) -> int:
    model = lr.TrainedModel.load(args.model)
    recipe = FeatureRecipe.parse(model.metadata.get("recipe", args.recipe))
    if not args.holdout:
        raise CliError("evaluating a saved model needs --holdout")
    masked, holdout = _masked(args, g)
    split = experiment.Split.from_masked(masked, holdout)
    correct, confusion = experiment.evaluate_model(model, split, recipe)
    report = experiment.ExperimentReport(
        dataset=name,
        recipe=recipe.name,
        seeds=[holdout.seed],
        accuracies=[float(correct.mean()) if len(correct) else float("nan")],
        fraction=holdout.fraction,
        l2=model.l2,
        baseline_accuracies=[float(split.test_labels.mean()) if len(correct) else float("nan")],
        confusion=confusion,
    )
    _write_reports(args, [report])
    return 0


def cmd_crosseval(args, cfg) -> int:
    recipes = _recipes(args.recipe)
    train_name, train_g = _graph(args, cfg, "train", "train_input")
    test_name, test_g = _graph(args, cfg, "test", "test_input")
    seeds = _seeds(args, cfg)
    reports = [
        experiment.cross_dataset(
            train_g,
            test_g,
            recipe,
            fraction=args.fraction,
            repeats=len(seeds),
            seeds=seeds,
            l2=args.l2,
            train_name=train_name,
            test_name=test_name,
            tolerance=args.tolerance,
            max_iterations=args.max_iterations,
        )
        for recipe in recipes
    ]
    _write_reports(args, reports)
    return 0


# -- parser -------------------------------------------------------------------


def _add_source(p):
    p.add_argument("--dataset", help="registered dataset name")
    p.add_argument("--input", help="edge-list file")


def _add_fit(p):
    p.add_argument("--l2", type=_l2, default=lr.DEFAULT_L2, help="L2 strength, or 'auto' to pick it on the training edges")
    p.add_argument("--tolerance", type=float, default=lr.DEFAULT_TOLERANCE)
    p.add_argument("--max-iterations", type=int, default=lr.DEFAULT_MAX_ITERATIONS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signpred", description=__doc__)
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--threads", type=int, help="cap on worker threads")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download and cache a dataset")
    p.add_argument("name")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("stats", help="dataset statistics")
    _add_source(p)
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("holdout", help="mask a random fraction of edge signs")
    _add_source(p)
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--masked-out", help="also write the masked graph here")
    p.set_defaults(func=cmd_holdout)

    p = sub.add_parser("features", help="per-edge feature rows as CSV")
    _add_source(p)
    p.add_argument("--recipe", required=True)
    p.add_argument("--holdout", help="holdout file whose edges are hidden")
    p.add_argument("--fraction", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="fit a model on observed edges")
    _add_source(p)
    p.add_argument("--recipe", required=True)
    p.add_argument("--holdout")
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=1)
    _add_fit(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    for name, func, help_ in (
        ("evaluate", cmd_evaluate, "repeated holdout evaluation"),
        ("crosseval", cmd_crosseval, "train on one dataset, test on another"),
    ):
        p = sub.add_parser(name, help=help_)
        if name == "evaluate":
            _add_source(p)
            p.add_argument("--model", help="score a saved model on --holdout instead")
            p.add_argument("--holdout")
            p.add_argument("--seed", type=int, default=1)
            p.add_argument("--curve-out", help="write accuracy vs minimum embeddedness CSV")
            p.add_argument("--max-embeddedness", type=int, default=25)
        else:
            p.add_argument("--train", help="training dataset name")
            p.add_argument("--train-input", help="training edge-list file")
            p.add_argument("--test", help="test dataset name")
            p.add_argument("--test-input", help="test edge-list file")
        p.add_argument("--recipe", default="bntk+bnp+triad", help="families joined by '+'; several recipes separated by ','")
        p.add_argument("--fraction", type=float, default=0.1)
        p.add_argument("--repeats", type=int)
        p.add_argument("--seeds", help="comma-separated seeds (default 1,2,3,4,5)")
        _add_fit(p)
        p.add_argument("--format", choices=("json", "csv", "text"), default="text")
        p.add_argument("--timings", action="store_true", help="include wall-clock time in JSON")
        p.add_argument("--out")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = datasets.load_config(args.config)
        _set_threads(args.threads)
        return args.func(args, cfg)
    except (CliError, GraphError, RecipeError, lr.ModelError, datasets.DatasetError, ValueError, OSError) as exc:
        print(f"signpred {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
