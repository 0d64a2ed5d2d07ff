"""Holdout evaluation, embeddedness curves, cross-dataset transfer, statistics."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import model as lr
from .bayes import global_sign_prior
from .features import FeatureExtractor, FeatureRecipe
from .graph import HIDDEN, POSITIVE, Holdout, SignedDigraph, mask_edges
from .nodetypes import census_determined, type_fractions
from .structural import edge_embeddedness

log = logging.getLogger(__name__)

REPORT_SCHEMA = "signpred-report/1"
DEFAULT_SEEDS = (1, 2, 3, 4, 5)
DEFAULT_LEVELS = tuple(range(26))
LOW_SUPPORT = 50
AUTO_L2 = "auto"


@dataclass
class CurvePoint:
    min_embeddedness: int
    n_test: int
    accuracy: float
    low_support: bool


@dataclass
class ExperimentReport:
    dataset: str
    recipe: str
    seeds: list[int]
    accuracies: list[float]
    fraction: float = 0.1
    l2: float | str = lr.DEFAULT_L2
    baseline_accuracies: list[float] = field(default_factory=list)
    confusion: dict[str, int] = field(default_factory=dict)
    curve: list[CurvePoint] | None = None
    train_dataset: str | None = None
    runtime_seconds: float | None = None
    # Per-repeat L2 strengths picked when ``l2 == "auto"``.
    chosen_l2: list[float] | None = None

    @property
    def repeats(self) -> int:
        return len(self.accuracies)

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies))

    @property
    def baseline(self) -> float:
        return float(np.mean(self.baseline_accuracies)) if self.baseline_accuracies else float("nan")

    def to_dict(self, timings: bool = False) -> dict:
        d = {
            "schema": REPORT_SCHEMA,
            "dataset": self.dataset,
            "train_dataset": self.train_dataset,
            "recipe": self.recipe,
            "fraction": self.fraction,
            "l2": self.l2,
            "repeats": self.repeats,
            "seeds": list(self.seeds),
            "accuracies": list(self.accuracies),
            "mean": self.mean,
            "std": self.std,
            "baseline_accuracies": list(self.baseline_accuracies),
            "baseline": self.baseline,
            "confusion": dict(self.confusion),
        }
        if self.chosen_l2 is not None:
            d["chosen_l2"] = list(self.chosen_l2)
        if self.curve is not None:
            d["curve"] = [asdict(p) for p in self.curve]
        if timings:
            d["runtime_seconds"] = self.runtime_seconds
        return d

    def text(self) -> str:
        lines = [
            f"dataset    {self.dataset}" + (f" (trained on {self.train_dataset})" if self.train_dataset else ""),
            f"recipe     {self.recipe}",
            f"seeds      {' '.join(map(str, self.seeds))}",
            f"accuracy   {100 * self.mean:.2f}% (+-{100 * self.std:.2f})",
            f"baseline   {100 * self.baseline:.2f}% (all positive)",
        ]
        for s, a in zip(self.seeds, self.accuracies):
            lines.append(f"  seed {s:<6d} {100 * a:.2f}%")
        return "\n".join(lines)


def reports_json(reports: Sequence[ExperimentReport], timings: bool = False) -> str:
    """Canonical JSON for a list of reports; identical inputs give identical bytes."""
    return json.dumps([r.to_dict(timings) for r in reports], indent=1, sort_keys=True) + "\n"


def embeddedness_curve(
    embeddedness: np.ndarray,
    correct: np.ndarray,
    levels: Iterable[int] = DEFAULT_LEVELS,
) -> list[CurvePoint]:
    """Accuracy over test edges with at least ``E`` common neighbors, per level ``E``."""
    embeddedness = np.asarray(embeddedness)
    correct = np.asarray(correct, dtype=bool)
    levels = list(levels)
    if levels != sorted(levels):
        raise ValueError("embeddedness levels must be sorted ascending")
    points = []
    for level in levels:
        sel = embeddedness >= level
        n = int(sel.sum())
        acc = float(correct[sel].mean()) if n else float("nan")
        points.append(CurvePoint(int(level), n, acc, n < LOW_SUPPORT))
    return points


def curve_csv(curve: Sequence[CurvePoint]) -> str:
    rows = ["min_embeddedness,n_test,accuracy"]
    rows += [f"{p.min_embeddedness},{p.n_test},{p.accuracy!r}" for p in curve]
    return "\n".join(rows) + "\n"


def _labels(signs: np.ndarray) -> np.ndarray:
    return (np.asarray(signs) == POSITIVE).astype(np.float64)


@dataclass
class Split:
    """One masked copy of a graph with its train/test edge ids and extractor."""

    graph: SignedDigraph
    holdout: Holdout
    extractor: FeatureExtractor
    train_ids: np.ndarray
    train_labels: np.ndarray

    @classmethod
    def make(cls, g: SignedDigraph, fraction: float, seed: int) -> "Split":
        masked, holdout = mask_edges(g, fraction, seed)
        return cls.from_masked(masked, holdout)

    @classmethod
    def from_masked(cls, masked: SignedDigraph, holdout: Holdout) -> "Split":
        train_ids = np.flatnonzero(masked.sign != HIDDEN)
        return cls(
            masked,
            holdout,
            FeatureExtractor(masked, global_sign_prior(masked)),
            train_ids,
            _labels(masked.sign[train_ids]),
        )

    @property
    def test_ids(self) -> np.ndarray:
        return self.holdout.edge_ids

    @property
    def test_labels(self) -> np.ndarray:
        return _labels(self.holdout.signs)

    def train(self, recipe: FeatureRecipe, l2: float | str = lr.DEFAULT_L2, **fit_options) -> lr.TrainedModel:
        """Fit on the observed edges; ``l2="auto"`` picks it on a split of them."""
        X = self.extractor.matrix(recipe, self.train_ids)
        if l2 == AUTO_L2:
            l2 = lr.select_l2(X, self.train_labels, seed=self.holdout.seed, **fit_options)
        return lr.fit(X, self.train_labels, l2=float(l2), manifest=recipe.columns, **fit_options)

    def test_matrix(self, recipe: FeatureRecipe) -> np.ndarray:
        return self.extractor.matrix(recipe, self.test_ids)


def _score(model: lr.TrainedModel, X: np.ndarray, y: np.ndarray):
    pred = lr.predict_proba(model, X) >= 0.5 if len(y) else np.zeros(0, dtype=bool)
    truth = y == 1
    correct = pred == truth
    confusion = {
        "true_positive": int(np.sum(pred & truth)),
        "false_positive": int(np.sum(pred & ~truth)),
        "true_negative": int(np.sum(~pred & ~truth)),
        "false_negative": int(np.sum(~pred & truth)),
    }
    return correct, confusion


def _l2_field(l2):
    return l2 if l2 == AUTO_L2 else float(l2)


def _accumulate(total: dict, part: dict) -> None:
    for k, v in part.items():
        total[k] = total.get(k, 0) + v


def run_holdout(
    g: SignedDigraph,
    recipes: Sequence[FeatureRecipe],
    fraction: float = 0.1,
    repeats: int = 5,
    seeds: Sequence[int] | None = None,
    l2: float | str = lr.DEFAULT_L2,
    levels: Iterable[int] | None = None,
    dataset: str = "graph",
    **fit_options,
) -> list[ExperimentReport]:
    """Holdout evaluation of several recipes on shared masks.

    Every recipe sees the same masked graph in a given repeat, so the reports
    are paired comparisons.
    """
    if not g.fully_observed:
        raise ValueError("holdout experiments need a fully observed graph")
    seeds = list(seeds) if seeds is not None else list(DEFAULT_SEEDS[:repeats])
    if len(seeds) != repeats:
        raise ValueError(f"{repeats} repeats need {repeats} seeds, got {len(seeds)}")
    levels = list(levels) if levels is not None else None
    start = time.perf_counter()
    acc = {r: [] for r in recipes}
    chosen: dict = {r: [] for r in recipes}
    conf: dict = {r: {} for r in recipes}
    pooled: dict = {r: ([], []) for r in recipes}
    baseline = []
    for seed in seeds:
        split = Split.make(g, fraction, seed)
        y_test = split.test_labels
        baseline.append(float(y_test.mean()) if len(y_test) else float("nan"))
        emb = split.extractor.embeddedness(split.test_ids) if levels is not None else None
        for recipe in recipes:
            model = split.train(recipe, l2=l2, **fit_options)
            chosen[recipe].append(model.l2)
            correct, confusion = _score(model, split.test_matrix(recipe), y_test)
            acc[recipe].append(float(correct.mean()) if len(correct) else float("nan"))
            _accumulate(conf[recipe], confusion)
            if levels is not None:
                pooled[recipe][0].append(emb)
                pooled[recipe][1].append(correct)
            log.info("%s seed=%d %s accuracy=%.4f", dataset, seed, recipe.name, acc[recipe][-1])
    elapsed = time.perf_counter() - start
    reports = []
    for recipe in recipes:
        curve = None
        if levels is not None:
            curve = embeddedness_curve(
                np.concatenate(pooled[recipe][0]), np.concatenate(pooled[recipe][1]), levels
            )
        reports.append(
            ExperimentReport(
                dataset=dataset,
                recipe=recipe.name,
                seeds=seeds,
                accuracies=acc[recipe],
                fraction=float(fraction),
                l2=_l2_field(l2),
                baseline_accuracies=list(baseline),
                confusion=conf[recipe],
                curve=curve,
                runtime_seconds=elapsed,
                chosen_l2=chosen[recipe] if l2 == AUTO_L2 else None,
            )
        )
    return reports


def run_holdout_experiment(
    g: SignedDigraph,
    recipe: FeatureRecipe,
    fraction: float = 0.1,
    repeats: int = 5,
    seeds: Sequence[int] | None = None,
    **options,
) -> ExperimentReport:
    return run_holdout(g, [recipe], fraction, repeats, seeds, **options)[0]


def cross_dataset(
    train_g: SignedDigraph,
    test_g: SignedDigraph,
    recipe: FeatureRecipe,
    fraction: float = 0.1,
    repeats: int = 5,
    seeds: Sequence[int] | None = None,
    l2: float | str = lr.DEFAULT_L2,
    train_name: str = "train",
    test_name: str = "test",
    **fit_options,
) -> ExperimentReport:
    """Fit on the training graph's observed edges, score the test graph's hidden ones.

    Test features come from the test graph alone (its own sign prior and
    tallies); only the weights and the standardization carry over.
    """
    return cross_matrix(
        {train_name: train_g, test_name: test_g} if train_name != test_name else {train_name: train_g},
        recipe,
        fraction,
        repeats,
        seeds,
        l2=l2,
        pairs=[(train_name, test_name)],
        **fit_options,
    )[(train_name, test_name)]


def evaluate_model(model: lr.TrainedModel, split: Split, recipe: FeatureRecipe):
    if list(model.manifest) != recipe.columns:
        raise ValueError("model manifest does not match the recipe's feature columns")
    return _score(model, split.test_matrix(recipe), split.test_labels)


def cross_matrix(
    graphs: dict[str, SignedDigraph],
    recipe: FeatureRecipe,
    fraction: float = 0.1,
    repeats: int = 5,
    seeds: Sequence[int] | None = None,
    l2: float | str = lr.DEFAULT_L2,
    pairs: Sequence[tuple[str, str]] | None = None,
    **fit_options,
) -> dict[tuple[str, str], ExperimentReport]:
    """Reports keyed by ``(train, test)`` dataset names; all pairs by default."""
    seeds = list(seeds) if seeds is not None else list(DEFAULT_SEEDS[:repeats])
    if len(seeds) != repeats:
        raise ValueError(f"{repeats} repeats need {repeats} seeds, got {len(seeds)}")
    names = list(graphs)
    if pairs is None:
        pairs = [(a, b) for a in names for b in names]
    for g in graphs.values():
        if not g.fully_observed:
            raise ValueError("cross-dataset runs need fully observed graphs")
    acc: dict = {p: [] for p in pairs}
    base: dict = {p: [] for p in pairs}
    conf: dict = {p: {} for p in pairs}
    start = time.perf_counter()
    for seed in seeds:
        splits = {name: Split.make(graphs[name], fraction, seed) for name in names}
        models = {
            name: splits[name].train(recipe, l2=l2, **fit_options)
            for name in {a for a, _ in pairs}
        }
        for a, b in pairs:
            correct, confusion = evaluate_model(models[a], splits[b], recipe)
            acc[(a, b)].append(float(correct.mean()) if len(correct) else float("nan"))
            base[(a, b)].append(float(splits[b].test_labels.mean()))
            _accumulate(conf[(a, b)], confusion)
    elapsed = time.perf_counter() - start
    return {
        (a, b): ExperimentReport(
            dataset=b,
            train_dataset=a,
            recipe=recipe.name,
            seeds=seeds,
            accuracies=acc[(a, b)],
            fraction=float(fraction),
            l2=_l2_field(l2),
            baseline_accuracies=base[(a, b)],
            confusion=conf[(a, b)],
            runtime_seconds=elapsed,
        )
        for a, b in pairs
    }


@dataclass
class DatasetStats:
    nodes: int
    edges: int
    positive_fraction: float
    negative_fraction: float
    zero_embeddedness_fraction: float
    embeddedness_histogram: list[int]
    type_fractions: list[float]
    must_positive: int
    must_negative: int
    undetermined: int
    forbidden: int

    @property
    def determined(self) -> int:
        return self.must_positive + self.must_negative

    def to_dict(self) -> dict:
        d = asdict(self)
        d["determined"] = self.determined
        return d

    def type_csv(self) -> str:
        rows = ["type_id,fraction"]
        rows += [f"{t},{f!r}" for t, f in enumerate(self.type_fractions, start=1)]
        return "\n".join(rows) + "\n"

    def text(self) -> str:
        lines = [
            f"nodes                 {self.nodes:,}",
            f"edges                 {self.edges:,}",
            f"+edges                {100 * self.positive_fraction:.2f}%",
            f"-edges                {100 * self.negative_fraction:.2f}%",
            f"zero embeddedness     {100 * self.zero_embeddedness_fraction:.2f}%",
            f"determined edges      {self.determined:,} (+ {self.must_positive:,} / - {self.must_negative:,})",
            f"undetermined edges    {self.undetermined:,}",
            f"forbidden edges       {self.forbidden:,}",
            "type fractions",
        ]
        lines += [f"  N{t:<3d} {100 * f:6.2f}%" for t, f in enumerate(self.type_fractions, start=1)]
        return "\n".join(lines)


def dataset_stats(g: SignedDigraph, histogram_max: int = 25) -> DatasetStats:
    """Node/edge counts, sign balance, embeddedness and node-type statistics.

    The last histogram bucket collects every edge with embeddedness of
    ``histogram_max`` or more.
    """
    m = g.edge_count
    emb = edge_embeddedness(g) if m else np.zeros(0, dtype=np.int64)
    hist = np.bincount(np.minimum(emb, histogram_max), minlength=histogram_max + 1)
    census = census_determined(g)
    return DatasetStats(
        nodes=g.node_count,
        edges=m,
        positive_fraction=g.positive_count / m if m else float("nan"),
        negative_fraction=g.negative_count / m if m else float("nan"),
        zero_embeddedness_fraction=float(np.mean(emb == 0)) if m else float("nan"),
        embeddedness_histogram=hist.tolist(),
        type_fractions=type_fractions(g).tolist(),
        must_positive=census.must_positive,
        must_negative=census.must_negative,
        undetermined=census.undetermined,
        forbidden=census.forbidden,
    )
