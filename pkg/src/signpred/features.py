"""Feature recipes: which families make up an edge's design-matrix row."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import bayes
from .graph import SignedDigraph
from .structural import PairScanner, batch_structural_features

FAMILIES = ("bntc", "bntk", "bnp", "triad", "degree")

FAMILY_COLUMNS = {
    "bntc": [f"bntc_{i:02d}" for i in range(32)],
    "bntk": [f"bntk_{i:03d}" for i in range(256)],
    "bnp": [f"bnp_{i}" for i in range(8)],
    "triad": [f"triad_{i:02d}" for i in range(16)],
    "degree": [f"deg_{i}" for i in range(7)],
}

_DISPLAY = {"bntc": "BNTC", "bntk": "BNTK", "bnp": "BNP", "triad": "Triad", "degree": "Degree"}


class RecipeError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureRecipe:
    """Ordered feature families; their column blocks are concatenated."""

    families: tuple[str, ...]

    def __post_init__(self):
        fams = tuple(f.lower() for f in self.families)
        if not fams:
            raise RecipeError("a recipe needs at least one feature family")
        unknown = [f for f in fams if f not in FAMILY_COLUMNS]
        if unknown:
            raise RecipeError(f"unknown feature family {unknown[0]!r}; choose from {', '.join(FAMILIES)}")
        if len(set(fams)) != len(fams):
            raise RecipeError("feature families must not repeat")
        if "bntc" in fams and "bntk" in fams:
            raise RecipeError("BNTC and BNTK are alternative encodings; pick one")
        object.__setattr__(self, "families", fams)

    @classmethod
    def parse(cls, text: str) -> "FeatureRecipe":
        return cls(tuple(t.strip() for t in text.split("+") if t.strip()))

    @property
    def name(self) -> str:
        return "+".join(_DISPLAY[f] for f in self.families)

    @property
    def columns(self) -> list[str]:
        return [c for f in self.families for c in FAMILY_COLUMNS[f]]

    @property
    def width(self) -> int:
        return len(self.columns)

    def __str__(self) -> str:
        return self.name


class FeatureExtractor:
    """Per-graph cache of everything feature extraction needs.

    ``prior`` defaults to the observed-sign prior of ``g`` itself.
    """

    def __init__(self, g: SignedDigraph, prior: bayes.SignPrior | None = None):
        self.graph = g
        self.prior = prior if prior is not None else bayes.global_sign_prior(g)

    @cached_property
    def _structural(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        # Triads, degrees and embeddedness for every edge, computed once.
        g = self.graph
        return batch_structural_features(g, np.arange(g.edge_count), PairScanner(g))

    def family(self, name: str, edge_ids: np.ndarray) -> np.ndarray:
        edge_ids = np.asarray(edge_ids, dtype=np.int64)
        if name == "bntc":
            return bayes.batch_type_features(self.graph, edge_ids, self.prior, "concat")
        if name == "bntk":
            return bayes.batch_type_features(self.graph, edge_ids, self.prior, "kronecker")
        if name == "bnp":
            return bayes.batch_property_features(self.graph, edge_ids, self.prior)
        if name == "triad":
            return self._structural[0][edge_ids]
        if name == "degree":
            return self._structural[1][edge_ids]
        raise RecipeError(f"unknown feature family {name!r}")

    def embeddedness(self, edge_ids: np.ndarray) -> np.ndarray:
        return self._structural[2][np.asarray(edge_ids, dtype=np.int64)]

    def matrix(self, recipe: FeatureRecipe, edge_ids: np.ndarray) -> np.ndarray:
        """Design matrix with one row per edge id and ``recipe.columns`` columns."""
        edge_ids = np.asarray(edge_ids, dtype=np.int64)
        out = np.empty((len(edge_ids), recipe.width))
        col = 0
        for fam in recipe.families:
            width = len(FAMILY_COLUMNS[fam])
            view = out[:, col : col + width]
            if fam in ("bntc", "bntk"):
                encoding = "concat" if fam == "bntc" else "kronecker"
                bayes.batch_type_features(self.graph, edge_ids, self.prior, encoding, out=view)
            else:
                view[:] = self.family(fam, edge_ids)
            col += width
        return out


def extract_features(
    g: SignedDigraph,
    recipe: FeatureRecipe,
    edge_ids: np.ndarray | None = None,
    prior: bayes.SignPrior | None = None,
) -> np.ndarray:
    """Feature rows for ``edge_ids`` (all edges by default) of ``g``."""
    if edge_ids is None:
        edge_ids = np.arange(g.edge_count)
    return FeatureExtractor(g, prior).matrix(recipe, edge_ids)
