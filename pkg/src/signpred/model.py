"""L2-regularized logistic regression fitted by full-batch gradient descent.

Columns are z-scored with statistics from the training matrix. The
standardization is folded into the affine score, so large design matrices
are never copied. The objective is the mean negative log-likelihood plus
``l2 / 2 * ||w||^2``; the bias is not penalized.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.special import expit

log = logging.getLogger(__name__)

MODEL_FORMAT = "signpred-logreg"
MODEL_VERSION = 1

DEFAULT_L2 = 1e-4
DEFAULT_TOLERANCE = 1e-6
DEFAULT_MAX_ITERATIONS = 5000

_ARMIJO = 1e-4
_MAX_BACKTRACKS = 60
# Below this fraction of nonzeros the solver multiplies through CSR copies.
_SPARSE_DENSITY = 0.25


class ModelError(ValueError):
    pass


@dataclass
class TrainedModel:
    weights: np.ndarray
    bias: float
    means: np.ndarray
    scales: np.ndarray
    manifest: list[str]
    l2: float
    metadata: dict = field(default_factory=dict)
    # Objective after each accepted step; not serialized.
    history: list[float] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.means = np.asarray(self.means, dtype=np.float64)
        self.scales = np.asarray(self.scales, dtype=np.float64)
        self.manifest = list(self.manifest)
        d = len(self.weights)
        if not (len(self.means) == len(self.scales) == len(self.manifest) == d):
            raise ModelError("weights, means, scales and manifest must have equal length")
        if np.any(self.scales <= 0):
            raise ModelError("scales must be positive")

    @property
    def dimension(self) -> int:
        return len(self.weights)

    def decision_function(self, features) -> np.ndarray:
        X = _check_features(features, self.dimension)
        return _scores(X, self.weights, self.bias, self.means, self.scales)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "manifest": self.manifest,
            "means": self.means.tolist(),
            "scales": self.scales.tolist(),
            "weights": self.weights.tolist(),
            "bias": float(self.bias),
            "l2": float(self.l2),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainedModel":
        if data.get("format") != MODEL_FORMAT:
            raise ModelError("not a model file")
        if data.get("version") != MODEL_VERSION:
            raise ModelError(f"unsupported model version {data.get('version')}")
        return cls(
            weights=data["weights"],
            bias=data["bias"],
            means=data["means"],
            scales=data["scales"],
            manifest=data["manifest"],
            l2=data["l2"],
            metadata=data.get("metadata", {}),
        )

    def save(self, path) -> None:
        # json writes floats with repr(), which round-trips float64 exactly.
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "TrainedModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _check_features(features, d: int | None = None) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ModelError("features must be a vector or a matrix")
    if d is not None and X.shape[1] != d:
        raise ModelError(f"expected {d} features per row, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ModelError("features must be finite")
    return X


def _scores(X, w, b, means, scales):
    v = w / scales
    return X @ v + (b - means @ v)


def standardization(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and scales; constant columns get scale 1."""
    means = X.mean(axis=0)
    scales = X.std(axis=0)
    scales[~(scales > 1e-12 * np.maximum(1.0, np.abs(means)))] = 1.0
    return means, scales


def _loss(z, y, w, l2):
    return np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w)


def _gradient(Xt, y, z, w, l2, means, scales):
    r = (expit(z) - y) / len(y)
    grad = np.empty(len(w) + 1)
    grad[:-1] = (Xt @ r - means * r.sum()) / scales + l2 * w
    grad[-1] = r.sum()
    return grad


def objective_and_gradient(theta, X, y, l2, means, scales):
    """Objective and gradient at ``theta = [w, b]`` for raw features ``X``."""
    w, b = theta[:-1], theta[-1]
    z = _scores(X, w, b, means, scales)
    return _loss(z, y, w, l2), _gradient(X.T, y, z, w, l2, means, scales)


def fit(
    features,
    labels,
    l2: float = DEFAULT_L2,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    seed: int | None = None,
    manifest: Sequence[str] | None = None,
) -> TrainedModel:
    """Fit the classifier; labels are 1 for positive edges, 0 for negative.

    Each step moves along the negative gradient with a Barzilai-Borwein trial
    length, halved until the Armijo condition holds, so accepted steps always
    decrease the objective. Stops once the gradient's max-norm is at most
    ``tolerance`` or after ``max_iterations`` steps. ``seed`` selects a small
    random starting point instead of zeros.
    """
    X = _check_features(features)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    n, d = X.shape
    if n < 1:
        raise ModelError("need at least one training example")
    if len(y) != n:
        raise ModelError(f"{n} feature rows but {len(y)} labels")
    if not np.all((y == 0) | (y == 1)):
        raise ModelError("labels must be 0 or 1")
    if l2 < 0:
        raise ModelError("l2 must be non-negative")
    if manifest is None:
        manifest = [f"f{i}" for i in range(d)]
    if len(manifest) != d:
        raise ModelError("manifest length must equal the feature dimension")

    means, scales = standardization(X)
    Xt = X.T
    if np.count_nonzero(X) < _SPARSE_DENSITY * X.size:
        X = sparse.csr_matrix(X)
        Xt = X.T.tocsr()
    theta = np.zeros(d + 1)
    if seed is not None:
        theta += 0.01 * np.random.default_rng(seed).standard_normal(d + 1)

    # Scores are affine in theta, so one product per step gives the scores of
    # every line-search trial along the gradient direction.
    z = _scores(X, theta[:-1], theta[-1], means, scales)
    f = _loss(z, y, theta[:-1], l2)
    grad = _gradient(Xt, y, z, theta[:-1], l2, means, scales)
    history = [f]
    step = 1.0
    prev_theta = prev_grad = None
    it = 0
    while it < max_iterations and np.max(np.abs(grad)) > tolerance:
        if prev_theta is not None:
            s = theta - prev_theta
            yk = grad - prev_grad
            sy = s @ yk
            step = (s @ s) / sy if sy > 0 else 2.0 * step
            step = min(max(step, 1e-10), 1e10)
        gg = grad @ grad
        dz = _scores(X, grad[:-1], grad[-1], means, scales)
        for _ in range(_MAX_BACKTRACKS):
            cand = theta - step * grad
            zc = z - step * dz
            fc = _loss(zc, y, cand[:-1], l2)
            if fc <= f - _ARMIJO * step * gg:
                break
            step *= 0.5
        else:
            log.debug("line search stalled at iteration %d", it)
            break
        prev_theta, prev_grad = theta, grad
        theta, z, f = cand, zc, fc
        grad = _gradient(Xt, y, z, theta[:-1], l2, means, scales)
        history.append(f)
        it += 1
    converged = bool(np.max(np.abs(grad)) <= tolerance)

    model = TrainedModel(
        weights=theta[:-1].copy(),
        bias=float(theta[-1]),
        means=means,
        scales=scales,
        manifest=list(manifest),
        l2=float(l2),
        metadata={
            "iterations": int(it),
            "final_objective": float(f),
            "gradient_max_norm": float(np.max(np.abs(grad))),
            "converged": bool(converged),
            "n_train": int(n),
        },
        history=history,
    )
    return model


def predict_proba(model: TrainedModel, features):
    """P(positive) for a feature row (float) or a matrix of rows (array)."""
    single = np.ndim(features) == 1
    p = expit(model.decision_function(features))
    return float(p[0]) if single else p


def predict_sign(model: TrainedModel, features, threshold: float = 0.5):
    """+1 where P(positive) >= threshold, else -1."""
    p = predict_proba(model, features)
    if np.ndim(p) == 0:
        return 1 if p >= threshold else -1
    return np.where(p >= threshold, 1, -1).astype(np.int8)


def select_l2(
    features,
    labels,
    grid: Sequence[float] = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2),
    validation_fraction: float = 0.2,
    seed: int = 0,
    **fit_options,
) -> float:
    """Pick the L2 strength with the best accuracy on a split of the training data.

    Ties go to the larger (more regularized) value.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(y))
    k = max(1, int(round(validation_fraction * len(y))))
    val, tr = order[:k], order[k:]
    if len(tr) == 0:
        raise ModelError("not enough examples for a validation split")
    best, best_acc = None, -1.0
    for l2 in sorted(grid, reverse=True):
        m = fit(X[tr], y[tr], l2=l2, **fit_options)
        acc = float(np.mean((predict_proba(m, X[val]) >= 0.5) == (y[val] == 1)))
        if acc > best_acc:
            best, best_acc = l2, acc
    return float(best)
