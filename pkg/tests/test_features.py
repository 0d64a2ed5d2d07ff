import numpy as np
import pytest

from signpred.bayes import batch_type_features, global_sign_prior
from signpred.features import FeatureExtractor, FeatureRecipe, RecipeError
from signpred.structural import degree_features, triad_features

import oracles


def test_recipe_parse_and_columns():
    r = FeatureRecipe.parse("BNTK+bnp+Triad")
    assert r.name == "BNTK+BNP+Triad"
    assert r.width == 256 + 8 + 16
    assert r.columns[0] == "bntk_000" and r.columns[-1] == "triad_15"


@pytest.mark.parametrize("text", ["", "bntc+bntk", "bnp+bnp", "foo"])
def test_bad_recipes(text):
    with pytest.raises(RecipeError):
        FeatureRecipe.parse(text)


def test_matrix_blocks_match_families(rng):
    g = oracles.random_graph(rng, n_max=40, density=0.2, hidden=0.2)
    ex = FeatureExtractor(g)
    ids = np.arange(g.edge_count)
    X = ex.matrix(FeatureRecipe.parse("bntc+bnp+triad+degree"), ids)
    prior = global_sign_prior(g)
    assert np.array_equal(X[:, :32], batch_type_features(g, ids, prior, "concat"))
    for e in ids:
        x, y = int(g.src[e]), int(g.dst[e])
        assert np.array_equal(X[e, 40:56], triad_features(g, x, y))
        assert np.array_equal(X[e, 56:], degree_features(g, x, y))
