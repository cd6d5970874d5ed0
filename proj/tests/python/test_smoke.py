import numpy as np
import pytest
from sklearn.metrics import cohen_kappa_score
from sklearn.neighbors import LocalOutlierFactor

import focal_py


def random_probs(rng, t, c):
    p = rng.gamma(1.0, 1.0, size=(t, c))
    return p / p.sum(axis=1, keepdims=True)


def test_kappa_matches_sklearn():
    rng = np.random.default_rng(7)
    for _ in range(20):
        c = rng.integers(2, 6)
        n = int(rng.integers(20, 200))
        a = rng.integers(0, c, size=n)
        b = rng.integers(0, c, size=n)
        # force every class to appear so both sides agree on the label set
        a[:c] = np.arange(c)
        b[:c] = np.arange(c)
        ours = focal_py.quadratic_kappa(b.tolist(), a.tolist(), int(c))
        ref = cohen_kappa_score(a, b, weights="quadratic")
        assert ours == pytest.approx(ref, abs=1e-12)


def test_accuracy_and_macro_f1():
    preds = [0, 1, 1, 2, 2, 2]
    labels = [0, 1, 0, 2, 2, 1]
    assert focal_py.accuracy(preds, labels) == pytest.approx(4 / 6)
    macro, per_class = focal_py.macro_f1(preds, labels, 3)
    assert len(per_class) == 3
    assert macro == pytest.approx(np.mean(per_class))


def test_decomposition_identity():
    rng = np.random.default_rng(11)
    draws = random_probs(rng, 30, 4)
    d = focal_py.decompose_draws(draws)
    p_hat = draws.mean(axis=0)
    total = np.diag(p_hat) - np.einsum("ti,tj->ij", draws, draws) / len(draws)
    # total predictive covariance = (1/T) sum diag(p_t) - p_hat p_hat^T
    total = sum(np.diag(p) for p in draws) / len(draws) - np.outer(p_hat, p_hat)
    assert np.allclose(d["p_hat"], p_hat, atol=1e-12)
    assert np.allclose(d["ep_mat"] + d["al_mat"], total, atol=1e-12)
    assert np.allclose(np.diag(d["ep_mat"]), d["ep_var"], atol=1e-15)
    assert np.allclose(np.diag(d["al_mat"]), d["al_var"], atol=1e-15)


def test_lof_matches_sklearn():
    rng = np.random.default_rng(3)
    ref = rng.normal(size=(80, 5))
    queries = np.vstack([rng.normal(size=(10, 5)), rng.normal(size=(5, 5)) + 6.0])
    k = 10
    idx = focal_py.OoDIndex(ref, k)
    skl = LocalOutlierFactor(n_neighbors=k, novelty=True).fit(ref)
    ours = [idx.lof(q) for q in queries]
    ref_lof = -skl.score_samples(queries)
    assert np.allclose(ours, ref_lof, atol=1e-9)
    # fixed 0.1 scaling between lof and the ood score
    assert idx.score(queries[0]) == pytest.approx(0.1 * ours[0])


def test_entropy_and_batch_selection():
    c = 5
    assert focal_py.entropy_score([1.0 / c] * c) == pytest.approx(np.log(c), abs=1e-12)
    ids = [10, 11, 12, 13, 14]
    scores = [0.3, 0.9, 0.1, 0.9, 0.5]
    # ties broken toward the lower id: both 0.9s beat 0.5
    assert focal_py.select_batch(ids, scores, 3) == [11, 13, 14]


def test_focal_score_reduces_to_epistemic_sum():
    rng = np.random.default_rng(19)
    draws = random_probs(rng, 25, 3)
    d = focal_py.decompose_draws(draws)
    w = focal_py.class_weights([5, 5, 5])
    a = focal_py.focal_score(draws, 123.0, w, 0.0, 0.0)
    assert a == pytest.approx(np.dot(w, d["ep_var"]), abs=1e-12)
    # with penalties on, a higher ood score strictly lowers the score
    assert focal_py.focal_score(draws, 1.0, w, 0.5, 2.0) > focal_py.focal_score(
        draws, 2.0, w, 0.5, 2.0
    )


def test_bald_and_meanstd_nonnegative():
    rng = np.random.default_rng(23)
    draws = random_probs(rng, 40, 4)
    assert focal_py.bald_score(draws) >= -1e-12
    assert focal_py.meanstd_score(draws) >= 0.0
    # identical draws carry no disagreement
    flat = np.tile(draws[0], (40, 1))
    assert focal_py.bald_score(flat) == pytest.approx(0.0, abs=1e-9)
    assert focal_py.meanstd_score(flat) == pytest.approx(0.0, abs=1e-12)
