import json
import math

import numpy as np
import pytest

import tdamal

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


def test_rips_unit_square():
    dg = tdamal.rips_diagram(SQUARE)
    h1 = dg[dg[:, 0] == 1]
    assert h1.shape == (1, 3)
    assert h1[0, 1] == pytest.approx(1.0)
    assert h1[0, 2] == pytest.approx(math.sqrt(2.0))
    h0 = dg[dg[:, 0] == 0]
    assert len(h0) == 4
    assert np.isinf(h0[:, 2]).sum() == 1


def test_oracle_betti_agrees():
    assert tdamal.oracle_betti(SQUARE, 1.2, 1) == 1
    assert tdamal.oracle_betti(SQUARE, 0.5, 0) == 4


def test_bottleneck():
    a = np.array([[0, 0.0, 2.0]])
    b = np.array([[0, 0.0, 2.5]])
    assert tdamal.bottleneck(a, b, 0) == pytest.approx(0.5)
    assert tdamal.bottleneck(a, np.empty((0, 3)), 0) == pytest.approx(1.0)


def test_noise_and_scaling():
    x = np.array([[0.0], [5.0], [10.0]])
    assert tdamal.minmax_scale(x)[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert tdamal.add_noise(np.zeros((1, 1)), 1.0)[0, 0] == pytest.approx(3.989423, abs=1e-5)
    assert np.array_equal(tdamal.add_noise(x, 0.0), x)
    with pytest.raises(ValueError):
        tdamal.add_noise(x, 0.5, mode="bogus")


def test_pca_and_local_features():
    x, labels, names = tdamal.synth_blobs(3, 20, 3, 6.0, 1)
    assert x.shape == (60, 3)
    assert names[0] == "Benign"
    assert tdamal.pca(x, 2).shape == (60, 2)
    f = tdamal.local_features(x, 5)
    assert f.shape == (60, len(tdamal.feature_names()))
    with pytest.raises(ValueError):
        tdamal.local_features(x, 60)


def test_tomato_two_groups():
    rng = np.random.default_rng(0)
    pts = np.vstack([rng.normal(0, 0.3, (100, 2)), rng.normal(0, 0.3, (100, 2)) + [20, 0]])
    r = tdamal.tomato(pts, k=8)
    assert r["n_clusters"] == 2
    assert len(r["assignment"]) == 200


def test_mapper_circle_document():
    t = np.linspace(0, 2 * np.pi, 100, endpoint=False)
    circle = np.column_stack([np.cos(t), np.sin(t)])
    doc = json.loads(tdamal.mapper(circle, [0] * 100, circle[:, :1], intervals=4, overlap=0.3))
    assert len(doc["nodes"]) == 6
    assert len(doc["edges"]) == 6
    assert {"id", "size", "members", "mean_lens", "label_hist", "flag_novel"} <= doc["nodes"][0].keys()


def test_train_evaluate():
    x, y, _ = tdamal.synth_blobs(4, 50, 3, 6.0, 2)
    r = tdamal.train_evaluate("random-forest", x[::2], y[::2], x[1::2], y[1::2])
    assert r["dr"] >= 0.95
    assert r["fpr"] <= 0.05
    assert sum(map(sum, r["confusion"])) == 100
