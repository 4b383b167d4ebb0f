import numpy as np
import pytest

from ytest import (DataError, EmptyRequest, GraphId, InsufficientData, LinearScm,
                   UnknownGraph, make_rng, parse_model, sample_coefficients,
                   sample_custom, sample_graph)
from ytest.data import dataset_to_csv
from ytest.scm import COEFFICIENT_COUNTS, STUDY_GRAPHS, generate_graph

SUPPORT = {-2.0, -1.0, 1.0, 2.0}


def test_coefficients_in_support():
    for seed in range(20):
        assert set(sample_coefficients(4, make_rng(seed))) <= SUPPORT


def test_coefficients_deterministic():
    assert sample_coefficients(1, make_rng(5))[0] == sample_coefficients(1, make_rng(5))[0]


def test_coefficient_frequencies():
    draws = sample_coefficients(10000, make_rng(3))
    for v in SUPPORT:
        assert abs(np.mean(draws == v) - 0.25) < 0.02


def test_coefficients_empty_request():
    with pytest.raises(EmptyRequest):
        sample_coefficients(0, make_rng(0))


def test_g1_shape():
    ds = sample_graph("g1", 50, make_rng(1))
    assert ds.n_rows == 50
    assert ds.names == ["Z", "X", "W"]


@pytest.mark.parametrize("gid", STUDY_GRAPHS)
def test_study_graphs_expose_zxw(gid):
    assert sample_graph(gid, 10, make_rng(0)).names == ["Z", "X", "W"]


def test_example_columns_and_collider():
    ds = sample_graph(GraphId.EXAMPLE, 100, make_rng(7))
    assert ds.names == ["A", "Z", "W", "B", "C", "X", "Y", "D"]
    assert np.corrcoef(ds["D"], ds["X"])[0, 1] > 0
    assert np.corrcoef(ds["D"], ds["Y"])[0, 1] > 0


def test_counterexample_indicators():
    ds = sample_graph("counterexample", 100, make_rng(2))
    assert ds.names == ["z1", "z2", "z3", "i1", "i2", "e", "o"]
    for c in ("z1", "z2", "z3", "i1", "i2"):
        assert set(np.unique(ds[c])) <= {0.0, 1.0}
    assert np.array_equal(ds["i1"], ds["z1"] * ds["z2"])
    assert np.array_equal(ds["i2"], ds["z2"] * ds["z3"])


def test_bad_requests():
    with pytest.raises(UnknownGraph):
        sample_graph("g9", 10, make_rng(0))
    with pytest.raises(InsufficientData):
        sample_graph("g1", 0, make_rng(0))


@pytest.mark.parametrize("gid", list(GraphId))
def test_sampling_is_bit_deterministic(gid):
    a = sample_graph(gid, 64, make_rng(11))
    b = sample_graph(gid, 64, make_rng(11))
    assert a.equals(b)
    assert dataset_to_csv(a) == dataset_to_csv(b)
    assert not a.equals(sample_graph(gid, 64, make_rng(12)))


@pytest.mark.parametrize("gid", STUDY_GRAPHS)
def test_coefficients_drawn_before_noise(gid):
    rng = make_rng(4)
    alpha = sample_coefficients(COEFFICIENT_COUNTS[gid], rng)
    assert generate_graph(gid, alpha, 30, rng).equals(sample_graph(gid, 30, make_rng(4)))


def _loadings(gid, a, sigma=5.0):
    """Each variable as loadings on independent unit noise sources."""
    src = {}

    def noise(name, scale=1.0):
        v = np.zeros(12)
        v[len(src)] = scale
        src[name] = v
        return v

    A = noise("A", sigma if gid is GraphId.G1 else 1.0)
    if gid is GraphId.G1:
        Z = a[0] * A + noise("z")
        W = a[1] * A + noise("w")
        X = a[2] * Z + a[3] * W + noise("x")
    elif gid is GraphId.G2:
        B = noise("B")
        Z = a[0] * A + a[1] * B + noise("z")
        W = a[2] * A + noise("w")
        X = a[3] * B + a[4] * W + a[5] * Z + noise("x")
    elif gid is GraphId.G3:
        B, C = noise("B"), noise("C")
        Z = a[0] * A + a[1] * B + noise("z")
        W = a[2] * A + a[3] * C + noise("w")
        X = a[4] * B + a[5] * C + a[6] * Z + a[7] * W + noise("x")
    elif gid is GraphId.G4:
        B, C = noise("B"), noise("C")
        Z = a[0] * A + a[1] * B + noise("z")
        W = a[2] * A + a[3] * C + noise("w")
        X = a[4] * B + a[5] * C + noise("x")
    elif gid is GraphId.G5:
        B = noise("B")
        Z = a[0] * A + a[1] * B + noise("z")
        W = a[2] * A + noise("w")
        X = a[3] * B + a[4] * W + noise("x")
    elif gid is GraphId.G6:
        W = a[0] * A + noise("w")
        X = a[1] * W + noise("x")
        Z = a[2] * A + a[3] * X + noise("z")
    elif gid is GraphId.G7:
        X = noise("x")
        W = a[0] * A + a[1] * X + noise("w")
        Z = a[2] * A + a[3] * X + noise("z")
    else:
        B = noise("B")
        W = a[0] * A + a[1] * B + noise("w")
        X = a[2] * B + noise("x")
        Z = a[3] * A + a[4] * X + noise("z")
    return np.array([Z, X, W])


@pytest.mark.parametrize("gid", STUDY_GRAPHS)
def test_population_covariance_matches_sample(gid):
    n = 100_000
    rng = make_rng(2024, gid.index)
    alpha = sample_coefficients(COEFFICIENT_COUNTS[gid], rng)
    ds = generate_graph(gid, alpha, n, rng)
    L = _loadings(gid, alpha)
    sigma = L @ L.T
    S = np.cov(ds.matrix(["Z", "X", "W"]), rowvar=False)
    for i in range(3):
        for j in range(i, 3):
            se = np.sqrt((sigma[i, i] * sigma[j, j] + sigma[i, j] ** 2) / n)
            assert abs(S[i, j] - sigma[i, j]) <= 3 * se, (gid, i, j)


@pytest.mark.parametrize("gid", STUDY_GRAPHS[1:])
def test_sigma_everywhere_rescales_exactly(gid):
    a = sample_graph(gid, 40, make_rng(8))
    b = sample_graph(gid, 40, make_rng(8), sigma=5.0, sigma_everywhere=True)
    for c in a.names:
        np.testing.assert_allclose(b[c], 5.0 * a[c], rtol=1e-12, atol=1e-12)


def test_custom_single_node_moments():
    model = LinearScm(("A",), (), {"A": 1.0})
    x = sample_custom(model, 10000, make_rng(1))["A"]
    assert -0.05 <= x.mean() <= 0.05
    assert 0.97 <= x.std(ddof=1) <= 1.03


def test_custom_chain_slope():
    model = LinearScm(("A", "B", "C"), (("A", "B", 1.0), ("B", "C", 1.0)))
    ds = sample_custom(model, 10000, make_rng(2))
    slope = np.polyfit(ds["B"], ds["C"], 1)[0]
    assert abs(slope - 1.0) < 0.05


def test_custom_zero_edge_is_independent():
    from ytest.regress import ols_fit
    model = LinearScm(("A", "B"), (("A", "B", 0.0),))
    ps = [ols_fit(sample_custom(model, 200, make_rng(s)), "B", ["A"]).p_value("A")
          for s in range(300)]
    assert 0.4 < np.mean(ps) < 0.6
    assert 0.05 < np.mean(np.array(ps) < 0.1) < 0.15


def test_custom_declaration_order_irrelevant():
    edges = (("A", "B", 2.0), ("B", "C", -1.0), ("A", "C", 0.5))
    m1 = LinearScm(("A", "B", "C"), edges, {"A": 2.0})
    m2 = LinearScm(("C", "A", "B"), edges[::-1], {"A": 2.0})
    d1 = sample_custom(m1, 1000, make_rng(9))
    d2 = sample_custom(m2, 1000, make_rng(9))
    for c in "ABC":
        assert np.array_equal(d1[c], d2[c])


def test_custom_covariance():
    model = LinearScm(("A", "B", "C"), (("A", "B", 2.0), ("B", "C", -1.0), ("A", "C", 0.5)),
                      {"A": 1.5, "C": 0.5})
    ds = sample_custom(model, 200_000, make_rng(4))
    S = np.cov(ds.matrix(model.nodes), rowvar=False)
    np.testing.assert_allclose(S, model.covariance(), rtol=0.03, atol=0.03)


def test_model_validation():
    with pytest.raises(DataError, match="cyclic"):
        LinearScm(("A", "B"), (("A", "B", 1.0), ("B", "A", 1.0)))
    with pytest.raises(DataError, match="not a declared node"):
        LinearScm(("A",), (("A", "Q", 1.0),))
    with pytest.raises(DataError, match="positive"):
        LinearScm(("A",), (), {"A": 0.0})


def test_parse_model():
    m = parse_model("""
        # nodes
        A 1
        B 2.5
        A B -1.5   # edge
    """)
    assert m.nodes == ("A", "B")
    assert m.noise_scale == {"A": 1.0, "B": 2.5}
    assert m.edges == (("A", "B", -1.5),)
    with pytest.raises(DataError, match="line 1"):
        parse_model("A B C D")
