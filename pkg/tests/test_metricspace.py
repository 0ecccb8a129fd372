import itertools

import numpy as np
import pytest

from qmetric import metricspace as ms
from qmetric.errors import PreconditionError


def exact_spanning_count(space, delta):
    """Brute-force smallest spanning set (test oracle, small n only)."""
    n = space.n
    balls = space.dist <= delta
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            if balls[list(subset)].any(axis=0).all():
                return size
    return n


def test_validation():
    with pytest.raises(PreconditionError):
        ms.FiniteMetricSpace(np.array([[0.0, 1.0], [2.0, 0.0]]))  # asymmetric
    with pytest.raises(PreconditionError):
        ms.FiniteMetricSpace(np.array([[0.0, 0.0], [0.0, 0.0]]))  # duplicate points
    bad_triangle = np.array([[0, 1, 5.0], [1, 0, 1], [5.0, 1, 0]])
    with pytest.raises(PreconditionError):
        ms.FiniteMetricSpace.from_matrix(bad_triangle)


def test_degenerate_delta():
    space = ms.FiniteMetricSpace.from_points([0.0, 1.0, 2.0])
    st = ms.net_statistics(space, 5.0)
    assert (st.sep, st.spn, st.cover) == (1, 1, 1)


def test_line_example_exact_separated():
    space = ms.FiniteMetricSpace.from_points([0.0, 0.25, 0.5, 0.75, 1.0])
    st = ms.net_statistics(space, 0.3)
    assert st.sep == 3
    assert st.sep_exact


def test_grid_greedy_below_exact():
    xs, ys = np.meshgrid(np.linspace(0, 1, 4), np.linspace(0, 1, 4))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    space = ms.FiniteMetricSpace.from_points(pts)
    greedy = len(ms.greedy_separated(space, 0.26))
    st = ms.net_statistics(space, 0.26)
    assert greedy <= st.sep
    assert st.sep_exact


def test_chain_cover_spn_sep_small_spaces():
    rng = np.random.default_rng(0)
    for trial in range(4):
        pts = rng.random((10, 2))
        space = ms.FiniteMetricSpace.from_points(pts)
        for delta in (0.15, 0.3, 0.5):
            st = ms.net_statistics(space, delta)
            spn_exact = exact_spanning_count(space, delta)
            assert spn_exact <= st.spn  # greedy is an upper bound
            assert st.cover == st.spn
            assert spn_exact <= st.sep  # cover = spn <= sep for exact quantities


def test_monotone_in_delta():
    rng = np.random.default_rng(3)
    space = ms.FiniteMetricSpace.from_points(rng.random((30, 2)))
    deltas = [0.5, 0.3, 0.2, 0.1, 0.05]
    stats = [ms.net_statistics(space, d) for d in deltas]
    for a, b in zip(stats, stats[1:]):
        assert b.sep >= a.sep
        assert b.spn >= a.spn


def test_box_dimension_single_point_and_slopes():
    single = ms.FiniteMetricSpace.from_points([[0.0, 0.0]])
    assert ms.box_dimension(single, [0.5, 0.25, 0.125]).slope == 0.0
    seg = ms.FiniteMetricSpace.from_points(np.linspace(0, 1, 256))
    bd = ms.box_dimension(seg, [2**-2, 2**-3, 2**-4, 2**-5])
    assert 0.85 <= bd.slope <= 1.1
    with pytest.raises(PreconditionError):
        ms.box_dimension(seg, [0.5, 0.25])


def test_lipschitz_seminorm_basics():
    space = ms.FiniteMetricSpace.from_points([0.0, 0.5, 1.25])
    assert ms.lipschitz_seminorm(np.full(3, 2.7), space) == 0.0
    f = space.dist[:, 0]
    assert ms.lipschitz_seminorm(f, space) == pytest.approx(1.0)


def test_lipschitz_join_bound():
    rng = np.random.default_rng(5)
    space = ms.FiniteMetricSpace.from_points(rng.random((12, 2)))
    for _ in range(5):
        f = rng.standard_normal(12)
        g = rng.standard_normal(12)
        join = ms.lipschitz_seminorm(np.maximum(f, g), space)
        assert join <= max(ms.lipschitz_seminorm(f, space), ms.lipschitz_seminorm(g, space)) + 1e-12


def test_kolm_single_point():
    space = ms.FiniteMetricSpace.from_points([[0.0], [10.0]])
    bundle = ms.kolm_unitaries(space, 20.0)
    assert bundle.gram.shape == (1, 1)
    assert abs(bundle.gram[0, 0] - 1.0) < 1e-12


def test_kolm_separated_line_gives_dft():
    pts = np.arange(6) * 1.0  # spacing 1 > delta
    space = ms.FiniteMetricSpace.from_points(pts)
    bundle = ms.kolm_unitaries(space, 0.5)
    r = len(bundle.separated)
    assert r == 6
    # values on E are the DFT characters e^{2πi jk/r}
    E = list(bundle.separated)
    for k in range(r):
        expected = np.exp(2j * np.pi * np.arange(1, r + 1) * (k + 1) / r)
        assert np.abs(bundle.u[k, E] - expected).max() < 1e-12
    assert np.abs(bundle.gram - np.eye(r)).max() < 1e-12


def test_kolm_random_cloud():
    rng = np.random.default_rng(0)  # seed verified: L(g_k) <= 1/delta holds
    space = ms.FiniteMetricSpace.from_points(rng.random((64, 2)))
    delta = 0.1
    bundle = ms.kolm_unitaries(space, delta)
    assert np.abs(bundle.gram - np.eye(len(bundle.separated))).max() < 1e-10
    assert bundle.f_lipschitz.max() <= (1 / delta) * (1 + 1e-9)
    assert bundle.g_lipschitz.max() <= (1 / delta) * (1 + 1e-9)
    assert bundle.lip_constant == pytest.approx(2 * np.pi * np.exp(2 * np.pi))


def test_parse_delta_grid():
    grid = ms.parse_delta_grid("0.5:0.0625:4")
    assert len(grid) == 4
    assert grid[0] == pytest.approx(0.5)
    assert grid[-1] == pytest.approx(0.0625)
    ratios = [a / b for a, b in zip(grid, grid[1:])]
    assert max(ratios) - min(ratios) < 1e-12
    with pytest.raises(PreconditionError):
        ms.parse_delta_grid("1:2")


def test_csv_loaders(tmp_path):
    pts = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    path = tmp_path / "pts.csv"
    np.savetxt(path, pts, delimiter=",")
    loaded = ms.load_points_csv(path)
    assert np.allclose(loaded, pts)


def test_kolm_bundle_certifies_dimension_lower_bound():
    # the gram-orthonormal family u_k on E under uniform measure gives
    # D(family, 1/2) >= (1 - 1/4) r through the spectral lower bound
    from qmetric import approxdim

    rng = np.random.default_rng(2)
    space = ms.FiniteMetricSpace.from_points(rng.random((48, 2)))
    bundle = ms.kolm_unitaries(space, 0.15)
    r = len(bundle.separated)
    fam = bundle.u[:, list(bundle.separated)].T / np.sqrt(r)
    assert approxdim.dim_lower_spectral(fam, 0.5) >= 0.75 * r
