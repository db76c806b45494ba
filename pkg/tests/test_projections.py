import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viscosolve import (
    Ball,
    Box,
    DimensionMismatchError,
    Halfspace,
    Hyperplane,
    InvalidDescriptorError,
    NonnegOrthant,
    Simplex,
    contains,
    inner,
    norm,
    project,
    sample,
    simplex_threshold,
)

finite = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


def all_sets(dim):
    rng = np.random.default_rng(7)
    sets = [NonnegOrthant(dim)]
    lo = -np.abs(rng.normal(size=dim)) - 0.5
    sets.append(Box(lo=lo, hi=lo + 1 + np.abs(rng.normal(size=dim))))
    sets.append(Ball(center=rng.normal(size=dim), radius=1.5))
    sets.append(Halfspace(normal=rng.normal(size=dim) + 0.1, offset=0.7))
    sets.append(Hyperplane(normal=rng.normal(size=dim) + 0.1, offset=-0.3))
    sets.append(Simplex(total=2.6, dim=dim))
    return sets


def test_orthant_clamp():
    assert np.array_equal(project(NonnegOrthant(2), [-1.0, 2.0]), [0.0, 2.0])


def test_simplex_hand_example():
    # threshold 1.2 solves (2 - a) + (3 - a) = 2.6
    p = project(Simplex(2.6, 2), [2.0, 3.0])
    assert np.allclose(p, [0.8, 1.8], atol=1e-12)


def test_simplex_hand_example_against_grid_search():
    # independent route: dense search over the segment (u, 2.6 - u), u in [0, 2.6]
    x = np.array([2.0, 3.0])
    us = np.linspace(0.0, 2.6, 100_001)
    cand = np.stack([us, 2.6 - us], axis=1)
    best = cand[np.argmin(((cand - x) ** 2).sum(axis=1))]
    assert norm(best - project(Simplex(2.6, 2), x)) <= 1e-4


def test_simplex_reference_step_example():
    # the projection step inside the reference fixed-point solve
    p = project(Simplex(2.6, 2), [2.07155562331555, 2.74224931409268])
    assert np.allclose(p, [0.96465, 1.63535], atol=5e-6)


def test_simplex_threshold_examples():
    assert simplex_threshold([2.0, 3.0], 2.6) == pytest.approx(1.2, abs=1e-12)
    for c in (0.5, 1.0, 3.0):
        assert simplex_threshold([c, c], 2 * c) == pytest.approx(0.0, abs=1e-12)
    assert simplex_threshold([5.0, 0.0], 1.0) == pytest.approx(4.0, abs=1e-12)
    assert np.allclose(project(Simplex(1.0, 2), [5.0, 0.0]), [1.0, 0.0], atol=1e-12)


def test_simplex_threshold_reproduces_projection(rng):
    for dim in (2, 3, 7):
        cset = Simplex(2.6, dim)
        for _ in range(50):
            x = rng.normal(scale=3.0, size=dim)
            alpha = simplex_threshold(x, 2.6)
            assert np.array_equal(project(cset, x), np.maximum(x - alpha, 0.0))


def test_simplex_matches_qp_oracle(rng):
    cvxpy = pytest.importorskip("cvxpy")
    for dim in (2, 3):
        cset = Simplex(2.6, dim)
        for _ in range(12):
            x = rng.normal(scale=3.0, size=dim)
            y = cvxpy.Variable(dim)
            prob = cvxpy.Problem(
                cvxpy.Minimize(cvxpy.sum_squares(y - x)),
                [y >= 0, cvxpy.sum(y) == 2.6],
            )
            prob.solve()
            assert norm(np.asarray(y.value) - project(cset, x)) <= 1e-6


def test_contains_examples():
    assert contains(NonnegOrthant(2), [0.0, 0.0], 0.0)
    assert contains(Simplex(2.6, 2), [0.8, 1.8], 1e-12)
    assert not contains(Ball(center=[0.0, 0.0], radius=1.0), [2.0, 0.0], 1e-12)


def test_invalid_descriptors():
    with pytest.raises(InvalidDescriptorError):
        Ball(center=[0.0, 0.0], radius=0.0)
    with pytest.raises(InvalidDescriptorError):
        Ball(center=[0.0, 0.0], radius=-1.0)
    with pytest.raises(InvalidDescriptorError):
        Simplex(total=0.0, dim=2)
    with pytest.raises(InvalidDescriptorError):
        Box(lo=[1.0, 0.0], hi=[0.0, 1.0])
    with pytest.raises(InvalidDescriptorError):
        Halfspace(normal=[0.0, 0.0], offset=1.0)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        project(NonnegOrthant(3), [1.0, 2.0])
    with pytest.raises(DimensionMismatchError):
        contains(Simplex(1.0, 2), [1.0, 2.0, 3.0])


@pytest.mark.parametrize("dim", [2, 3, 5])
def test_projection_membership_and_idempotence(dim, rng):
    for cset in all_sets(dim):
        for _ in range(40):
            x = rng.normal(scale=4.0, size=dim)
            p = project(cset, x)
            assert contains(cset, p, 1e-10)
            assert norm(project(cset, p) - p) <= 1e-12


@pytest.mark.parametrize("dim", [2, 3])
def test_variational_characterization(dim, rng):
    # <P x - x, P x - y> <= 0 for every y in the set
    for cset in all_sets(dim):
        ys = sample(cset, rng, 60)
        for _ in range(20):
            x = rng.normal(scale=4.0, size=dim)
            p = project(cset, x)
            for y in ys:
                assert inner(p - x, p - y) <= 1e-10


@pytest.mark.parametrize("dim", [2, 3])
def test_firm_nonexpansiveness(dim, rng):
    for cset in all_sets(dim):
        for _ in range(60):
            x, y = rng.normal(scale=4.0, size=(2, dim))
            px, py = project(cset, x), project(cset, y)
            assert inner(px - py, x - y) >= norm(px - py) ** 2 - 1e-10
            assert norm(px - py) <= norm(x - y) + 1e-10


@settings(max_examples=60)
@given(st.lists(finite, min_size=2, max_size=5))
def test_orthant_and_simplex_projection_properties(xs):
    x = np.asarray(xs, dtype=float)
    p_orth = project(NonnegOrthant(x.size), x)
    assert np.all(p_orth >= 0)
    p_simp = project(Simplex(2.6, x.size), x)
    assert np.all(p_simp >= 0)
    assert abs(p_simp.sum() - 2.6) <= 1e-10


def test_sample_stays_inside(rng):
    for dim in (2, 4):
        for cset in all_sets(dim):
            pts = sample(cset, rng, 25)
            assert pts.shape == (25, dim)
            for p in pts:
                assert contains(cset, p, 1e-9)
