import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

from conftest import identity_quats, still_stream
from motion_concepts.data_model import MotionStream
from motion_concepts.primitives import (LibraryError, MotionPrimitive, PrimitiveLibrary, best_primitive,
                                        default_novelty_threshold, featurize, from_scipy, log_density, observe)


def direct_mixture_logpdf(weights, means, variances, f):
    """Plain summation of w_j N(f; mu_j, diag var_j), no log-sum-exp tricks."""
    total = 0.0
    for w, mu, var in zip(weights, means, variances):
        norm = np.prod(2 * np.pi * var) ** -0.5
        total += w * norm * math.exp(-0.5 * np.sum((f - mu) ** 2 / var))
    return math.log(total)


def _prim(weights, means, variances, pid=0):
    return MotionPrimitive(pid, np.asarray(weights, float), np.atleast_2d(means).astype(float),
                           np.atleast_2d(variances).astype(float), sample_count=len(weights))


# ---------------------------------------------------------------- featurize

def test_featurize_stationary_is_zero():
    f = featurize(still_stream(20, at=(1.0, 2.0, 3.0)), 0, 20, n_points=8)
    assert f.shape == (48,)
    assert np.array_equal(f, np.zeros(48))


def test_featurize_straight_line():
    L = 0.9
    pos = np.column_stack([np.linspace(0, L, 31), np.zeros(31), np.zeros(31)])
    f = featurize(MotionStream(pos, identity_quats(31)), 0, 31, n_points=4).reshape(4, 6)
    assert np.allclose(f[:, :3], [[0, 0, 0], [L / 3, 0, 0], [2 * L / 3, 0, 0], [L, 0, 0]])
    assert np.allclose(f[:, 3:], 0)


def test_featurize_quarter_turn():
    n = 10
    rots = Rotation.from_euler("z", np.linspace(0, np.pi / 2, n))
    s = MotionStream(np.zeros((n, 3)), from_scipy(rots.as_quat()))
    f = featurize(s, 0, n, n_points=2).reshape(2, 6)
    assert np.allclose(f[1, 3:], [0, 0, np.pi / 2])
    assert np.allclose(f[0], 0)


def test_featurize_errors():
    with pytest.raises(ValueError):
        featurize(still_stream(10), 3, 4)
    with pytest.raises(ValueError):
        featurize(still_stream(10), 0, 10, n_points=1)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_featurize_rigid_invariance(seed):
    rng = np.random.default_rng(seed)
    n = 25
    pos = np.cumsum(rng.normal(0, 0.02, (n, 3)), axis=0)
    rots = Rotation.from_rotvec(np.cumsum(rng.normal(0, 0.1, (n, 3)), axis=0))
    base = featurize(MotionStream(pos, from_scipy(rots.as_quat())), 0, n)
    # translation alone: exactly the same feature
    moved = featurize(MotionStream(pos + rng.normal(size=3), from_scipy(rots.as_quat())), 0, n)
    assert np.allclose(moved, base, atol=1e-12)
    # global rotation: relative rotations unchanged, positions rotated
    g = Rotation.from_rotvec(rng.normal(size=3))
    turned = featurize(MotionStream(g.apply(pos), from_scipy((g * rots).as_quat())), 0, n).reshape(-1, 6)
    b = base.reshape(-1, 6)
    assert np.allclose(turned[:, 3:], b[:, 3:], atol=1e-9)
    assert np.allclose(turned[:, :3], g.apply(b[:, :3]), atol=1e-9)


# -------------------------------------------------------------- log_density

def test_log_density_peak_of_unit_gaussian():
    p = _prim([1.0], [[0.3, -0.2]], [[1.0, 1.0]])
    assert log_density(p, np.array([0.3, -0.2])) == pytest.approx(math.log(1 / (2 * math.pi)), abs=1e-12)


def test_identical_components_collapse():
    f = np.array([0.1, 0.5, -0.3])
    one = _prim([1.0], [[0, 0, 0]], [[0.5, 1, 2]])
    two = _prim([0.5, 0.5], [[0, 0, 0]] * 2, [[0.5, 1, 2]] * 2)
    assert log_density(two, f) == pytest.approx(log_density(one, f), abs=1e-12)


def test_log_density_matches_direct_summation_1000_cases():
    rng = np.random.default_rng(12345)
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 7))
        k = int(rng.integers(1, 5))
        w = rng.uniform(0.05, 1.0, k)
        w /= w.sum()
        mu = rng.normal(0, 1, (k, d))
        var = rng.uniform(0.2, 2.0, (k, d))
        f = rng.normal(0, 1, d)
        got = log_density(_prim(w, mu, var), f)
        worst = max(worst, abs(got - direct_mixture_logpdf(w, mu, var, f)))
    assert worst < 1e-9


def test_log_density_dimension_mismatch():
    with pytest.raises(LibraryError):
        log_density(_prim([1.0], [[0, 0]], [[1, 1]]), np.zeros(3))


def test_log_density_saturates_at_floor():
    p = _prim([1.0], [[0.0]], [[1e-6]])
    assert log_density(p, np.array([1e6]), log_floor=-1e3) == -1e3


# ----------------------------------------------------------- best_primitive

def _library(prims, dim):
    lib = PrimitiveLibrary(feature_dim=dim)
    for p in prims:
        lib.primitives[p.id] = p
    lib.next_id = max(p.id for p in prims) + 1
    return lib


def test_best_primitive_single():
    lib = _library([_prim([1.0], [[5.0, 5.0]], [[1, 1]], pid=7)], 2)
    assert best_primitive(lib, np.zeros(2))[0] == 7


def test_best_primitive_nearest_mean():
    a = _prim([1.0], [[0.0, 0.0]], [[1, 1]], pid=0)
    b = _prim([1.0], [[3.0, 0.0]], [[1, 1]], pid=1)
    lib = _library([a, b], 2)
    assert best_primitive(lib, np.array([1.2, 0.4]))[0] == 0
    assert best_primitive(lib, np.array([1.8, -0.4]))[0] == 1


def test_best_primitive_tie_goes_to_smallest_id():
    a = _prim([1.0], [[1.0, 0.0]], [[1, 1]], pid=4)
    b = _prim([1.0], [[-1.0, 0.0]], [[1, 1]], pid=2)
    lib = _library([a, b], 2)
    assert best_primitive(lib, np.zeros(2))[0] == 2


def test_best_primitive_matches_exhaustive_scan():
    rng = np.random.default_rng(7)
    d = 4
    prims = []
    for pid in range(5):
        k = int(rng.integers(1, 4))
        w = rng.uniform(0.1, 1, k)
        prims.append(_prim(w / w.sum(), rng.normal(0, 1, (k, d)), rng.uniform(0.1, 1, (k, d)), pid=pid))
    lib = _library(prims, d)
    for _ in range(100):
        f = rng.normal(0, 1.5, d)
        scores = [log_density(p, f) for p in prims]
        want = int(np.argmax(scores))
        got, ll = best_primitive(lib, f)
        assert got == want
        assert ll == pytest.approx(scores[want], abs=1e-9)


def test_best_primitive_empty_library():
    with pytest.raises(LibraryError):
        best_primitive(PrimitiveLibrary(feature_dim=3), np.zeros(3))


# ------------------------------------------------------------------ observe

def test_observe_on_empty_library():
    lib = PrimitiveLibrary(feature_dim=3)
    assert observe(lib, np.ones(3)) == 0
    assert lib.primitives[0].sample_count == 1
    assert lib.primitives[0].n_components == 1


def test_observe_twice_updates():
    lib = PrimitiveLibrary(feature_dim=3, novelty_log_threshold=-1e6)
    f = np.array([0.2, 0.1, 0.0])
    observe(lib, f)
    assert observe(lib, f) == 0
    assert len(lib) == 1
    assert lib.primitives[0].sample_count == 2
    assert np.allclose(lib.primitives[0].weights, [0.5, 0.5])


def test_far_features_found_two_primitives():
    lib = PrimitiveLibrary(feature_dim=3, sigma0=0.05, novelty_log_threshold=-50.0)
    observe(lib, np.zeros(3))
    far = np.array([5.0, 0.0, 0.0])
    assert log_density(lib.primitives[0], far) < -50.0
    assert observe(lib, far) == 1
    assert len(lib) == 2


def test_default_threshold_is_five_bandwidths():
    d, s = 48, 0.05
    seed = _prim([1.0], [np.zeros(d)], [np.full(d, s * s)])
    at5 = np.zeros(d)
    at5[0] = 5 * s
    assert log_density(seed, at5) == pytest.approx(default_novelty_threshold(d, s), abs=1e-9)


def test_observe_dimension_mismatch():
    with pytest.raises(LibraryError):
        observe(PrimitiveLibrary(feature_dim=3), np.zeros(4))


def test_merge_is_moment_matched():
    lib = PrimitiveLibrary(feature_dim=1, sigma0=0.5, component_cap=2, novelty_log_threshold=-1e6)
    for x in (0.0, 0.1, 5.0):
        observe(lib, np.array([x]))
    p = lib.primitives[0]
    assert p.n_components == 2
    # 0.0 and 0.1 merged: weights 1/3 + 1/3 (after the third sample rescales)
    i = int(np.argmin(np.abs(p.means[:, 0] - 0.05)))
    assert p.weights[i] == pytest.approx(2 / 3)
    assert p.means[i, 0] == pytest.approx(0.05)
    assert p.variances[i, 0] == pytest.approx(0.25 + 0.0025)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), cap=st.integers(1, 5), n=st.integers(1, 60))
def test_observe_invariants(seed, cap, n):
    rng = np.random.default_rng(seed)
    lib = PrimitiveLibrary(feature_dim=2, sigma0=0.3, component_cap=cap, variance_floor=1e-3)
    ids_seen = []
    for f in rng.normal(0, 1, (n, 2)):
        pid = observe(lib, f)
        if pid not in ids_seen:
            ids_seen.append(pid)
    assert ids_seen == sorted(ids_seen) == list(range(len(lib)))
    for p in lib.primitives.values():
        assert abs(p.weights.sum() - 1.0) < 1e-9
        assert p.n_components <= cap
        assert np.all(p.variances >= 1e-3)
        assert p.sample_count >= 1
    assert sum(p.sample_count for p in lib.primitives.values()) == n
    # re-observing a component mean never founds a new primitive
    before = len(lib)
    p0 = lib.primitives[0]
    observe(lib, p0.means[int(np.argmax(p0.weights))])
    assert len(lib) == before


def test_library_round_trip():
    rng = np.random.default_rng(3)
    lib = PrimitiveLibrary(feature_dim=4, sigma0=0.4, component_cap=3)
    for f in rng.normal(0, 1, (40, 4)):
        observe(lib, f)
    back = PrimitiveLibrary.from_dict(lib.to_dict())
    assert back.to_dict() == lib.to_dict()
    f = rng.normal(size=4)
    assert back.best_primitive(f) == lib.best_primitive(f)
