import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_demo
from motion_concepts.data_model import LocationStream, ObjectStream
from motion_concepts.primitives import LibraryError, PrimitiveLibrary
from motion_concepts.prototype import (MotionPrototype, build_prototype, estimate_location_dist,
                                       estimate_object_dist, segment_features)
from motion_concepts.segmentation import SegmentationParams
from motion_concepts.synthetic import CATALOG, generate_demo

SEG = SegmentationParams(min_len=5, max_len=10)


def test_object_dist_half():
    obs = np.zeros((6, 3), dtype=np.int8)
    obs[:3, 1] = 1
    rho = estimate_object_dist(ObjectStream(obs))
    assert rho.tolist() == [0.0, 0.5, 0.0]


def test_location_dist_cases():
    assert estimate_location_dist(LocationStream([0] * 8), 4).tolist() == [1.0, 0.0, 0.0, 0.0]
    assert estimate_location_dist(LocationStream([0, 1] * 4), 4).tolist() == [0.5, 0.5, 0.0, 0.0]


def test_empty_streams_rejected():
    with pytest.raises(ValueError):
        estimate_object_dist(ObjectStream(np.zeros((0, 3))))
    with pytest.raises(ValueError):
        estimate_location_dist(LocationStream([]), 4)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(1, 50), n_obj=st.integers(1, 8), n_loc=st.integers(1, 6))
def test_estimates_equal_counting_oracle(seed, n, n_obj, n_loc):
    rng = np.random.default_rng(seed)
    obs = rng.integers(0, 2, (n, n_obj))
    locs = rng.integers(0, n_loc, n)
    rho = estimate_object_dist(ObjectStream(obs))
    lam = estimate_location_dist(LocationStream(locs), n_loc)
    for o in range(n_obj):
        count = 0
        for t in range(n):
            count += int(obs[t, o] == 1)
        assert rho[o] == count / n
    for loc in range(n_loc):
        assert lam[loc] == sum(1 for t in range(n) if locs[t] == loc) / n
    assert abs(lam.sum() - 1.0) < 1e-9


def test_first_demo_grows_library():
    d = make_demo(n=40, held={2: 1}, location=2)
    lib = PrimitiveLibrary(feature_dim=48)
    p = build_prototype(d, lib, SEG, learn=True, n_locations=4)
    assert len(p.tau) == 3 and all(len(t) > 0 for t in p.tau)
    assert len(lib) > 0
    assert all(i in lib.primitives for t in p.tau for i in t)
    assert p.rho.shape == (3, 4)
    assert p.rho[2, 1] == 1.0
    assert p.lam.tolist() == [0.0, 0.0, 1.0, 0.0]


def test_tau_lengths_equal_segment_counts():
    d = make_demo(n=60)
    lib = PrimitiveLibrary(feature_dim=48)
    p = build_prototype(d, lib, SEG, learn=True, n_locations=4)
    assert [len(t) for t in p.tau] == [len(f) for f in segment_features(d, SEG, 8)]


def test_replay_without_learning_is_deterministic_and_read_only():
    d = make_demo(n=50)
    lib = PrimitiveLibrary(feature_dim=48)
    p1 = build_prototype(d, lib, SEG, learn=True, n_locations=4)
    snapshot = lib.to_dict()
    p2 = build_prototype(d, lib, SEG, learn=False, n_locations=4)
    p3 = build_prototype(d, lib, SEG, learn=False, n_locations=4)
    assert lib.to_dict() == snapshot
    assert p2 == p3
    assert p2.tau == p1.tau


def test_empty_library_without_learning():
    with pytest.raises(LibraryError):
        build_prototype(make_demo(n=30), PrimitiveLibrary(feature_dim=48), SEG, learn=False)


def test_stir_pot_context_peaks():
    d = generate_demo("Stir Pot")
    p = build_prototype(d, PrimitiveLibrary(), learn=True, n_locations=CATALOG.n_locations)
    right = 2
    assert CATALOG.objects[int(np.argmax(p.rho[right]))] == "Spoon"
    assert CATALOG.locations[int(np.argmax(p.lam))] == "K"


def test_prototype_round_trip_and_immutability():
    p = MotionPrototype(tau=[[1, 2], [0]], rho=[[0.5, 0.0]], lam=[1.0, 0.0])
    assert MotionPrototype.from_dict(p.to_dict()) == p
    with pytest.raises(ValueError):
        p.rho[0, 0] = 1.0
