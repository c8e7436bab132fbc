from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from motion_concepts.data_model import demonstrations_equal, validate_demonstration
from motion_concepts.synthetic import (CATALOG, CLASSES, TEMPLATES, GeneratorConfig, generate_dataset,
                                       generate_demo)

HANDS = {"left": 1, "right": 2}


def held_objects(demo):
    """Names of objects held per channel (set bits anywhere in the stream)."""
    out = {}
    for ch, i in (("head", 0), *HANDS.items()):
        cols = np.flatnonzero(demo.objects[i].observations.any(axis=0))
        out[ch] = {CATALOG.objects[c] for c in cols}
    return out


def test_table_shape():
    assert len(CLASSES) == 22
    assert CATALOG.locations == ("K", "LR", "DR", "BR")
    assert len(CATALOG.objects) >= 25


def test_determinism():
    a = generate_demo("Wave", GeneratorConfig(seed=3), draw=1)
    b = generate_demo("Wave", GeneratorConfig(seed=3), draw=1)
    assert demonstrations_equal(a, b)
    c = generate_demo("Wave", GeneratorConfig(seed=3), draw=2)
    assert not demonstrations_equal(a, c)


def test_unknown_class():
    with pytest.raises(KeyError):
        generate_demo("Juggle")


def test_confusable_pairs_share_generators_but_not_context():
    for a, b in (("Wave", "Wash Window"), ("Wash Hands", "Wash Plates")):
        ta, tb = TEMPLATES[a], TEMPLATES[b]
        assert ta.generator == tb.generator
        assert (ta.amplitude, ta.frequency) == (tb.amplitude, tb.frequency)
        assert (ta.locations, ta.objects) != (tb.locations, tb.objects)


def test_wash_window_context():
    d = generate_demo("Wash Window", GeneratorConfig(seed=1))
    assert held_objects(d)["right"] == {"Sponge"}
    assert set(d.location.locations.tolist()) == {CATALOG.location_index("K")}
    assert TEMPLATES["Wash Window"].generator == TEMPLATES["Wave"].generator
    w = generate_demo("Wave", GeneratorConfig(seed=1))
    assert all(not s for s in held_objects(w).values())


def test_throw_uses_whole_catalog():
    tpl = TEMPLATES["Throw"]
    assert set(tpl.locations) == set(CATALOG.locations)
    assert set(tpl.objects["right"]) == set(CATALOG.objects)
    seen_obj, seen_loc = set(), set()
    for draw in range(60):
        d = generate_demo("Throw", draw=draw)
        seen_obj |= held_objects(d)["right"]
        seen_loc.add(int(d.location.locations[0]))
    assert len(seen_loc) == 4
    assert len(seen_obj) > 15


def test_head_is_near_static_for_hand_actions():
    d = generate_demo("Wave")
    head, right = d.motion[0].positions, d.motion[2].positions
    assert np.ptp(head, axis=0).max() < 0.2
    assert np.ptp(right, axis=0).max() > np.ptp(head, axis=0).max()


def test_default_config_values():
    cfg = GeneratorConfig()
    assert (cfg.duration, cfg.sample_rate, cfg.n_samples) == (6.0, 60.0, 360)
    assert (cfg.position_noise, cfg.orientation_noise) == (0.01, 0.02)
    assert (cfg.amplitude_jitter, cfg.frequency_jitter) == (0.2, 0.2)
    assert not cfg.transit_prefix


def test_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(position_noise=-0.1)
    with pytest.raises(ValueError):
        GeneratorConfig(duration=0.01, sample_rate=60)


def test_transit_prefix_option():
    d = generate_demo("Wave", GeneratorConfig(transit_prefix=True))
    assert len(set(d.location.locations.tolist())) == 2
    assert validate_demonstration(d, CATALOG) == []


@pytest.mark.parametrize("cls", CLASSES)
def test_every_class_valid_and_context_faithful(cls):
    tpl = TEMPLATES[cls]
    for draw in range(3):
        d = generate_demo(cls, GeneratorConfig(seed=5), draw=draw)
        assert validate_demonstration(d, CATALOG) == []
        assert d.label == cls and d.n_samples == 360
        assert CATALOG.locations[int(d.location.locations[0])] in tpl.locations
        for ch, objs in held_objects(d).items():
            assert objs <= set(tpl.objects.get(ch, ()))
            assert len(objs) == (1 if tpl.objects.get(ch) else 0)


def test_dataset_counts_and_balance():
    ds = generate_dataset(n_per_class=2, seed=4)
    assert len(ds) == 44
    assert set(Counter(d.label for d in ds).values()) == {2}


def test_dataset_of_ten_per_class():
    ds = generate_dataset(n_per_class=10, seed=0, classes=["Wave", "Throw"])
    assert Counter(d.label for d in ds) == {"Wave": 10, "Throw": 10}


def test_dataset_determinism_and_shuffle():
    a = generate_dataset(n_per_class=2, seed=9)
    b = generate_dataset(n_per_class=2, seed=9)
    assert all(demonstrations_equal(x, y) for x, y in zip(a, b))
    labels = [d.label for d in a]
    assert labels != sorted(labels, key=CLASSES.index)


def test_dataset_rejects_zero():
    with pytest.raises(ValueError):
        generate_dataset(n_per_class=0)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2 ** 31), cls=st.sampled_from(CLASSES), draw=st.integers(0, 100))
def test_generated_demos_always_validate(seed, cls, draw):
    d = generate_demo(cls, GeneratorConfig(seed=seed), draw=draw)
    assert validate_demonstration(d, CATALOG) == []
    tpl = TEMPLATES[cls]
    assert CATALOG.locations[int(d.location.locations[0])] in tpl.locations
