import numpy as np
import pytest

from motion_concepts.data_model import (Demonstration, EnvironmentCatalog, LocationStream, MotionStream,
                                        ObjectStream)

# lines printed by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


SMALL_CATALOG = EnvironmentCatalog(objects=("Mug", "Glass", "Knife", "Fork"), locations=("K", "LR", "DR", "BR"),
                                   name="small")


def identity_quats(n):
    q = np.zeros((n, 4))
    q[:, 0] = 1.0
    return q


def still_stream(n, at=(0.0, 0.0, 0.0)):
    return MotionStream(np.tile(np.asarray(at, dtype=float), (n, 1)), identity_quats(n))


def make_demo(n=30, k=3, m=3, catalog=SMALL_CATALOG, held=None, location=0, label="x", rng=None):
    """Random-walk motion, ``held`` = {channel: object index} held for the whole demo."""
    rng = np.random.default_rng(0) if rng is None else rng
    motion = []
    for _ in range(k):
        pos = np.cumsum(rng.normal(0, 0.01, (n, 3)), axis=0)
        q = rng.normal(size=(n, 4))
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        q[q[:, 0] < 0] *= -1
        motion.append(MotionStream(pos, q))
    objects = []
    for ch in range(m):
        obs = np.zeros((n, catalog.n_objects), dtype=np.int8)
        if held and ch in held:
            obs[:, held[ch]] = 1
        objects.append(ObjectStream(obs))
    return Demonstration(motion, objects, LocationStream(np.full(n, location)), label=label,
                         catalog_ref=catalog.name)


@pytest.fixture
def catalog():
    return SMALL_CATALOG
