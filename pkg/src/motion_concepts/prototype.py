"""Compile a demonstration into a motion prototype (tau, rho, lambda)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import Demonstration, LocationStream, ObjectStream
from .primitives import LibraryError, PrimitiveLibrary, featurize
from .segmentation import SegmentationParams, segment


@dataclass(frozen=True)
class MotionPrototype:
    """tau: per motion channel, the primitive-id sequence.
    rho: (M, |objects|) Bernoulli parameters per object channel.
    lam: (|locations|,) categorical location distribution.
    """

    tau: tuple[tuple[int, ...], ...]
    rho: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tau", tuple(tuple(int(i) for i in t) for t in self.tau))
        rho = np.array(self.rho, dtype=float)
        lam = np.array(self.lam, dtype=float)
        rho.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "lam", lam)

    def __eq__(self, other):
        if not isinstance(other, MotionPrototype):
            return NotImplemented
        return (self.tau == other.tau and np.array_equal(self.rho, other.rho)
                and np.array_equal(self.lam, other.lam))

    __hash__ = None

    def to_dict(self) -> dict:
        return {"tau": [list(t) for t in self.tau], "rho": self.rho.tolist(), "lambda": self.lam.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "MotionPrototype":
        return cls(tau=d["tau"], rho=d["rho"], lam=d["lambda"])


def estimate_object_dist(s: ObjectStream) -> np.ndarray:
    """Per-object fraction of timesteps in which the object is observed."""
    obs = s.observations
    if len(obs) == 0:
        raise ValueError("object stream is empty")
    return obs.sum(axis=0) / len(obs)


def estimate_location_dist(s: LocationStream, n_locations: int) -> np.ndarray:
    locs = s.locations
    if len(locs) == 0:
        raise ValueError("location stream is empty")
    return np.bincount(locs, minlength=n_locations) / len(locs)


def segment_features(d: Demonstration, seg: SegmentationParams, n_points: int) -> list[np.ndarray]:
    """One (n_segments, 6 * n_points) feature array per motion channel."""
    out = []
    for stream in d.motion:
        bounds = segment(stream, seg, d.sample_rate)
        out.append(np.array([featurize(stream, a, b, n_points) for a, b in bounds.ranges]))
    return out


def build_prototype(d: Demonstration, lib: PrimitiveLibrary, seg: SegmentationParams = SegmentationParams(),
                    learn: bool = False, n_locations: int | None = None) -> MotionPrototype:
    if not learn and not lib.primitives:
        raise LibraryError("cannot encode motion against an empty library without learning")
    n_points = lib.feature_dim // 6
    if n_locations is None:
        n_locations = int(d.location.locations.max()) + 1
    tau = []
    for feats in segment_features(d, seg, n_points):
        if learn:
            for f in feats:
                lib.observe(f)
        tau.append(tuple(lib.best_primitive(f)[0] for f in feats))
    rho = np.array([estimate_object_dist(o) for o in d.objects])
    lam = estimate_location_dist(d.location, n_locations)
    return MotionPrototype(tau=tuple(tau), rho=rho, lam=lam)
