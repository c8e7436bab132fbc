"""Motion primitives as online Gaussian-mixture KDEs over segment features.

A segment is embedded as ``F`` resampled points, each contributing its
position relative to the first point (3 values, world axes) followed by its
orientation relative to the first frame as a rotation vector (3 values).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation, Slerp

from .data_model import MotionStream

LOG_2PI = math.log(2.0 * math.pi)


class LibraryError(ValueError):
    pass


def to_scipy(q: np.ndarray) -> np.ndarray:
    """Scalar-first (w, x, y, z) to scipy's scalar-last layout."""
    return np.asarray(q)[..., [1, 2, 3, 0]]


def from_scipy(q: np.ndarray) -> np.ndarray:
    return np.asarray(q)[..., [3, 0, 1, 2]]


def featurize(stream: MotionStream, start: int, stop: int, n_points: int = 8) -> np.ndarray:
    """Embed the half-open sample range ``[start, stop)`` as a ``6 * n_points`` vector."""
    if stop - start < 2:
        raise ValueError(f"segment [{start}, {stop}) has fewer than 2 samples")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    pos = stream.positions[start:stop]
    idx = np.arange(stop - start, dtype=float)
    t = np.linspace(0.0, idx[-1], n_points)
    res_pos = np.column_stack([np.interp(t, idx, pos[:, j]) for j in range(3)])
    rots = Slerp(idx, Rotation.from_quat(to_scipy(stream.orientations[start:stop])))(t)
    rel = (rots[0].inv() * rots).as_rotvec()
    return np.hstack([res_pos - res_pos[0], rel]).ravel()


def _logsumexp(x: np.ndarray) -> float:
    m = x.max()
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.sum(np.exp(x - m))))


def _component_terms(logw: np.ndarray, means: np.ndarray, variances: np.ndarray, f: np.ndarray) -> np.ndarray:
    """log w_j + log N(f; mu_j, diag(var_j)) for every component."""
    d = f - means
    return logw - 0.5 * (means.shape[1] * LOG_2PI + np.sum(np.log(variances) + d * d / variances, axis=1))


@dataclass
class MotionPrimitive:
    id: int
    weights: np.ndarray  # (J,)
    means: np.ndarray  # (J, D)
    variances: np.ndarray  # (J, D)
    sample_count: int = 1

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "sample_count": self.sample_count,
            "components": [
                {"weight": float(w), "mean": m.tolist(), "var": v.tolist()}
                for w, m, v in zip(self.weights, self.means, self.variances)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MotionPrimitive":
        comps = d["components"]
        return cls(
            id=int(d["id"]),
            weights=np.array([c["weight"] for c in comps], dtype=float),
            means=np.array([c["mean"] for c in comps], dtype=float),
            variances=np.array([c["var"] for c in comps], dtype=float),
            sample_count=int(d["sample_count"]),
        )


def log_density(p: MotionPrimitive, f: np.ndarray, log_floor: float = -1e12) -> float:
    f = np.asarray(f, dtype=float)
    if f.shape != (p.dim,):
        raise LibraryError(f"feature of shape {f.shape} does not match primitive dimension {p.dim}")
    with np.errstate(divide="ignore"):
        logw = np.log(p.weights)
    return max(_logsumexp(_component_terms(logw, p.means, p.variances, f)), log_floor)


def default_novelty_threshold(dim: int, sigma0: float) -> float:
    """Log-density of an isotropic seed Gaussian at 5 bandwidths from its mean."""
    return -0.5 * dim * math.log(2.0 * math.pi * sigma0 ** 2) - 12.5


@dataclass
class PrimitiveLibrary:
    feature_dim: int = 48
    sigma0: float = 0.05
    variance_floor: float = 1e-6
    component_cap: int = 16
    novelty_log_threshold: float | None = None
    log_floor: float = -1e12
    primitives: dict[int, MotionPrimitive] = field(default_factory=dict)
    next_id: int = 0

    def __post_init__(self):
        if self.novelty_log_threshold is None:
            self.novelty_log_threshold = default_novelty_threshold(self.feature_dim, self.sigma0)
        self._stacked = None

    def __len__(self) -> int:
        return len(self.primitives)

    def _check(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.feature_dim,):
            raise LibraryError(f"feature of shape {f.shape} does not match library dimension {self.feature_dim}")
        return f

    def _stack(self):
        if self._stacked is None:
            ids = sorted(self.primitives)
            prims = [self.primitives[i] for i in ids]
            counts = np.array([p.n_components for p in prims])
            with np.errstate(divide="ignore"):
                logw = np.log(np.concatenate([p.weights for p in prims]))
            self._stacked = (
                np.array(ids),
                np.concatenate([[0], np.cumsum(counts)[:-1]]),
                logw,
                np.concatenate([p.means for p in prims]),
                np.concatenate([p.variances for p in prims]),
            )
        return self._stacked

    def scores(self, f) -> tuple[np.ndarray, np.ndarray]:
        """(ids ascending, log-density of each primitive at f)."""
        f = self._check(f)
        if not self.primitives:
            raise LibraryError("library is empty")
        ids, starts, logw, means, variances = self._stack()
        terms = _component_terms(logw, means, variances, f)
        peak = np.maximum.reduceat(terms, starts)
        owner = np.repeat(np.arange(len(ids)), np.diff(np.append(starts, len(terms))))
        with np.errstate(invalid="ignore"):
            ll = peak + np.log(np.add.reduceat(np.exp(terms - peak[owner]), starts))
        ll = np.where(np.isfinite(peak), ll, peak)
        return ids, np.maximum(ll, self.log_floor)

    def best_primitive(self, f) -> tuple[int, float]:
        ids, ll = self.scores(f)
        j = int(np.argmax(ll))
        return int(ids[j]), float(ll[j])

    def observe(self, f) -> int:
        f = self._check(f)
        if self.primitives:
            pid, ll = self.best_primitive(f)
            if ll >= self.novelty_log_threshold:
                self._absorb(self.primitives[pid], f)
                self._stacked = None
                return pid
        pid = self.next_id
        self.next_id += 1
        self.primitives[pid] = MotionPrimitive(
            id=pid,
            weights=np.ones(1),
            means=f[None, :].copy(),
            variances=np.full((1, self.feature_dim), max(self.sigma0 ** 2, self.variance_floor)),
        )
        self._stacked = None
        return pid

    def _absorb(self, p: MotionPrimitive, f: np.ndarray) -> None:
        n = p.sample_count
        w = np.append(p.weights * (n / (n + 1.0)), 1.0 / (n + 1.0))
        p.weights = w / w.sum()
        p.means = np.vstack([p.means, f])
        p.variances = np.vstack([p.variances, np.full(self.feature_dim, max(self.sigma0 ** 2, self.variance_floor))])
        p.sample_count = n + 1
        while p.n_components > self.component_cap:
            self._merge_closest(p)

    def _merge_closest(self, p: MotionPrimitive) -> None:
        diff = p.means[:, None, :] - p.means[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        dist[np.tril_indices(len(dist))] = np.inf
        i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
        wi, wj = p.weights[i], p.weights[j]
        w = wi + wj
        mu = (wi * p.means[i] + wj * p.means[j]) / w
        second = (wi * (p.variances[i] + p.means[i] ** 2) + wj * (p.variances[j] + p.means[j] ** 2)) / w
        var = np.maximum(second - mu ** 2, self.variance_floor)
        p.weights[i], p.means[i], p.variances[i] = w, mu, var
        keep = np.arange(p.n_components) != j
        p.weights = p.weights[keep] / p.weights[keep].sum()
        p.means = p.means[keep]
        p.variances = p.variances[keep]

    def to_dict(self) -> dict:
        return {
            "feature_dim": self.feature_dim,
            "sigma0": self.sigma0,
            "variance_floor": self.variance_floor,
            "component_cap": self.component_cap,
            "novelty_log_threshold": self.novelty_log_threshold,
            "log_floor": self.log_floor,
            "next_id": self.next_id,
            "primitives": [self.primitives[i].to_dict() for i in sorted(self.primitives)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PrimitiveLibrary":
        prims = [MotionPrimitive.from_dict(p) for p in d["primitives"]]
        return cls(
            feature_dim=int(d["feature_dim"]),
            sigma0=float(d["sigma0"]),
            variance_floor=float(d["variance_floor"]),
            component_cap=int(d["component_cap"]),
            novelty_log_threshold=float(d["novelty_log_threshold"]),
            log_floor=float(d["log_floor"]),
            primitives={p.id: p for p in prims},
            next_id=int(d["next_id"]),
        )


def best_primitive(lib: PrimitiveLibrary, f) -> tuple[int, float]:
    return lib.best_primitive(f)


def observe(lib: PrimitiveLibrary, f) -> int:
    return lib.observe(f)
