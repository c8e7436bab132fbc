"""Low-velocity segmentation of motion streams.

Segments are half-open index ranges ``[start, stop)`` that tile ``[0, n)``
where ``n = T + 1`` is the stream length. Cuts fall at local minima of the
smoothed speed profile that are below a threshold; over-long segments are
split into equal parts. Every segment length lies in ``[min_len, max_len]``
as long as ``max_len >= 2 * min_len``; tighter settings can leave
subdivided pieces shorter than ``min_len``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import MotionStream


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True)
class SegmentationParams:
    speed_threshold: float = 0.05  # m/s
    min_len: int = 15
    max_len: int = 90
    smoothing_window: int = 5

    def __post_init__(self):
        if not 2 <= self.min_len <= self.max_len:
            raise ValueError(f"need 2 <= min_len <= max_len, got {self.min_len}, {self.max_len}")
        if self.speed_threshold < 0:
            raise ValueError("speed_threshold must be non-negative")
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise ValueError("smoothing_window must be odd and >= 1")


@dataclass(frozen=True)
class SegmentBoundaries:
    cut_indices: tuple[int, ...]
    n_samples: int

    @property
    def ranges(self) -> list[tuple[int, int]]:
        edges = (0, *self.cut_indices, self.n_samples)
        return list(zip(edges[:-1], edges[1:]))

    def __len__(self) -> int:
        return len(self.cut_indices) + 1


def speed_profile(positions: np.ndarray, sample_rate: float, window: int = 1) -> np.ndarray:
    """Central-difference speed (m/s), smoothed by a centered moving average."""
    vel = np.gradient(np.asarray(positions, dtype=float), axis=0) * sample_rate
    speed = np.linalg.norm(vel, axis=1)
    if window > 1:
        # edge-padded so the output keeps the input length
        half = window // 2
        padded = np.pad(speed, half, mode="edge")
        speed = np.convolve(padded, np.ones(window) / window, mode="valid")
    return speed


def _subdivide(start: int, stop: int, max_len: int) -> list[int]:
    length = stop - start
    if length <= max_len:
        return []
    parts = -(-length // max_len)
    return [start + (i * length) // parts for i in range(1, parts)]


def segment(stream: MotionStream, params: SegmentationParams = SegmentationParams(),
            sample_rate: float = 60.0) -> SegmentBoundaries:
    n = len(stream)
    if n < params.min_len:
        raise DegenerateInputError(f"stream of {n} samples is shorter than min_len={params.min_len}")
    speed = speed_profile(stream.positions, sample_rate, params.smoothing_window)

    cuts: list[int] = []
    if speed.max() >= params.speed_threshold:
        inner = np.arange(1, n - 1)
        is_min = (speed[inner] <= speed[inner - 1]) & (speed[inner] <= speed[inner + 1])
        cand = inner[is_min & (speed[inner] < params.speed_threshold)]
        cand = cand[(cand >= params.min_len) & (n - cand >= params.min_len)]
        # slowest first; equal speeds resolve to the earliest index
        for c in sorted(cand.tolist(), key=lambda i: (speed[i], i)):
            if all(abs(c - a) >= params.min_len for a in cuts):
                cuts.append(c)
        cuts.sort()

    edges = [0, *cuts, n]
    final = []
    for a, b in zip(edges[:-1], edges[1:]):
        final.extend(_subdivide(a, b, params.max_len))
        if b != n:
            final.append(b)
    return SegmentBoundaries(tuple(final), n)
