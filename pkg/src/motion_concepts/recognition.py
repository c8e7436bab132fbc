"""Assignment cost, minimum-cost assignment and the novelty margin test."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .concepts import ConceptRegistry, MotionConcept
from .prototype import MotionPrototype

RECOGNIZED = "recognized"
NOVEL = "novel"


def dtw_01(a: Sequence[int], b: Sequence[int]) -> float:
    """DTW with 0-1 local cost, normalized by the longer sequence length."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise ValueError("dtw_01 needs non-empty sequences")
    inf = float("inf")
    prev = [0.0] + [inf] * m
    for i in range(n):
        ai = a[i]
        cur = [inf] * (m + 1)
        for j in range(m):
            best = prev[j]
            if prev[j + 1] < best:
                best = prev[j + 1]
            if cur[j] < best:
                best = cur[j]
            cur[j + 1] = best + (0.0 if ai == b[j] else 1.0)
        prev = cur
    return prev[m] / max(n, m)


def _check_channels(c: MotionConcept, n: int, what: str) -> None:
    ref = c.prototypes[0]
    have = len(ref.tau) if what == "motion" else len(ref.rho)
    if have != n:
        raise ValueError(f"concept {c.designation!r} has {have} {what} channels, query has {n}")


def motion_cost(c: MotionConcept, tau: Sequence[Sequence[int]]) -> float:
    _check_channels(c, len(tau), "motion")
    return float(np.mean([[dtw_01(p.tau[k], tau[k]) for k in range(len(tau))] for p in c.prototypes]))


def context_cost_objects(c: MotionConcept, rho: np.ndarray) -> float:
    rho = np.asarray(rho, dtype=float)
    _check_channels(c, len(rho), "object")
    return float(np.mean([np.mean(np.abs(p.rho - rho), axis=1) for p in c.prototypes]))


def context_cost_location(c: MotionConcept, lam: np.ndarray) -> float:
    lam = np.asarray(lam, dtype=float)
    return float(np.mean([0.5 * np.sum(np.abs(p.lam - lam)) for p in c.prototypes]))


def cost_terms(c: MotionConcept, p: MotionPrototype) -> tuple[float, float, float]:
    """(motion, object, location) cost components, before weighting."""
    return motion_cost(c, p.tau), context_cost_objects(c, p.rho), context_cost_location(c, p.lam)


def assignment_cost(c: MotionConcept, p: MotionPrototype) -> float:
    m, o, l = cost_terms(c, p)
    return m + c.k_rho * o + c.k_lambda * l


@dataclass(frozen=True)
class RecognitionDecision:
    outcome: str
    candidate: str | None  # lowest-cost concept, reported even when novel
    c_r: float | None
    c_w: float | None
    costs: dict[str, float] = field(default_factory=dict)

    @property
    def recognized(self) -> bool:
        return self.outcome == RECOGNIZED

    @property
    def designation(self) -> str | None:
        return self.candidate if self.recognized else None

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "designation": self.designation,
            "candidate": self.candidate,
            "c_r": self.c_r,
            "c_w": self.c_w,
            "costs": self.costs,
        }


def decide(names: Sequence[str], costs: Sequence[float], delta_c: float, c_abs: float) -> RecognitionDecision:
    """Apply minimum-cost assignment and the margin test to precomputed costs."""
    if len(names) == 0:
        return RecognitionDecision(NOVEL, None, None, None, {})
    costs = [float(x) for x in costs]
    table = dict(zip(names, costs))
    r = int(np.argmin(costs))  # first minimum == earliest-created concept
    c_r = costs[r]
    if len(costs) == 1:
        outcome = RECOGNIZED if c_r <= c_abs else NOVEL
        return RecognitionDecision(outcome, names[r], c_r, None, table)
    c_w = float(np.mean(costs[:r] + costs[r + 1:]))
    outcome = RECOGNIZED if abs(c_r - c_w) >= delta_c * c_r else NOVEL
    return RecognitionDecision(outcome, names[r], c_r, c_w, table)


def recognize(reg: ConceptRegistry, p: MotionPrototype, delta_c: float | None = None,
              c_abs: float | None = None, use_context: bool = True) -> RecognitionDecision:
    delta_c = reg.config.delta_c if delta_c is None else delta_c
    c_abs = reg.config.c_abs if c_abs is None else c_abs
    names, costs = [], []
    for c in reg.concepts:
        m, o, l = cost_terms(c, p)
        k_rho, k_lambda = (c.k_rho, c.k_lambda) if use_context else (0.0, 0.0)
        names.append(c.designation)
        costs.append(m + k_rho * o + k_lambda * l)
    return decide(names, costs, delta_c, c_abs)
