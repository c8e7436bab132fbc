"""Comparison recognizers: a per-class GMM-HMM over raw motion, and OMCL-N.

The HMM is ergodic with diagonal-Gaussian mixture emissions and is trained
by Baum-Welch. Forward/backward passes are scaled per timestep; emission
likelihoods are shifted by their per-timestep maximum before exponentiation
so long sequences stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from .concepts import ConceptRegistry
from .data_model import Demonstration
from .primitives import to_scipy
from .prototype import MotionPrototype
from .recognition import RecognitionDecision, recognize

LOG_2PI = np.log(2.0 * np.pi)
PROB_FLOOR = 1e-12  # keeps every transition/start probability positive


@dataclass
class GmmHmm:
    startprob: np.ndarray  # (h,)
    transmat: np.ndarray  # (h, h)
    weights: np.ndarray  # (h, k)
    means: np.ndarray  # (h, k, D)
    variances: np.ndarray  # (h, k, D)
    loglik_history: list[float] = field(default_factory=list)

    @property
    def n_states(self) -> int:
        return len(self.startprob)

    @property
    def dim(self) -> int:
        return self.means.shape[2]


@dataclass(frozen=True)
class HmmParams:
    n_states: int = 16
    n_components: int = 3
    n_iter: int = 20
    variance_floor: float = 1e-4
    seed: int = 0


def hmm_features(d: Demonstration) -> np.ndarray:
    """(T+1, 6K): per channel, origin-shifted position and rotation vector relative to frame 0."""
    cols = []
    for m in d.motion:
        rots = Rotation.from_quat(to_scipy(m.orientations))
        cols.append(m.positions - m.positions[0])
        cols.append((rots[0].inv() * rots).as_rotvec())
    return np.hstack(cols)


def _component_logpdf(model: GmmHmm, x: np.ndarray) -> np.ndarray:
    """(T, h, k) array of log w_sj + log N(x_t; mu_sj, var_sj)."""
    var = model.variances
    const = -0.5 * (model.dim * LOG_2PI + np.log(var).sum(axis=2))  # (h, k)
    inv = 1.0 / var
    # sum_d (x - mu)^2 / var expanded to avoid a (T, h, k, D) temporary
    quad = (x * x) @ inv.reshape(-1, model.dim).T
    quad -= 2.0 * x @ (model.means * inv).reshape(-1, model.dim).T
    quad += (model.means ** 2 * inv).sum(axis=2).reshape(1, -1)
    h, k = model.weights.shape
    with np.errstate(divide="ignore"):
        logw = np.log(model.weights)
    return logw + const + -0.5 * quad.reshape(len(x), h, k)


def _lse(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(a - m), axis=axis))


def _forward(model: GmmHmm, log_b: np.ndarray):
    """Scaled forward pass. Returns (alpha_hat, scales, shifted emissions, loglik)."""
    shift = log_b.max(axis=1)
    b = np.exp(log_b - shift[:, None])
    n, h = b.shape
    alpha = np.empty((n, h))
    scale = np.empty(n)
    a = model.startprob * b[0]
    for t in range(n):
        if t:
            a = (alpha[t - 1] @ model.transmat) * b[t]
        s = a.sum()
        scale[t] = s
        alpha[t] = a / s
    return alpha, scale, b, float(np.sum(np.log(scale)) + shift.sum())


def hmm_loglik(model: GmmHmm, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.dim:
        raise ValueError(f"sequence of shape {x.shape} does not match model dimension {model.dim}")
    log_b = _lse(_component_logpdf(model, x), axis=2)
    return _forward(model, log_b)[3]


def _init_model(sequences: Sequence[np.ndarray], p: HmmParams) -> GmmHmm:
    h, k = p.n_states, p.n_components
    rng = np.random.default_rng(p.seed)
    allx = np.vstack(sequences)
    dim = allx.shape[1]
    bins = [[] for _ in range(h)]
    for x in sequences:
        for s, chunk in enumerate(np.array_split(x, h)):
            if len(chunk):
                bins[s].append(chunk)
    means = np.empty((h, k, dim))
    variances = np.empty((h, k, dim))
    for s in range(h):
        frames = np.vstack(bins[s]) if bins[s] else allx
        mu, var = frames.mean(axis=0), np.maximum(frames.var(axis=0), p.variance_floor)
        spread = rng.standard_normal((k, dim)) if k > 1 else np.zeros((1, dim))
        means[s] = mu + 0.5 * np.sqrt(var) * spread
        variances[s] = var
    trans = np.full((h, h), 0.1 / h)
    trans[np.arange(h), np.arange(h)] += 0.6
    trans[np.arange(h), (np.arange(h) + 1) % h] += 0.3
    trans /= trans.sum(axis=1, keepdims=True)
    return GmmHmm(
        startprob=np.full(h, 1.0 / h),
        transmat=trans,
        weights=np.full((h, k), 1.0 / k),
        means=means,
        variances=variances,
    )


def _floor_rows(m: np.ndarray) -> np.ndarray:
    m = np.maximum(m, PROB_FLOOR)
    return m / m.sum(axis=-1, keepdims=True)


def hmm_train(sequences: Sequence[np.ndarray], params: HmmParams = HmmParams()) -> GmmHmm:
    """Baum-Welch from a deterministic binned initialization.

    ``loglik_history[i]`` is the total log-likelihood of the training data
    under the parameters after ``i`` EM updates.
    """
    if not sequences:
        raise ValueError("need at least one training sequence")
    if params.n_states < 1 or params.n_components < 1:
        raise ValueError("n_states and n_components must be >= 1")
    seqs = [np.asarray(x, dtype=float) for x in sequences]
    model = _init_model(seqs, params)
    h, k = params.n_states, params.n_components
    history = []
    for it in range(params.n_iter + 1):
        start_acc = np.zeros(h)
        trans_acc = np.zeros((h, h))
        resp_sum = np.zeros((h, k))
        resp_x = np.zeros((h, k, model.dim))
        resp_xx = np.zeros((h, k, model.dim))
        total = 0.0
        for x in seqs:
            log_c = _component_logpdf(model, x)
            log_b = _lse(log_c, axis=2)
            alpha, scale, b, ll = _forward(model, log_b)
            total += ll
            n = len(x)
            beta = np.empty_like(alpha)
            beta[-1] = 1.0
            for t in range(n - 2, -1, -1):
                beta[t] = model.transmat @ (b[t + 1] * beta[t + 1]) / scale[t + 1]
            gamma = alpha * beta
            gamma /= gamma.sum(axis=1, keepdims=True)
            start_acc += gamma[0]
            if n > 1:
                nxt = (b[1:] * beta[1:]) / scale[1:, None]
                trans_acc += model.transmat * (alpha[:-1].T @ nxt)
            with np.errstate(invalid="ignore"):
                comp = np.exp(log_c - log_b[:, :, None])
            comp = np.nan_to_num(comp)
            r = gamma[:, :, None] * comp  # (T, h, k)
            resp_sum += r.sum(axis=0)
            resp_x += np.einsum("tsj,td->sjd", r, x)
            resp_xx += np.einsum("tsj,td->sjd", r, x * x)
        history.append(total)
        if it == params.n_iter:
            break
        model.startprob = _floor_rows(start_acc / start_acc.sum())
        rows = trans_acc.sum(axis=1, keepdims=True)
        model.transmat = _floor_rows(np.where(rows > 0, trans_acc / np.where(rows > 0, rows, 1), model.transmat))
        occ = resp_sum.sum(axis=1, keepdims=True)
        model.weights = np.where(occ > 0, resp_sum / np.where(occ > 0, occ, 1), model.weights)
        live = resp_sum > 0
        safe = np.where(live, resp_sum, 1.0)[:, :, None]
        mu = resp_x / safe
        var = resp_xx / safe - mu ** 2
        model.means = np.where(live[:, :, None], mu, model.means)
        model.variances = np.maximum(np.where(live[:, :, None], var, model.variances), params.variance_floor)
    model.loglik_history = history
    return model


def hmm_classify(models: Mapping[str, GmmHmm], d: Demonstration | np.ndarray) -> str:
    if not models:
        raise ValueError("no models to classify with")
    x = hmm_features(d) if isinstance(d, Demonstration) else d
    best, best_ll = None, -np.inf
    for name in sorted(models):
        ll = hmm_loglik(models[name], x)
        if best is None or ll > best_ll:
            best, best_ll = name, ll
    return best


def omcl_n_recognize(reg: ConceptRegistry, p: MotionPrototype, delta_c: float | None = None) -> RecognitionDecision:
    """Recognition with both context weights forced to zero for every concept."""
    return recognize(reg, p, delta_c=delta_c, use_context=False)
