"""One-shot recognition experiments, grid searches and report files."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .baselines import HmmParams, hmm_features, hmm_loglik, hmm_train
from .concepts import ConceptRegistry, OmclConfig
from .data_model import Demonstration, EnvironmentCatalog
from .primitives import PrimitiveLibrary
from .prototype import MotionPrototype, build_prototype
from .recognition import cost_terms, decide
from .segmentation import SegmentationParams

RECOGNIZERS = ("omcl", "omcl-n", "gmm-hmm")


@dataclass(frozen=True)
class LibraryParams:
    n_points: int = 8
    sigma0: float = 0.05
    variance_floor: float = 1e-6
    component_cap: int = 16
    novelty_log_threshold: float | None = None

    def new_library(self) -> PrimitiveLibrary:
        return PrimitiveLibrary(
            feature_dim=6 * self.n_points, sigma0=self.sigma0, variance_floor=self.variance_floor,
            component_cap=self.component_cap, novelty_log_threshold=self.novelty_log_threshold,
        )


@dataclass(frozen=True)
class OmclParams:
    segmentation: SegmentationParams = SegmentationParams()
    library: LibraryParams = LibraryParams()
    concepts: OmclConfig = OmclConfig()
    hmm: HmmParams = HmmParams()


@dataclass
class OsrReport:
    recognizer: str
    classes: list[str]
    run_accuracy: list[float] = field(default_factory=list)
    confusion: list[list[int]] = field(default_factory=list)  # rows true, columns predicted
    novelty_flags: int = 0
    predictions: list[list[str]] = field(default_factory=list)  # per run, per test demo: [true, predicted]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.run_accuracy))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.run_accuracy))

    @property
    def total(self) -> int:
        return int(np.sum(self.confusion))

    @property
    def accuracy(self) -> float:
        """Pooled accuracy, trace / total over every run."""
        return float(np.trace(self.confusion) / self.total)

    def per_class_accuracy(self) -> dict[str, float]:
        cm = np.asarray(self.confusion)
        rows = cm.sum(axis=1)
        return {c: float(cm[i, i] / rows[i]) if rows[i] else float("nan") for i, c in enumerate(self.classes)}

    def block_accuracy(self, pair: Sequence[str]) -> float:
        """Accuracy inside the confusion sub-matrix of a group of classes."""
        idx = [self.classes.index(c) for c in pair]
        block = np.asarray(self.confusion)[np.ix_(idx, idx)]
        return float(np.trace(block) / block.sum()) if block.sum() else float("nan")

    def to_dict(self) -> dict:
        return {
            "recognizer": self.recognizer,
            "classes": self.classes,
            "runs": len(self.run_accuracy),
            "run_accuracy": self.run_accuracy,
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "accuracy": self.accuracy,
            "per_class_accuracy": self.per_class_accuracy(),
            "confusion": self.confusion,
            "novelty_flags": self.novelty_flags,
            "predictions": self.predictions,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OsrReport":
        return cls(recognizer=d["recognizer"], classes=list(d["classes"]), run_accuracy=list(d["run_accuracy"]),
                   confusion=d["confusion"], novelty_flags=d["novelty_flags"], predictions=d["predictions"])

    def merge(self, other: "OsrReport") -> "OsrReport":
        if other.classes != self.classes or other.recognizer != self.recognizer:
            raise ValueError("can only merge reports over the same classes and recognizer")
        cm = (np.asarray(self.confusion) + np.asarray(other.confusion)).tolist() if self.confusion else other.confusion
        return OsrReport(self.recognizer, self.classes, self.run_accuracy + other.run_accuracy, cm,
                         self.novelty_flags + other.novelty_flags, self.predictions + other.predictions)


@dataclass(frozen=True)
class GridSearchReport:
    parameter_names: tuple[str, ...]
    tuples: list[tuple[float, ...]]
    mean_scores: list[float]
    selected: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "parameters": list(self.parameter_names),
            "evaluated": [{"values": list(t), "mean_score": s} for t, s in zip(self.tuples, self.mean_scores)],
            "selected": list(self.selected),
        }


# ------------------------------------------------------------------ OMCL

def train_omcl(train: Sequence[Demonstration], catalog: EnvironmentCatalog,
               params: OmclParams = OmclParams()) -> ConceptRegistry:
    """Learn one concept per training demonstration label, in the given order."""
    reg = ConceptRegistry(catalog=catalog, library=params.library.new_library(), config=params.concepts)
    for d in train:
        if d.label is None:
            raise ValueError("training demonstrations need labels")
        p = build_prototype(d, reg.library, params.segmentation, learn=True, n_locations=catalog.n_locations)
        reg.learn(p, d.label)
    return reg


def encode(demos: Sequence[Demonstration], reg: ConceptRegistry, params: OmclParams) -> list[MotionPrototype]:
    return [build_prototype(d, reg.library, params.segmentation, learn=False,
                            n_locations=reg.catalog.n_locations) for d in demos]


def cost_tensor(reg: ConceptRegistry, prototypes: Sequence[MotionPrototype]) -> np.ndarray:
    """(n_queries, n_concepts, 3) unweighted (motion, object, location) costs."""
    return np.array([[cost_terms(c, p) for c in reg.concepts] for p in prototypes]).reshape(
        len(prototypes), len(reg.concepts), 3)


def weighted_costs(terms: np.ndarray, k_rho, k_lambda) -> np.ndarray:
    return terms[..., 0] + k_rho * terms[..., 1] + k_lambda * terms[..., 2]


def _check_split(train, test):
    seen = {d.label for d in train}
    if len(seen) != len(train):
        raise ValueError("one-shot training needs exactly one demonstration per class")
    missing = sorted({d.label for d in test} - seen)
    if missing:
        raise ValueError(f"test classes missing from training: {missing}")


def _report(recognizer, classes, truth, preds, flags=0) -> OsrReport:
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=int)
    for t, p in zip(truth, preds):
        cm[index[t], index[p]] += 1
    acc = float(np.trace(cm) / len(truth)) if truth else float("nan")
    return OsrReport(recognizer, list(classes), [acc], cm.tolist(), flags,
                     [[t, p] for t, p in zip(truth, preds)])


def run_osr(train: Sequence[Demonstration], test: Sequence[Demonstration], recognizer: str,
            catalog: EnvironmentCatalog, params: OmclParams = OmclParams(), seed: int = 0) -> OsrReport:
    """Closed-set one-shot recognition: every test demo is assigned to some class."""
    return run_osr_multi(train, test, (recognizer,), catalog, params, seed)[recognizer]


def run_osr_multi(train, test, recognizers, catalog, params: OmclParams = OmclParams(), seed: int = 0,
                  weights: tuple[float, float] | None = None) -> dict[str, OsrReport]:
    """Like run_osr for several recognizers, sharing the OMCL encoding work.

    ``weights`` overrides every concept's (k_rho, k_lambda) for the omcl recognizer.
    """
    _check_split(train, test)
    for r in recognizers:
        if r not in RECOGNIZERS:
            raise ValueError(f"unknown recognizer {r!r}; choose from {RECOGNIZERS}")
    classes = sorted(d.label for d in train)
    truth = [d.label for d in test]
    out = {}
    if {"omcl", "omcl-n"} & set(recognizers):
        reg = train_omcl(train, catalog, params)
        names = [c.designation for c in reg.concepts]
        terms = cost_tensor(reg, encode(test, reg, params))
        if weights is None:
            k_rho = np.array([c.k_rho for c in reg.concepts])
            k_lambda = np.array([c.k_lambda for c in reg.concepts])
        else:
            k_rho, k_lambda = np.full(len(names), weights[0]), np.full(len(names), weights[1])
        cfg = params.concepts
        for r in ("omcl", "omcl-n"):
            if r not in recognizers:
                continue
            costs = weighted_costs(terms, k_rho, k_lambda) if r == "omcl" else weighted_costs(terms, 0.0, 0.0)
            decisions = [decide(names, row, cfg.delta_c, cfg.c_abs) for row in costs]
            out[r] = _report(r, classes, truth, [d.candidate for d in decisions],
                             sum(not d.recognized for d in decisions))
    if "gmm-hmm" in recognizers:
        models = {d.label: hmm_train([hmm_features(d)], replace(params.hmm, seed=seed)) for d in train}
        preds = []
        for d in test:
            x = hmm_features(d)
            lls = [(hmm_loglik(models[c], x), c) for c in classes]
            best = max(lls, key=lambda v: v[0])[0]
            preds.append(min(c for ll, c in lls if ll == best))
        out["gmm-hmm"] = _report("gmm-hmm", classes, truth, preds)
    return {r: out[r] for r in recognizers}


def split_one_shot(dataset: Sequence[Demonstration], rng: np.random.Generator):
    """Draw one training demo per class; everything else is test data."""
    by_class: dict[str, list[int]] = {}
    for i, d in enumerate(dataset):
        by_class.setdefault(d.label, []).append(i)
    picks = {c: idx[int(rng.integers(len(idx)))] for c, idx in sorted(by_class.items())}
    train_idx = sorted(picks.values())
    chosen = set(train_idx)
    return [dataset[i] for i in train_idx], [d for i, d in enumerate(dataset) if i not in chosen]


def _require_two_per_class(dataset):
    counts: dict[str, int] = {}
    for d in dataset:
        counts[d.label] = counts.get(d.label, 0) + 1
    short = sorted(c for c, n in counts.items() if n < 2)
    if short:
        raise ValueError(f"classes with fewer than 2 demonstrations: {short}")


def osr_experiment(dataset: Sequence[Demonstration], catalog: EnvironmentCatalog,
                   recognizers=RECOGNIZERS, repetitions: int = 10, seed: int = 0,
                   params: OmclParams = OmclParams(),
                   weights: tuple[float, float] | None = None) -> dict[str, OsrReport]:
    _require_two_per_class(dataset)
    rng = np.random.default_rng(seed)
    merged: dict[str, OsrReport] = {}
    for rep in range(repetitions):
        train, test = split_one_shot(dataset, rng)
        runs = run_osr_multi(train, test, recognizers, catalog, params, seed=seed + rep, weights=weights)
        for r, rep_report in runs.items():
            merged[r] = merged[r].merge(rep_report) if r in merged else rep_report
    return merged


def _select(tuples, scores):
    best = max(scores)
    # ties resolve to the lexicographically smallest tuple
    return min(t for t, s in zip(tuples, scores) if s == best)


def grid_search_weights(dataset: Sequence[Demonstration], catalog: EnvironmentCatalog,
                        grid: Sequence[tuple[float, float]], repeats: int = 10, seed: int = 0,
                        params: OmclParams = OmclParams()) -> GridSearchReport:
    """Grid over (k_lambda0, k_rho0), scored by mean closed-set accuracy."""
    _require_two_per_class(dataset)
    grid = [tuple(float(v) for v in g) for g in grid]
    rng = np.random.default_rng(seed)
    scores = np.zeros(len(grid))
    for _ in range(repeats):
        train, test = split_one_shot(dataset, rng)
        reg = train_omcl(train, catalog, params)
        names = [c.designation for c in reg.concepts]
        terms = cost_tensor(reg, encode(test, reg, params))
        truth = np.array([names.index(d.label) for d in test])
        for g, (k_lambda, k_rho) in enumerate(grid):
            pred = np.argmin(weighted_costs(terms, k_rho, k_lambda), axis=1)
            scores[g] += np.mean(pred == truth)
    scores /= repeats
    return GridSearchReport(("k_lambda0", "k_rho0"), grid, scores.tolist(), _select(grid, scores.tolist()))


def grid_search_delta(dataset: Sequence[Demonstration], catalog: EnvironmentCatalog,
                      weights: tuple[float, float], grid: Sequence[float], repeats: int = 10, seed: int = 0,
                      params: OmclParams = OmclParams()) -> GridSearchReport:
    """Grid over the novelty margin; score = fraction confirmed AND correctly assigned.

    ``weights`` is (k_lambda0, k_rho0).
    """
    _require_two_per_class(dataset)
    grid = [float(v) for v in grid]
    k_lambda, k_rho = weights
    rng = np.random.default_rng(seed)
    scores = np.zeros(len(grid))
    for _ in range(repeats):
        train, test = split_one_shot(dataset, rng)
        reg = train_omcl(train, catalog, params)
        names = [c.designation for c in reg.concepts]
        costs = weighted_costs(cost_tensor(reg, encode(test, reg, params)), k_rho, k_lambda)
        for g, delta in enumerate(grid):
            hits = [decide(names, row, delta, params.concepts.c_abs) for row in costs]
            scores[g] += np.mean([h.recognized and h.candidate == d.label for h, d in zip(hits, test)])
    scores /= repeats
    tuples = [(v,) for v in grid]
    return GridSearchReport(("delta_c",), tuples, scores.tolist(), _select(tuples, scores.tolist()))


# --------------------------------------------------------------- reports

def _dump(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_report(report: OsrReport, out_dir: str | Path, stem: str | None = None) -> list[Path]:
    """Write ``<stem>_metrics.json`` and ``<stem>_confusion.csv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or report.recognizer
    metrics = out_dir / f"{stem}_metrics.json"
    summary = report.to_dict()
    summary.pop("predictions")
    summary.pop("confusion")
    summary["total"] = report.total
    _dump(summary, metrics)
    cm_path = out_dir / f"{stem}_confusion.csv"
    with open(cm_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["true\\predicted", *report.classes])
        for c, row in zip(report.classes, report.confusion):
            w.writerow([c, *row])
    return [metrics, cm_path]


def save_osr_reports(reports: dict[str, OsrReport], path: str | Path) -> None:
    _dump({r: rep.to_dict() for r, rep in reports.items()}, path)


def load_osr_reports(path: str | Path) -> dict[str, OsrReport]:
    with open(path) as fh:
        return {r: OsrReport.from_dict(d) for r, d in json.load(fh).items()}


def format_summary(reports: dict[str, OsrReport]) -> str:
    lines = []
    for r, rep in reports.items():
        lines.append(f"{r:8s} {100 * rep.mean_accuracy:5.1f} +/- {100 * rep.std_accuracy:4.1f} %"
                     f"  ({len(rep.run_accuracy)} runs, {rep.total} test demos)")
    return "\n".join(lines)
