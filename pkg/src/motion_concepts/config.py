"""Harness configuration: one YAML file holding every module default.

Sections map one-to-one onto the parameter dataclasses. Missing sections
and keys fall back to the dataclass defaults; unknown keys are errors.
``OMCL_SEED`` and ``OMCL_OUTPUT_DIR`` override the experiment seed and the
output directory. There is a single seed, ``experiment.seed``; it drives
dataset generation as well as the train/test draws.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from .baselines import HmmParams
from .concepts import OmclConfig
from .harness import LibraryParams, OmclParams
from .segmentation import SegmentationParams
from .synthetic import GeneratorConfig

ENV_SEED = "OMCL_SEED"
ENV_OUTPUT_DIR = "OMCL_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    output_dir: str = "results"
    n_per_class: int = 6
    repetitions: int = 10
    recognizers: tuple[str, ...] = ("omcl", "omcl-n", "gmm-hmm")
    # (k_lambda0, k_rho0) tuples
    weight_grid: tuple[tuple[float, float], ...] = tuple(
        (kl, kr) for kl in (0.005, 0.05, 0.5, 5.0) for kr in (0.05, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0))
    delta_grid: tuple[float, ...] = (0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.2, 1.5)


@dataclass(frozen=True)
class HarnessConfig:
    segmentation: SegmentationParams = SegmentationParams()
    library: LibraryParams = LibraryParams()
    concepts: OmclConfig = OmclConfig()
    hmm: HmmParams = HmmParams()
    generator: GeneratorConfig = GeneratorConfig()
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)

    @property
    def generator_config(self) -> GeneratorConfig:
        return replace(self.generator, seed=self.experiment.seed)

    @property
    def omcl(self) -> OmclParams:
        return OmclParams(self.segmentation, self.library, self.concepts, self.hmm)

    def to_dict(self) -> dict:
        d = asdict(self)
        del d["generator"]["seed"]
        exp = d["experiment"]
        exp["recognizers"] = list(exp["recognizers"])
        exp["weight_grid"] = [list(t) for t in exp["weight_grid"]]
        exp["delta_grid"] = list(exp["delta_grid"])
        return d


def _tuplify(v):
    return tuple(_tuplify(x) for x in v) if isinstance(v, list) else v


def _section(cls, raw, name):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"section [{name}] must be a mapping")
    known = {f.name for f in fields(cls)}
    if cls is GeneratorConfig:
        known.discard("seed")  # the experiment seed is the only seed
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {unknown}")
    try:
        return cls(**{k: _tuplify(v) for k, v in raw.items()})
    except (TypeError, ValueError) as e:
        raise ConfigError(f"[{name}]: {e}") from e


def config_from_dict(raw: dict | None) -> HarnessConfig:
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    sections = {f.name: f for f in fields(HarnessConfig)}
    unknown = sorted(set(raw) - set(sections))
    if unknown:
        raise ConfigError(f"unknown config sections: {unknown}")
    kinds = {"segmentation": SegmentationParams, "library": LibraryParams, "concepts": OmclConfig,
             "hmm": HmmParams, "generator": GeneratorConfig, "experiment": ExperimentConfig}
    return HarnessConfig(**{name: _section(kinds[name], raw.get(name), name) for name in sections})


def apply_env(cfg: HarnessConfig, environ=None) -> HarnessConfig:
    environ = os.environ if environ is None else environ
    exp = cfg.experiment
    if environ.get(ENV_SEED):
        try:
            exp = replace(exp, seed=int(environ[ENV_SEED]))
        except ValueError:
            raise ConfigError(f"{ENV_SEED} must be an integer, got {environ[ENV_SEED]!r}") from None
    if environ.get(ENV_OUTPUT_DIR):
        exp = replace(exp, output_dir=environ[ENV_OUTPUT_DIR])
    return replace(cfg, experiment=exp)


def load_config(path: str | Path | None = None, environ=None) -> HarnessConfig:
    """Defaults, then the YAML file (if given), then environment overrides."""
    raw = None
    if path is not None:
        try:
            with open(path) as fh:
                raw = yaml.safe_load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e.strerror}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML: {e}") from e
    return apply_env(config_from_dict(raw), environ)


def dump_config(cfg: HarnessConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)
