"""Motion concepts, the concept registry and the importance-weight update rule."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .data_model import EnvironmentCatalog
from .primitives import PrimitiveLibrary
from .prototype import MotionPrototype

NONE = -1  # dominant-object sentinel for a channel where nothing was observed


class RegistryError(ValueError):
    pass


@dataclass(frozen=True)
class OmclConfig:
    k_rho0: float = 0.05
    k_lambda0: float = 0.005
    alpha_k: float = 0.1
    delta_c: float = 0.9
    c_abs: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.alpha_k < 1.0:
            raise ValueError("alpha_k must lie in (0, 1)")
        for name in ("k_rho0", "k_lambda0", "delta_c", "c_abs"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative")


@dataclass
class MotionConcept:
    designation: str
    prototypes: list[MotionPrototype]
    k_rho: float
    k_lambda: float

    def to_dict(self) -> dict:
        return {
            "designation": self.designation,
            "k_rho": self.k_rho,
            "k_lambda": self.k_lambda,
            "prototypes": [p.to_dict() for p in self.prototypes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MotionConcept":
        return cls(
            designation=d["designation"],
            prototypes=[MotionPrototype.from_dict(p) for p in d["prototypes"]],
            k_rho=float(d["k_rho"]),
            k_lambda=float(d["k_lambda"]),
        )


def dominant_objects(p: MotionPrototype) -> tuple[int, ...]:
    """Per object channel, the catalog index of the most frequent object, or NONE."""
    return tuple(int(np.argmax(r)) if np.any(r > 0) else NONE for r in p.rho)


def dominant_location(p: MotionPrototype) -> int:
    return int(np.argmax(p.lam))


@dataclass
class ConceptRegistry:
    catalog: EnvironmentCatalog
    library: PrimitiveLibrary = field(default_factory=PrimitiveLibrary)
    config: OmclConfig = field(default_factory=OmclConfig)
    concepts: list[MotionConcept] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.concepts)

    def __contains__(self, designation: str) -> bool:
        return any(c.designation == designation for c in self.concepts)

    def get(self, designation: str) -> MotionConcept:
        for c in self.concepts:
            if c.designation == designation:
                return c
        raise RegistryError(f"no concept named {designation!r}")

    def create_concept(self, p: MotionPrototype, designation: str) -> MotionConcept:
        if not designation:
            raise RegistryError("designation must be non-empty")
        if designation in self:
            raise RegistryError(f"concept {designation!r} already exists")
        c = MotionConcept(designation, [p], self.config.k_rho0, self.config.k_lambda0)
        self.concepts.append(c)
        return c

    def update_concept(self, c: MotionConcept, p: MotionPrototype) -> MotionConcept:
        if not any(c is other for other in self.concepts):
            raise RegistryError(f"concept {c.designation!r} is not in this registry")
        a = self.config.alpha_k
        prior = c.prototypes
        new_obj, new_loc = dominant_objects(p), dominant_location(p)
        obj_votes = sum(dominant_objects(q) == new_obj for q in prior)
        loc_votes = sum(dominant_location(q) == new_loc for q in prior)
        c.k_rho *= (1 + a) if 2 * obj_votes > len(prior) else (1 - a)
        c.k_lambda *= (1 + a) if 2 * loc_votes > len(prior) else (1 - a)
        c.prototypes.append(p)
        return c

    def learn(self, p: MotionPrototype, designation: str) -> MotionConcept:
        """Create the concept if new, otherwise update it."""
        if designation in self:
            return self.update_concept(self.get(designation), p)
        return self.create_concept(p, designation)

    def to_dict(self) -> dict:
        return {
            "catalog": self.catalog.to_dict(),
            "config": asdict(self.config),
            "library": self.library.to_dict(),
            "concepts": [c.to_dict() for c in self.concepts],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConceptRegistry":
        return cls(
            catalog=EnvironmentCatalog.from_dict(d["catalog"]),
            library=PrimitiveLibrary.from_dict(d["library"]),
            config=OmclConfig(**d["config"]),
            concepts=[MotionConcept.from_dict(c) for c in d["concepts"]],
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "ConceptRegistry":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def create_concept(reg: ConceptRegistry, p: MotionPrototype, designation: str) -> MotionConcept:
    return reg.create_concept(p, designation)


def update_concept(reg: ConceptRegistry, c: MotionConcept, p: MotionPrototype) -> MotionConcept:
    return reg.update_concept(c, p)
