"""Channel stream types and the line-delimited demonstration format.

A demonstration file holds one JSON record per line::

    {"label": "Wave", "sample_rate": 60.0, "catalog_ref": "household",
     "motion": [{"positions": [[x, y, z], ...], "orientations": [[w, x, y, z], ...]}, ...],
     "objects": [["0010...", ...], ...],
     "location": [0, 0, ...]}

Quaternions are scalar-first. Object observations are strings of '0'/'1'
characters, one character per catalog object, in catalog order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

QUAT_NORM_TOL = 1e-6


class DemonstrationError(ValueError):
    """Base class for ingestion failures."""


class ParseError(DemonstrationError):
    pass


class ValidationError(DemonstrationError):
    pass


class CatalogError(DemonstrationError):
    pass


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EnvironmentCatalog:
    objects: tuple[str, ...]
    locations: tuple[str, ...]
    name: str = "household"

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "locations", tuple(self.locations))
        if not self.objects or not self.locations:
            raise CatalogError("catalog needs at least one object and one location")
        for kind, ids in (("object", self.objects), ("location", self.locations)):
            if len(set(ids)) != len(ids):
                raise CatalogError(f"duplicate {kind} identifiers in catalog")

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_locations(self) -> int:
        return len(self.locations)

    def object_index(self, name: str) -> int:
        try:
            return self.objects.index(name)
        except ValueError:
            raise CatalogError(f"unknown object {name!r}") from None

    def location_index(self, name: str) -> int:
        try:
            return self.locations.index(name)
        except ValueError:
            raise CatalogError(f"unknown location {name!r}") from None

    def to_dict(self) -> dict:
        return {"name": self.name, "objects": list(self.objects), "locations": list(self.locations)}

    @classmethod
    def from_dict(cls, d: dict) -> "EnvironmentCatalog":
        try:
            return cls(objects=d["objects"], locations=d["locations"], name=d.get("name", "household"))
        except (KeyError, TypeError) as e:
            raise ParseError(f"malformed catalog: {e}") from None


@dataclass(frozen=True)
class MotionStream:
    """Positions (n, 3) in meters and scalar-first unit quaternions (n, 4)."""

    positions: np.ndarray
    orientations: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "positions", _frozen(self.positions))
        object.__setattr__(self, "orientations", _frozen(self.orientations))

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class ObjectStream:
    observations: np.ndarray  # (n, |objects|), entries 0/1

    def __post_init__(self):
        object.__setattr__(self, "observations", _frozen(self.observations, dtype=np.int8))

    def __len__(self) -> int:
        return len(self.observations)


@dataclass(frozen=True)
class LocationStream:
    locations: np.ndarray  # (n,) indices into catalog.locations

    def __post_init__(self):
        object.__setattr__(self, "locations", _frozen(self.locations, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.locations)


@dataclass(frozen=True)
class Demonstration:
    motion: tuple[MotionStream, ...]
    objects: tuple[ObjectStream, ...]
    location: LocationStream
    label: str | None = None
    sample_rate: float = 60.0
    catalog_ref: str = "household"

    def __post_init__(self):
        object.__setattr__(self, "motion", tuple(self.motion))
        object.__setattr__(self, "objects", tuple(self.objects))

    @property
    def n_samples(self) -> int:
        """T + 1."""
        return len(self.location)

    @property
    def T(self) -> int:
        return self.n_samples - 1


def demonstrations_equal(a: Demonstration, b: Demonstration) -> bool:
    """Field-wise equality with bit-exact float comparison."""
    if (a.label, a.sample_rate, a.catalog_ref) != (b.label, b.sample_rate, b.catalog_ref):
        return False
    if len(a.motion) != len(b.motion) or len(a.objects) != len(b.objects):
        return False
    for ma, mb in zip(a.motion, b.motion):
        if not (np.array_equal(ma.positions, mb.positions) and np.array_equal(ma.orientations, mb.orientations)):
            return False
    for oa, ob in zip(a.objects, b.objects):
        if not np.array_equal(oa.observations, ob.observations):
            return False
    return np.array_equal(a.location.locations, b.location.locations)


def validate_demonstration(d: Demonstration, catalog: EnvironmentCatalog | None = None) -> list[str]:
    """Return a list of invariant violations; empty means the demonstration is valid."""
    out = []
    if not d.motion:
        out.append("motion: at least one motion stream required")
    if not d.objects:
        out.append("objects: at least one object stream required")
    if not (np.isfinite(d.sample_rate) and d.sample_rate > 0):
        out.append(f"sample_rate: must be positive, got {d.sample_rate}")
    n = len(d.location)
    for k, m in enumerate(d.motion):
        p, q = m.positions, m.orientations
        if p.ndim != 2 or p.shape[1] != 3:
            out.append(f"motion[{k}].positions: expected shape (n, 3), got {p.shape}")
            continue
        if q.ndim != 2 or q.shape[1] != 4:
            out.append(f"motion[{k}].orientations: expected shape (n, 4), got {q.shape}")
            continue
        if len(p) != len(q):
            out.append(f"motion[{k}]: positions/orientations length mismatch ({len(p)} vs {len(q)})")
        if len(p) < 2:
            out.append(f"motion[{k}].positions: need at least 2 samples")
        if len(p) != n:
            out.append(f"motion[{k}]: length {len(p)} does not match location stream length {n}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            out.append(f"motion[{k}]: non-finite coordinates")
        elif len(q) and np.max(np.abs(np.linalg.norm(q, axis=1) - 1.0)) > QUAT_NORM_TOL:
            out.append(f"motion[{k}].orientations: quaternion norm deviates from 1 by more than {QUAT_NORM_TOL}")
    for m, o in enumerate(d.objects):
        obs = o.observations
        if obs.ndim != 2:
            out.append(f"objects[{m}].observations: expected a 2-d array")
            continue
        if len(obs) != n:
            out.append(f"objects[{m}].observations: length {len(obs)} does not match location stream length {n}")
        if catalog is not None and obs.shape[1] != catalog.n_objects:
            out.append(f"objects[{m}].observations: {obs.shape[1]} entries, catalog has {catalog.n_objects}")
        if np.any((obs != 0) & (obs != 1)):
            out.append(f"objects[{m}].observations: entries must be 0 or 1")
    locs = d.location.locations
    if catalog is not None and len(locs) and (locs.min() < 0 or locs.max() >= catalog.n_locations):
        out.append(f"location.locations: index outside catalog of {catalog.n_locations} locations")
    return out


def _canonical_quats(q: np.ndarray) -> np.ndarray:
    """Identify q with -q by forcing a non-negative scalar part."""
    q = np.array(q, dtype=float)
    flip = q[:, 0] < 0
    q[flip] = -q[flip]
    return q


def parse_demonstration(record: str | bytes, catalog: EnvironmentCatalog, line: int | None = None) -> Demonstration:
    where = f"line {line}: " if line is not None else ""
    try:
        raw = json.loads(record)
    except json.JSONDecodeError as e:
        raise ParseError(f"{where}invalid JSON ({e.msg})") from None
    if not isinstance(raw, dict):
        raise ParseError(f"{where}record must be an object")

    def need(key):
        if key not in raw:
            raise ParseError(f"{where}missing field {key!r}")
        return raw[key]

    ref = raw.get("catalog_ref", catalog.name)
    if ref != catalog.name:
        raise CatalogError(f"{where}record refers to catalog {ref!r}, loaded catalog is {catalog.name!r}")

    motion = []
    for k, ch in enumerate(need("motion")):
        try:
            pos = np.array(ch["positions"], dtype=float)
            quat = np.array(ch["orientations"], dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"{where}field motion[{k}] malformed: {e}") from None
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ParseError(f"{where}field motion[{k}].positions must be a list of 3-vectors")
        if quat.ndim != 2 or quat.shape[1] != 4:
            raise ParseError(f"{where}field motion[{k}].orientations must be a list of 4-vectors")
        motion.append(MotionStream(pos, _canonical_quats(quat)))

    objects = []
    for m, ch in enumerate(need("objects")):
        if not isinstance(ch, list) or not all(isinstance(s, str) for s in ch):
            raise ParseError(f"{where}field objects[{m}] must be a list of bit strings")
        widths = {len(s) for s in ch}
        if widths and widths != {catalog.n_objects}:
            raise CatalogError(f"{where}objects[{m}] bit vectors do not match the {catalog.n_objects}-object catalog")
        if any(set(s) - {"0", "1"} for s in ch):
            raise ParseError(f"{where}field objects[{m}] contains characters other than 0/1")
        obs = np.array([[c == "1" for c in s] for s in ch], dtype=np.int8).reshape(len(ch), catalog.n_objects)
        objects.append(ObjectStream(obs))

    loc = need("location")
    if not isinstance(loc, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in loc):
        raise ParseError(f"{where}field location must be a list of integers")
    if any(i < 0 or i >= catalog.n_locations for i in loc):
        raise CatalogError(f"{where}location index outside catalog of {catalog.n_locations} locations")

    rate = need("sample_rate")
    if not isinstance(rate, (int, float)) or isinstance(rate, bool):
        raise ParseError(f"{where}field sample_rate must be a number")
    label = raw.get("label")
    if label is not None and not isinstance(label, str):
        raise ParseError(f"{where}field label must be a string or null")

    demo = Demonstration(
        motion=motion, objects=objects, location=LocationStream(loc),
        label=label, sample_rate=float(rate), catalog_ref=ref,
    )
    problems = validate_demonstration(demo, catalog)
    if problems:
        raise ValidationError(f"{where}" + "; ".join(problems))
    return demo


def serialize_demonstration(d: Demonstration) -> str:
    rec = {
        "label": d.label,
        "sample_rate": d.sample_rate,
        "catalog_ref": d.catalog_ref,
        "motion": [
            {"positions": m.positions.tolist(), "orientations": m.orientations.tolist()} for m in d.motion
        ],
        "objects": [["".join("1" if v else "0" for v in row) for row in o.observations] for o in d.objects],
        "location": d.location.locations.tolist(),
    }
    return json.dumps(rec, separators=(",", ":"))


def read_demonstrations(path: str | Path, catalog: EnvironmentCatalog) -> list[Demonstration]:
    out = []
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            if line.strip():
                try:
                    out.append(parse_demonstration(line, catalog, line=i))
                except DemonstrationError as e:
                    raise type(e)(f"{path}: {e}") from None
    return out


def write_demonstrations(path: str | Path, demos: Iterable[Demonstration]) -> None:
    with open(path, "w") as fh:
        for d in demos:
            fh.write(serialize_demonstration(d) + "\n")


def read_catalog(path: str | Path) -> EnvironmentCatalog:
    with open(path) as fh:
        try:
            return EnvironmentCatalog.from_dict(json.load(fh))
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: invalid JSON ({e.msg})") from None


def write_catalog(path: str | Path, catalog: EnvironmentCatalog) -> None:
    with open(path, "w") as fh:
        json.dump(catalog.to_dict(), fh, indent=2)
        fh.write("\n")

