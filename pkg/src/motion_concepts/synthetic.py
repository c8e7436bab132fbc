"""Seeded synthetic household demonstrations.

Motion is generated in a body-aligned frame (x forward, y left, z up,
meters) for three channels: head, left hand, right hand. Each class maps to
a closed-form motion generator; the deliberately confusable classes share a
generator and differ only in their object/location context.

Per demonstration, the working posture of each channel is offset by
``posture_jitter`` (m, per axis) and the performer first moves in from a
neutral pose over roughly ``lead_in`` seconds. Noise is zero-mean Gaussian,
temporally correlated over ``noise_timescale`` seconds, and scaled to the
configured standard deviation.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np
import yaml
from scipy.ndimage import gaussian_filter1d
from scipy.spatial.transform import Rotation

from .data_model import Demonstration, EnvironmentCatalog, LocationStream, MotionStream, ObjectStream
from .primitives import from_scipy

CHANNELS = ("head", "left", "right")
HEAD = np.array([0.0, 0.0, 1.65])
LEFT = np.array([0.15, 0.25, 0.95])
RIGHT = np.array([0.15, -0.25, 0.95])
TWO_PI = 2.0 * np.pi
NEUTRAL = {"left": np.array([0.05, 0.22, 0.85]), "right": np.array([0.05, -0.22, 0.85])}


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    duration: float = 6.0
    sample_rate: float = 60.0
    position_noise: float = 0.01
    orientation_noise: float = 0.02
    amplitude_jitter: float = 0.2
    frequency_jitter: float = 0.2
    noise_timescale: float = 0.5
    posture_jitter: float = 0.06
    lead_in: float = 0.6
    transit_prefix: bool = False

    def __post_init__(self):
        for name in ("duration", "sample_rate", "position_noise", "orientation_noise",
                     "amplitude_jitter", "frequency_jitter", "noise_timescale", "posture_jitter", "lead_in"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.duration * self.sample_rate < 2:
            raise ValueError("duration * sample_rate must be at least 2")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))


@dataclass(frozen=True)
class ActionTemplate:
    name: str
    generator: str
    amplitude: float
    frequency: float
    locations: tuple[str, ...]
    objects: dict  # channel name -> tuple of object names
    grasp_onset: tuple[float, float]
    grasp_offset: tuple[float, float]


# ---------------------------------------------------------------- profiles

def min_jerk(s):
    s = np.clip(s, 0.0, 1.0)
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)


def reach_cycle(t, freq, phase, go=0.3, hold=0.2, back=0.3):
    """Periodic 0 -> 1 -> 0 profile: min-jerk out, hold, min-jerk back, rest."""
    u = np.mod(t * freq + phase / TWO_PI, 1.0)
    out = min_jerk(u / go)
    ret = 1.0 - min_jerk((u - go - hold) / back)
    return np.where(u < go + hold, out, np.where(u < go + hold + back, ret, 0.0))


def _still(base, n):
    return np.tile(base, (n, 1)), np.zeros((n, 3))


def stroke_phase(t, freq, ph, dwell=0.1):
    """Angle advancing by pi per stroke, two strokes per cycle.

    Each stroke is a min-jerk sweep with a short dwell at both ends, so
    cos/sin of the angle come to rest at every reversal.
    """
    u = 2.0 * freq * t + ph / np.pi
    k = np.floor(u)
    return np.pi * (k + min_jerk((u - k - dwell) / (1.0 - 2.0 * dwell)))


def _sin(t, f, ph):
    return np.sin(stroke_phase(t, f, ph))


def _cos(t, f, ph):
    return np.cos(stroke_phase(t, f, ph))


# -------------------------------------------------------------- generators
# Each returns {channel: (positions (n, 3), rotation vectors (n, 3))};
# channels not returned stay at rest.

def g_lateral_sinusoid(t, amp, freq, ph):
    s = _cos(t, freq, ph)
    pos = np.array([0.35, -0.2, 1.45]) + np.outer(amp * s, [0, 1, 0])
    rv = np.outer(0.3 * s, [1, 0, 0])
    return {"right": (pos, rv)}


def g_circular_rub(t, amp, freq, ph):
    out = {}
    for side, sign in (("left", 1.0), ("right", -1.0)):
        c = np.array([0.35, 0.08 * sign, 1.0])
        pos = c + np.column_stack([amp * _cos(t, freq, ph), sign * amp * _sin(t, freq, ph), np.zeros_like(t)])
        rv = np.outer(0.2 * _sin(t, freq, ph), [0, 0, 1])
        out[side] = (pos, rv)
    return out


def g_horizontal_circle(t, amp, freq, ph):
    pos = np.array([0.4, -0.15, 1.0]) + np.column_stack(
        [amp * _cos(t, freq, ph), amp * _sin(t, freq, ph), 0.01 * _sin(t, 2 * freq, ph)])
    rv = np.outer(0.15 * _cos(t, freq, ph), [0, 1, 0])
    return {"right": (pos, rv), "left": _still(np.array([0.35, 0.2, 1.0]), len(t))}


def g_vertical_saw(t, amp, freq, ph):
    s = _cos(t, freq, ph)
    pos = np.array([0.4, -0.1, 1.0]) + np.column_stack([0.4 * amp * s, np.zeros_like(t), amp * s])
    return {"right": (pos, np.outer(0.1 * s, [0, 1, 0])), "left": _still(np.array([0.38, 0.1, 0.98]), len(t))}


def g_hand_to_mouth(t, amp, freq, ph):
    s = reach_cycle(t, freq, ph, go=0.25, hold=0.3, back=0.25)
    start, d = np.array([0.35, -0.2, 1.0]), np.array([-0.4, 0.27, 0.87])
    pos = start + np.outer(amp * s, d / np.linalg.norm(d))
    return {"right": (pos, np.outer(1.1 * s, [1, 0, 0]) + np.outer(0.5 * s, [0, 1, 0]))}


def g_plate_to_mouth(t, amp, freq, ph):
    s = reach_cycle(t, freq, ph, go=0.3, hold=0.1, back=0.3)
    start, d = np.array([0.4, -0.1, 0.8]), np.array([-0.25, 0.05, 0.95])
    pos = start + np.outer(amp * s, d / np.linalg.norm(d))
    return {"right": (pos, np.outer(-0.4 * s, [0, 1, 0])),
            "left": _still(np.array([0.35, 0.15, 0.8]), len(t))}


def g_pan_shake(t, amp, freq, ph):
    s = _cos(t, freq, ph)
    pos = np.array([0.4, -0.2, 1.0]) + np.column_stack([amp * s, np.zeros_like(t), 0.3 * amp * _sin(t, 2 * freq, ph)])
    return {"right": (pos, np.outer(0.35 * s, [0, 1, 0]))}


def g_high_five(t, amp, freq, ph):
    s = reach_cycle(t, freq, ph, go=0.25, hold=0.15, back=0.3)
    start, d = RIGHT + [0.1, 0.0, 0.15], np.array([0.35, 0.05, 0.75])
    pos = start + np.outer(amp * s, d / np.linalg.norm(d))
    return {"right": (pos, np.outer(-0.8 * s, [0, 1, 0]))}


def g_throw(t, amp, freq, ph):
    # wind-up behind the shoulder, fast release forward, return
    u = np.mod(t * freq + ph / TWO_PI, 1.0)
    wind = min_jerk(u / 0.3)
    fire = min_jerk((u - 0.35) / 0.12)
    back = min_jerk((u - 0.6) / 0.3)
    start = RIGHT + [0.1, 0.0, 0.15]
    behind = np.array([-0.3, 0.0, 0.55])
    front = np.array([0.45, 0.05, 0.45])
    pos = (start + np.outer(amp * wind * (1 - fire), behind / np.linalg.norm(behind) * 0.8)
           + np.outer(amp * fire * (1 - back), front / np.linalg.norm(front)))
    rv = np.outer(-0.8 * fire * (1 - back) + 0.5 * wind * (1 - fire), [0, 1, 0])
    return {"right": (pos, rv)}


def g_hug(t, amp, freq, ph):
    s = reach_cycle(t, freq, ph, go=0.3, hold=0.3, back=0.25)
    out = {}
    for side, sign in (("left", 1.0), ("right", -1.0)):
        start = np.array([0.2, 0.45 * sign, 1.3])
        end = np.array([0.35, -0.1 * sign, 1.3])
        pos = start + np.outer(s * amp / 0.35, (end - start) * 0.35 / np.linalg.norm(end - start))
        out[side] = (pos, np.outer(-sign * 0.9 * s, [0, 0, 1]))
    return out


def g_knock(t, amp, freq, ph):
    burst = reach_cycle(t, freq, ph, go=0.1, hold=0.4, back=0.1)
    taps = 0.5 * (1 - np.cos(TWO_PI * 3.0 * t))
    s = burst * taps
    pos = np.array([0.45, -0.1, 1.4]) + np.outer(amp * s, [1, 0, 0]) + np.outer(0.1 * burst, [0, 0, 0.3])
    return {"right": (pos, np.outer(0.2 * s, [0, 1, 0]))}


def g_pet(t, amp, freq, ph):
    c, s = _cos(t, freq, ph), _sin(t, freq, ph)
    pos = np.array([0.45, -0.15, 0.7]) + np.column_stack([amp * c, np.zeros_like(t), 0.3 * amp * np.maximum(s, 0)])
    return {"right": (pos, np.outer(0.2 * s, [0, 1, 0]))}


def g_strum(t, amp, freq, ph):
    s = _cos(t, freq, ph)
    right = (np.array([0.25, -0.1, 1.05]) + np.outer(amp * s, [0.1, 0, 1]), np.outer(0.25 * s, [1, 0, 0]))
    left = (np.array([0.3, 0.4, 1.2]) + np.outer(0.02 * _sin(t, 0.3, ph), [0, 1, 0]), np.zeros((len(t), 3)))
    return {"right": right, "left": left}


def g_piano(t, amp, freq, ph):
    out = {}
    for side, sign, off in (("left", 1.0, 0.0), ("right", -1.0, 1.3)):
        drift = amp * _cos(t, freq, ph + off)
        taps = 0.015 * np.abs(_sin(t, 2.5, ph + off))
        pos = np.array([0.4, 0.15 * sign, 0.95]) + np.column_stack([np.zeros_like(t), drift, taps])
        out[side] = (pos, np.outer(0.1 * _sin(t, 2.5, ph + off), [1, 0, 0]))
    return out


def g_handshake(t, amp, freq, ph):
    reach = min_jerk(t / 0.8) * (1 - min_jerk((t - (t[-1] - 0.8)) / 0.8))
    shake = amp * _cos(t, freq, ph) * reach
    pos = RIGHT + np.outer(reach, [0.3, 0.15, 0.15]) + np.outer(shake, [0, 0, 1])
    return {"right": (pos, np.outer(1.2 * reach, [1, 0, 0]))}


def g_sweep(t, amp, freq, ph):
    s = _cos(t, freq, ph)
    rv = np.outer(0.4 * s, [0, 0, 1])
    right = np.array([0.3, -0.05, 0.75]) + np.outer(amp * s, [0.2, 1, 0])
    left = np.array([0.2, 0.05, 1.1]) + np.outer(0.5 * amp * s, [0.2, 1, 0])
    return {"right": (right, rv), "left": (left, rv)}


def g_sagittal_push(t, amp, freq, ph):
    s = _cos(t, freq, ph)
    pos = np.array([0.35, -0.2, 0.95]) + np.outer(amp * s, [1, 0, -0.15])
    return {"right": (pos, np.zeros((len(t), 3)))}


def g_wring(t, amp, freq, ph):
    s = _cos(t, freq, ph)
    out = {}
    for side, sign in (("left", 1.0), ("right", -1.0)):
        pos = np.array([0.35, 0.06 * sign, 1.1]) + np.outer(0.01 * s, [0, sign, 0])
        out[side] = (pos, np.outer(sign * amp * s, [0, 1, 0]))
    return out


def g_comb(t, amp, freq, ph):
    s = reach_cycle(t, freq, ph, go=0.45, hold=0.0, back=0.45)
    pos = np.array([0.1, -0.08, 1.8]) + np.column_stack([-amp * s, np.zeros_like(t), -0.2 * amp * s])
    return {"right": (pos, np.outer(0.6 * s, [0, 1, 0]))}


def g_bow(t, amp, freq, ph):
    s = reach_cycle(t, freq, ph, go=0.3, hold=0.2, back=0.3)
    head = HEAD + np.outer(amp * s, [1.0, 0.0, -0.6])
    torso = np.outer(0.6 * amp * s, [1.0, 0.0, -0.3])
    rv = np.outer(0.9 * s, [0, 1, 0])
    return {"head": (head, rv), "left": (LEFT + torso, 0.5 * rv), "right": (RIGHT + torso, 0.5 * rv)}


GENERATORS: dict[str, Callable] = {
    name[2:]: fn for name, fn in globals().items() if name.startswith("g_") and callable(fn)
}


# ------------------------------------------------------------- templates

def _resolve(items, universe):
    return tuple(universe) if list(items) == ["*"] else tuple(items)


def load_templates(path=None) -> tuple[EnvironmentCatalog, dict[str, ActionTemplate]]:
    """Read the template table (the packaged one by default)."""
    if path is None:
        text = resources.files("motion_concepts").joinpath("data/templates.yaml").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = yaml.safe_load(text)
    cat = EnvironmentCatalog(objects=raw["catalog"]["objects"], locations=raw["catalog"]["locations"])
    grasp_default = raw.get("defaults", {}).get("grasp", {"onset": [0.0, 0.0], "offset": [1.0, 1.0]})
    out = {}
    for name, t in raw["templates"].items():
        if t["generator"] not in GENERATORS:
            raise ValueError(f"template {name!r}: unknown generator {t['generator']!r}")
        locations = _resolve(t["locations"], cat.locations)
        for loc in locations:
            cat.location_index(loc)
        objects = {}
        for ch, names in (t.get("objects") or {}).items():
            if ch not in CHANNELS:
                raise ValueError(f"template {name!r}: unknown channel {ch!r}")
            objects[ch] = _resolve(names, cat.objects)
            for o in objects[ch]:
                cat.object_index(o)
        grasp = t.get("grasp", grasp_default)
        if not locations or t["amplitude"] <= 0 or t["frequency"] <= 0:
            raise ValueError(f"template {name!r}: needs locations and positive amplitude/frequency")
        out[name] = ActionTemplate(
            name=name, generator=t["generator"], amplitude=float(t["amplitude"]),
            frequency=float(t["frequency"]), locations=locations, objects=objects,
            grasp_onset=tuple(grasp["onset"]), grasp_offset=tuple(grasp["offset"]),
        )
    return cat, out


CATALOG, TEMPLATES = load_templates()
CLASSES = tuple(TEMPLATES)


# ------------------------------------------------------------ generation

def demo_seed(master: int, cls: str, draw: int) -> int:
    """Stable per-demonstration seed; independent of class ordering."""
    return (int(master) * 1_000_003 + zlib.crc32(cls.encode()) * 7919 + int(draw)) % 2 ** 63


def _smooth_noise(rng, n, sigma, timescale_samples):
    if sigma == 0:
        return np.zeros((n, 3))
    w = rng.standard_normal((n, 3))
    if timescale_samples > 0:
        w = gaussian_filter1d(w, timescale_samples, axis=0, mode="reflect")
        w /= w.std(axis=0, keepdims=True)
    return sigma * w


def generate_demo(cls: str, cfg: GeneratorConfig = GeneratorConfig(), draw: int = 0,
                  templates: dict[str, ActionTemplate] | None = None,
                  catalog: EnvironmentCatalog | None = None) -> Demonstration:
    templates = TEMPLATES if templates is None else templates
    catalog = CATALOG if catalog is None else catalog
    if cls not in templates:
        raise KeyError(f"unknown action class {cls!r}")
    tpl = templates[cls]
    rng = np.random.default_rng(demo_seed(cfg.seed, cls, draw))
    n = cfg.n_samples
    t = np.arange(n) / cfg.sample_rate

    amp = tpl.amplitude * rng.uniform(1 - cfg.amplitude_jitter, 1 + cfg.amplitude_jitter)
    freq = tpl.frequency * rng.uniform(1 - cfg.frequency_jitter, 1 + cfg.frequency_jitter)
    phase = rng.uniform(0.0, TWO_PI)
    parts = GENERATORS[tpl.generator](t, amp, freq, phase)

    tau = cfg.noise_timescale * cfg.sample_rate
    rest = {"head": HEAD, "left": LEFT, "right": RIGHT}
    lead = cfg.lead_in * rng.uniform(0.5, 1.5)
    blend = min_jerk(t / lead)[:, None] if lead > 0 else np.ones((n, 1))
    motion = []
    for ch in CHANNELS:
        if ch in parts:
            pos, rv = parts[ch]
        else:
            sway = 0.005 * np.sin(TWO_PI * 0.25 * t + rng.uniform(0, TWO_PI))
            pos, rv = rest[ch] + np.outer(sway, [1, 0, 0]), np.zeros((n, 3))
        pos = pos + rng.normal(0.0, cfg.posture_jitter, 3)
        if ch != "head":
            neutral = NEUTRAL[ch] + rng.normal(0.0, cfg.posture_jitter, 3)
            pos = neutral + blend * (pos - neutral)
            rv = blend * rv
        pos = pos + _smooth_noise(rng, n, cfg.position_noise, tau)
        rv = rv + _smooth_noise(rng, n, cfg.orientation_noise, tau)
        q = from_scipy(Rotation.from_rotvec(rv).as_quat())
        q[q[:, 0] < 0] *= -1
        motion.append(MotionStream(pos, q))

    objects = []
    for ch in CHANNELS:
        obs = np.zeros((n, catalog.n_objects), dtype=np.int8)
        choices = tpl.objects.get(ch, ())
        if choices:
            obj = catalog.object_index(choices[rng.integers(len(choices))])
            on = int(round(rng.uniform(*tpl.grasp_onset) * n))
            off = int(round(rng.uniform(*tpl.grasp_offset) * n))
            obs[on:max(off, on + 1), obj] = 1
        objects.append(ObjectStream(obs))

    loc = catalog.location_index(tpl.locations[rng.integers(len(tpl.locations))])
    locations = np.full(n, loc)
    if cfg.transit_prefix:
        # brief walk in from a neighbouring area
        locations[: n // 20] = (loc + 1) % catalog.n_locations
    return Demonstration(motion=motion, objects=objects, location=LocationStream(locations),
                         label=cls, sample_rate=cfg.sample_rate, catalog_ref=catalog.name)


def generate_dataset(cfg: GeneratorConfig = GeneratorConfig(), n_per_class: int = 2, seed: int | None = None,
                     classes=None) -> list[Demonstration]:
    """``n_per_class`` demonstrations of every class, in seeded random order."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    seed = cfg.seed if seed is None else seed
    cfg = GeneratorConfig(**{**cfg.__dict__, "seed": seed})
    classes = CLASSES if classes is None else tuple(classes)
    demos = [generate_demo(c, cfg, draw) for c in classes for draw in range(n_per_class)]
    order = np.random.default_rng(seed).permutation(len(demos))
    return [demos[i] for i in order]
