"""Instance files, generators, move logs and run manifests.

Everything on disk is schema-tagged JSON.  Floats are written with
Python's shortest round-trip repr, so parse(serialize(x)) is bit-exact.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .energy import CompactSample
from .errors import DomainError

INSTANCE_SCHEMA = "mdmlab.instance/1"
MANIFEST_SCHEMA = "mdmlab.manifest/1"
SHAPES = ("circle", "polygon", "segment_pair", "grid")


def dumps(obj) -> str:
    """Canonical JSON text (sorted keys, fixed separators, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def write_text(path, text: str) -> str:
    """Write and return the sha256 of the bytes written."""
    data = text.encode()
    Path(path).write_bytes(data)
    return sha256_bytes(data)


# generators ---------------------------------------------------------------------


def _regular_polygon(sides: int, side: float) -> np.ndarray:
    R = side / (2 * math.sin(math.pi / sides))
    # first edge horizontal at the bottom, counter-clockwise
    th = -math.pi / 2 - math.pi / sides + 2 * math.pi * np.arange(sides) / sides
    return R * np.column_stack([np.cos(th), np.sin(th)])


def _polygon_samples(corners: np.ndarray, n: int) -> np.ndarray:
    closed = np.vstack([corners, corners[:1]])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    q = s[-1] * np.arange(n) / n
    j = np.minimum(np.searchsorted(s, q, side="right") - 1, len(seg) - 1)
    return closed[j] + ((q - s[j]) / seg[j])[:, None] * (closed[j + 1] - closed[j])


def generate_points(shape: str, params: dict, sample_count: int | None = None, seed: int = 0) -> np.ndarray:
    """Deterministic samples for a named shape; optional seeded jitter."""
    p = dict(params)
    jitter = float(p.pop("jitter", 0.0))
    if shape == "circle":
        n = int(sample_count or 360)
        R = float(p.get("R", 1.0))
        cx, cy = p.get("center", (0.0, 0.0))
        th = 2 * math.pi * np.arange(n) / n
        pts = np.column_stack([cx + R * np.cos(th), cy + R * np.sin(th)])
    elif shape == "polygon":
        n = int(sample_count or 400)
        if "vertices" in p:
            corners = np.asarray(p["vertices"], dtype=float).reshape(-1, 2)
        else:
            corners = _regular_polygon(int(p.get("sides", 4)), float(p.get("side", 1.0)))
        if len(corners) < 3:
            raise DomainError("a polygon needs at least three corners")
        pts = _polygon_samples(corners, n)
    elif shape == "segment_pair":
        d = float(p.get("d", 1.0))
        pts = np.array([[0.0, 0.0], [d, 0.0]])
    elif shape == "grid":
        nx, ny = int(p.get("nx", 3)), int(p.get("ny", 3))
        h = float(p.get("spacing", 1.0))
        gx, gy = np.meshgrid(np.arange(nx) * h, np.arange(ny) * h, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
    else:
        raise DomainError(f"unknown shape {shape!r}; expected one of {SHAPES}")
    if sample_count is not None and shape in ("segment_pair", "grid") and sample_count != len(pts):
        raise DomainError(f"{shape} determines its own sample count ({len(pts)})")
    if len(pts) < 1:
        raise DomainError("sample_count must be at least 1")
    if jitter > 0:
        pts = pts + jitter * np.random.default_rng(seed).uniform(-1, 1, size=pts.shape)
    return pts


# instance files ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InstanceFile:
    r: float
    points: np.ndarray | None = None
    generator: dict | None = None
    schema: str = INSTANCE_SCHEMA

    def __post_init__(self):
        if self.schema != INSTANCE_SCHEMA:
            raise DomainError(f"unrecognized instance schema {self.schema!r}")
        if (self.points is None) == (self.generator is None):
            raise DomainError("an instance has either explicit points or a generator")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise DomainError("r must be a positive finite number")
        if self.generator is not None:
            g = self.generator
            if g.get("shape") not in SHAPES:
                raise DomainError(f"unknown shape {g.get('shape')!r}")
            if g.get("sample_count") is not None and int(g["sample_count"]) < 1:
                raise DomainError("sample_count must be at least 1")

    def sample_points(self) -> np.ndarray:
        if self.points is not None:
            return np.asarray(self.points, dtype=float).reshape(-1, 2)
        g = self.generator
        return generate_points(g["shape"], g.get("params", {}), g.get("sample_count"), int(g.get("seed", 0)))

    def compact(self, r: float | None = None) -> CompactSample:
        return CompactSample(self.sample_points(), self.r if r is None else r)

    def to_dict(self) -> dict:
        d = {"schema": self.schema, "r": float(self.r)}
        if self.points is not None:
            d["points"] = [[float(x), float(y)] for x, y in np.asarray(self.points, dtype=float).reshape(-1, 2)]
        else:
            d["generator"] = self.generator
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "InstanceFile":
        pts = d.get("points")
        return cls(float(d["r"]), None if pts is None else np.asarray(pts, dtype=float).reshape(-1, 2),
                   d.get("generator"), d.get("schema", INSTANCE_SCHEMA))

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "InstanceFile":
        return cls.from_dict(json.loads(text))


def generate_instance(shape: str, params: dict, r: float, sample_count: int | None = None,
                      seed: int = 0, explicit: bool = True) -> InstanceFile:
    """Instance for a named shape; ``explicit`` stores the points rather than the recipe."""
    gen = {"shape": shape, "params": dict(params), "sample_count": sample_count, "seed": int(seed)}
    pts = generate_points(shape, params, sample_count, seed)
    return InstanceFile(r, pts, None) if explicit else InstanceFile(r, None, gen)


# run manifest --------------------------------------------------------------------


@dataclass
class RunManifest:
    command: list[str]
    config: dict
    seed: int | None
    version: str
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        return sha256_bytes(dumps(self.config).encode())

    def to_dict(self) -> dict:
        return {
            "schema": MANIFEST_SCHEMA,
            "command": list(self.command),
            "config": self.config,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "version": self.version,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": dict(sorted(self.outputs.items())),
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        if d.get("schema") != MANIFEST_SCHEMA:
            raise DomainError(f"unrecognized manifest schema {d.get('schema')!r}")
        return cls(list(d["command"]), d["config"], d.get("seed"), d["version"], dict(d["inputs"]), dict(d["outputs"]))
