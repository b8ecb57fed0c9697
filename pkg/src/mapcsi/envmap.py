"""2D environment maps and specular ray tracing over line-segment surfaces.

Angles follow the array convention used throughout the package: the ULA lies
on the x-axis and a departure angle ``theta`` in ``[0, pi]`` launches a ray
along ``(cos theta, -sin theta)``, i.e. into the lower half-plane of the BS.

Example:
    >>> env = EnvironmentMap(
    ...     bs=Point2(0.0, 10.0),
    ...     surfaces=(Surface(Point2(-50, 10), Point2(150, 10)),
    ...               Surface(Point2(-50, -10), Point2(150, -10))),
    ...     aoi=Aoi(5.0, 95.0, -2.0, 2.0),
    ... )
    >>> [t.point for t in trace_path(env, np.pi / 2, 25.0)]
    [Point2(x=0.0, y=-5.0)]
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

EPS_HIT = 1e-9
DEFAULT_MAX_BRANCHES = 8
DEFAULT_MAX_BOUNCES = 10


class Point2(NamedTuple):
    x: float
    y: float


class Material(enum.Enum):
    REFLECTIVE = "reflective"
    SEMI_TRANSPARENT = "semi"


@dataclass(frozen=True)
class Surface:
    """Straight wall segment from ``a`` to ``b``.

    A ``SEMI_TRANSPARENT`` surface (e.g. the side of a bus) both reflects a
    ray and lets a continuation pass straight through it.
    """

    a: Point2
    b: Point2
    material: Material = Material.REFLECTIVE

    def __post_init__(self):
        a = Point2(float(self.a[0]), float(self.a[1]))
        b = Point2(float(self.b[0]), float(self.b[1]))
        if not np.all(np.isfinite([*a, *b])):
            raise ValueError("surface endpoints must be finite")
        if a == b:
            raise ValueError("surface must have positive length")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return float(np.hypot(self.b.x - self.a.x, self.b.y - self.a.y))

    @property
    def normal(self) -> np.ndarray:
        t = np.subtract(self.b, self.a) / self.length
        return np.array([-t[1], t[0]])

    @property
    def is_reflective(self) -> bool:
        return self.material is Material.REFLECTIVE


@dataclass(frozen=True)
class Aoi:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate area of interest: {self}")


@dataclass(frozen=True)
class EnvironmentMap:
    bs: Point2
    surfaces: tuple[Surface, ...]
    aoi: Aoi

    def __post_init__(self):
        object.__setattr__(self, "bs", Point2(float(self.bs[0]), float(self.bs[1])))
        object.__setattr__(self, "surfaces", tuple(self.surfaces))

    @cached_property
    def _segments(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.surfaces:
            return np.zeros((0, 2)), np.zeros((0, 2))
        a = np.array([s.a for s in self.surfaces], dtype=float)
        b = np.array([s.b for s in self.surfaces], dtype=float)
        return a, b

    def with_surfaces(self, surfaces: Sequence[Surface]) -> "EnvironmentMap":
        return EnvironmentMap(self.bs, tuple(surfaces), self.aoi)


class Hit(NamedTuple):
    surface: int
    point: Point2
    distance: float


@dataclass(frozen=True)
class RayTerminal:
    """End point of one branch of a traced ray.

    ``vertices`` lists the polyline from the BS to ``point`` (reflection and
    pass-through points included), so the traveled length can be audited.
    """

    point: Point2
    bounces: int
    attenuation_branch: bool = False
    truncated: bool = False
    vertices: tuple[Point2, ...] = field(default=(), repr=False)

    @property
    def length(self) -> float:
        v = np.asarray(self.vertices, dtype=float)
        return float(np.sum(np.hypot(*np.diff(v, axis=0).T))) if len(v) > 1 else 0.0


def aod_to_direction(aod: float) -> np.ndarray:
    return np.array([np.cos(aod), -np.sin(aod)])


def direction_to_aod(direction) -> float:
    return float(np.arctan2(-direction[1], direction[0]))


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _segment_hits(origin, direction, a, b):
    """Ray parameters ``t`` and segment parameters ``u`` against many segments.

    Parallel segments get ``t = nan``.
    """
    s = b - a
    denom = _cross(direction, s)
    q = a - origin
    with np.errstate(divide="ignore", invalid="ignore"):
        parallel = np.abs(denom) <= 1e-15 * np.hypot(s[:, 0], s[:, 1])
        t = np.where(parallel, np.nan, _cross(q, s) / denom)
        u = np.where(parallel, np.nan, _cross(q, direction) / denom)
    return t, u


def nearest_hit(origin, direction, surfaces, exclude: int | None = None) -> Hit | None:
    """First surface hit by the ray ``origin + t * direction`` for ``t >= EPS_HIT``.

    ``surfaces`` is an :class:`EnvironmentMap` or a sequence of :class:`Surface`;
    the returned surface id indexes into it. ``exclude`` is the surface the
    ray is leaving. Hits exactly on an endpoint count as hits.
    """
    if isinstance(surfaces, EnvironmentMap):
        a, b = surfaces._segments
    elif len(surfaces) == 0:
        return None
    else:
        a = np.array([s.a for s in surfaces], dtype=float)
        b = np.array([s.b for s in surfaces], dtype=float)
    if len(a) == 0:
        return None
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    t, u = _segment_hits(o, d, a, b)
    with np.errstate(invalid="ignore"):
        ok = (t >= EPS_HIT) & (u >= 0.0) & (u <= 1.0)
    if exclude is not None:
        ok[exclude] = False
    if not ok.any():
        return None
    idx = int(np.flatnonzero(ok)[np.argmin(t[ok])])
    p = o + t[idx] * d
    return Hit(idx, Point2(float(p[0]), float(p[1])), float(t[idx]))


def reflect_direction(direction, surface: Surface) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    n = surface.normal
    return d - 2.0 * np.dot(d, n) * n


def mirror_point(p, surface: Surface) -> np.ndarray:
    """Image of ``p`` across the infinite line through ``surface``."""
    p = np.asarray(p, dtype=float)
    n = surface.normal
    return p - 2.0 * np.dot(p - np.asarray(surface.a), n) * n


@dataclass
class _Branch:
    origin: np.ndarray
    direction: np.ndarray
    remaining: float
    bounces: int = 0
    crossed: bool = False
    exclude: int | None = None
    vertices: list = field(default_factory=list)


def trace_path(
    env: EnvironmentMap,
    aod: float,
    budget: float,
    max_branches: int = DEFAULT_MAX_BRANCHES,
    max_bounces: int = DEFAULT_MAX_BOUNCES,
) -> list[RayTerminal]:
    """Launch a ray from the BS and follow it until it has traveled ``budget`` meters.

    Reflective surfaces mirror the ray. A semi-transparent surface splits the
    trace into a reflected branch and a pass-through branch; branches are
    processed breadth-first and once ``max_branches`` branches exist, further
    splits keep only the reflected continuation. A branch that would exceed
    ``max_bounces`` reflections stops at the offending hit with
    ``truncated=True``.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    start = np.asarray(env.bs, dtype=float)
    queue = deque([_Branch(start, aod_to_direction(aod), float(budget), vertices=[env.bs])])
    n_branches = 1
    terminals: list[RayTerminal] = []

    while queue:
        br = queue.popleft()
        while True:
            hit = nearest_hit(br.origin, br.direction, env, exclude=br.exclude)
            if hit is None or hit.distance >= br.remaining:
                end = br.origin + br.remaining * br.direction
                end = Point2(float(end[0]), float(end[1]))
                terminals.append(
                    RayTerminal(end, br.bounces, br.crossed, False, tuple(br.vertices + [end]))
                )
                break
            surf = env.surfaces[hit.surface]
            if br.bounces >= max_bounces:
                terminals.append(
                    RayTerminal(hit.point, br.bounces, br.crossed, True, tuple(br.vertices + [hit.point]))
                )
                break
            p = np.asarray(hit.point)
            remaining = br.remaining - hit.distance
            if not surf.is_reflective and n_branches < max_branches:
                n_branches += 1
                queue.append(
                    _Branch(p, br.direction, remaining, br.bounces, True, hit.surface,
                            br.vertices + [hit.point])
                )
            br.origin = p
            br.direction = reflect_direction(br.direction, surf)
            br.remaining = remaining
            br.bounces += 1
            br.exclude = hit.surface
            br.vertices = br.vertices + [hit.point]
    return terminals


def in_aoi(p, aoi: Aoi) -> bool:
    x, y = p
    return bool(aoi.x_min <= x <= aoi.x_max and aoi.y_min <= y <= aoi.y_max)


def segment_crossings(p, q, env: EnvironmentMap, eps: float = EPS_HIT) -> list[int]:
    """Ids of surfaces crossed by the open segment ``p -> q``.

    Touches within ``eps`` meters of either endpoint are ignored, so a leg
    that starts or ends on a surface does not count that surface.
    """
    a, b = env._segments
    if len(a) == 0:
        return []
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    length = float(np.hypot(*(q - p)))
    if length == 0.0:
        return []
    d = (q - p) / length
    t, u = _segment_hits(p, d, a, b)
    with np.errstate(invalid="ignore"):
        ok = (t >= eps) & (t <= length - eps) & (u >= 0.0) & (u <= 1.0)
    return [int(i) for i in np.flatnonzero(ok)]


def has_line_of_sight(env: EnvironmentMap, user) -> bool:
    """True when no surface of any material crosses the BS-user segment."""
    return not segment_crossings(env.bs, user, env)


# -- map files ---------------------------------------------------------------


def map_to_dict(env: EnvironmentMap) -> dict:
    return {
        "bs": [env.bs.x, env.bs.y],
        "aoi": [env.aoi.x_min, env.aoi.x_max, env.aoi.y_min, env.aoi.y_max],
        "surfaces": [
            {"a": list(s.a), "b": list(s.b), "material": s.material.value} for s in env.surfaces
        ],
    }


def map_from_dict(doc: dict) -> EnvironmentMap:
    surfaces = []
    for i, s in enumerate(doc.get("surfaces", [])):
        try:
            surfaces.append(Surface(Point2(*s["a"]), Point2(*s["b"]), Material(s.get("material", "reflective"))))
        except ValueError as exc:
            raise ValueError(f"surface {i}: {exc}") from exc
    return EnvironmentMap(Point2(*doc["bs"]), tuple(surfaces), Aoi(*doc["aoi"]))


def load_map(path) -> EnvironmentMap:
    return map_from_dict(json.loads(Path(path).read_text()))


def save_map(env: EnvironmentMap, path) -> None:
    Path(path).write_text(json.dumps(map_to_dict(env), indent=2) + "\n")
