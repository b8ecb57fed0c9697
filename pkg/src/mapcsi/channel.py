"""Geometric multipath forward model: image-method paths and the OFDM CSI matrix."""

from __future__ import annotations

import itertools
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .envmap import (
    EPS_HIT,
    EnvironmentMap,
    Point2,
    direction_to_aod,
    in_aoi,
    mirror_point,
    segment_crossings,
)

SPEED_OF_LIGHT = 299_792_458.0
CARRIER_HZ = 60e9
BANDWIDTH_HZ = 0.5e9

REFLECTION_AMPLITUDE = 0.7
TRANSMISSION_AMPLITUDE = 0.3


@dataclass(frozen=True)
class SystemConfig:
    """Array and OFDM dimensions.

    Defaults are the 60 GHz, 0.5 GHz bandwidth, 60-antenna / 60-subcarrier
    setup with 3x oversampled angle and delay grids.
    """

    n_t: int = 60
    n_c: int = 60
    n_tt: int = 180
    n_cc: int = 180
    t_s: float = 1.0 / BANDWIDTH_HZ
    wavelength: float = SPEED_OF_LIGHT / CARRIER_HZ

    def __post_init__(self):
        if self.n_t < 1 or self.n_c < 1:
            raise ValueError("n_t and n_c must be positive")
        if self.n_tt < self.n_t or self.n_cc < self.n_c:
            raise ValueError("oversampled grid must be at least as large as the array/subcarrier count")
        if not self.t_s > 0 or not self.wavelength > 0:
            raise ValueError("t_s and wavelength must be positive")

    @property
    def spacing(self) -> float:
        return self.wavelength / 2.0

    @property
    def window(self) -> float:
        """Unambiguous delay span ``n_c * t_s`` in seconds."""
        return self.n_c * self.t_s


@dataclass(frozen=True)
class Mpc:
    aod: float
    toa: float
    gain: complex
    bounces: int = 0
    crossings: int = 0
    vertices: tuple[Point2, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.toa < 0:
            raise ValueError("toa must be non-negative")

    @property
    def length(self) -> float:
        return self.toa * SPEED_OF_LIGHT

    def sampled_delay(self, t_s: float) -> float:
        return self.toa / t_s


def path_gain(length: float, bounces: int = 0, crossings: int = 0,
              wavelength: float = SPEED_OF_LIGHT / CARRIER_HZ) -> complex:
    if not length > 0:
        raise ValueError("path length must be positive")
    amp = REFLECTION_AMPLITUDE**bounces * TRANSMISSION_AMPLITUDE**crossings / length
    return complex(amp * np.exp(-2j * np.pi * length / wavelength))


def _same_side(p, q, surface) -> bool:
    n = surface.normal
    a = np.asarray(surface.a)
    sp = float(np.dot(np.asarray(p) - a, n))
    sq = float(np.dot(np.asarray(q) - a, n))
    return sp * sq > 0


def _unfold(env: EnvironmentMap, user: np.ndarray, seq: tuple[int, ...]) -> list[np.ndarray] | None:
    """Reflection points for the surface sequence ``seq`` or None if invalid."""
    images = [np.asarray(env.bs, dtype=float)]
    for s in seq:
        images.append(mirror_point(images[-1], env.surfaces[s]))
    pts = [user]
    target = user
    for j in range(len(seq), 0, -1):
        surf = env.surfaces[seq[j - 1]]
        src = images[j]
        d = target - src
        s = np.subtract(surf.b, surf.a)
        denom = d[0] * s[1] - d[1] * s[0]
        if abs(denom) < 1e-15:
            return None
        q = np.asarray(surf.a) - src
        t = (q[0] * s[1] - q[1] * s[0]) / denom
        u = (q[0] * d[1] - q[1] * d[0]) / denom
        if not (0.0 < t < 1.0 and 0.0 <= u <= 1.0):
            return None
        target = src + t * d
        pts.insert(0, target)
    pts.insert(0, images[0])
    for j, s in enumerate(seq, start=1):
        if not _same_side(pts[j - 1], pts[j + 1], env.surfaces[s]):
            return None
    legs = np.hypot(*np.diff(np.array(pts), axis=0).T)
    if np.any(legs < EPS_HIT):
        return None
    return pts


def enumerate_paths(env: EnvironmentMap, user, max_order: int = 2,
                    wavelength: float = SPEED_OF_LIGHT / CARRIER_HZ) -> list[Mpc]:
    """All specular paths BS -> user with at most ``max_order`` reflections.

    Legs crossing a reflective surface are blocked; legs crossing a
    semi-transparent surface survive with a transmission loss per crossing.
    Paths are returned LOS first, then by reflection order and surface ids.
    """
    if not in_aoi(user, env.aoi):
        raise ValueError(f"user {tuple(user)} is outside the area of interest")
    if max_order < 0:
        raise ValueError("max_order must be non-negative")
    u = np.asarray(user, dtype=float)
    n_surf = len(env.surfaces)
    out: list[Mpc] = []
    for order in range(max_order + 1):
        for seq in itertools.product(range(n_surf), repeat=order):
            if any(x == y for x, y in zip(seq, seq[1:])):
                continue
            pts = _unfold(env, u, seq)
            if pts is None:
                continue
            crossings = 0
            blocked = False
            for p, q in zip(pts, pts[1:]):
                for s in segment_crossings(p, q, env):
                    if env.surfaces[s].is_reflective:
                        blocked = True
                        break
                    crossings += 1
                if blocked:
                    break
            if blocked:
                continue
            length = float(np.sum(np.hypot(*np.diff(np.array(pts), axis=0).T)))
            out.append(
                Mpc(
                    aod=direction_to_aod(pts[1] - pts[0]),
                    toa=length / SPEED_OF_LIGHT,
                    gain=path_gain(length, order, crossings, wavelength),
                    bounces=order,
                    crossings=crossings,
                    vertices=tuple(Point2(float(x), float(y)) for x, y in pts),
                )
            )
    return out


def array_response(aod: float, cfg: SystemConfig) -> np.ndarray:
    z = np.arange(cfg.n_t)
    return np.exp(-2j * np.pi * z * cfg.spacing * np.cos(aod) / cfg.wavelength)


def synthesize_csi(mpcs: Sequence[Mpc], cfg: SystemConfig) -> np.ndarray:
    """CSI matrix ``H`` (``n_t x n_c``); column ``l`` is the CFR of subcarrier ``l``.

    Sampled delays are kept real-valued, not rounded to whole samples.
    """
    if len(mpcs) == 0:
        raise ValueError("at least one multipath component is required")
    aods = np.array([m.aod for m in mpcs])
    gains = np.array([m.gain for m in mpcs], dtype=complex)
    delays = np.array([m.sampled_delay(cfg.t_s) for m in mpcs])
    z = np.arange(cfg.n_t)
    l = np.arange(cfg.n_c)
    steer = np.exp(-2j * np.pi * np.outer(z, np.cos(aods)) * cfg.spacing / cfg.wavelength)
    phase = np.exp(-2j * np.pi * np.outer(delays, l) / cfg.n_c)
    return (steer * gains) @ phase


def add_noise(h: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex white noise at ``snr_db`` relative to the mean entry power."""
    p_sig = float(np.mean(np.abs(h) ** 2))
    sigma = np.sqrt(p_sig / 10 ** (snr_db / 10) / 2)
    return h + sigma * (rng.standard_normal(h.shape) + 1j * rng.standard_normal(h.shape))


# -- CSI files ---------------------------------------------------------------
#
# Binary layout (little endian): b"CSI1", int32 n_t, int32 n_c, float64 t_s,
# float64 wavelength, then n_t*n_c (real, imag) float64 pairs, row-major.

_MAGIC = b"CSI1"
_HEADER = struct.Struct("<4siidd")


def save_csi(path, h: np.ndarray, t_s: float, wavelength: float) -> None:
    path = Path(path)
    h = np.asarray(h, dtype=np.complex128)
    n_t, n_c = h.shape
    if path.suffix == ".json":
        doc = {
            "n_t": n_t,
            "n_c": n_c,
            "t_s": t_s,
            "wavelength": wavelength,
            "entries": np.column_stack([h.real.ravel(), h.imag.ravel()]).tolist(),
        }
        path.write_text(json.dumps(doc))
    else:
        pairs = np.column_stack([h.real.ravel(), h.imag.ravel()]).astype("<f8")
        path.write_bytes(_HEADER.pack(_MAGIC, n_t, n_c, t_s, wavelength) + pairs.tobytes())


def load_csi(path) -> tuple[np.ndarray, dict]:
    """Read a CSI file written by :func:`save_csi`; returns ``(H, header)``."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        pairs = np.asarray(doc["entries"], dtype=float)
        header = {k: doc[k] for k in ("n_t", "n_c", "t_s", "wavelength")}
    else:
        raw = path.read_bytes()
        magic, n_t, n_c, t_s, wavelength = _HEADER.unpack_from(raw)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a CSI file")
        pairs = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(-1, 2)
        header = {"n_t": n_t, "n_c": n_c, "t_s": t_s, "wavelength": wavelength}
    n_t, n_c = header["n_t"], header["n_c"]
    if pairs.shape != (n_t * n_c, 2):
        raise ValueError(f"{path}: expected {n_t * n_c} complex entries, found {pairs.shape[0]}")
    h = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(n_t, n_c)
    return h, header
