"""Map-assisted single-site localization from CSI (MAP-CSI) and from exact path parameters (MAP-AT)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import adp
from .channel import SPEED_OF_LIGHT, Mpc, SystemConfig
from .cluster import DEFAULT_D_TH, DEFAULT_K_MAX, ClusterResult, estimate_location
from .envmap import DEFAULT_MAX_BRANCHES, EnvironmentMap, Point2, in_aoi, trace_path


class UnlocalizableError(RuntimeError):
    """No candidate location survived; the sample has no estimate."""


@dataclass(frozen=True)
class PipelineParams:
    n_max: int = 5
    i_max: int = 7
    k_max: int = DEFAULT_K_MAX
    d_th: float = DEFAULT_D_TH
    suppress_a: int | None = None  # None: scale with the ADP grid
    suppress_d: int | None = None
    rel_threshold: float = adp.DEFAULT_REL_THRESHOLD
    max_branches: int = DEFAULT_MAX_BRANCHES
    seed: int = 0

    def __post_init__(self):
        for name in ("n_max", "i_max", "k_max", "max_branches"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass(frozen=True)
class RayHypothesis:
    aod: float
    toa_adp: float
    magnitude: float
    peak: adp.AdpPeak | None = None


@dataclass(frozen=True)
class CandidatePoint:
    point: Point2
    ray_index: int
    ambiguity_index: int
    weight: float
    kept: bool = True


@dataclass
class LocationEstimate:
    estimate: Point2
    cluster: ClusterResult
    candidates: list[CandidatePoint]
    rays: list[RayHypothesis] = field(default_factory=list)

    @property
    def kept(self) -> list[CandidatePoint]:
        return [c for c in self.candidates if c.kept]

    def to_dict(self, truth=None) -> dict:
        """JSON-ready diagnostics record."""
        labels = iter(self.cluster.labels.tolist())
        doc = {
            "estimate": list(self.estimate),
            "k_e": self.cluster.k_e,
            "mean_silhouette": {str(k): v for k, v in self.cluster.mean_silhouette.items()},
            "peaks": [
                {
                    "aod_rad": r.aod,
                    "toa_adp_s": r.toa_adp,
                    "magnitude": r.magnitude,
                    "angle_bin": None if r.peak is None else r.peak.angle_bin,
                    "delay_bin": None if r.peak is None else r.peak.delay_bin,
                }
                for r in self.rays
            ],
            "candidates": [
                {
                    "point": list(c.point),
                    "n": c.ray_index,
                    "i": c.ambiguity_index,
                    "weight": c.weight,
                    "kept": c.kept,
                    "label": next(labels) if c.kept else None,
                }
                for c in self.candidates
            ],
        }
        if truth is not None:
            doc["truth"] = [float(truth[0]), float(truth[1])]
            doc["error_m"] = float(np.hypot(self.estimate[0] - truth[0], self.estimate[1] - truth[1]))
        return doc


def candidates_from_ray(env: EnvironmentMap, hyp: RayHypothesis, i_max: int, window: float,
                        ray_index: int = 1, max_branches: int = DEFAULT_MAX_BRANCHES) -> list[CandidatePoint]:
    """Ray terminals for each delay hypothesis ``toa_adp + (i - 1) * window``, ``i = 1..i_max``.

    ``window`` is the unambiguous delay span ``n_c * t_s`` in seconds.
    """
    out = []
    for i in range(1, i_max + 1):
        budget = (hyp.toa_adp + (i - 1) * window) * SPEED_OF_LIGHT
        for term in trace_path(env, hyp.aod, budget, max_branches):
            out.append(CandidatePoint(term.point, ray_index, i, hyp.magnitude))
    return out


def rays_from_csi(h: np.ndarray, cfg: SystemConfig, params: PipelineParams) -> list[RayHypothesis]:
    a = adp.compute_adp(h, cfg)
    sa, sd = adp.default_suppression(cfg)
    if params.suppress_a is not None:
        sa = params.suppress_a
    if params.suppress_d is not None:
        sd = params.suppress_d
    peaks = adp.extract_peaks(a, params.n_max, sa, sd, params.rel_threshold)
    return [
        RayHypothesis(adp.bin_to_aod(p.angle_bin, cfg), adp.bin_to_delay(p.delay_bin, cfg), p.magnitude, p)
        for p in peaks
    ]


def _finish(env: EnvironmentMap, candidates: list[CandidatePoint], params: PipelineParams,
            rays: list[RayHypothesis]) -> LocationEstimate:
    candidates = [
        CandidatePoint(c.point, c.ray_index, c.ambiguity_index, c.weight, in_aoi(c.point, env.aoi))
        for c in candidates
    ]
    kept = [c for c in candidates if c.kept]
    if not kept:
        raise UnlocalizableError(f"no candidate inside the area of interest ({len(candidates)} filtered)")
    result = estimate_location(
        [c.point for c in kept], params.d_th, params.k_max, params.seed, weights=[c.weight for c in kept]
    )
    return LocationEstimate(result.estimate, result, candidates, rays)


def localize_csi(h: np.ndarray, env: EnvironmentMap, cfg: SystemConfig,
                 params: PipelineParams = PipelineParams()) -> LocationEstimate:
    """Estimate the user position from one CSI matrix and the environment map."""
    rays = rays_from_csi(h, cfg, params)
    if not rays:
        raise UnlocalizableError("no ADP peak above threshold")
    candidates = []
    for n, ray in enumerate(rays, start=1):
        candidates += candidates_from_ray(env, ray, params.i_max, cfg.window, n, params.max_branches)
    return _finish(env, candidates, params, rays)


def localize_mapat(mpcs: Sequence[Mpc], env: EnvironmentMap,
                   params: PipelineParams = PipelineParams()) -> LocationEstimate:
    """Baseline with exact AoD/ToA per path: the ``n_max`` strongest paths, one budget each."""
    if len(mpcs) == 0:
        raise ValueError("at least one multipath component is required")
    strongest = sorted(mpcs, key=lambda m: -abs(m.gain))[: params.n_max]
    rays = [RayHypothesis(m.aod, m.toa, abs(m.gain)) for m in strongest]
    candidates = []
    for n, ray in enumerate(rays, start=1):
        for term in trace_path(env, ray.aod, ray.toa_adp * SPEED_OF_LIGHT, params.max_branches):
            candidates.append(CandidatePoint(term.point, n, 1, ray.magnitude))
    return _finish(env, candidates, params, rays)
