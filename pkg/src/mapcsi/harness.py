"""Street-canyon scenarios, batch evaluation and ADP-size sweeps."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, replace
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .channel import SystemConfig, add_noise, enumerate_paths, synthesize_csi
from .envmap import EnvironmentMap, Point2, has_line_of_sight, map_from_dict
from .localize import PipelineParams, UnlocalizableError, localize_csi, localize_mapat

import json

METHODS = ("csi", "at")
METHOD_NAMES = {"csi": "MAP-CSI", "at": "MAP-AT"}
CSV_COLUMNS = ("method", "n_tt", "n_cc", "region", "samples", "unlocalizable",
               "mean_error_m", "p50_m", "p90_m")


def default_map(kind: str) -> EnvironmentMap:
    """Bundled canyon map: ``"los"`` (two walls) or ``"mixed"`` (walls plus two buses)."""
    kind = kind.lower()
    if kind not in ("los", "mixed"):
        raise ValueError(f"unknown scenario kind {kind!r}")
    text = resources.files("mapcsi").joinpath("data", f"{kind}.json").read_text()
    return map_from_dict(json.loads(text))


@dataclass(frozen=True)
class Scenario:
    map: EnvironmentMap
    grid: tuple[Point2, ...]
    los_mask: np.ndarray


def grid_positions(env: EnvironmentMap, grid_h: int, grid_v: int) -> list[Point2]:
    """``grid_v`` positions along the street (x) times ``grid_h`` across it (y), x-major.

    Positions sit at the centres of equal cells tiling the AoI, so none lies
    on its boundary.
    """
    if grid_h < 1 or grid_v < 1:
        raise ValueError("grid sizes must be positive")
    a = env.aoi
    xs = a.x_min + (np.arange(grid_v) + 0.5) * (a.x_max - a.x_min) / grid_v
    ys = a.y_min + (np.arange(grid_h) + 0.5) * (a.y_max - a.y_min) / grid_h
    return [Point2(float(x), float(y)) for x in xs for y in ys]


def scenario_from_map(env: EnvironmentMap, grid_h: int = 5, grid_v: int = 1000) -> Scenario:
    grid = grid_positions(env, grid_h, grid_v)
    mask = np.array([has_line_of_sight(env, p) for p in grid], dtype=bool)
    return Scenario(env, tuple(grid), mask)


def build_scenario(kind: str = "los", grid_h: int = 5, grid_v: int = 1000) -> Scenario:
    return scenario_from_map(default_map(kind), grid_h, grid_v)


def stratified_indices(n: int, sample_limit: int, seed: int = 0) -> np.ndarray:
    """One random index from each of ``sample_limit`` equal strata of ``range(n)``."""
    if sample_limit > n:
        raise ValueError(f"sample_limit {sample_limit} exceeds grid size {n}")
    if sample_limit == n:
        return np.arange(n)
    edges = np.linspace(0, n, sample_limit + 1).astype(int)
    rng = np.random.default_rng(seed)
    return np.array([rng.integers(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])


@dataclass(frozen=True)
class EvalRecord:
    index: int
    x: float
    y: float
    method: str
    n_tt: int
    n_cc: int
    error: float
    los: bool
    unlocalizable: bool = False


def evaluate(scenario: Scenario, cfg: SystemConfig = SystemConfig(), params: PipelineParams = PipelineParams(),
             methods: Sequence[str] = METHODS, sample_limit: int = 200, seed: int = 0,
             max_order: int = 2, snr_db: float | None = None) -> list[EvalRecord]:
    """Localize sampled grid positions with each method; records sorted by grid index then method.

    MAP-AT records carry the ADP size of ``cfg`` for bookkeeping only.
    """
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    idx = stratified_indices(len(scenario.grid), sample_limit, seed)
    rng = np.random.default_rng(seed)
    records = []
    for i in idx:
        user = scenario.grid[i]
        los = bool(scenario.los_mask[i])
        mpcs = enumerate_paths(scenario.map, user, max_order, cfg.wavelength)
        for method in methods:
            try:
                if method == "at":
                    est = localize_mapat(mpcs, scenario.map, params)
                else:
                    h = synthesize_csi(mpcs, cfg)
                    if snr_db is not None:
                        h = add_noise(h, snr_db, rng)
                    est = localize_csi(h, scenario.map, cfg, params)
            except UnlocalizableError:
                records.append(EvalRecord(int(i), user.x, user.y, method, cfg.n_tt, cfg.n_cc, float("nan"), los, True))
                continue
            err = float(np.hypot(est.estimate.x - user.x, est.estimate.y - user.y))
            records.append(EvalRecord(int(i), user.x, user.y, method, cfg.n_tt, cfg.n_cc, err, los))
    records.sort(key=lambda r: (r.index, METHODS.index(r.method)))
    return records


def summarize(records: Iterable[EvalRecord]) -> dict:
    """Aggregate over localizable records; unlocalizable ones are only counted."""
    records = list(records)
    errs = np.array([r.error for r in records if not r.unlocalizable])
    return {
        "samples": len(records),
        "unlocalizable": sum(r.unlocalizable for r in records),
        "mean_error_m": float(errs.mean()) if len(errs) else float("nan"),
        "p50_m": float(np.percentile(errs, 50)) if len(errs) else float("nan"),
        "p90_m": float(np.percentile(errs, 90)) if len(errs) else float("nan"),
    }


def _regions(scenario: Scenario) -> list[str]:
    return ["all"] if scenario.los_mask.all() else ["all", "los", "nlos"]


def summary_rows(scenario: Scenario, records: Sequence[EvalRecord], method: str, n_tt: int, n_cc: int) -> list[dict]:
    rows = []
    for region in _regions(scenario):
        sel = [r for r in records if r.method == method
               and (region == "all" or r.los == (region == "los"))]
        rows.append({"method": METHOD_NAMES[method], "n_tt": n_tt, "n_cc": n_cc, "region": region, **summarize(sel)})
    return rows


def sweep(scenario: Scenario, cfg_base: SystemConfig = SystemConfig(), params: PipelineParams = PipelineParams(),
          sizes: Sequence[tuple[int, int]] = ((60, 60), (120, 120), (180, 180)),
          methods: Sequence[str] = METHODS, sample_limit: int = 200, seed: int = 0) -> list[dict]:
    """Mean/median/p90 error per (method, ADP size, region).

    Rows for a plain LOS scenario cover the ``all`` region only; scenarios with
    blocked positions add ``los`` and ``nlos`` rows. MAP-AT does not use the
    ADP, so it is evaluated once and repeated for every size.
    """
    if not sizes:
        raise ValueError("sizes must be non-empty")
    rows = []
    at_records = None
    if "at" in methods:
        at_records = evaluate(scenario, cfg_base, params, ("at",), sample_limit, seed)
    for n_tt, n_cc in sizes:
        cfg = replace(cfg_base, n_tt=n_tt, n_cc=n_cc)
        for method in methods:
            recs = at_records if method == "at" else evaluate(scenario, cfg, params, ("csi",), sample_limit, seed)
            rows += summary_rows(scenario, recs, method, n_tt, n_cc)
    return rows


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if np.isnan(v) else f"{v:.6f}"
    return str(v)


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def records_to_csv(records: Sequence[EvalRecord]) -> str:
    buf = io.StringIO()
    fields = list(EvalRecord.__dataclass_fields__)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in records:
        d = asdict(r)
        d["method"] = METHOD_NAMES[r.method]
        w.writerow([_fmt(d[f]) for f in fields])
    return buf.getvalue()
