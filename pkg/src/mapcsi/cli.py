"""Command line entry point: ``mapcsi {gen-map,synth,localize,evaluate,sweep}``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import adp
from .channel import Mpc, SystemConfig, add_noise, enumerate_paths, load_csi, save_csi, synthesize_csi
from .envmap import Point2, load_map, map_from_dict, map_to_dict
from .harness import (
    build_scenario,
    default_map,
    evaluate,
    records_to_csv,
    rows_to_csv,
    scenario_from_map,
    stratified_indices,
    summary_rows,
    sweep,
)
from .localize import PipelineParams, UnlocalizableError, localize_csi, localize_mapat

_FLAG_FIELDS = {
    "ntt": "n_tt", "ncc": "n_cc", "nmax": "n_max", "imax": "i_max",
    "kmax": "k_max", "dth": "d_th", "seed": "seed",
}


def _load_config(args) -> tuple[SystemConfig, PipelineParams]:
    doc = json.loads(Path(args.config).read_text()) if args.config else {}
    for flag, key in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            doc[key] = value
    cfg_keys = {f.name for f in fields(SystemConfig)}
    par_keys = {f.name for f in fields(PipelineParams)}
    unknown = set(doc) - cfg_keys - par_keys
    if unknown:
        raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    cfg = SystemConfig(**{k: v for k, v in doc.items() if k in cfg_keys})
    params = PipelineParams(**{k: v for k, v in doc.items() if k in par_keys})
    return cfg, params


def _scenario(args):
    if args.map:
        doc = json.loads(Path(args.map).read_text())
        return scenario_from_map(map_from_dict(doc), args.grid_h, args.grid_v)
    return build_scenario(args.scenario, args.grid_h, args.grid_v)


def _methods(name: str) -> tuple[str, ...]:
    return ("csi", "at") if name == "both" else (name,)


def _write(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen_map(args) -> None:
    sc = build_scenario(args.scenario, args.grid_h, args.grid_v)
    doc = map_to_dict(sc.map)
    doc["grid"] = [list(p) for p in sc.grid]
    doc["los"] = sc.los_mask.tolist()
    _write(json.dumps(doc, indent=1) + "\n", args.out)


def _mpc_to_dict(m: Mpc) -> dict:
    return {"aod": m.aod, "toa": m.toa, "gain": [m.gain.real, m.gain.imag],
            "bounces": m.bounces, "crossings": m.crossings}


def _mpc_from_dict(d: dict) -> Mpc:
    return Mpc(d["aod"], d["toa"], complex(*d["gain"]), d.get("bounces", 0), d.get("crossings", 0))


def cmd_synth(args) -> None:
    cfg, params = _load_config(args)
    env = load_map(args.map) if args.map else default_map(args.scenario)
    if args.position:
        positions = [Point2(x, y) for x, y in args.position]
    else:
        sc = scenario_from_map(env, args.grid_h, args.grid_v)
        positions = [sc.grid[i] for i in stratified_indices(len(sc.grid), args.samples, params.seed)]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(params.seed)
    manifest = []
    for k, user in enumerate(positions):
        mpcs = enumerate_paths(env, user, args.max_order, cfg.wavelength)
        h = synthesize_csi(mpcs, cfg)
        if args.snr_db is not None:
            h = add_noise(h, args.snr_db, rng)
        name = f"csi_{k:04d}.{args.format}"
        save_csi(out / name, h, cfg.t_s, cfg.wavelength)
        manifest.append({"csi": name, "position": list(user), "paths": [_mpc_to_dict(m) for m in mpcs]})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")


def cmd_localize(args) -> None:
    cfg, params = _load_config(args)
    env = load_map(args.map)
    try:
        if args.method == "at":
            if not args.paths:
                raise SystemExit("--method at needs --paths")
            mpcs = [_mpc_from_dict(d) for d in json.loads(Path(args.paths).read_text())]
            est = localize_mapat(mpcs, env, params)
        else:
            h, header = load_csi(args.csi)
            cfg = replace(cfg, n_t=header["n_t"], n_c=header["n_c"], t_s=header["t_s"],
                          wavelength=header["wavelength"])
            if args.adp_csv:
                adp.save_adp_csv(args.adp_csv, adp.compute_adp(h, cfg))
            est = localize_csi(h, env, cfg, params)
    except UnlocalizableError as exc:
        _write(json.dumps({"unlocalizable": True, "reason": str(exc)}) + "\n", args.out)
        raise SystemExit(2)
    _write(json.dumps(est.to_dict(args.truth), indent=1) + "\n", args.out)


def cmd_evaluate(args) -> None:
    cfg, params = _load_config(args)
    sc = _scenario(args)
    methods = _methods(args.method)
    records = evaluate(sc, cfg, params, methods, args.samples, params.seed)
    _write(records_to_csv(records), args.out)
    rows = []
    for m in methods:
        rows += summary_rows(sc, records, m, cfg.n_tt, cfg.n_cc)
    sys.stderr.write(rows_to_csv(rows))


def _sizes(text: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split(","):
        a, _, b = item.partition("x")
        out.append((int(a), int(b or a)))
    return out


def cmd_sweep(args) -> None:
    cfg, params = _load_config(args)
    sc = _scenario(args)
    rows = sweep(sc, cfg, params, _sizes(args.sizes), _methods(args.method), args.samples, params.seed)
    _write(rows_to_csv(rows), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mapcsi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        p.add_argument("--config", help="JSON file with SystemConfig/PipelineParams fields")
        p.add_argument("--ntt", type=int)
        p.add_argument("--ncc", type=int)
        p.add_argument("--nmax", type=int)
        p.add_argument("--imax", type=int)
        p.add_argument("--kmax", type=int)
        p.add_argument("--dth", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path (default: stdout)")
        if scenario:
            p.add_argument("--scenario", choices=("los", "mixed"), default="los")
            p.add_argument("--grid-h", type=int, default=5)
            p.add_argument("--grid-v", type=int, default=1000)

    p = sub.add_parser("gen-map", help="write a scenario map with its position grid")
    p.add_argument("--scenario", choices=("los", "mixed"), default="los")
    p.add_argument("--grid-h", type=int, default=5)
    p.add_argument("--grid-v", type=int, default=1000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_map)

    p = sub.add_parser("synth", help="synthesize CSI files for user positions")
    common(p)
    p.add_argument("--map")
    p.add_argument("--position", type=float, nargs=2, action="append", metavar=("X", "Y"))
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--max-order", type=int, default=2)
    p.add_argument("--snr-db", type=float)
    p.add_argument("--format", choices=("json", "bin"), default="json")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("localize", help="localize one CSI file against a map")
    common(p, scenario=False)
    p.add_argument("--map", required=True)
    p.add_argument("--csi")
    p.add_argument("--paths", help="JSON list of paths (for --method at)")
    p.add_argument("--method", choices=("csi", "at"), default="csi")
    p.add_argument("--truth", type=float, nargs=2, metavar=("X", "Y"))
    p.add_argument("--adp-csv", help="also dump the ADP magnitudes as CSV")
    p.set_defaults(func=cmd_localize)

    for name, func, help_ in (("evaluate", cmd_evaluate, "per-sample errors on a scenario"),
                              ("sweep", cmd_sweep, "mean errors over ADP sizes")):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.add_argument("--map", help="map or gen-map JSON (overrides --scenario)")
        p.add_argument("--samples", type=int, default=200)
        p.add_argument("--method", choices=("csi", "at", "both"), default="both")
        if name == "sweep":
            p.add_argument("--sizes", default="60x60,120x120,180x180")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
