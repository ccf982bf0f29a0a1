"""Command-line surface: one subcommand per experiment family.

Every command is a pure function from flags and input files to output
files. Flags can also come from a plain key=value spec file via --spec,
with explicit flags taking precedence. Exit codes: 0 success, 1 runtime
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass

import pandas as pd

from . import datagen as dg
from . import harness as hz
from .dof import dof_curve_forest, dof_curve_selectors

MODEL_NAMES = ("linear-low", "linear-medium", "linear-high-5", "linear-high-10")
SETTING_NAMES = ("low", "medium", "high-5", "high-10")
CANONICAL_SNR = [lvl.nu for lvl in dg.snr_grid(10, 0.05, 6.0)]


def _parse_tokens(text: str) -> list[str]:
    text = text.strip()
    if not text:
        raise ValueError("empty value")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range syntax is start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"range step must be positive in {text!r}")
        vals, v = [], start
        while v <= stop + 1e-9 * max(1.0, abs(stop)):
            vals.append(v)
            v += step
        return [("%g" % x) for x in vals]
    return [tok for tok in text.split(",") if tok]


def int_list(text: str) -> list[int]:
    return [int(float(tok)) for tok in _parse_tokens(text)]


def float_list(text: str) -> list[float]:
    return [float(tok) for tok in _parse_tokens(text)]


def choice(*options):
    def conv(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return conv


@dataclass
class Flag:
    name: str
    conv: object
    default: object = None
    help: str = ""
    required: bool = False

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_COMMON = [
    Flag("out", str, ".", "output directory (created if absent)"),
    Flag("workers", int, 1, "worker processes; any count gives identical output"),
    Flag("spec", str, None, "key=value file supplying flag defaults"),
    Flag("id", str, None, "experiment id used in output rows and file names"),
]

FLAGS: dict[str, list[Flag]] = {
    "dof": _COMMON + [
        Flag("model", choice(*MODEL_NAMES), None, "data model", required=True),
        Flag("family", choice("forest", "selectors"), "forest",
             "estimator family to trace"),
        Flag("snr", float, 3.52, "signal-to-noise ratio of the frozen design"),
        Flag("mtry", float_list, [0.1, 0.33, 0.67, 1.0],
             "forest eligibility proportions"),
        Flag("maxnodes", int_list, [5, 10, 20, 40, 80], "leaf-count caps"),
        Flag("depths", int_list, list(range(0, 11)),
             "selection depths (selectors family)"),
        Flag("reps", int, 100, "noise replications"),
        Flag("trees", int, 200, "trees per forest"),
        Flag("ensemble-size", int, 100, "models per selection ensemble"),
        Flag("seed", int, None, "master seed", required=True),
    ],
    "sweep": _COMMON + [
        Flag("generator", choice("mars", "marsadd", "linear"), "mars"),
        Flag("n", int, 500, "training-set size (surface generators)"),
        Flag("setting", choice(*SETTING_NAMES), "medium",
             "linear setting (linear generator)"),
        Flag("snr", float_list, None, "SNR grid (default: canonical 10-point)"),
        Flag("reps", int, 50, "replications per SNR"),
        Flag("test-size", int, 1000, "test-set size"),
        Flag("trees", int, 500, "trees per forest"),
        Flag("seed", int, None, "master seed", required=True),
    ],
    "optmtry": _COMMON + [
        Flag("generator", choice("mars", "marsadd", "linear"), "mars"),
        Flag("n", int, 500, "training-set size"),
        Flag("p", int, 20, "features (linear generator)"),
        Flag("s", int, 10, "active features (linear generator)"),
        Flag("rho", float, 0.35, "feature autocorrelation (linear generator)"),
        Flag("snr", float_list, None, "SNR grid (default: canonical 10-point)"),
        Flag("reps", int, 50, "replications per SNR"),
        Flag("test-size", int, None, "test-set size (default: same as n)"),
        Flag("trees", int, 500, "trees per forest"),
        Flag("seed", int, None, "master seed", required=True),
    ],
    "realnoise": _COMMON + [
        Flag("data", str, None, "regression CSV with a header row", required=True),
        Flag("response", str, None, "response column (default: last)"),
        Flag("alpha", float_list, list(hz.REAL_ALPHAS),
             "noise proportions of var(y); must include 0"),
        Flag("reps", int, 20, "noise replications"),
        Flag("trees", int, 500, "trees per forest"),
        Flag("seed", int, None, "master seed", required=True),
    ],
    "selbench": _COMMON + [
        Flag("setting", choice(*SETTING_NAMES), None, "linear setting",
             required=True),
        Flag("snr", float_list, None, "SNR grid (default: canonical 10-point)"),
        Flag("reps", int, 20, "replications per SNR"),
        Flag("depths", int_list, None, "depth grid (default per setting)"),
        Flag("mtry-grid", float_list, None,
             "tuned-ensemble eligibility grid (default: 10 values 0.1..1)"),
        Flag("ensemble-size", int, 100, "models per selection ensemble"),
        Flag("n-lambda", int, None, "lasso grid size (default per setting)"),
        Flag("gamma", float_list, None,
             "relaxation weights (default: 10 values 0..1)"),
        Flag("seed", int, None, "master seed", required=True),
    ],
    "theorems": _COMMON + [
        Flag("p", int, 8, "features"),
        Flag("m", int_list, [2, 4, 6], "features per base model"),
        Flag("t", int, None, "rows per base model (enables the data-mean check)"),
        Flag("b-grid", int_list, [100, 1000, 10000], "ensemble sizes"),
        Flag("n", int, 64, "rows in the fixed design"),
        Flag("reps", int, 10, "replications"),
        Flag("ensemble-size", int, 20, "models per data replication"),
        Flag("seed", int, None, "master seed", required=True),
    ],
    "interp": _COMMON + [
        Flag("b", int_list, None, "bootstrap counts", required=True),
        Flag("n", int_list, [1], "sample sizes for the all-points value"),
    ],
}


class UsageError(Exception):
    pass


def _load_spec_file(path: str) -> dict[str, str]:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read spec file {path}: {exc}") from exc
    out = {}
    for i, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected key=value, got {line!r}")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _merge_config(command: str, supplied: dict) -> dict:
    flags = {f.dest: f for f in FLAGS[command]}
    cfg = {f.dest: f.default for f in FLAGS[command]}

    def apply(dest: str, raw: str, origin: str):
        flag = flags.get(dest)
        if flag is None:
            raise UsageError(f"{origin}: unknown option {dest!r}")
        try:
            cfg[dest] = flag.conv(raw)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"{origin}: bad value for --{flag.name}: {exc}") from exc

    if "spec" in supplied:
        for key, val in _load_spec_file(supplied["spec"]).items():
            if key == "spec":
                continue
            apply(key, val, f"spec file {supplied['spec']}")
    for dest, raw in supplied.items():
        if dest != "spec":
            apply(dest, raw, "flag")
    missing = [f"--{f.name}" for f in FLAGS[command]
               if f.required and cfg[f.dest] is None]
    if missing:
        raise UsageError(f"{command}: missing required {', '.join(missing)}")
    if cfg.get("workers") is not None and cfg["workers"] < 1:
        raise UsageError("--workers must be >= 1")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randreg",
        description="Randomization-as-regularization experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, flags in FLAGS.items():
        p = sub.add_parser(command)
        for f in flags:
            p.add_argument(f"--{f.name}", dest=f.dest, type=str,
                           default=argparse.SUPPRESS, help=f.help)
    return parser


def _outdir(cfg: dict) -> str:
    path = cfg["out"]
    os.makedirs(path, exist_ok=True)
    return path


def _emit(records, cfg, command: str, started: float) -> str:
    out = _outdir(cfg)
    name = cfg["id"] or command
    path = os.path.join(out, f"{name}.csv")
    manifest = hz.base_manifest(command, cfg.get("seed"), started)
    for key in sorted(cfg):
        if key not in ("out", "spec", "workers", "id"):
            manifest[f"flag.{key}"] = cfg[key]
    hz.write_records(records, path, manifest)
    return path


def _log(command: str):
    return lambda msg: print(f"[{command}] {msg}", file=sys.stderr)


def _curve_lines(curve) -> str:
    lines = ["complexity,dof,se"]
    for x, d, s in zip(curve.complexity_axis, curve.dof_estimates, curve.se):
        lines.append("%.10g,%.10g,%.10g" % (x, d, s))
    return "\n".join(lines) + "\n"


def cmd_dof(cfg: dict) -> list[str]:
    started = time.time()
    setting = dg.SETTINGS[cfg["model"].removeprefix("linear-")]
    snr = dg.SnrLevel(cfg["snr"])
    log = _log("dof")
    if cfg["family"] == "forest":
        curves = dof_curve_forest(setting, mtry_list=cfg["mtry"],
                                  maxnodes_list=cfg["maxnodes"], snr=snr,
                                  n_reps=cfg["reps"], seed=cfg["seed"],
                                  n_trees=cfg["trees"])
    else:
        curves = dof_curve_selectors(setting, depths=cfg["depths"], snr=snr,
                                     n_reps=cfg["reps"], seed=cfg["seed"],
                                     ensemble_size=cfg["ensemble_size"])
    out = _outdir(cfg)
    stem = cfg["id"] or f"dof_{cfg['model']}_{cfg['family']}"
    paths = []
    for curve in curves:
        path = os.path.join(out, f"{stem}_{curve.fitter_id}.csv")
        with open(path, "w") as fh:
            fh.write(_curve_lines(curve))
        paths.append(path)
        log(f"{curve.fitter_id}: {len(curve.complexity_axis)} points")
    manifest = hz.base_manifest("dof", cfg["seed"], started)
    for key in sorted(cfg):
        if key not in ("out", "spec", "workers", "id"):
            manifest[f"flag.{key}"] = cfg[key]
    mpath = os.path.join(out, f"{stem}.manifest")
    with open(mpath, "w") as fh:
        fh.write("\n".join(f"{k}={v}" for k, v in manifest.items()) + "\n")
    return paths


def cmd_sweep(cfg: dict) -> list[str]:
    started = time.time()
    spec = hz.ExperimentSpec(
        id=cfg["id"] or "sweep", generator=cfg["generator"],
        snr_grid=cfg["snr"] or CANONICAL_SNR, n_reps=cfg["reps"],
        seed=cfg["seed"], metric="mse_diff",
        setting=dg.SETTINGS[cfg["setting"]] if cfg["generator"] == "linear" else None,
        n=cfg["n"], test_size=cfg["test_size"], n_trees=cfg["trees"])
    records = hz.run_snr_sweep_forest(spec, workers=cfg["workers"],
                                      log=_log("sweep"))
    return [_emit(records, cfg, "sweep", started)]


def cmd_optmtry(cfg: dict) -> list[str]:
    started = time.time()
    setting = None
    if cfg["generator"] == "linear":
        setting = dg.LinearSetting(n=cfg["n"], p=cfg["p"], s=cfg["s"],
                                   rho=cfg["rho"])
    spec = hz.ExperimentSpec(
        id=cfg["id"] or "optmtry", generator=cfg["generator"],
        snr_grid=cfg["snr"] or CANONICAL_SNR, n_reps=cfg["reps"],
        seed=cfg["seed"], metric="optimal_mtry", setting=setting,
        n=cfg["n"], test_size=cfg["test_size"], n_trees=cfg["trees"])
    records = hz.run_optimal_mtry(spec, workers=cfg["workers"],
                                  log=_log("optmtry"))
    return [_emit(records, cfg, "optmtry", started)]


def cmd_realnoise(cfg: dict) -> list[str]:
    started = time.time()
    records = hz.run_real_noise(
        cfg["data"], alphas=cfg["alpha"], n_reps=cfg["reps"],
        seed=cfg["seed"], n_trees=cfg["trees"], response=cfg["response"],
        workers=cfg["workers"], experiment_id=cfg["id"] or "realnoise",
        log=_log("realnoise"))
    return [_emit(records, cfg, "realnoise", started)]


def cmd_selbench(cfg: dict) -> list[str]:
    started = time.time()
    estimators = {}
    if cfg["depths"] is not None:
        estimators["fs"] = {"depth": cfg["depths"]}
    randfs_cfg = {"ensemble_size": cfg["ensemble_size"]}
    if cfg["mtry_grid"] is not None:
        randfs_cfg["mtry"] = cfg["mtry_grid"]
    estimators["randfs"] = randfs_cfg
    if cfg["n_lambda"] is not None:
        estimators["lasso"] = {"n_lambda": cfg["n_lambda"]}
    if cfg["gamma"] is not None:
        estimators["relax"] = {"gamma": cfg["gamma"]}
    spec = hz.ExperimentSpec(
        id=cfg["id"] or "selbench", generator="linear",
        snr_grid=cfg["snr"] or CANONICAL_SNR, n_reps=cfg["reps"],
        seed=cfg["seed"], metric="rte_bayes",
        setting=dg.SETTINGS[cfg["setting"]], estimators=estimators)
    records = hz.run_selector_benchmark(spec, workers=cfg["workers"],
                                        log=_log("selbench"))
    return [_emit(records, cfg, "selbench", started)]


def cmd_theorems(cfg: dict) -> list[str]:
    started = time.time()
    records = hz.run_theorem_checks(
        p=cfg["p"], m_values=cfg["m"], t=cfg["t"], b_grid=cfg["b_grid"],
        n=cfg["n"], n_reps=cfg["reps"], seed=cfg["seed"],
        ensemble_size=cfg["ensemble_size"],
        experiment_id=cfg["id"] or "theorems", log=_log("theorems"))
    return [_emit(records, cfg, "theorems", started)]


def cmd_interp(cfg: dict) -> list[str]:
    started = time.time()
    records = hz.interp_table(cfg["b"], cfg["n"],
                              experiment_id=cfg["id"] or "interp")
    return [_emit(records, cfg, "interp", started)]


_DISPATCH = {
    "dof": cmd_dof,
    "sweep": cmd_sweep,
    "optmtry": cmd_optmtry,
    "realnoise": cmd_realnoise,
    "selbench": cmd_selbench,
    "theorems": cmd_theorems,
    "interp": cmd_interp,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    supplied = {k: v for k, v in vars(ns).items() if k != "command"}
    try:
        cfg = _merge_config(ns.command, supplied)
    except UsageError as exc:
        print(f"randreg {ns.command}: {exc}", file=sys.stderr)
        return 2
    try:
        paths = _DISPATCH[ns.command](cfg)
    except (ValueError, pd.errors.ParserError) as exc:
        print(f"randreg {ns.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"randreg {ns.command}: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
