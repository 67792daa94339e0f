"""Seeded experiment harness: parameter grids, trial execution, CSV output.

Every trial owns an independent generator derived from (seed, grid index,
trial index), so identical configurations reproduce byte-identical result
files apart from the wall_time column.
"""
from __future__ import annotations

import csv
import hashlib
import itertools
import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from . import __version__
from .agnostic import LazyMdlConstants, run_lazy_hedge_mdl
from .env import Environment
from .gf2 import LinearClass
from .hedge import regret_certificate, trajectory_sum_max
from .instances import (build_difficulty_spec, default_ambient_dim,
                        gen_planted_mdl, random_linear_subclass)
from .realizable import run_tradeoff_mdl
from .simplex_opt import (ADVERSARIAL_KINDS, REGIONS, lazy_hedge_maximize,
                          make_adversarial)

SUITES = ("realizable", "agnostic", "oods")

ROW_COLUMNS = {
    "realizable": [
        "suite", "grid_index", "trial", "seed", "k", "r", "eps", "delta",
        "samples_total", "samples_per_dist", "rounds_used", "max_pop_error",
        "per_dist_errors", "success", "config_hash", "wall_time",
    ],
    "agnostic": [
        "suite", "grid_index", "trial", "seed", "k", "d_proxy", "eps", "C",
        "region", "T", "rounds", "samples_total", "samples_per_dist",
        "rounds_used", "opt", "max_err", "excess", "success", "config_hash",
        "wall_time",
    ],
    "oods": [
        "suite", "grid_index", "trial", "seed", "k", "m", "kind", "region",
        "C", "eps", "rounds", "overhead", "f_hat", "f_star", "slack",
        "trajectory_sum_max", "regret_slack", "config_hash", "wall_time",
    ],
}

_DEFAULT_GRIDS = {
    "realizable": {"k": [8], "r": [1, 2, 3], "eps": [0.1], "delta": [0.1]},
    "agnostic": {"k": [8], "eps": [0.2], "C": [2.0], "region": list(REGIONS)},
    "oods": {"k": [64], "m": [4], "kind": list(ADVERSARIAL_KINDS),
             "region": list(REGIONS), "C": [2.0], "eps": [0.05]},
}

_DEFAULT_INSTANCE = {
    "realizable": {"d0": 16, "diff_levels": 0, "d": 0},
    "agnostic": {"d0": 8, "diff_levels": 0, "d": 0, "class_size": 64},
    "oods": {},
}


class TrialError(RuntimeError):
    """Carries the grid point and seed of the failing trial."""


@dataclass
class ExperimentConfig:
    suite: str
    grid: dict
    instance: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    trials: int = 1
    seed: int = 0
    out: Optional[str] = None
    trace: Optional[str] = None

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"suite must be one of {SUITES}, got {self.suite!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.grid or any(len(v) == 0 for v in self.grid.values()):
            raise ValueError("grid must be nonempty")

    @classmethod
    def defaults(cls, suite: str, **overrides) -> "ExperimentConfig":
        cfg = {
            "suite": suite,
            "grid": dict(_DEFAULT_GRIDS[suite]),
            "instance": dict(_DEFAULT_INSTANCE[suite]),
            "constants": {},
            "trials": 3,
            "seed": 20260808,
        }
        cfg.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**cfg)

    @classmethod
    def from_toml(cls, path: str) -> "ExperimentConfig":
        with open(path, "rb") as f:
            obj = tomllib.load(f)
        exp = obj.get("experiment", {})
        return cls(
            suite=exp["suite"],
            grid={k: (v if isinstance(v, list) else [v])
                  for k, v in obj.get("grid", {}).items()},
            instance=obj.get("instance", {}),
            constants=obj.get("constants", {}),
            trials=exp.get("trials", 1),
            seed=exp.get("seed", 0),
            out=exp.get("out"),
            trace=exp.get("trace"),
        )

    def canonical(self) -> dict:
        return {
            "suite": self.suite,
            "grid": {k: list(v) for k, v in sorted(self.grid.items())},
            "instance": dict(sorted(self.instance.items())),
            "constants": dict(sorted(self.constants.items())),
            "trials": self.trials,
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def grid_points(self) -> list:
        keys = sorted(self.grid.keys())
        return [dict(zip(keys, combo))
                for combo in itertools.product(*(self.grid[k] for k in keys))]


def trial_rng(seed: int, grid_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, grid_index, trial]))


def _planted_env(point_k: int, instance: dict, rng: np.random.Generator):
    d0 = int(instance.get("d0", 16))
    levels = int(instance.get("diff_levels", 0)) or max(1, int(math.log2(point_k)))
    spec = build_difficulty_spec(point_k, levels, d0)
    d = int(instance.get("d", 0)) or default_ambient_dim(d0, point_k)
    inst = gen_planted_mdl(d, spec, rng)
    return inst, Environment(inst.dists)


def _run_realizable(point: dict, cfg: ExperimentConfig, rng) -> dict:
    inst, env = _planted_env(point["k"], cfg.instance, rng)
    hyps = LinearClass(inst.d)
    _, report = run_tradeoff_mdl(
        env, hyps, r=point["r"], eps=point["eps"], delta=point["delta"], rng=rng,
        c_m=cfg.constants.get("c_m", 4.0),
        log_base=cfg.constants.get("log_base", 2.0),
        mode=cfg.constants.get("learner_mode", "erm"),
        bags=cfg.constants.get("bags", 21),
    )
    return {
        "k": point["k"], "r": point["r"], "eps": point["eps"],
        "delta": point["delta"], "samples_total": report["samples_total"],
        "samples_per_dist": json.dumps(report["samples_per_dist"]),
        "rounds_used": report["rounds_used"],
        "max_pop_error": report["max_pop_error"],
        "per_dist_errors": json.dumps(report["per_dist_errors"]),
        "success": report["success"],
    }


def _run_agnostic(point: dict, cfg: ExperimentConfig, rng) -> tuple:
    inst, env = _planted_env(point["k"], cfg.instance, rng)
    size = int(cfg.instance.get("class_size", 64))
    hyps = random_linear_subclass(inst.d, size, rng, include=inst.hstar)
    constants = LazyMdlConstants(
        n_erm_coeff=cfg.constants.get("n_erm_coeff", 1.0),
        n_rwd_coeff=cfg.constants.get("n_rwd_coeff", 4.0),
        c_T=cfg.constants.get("c_T", 4.0),
        c_eta=cfg.constants.get("c_eta", 1.0),
        delta=cfg.constants.get("delta", 0.1),
    )
    _, report = run_lazy_hedge_mdl(env, hyps, eps=point["eps"], C=point["C"],
                                   kind=point["region"], rng=rng,
                                   constants=constants)
    factor = cfg.constants.get("excess_factor", 3.0)
    row = {
        "k": point["k"], "d_proxy": report["d_proxy"], "eps": point["eps"],
        "C": point["C"], "region": point["region"], "T": report["T"],
        "rounds": report["rounds"], "samples_total": report["samples_total"],
        "samples_per_dist": json.dumps(report["samples_per_dist"]),
        "rounds_used": report["rounds_used"], "opt": report["opt"],
        "max_err": report["max_err"], "excess": report["excess"],
        "success": report["excess"] <= factor * point["eps"],
    }
    return row, report["history"]


def _run_oods(point: dict, cfg: ExperimentConfig, rng) -> tuple:
    inst = make_adversarial(point["kind"], point["k"], point["m"], rng)
    res = lazy_hedge_maximize(
        inst, k=point["k"], eps=point["eps"], C=point["C"], kind=point["region"],
        rng=rng, c_T=cfg.constants.get("c_T", 4.0),
        c_eta=cfg.constants.get("c_eta", 1.0),
    )
    f_hat = inst.value(res.w_hat)
    row = {
        "k": point["k"], "m": point["m"], "kind": point["kind"],
        "region": point["region"], "C": point["C"], "eps": point["eps"],
        "rounds": res.rounds, "overhead": res.overhead, "f_hat": f_hat,
        "f_star": inst.f_star, "slack": inst.f_star - f_hat,
        "trajectory_sum_max": res.trajectory_sum_max,
        "regret_slack": regret_certificate(res.history),
    }
    return row, res.history


_RUNNERS: dict = {}


def run_experiment(config: ExperimentConfig, echo: Optional[Callable] = None) -> list:
    """Execute trials x grid points deterministically; returns the rows.

    Rows are written incrementally when config.out is set; a sidecar
    .meta.json carries the config hash and package version.
    """
    rows = []
    chash = config.config_hash()
    writer = _RowWriter(config) if config.out else None
    try:
        for gi, point in enumerate(config.grid_points()):
            for ti in range(config.trials):
                rng = trial_rng(config.seed, gi, ti)
                t0 = time.perf_counter()
                try:
                    if config.suite == "realizable":
                        payload, history = _run_realizable(point, config, rng), None
                    elif config.suite == "agnostic":
                        payload, history = _run_agnostic(point, config, rng)
                    else:
                        payload, history = _run_oods(point, config, rng)
                except Exception as exc:
                    raise TrialError(
                        f"trial failed at grid point {point} (grid_index={gi}, "
                        f"trial={ti}, seed={config.seed}): {exc}") from exc
                row = {"suite": config.suite, "grid_index": gi, "trial": ti,
                       "seed": config.seed, **payload, "config_hash": chash,
                       "wall_time": round(time.perf_counter() - t0, 6)}
                rows.append(row)
                if writer:
                    writer.write(row)
                if history is not None and config.trace:
                    _dump_trace(config, gi, ti, history)
                if echo:
                    echo(row)
    finally:
        if writer:
            writer.close(len(rows))
    return rows


def _dump_trace(config: ExperimentConfig, gi: int, ti: int, history):
    os.makedirs(config.trace, exist_ok=True)
    path = os.path.join(config.trace, f"{config.suite}_{gi}_{ti}.json")
    with open(path, "w") as f:
        json.dump(history.to_json_dict(), f)


class _RowWriter:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.columns = ROW_COLUMNS[config.suite]
        out_dir = os.path.dirname(config.out)
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
        self.fh = open(config.out, "w", newline="")
        self.writer = csv.DictWriter(self.fh, fieldnames=self.columns)
        self.writer.writeheader()
        self.fh.flush()

    def write(self, row: dict):
        self.writer.writerow({c: _fmt(row.get(c)) for c in self.columns})
        self.fh.flush()

    def close(self, n_rows: int):
        self.fh.close()
        meta = {
            "config_hash": self.config.config_hash(),
            "version": __version__,
            "suite": self.config.suite,
            "columns": self.columns,
            "n_rows": n_rows,
            "config": self.config.canonical(),
        }
        with open(self.config.out + ".meta.json", "w") as f:
            json.dump(meta, f, indent=2, sort_keys=True)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def summarize(rows: Sequence[dict]) -> list:
    """One aggregate line per grid point: mean/std of samples and rounds plus
    the success rate, where the suite's rows carry those fields."""
    if not rows:
        raise ValueError("no rows to summarize")
    groups: dict = {}
    for row in rows:
        groups.setdefault(row["grid_index"], []).append(row)
    out = []
    for gi in sorted(groups):
        grp = groups[gi]
        agg = {"grid_index": gi, "n": len(grp)}
        for key in ("samples_total", "rounds_used", "rounds", "overhead",
                    "max_pop_error", "max_err", "excess", "slack"):
            vals = [float(r[key]) for r in grp if key in r]
            if vals:
                agg[f"mean_{key}"] = float(np.mean(vals))
                agg[f"std_{key}"] = float(np.std(vals))
        flags = [r["success"] for r in grp if "success" in r]
        if flags:
            agg["success_rate"] = float(np.mean([1.0 if f else 0.0 for f in flags]))
        out.append(agg)
    return out


def _coerce(value: str):
    if value in ("true", "false"):
        return value == "true"
    for cast in (int, float):
        try:
            return cast(value)
        except (TypeError, ValueError):
            continue
    return value


def read_rows(path: str) -> list:
    """Read a result CSV back with cell types restored (bools, ints, floats)."""
    with open(path, newline="") as f:
        return [{k: _coerce(v) for k, v in row.items()}
                for row in csv.DictReader(f)]
