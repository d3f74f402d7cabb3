"""Command-line front end.

Subcommands ``verify``, ``campaign``, ``spectrum`` and ``formel`` emit UTF-8
JSON with sorted keys. Exit status is 0 when every check passes, 1 when a
check fails and 2 for invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .car_space import BUILTIN, Instance, random_instance
from .errors import FockDimensionError, IllConditionedWarning, InvalidSpace, NotGeneric
from .fock_rep import MAX_ONE_PARTICLE_DIM, FockSpace
from .modular_lab import generic_core
from .pair_geometry import analyze_pair
from .suite import DEFAULT_TOLERANCES, FAIL, PASS, formel_deviation, round_sig, run_suite

MODES = ("verify", "campaign", "spectrum", "formel")
CONFIG_KEYS = {"mode", "instance", "seed", "dim", "seeds", "count", "tolerances", "output_path", "n_max", "jobs"}


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    mode: str
    instance: object = None
    seed: int = 0
    dim: int = 4
    seeds: list = field(default_factory=list)
    count: int = 10
    tolerances: dict = field(default_factory=dict)
    output_path: str | None = None
    n_max: int = 4
    jobs: int = 1

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.dim < 2 or self.dim % 2:
            raise ConfigError(f"dim must be even and at least 2, got {self.dim}")
        if self.dim // 2 > MAX_ONE_PARTICLE_DIM:
            raise ConfigError(f"dim {self.dim} gives Fock dimension 2^{self.dim // 2}, above the cap 2^{MAX_ONE_PARTICLE_DIM}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance groups {sorted(unknown)}")
        if any(not (isinstance(v, (int, float)) and v > 0) for v in self.tolerances.values()):
            raise ConfigError("tolerances must be positive numbers")
        if self.n_max < 0 or self.count < 0 or self.jobs < 1 or self.seed < 0:
            raise ConfigError("n_max, count and seed must be non-negative and jobs positive")

    def echo(self) -> dict:
        inst = self.instance
        if isinstance(inst, dict):
            inst = {"inline": True, "name": inst.get("name", "inline")}
        return {
            "mode": self.mode,
            "instance": inst,
            "seed": self.seed,
            "dim": self.dim,
            "seeds": self.campaign_seeds() if self.mode == "campaign" else None,
            "tolerances": {**DEFAULT_TOLERANCES, **self.tolerances},
            "n_max": self.n_max,
        }

    def campaign_seeds(self) -> list[int]:
        return sorted(self.seeds) if self.seeds else list(range(self.seed, self.seed + self.count))


def load_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        mode = data.get("mode", args.command)
        if mode in ("random-campaign", "formel-check"):
            mode = {"random-campaign": "campaign", "formel-check": "formel"}[mode]
        if mode != args.command:
            raise ConfigError(f"config mode {mode!r} does not match subcommand {args.command!r}")
    cfg = RunConfig(mode=args.command)
    for key in ("instance", "seed", "dim", "seeds", "count", "tolerances", "output_path", "n_max", "jobs"):
        if key in data:
            setattr(cfg, key, data[key])
    for key, attr in (("seed", "seed"), ("dim", "dim"), ("out", "output_path"), ("jobs", "jobs"), ("instance", "instance")):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, attr, val)
    for key in ("count", "n_max"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if args.tol is not None:
        if args.tol <= 0:
            raise ConfigError("--tol must be positive")
        cfg.tolerances = {k: args.tol for k in DEFAULT_TOLERANCES}
    if cfg.mode != "campaign" and cfg.instance is None and args.seed is None and "seed" not in data:
        cfg.instance = "E1"
    cfg.validate()
    return cfg


def build_instance(cfg: RunConfig) -> Instance:
    source = cfg.instance
    if source is None:
        return random_instance(cfg.dim, cfg.seed, name=f"random-{cfg.dim}-{cfg.seed}")
    if isinstance(source, str):
        if source not in BUILTIN:
            raise ConfigError(f"unknown built-in instance {source!r}; expected one of {sorted(BUILTIN)}")
        inst = BUILTIN[source]()
    elif isinstance(source, dict) and "seed" in source and "P" not in source:
        inst = random_instance(int(source.get("dim", cfg.dim)), int(source["seed"]))
    elif isinstance(source, dict):
        try:
            inst = Instance.from_dict(source, name=source.get("name", "inline"))
        except (KeyError, TypeError, ValueError, InvalidSpace) as exc:
            raise ConfigError(f"invalid inline instance: {exc}") from exc
    else:
        raise ConfigError("instance must be a built-in name or an object")
    if inst.dim // 2 > MAX_ONE_PARTICLE_DIM:
        raise ConfigError(f"instance gives Fock dimension 2^{inst.dim // 2}, above the cap")
    return inst


def versions() -> dict:
    try:
        pkg = version("artifact")
    except PackageNotFoundError:
        pkg = "unknown"
    return {"carduality": pkg, "numpy": np.__version__}


def cmd_verify(cfg: RunConfig) -> dict:
    inst = build_instance(cfg)
    result = run_suite(inst, cfg.tolerances, cfg.seed, cfg.n_max)
    return {"config": cfg.echo(), **result}


def _campaign_one(args) -> dict:
    seed, dim, tolerances, n_max = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        inst = random_instance(dim, seed, name=f"random-{dim}-{seed}")
        res = run_suite(inst, tolerances, seed, n_max)
    return {
        "seed": seed,
        "verdict": res["verdict"],
        "ill_conditioned": res["conditioning"]["ill_conditioned"],
        "condition_number": res["conditioning"]["condition_number"],
        "failed_checks": sorted(c["name"] for c in res["checks"] if c["verdict"] == FAIL),
        "defects": {c["name"]: c["defect"] for c in res["checks"] if c["defect"] is not None},
    }


def cmd_random_campaign(cfg: RunConfig) -> dict:
    seeds = cfg.campaign_seeds()
    work = [(s, cfg.dim, cfg.tolerances, cfg.n_max) for s in seeds]
    if cfg.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_campaign_one, work))
    else:
        results = [_campaign_one(w) for w in work]
    results.sort(key=lambda r: r["seed"])
    counted = [r for r in results if not r["ill_conditioned"]]
    worst: dict[str, float] = {}
    for r in counted:
        for name, d in r.pop("defects").items():
            worst[name] = max(worst.get(name, 0.0), d)
    for r in results:
        r.pop("defects", None)
    passed = sum(r["verdict"] == PASS for r in counted)
    return {
        "config": cfg.echo(),
        "instances": results,
        "ill_conditioned_seeds": [r["seed"] for r in results if r["ill_conditioned"]],
        "counted": len(counted),
        "pass_rate": round_sig(passed / len(counted)) if counted else None,
        "worst_defects": worst,
        "verdict": PASS if passed == len(counted) else FAIL,
    }


def cmd_spectrum(cfg: RunConfig) -> dict:
    inst = build_instance(cfg)
    note = None
    try:
        core = inst
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IllConditionedWarning)
            geo = analyze_pair(core.P, core.q)
    except NotGeneric:
        try:
            core = generic_core(inst)
        except NotGeneric as exc:
            raise ConfigError("instance has no generic-position part") from exc
        note = "generic part h1"
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IllConditionedWarning)
            geo = analyze_pair(core.P, core.q)
    spec = geo.spectrum()
    return {
        "config": cfg.echo(),
        "instance": inst.name,
        "restricted_to": note,
        "delta": round_sig(spec["delta"], 12),
        "eigenvalues_of_delta_p": [round_sig(x, 12) for x in spec["eigenvalues_of_delta_p"]],
        "condition_number": round_sig(spec["condition_number"], 12),
        "verdict": PASS,
    }


def cmd_formel_check(cfg: RunConfig) -> dict:
    inst = build_instance(cfg)
    F = FockSpace.over(inst.P)
    rng = np.random.default_rng(cfg.seed)
    tol = cfg.tolerances.get("formel", DEFAULT_TOLERANCES["formel"])
    per_n = {str(n): round_sig(formel_deviation(F, inst.dim, n, rng)) for n in range(cfg.n_max + 1)}
    worst = max(per_n.values()) if per_n else 0.0
    return {
        "config": cfg.echo(),
        "instance": inst.name,
        "max_deviation_per_n": per_n,
        "max_deviation": worst,
        "tolerance": tol,
        "verdict": PASS if worst <= tol else FAIL,
    }


COMMANDS = {"verify": cmd_verify, "campaign": cmd_random_campaign, "spectrum": cmd_spectrum, "formel": cmd_formel_check}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carduality", description="Numerical checks for twisted duality of CAR algebras.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("verify", "run the full suite on one instance"),
        ("campaign", "run the suite on seeded random instances"),
        ("spectrum", "dump δ and the spectrum of the one-particle modular operator"),
        ("formel", "compare the pairing expansion with operator products"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--instance", help="built-in instance name (E1, E2, E3)")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--dim", type=int, help="dimension of h (even)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--tol", type=float, help="override every tolerance")
        p.add_argument("--jobs", type=int, help="worker processes for campaigns")
        p.add_argument("--timing", action="store_true", help="record wall-clock time in the report")
        if name == "campaign":
            p.add_argument("--count", type=int, help="number of seeds starting at --seed")
        if name in ("verify", "formel", "campaign"):
            p.add_argument("--n-max", dest="n_max", type=int, help="largest number of generators in the pairing check")
    return parser


def dump(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        start = time.perf_counter()
        report = COMMANDS[cfg.mode](cfg)
    except (ConfigError, FockDimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report["timing"] = {"seconds": round(time.perf_counter() - start, 3)} if args.timing else None
    report["versions"] = versions()
    text = dump(report)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.get("verdict") == PASS else 1


if __name__ == "__main__":
    sys.exit(main())
