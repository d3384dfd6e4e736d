"""Command-line front end.

Commands:
  gaussian-duncan   Monte Carlo directed information for the constant Gaussian
                    signal against the closed form 0.5*ln(1+T).
  poisson-rate      Monte Carlo feedback-rate sweep over binary input weights
                    against the analytic rate.
  poisson-capacity  Optimized binary rate as a function of the second level.
  di-discrete       Property sweeps of the exact discrete engine
                    (conservation, sandwich, grouping monotonicity, no-feedback).

Configuration is a flat key=value file with comma-separated lists; every key
can also be set by a flag of the same name (flag wins).  All commands write a
CSV (or report) plus a manifest echoing the resolved configuration, and runs
are byte-reproducible given the same seed.  Exit status: 0 on pass, 1 when a
scientific tolerance is violated, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import binary_rate, capacity_curve
from .core import FinitePmf, RngSpec
from .gaussian import closed_form_di_constant_signal, constant_signal_model, directed_info_gaussian_mc
from .partition_di import (
    Grouping,
    conservation_residual,
    directed_info,
    grouped_directed_info,
    mutual_information,
    random_joint,
    random_no_feedback_joint,
)
from .poisson import PoissonFeedbackModel, di_rate_mc

__all__ = ["main", "ExperimentConfig", "cmd_gaussian_duncan", "cmd_poisson_rate",
           "cmd_poisson_capacity", "cmd_di_discrete"]


class CliError(Exception):
    """Bad usage or configuration; maps to exit status 2."""


def _parse_float_list(text):
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise CliError(f"cannot parse list value {text!r}") from exc


def _parse_float(text):
    try:
        return float(text)
    except ValueError as exc:
        raise CliError(f"cannot parse number {text!r}") from exc


def _parse_int(text):
    try:
        return int(str(text), 10)
    except ValueError as exc:
        raise CliError(f"cannot parse integer {text!r}") from exc


# per-command parameter schemas: key -> (parser, default)
SCHEMAS = {
    "gaussian-duncan": {
        "t_values": (_parse_float_list, [0.5, 1.0, 2.0]),
        "dt": (_parse_float, 1e-3),
        "replicas": (_parse_int, 100_000),
    },
    "poisson-rate": {
        "lambda1": (_parse_float, 1.0),
        "lambda2": (_parse_float, 2.0),
        "p_values": (_parse_float_list, [round(0.1 * k, 1) for k in range(1, 10)]),
        "horizon": (_parse_float, 1e4),
        "replicas": (_parse_int, 6),
    },
    "poisson-capacity": {
        "lambda1": (_parse_float, 1.0),
        "lambda2_values": (_parse_float_list, [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]),
        "tol": (_parse_float, 1e-6),
    },
    "di-discrete": {
        "instances": (_parse_int, 1000),
        "chains": (_parse_int, 200),
        "max_n": (_parse_int, 3),
        "max_alphabet": (_parse_int, 3),
    },
}

# the knob --replicas steers, per command
_REPLICA_KEY = {
    "gaussian-duncan": "replicas",
    "poisson-rate": "replicas",
    "poisson-capacity": None,
    "di-discrete": "instances",
}


@dataclass
class ExperimentConfig:
    """Fully resolved run description: parameters plus seed, output dir, and jobs."""

    command: str
    params: dict
    seed: int
    out_dir: Path
    jobs: int

    def manifest(self, wall_clock: float, started: str) -> dict:
        return {
            "command": self.command,
            "version": __version__,
            "config": {
                **{k: self.params[k] for k in sorted(self.params)},
                "seed": self.seed,
                "out": str(self.out_dir),
                "jobs": self.jobs,
            },
            "started_utc": started,
            "wall_clock_seconds": wall_clock,
        }


def _load_config_file(path: str) -> dict:
    text = Path(path).read_text()
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _resolve_config(command: str, args: argparse.Namespace) -> ExperimentConfig:
    schema = SCHEMAS[command]
    raw = {}
    if args.config:
        raw.update(_load_config_file(args.config))
    unknown = set(raw) - set(schema)
    if unknown:
        raise CliError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
    params = {}
    for key, (parse, default) in schema.items():
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            params[key] = parse(flag_val)
        elif key in raw:
            params[key] = parse(raw[key])
        else:
            params[key] = default
    rk = _REPLICA_KEY[command]
    if args.replicas is not None:
        if rk is None:
            raise CliError(f"{command} has no replication knob for --replicas")
        params[rk] = _parse_int(args.replicas)
    jobs = args.jobs if args.jobs is not None else os.environ.get("CTDI_JOBS", "1")
    return ExperimentConfig(
        command=command,
        params=params,
        seed=_parse_int(args.seed) if args.seed is not None else 0,
        out_dir=Path(args.out) if args.out else Path.cwd(),
        jobs=max(1, _parse_int(jobs)),
    )


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _finish(cfg: ExperimentConfig, started_iso: str, t0: float) -> None:
    manifest = cfg.manifest(wall_clock=time.perf_counter() - t0, started=started_iso)
    path = cfg.out_dir / f"{cfg.command.replace('-', '_')}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def cmd_gaussian_duncan(cfg: ExperimentConfig) -> int:
    rows = []
    ok = True
    for horizon in cfg.params["t_values"]:
        closed = closed_form_di_constant_signal(horizon)
        if horizon == 0.0:
            est_value, est_err = 0.0, 0.0
        else:
            model = constant_signal_model(horizon, cfg.params["dt"])
            est = directed_info_gaussian_mc(model, RngSpec(cfg.seed), cfg.params["replicas"],
                                            jobs=cfg.jobs)
            est_value, est_err = est.value, est.stderr
        abs_error = abs(est_value - closed)
        ok = ok and abs_error <= max(0.01 * closed, 3.0 * est_err)
        rows.append((horizon, est_value, est_err, closed, abs_error))
    _write_csv(cfg.out_dir / "gaussian_duncan.csv",
               ["T", "mc_di", "stderr", "closed_form", "abs_error"], rows)
    return 0 if ok else 1


def cmd_poisson_rate(cfg: ExperimentConfig) -> int:
    lam1, lam2 = cfg.params["lambda1"], cfg.params["lambda2"]
    rows = []
    ok = True
    for p in cfg.params["p_values"]:
        analytic = binary_rate(p, lam1, lam2)
        pmf = FinitePmf(np.array([lam1, lam2]), np.array([p, 1.0 - p]))
        model = PoissonFeedbackModel(pmf, cfg.params["horizon"])
        est = di_rate_mc(model, RngSpec(cfg.seed), replicas=cfg.params["replicas"],
                         jobs=cfg.jobs)
        ok = ok and abs(est.value - analytic) <= max(0.02 * analytic, 3.0 * est.stderr)
        rows.append((p, analytic, est.value, est.stderr))
    _write_csv(cfg.out_dir / "poisson_rate.csv", ["p", "analytic", "mc", "stderr"], rows)
    return 0 if ok else 1


def cmd_poisson_capacity(cfg: ExperimentConfig) -> int:
    lam1 = cfg.params["lambda1"]
    points = capacity_curve(lam1, cfg.params["lambda2_values"], tol=cfg.params["tol"])
    rows = [(pt.lambda2, pt.p_star, pt.rate_star) for pt in points]
    ok = all(pt.rate_star <= 1e-12 for pt in points if pt.lambda2 in (0.0, lam1))
    _write_csv(cfg.out_dir / "poisson_capacity.csv", ["lambda2", "p_star", "rate_star"], rows)
    return 0 if ok else 1


def _random_sizes(gen, max_n, max_alphabet):
    n = int(gen.integers(1, max_n + 1))
    xs = tuple(int(s) for s in gen.integers(2, max_alphabet + 1, size=n))
    ys = tuple(int(s) for s in gen.integers(2, max_alphabet + 1, size=n))
    return xs, ys


def cmd_di_discrete(cfg: ExperimentConfig) -> int:
    spec = RngSpec(cfg.seed)
    instances = cfg.params["instances"]
    chains = cfg.params["chains"]
    max_n = cfg.params["max_n"]
    max_alphabet = cfg.params["max_alphabet"]
    lines = []
    violation = None

    gen = spec.stream(0)
    max_resid = 0.0
    max_di_neg = 0.0
    max_di_minus_mi = -np.inf
    for i in range(instances):
        joint = random_joint(gen, *_random_sizes(gen, max_n, max_alphabet))
        resid = abs(conservation_residual(joint))
        di = directed_info(joint)
        mi = mutual_information(joint)
        max_resid = max(max_resid, resid)
        max_di_neg = max(max_di_neg, -di)
        max_di_minus_mi = max(max_di_minus_mi, di - mi)
        if violation is None and (resid >= 1e-9 or di < -1e-12 or di - mi > 1e-12):
            violation = ("conservation/sandwich", i, joint)
    lines.append(f"conservation: {instances} instances, max |residual| = {max_resid:.3e} (tolerance 1e-09)")
    lines.append(f"sandwich: max(-di) = {max_di_neg:.3e}, max(di - mi) = {max_di_minus_mi:.3e} (tolerance 1e-12)")

    gen = spec.stream(1)
    max_increase = -np.inf
    for i in range(chains):
        n = 4
        xs = tuple(int(s) for s in gen.integers(2, max_alphabet + 1, size=n))
        ys = tuple(int(s) for s in gen.integers(2, max_alphabet + 1, size=n))
        joint = random_joint(gen, xs, ys)
        cuts = [1, 2, 3]
        gen.shuffle(cuts)
        ends = [n]
        chain = [Grouping(tuple(sorted(ends)))]
        for cut in cuts:
            ends.append(cut)
            chain.append(Grouping(tuple(sorted(ends))))
        vals = [grouped_directed_info(joint, g) for g in chain]
        mi = mutual_information(joint)
        if abs(vals[0] - mi) > 1e-10:
            violation = violation or ("grouping one-block vs mi", i, joint)
        for a, b in zip(vals, vals[1:]):
            max_increase = max(max_increase, b - a)
            if violation is None and b - a > 1e-12:
                violation = ("grouping monotonicity", i, joint)
    lines.append(f"grouping monotonicity: {chains} chains of length 4, max increase under refinement = {max_increase:.3e} (tolerance 1e-12)")

    gen = spec.stream(2)
    nfb = max(1, instances // 5)
    max_gap = 0.0
    for i in range(nfb):
        joint = random_no_feedback_joint(gen, *_random_sizes(gen, max_n, max_alphabet))
        gap = abs(directed_info(joint) - mutual_information(joint))
        max_gap = max(max_gap, gap)
        if violation is None and gap >= 1e-9:
            violation = ("no-feedback di == mi", i, joint)
    lines.append(f"no-feedback: {nfb} instances, max |di - mi| = {max_gap:.3e} (tolerance 1e-09)")

    ok = violation is None
    lines.append("result: " + ("PASS" if ok else f"FAIL ({violation[0]}, instance {violation[1]})"))
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    (cfg.out_dir / "di_discrete_report.txt").write_text(report)
    if violation is not None:
        (cfg.out_dir / "di_discrete_violation.json").write_text(
            json.dumps({"suite": violation[0], "instance": violation[1],
                        "joint": json.loads(violation[2].to_json())}, indent=2) + "\n")
    return 0 if ok else 1


_RUNNERS = {
    "gaussian-duncan": cmd_gaussian_duncan,
    "poisson-rate": cmd_poisson_rate,
    "poisson-capacity": cmd_poisson_capacity,
    "di-discrete": cmd_di_discrete,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctdi", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    reserved = {"config", "seed", "out", "replicas", "jobs"}
    for command, schema in SCHEMAS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", help="flat key=value parameter file")
        p.add_argument("--seed", help="master seed (default 0)")
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--replicas", help="replication count override")
        p.add_argument("--jobs", help="worker processes (default: CTDI_JOBS or 1)")
        for key in schema:
            if key in reserved:
                # --replicas doubles as the schema key of the same name
                continue
            p.add_argument(f"--{key.replace('_', '-')}", dest=key,
                           help=f"override config key {key}")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        return 2 if code != 0 else 0
    try:
        cfg = _resolve_config(args.command, args)
        if not cfg.out_dir.exists():
            cfg.out_dir.mkdir(parents=True)
        started = datetime.datetime.now(datetime.timezone.utc).isoformat()
        t0 = time.perf_counter()
        status = _RUNNERS[args.command](cfg)
        _finish(cfg, started, t0)
        return status
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
