"""Command-line front end: estimate, grid, convergence, oracle.

User data files are CSVs with samples as rows and variables as columns (the
usual statistics convention); they are transposed internally to the p x n
column-sample layout the library uses.

Exit codes are stable for scripting: 0 success, 2 malformed input or config,
3 violated domain precondition (for instance too few samples for a variant).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .linalg import (
    Gaussian,
    MixedStudent,
    ObservationMatrix,
    Student,
    SymmetricMatrix,
)
from .oracle import gaussian_beta2, student_beta2
from .shrinkage import MIN_SAMPLES, VARIANTS, estimate
from . import experiments

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DOMAIN = 3


class InputError(Exception):
    """Malformed file or config: exit code 2."""


class DomainError(Exception):
    """Valid input outside an estimator's domain: exit code 3."""


def _fmt(x: float) -> str:
    return format(x, ".17g")


# ---------------------------------------------------------------------------
# data files


def read_samples_csv(path: str) -> ObservationMatrix:
    """Read an n x p CSV of samples-as-rows and return the p x n block."""
    rows: list[list[float]] = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from exc
    with fh:
        for i, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            parsed = []
            for j, cell in enumerate(row, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise InputError(
                        f"{path}: non-numeric value {cell.strip()!r} at row {i}, column {j}"
                    ) from None
            if rows and len(parsed) != len(rows[0]):
                raise InputError(
                    f"{path}: row {i} has {len(parsed)} columns, expected {len(rows[0])}"
                )
            rows.append(parsed)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return ObservationMatrix(np.array(rows).T)


def read_sigma_csv(path: str) -> SymmetricMatrix:
    x = read_samples_csv(path)
    if x.p != x.n:
        raise InputError(f"{path}: covariance matrix must be square, got {x.n} x {x.p}")
    try:
        return SymmetricMatrix(x.data.T)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def write_matrix_csv(matrix: np.ndarray, path: str) -> None:
    with open(path, "w") as fh:
        for row in matrix:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# config files

_SECTION_KEYS = {
    "run": {"mode", "n_mc", "seed", "estimators", "out"},
    "distribution": {"kind", "nu", "nu_first", "nu_second", "mean_shift"},
    "sigma": {"mode"},
    "grid": {"p_values", "n_values"},
    "convergence": {"c", "n_values"},
}


def _int_list(text: str, where: str) -> tuple[int, ...]:
    try:
        values = tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError:
        raise InputError(f"{where}: expected a list of integers, got {text!r}") from None
    if not values:
        raise InputError(f"{where}: empty list")
    return values


def parse_config_file(path: str) -> experiments.ExperimentConfig:
    """Parse a key = value config with [section] headers into a run config."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from exc
    except configparser.Error as exc:
        raise InputError(f"{path}: {exc}") from exc

    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise InputError(f"{path}: unknown section [{section}]")
        for key in parser[section]:
            if key not in _SECTION_KEYS[section]:
                raise InputError(f"{path}: unknown key {key!r} in section [{section}]")

    def require(section: str, key: str) -> str:
        if not parser.has_option(section, key):
            raise InputError(f"{path}: missing required key {key!r} in section [{section}]")
        return parser.get(section, key)

    mode = require("run", "mode")
    if mode not in ("grid", "convergence"):
        raise InputError(f"{path}: mode must be grid or convergence, got {mode!r}")

    try:
        kind = require("distribution", "kind")
        if kind == "gaussian":
            dist = Gaussian()
        elif kind == "student":
            dist = Student(float(require("distribution", "nu")))
            if not dist.nu > 4:
                raise InputError(
                    f"{path}: student runs need nu > 4 (finite oracle scalars)"
                )
        elif kind == "mixed_student":
            dist = MixedStudent(
                float(require("distribution", "nu_first")),
                float(require("distribution", "nu_second")),
            )
        else:
            raise InputError(f"{path}: unknown distribution kind {kind!r}")

        kwargs: dict = {
            "mode": mode,
            "distribution": dist,
            "sigma_mode": parser.get("sigma", "mode", fallback="identity"),
            "mean_shift": parser.getfloat("distribution", "mean_shift", fallback=0.0),
            "n_mc": parser.getint("run", "n_mc", fallback=experiments.DEFAULT_N_MC),
            "base_seed": parser.getint("run", "seed", fallback=0),
            "out_path": parser.get("run", "out", fallback=None),
        }
        if parser.has_option("run", "estimators"):
            kwargs["estimators"] = tuple(
                tok for tok in parser.get("run", "estimators").replace(",", " ").split()
            )
        if mode == "grid":
            if parser.has_option("grid", "p_values"):
                kwargs["p_values"] = _int_list(parser.get("grid", "p_values"), f"{path}: p_values")
            if parser.has_option("grid", "n_values"):
                kwargs["n_values"] = _int_list(parser.get("grid", "n_values"), f"{path}: n_values")
        else:
            kwargs["ratio"] = float(require("convergence", "c"))
            kwargs["n_values"] = _int_list(
                require("convergence", "n_values"), f"{path}: n_values"
            )
        return experiments.ExperimentConfig(**kwargs)
    except ValueError as exc:
        # bad numeric literals and rejected config combinations alike
        raise InputError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# run manifests


@dataclass(frozen=True)
class RunManifest:
    """Sidecar of one experiment run; enough to replay it bit-for-bit.

    Timestamps and the version string describe the run that happened; the
    embedded config is what `grid`/`convergence` consume when handed a
    manifest instead of a config file.
    """

    config: experiments.ExperimentConfig
    artifact_version: str
    started_utc: str
    finished_utc: str
    outputs: dict[str, str]

    def write(self, path: str) -> None:
        body = {
            "artifact_version": self.artifact_version,
            "started_utc": self.started_utc,
            "finished_utc": self.finished_utc,
            "config": config_to_dict(self.config),
            "outputs": self.outputs,
        }
        with open(path, "w") as fh:
            json.dump(body, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read(cls, path: str) -> "RunManifest":
        try:
            with open(path) as fh:
                body = json.load(fh)
            return cls(
                config_from_dict(body["config"]),
                body["artifact_version"],
                body["started_utc"],
                body["finished_utc"],
                dict(body.get("outputs", {})),
            )
        except OSError as exc:
            raise InputError(f"cannot open {path}: {exc}") from exc
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise InputError(f"{path}: not a valid run manifest: {exc}") from exc


def config_to_dict(config: experiments.ExperimentConfig) -> dict:
    dist = config.distribution
    if isinstance(dist, Gaussian):
        dist_spec = {"kind": "gaussian"}
    elif isinstance(dist, Student):
        dist_spec = {"kind": "student", "nu": dist.nu}
    else:
        dist_spec = {"kind": "mixed_student", "nu_first": dist.nu_first, "nu_second": dist.nu_second}
    return {
        "mode": config.mode,
        "distribution": dist_spec,
        "sigma_mode": config.sigma_mode,
        "p_values": list(config.p_values),
        "n_values": list(config.n_values),
        "ratio": config.ratio,
        "n_mc": config.n_mc,
        "estimators": list(config.estimators),
        "base_seed": config.base_seed,
        "mean_shift": config.mean_shift,
        "out_path": config.out_path,
    }


def config_from_dict(spec: dict) -> experiments.ExperimentConfig:
    spec = dict(spec)
    dist_spec = spec.pop("distribution")
    kind = dist_spec["kind"]
    if kind == "gaussian":
        dist = Gaussian()
    elif kind == "student":
        dist = Student(dist_spec["nu"])
    else:
        dist = MixedStudent(dist_spec["nu_first"], dist_spec["nu_second"])
    return experiments.ExperimentConfig(
        mode=spec["mode"],
        distribution=dist,
        sigma_mode=spec["sigma_mode"],
        p_values=tuple(spec["p_values"]),
        n_values=tuple(spec["n_values"]),
        ratio=spec["ratio"],
        n_mc=spec["n_mc"],
        estimators=tuple(spec["estimators"]),
        base_seed=spec["base_seed"],
        mean_shift=spec["mean_shift"],
        out_path=spec["out_path"],
    )


def load_run_config(path: str) -> experiments.ExperimentConfig:
    """Accept either a key = value config file or a previous run's manifest."""
    if path.endswith(".json"):
        return RunManifest.read(path).config
    return parse_config_file(path)


# ---------------------------------------------------------------------------
# commands


def cmd_estimate(args) -> int:
    x = read_samples_csv(args.input)
    if x.n < MIN_SAMPLES[args.variant]:
        raise DomainError(
            f"variant {args.variant} requires at least {MIN_SAMPLES[args.variant]} samples, "
            f"got {x.n}"
        )
    result = estimate(x, args.variant)
    if args.out:
        write_matrix_csv(result.estimate.data, args.out)
    sc = result.scalars
    for key, value in (
        ("m", sc.m),
        ("d2", sc.d2),
        ("bbar2", sc.bbar2),
        ("b2_raw", sc.b2_raw),
        ("b2", sc.b2),
        ("a2", sc.a2),
        ("intensity", result.shrinkage_intensity),
    ):
        print(f"{key}={_fmt(value)}")
    return EXIT_OK


def _run_experiment(args, mode: str) -> int:
    config = load_run_config(args.config)
    if config.mode != mode:
        raise InputError(f"{args.config}: config mode is {config.mode!r}, expected {mode!r}")
    out_path = args.out or config.out_path
    if not out_path:
        raise InputError("no output path: set out in [run] or pass --out")
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    result = experiments.run(config, threads=args.threads)
    finished = datetime.datetime.now(datetime.timezone.utc).isoformat()
    records_path, pairs_path = experiments.write_csv(result, out_path)
    manifest_path = f"{out_path}.manifest.json"
    manifest = RunManifest(
        config,
        __version__,
        started,
        finished,
        {"records_csv": records_path, "pairs_csv": pairs_path},
    )
    manifest.write(manifest_path)
    print(f"wrote {records_path}, {pairs_path}, {manifest_path}")
    return EXIT_OK


def cmd_grid(args) -> int:
    return _run_experiment(args, "grid")


def cmd_convergence(args) -> int:
    return _run_experiment(args, "convergence")


def cmd_oracle(args) -> int:
    if args.sigma == "identity":
        if args.p is None:
            raise InputError("--sigma identity requires -p")
        sigma = SymmetricMatrix(np.eye(args.p))
    else:
        sigma = read_sigma_csv(args.sigma)
        if args.p is not None and args.p != sigma.p:
            raise InputError(f"-p {args.p} conflicts with {sigma.p} x {sigma.p} sigma file")
    if args.student is not None:
        if not args.student > 4:
            raise DomainError("student oracle scalars need nu > 4")
        scalars = student_beta2(sigma, args.n, args.student)
    else:
        scalars = gaussian_beta2(sigma, args.n)
    print(f"mu={_fmt(scalars.mu)}")
    print(f"alpha2={_fmt(scalars.alpha2)}")
    print(f"beta2={_fmt(scalars.beta2)}")
    print(f"delta2={_fmt(scalars.delta2)}")
    if scalars.theta2 is not None:
        print(f"theta2={_fmt(scalars.theta2)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lwshrink",
        description="Translation-invariant linear covariance shrinkage tools",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="shrink the covariance of a samples-as-rows CSV")
    est.add_argument("input", help="CSV file, one sample per row")
    est.add_argument("--variant", choices=VARIANTS, default="u")
    est.add_argument("--out", help="write the p x p estimate as CSV here")
    est.set_defaults(func=cmd_estimate)

    for name, func in (("grid", cmd_grid), ("convergence", cmd_convergence)):
        cmd = sub.add_parser(name, help=f"run a {name} experiment from a config file")
        cmd.add_argument("config", help="key = value config file, or a previous run manifest")
        cmd.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        cmd.add_argument("--out", help="override the output CSV path")
        cmd.set_defaults(func=func)

    orc = sub.add_parser("oracle", help="print analytic population scalars")
    orc.add_argument("-p", type=int, help="dimension (required with --sigma identity)")
    orc.add_argument("-n", type=int, required=True, help="sample count")
    group = orc.add_mutually_exclusive_group()
    group.add_argument("--gaussian", action="store_true", help="Gaussian population (default)")
    group.add_argument("--student", type=float, metavar="NU", help="Student population")
    orc.add_argument(
        "--sigma", default="identity", help="covariance CSV file, or 'identity' (default)"
    )
    orc.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def entrypoint() -> None:
    sys.exit(main())
