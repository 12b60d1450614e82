"""Command-line front end: ingestion, estimation, divergences, simulation,
and a one-command verification of the built-in reference example.

Reports are JSON with sorted keys and floats fixed at 17 significant digits
(override with the ALPHAFAM_FLOAT_DIGITS environment variable), so identical
config + input + seed produce byte-identical output.  Draws are emitted as
CSV.  Exit codes: 0 success, 1 verification failure, 2 invalid config,
10 unreadable input, 11 ragged rows, 12 non-numeric cells, 13 empty input,
20 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    AlphaFamilyError,
    DimensionMismatchError,
    NumericalError,
    ParameterError,
    SampleBatch,
    UnsupportedConfigError,
    make_student_t,
    pack_theta,
)
from . import compact, divergence, estimators, studentt

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID_CONFIG = 2
EXIT_UNREADABLE = 10
EXIT_RAGGED = 11
EXIT_NON_NUMERIC = 12
EXIT_EMPTY = 13
EXIT_NUMERICAL = 20

COMMANDS = ("estimate", "compact-fit", "divergence", "loglik", "simulate", "verify-paper-example")

# Expected values for the verify subcommand: per-segment maximizers of the
# reference sample in breakpoint order, and the objective multiset in N2
# units.
_VERIFY_MAXIMIZERS = (
    2.46, 3.76, 4.76, 5.57, 6.1, 6.46, 6.56, 6.66, 6.76,
    6.84,
    6.94, 8.15, 8.46, 9.24, 10.44, 10.84, 10.94, 11.04, 11.14,
)
_VERIFY_OBJECTIVES = (
    0.08, 1.68, 2.69, 3.21, 3.11, 3.07, 3.15, 3.3, 3.5,
    3.7,
    4.02, 6.37, 6.42, 5.57, 2.3, 0.82, 0.5, 0.25, 0.084,
)
_VERIFY_MU_HAT = 8.46
_VERIFY_OBJECTIVE = 6.42
_VERIFY_SAMPLE_MEAN = 7.45


class IngestError(AlphaFamilyError):
    """CSV ingestion failure carrying its CLI exit code."""

    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation; unset fields stay None and are validated per command."""

    command: str
    alpha: Optional[float] = None
    input_path: Optional[str] = None
    output_path: str = "-"
    seed: int = 0
    format: str = "json"
    quadrature_tol: float = 1e-10
    n: Optional[int] = None
    mu: Optional[str] = None
    sigma: Optional[str] = None
    dist_p: Optional[str] = None
    dist_q: Optional[str] = None


def _float_digits() -> int:
    return int(os.environ.get("ALPHAFAM_FLOAT_DIGITS", "17"))


def _format_float(value: float, digits: int) -> str:
    if math.isnan(value):
        return "NaN"
    if value == math.inf:
        return "Infinity"
    if value == -math.inf:
        return "-Infinity"
    return format(value, f".{digits}g")


def dumps_report(obj) -> str:
    """Deterministic JSON: sorted keys, fixed float precision."""
    digits = _float_digits()

    def render(node) -> str:
        if isinstance(node, dict):
            items = (f"{json.dumps(str(k))}:{render(node[k])}" for k in sorted(node))
            return "{" + ",".join(items) + "}"
        if isinstance(node, (list, tuple)) or isinstance(node, np.ndarray):
            return "[" + ",".join(render(v) for v in list(node)) + "]"
        if isinstance(node, bool) or isinstance(node, np.bool_):
            return "true" if node else "false"
        if isinstance(node, (int, np.integer)):
            return str(int(node))
        if isinstance(node, (float, np.floating)):
            return _format_float(float(node), digits)
        if node is None:
            return "null"
        if isinstance(node, str):
            return json.dumps(node)
        raise TypeError(f"cannot serialize {type(node)!r}")

    return render(obj) + "\n"


def ingest_csv(path: str) -> SampleBatch:
    """Read a UTF-8 CSV of observations, one row per observation.

    A single non-numeric first row is treated as a header.  Ragged rows,
    non-numeric (or non-finite) cells, and inputs without data rows are
    rejected with distinct exit codes.
    """
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = [row for row in csv.reader(handle)]
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(EXIT_UNREADABLE, f"cannot read {path}: {exc}") from exc

    rows = [[cell.strip() for cell in row] for row in rows]
    rows = [row for row in rows if any(cell != "" for cell in row)]
    if not rows:
        raise IngestError(EXIT_EMPTY, f"{path} contains no data rows")

    def parse_row(row):
        return [float(cell) for cell in row]

    start = 0
    try:
        parse_row(rows[0])
    except ValueError:
        start = 1
    if start == len(rows):
        raise IngestError(EXIT_EMPTY, f"{path} contains a header but no data rows")

    width = len(rows[start])
    data = []
    for idx, row in enumerate(rows[start:], start=start + 1):
        if len(row) != width:
            raise IngestError(EXIT_RAGGED, f"{path}: row {idx} has {len(row)} cells, expected {width}")
        try:
            values = parse_row(row)
        except ValueError as exc:
            raise IngestError(EXIT_NON_NUMERIC, f"{path}: row {idx}: {exc}") from exc
        if not all(math.isfinite(v) for v in values):
            raise IngestError(EXIT_NON_NUMERIC, f"{path}: row {idx} has a non-finite value")
        data.append(values)
    return SampleBatch(np.asarray(data, dtype=float))


def _emit(text: str, output_path: str):
    if output_path == "-":
        sys.stdout.write(text)
    else:
        with open(output_path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _provenance(config: RunConfig) -> dict:
    from . import __version__

    digest = None
    if config.input_path:
        try:
            with open(config.input_path, "rb") as handle:
                digest = hashlib.sha256(handle.read()).hexdigest()
        except OSError:
            digest = None
    return {"input_sha256": digest, "library_version": __version__, "seed": config.seed}


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.split(",")], dtype=float)


def _parse_matrix(text: str) -> np.ndarray:
    rows = [[float(tok) for tok in row.split(",")] for row in text.split(";")]
    if len({len(row) for row in rows}) != 1:
        raise ValueError("matrix rows have unequal lengths")
    return np.array(rows, dtype=float)


def _parse_handle(spec: str):
    kind, _, rest = spec.partition(":")
    args = [float(tok) for tok in rest.split(",")] if rest else []
    if kind == "normal" and len(args) == 2:
        return divergence.gaussian(args[0], args[1])
    if kind == "bernoulli" and len(args) == 1:
        return divergence.bernoulli(args[0])
    if kind == "t" and len(args) == 3:
        return divergence.student_t_1d(make_student_t(args[0], [args[1]], [[args[2]]]))
    raise ValueError(
        f"cannot parse distribution {spec!r}; use normal:MU,VAR | bernoulli:P | t:ALPHA,MU,VAR"
    )


def _quad_tols(config: RunConfig):
    return config.quadrature_tol, max(config.quadrature_tol, 1e-8)


def _require(condition: bool, message: str):
    if not condition:
        raise ValueError(message)


def _cmd_estimate(config: RunConfig) -> int:
    _require(config.alpha is not None, "estimate requires --alpha")
    _require(config.format == "json", "estimate reports are JSON only")
    batch = ingest_csv(config.input_path) if config.input_path else None
    _require(batch is not None, "estimate requires --input")
    est = estimators.estimate_student_t(batch, config.alpha)
    residual_norm = None
    if not est.singular:
        params = make_student_t(config.alpha, est.mu_hat, est.sigma_hat)
        _, desc = studentt.decompose(params)
        stats = estimators.sufficient_stats(batch, desc, config.alpha)
        pop = estimators.student_t_population_moments(params)
        theta = pack_theta(est.mu_hat, params.sigma_inv)
        residual_norm = estimators.residual_regular_malpha(desc, theta, stats, pop).norm
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "estimate",
        "alpha": config.alpha,
        "n": batch.n,
        "d": batch.dim,
        "mu_hat": est.mu_hat.tolist(),
        "sigma_hat": est.sigma_hat.tolist(),
        "singular_flag": est.singular,
        "residual_norm": residual_norm,
        "provenance": _provenance(config),
    }
    _emit(dumps_report(report), config.output_path)
    return EXIT_OK


def _candidate_dict(cand: compact.SegmentCandidate) -> dict:
    return {
        "lo": cand.lo,
        "hi": cand.hi,
        "active_set": list(cand.active_set),
        "unconstrained_max": cand.unconstrained_max,
        "maximizer": cand.maximizer,
        "objective_over_n2": cand.objective,
    }


def _cmd_compact_fit(config: RunConfig) -> int:
    alpha = 2.0 if config.alpha is None else config.alpha
    _require(alpha == 2.0, "compact-fit fixes alpha = 2")
    _require(config.format == "json", "compact-fit reports are JSON only")
    _require(config.input_path is not None, "compact-fit requires --input")
    batch = ingest_csv(config.input_path)
    result = compact.maximize_l2(batch)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "compact-fit",
        "alpha": alpha,
        "n": batch.n,
        "mu_hat": result.mu_hat,
        "objective_over_n2": result.objective_over_n2,
        "sample_mean": float(batch.scalars().mean()),
        "ties": list(result.ties),
        "candidates": [_candidate_dict(c) for c in result.candidates],
        "provenance": _provenance(config),
    }
    _emit(dumps_report(report), config.output_path)
    return EXIT_OK


def _cmd_divergence(config: RunConfig) -> int:
    _require(config.alpha is not None, "divergence requires --alpha")
    _require(config.format == "json", "divergence reports are JSON only")
    _require(config.dist_p is not None and config.dist_q is not None, "divergence requires --p and --q")
    epsabs, epsrel = _quad_tols(config)
    p = _parse_handle(config.dist_p)
    q = _parse_handle(config.dist_q)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "divergence",
        "alpha": config.alpha,
        "p": config.dist_p,
        "q": config.dist_q,
        "i_alpha": divergence.i_alpha(p, q, config.alpha, epsabs=epsabs, epsrel=epsrel),
        "kl": divergence.kl(p, q, epsabs=epsabs, epsrel=epsrel),
    }
    _emit(dumps_report(report), config.output_path)
    return EXIT_OK


def _cmd_loglik(config: RunConfig) -> int:
    _require(config.alpha is not None, "loglik requires --alpha")
    _require(config.mu is not None and config.sigma is not None, "loglik requires --mu and --sigma")
    _require(config.format == "json", "loglik reports are JSON only")
    _require(config.input_path is not None, "loglik requires --input")
    batch = ingest_csv(config.input_path)
    params = make_student_t(config.alpha, _parse_vector(config.mu), _parse_matrix(config.sigma))
    epsabs, epsrel = _quad_tols(config)
    value = divergence.generalized_log_likelihood(
        params, batch, config.alpha, epsabs=epsabs, epsrel=epsrel
    )
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "loglik",
        "alpha": config.alpha,
        "n": batch.n,
        "mu": params.mu.tolist(),
        "sigma": params.sigma.tolist(),
        "value": value,
        "provenance": _provenance(config),
    }
    _emit(dumps_report(report), config.output_path)
    return EXIT_OK


def _cmd_simulate(config: RunConfig) -> int:
    _require(config.alpha is not None, "simulate requires --alpha")
    _require(config.mu is not None and config.sigma is not None, "simulate requires --mu and --sigma")
    _require(config.n is not None and config.n >= 1, "simulate requires --n >= 1")
    params = make_student_t(config.alpha, _parse_vector(config.mu), _parse_matrix(config.sigma))
    batch = studentt.sample(params, config.n, config.seed)
    digits = _float_digits()
    if config.format == "csv":
        lines = [",".join(_format_float(v, digits) for v in row) for row in batch.data]
        _emit("\n".join(lines) + "\n", config.output_path)
    else:
        report = {
            "schema_version": SCHEMA_VERSION,
            "command": "simulate",
            "alpha": config.alpha,
            "seed": config.seed,
            "draws": batch.data.tolist(),
        }
        _emit(dumps_report(report), config.output_path)
    return EXIT_OK


def verify_reference_example(out=None) -> int:
    """Run the built-in reference sample end to end and check every table.

    Prints one PASS/FAIL line per check plus the full candidate table;
    returns 0 when all checks pass, 1 otherwise.
    """
    out = out or sys.stdout
    batch = SampleBatch(np.array(compact.REFERENCE_SAMPLE))
    result = compact.maximize_l2(batch)
    checks = []

    checks.append(
        ("mu_hat = 8.46 +- 0.01", abs(result.mu_hat - _VERIFY_MU_HAT) <= 0.01, result.mu_hat)
    )
    checks.append(
        (
            "objective/N2 = 6.42 +- 0.05",
            abs(result.objective_over_n2 - _VERIFY_OBJECTIVE) <= 0.05,
            result.objective_over_n2,
        )
    )
    mean = float(batch.scalars().mean())
    checks.append(
        (
            "mu_hat differs from the sample mean 7.45",
            abs(result.mu_hat - _VERIFY_SAMPLE_MEAN) > 0.01 and abs(mean - _VERIFY_SAMPLE_MEAN) <= 1e-12,
            result.mu_hat - mean,
        )
    )

    maximizers = [c.maximizer for c in result.candidates]
    count_ok = len(maximizers) == len(_VERIFY_MAXIMIZERS)
    checks.append(("segment count = 19", count_ok, len(maximizers)))
    if count_ok:
        worst = max(abs(m - e) for m, e in zip(maximizers, _VERIFY_MAXIMIZERS))
        checks.append(("per-segment maximizers +- 0.01", worst <= 0.01, worst))
        got = sorted(c.objective for c in result.candidates)
        expected = sorted(_VERIFY_OBJECTIVES)
        worst_obj = max(abs(g - e) for g, e in zip(got, expected))
        checks.append(("objective multiset +- 0.05", worst_obj <= 0.05, worst_obj))

    out.write("segment candidates (values in N2 units):\n")
    header = f"{'lo':>10} {'hi':>10} {'active':>8} {'maximizer':>11} {'objective':>11}\n"
    out.write(header)
    for cand in result.candidates:
        out.write(
            f"{cand.lo:>10.4f} {cand.hi:>10.4f} {len(cand.active_set):>8d} "
            f"{cand.maximizer:>11.4f} {cand.objective:>11.4f}\n"
        )

    all_ok = True
    for label, ok, value in checks:
        all_ok &= ok
        out.write(f"{'PASS' if ok else 'FAIL'}  {label}  (got {value})\n")
    out.write("PASS\n" if all_ok else "FAIL\n")
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    handlers = {
        "estimate": _cmd_estimate,
        "compact-fit": _cmd_compact_fit,
        "divergence": _cmd_divergence,
        "loglik": _cmd_loglik,
        "simulate": _cmd_simulate,
    }
    try:
        if config.command == "verify-paper-example":
            return verify_reference_example()
        if config.command not in handlers:
            raise ValueError(f"unknown command {config.command!r}")
        return handlers[config.command](config)
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except NumericalError as exc:
        print(f"numerical failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (
        ParameterError,
        DimensionMismatchError,
        UnsupportedConfigError,
        divergence.InvalidDistributionError,
        ValueError,
    ) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alphafam",
        description="Parameter estimation for alpha-power-law families (Student-t centered).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, default_format="json"):
        p.add_argument("--alpha", type=float, default=None, help="family/divergence order")
        p.add_argument("--input", dest="input_path", default=None, help="input CSV path")
        p.add_argument("--output", dest="output_path", default="-", help="output path or '-' for stdout")
        p.add_argument("--seed", type=int, default=0, help="RNG seed (nonnegative integer)")
        p.add_argument("--format", choices=("json", "csv"), default=default_format)
        p.add_argument("--quad-tol", dest="quadrature_tol", type=float, default=1e-10,
                       help="absolute quadrature tolerance")

    p_est = sub.add_parser("estimate", help="closed-form mean/covariance estimate (alpha < 1)")
    add_common(p_est)

    p_fit = sub.add_parser("compact-fit", help="exact maximizer for alpha = 2, sigma = 1, d = 1")
    add_common(p_fit)

    p_div = sub.add_parser("divergence", help="order-alpha and KL divergence of two distributions")
    add_common(p_div)
    p_div.add_argument("--p", dest="dist_p", required=True,
                       help="first distribution: normal:MU,VAR | bernoulli:P | t:ALPHA,MU,VAR")
    p_div.add_argument("--q", dest="dist_q", required=True, help="second distribution (same syntax)")

    p_ll = sub.add_parser("loglik", help="generalized log-likelihood of a batch")
    add_common(p_ll)
    p_ll.add_argument("--mu", default=None, help="location, comma-separated")
    p_ll.add_argument("--sigma", default=None, help="covariance, rows ';'-separated, cells ','-separated")

    p_sim = sub.add_parser("simulate", help="seeded draws, written as CSV")
    add_common(p_sim, default_format="csv")
    p_sim.add_argument("--n", type=int, default=None, help="number of draws")
    p_sim.add_argument("--mu", default=None, help="location, comma-separated")
    p_sim.add_argument("--sigma", default=None, help="covariance, rows ';'-separated, cells ','-separated")

    p_ver = sub.add_parser(
        "verify-paper-example",
        help="run the built-in reference sample and check the expected tables",
    )
    add_common(p_ver)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    fields = {f: getattr(args, f) for f in RunConfig.__dataclass_fields__ if hasattr(args, f)}
    if fields.get("seed", 0) < 0:
        print("invalid configuration: --seed must be >= 0", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    code = run(RunConfig(**fields))
    return code


if __name__ == "__main__":
    sys.exit(main())
