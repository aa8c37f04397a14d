"""Command line interface: detect, estimate, benchmark.

Exit codes: 0 success, 2 unreadable input file, 3 unparseable data row,
4 invalid parameters or scenario.  Reports are JSON documents carrying
``"schema_version": 1``; the benchmark also writes a per-replicate CSV.
Identical inputs and seeds produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import estimation, evaluate, simulate
from .errors import DegenerateDataError, InvalidDataError, InvalidParameterError
from .oracle import exhaustive_segment
from .solver import ModelParams, SolverConfig, solve

SCHEMA_VERSION = 1

EXIT_UNREADABLE = 2
EXIT_UNPARSEABLE = 3
EXIT_INVALID = 4


class _CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _parse_cell(cell: str, row_index: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise _CliError(EXIT_UNPARSEABLE, f"row {row_index}: cannot parse {cell!r} as a number")
    if not math.isfinite(value):
        raise _CliError(EXIT_UNPARSEABLE, f"row {row_index}: non-finite value {cell!r}")
    return value


def read_series(path: str, column: str | None = None) -> np.ndarray:
    """Read one numeric column from a CSV or whitespace-separated text file.

    ``column`` may be a 0-based index or a header name.  A header is
    auto-detected when the first row's selected cell is not numeric.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _CliError(EXIT_UNREADABLE, f"cannot read {path}: {exc}")
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        rows.append(next(csv.reader([line])) if "," in line else line.split())
    if not rows:
        raise _CliError(EXIT_UNPARSEABLE, "no data rows in input")

    col_idx = 0
    header: list[str] | None = None
    first = rows[0]
    if column is not None and not str(column).lstrip("-").isdigit():
        header = [c.strip() for c in first]
        if str(column) not in header:
            raise _CliError(EXIT_INVALID, f"column {column!r} not found in header {header}")
        col_idx = header.index(str(column))
        rows = rows[1:]
    else:
        if column is not None:
            col_idx = int(column)
        try:
            float(first[min(col_idx, len(first) - 1)])
        except ValueError:
            rows = rows[1:]  # header row
    if not rows:
        raise _CliError(EXIT_UNPARSEABLE, "no data rows after the header")

    values = []
    for i, row in enumerate(rows):
        if col_idx >= len(row):
            raise _CliError(EXIT_UNPARSEABLE, f"row {i}: missing column {col_idx}")
        values.append(_parse_cell(row[col_idx], i))
    return np.array(values)


def _resolve_params(args, y) -> tuple[ModelParams, bool, str | None]:
    """Return ``(params, estimated flag, variant for the solver)``."""
    given = [args.phi, args.sigma_eta_sq, args.sigma_nu_sq]
    supplied = sum(v is not None for v in given)
    if supplied not in (0, 3):
        raise _CliError(
            EXIT_INVALID,
            "provide all of --phi, --sigma-eta-sq, --sigma-nu-sq, or none of them",
        )
    try:
        if supplied == 3:
            params = ModelParams(
                sigma_eta_sq=args.sigma_eta_sq,
                sigma_nu_sq=args.sigma_nu_sq,
                phi=args.phi,
            )
            if args.model is not None:
                from .solver import check_variant

                check_variant(args.model, params)
            return params, False, args.model
        est = estimation.estimate(y, K=args.lags, variant=args.model or "rw-ar")
        return est.params, True, est.recommended_variant
    except (InvalidParameterError, DegenerateDataError) as exc:
        raise _CliError(EXIT_INVALID, str(exc))


def _beta_for(args, n: int) -> float:
    beta = args.beta if args.beta is not None else 2.0 * args.penalty_scale * math.log(n)
    if not beta > 0.0:
        raise _CliError(EXIT_INVALID, f"penalty must be > 0, got {beta}")
    return beta


def _dump_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def run_detect(args) -> int:
    y = read_series(args.input, args.column)
    params, estimated, variant = _resolve_params(args, y)
    beta = _beta_for(args, len(y))
    try:
        seg = solve(y, params, SolverConfig(beta=beta, model_variant=variant))
    except (InvalidParameterError, InvalidDataError) as exc:
        raise _CliError(EXIT_INVALID, str(exc))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "n": len(y),
        "params": {
            "sigma_eta_sq": params.sigma_eta_sq,
            "sigma_nu_sq": params.sigma_nu_sq,
            "phi": params.phi,
            "estimated": estimated,
        },
        "beta": beta,
        "changepoints": seg.changepoints,
        "m": seg.m,
        "cost": seg.cost,
    }
    if args.emit_signal:
        payload["signal"] = [float(v) for v in seg.signal]
    _dump_json(payload, args.output)
    return 0


def run_estimate(args) -> int:
    y = read_series(args.input, args.column)
    try:
        est = estimation.estimate(y, K=args.lags, variant=args.model or "rw-ar")
    except (InvalidParameterError, DegenerateDataError) as exc:
        raise _CliError(EXIT_INVALID, str(exc))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "n": len(y),
        "lags": args.lags,
        "params": {
            "sigma_eta_sq": est.params.sigma_eta_sq,
            "sigma_nu_sq": est.params.sigma_nu_sq,
            "phi": est.params.phi,
        },
        "residual": est.residual,
        "recommended_variant": est.recommended_variant,
    }
    _dump_json(payload, args.output)
    return 0


def _true_params_for(spec: simulate.ScenarioSpec) -> ModelParams | None:
    """Model parameters implied by a scenario, if it lives inside the model."""
    noise = spec.noise
    if isinstance(noise, simulate.Ar2Noise):
        return None
    if isinstance(noise, simulate.IidNoise):
        phi, s_nu = 0.0, noise.sigma**2
    else:
        phi, s_nu = noise.phi, noise.sigma_nu**2
    if s_nu == 0.0:
        return None
    s_eta = spec.drift.sigma_eta**2 if isinstance(spec.drift, simulate.RandomWalkDrift) else 0.0
    return ModelParams(sigma_eta_sq=s_eta, sigma_nu_sq=s_nu, phi=phi)


def _aggregate(values: list[float]) -> dict:
    arr = np.asarray(values)
    q25, median, q75 = (float(np.percentile(arr, p)) for p in (25, 50, 75))
    return {"median": median, "q25": q25, "q75": q75, "iqr": q75 - q25}


def run_benchmark(args) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise _CliError(EXIT_UNREADABLE, f"cannot read {args.input}: {exc}")
    except json.JSONDecodeError as exc:
        raise _CliError(EXIT_INVALID, f"scenario file is not valid JSON: {exc}")
    try:
        spec = simulate.spec_from_json(doc)
    except InvalidParameterError as exc:
        raise _CliError(EXIT_INVALID, str(exc))
    seed = args.seed if args.seed is not None else spec.seed
    spec = simulate.ScenarioSpec(
        kind=spec.kind,
        n=spec.n,
        change_size=spec.change_size,
        noise=spec.noise,
        drift=spec.drift,
        seed=seed,
    )
    beta = _beta_for(args, spec.n)
    true_params = _true_params_for(spec)
    modes = {"true": true_params is not None, "estimated": True}

    per_mode: dict[str, list[dict]] = {name: [] for name, on in modes.items() if on}
    for r in range(args.replicates):
        sim = simulate.generate(spec, replicate=r)
        for name in per_mode:
            try:
                if name == "true":
                    params = true_params
                else:
                    params = estimation.estimate(sim.y, K=args.lags).params
                seg = solve(sim.y, params, SolverConfig(beta=beta))
            except (InvalidParameterError, DegenerateDataError, InvalidDataError) as exc:
                raise _CliError(EXIT_INVALID, f"replicate {r} ({name}): {exc}")
            report = evaluate.match_changepoints(
                seg.changepoints, sim.changepoints_true, tolerance=2
            )
            per_mode[name].append(
                {
                    "replicate": r,
                    "m": seg.m,
                    **report.to_dict(),
                }
            )

    payload: dict = {
        "schema_version": SCHEMA_VERSION,
        "scenario": simulate.spec_to_json(spec),
        "replicates": args.replicates,
        "seed": seed,
        "beta": beta,
        "modes": {},
    }
    for name in ("true", "estimated"):
        if name not in per_mode:
            payload["modes"][name] = None
            continue
        rows = per_mode[name]
        payload["modes"][name] = {
            "per_replicate": rows,
            "aggregate": {
                "f1": _aggregate([r["f1"] for r in rows]),
                "precision": _aggregate([r["precision"] for r in rows]),
                "recall": _aggregate([r["recall"] for r in rows]),
                "mean_detected": float(np.mean([r["m"] for r in rows])),
                "zero_detection_fraction": float(
                    np.mean([1.0 if r["m"] == 0 else 0.0 for r in rows])
                ),
            },
        }

    base = args.output[:-5] if args.output.endswith(".json") else args.output
    _dump_json(payload, base + ".json")
    fields = [
        "mode",
        "replicate",
        "true_positives",
        "false_positives",
        "false_negatives",
        "precision",
        "recall",
        "f1",
        "m",
    ]
    with open(base + ".csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for name in per_mode:
            for row in per_mode[name]:
                out = {k: row[k] for k in fields if k in row}
                out["mode"] = name
                out.pop("tolerance", None)
                writer.writerow(out)
    return 0


def run_oracle(args) -> int:
    y = read_series(args.input, args.column)
    params, _, _ = _resolve_params(args, y)
    beta = _beta_for(args, len(y))
    try:
        tau, cost = exhaustive_segment(y, params, beta, m_max=args.m_max)
    except InvalidParameterError as exc:
        raise _CliError(EXIT_INVALID, str(exc))
    _dump_json(
        {
            "schema_version": SCHEMA_VERSION,
            "n": len(y),
            "beta": beta,
            "changepoints": tau,
            "cost": cost,
        },
        args.output,
    )
    return 0


def _add_common(parser: argparse.ArgumentParser, with_params: bool = True) -> None:
    parser.add_argument("--input", required=True, help="path to the input file")
    parser.add_argument("--column", default=None, help="column index or header name")
    parser.add_argument("--output", default=None, help="write the JSON report here")
    parser.add_argument("--lags", type=int, default=estimation.DEFAULT_LAGS,
                        help="lags used by parameter estimation")
    parser.add_argument("--model", default=None,
                        choices=["rw-ar", "ar-only", "rw-only", "iid"],
                        help="model variant")
    if with_params:
        parser.add_argument("--beta", type=float, default=None,
                            help="per-change penalty (default 2*log n)")
        parser.add_argument("--penalty-scale", type=float, default=1.0,
                            help="multiplier on the default penalty")
        parser.add_argument("--phi", type=float, default=None)
        parser.add_argument("--sigma-eta-sq", type=float, default=None)
        parser.add_argument("--sigma-nu-sq", type=float, default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftseg",
        description="Changepoint detection under random-walk drift and AR(1) noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="segment a series from a file")
    _add_common(p_detect)
    p_detect.add_argument("--emit-signal", action="store_true",
                          help="include the fitted mean path in the report")
    p_detect.set_defaults(func=run_detect)

    p_est = sub.add_parser("estimate", help="estimate model parameters only")
    _add_common(p_est, with_params=False)
    p_est.set_defaults(func=run_estimate)

    p_bench = sub.add_parser("benchmark", help="score the detector on a synthetic scenario")
    p_bench.add_argument("--input", required=True, help="scenario spec (JSON)")
    p_bench.add_argument("--output", required=True, help="report base path (.json/.csv)")
    p_bench.add_argument("--replicates", type=int, default=100)
    p_bench.add_argument("--seed", type=int, default=None,
                         help="override the scenario seed")
    p_bench.add_argument("--beta", type=float, default=None)
    p_bench.add_argument("--penalty-scale", type=float, default=1.0)
    p_bench.add_argument("--lags", type=int, default=estimation.DEFAULT_LAGS)
    p_bench.set_defaults(func=run_benchmark)

    # undocumented: exact enumeration for debugging small inputs
    p_oracle = sub.add_parser("oracle-exhaustive")
    _add_common(p_oracle)
    p_oracle.add_argument("--m-max", type=int, default=None)
    p_oracle.set_defaults(func=run_oracle)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
