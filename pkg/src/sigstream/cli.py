"""Command-line interface: every operation as a subcommand with JSON output.

Exit codes: 0 success, 2 usage error, 3 data error (malformed input files),
4 numerical failure.  All randomness sits behind a mandatory ``--seed`` on
the stochastic subcommands, and output is byte-stable for fixed inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import learn
from .development import UnitaryPolicy, develop, unitarity_defect
from .errors import (
    DegenerateReportError,
    DimensionMismatchError,
    DivergenceError,
    DomainError,
    NotALieElementError,
    OutOfDepthError,
    StreamParseError,
)
from .expected_sig import GridDomain, mc_expected_sig, parse_domain, solve_recurrence
from .lie_algebra import tensor_to_lie_coords
from .logode import LinearSystem, LogOdeSchedule, VectorFieldSystem, solve
from .streams import (
    dp_distance_estimate,
    ingest_csv,
    lead_lag,
    signature,
    time_augment,
    write_csv,
)
from .tensor_algebra import coeff_map, tensor_log, to_json_dict, words_of_degree

USAGE_ERROR, DATA_ERROR, NUMERIC_ERROR = 2, 3, 4

_DATA_ERRORS = (
    StreamParseError,
    DimensionMismatchError,
    OutOfDepthError,
    FileNotFoundError,
    json.JSONDecodeError,
    KeyError,
)
_NUMERIC_ERRORS = (DivergenceError, NotALieElementError)


def _emit(payload: dict, out_path) -> None:
    text = json.dumps(payload, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _load_stream(path, transform: str = "none"):
    s = ingest_csv(path)
    if transform == "time":
        return time_augment(s)
    if transform == "leadlag":
        return lead_lag(s)
    return s


def _word_values(levels, dim) -> dict[str, float]:
    out = {}
    for k, lvl in enumerate(levels):
        for word, value in zip(words_of_degree(dim, k), lvl):
            out[str(word)] = float(value)
    return out


# -- subcommand handlers -------------------------------------------------------


def _cmd_sig(args) -> int:
    sig = signature(_load_stream(args.stream, args.transform), args.depth)
    payload = to_json_dict(sig)
    payload["coefficients"] = coeff_map(sig)
    _emit(payload, args.output)
    return 0


def _cmd_logsig(args) -> int:
    sig = signature(_load_stream(args.stream, args.transform), args.depth)
    coords = tensor_to_lie_coords(tensor_log(sig))
    pairs = coords.as_pairs()
    payload = {
        "d": coords.dim,
        "depth": coords.depth,
        "pairs": [[name, value] for name, value in pairs],
        "coords": {name: value for name, value in pairs},
    }
    _emit(payload, args.output)
    return 0


def _cmd_dpdist(args) -> int:
    report = dp_distance_estimate(
        ingest_csv(args.stream_a), ingest_csv(args.stream_b), args.p, args.levels
    )
    payload = {
        "p": report.p,
        "levels": list(report.levels),
        "estimates": report.estimates.tolist(),
    }
    _emit(payload, args.output)
    return 0


def _cmd_logode(args) -> int:
    spec = json.loads(Path(args.system).read_text())
    lin = LinearSystem(np.asarray(spec["matrices"], dtype=float))
    if lin.state_dim != int(spec["m"]) or lin.driver_dim != int(spec["d"]):
        raise DimensionMismatchError("system spec m/d fields disagree with matrices")
    y0 = np.asarray(spec["y0"], dtype=float)
    driver = ingest_csv(args.driver)
    schedule = LogOdeSchedule.uniform(driver, args.steps, args.depth, args.substeps)
    trajectory = solve(VectorFieldSystem.from_linear(lin), driver, y0, schedule)
    payload = {
        "times": schedule.boundaries.tolist(),
        "states": trajectory.tolist(),
    }
    _emit(payload, args.output)
    return 0


def _cmd_develop(args) -> int:
    spec = json.loads(Path(args.policy).read_text())
    gens = np.asarray(spec["generators"], dtype=float)
    if gens.ndim != 4 or gens.shape[-1] != 2:
        raise DomainError("generators must be [[[re, im], ...], ...] matrices")
    policy = UnitaryPolicy(gens[..., 0] + 1j * gens[..., 1])
    if policy.size != int(spec["u"]):
        raise DimensionMismatchError("policy u field disagrees with generators")
    result = develop(policy, ingest_csv(args.stream))
    psi = result.psi
    payload = {
        "u": policy.size,
        "interval": list(result.interval),
        "psi": [[[float(z.real), float(z.imag)] for z in row] for row in psi],
        "unitarity_defect": unitarity_defect(psi),
    }
    _emit(payload, args.output)
    return 0


def _cmd_expsig(args) -> int:
    domain = parse_domain(args.domain)
    grid = GridDomain(domain, args.h, boundary=args.boundary)
    field = solve_recurrence(grid, args.depth)
    center = field.center_values()
    payload = {
        "domain": args.domain,
        "h": args.h,
        "depth": args.depth,
        "boundary": args.boundary,
        "center": [float(v) for v in grid.descriptor.anchor],
        "values": _word_values(center.levels, 2),
    }
    _emit(payload, args.output)
    return 0


def _cmd_expsig_mc(args) -> int:
    domain = parse_domain(args.domain)
    start = (
        np.array([float(tok) for tok in args.start.split(",")])
        if args.start
        else domain.anchor
    )
    out = mc_expected_sig(domain, start, args.depth, args.paths, args.dt, args.seed)
    payload = {
        "domain": args.domain,
        "start": [float(v) for v in start],
        "depth": args.depth,
        "paths": args.paths,
        "dt": args.dt,
        "seed": args.seed,
        "mean": _word_values(out.mean.levels, 2),
        "stderr": _word_values(out.stderr, 2),
    }
    _emit(payload, args.output)
    return 0


def _read_manifest(manifest_path):
    base = Path(manifest_path).parent
    lines = [
        line.strip()
        for line in Path(manifest_path).read_text().splitlines()
        if line.strip()
    ]
    if not lines:
        raise StreamParseError(f"{manifest_path}: empty manifest")
    return [ingest_csv(base / line) for line in lines]


def _read_labels(path, expected):
    values = [
        float(line.strip())
        for line in Path(path).read_text().splitlines()
        if line.strip()
    ]
    if len(values) != expected:
        raise DimensionMismatchError(
            f"{path}: {len(values)} labels for {expected} streams"
        )
    return np.array(values)


def _cmd_fit(args) -> int:
    streams = _read_manifest(args.train)
    y = _read_labels(args.labels, len(streams))
    X = learn.featurize(streams, args.depth, args.transform)
    if args.method == "ridge":
        model = learn.fit_ridge(X, y, args.lam)
    else:
        model = learn.fit_lasso(X, y, args.lam)
    model_payload = {
        "dimension": X.dim,
        "depth": X.depth,
        "transform": X.transform,
        "method": model.method,
        "lambda": model.lam,
        "words": [str(w) for w in X.words],
        "coefficients": model.coefficients.tolist(),
        "converged": bool(model.converged),
        "n_iter": int(model.n_iter),
    }
    Path(args.output).write_text(json.dumps(model_payload, indent=2) + "\n")
    summary = {
        "model": str(args.output),
        "n_streams": len(streams),
        "n_features": len(X.words),
        "active_coefficients": int(np.count_nonzero(model.coefficients[1:])),
    }
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return 0


def _cmd_score(args) -> int:
    model_spec = json.loads(Path(args.model).read_text())
    streams = _read_manifest(args.test)
    y = _read_labels(args.labels, len(streams))
    X = learn.featurize(
        streams, int(model_spec["depth"]), model_spec.get("transform", "none")
    )
    coef = np.asarray(model_spec["coefficients"], dtype=float)
    if coef.size != X.X.shape[1]:
        raise DimensionMismatchError(
            "model was fit with a different feature count"
        )
    report = learn.classification_report(X.X @ coef, y.astype(int))
    payload = {
        "ks": report.ks,
        "auc": report.auc,
        "accuracy": report.accuracy,
        "roc": report.roc.tolist(),
    }
    _emit(payload, args.output)
    return 0


def _cmd_gen_synth(args) -> int:
    streams, labels = learn.two_class_streams(
        args.n_per_class, args.steps, args.strength, args.seed
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for i, s in enumerate(streams):
        name = f"stream_{i:04d}.csv"
        write_csv(s, out_dir / name)
        names.append(name)
    (out_dir / "manifest.txt").write_text("\n".join(names) + "\n")
    (out_dir / "labels.txt").write_text(
        "\n".join(str(int(v)) for v in labels) + "\n"
    )
    payload = {
        "out": str(out_dir),
        "n_streams": len(streams),
        "manifest": str(out_dir / "manifest.txt"),
        "labels": str(out_dir / "labels.txt"),
        "seed": args.seed,
        "strength": args.strength,
    }
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigstream",
        description="Signatures, log-signatures, log-ODE solves, expected "
        "signatures and signature-feature learning for streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p):
        p.add_argument("-o", "--output", default=None, help="write JSON here instead of stdout")

    p = sub.add_parser("sig", help="truncated signature of a stream CSV")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--transform", choices=["none", "time", "leadlag"], default="none")
    p.add_argument("stream")
    add_output(p)
    p.set_defaults(handler=_cmd_sig)

    p = sub.add_parser("logsig", help="Lyndon-coordinate log-signature")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--transform", choices=["none", "time", "leadlag"], default="none")
    p.add_argument("stream")
    add_output(p)
    p.set_defaults(handler=_cmd_logsig)

    p = sub.add_parser("dpdist", help="p-variation distance profile of two streams")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("stream_a")
    p.add_argument("stream_b")
    add_output(p)
    p.set_defaults(handler=_cmd_dpdist)

    p = sub.add_parser("logode", help="log-ODE solve of a linear system")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--substeps", type=int, default=16)
    p.add_argument("--system", required=True, help="JSON {m, d, matrices, y0}")
    p.add_argument("driver")
    add_output(p)
    p.set_defaults(handler=_cmd_logode)

    p = sub.add_parser("develop", help="unitary development of a stream")
    p.add_argument("--policy", required=True, help="JSON {u, generators}")
    p.add_argument("stream")
    add_output(p)
    p.set_defaults(handler=_cmd_develop)

    p = sub.add_parser("expsig", help="expected signature of stopped Brownian motion (PDE)")
    p.add_argument("--domain", required=True, help="disk:R or polygon:x,y;...")
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--boundary", choices=["exact", "snap"], default="exact")
    add_output(p)
    p.set_defaults(handler=_cmd_expsig)

    p = sub.add_parser("expsig-mc", help="Monte Carlo expected signature")
    p.add_argument("--domain", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--paths", type=int, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--start", default=None, help="x,y (default: domain anchor)")
    add_output(p)
    p.set_defaults(handler=_cmd_expsig_mc)

    p = sub.add_parser("fit", help="fit a linear model on signature features")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--method", choices=["ridge", "lasso"], required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--transform", choices=["none", "time", "leadlag"], default="none")
    p.add_argument("train", help="manifest: one stream CSV path per line")
    p.add_argument("labels", help="one numeric label per line")
    p.add_argument("-o", "--output", required=True, help="model JSON path")
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("score", help="classification report of a fitted model")
    p.add_argument("model")
    p.add_argument("test", help="manifest: one stream CSV path per line")
    p.add_argument("labels")
    add_output(p)
    p.set_defaults(handler=_cmd_score)

    p = sub.add_parser("gen-synth", help="generate the synthetic two-class stream task")
    p.add_argument("--out", required=True)
    p.add_argument("--n-per-class", type=int, required=True)
    p.add_argument("--steps", type=int, default=64)
    p.add_argument("--strength", type=float, default=0.7)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(handler=_cmd_gen_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.handler(args)
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERIC_ERROR
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (DomainError, DegenerateReportError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
