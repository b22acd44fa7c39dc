"""Command-line front end: build, evaluate, optimize, and verify functionals.

Subcommands
-----------

``build``
    Construct a functional and emit its coefficient tensor.
``classical``
    Exhaustive deterministic maximum, with optional epsilon/d sweeps.
``ideal``
    Ideal correlation and its Bell value.
``seesaw``
    Alternating-ascent optimization from seeded random starts.
``verify``
    Structural self-test verification of a correlation file; the process
    exit code is 0 exactly when the overall verdict passes.
``eval``
    Value of a functional file on a correlation file.

Every artifact (stdout JSON, ``--out`` files, CSV exports) embeds a manifest
recording the command, the fully resolved parameters, the tool version, and a
timestamp.  All randomness flows from ``--seed``; when the flag is absent a
fresh seed is drawn and recorded, so any artifact can be reproduced from its
manifest alone (:func:`argv_from_manifest`).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .classical import DEFAULT_CAP, classical_max
from .correlations import Correlation
from .errors import ChshdError, InputError
from .functionals import (
    BellFunctional,
    CrossDiagonalMode,
    Variant,
    build_maxent,
    build_tilted,
    evaluate,
    quantum_bound,
)
from .ideal import ideal_maxent_correlation, ideal_tilted_correlation
from .seesaw import InitKind, SeesawConfig, seesaw
from .selftest import VERIFY_TOL, verify_selftest, verify_selftest_tilted
from .serialize import (
    classical_result_to_dict,
    correlation_from_dict,
    correlation_to_dict,
    functional_from_dict,
    functional_to_dict,
    read_json,
    report_to_dict,
    seesaw_result_to_dict,
    write_json_atomic,
)

DEFAULT_EPSILON = 0.1


# ---------------------------------------------------------------------------
# manifest plumbing
# ---------------------------------------------------------------------------


def make_manifest(command: str, parameters: dict) -> dict:
    return {
        "command": command,
        "parameters": parameters,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


#: Manifest parameter -> (flag, style); style "value" emits `--flag v`,
#: "switch" emits `--flag` when true, "list" comma-joins a sequence.
_FLAG_TABLE: tuple[tuple[str, str, str], ...] = (
    ("bell", "--bell", "value"),
    ("correlation", "--correlation", "value"),
    ("d", "--d", "value"),
    ("coeffs", "--coeffs", "list"),
    ("tilted", "--tilted", "switch"),
    ("epsilon", "--epsilon", "value"),
    ("cross_diagonal", "--cross-diagonal", "value"),
    ("allow_zero_epsilon", "--allow-zero-epsilon", "switch"),
    ("sweep_epsilon", "--sweep-epsilon", "list"),
    ("sweep_d", "--sweep-d", "list"),
    ("cap", "--cap", "value"),
    ("restarts", "--restarts", "value"),
    ("iters", "--iters", "value"),
    ("seed", "--seed", "value"),
    ("tol", "--tol", "value"),
    ("init", "--init", "value"),
    ("noise", "--noise", "value"),
    ("dims", "--dims", "list"),
    ("format", "--format", "value"),
)


def _flag_repr(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def argv_from_manifest(manifest: dict) -> list[str]:
    """Reconstruct an equivalent command line from a manifest.

    The output path is intentionally not part of the manifest, so callers
    append their own ``--out`` when re-running.
    """
    argv = [str(manifest["command"])]
    parameters = manifest["parameters"]
    for key, flag, style in _FLAG_TABLE:
        if key not in parameters or parameters[key] is None:
            continue
        value = parameters[key]
        if style == "switch":
            if value:
                argv.append(flag)
        elif style == "list":
            argv += [flag, ",".join(_flag_repr(v) for v in value)]
        else:
            argv += [flag, _flag_repr(value)]
    return argv


def _emit(doc: dict, args, text: str | None = None) -> None:
    """Print the artifact and, with ``--out``, write it atomically."""
    rendered = text if text is not None else json.dumps(doc, indent=2)
    print(rendered)
    out = getattr(args, "out", None)
    if out:
        if text is not None:
            _write_text_atomic(out, rendered)
        else:
            write_json_atomic(out, doc)


def _write_text_atomic(path: str, text: str) -> None:
    import os
    import tempfile

    path_obj = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path_obj.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
            if not text.endswith("\n"):
                handle.write("\n")
        os.replace(tmp, path_obj)
    except BaseException:
        os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# shared argument groups
# ---------------------------------------------------------------------------


def _parse_floats(text: str, flag: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip() != "")
    except ValueError as exc:
        raise InputError(f"{flag} expects comma-separated reals, got {text!r}") from exc
    if not values:
        raise InputError(f"{flag} expects at least one value, got {text!r}")
    return values


def _parse_ints(text: str, flag: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip() != "")
    except ValueError as exc:
        raise InputError(f"{flag} expects comma-separated integers, got {text!r}") from exc
    if not values:
        raise InputError(f"{flag} expects at least one value, got {text!r}")
    return values


def _add_functional_flags(parser: argparse.ArgumentParser, with_bell: bool = False) -> None:
    parser.add_argument("--d", type=int, help="local dimension (plain family)")
    parser.add_argument("--tilted", action="store_true", help="build the tilted family instead")
    parser.add_argument("--coeffs", help="comma-separated state coefficients (tilted family)")
    parser.add_argument(
        "--epsilon", type=float, default=DEFAULT_EPSILON, help="cross-term penalty (default 0.1)"
    )
    parser.add_argument(
        "--cross-diagonal",
        choices=[m.value for m in CrossDiagonalMode],
        default=CrossDiagonalMode.EXCLUDE.value,
        help="treatment of the odd-d leftover diagonal pairs (default exclude)",
    )
    parser.add_argument(
        "--allow-zero-epsilon",
        action="store_true",
        help="permit epsilon = 0 (the functional then ignores cross terms)",
    )
    if with_bell:
        parser.add_argument("--bell", help="load the functional from a JSON file instead")


def _resolve_functional(args) -> tuple[BellFunctional, dict]:
    """Build or load the functional; returns it with its manifest parameters."""
    if getattr(args, "bell", None):
        f = _load_functional(args.bell)
        return f, {"bell": args.bell}
    mode = CrossDiagonalMode(args.cross_diagonal)
    params = {
        "epsilon": args.epsilon,
        "cross_diagonal": mode.value,
        "allow_zero_epsilon": args.allow_zero_epsilon,
    }
    if args.tilted:
        if not args.coeffs:
            raise InputError("--tilted requires --coeffs")
        coeffs = _parse_floats(args.coeffs, "--coeffs")
        if args.d is not None and args.d != len(coeffs):
            raise InputError(f"--d {args.d} contradicts --coeffs of length {len(coeffs)}")
        f = build_tilted(coeffs, args.epsilon, mode, allow_zero_epsilon=args.allow_zero_epsilon)
        params |= {"tilted": True, "coeffs": list(coeffs)}
    else:
        if args.d is None:
            raise InputError("either --d (plain family) or --tilted --coeffs is required")
        f = build_maxent(args.d, args.epsilon, mode, allow_zero_epsilon=args.allow_zero_epsilon)
        params |= {"tilted": False, "d": args.d}
    return f, params


def _load_functional(path: str) -> BellFunctional:
    doc = read_json(path)
    if "functional" in doc:
        doc = doc["functional"]
    return functional_from_dict(doc)


def _load_correlation(path: str) -> Correlation:
    doc = read_json(path)
    if "correlation" in doc:
        doc = doc["correlation"]
    return correlation_from_dict(doc)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(np.random.SeedSequence().entropy)


def _require_json_format(args, command: str) -> None:
    if getattr(args, "format", "json") == "csv":
        raise InputError(f"{command} has no CSV representation; use --format json")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    f, params = _resolve_functional(args)
    doc = {
        "manifest": make_manifest("build", params),
        "functional": functional_to_dict(f),
    }
    _emit(doc, args)
    return 0


def _classical_row(f: BellFunctional, cap: int) -> dict:
    result = classical_max(f, cap=cap)
    return {
        "d": f.d,
        "epsilon": f.epsilon,
        "mode": f.mode.value,
        "value": result.value,
        "reference_bound": result.reference_bound,
        "strategies_scanned": result.strategies_scanned,
        "argmax_count": len(result.argmax),
        "note": result.note,
    }


def _rows_to_csv(rows: list[dict], manifest: dict) -> str:
    buffer = io.StringIO()
    buffer.write(f"# manifest: {json.dumps(manifest)}\n")
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue().rstrip("\n")


def cmd_classical(args) -> int:
    if args.sweep_epsilon and args.sweep_d:
        raise InputError("--sweep-epsilon and --sweep-d are mutually exclusive")
    mode = CrossDiagonalMode(args.cross_diagonal)

    if args.sweep_epsilon or args.sweep_d:
        if args.tilted:
            raise InputError("sweeps cover the plain family only")
        if args.d is None and not args.sweep_d:
            raise InputError("--sweep-epsilon requires --d")
        params: dict = {
            "cross_diagonal": mode.value,
            "allow_zero_epsilon": args.allow_zero_epsilon,
            "cap": args.cap,
            "format": args.format,
        }
        rows = []
        if args.sweep_epsilon:
            epsilons = _parse_floats(args.sweep_epsilon, "--sweep-epsilon")
            params |= {"d": args.d, "sweep_epsilon": list(epsilons)}
            for eps in epsilons:
                f = build_maxent(args.d, eps, mode, allow_zero_epsilon=args.allow_zero_epsilon)
                rows.append(_classical_row(f, args.cap))
        else:
            ds = _parse_ints(args.sweep_d, "--sweep-d")
            params |= {"epsilon": args.epsilon, "sweep_d": list(ds)}
            for d in ds:
                f = build_maxent(d, args.epsilon, mode, allow_zero_epsilon=args.allow_zero_epsilon)
                rows.append(_classical_row(f, args.cap))
        manifest = make_manifest("classical", params)
        if args.format == "csv":
            _emit({}, args, text=_rows_to_csv(rows, manifest))
        else:
            _emit({"manifest": manifest, "sweep": rows}, args)
        return 0

    _require_json_format(args, "classical (without a sweep)")
    f, params = _resolve_functional(args)
    params["cap"] = args.cap
    result = classical_max(f, cap=args.cap)
    doc = {
        "manifest": make_manifest("classical", params),
        "result": classical_result_to_dict(result),
    }
    _emit(doc, args)
    return 0


def cmd_ideal(args) -> int:
    _require_json_format(args, "ideal")
    f, params = _resolve_functional(args)
    if f.variant is Variant.TILTED:
        p = ideal_tilted_correlation(f.tilted_spec)
        bound = 1.0 + (1.0 if f.d > 2 else 0.0)
    else:
        p = ideal_maxent_correlation(f.d)
        bound = quantum_bound(f.d)
    doc = {
        "manifest": make_manifest("ideal", params),
        "d": f.d,
        "variant": f.variant.value,
        "bell_value": evaluate(f, p),
        "bound": bound,
        "correlation": correlation_to_dict(p),
    }
    _emit(doc, args)
    return 0


def cmd_seesaw(args) -> int:
    f, params = _resolve_functional(args)
    seed = _resolve_seed(args)
    dims = _parse_ints(args.dims, "--dims") if args.dims else None
    if dims is not None and len(dims) != 2:
        raise InputError(f"--dims expects dA,dB, got {args.dims!r}")
    config = SeesawConfig(
        dA=dims[0] if dims else None,
        dB=dims[1] if dims else None,
        restarts=args.restarts,
        max_iters=args.iters,
        convergence_tol=args.tol,
        seed=seed,
        init=InitKind(args.init),
        init_noise=args.noise,
    )
    params |= {
        "restarts": args.restarts,
        "iters": args.iters,
        "seed": seed,
        "tol": args.tol,
        "init": args.init,
        "noise": args.noise,
        "format": args.format,
    }
    if dims is not None:
        params["dims"] = list(dims)
    result = seesaw(f, config)
    manifest = make_manifest("seesaw", params)
    if args.format == "csv":
        rows = [
            {"restart": r, "iteration": i, "value": value}
            for r, trajectory in enumerate(result.trajectory)
            for i, value in enumerate(trajectory)
        ]
        _emit({}, args, text=_rows_to_csv(rows, manifest))
        return 0
    doc = {"manifest": manifest} | seesaw_result_to_dict(result)
    _emit(doc, args)
    return 0


def cmd_verify(args) -> int:
    _require_json_format(args, "verify")
    f, params = _resolve_functional(args)
    p = _load_correlation(args.correlation)
    params |= {"correlation": args.correlation, "tol": args.tol}
    if f.variant is Variant.TILTED:
        report = verify_selftest_tilted(p, f, tol=args.tol)
    else:
        report = verify_selftest(p, f, tol=args.tol)
    doc = {"manifest": make_manifest("verify", params)} | report_to_dict(report)
    _emit(doc, args)
    return 0 if report.passed else 1


def cmd_eval(args) -> int:
    _require_json_format(args, "eval")
    f = _load_functional(args.bell)
    p = _load_correlation(args.correlation)
    params = {"bell": args.bell, "correlation": args.correlation}
    doc = {"manifest": make_manifest("eval", params), "value": evaluate(f, p)}
    _emit(doc, args)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chshd",
        description="Build, optimize, and verify d-outcome CHSH-like Bell functionals.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_output(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", help="write the artifact to this path (atomically)")
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p_build = sub.add_parser("build", help="construct a functional")
    _add_functional_flags(p_build)
    common_output(p_build)
    p_build.set_defaults(func=cmd_build)

    p_classical = sub.add_parser("classical", help="exhaustive deterministic maximum")
    _add_functional_flags(p_classical, with_bell=True)
    p_classical.add_argument(
        "--cap", type=int, default=DEFAULT_CAP, help=f"largest d to enumerate (default {DEFAULT_CAP})"
    )
    p_classical.add_argument("--sweep-epsilon", help="comma-separated epsilons (one row each)")
    p_classical.add_argument("--sweep-d", help="comma-separated dimensions (one row each)")
    common_output(p_classical)
    p_classical.set_defaults(func=cmd_classical)

    p_ideal = sub.add_parser("ideal", help="ideal correlation and its Bell value")
    _add_functional_flags(p_ideal)
    common_output(p_ideal)
    p_ideal.set_defaults(func=cmd_ideal)

    p_seesaw = sub.add_parser("seesaw", help="alternating-ascent optimization")
    _add_functional_flags(p_seesaw, with_bell=True)
    p_seesaw.add_argument("--restarts", type=int, default=8)
    p_seesaw.add_argument("--iters", type=int, default=200, help="max outer iterations")
    p_seesaw.add_argument("--seed", type=int, help="RNG seed (default: drawn and recorded)")
    p_seesaw.add_argument("--tol", type=float, default=1e-10, help="convergence tolerance")
    p_seesaw.add_argument(
        "--init", choices=[k.value for k in InitKind], default=InitKind.RANDOM.value
    )
    p_seesaw.add_argument("--noise", type=float, default=1e-2, help="ideal-perturbed noise scale")
    p_seesaw.add_argument("--dims", help="local dimensions dA,dB (default d,d)")
    common_output(p_seesaw)
    p_seesaw.set_defaults(func=cmd_seesaw)

    p_verify = sub.add_parser("verify", help="structural self-test verification")
    _add_functional_flags(p_verify, with_bell=True)
    p_verify.add_argument("--correlation", required=True, help="correlation JSON to verify")
    p_verify.add_argument("--tol", type=float, default=VERIFY_TOL)
    common_output(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_eval = sub.add_parser("eval", help="evaluate a functional file on a correlation file")
    p_eval.add_argument("--bell", required=True, help="functional JSON")
    p_eval.add_argument("--correlation", required=True, help="correlation JSON")
    common_output(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ChshdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
