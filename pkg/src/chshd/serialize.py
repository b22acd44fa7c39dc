"""JSON (de)serialization of correlations, strategies, functionals, and reports.

Conventions: complex scalars are encoded as two-element ``[real, imag]``
lists, matrices as row-major nested lists, and enums by their string values.
Objects that the package consumes (correlations, strategies, functionals)
round-trip; reports and optimizer results serialize one-way for archival.
Writes are atomic (temp file + rename) so readers never observe a partial
artifact.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from .classical import ClassicalMaxResult
from .correlations import Correlation, QuantumStrategy
from .errors import InputError
from .functionals import BellFunctional, CrossDiagonalMode, TiltedSpec, Variant
from .seesaw import SeesawResult
from .selftest import BlockWeights, SelfTestReport


# ---------------------------------------------------------------------------
# scalar and array helpers
# ---------------------------------------------------------------------------


def complex_matrix_to_lists(m: np.ndarray) -> list:
    """Row-major nested lists of ``[real, imag]`` pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def complex_matrix_from_lists(rows: Any, what: str = "matrix") -> np.ndarray:
    try:
        return np.array([[complex(p[0], p[1]) for p in row] for row in rows])
    except (TypeError, IndexError) as exc:
        raise InputError(f"malformed complex {what}: expected nested [re, im] pairs") from exc


def complex_vector_to_lists(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def complex_vector_from_lists(pairs: Any, what: str = "vector") -> np.ndarray:
    try:
        return np.array([complex(p[0], p[1]) for p in pairs])
    except (TypeError, IndexError) as exc:
        raise InputError(f"malformed complex {what}: expected [re, im] pairs") from exc


def _require(doc: dict, key: str, what: str) -> Any:
    if key not in doc:
        raise InputError(f"malformed {what}: missing key {key!r}")
    return doc[key]


# ---------------------------------------------------------------------------
# correlations and strategies
# ---------------------------------------------------------------------------


def correlation_to_dict(p: Correlation) -> dict:
    return {
        "kind": "correlation",
        "d": p.d,
        "table": p.table.tolist(),
        "quantum_generated": p.quantum_generated,
    }


def correlation_from_dict(doc: dict) -> Correlation:
    return Correlation(
        d=int(_require(doc, "d", "correlation")),
        table=np.array(_require(doc, "table", "correlation"), dtype=float),
        quantum_generated=bool(doc.get("quantum_generated", False)),
    )


def strategy_to_dict(s: QuantumStrategy) -> dict:
    return {
        "kind": "strategy",
        "d": s.d,
        "dA": s.dA,
        "dB": s.dB,
        "state": complex_vector_to_lists(s.state),
        "alice_pvms": [[complex_matrix_to_lists(p) for p in pvm] for pvm in s.alice_pvms],
        "bob_pvms": [[complex_matrix_to_lists(p) for p in pvm] for pvm in s.bob_pvms],
    }


def strategy_from_dict(doc: dict) -> QuantumStrategy:
    return QuantumStrategy(
        d=int(_require(doc, "d", "strategy")),
        dA=int(_require(doc, "dA", "strategy")),
        dB=int(_require(doc, "dB", "strategy")),
        state=complex_vector_from_lists(_require(doc, "state", "strategy"), "state"),
        alice_pvms=tuple(
            tuple(complex_matrix_from_lists(p, "projector") for p in pvm)
            for pvm in _require(doc, "alice_pvms", "strategy")
        ),
        bob_pvms=tuple(
            tuple(complex_matrix_from_lists(p, "projector") for p in pvm)
            for pvm in _require(doc, "bob_pvms", "strategy")
        ),
    )


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------


def tilted_spec_to_dict(spec: TiltedSpec) -> dict:
    return {
        "c": list(spec.c),
        "theta": list(spec.theta),
        "alpha": list(spec.alpha),
        "i_alpha": list(spec.i_alpha),
        "mu": list(spec.mu),
        "theta_prime": list(spec.theta_prime),
        "alpha_prime": list(spec.alpha_prime),
        "i_alpha_prime": list(spec.i_alpha_prime),
        "mu_prime": list(spec.mu_prime),
    }


def tilted_spec_from_dict(doc: dict) -> TiltedSpec:
    fields = {}
    for key in (
        "c",
        "theta",
        "alpha",
        "i_alpha",
        "mu",
        "theta_prime",
        "alpha_prime",
        "i_alpha_prime",
        "mu_prime",
    ):
        fields[key] = tuple(float(v) for v in _require(doc, key, "tilted spec"))
    return TiltedSpec(**fields)


def functional_to_dict(f: BellFunctional) -> dict:
    return {
        "kind": "functional",
        "d": f.d,
        "epsilon": f.epsilon,
        "variant": f.variant.value,
        "mode": f.mode.value,
        "coeff": f.coeff.tolist(),
        "tilted_spec": None if f.tilted_spec is None else tilted_spec_to_dict(f.tilted_spec),
    }


def functional_from_dict(doc: dict) -> BellFunctional:
    spec_doc = doc.get("tilted_spec")
    return BellFunctional(
        d=int(_require(doc, "d", "functional")),
        epsilon=float(_require(doc, "epsilon", "functional")),
        variant=Variant(_require(doc, "variant", "functional")),
        mode=CrossDiagonalMode(_require(doc, "mode", "functional")),
        coeff=np.array(_require(doc, "coeff", "functional"), dtype=float),
        tilted_spec=None if spec_doc is None else tilted_spec_from_dict(spec_doc),
    )


# ---------------------------------------------------------------------------
# results and reports (one-way)
# ---------------------------------------------------------------------------


def block_weights_to_dict(w: BlockWeights) -> dict:
    return {
        "w": list(w.w),
        "w_prime": list(w.w_prime),
        "leftover": list(w.leftover),
        "consistency_residual": w.consistency_residual,
    }


def report_to_dict(report: SelfTestReport) -> dict:
    return {
        "kind": "selftest_report",
        "d": report.d,
        "variant": report.variant.value,
        "bell_value": report.bell_value,
        "bound": report.bound,
        "cross_mass": report.cross_mass,
        "weights": block_weights_to_dict(report.weights),
        "block_deviation": report.block_deviation,
        "checks": [
            {
                "name": c.name,
                "passed": c.passed,
                "measured": c.measured,
                "tolerance": c.tolerance,
            }
            for c in report.checks
        ],
        "passed": report.passed,
        "verdict": report.verdict,
    }


def classical_result_to_dict(result: ClassicalMaxResult) -> dict:
    return {
        "kind": "classical_max",
        "value": result.value,
        "argmax": [{"fA": list(s.fA), "fB": list(s.fB)} for s in result.argmax],
        "strategies_scanned": result.strategies_scanned,
        "reference_bound": result.reference_bound,
        "note": result.note,
    }


def seesaw_result_to_dict(result: SeesawResult, include_strategy: bool = True) -> dict:
    doc = {
        "kind": "seesaw_result",
        "best_value": result.best_value,
        "best_restart": result.best_restart,
        "converged": list(result.converged),
        "trajectory": [list(t) for t in result.trajectory],
    }
    if include_strategy:
        doc["best_strategy"] = strategy_to_dict(result.best_strategy)
    return doc


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def write_json_atomic(path: str | Path, doc: dict) -> None:
    """Serialize ``doc`` to ``path`` via a same-directory temp file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            json.dump(doc, handle, indent=2)
            handle.write("\n")
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def read_json(path: str | Path) -> dict:
    try:
        with open(path) as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"expected a JSON object in {path}, got {type(doc).__name__}")
    return doc
