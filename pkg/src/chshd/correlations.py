"""Data model for two-party boxes: correlations and the strategies producing them.

A correlation is the conditional probability table ``p(a, b | x, y)`` of joint
answers for Alice question ``x`` and Bob question ``y``.  The full scenario
used throughout the package has 3 Alice questions, 4 Bob questions and ``d``
answers per party; 2x2-question restrictions (single CHSH blocks, coarse
grained strategies) reuse the same container with a smaller table.

Strategies come in three flavours:

* :class:`QuantumStrategy` -- a shared pure state plus one projective
  measurement (a list of ``d`` projectors) per question.
* :class:`ChshStrategy` -- the two-question, two-outcome analogue produced by
  the coarse-graining reductions.
* :class:`DeterministicStrategy` -- fixed answer assignments ``fA``, ``fB``.

All containers are immutable after construction: arrays are copied in and
marked read-only, so values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalIntegrityError, ShapeMismatchError

#: Default tolerance for generation/validation checks.
VALIDATION_TOL = 1e-9

#: Tolerated imaginary residue on Born-rule probabilities.
IMAG_TOL = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array)
    out.flags.writeable = False
    return out


def _frozen_matrix(array, dim: int, what: str) -> np.ndarray:
    out = np.array(array, dtype=complex)
    if out.shape != (dim, dim):
        raise ShapeMismatchError(f"{what} must be a {dim}x{dim} matrix, got shape {out.shape}")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Correlation:
    """Conditional probability table ``p(a, b | x, y)``.

    Attributes:
        d: number of answers per party.
        table: real tensor of shape ``(nx, ny, d, d)`` indexed ``[x, y, a, b]``.
        quantum_generated: set when the table was produced by the Born rule
            from a :class:`QuantumStrategy`; enables the no-signaling check in
            :func:`validate_correlation` by default.
    """

    d: int
    table: np.ndarray
    quantum_generated: bool = False

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim != 4:
            raise ShapeMismatchError(f"correlation table must have 4 axes, got {table.ndim}")
        if table.shape[2] != self.d or table.shape[3] != self.d:
            raise ShapeMismatchError(
                f"answer axes must both have length d={self.d}, got shape {table.shape}"
            )
        table.flags.writeable = False
        object.__setattr__(self, "table", table)

    @property
    def nx(self) -> int:
        return self.table.shape[0]

    @property
    def ny(self) -> int:
        return self.table.shape[1]


@dataclass(frozen=True)
class QuantumStrategy:
    """Pure state and projective measurements for the 3x4-question scenario.

    Attributes:
        d: number of answers per question (projectors per measurement).
        dA, dB: local Hilbert-space dimensions (default ``d`` each).
        state: unit vector of length ``dA * dB``, Alice index major.
        alice_pvms: ``alice_pvms[x][a]`` is Alice's projector for answer ``a``
            to question ``x`` (3 questions).
        bob_pvms: ``bob_pvms[y][b]`` likewise for Bob (4 questions).
    """

    d: int
    dA: int
    dB: int
    state: np.ndarray
    alice_pvms: tuple[tuple[np.ndarray, ...], ...]
    bob_pvms: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        state = np.array(self.state, dtype=complex).reshape(-1)
        if state.shape != (self.dA * self.dB,):
            raise ShapeMismatchError(
                f"state must have length dA*dB={self.dA * self.dB}, got {state.shape[0]}"
            )
        state.flags.writeable = False
        object.__setattr__(self, "state", state)
        object.__setattr__(
            self, "alice_pvms", _freeze_pvms(self.alice_pvms, 3, self.d, self.dA, "alice_pvms")
        )
        object.__setattr__(
            self, "bob_pvms", _freeze_pvms(self.bob_pvms, 4, self.d, self.dB, "bob_pvms")
        )


@dataclass(frozen=True)
class ChshStrategy:
    """Two-question, two-outcome strategy, as produced by the CHSH reductions."""

    dA: int
    dB: int
    state: np.ndarray
    alice_pvms: tuple[tuple[np.ndarray, ...], ...]
    bob_pvms: tuple[tuple[np.ndarray, ...], ...]
    d: int = field(default=2, init=False)

    def __post_init__(self):
        state = np.array(self.state, dtype=complex).reshape(-1)
        if state.shape != (self.dA * self.dB,):
            raise ShapeMismatchError(
                f"state must have length dA*dB={self.dA * self.dB}, got {state.shape[0]}"
            )
        state.flags.writeable = False
        object.__setattr__(self, "state", state)
        object.__setattr__(
            self, "alice_pvms", _freeze_pvms(self.alice_pvms, 2, 2, self.dA, "alice_pvms")
        )
        object.__setattr__(
            self, "bob_pvms", _freeze_pvms(self.bob_pvms, 2, 2, self.dB, "bob_pvms")
        )


def _freeze_pvms(pvms, n_questions: int, n_answers: int, dim: int, what: str):
    if len(pvms) != n_questions:
        raise ShapeMismatchError(f"{what} must list {n_questions} measurements, got {len(pvms)}")
    out = []
    for q, pvm in enumerate(pvms):
        if len(pvm) != n_answers:
            raise ShapeMismatchError(
                f"{what}[{q}] must list {n_answers} projectors, got {len(pvm)}"
            )
        out.append(tuple(_frozen_matrix(p, dim, f"{what}[{q}][{a}]") for a, p in enumerate(pvm)))
    return tuple(out)


@dataclass(frozen=True)
class DeterministicStrategy:
    """Classical strategy: fixed answers ``fA[x]`` for Alice and ``fB[y]`` for Bob."""

    fA: tuple[int, int, int]
    fB: tuple[int, int, int, int]

    def __post_init__(self):
        fA = tuple(int(v) for v in self.fA)
        fB = tuple(int(v) for v in self.fB)
        if len(fA) != 3:
            raise ShapeMismatchError(f"fA must assign answers to 3 questions, got {len(fA)}")
        if len(fB) != 4:
            raise ShapeMismatchError(f"fB must assign answers to 4 questions, got {len(fB)}")
        if any(v < 0 for v in fA + fB):
            raise InputError("deterministic answers must be non-negative integers")
        object.__setattr__(self, "fA", fA)
        object.__setattr__(self, "fB", fB)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """One violated invariant: what, where, and by how much."""

    kind: str
    location: tuple
    magnitude: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def worst(self, kind: str | None = None) -> float:
        """Largest violation magnitude, optionally restricted to one kind."""
        mags = [v.magnitude for v in self.violations if kind is None or v.kind == kind]
        return max(mags, default=0.0)


def no_signaling_residual(p: Correlation) -> float:
    """Largest deviation of either party's marginals across the other's questions."""
    alice = p.table.sum(axis=3)  # (nx, ny, d), marginal of a given x, per y
    bob = p.table.sum(axis=2)  # (nx, ny, d), marginal of b given y, per x
    res_a = np.abs(alice.max(axis=1) - alice.min(axis=1)).max() if p.ny > 1 else 0.0
    res_b = np.abs(bob.max(axis=0) - bob.min(axis=0)).max() if p.nx > 1 else 0.0
    return float(max(res_a, res_b))


def validate_correlation(
    p: Correlation,
    tol: float = VALIDATION_TOL,
    *,
    check_no_signaling: bool | None = None,
) -> ValidationReport:
    """Check range, normalization and (optionally) no-signaling of a table.

    Args:
        p: correlation to validate.
        tol: numeric tolerance for every check.
        check_no_signaling: run the marginal-consistency check.  ``None``
            (default) runs it exactly when ``p.quantum_generated`` is set.

    Returns:
        a :class:`ValidationReport` listing every violated invariant with its
        location and magnitude; an empty list means the table is valid.
    """
    if check_no_signaling is None:
        check_no_signaling = p.quantum_generated
    violations: list[Violation] = []
    table = p.table

    for idx in zip(*np.nonzero(table < -tol)):
        violations.append(Violation("negative_entry", tuple(int(i) for i in idx), float(-table[idx])))
    for idx in zip(*np.nonzero(table > 1 + tol)):
        violations.append(
            Violation("entry_above_one", tuple(int(i) for i in idx), float(table[idx] - 1))
        )

    sums = table.sum(axis=(2, 3))
    for x in range(p.nx):
        for y in range(p.ny):
            defect = abs(sums[x, y] - 1.0)
            if defect > tol:
                violations.append(Violation("normalization", (x, y), float(defect)))

    if check_no_signaling:
        alice = table.sum(axis=3)
        for x in range(p.nx):
            spread = alice[x].max(axis=0) - alice[x].min(axis=0)
            for a in np.nonzero(spread > tol)[0]:
                violations.append(
                    Violation("no_signaling_alice", (x, int(a)), float(spread[a]))
                )
        bob = table.sum(axis=2)
        for y in range(p.ny):
            spread = bob[:, y].max(axis=0) - bob[:, y].min(axis=0)
            for b in np.nonzero(spread > tol)[0]:
                violations.append(Violation("no_signaling_bob", (y, int(b)), float(spread[b])))

    return ValidationReport(tuple(violations))


def validate_strategy(s: QuantumStrategy | ChshStrategy, tol: float = VALIDATION_TOL) -> ValidationReport:
    """Check that a strategy's state is normalized and its measurements are PVMs.

    Projector defects are measured in Frobenius norm: ``P^2 - P``, ``P - P†``,
    pairwise products ``P_i P_j`` and the completeness defect ``sum(P) - I``.
    """
    violations: list[Violation] = []
    norm_defect = abs(float(np.linalg.norm(s.state)) - 1.0)
    if norm_defect > tol:
        violations.append(Violation("state_norm", (), norm_defect))

    for party, pvms, dim in (("alice", s.alice_pvms, s.dA), ("bob", s.bob_pvms, s.dB)):
        eye = np.eye(dim)
        for q, pvm in enumerate(pvms):
            total = np.zeros((dim, dim), dtype=complex)
            for a, proj in enumerate(pvm):
                total = total + proj
                herm = float(np.linalg.norm(proj - proj.conj().T))
                if herm > tol:
                    violations.append(Violation("projector_hermitian", (party, q, a), herm))
                idem = float(np.linalg.norm(proj @ proj - proj))
                if idem > tol:
                    violations.append(Violation("projector_idempotent", (party, q, a), idem))
            comp = float(np.linalg.norm(total - eye))
            if comp > tol:
                violations.append(Violation("pvm_completeness", (party, q), comp))
            for a in range(len(pvm)):
                for b in range(a + 1, len(pvm)):
                    orth = float(np.linalg.norm(pvm[a] @ pvm[b]))
                    if orth > tol:
                        violations.append(Violation("pvm_orthogonality", (party, q, a, b), orth))
    return ValidationReport(tuple(violations))


# ---------------------------------------------------------------------------
# correlation generation
# ---------------------------------------------------------------------------


def correlation_from_quantum(
    s: QuantumStrategy | ChshStrategy, *, imag_tol: float = IMAG_TOL
) -> Correlation:
    """Born-rule table ``p(a, b | x, y) = <psi| PA_x^a (x) PB_y^b |psi>``.

    Raises:
        NumericalIntegrityError: if any probability carries an imaginary
            residue above ``imag_tol``.
    """
    psi = s.state.reshape(s.dA, s.dB)
    nx, ny, d = len(s.alice_pvms), len(s.bob_pvms), s.d
    table = np.empty((nx, ny, d, d))
    worst_imag = 0.0
    for x in range(nx):
        for a in range(d):
            # G[j, k] = <psi| (PA (x) |j><k|) |psi>, so p = sum(G * PB).
            gram = psi.conj().T @ (s.alice_pvms[x][a] @ psi)
            for y in range(ny):
                for b in range(d):
                    val = np.sum(gram * s.bob_pvms[y][b])
                    worst_imag = max(worst_imag, abs(float(val.imag)))
                    table[x, y, a, b] = float(val.real)
    if worst_imag > imag_tol:
        raise NumericalIntegrityError(
            f"Born probabilities carry imaginary residue {worst_imag:.3e} > {imag_tol:.3e}"
        )
    return Correlation(d=d, table=table, quantum_generated=True)


def correlation_from_deterministic(s: DeterministicStrategy, d: int) -> Correlation:
    """0/1 table of the deterministic strategy ``s`` in the d-answer scenario."""
    if any(v >= d for v in s.fA) or any(v >= d for v in s.fB):
        raise InputError(f"deterministic answers must lie in 0..{d - 1}: fA={s.fA}, fB={s.fB}")
    table = np.zeros((3, 4, d, d))
    for x in range(3):
        for y in range(4):
            table[x, y, s.fA[x], s.fB[y]] = 1.0
    return Correlation(d=d, table=table)
