"""See-saw maximization of Bell functionals and CHSH coarse-graining reductions.

The optimizer alternates two exact coordinate steps:

* *state step* -- replace the state by the principal eigenvector of the Bell
  operator assembled from the current measurements;
* *measurement step* -- for each party and question, coordinate-ascent over
  answer pairs: the restriction of the objective to one pair of projectors is
  a two-outcome discrimination problem whose optimum is the split of the
  pair's subspace into the non-negative/negative eigenspaces of the restricted
  gain difference.

Both steps can only increase the objective, so trajectories are monotone
non-decreasing up to round-off.  All randomness flows from a single seed;
restarts draw independent child generators from it, so identical seed and
configuration reproduce trajectories bitwise on one platform.

The reduction operations coarse-grain a d-outcome strategy on questions
``x, y in {0, 1}`` into a two-outcome CHSH strategy.  For even ``d`` the two
answers of block ``m >= 1`` may be swapped before merging, controlled by a
sign vector ``o``; the CHSH value of the reduced strategy then equals the sum
of the block values plus a signed cross-term contribution ``C(o)``
(:func:`cross_contribution`).  :func:`greedy_sign_selection` picks ``o`` block
by block so that ``C(o) >= 0``.  For odd ``d`` the leftover answer ``d - 1``
is routed to a fresh shared EPR pair measured with the ideal CHSH qubit
measurements, which adds ``sqrt(2)/2 * sum_{x,y} p(d-1, d-1 | x, y)`` to the
same identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .correlations import (
    ChshStrategy,
    Correlation,
    QuantumStrategy,
    correlation_from_quantum,
)
from .errors import InputError
from .functionals import BellFunctional, Variant, chsh_m_value
from .ideal import ideal_maxent_strategy, ideal_tilted_strategy

#: Slack allowed on trajectory monotonicity (round-off only).
ASCENT_SLACK = 1e-10

_DEGENERACY_TOL = 1e-12
_RANK_TOL = 0.5  # eigenvalues of a projector sum above this count as range
_PAIR_PASSES = 30  # cap on coordinate-ascent passes within one measurement


class InitKind(str, Enum):
    RANDOM = "random"
    IDEAL_PERTURBED = "ideal-perturbed"


@dataclass(frozen=True)
class SeesawConfig:
    """Optimizer settings.

    ``dA``/``dB`` default to the functional's ``d``.  ``init_noise`` is the
    perturbation strength used by :attr:`InitKind.IDEAL_PERTURBED`.
    """

    dA: int | None = None
    dB: int | None = None
    restarts: int = 8
    max_iters: int = 200
    convergence_tol: float = 1e-10
    seed: int = 0
    init: InitKind = InitKind.RANDOM
    init_noise: float = 1e-2

    def __post_init__(self):
        if self.restarts < 1:
            raise InputError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iters < 1:
            raise InputError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.convergence_tol <= 0:
            raise InputError(f"convergence_tol must be positive, got {self.convergence_tol}")
        if self.init_noise < 0:
            raise InputError(f"init_noise must be non-negative, got {self.init_noise}")


@dataclass(frozen=True)
class SeesawResult:
    """Best strategy over restarts, with the full per-restart value trajectories."""

    best_value: float
    best_strategy: QuantumStrategy
    best_restart: int
    trajectory: tuple[tuple[float, ...], ...]
    converged: tuple[bool, ...]


# ---------------------------------------------------------------------------
# random strategies
# ---------------------------------------------------------------------------


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary (QR of a complex Gaussian with phase fix)."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r).copy()
    return q * (diag / np.abs(diag))


def _basis_pvm(dim: int, n_answers: int) -> list[np.ndarray]:
    """Computational-basis PVM; the last answer absorbs any extra dimensions."""
    sizes = [1] * (n_answers - 1) + [dim - n_answers + 1]
    pvm, start = [], 0
    for size in sizes:
        proj = np.zeros((dim, dim), dtype=complex)
        for k in range(start, start + size):
            proj[k, k] = 1.0
        pvm.append(proj)
        start += size
    return pvm


def random_strategy(
    d: int, rng: np.random.Generator, dA: int | None = None, dB: int | None = None
) -> QuantumStrategy:
    """Haar-random strategy: rotated basis PVMs and a Haar-random pure state."""
    dA = d if dA is None else dA
    dB = d if dB is None else dB
    if dA < d or dB < d:
        raise InputError(f"local dimensions must be at least d={d}, got dA={dA}, dB={dB}")

    def rotated(dim: int) -> tuple[np.ndarray, ...]:
        u = haar_unitary(dim, rng)
        return tuple(u @ p @ u.conj().T for p in _basis_pvm(dim, d))

    alice = tuple(rotated(dA) for _ in range(3))
    bob = tuple(rotated(dB) for _ in range(4))
    state = rng.standard_normal(dA * dB) + 1j * rng.standard_normal(dA * dB)
    state /= np.linalg.norm(state)
    return QuantumStrategy(d=d, dA=dA, dB=dB, state=state, alice_pvms=alice, bob_pvms=bob)


def _perturbation_unitary(dim: int, noise: float, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (g + g.conj().T) / (2 * math.sqrt(dim))
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(1j * noise * vals)) @ vecs.conj().T


def _perturbed_ideal(f: BellFunctional, noise: float, rng: np.random.Generator) -> QuantumStrategy:
    base = (
        ideal_tilted_strategy(f.tilted_spec)
        if f.variant is Variant.TILTED and f.tilted_spec is not None
        else ideal_maxent_strategy(f.d)
    )

    def jiggle(pvms, dim):
        out = []
        for pvm in pvms:
            u = _perturbation_unitary(dim, noise, rng)
            out.append(tuple(u @ p @ u.conj().T for p in pvm))
        return tuple(out)

    state = base.state + noise * (
        rng.standard_normal(base.state.shape) + 1j * rng.standard_normal(base.state.shape)
    )
    state /= np.linalg.norm(state)
    return QuantumStrategy(
        d=base.d,
        dA=base.dA,
        dB=base.dB,
        state=state,
        alice_pvms=jiggle(base.alice_pvms, base.dA),
        bob_pvms=jiggle(base.bob_pvms, base.dB),
    )


# ---------------------------------------------------------------------------
# operator assembly and exact coordinate steps
# ---------------------------------------------------------------------------


def bell_operator_matrix(f: BellFunctional, s: QuantumStrategy) -> np.ndarray:
    """Hermitian matrix ``sum coeff[x,y,a,b] PA_x^a (x) PB_y^b`` on C^dA (x) C^dB."""
    if s.d != f.d:
        raise InputError(f"dimension mismatch: functional d={f.d}, strategy d={s.d}")
    return _operator(f.coeff, s.alice_pvms, s.bob_pvms, s.dA, s.dB)


def _operator(coeff, alice, bob, dA, dB) -> np.ndarray:
    d = coeff.shape[2]
    m = np.zeros((dA * dB, dA * dB), dtype=complex)
    for x in range(3):
        for a in range(d):
            w = _bob_gain_operator(coeff, bob, x, a, dB)
            if np.any(w):
                m += np.kron(alice[x][a], w)
    return m


def _bob_gain_operator(coeff, bob, x: int, a: int, dB: int) -> np.ndarray:
    w = np.zeros((dB, dB), dtype=complex)
    for y in range(coeff.shape[1]):
        for b in range(coeff.shape[3]):
            c = coeff[x, y, a, b]
            if c:
                w += c * bob[y][b]
    return w


def principal_eigenvector(
    m: np.ndarray, degeneracy_tol: float = _DEGENERACY_TOL
) -> tuple[np.ndarray, float]:
    """Top eigenpair with a deterministic tie-break under degeneracy.

    Within the top eigenspace the returned vector is the normalized projection
    of the lexicographically first computational basis vector with
    non-negligible overlap, so the choice does not depend on LAPACK's basis of
    a degenerate eigenspace.
    """
    vals, vecs = np.linalg.eigh(m)
    top = float(vals[-1])
    space = vecs[:, vals >= top - degeneracy_tol]
    for k in range(m.shape[0]):
        proj = space @ space[k, :].conj()
        norm = float(np.linalg.norm(proj))
        if norm > 1e-8:
            return proj / norm, top  # component k is real positive by construction
    return vecs[:, -1], top


def _alice_gains(coeff, psi_mat, bob, x: int, dB: int) -> list[np.ndarray]:
    """Hermitian matrices L with objective contribution Tr[PA_x^a L_a]."""
    gains = []
    for a in range(coeff.shape[2]):
        w = _bob_gain_operator(coeff, bob, x, a, dB)
        gains.append(psi_mat @ w.T @ psi_mat.conj().T)
    return gains


def _bob_gains(coeff, psi_mat, alice, y: int, dA: int) -> list[np.ndarray]:
    gains = []
    for b in range(coeff.shape[3]):
        w = np.zeros((dA, dA), dtype=complex)
        for x in range(3):
            for a in range(coeff.shape[2]):
                c = coeff[x, y, a, b]
                if c:
                    w += c * alice[x][a]
        gains.append(psi_mat.T @ w.T @ psi_mat.conj())
    return gains


def _pair_ascent(pvm: list[np.ndarray], gains: list[np.ndarray], tol: float) -> None:
    """Coordinate ascent over projector pairs for one question, in place."""
    d = len(pvm)
    for _ in range(_PAIR_PASSES):
        pass_gain = 0.0
        for a in range(d):
            for b in range(a + 1, d):
                q = pvm[a] + pvm[b]
                qvals, qvecs = np.linalg.eigh(q)
                basis = qvecs[:, qvals > _RANK_TOL]
                if basis.shape[1] == 0:
                    continue
                diff = basis.conj().T @ (gains[a] - gains[b]) @ basis
                diff = (diff + diff.conj().T) / 2
                dvals, dvecs = np.linalg.eigh(diff)
                keep = basis @ dvecs[:, dvals > 0.0]
                drop = basis @ dvecs[:, dvals <= 0.0]
                new_a = keep @ keep.conj().T
                new_b = drop @ drop.conj().T
                old = _pair_value(pvm[a], gains[a]) + _pair_value(pvm[b], gains[b])
                new = _pair_value(new_a, gains[a]) + _pair_value(new_b, gains[b])
                pvm[a], pvm[b] = new_a, new_b
                pass_gain += new - old
        if pass_gain < tol:
            return


def _pair_value(proj: np.ndarray, gain: np.ndarray) -> float:
    return float(np.einsum("ij,ji->", proj, gain).real)


def _objective(coeff, psi_mat, alice, bob, dB) -> float:
    total = 0.0
    for x in range(3):
        for a, gain in enumerate(_alice_gains(coeff, psi_mat, bob, x, dB)):
            total += _pair_value(alice[x][a], gain)
    return total


def seesaw(f: BellFunctional, config: SeesawConfig = SeesawConfig()) -> SeesawResult:
    """Alternating-ascent maximization of ``f`` over states and PVMs.

    Restarts are independent (they only share the seed sequence) and are
    merged deterministically: best value wins, ties go to the lowest restart
    index.
    """
    dA = config.dA if config.dA is not None else f.d
    dB = config.dB if config.dB is not None else f.d
    if dA < f.d or dB < f.d:
        raise InputError(f"local dimensions must be at least d={f.d}, got dA={dA}, dB={dB}")
    if config.init is InitKind.IDEAL_PERTURBED and (dA != f.d or dB != f.d):
        raise InputError("ideal-perturbed initialization requires dA == dB == d")

    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    best_value, best_strategy, best_restart = -math.inf, None, -1
    trajectories: list[tuple[float, ...]] = []
    converged_flags: list[bool] = []

    for r, seq in enumerate(seeds):
        rng = np.random.default_rng(seq)
        if config.init is InitKind.RANDOM:
            start = random_strategy(f.d, rng, dA, dB)
        else:
            start = _perturbed_ideal(f, config.init_noise, rng)
        alice = [[np.array(p) for p in pvm] for pvm in start.alice_pvms]
        bob = [[np.array(p) for p in pvm] for pvm in start.bob_pvms]
        psi = np.array(start.state)

        trajectory: list[float] = []
        converged = False
        for _ in range(config.max_iters):
            operator = _operator(f.coeff, alice, bob, dA, dB)
            psi, _ = principal_eigenvector(operator)
            psi_mat = psi.reshape(dA, dB)
            for x in range(3):
                _pair_ascent(alice[x], _alice_gains(f.coeff, psi_mat, bob, x, dB), config.convergence_tol)
            for y in range(4):
                _pair_ascent(bob[y], _bob_gains(f.coeff, psi_mat, alice, y, dA), config.convergence_tol)
            value = _objective(f.coeff, psi_mat, alice, bob, dB)
            trajectory.append(value)
            if len(trajectory) > 1 and abs(trajectory[-1] - trajectory[-2]) < config.convergence_tol:
                converged = True
                break
        trajectories.append(tuple(trajectory))
        converged_flags.append(converged)

        final_value = trajectory[-1]
        if final_value > best_value:
            best_value = final_value
            best_restart = r
            best_strategy = QuantumStrategy(
                d=f.d,
                dA=dA,
                dB=dB,
                state=psi,
                alice_pvms=tuple(tuple(p for p in pvm) for pvm in alice),
                bob_pvms=tuple(tuple(p for p in pvm) for pvm in bob),
            )

    assert best_strategy is not None
    return SeesawResult(
        best_value=best_value,
        best_strategy=best_strategy,
        best_restart=best_restart,
        trajectory=tuple(trajectories),
        converged=tuple(converged_flags),
    )


# ---------------------------------------------------------------------------
# CHSH coarse-graining reductions
# ---------------------------------------------------------------------------


def _check_sign_vector(d: int, o: Sequence[int]) -> tuple[int, ...]:
    o = tuple(int(v) for v in o)
    expected = d // 2 - 1
    if len(o) != expected:
        raise InputError(f"sign vector must have length {expected} for d={d}, got {len(o)}")
    if any(v not in (0, 1) for v in o):
        raise InputError(f"sign vector entries must be bits, got {o}")
    return o


def _merged_bit(a: int, o: tuple[int, ...]) -> int:
    """Coarse outcome of paired answer ``a``: its parity, flipped by the block's sign bit."""
    m = a // 2
    return (a % 2) ^ (o[m - 1] if m >= 1 else 0)


def chsh_value(s: ChshStrategy) -> float:
    """CHSH value of a two-question, two-outcome strategy."""
    return chsh_m_value(correlation_from_quantum(s), 0)


def chsh_reduction_even(s: QuantumStrategy, o: Sequence[int]) -> ChshStrategy:
    """Merge block answers into two coarse outcomes (even d), per sign vector ``o``.

    Coarse outcome 0 collects answers ``0`` and ``2m + o[m]`` (m >= 1), coarse
    outcome 1 the rest, identically for both parties; questions are
    ``x, y in {0, 1}`` and the state is unchanged.
    """
    if s.d % 2:
        raise InputError(f"even-d reduction requires even d, got {s.d}")
    o = _check_sign_vector(s.d, o)

    def merge(pvm, dim):
        coarse = [np.zeros((dim, dim), dtype=complex) for _ in range(2)]
        for a in range(s.d):
            coarse[_merged_bit(a, o)] += pvm[a]
        return tuple(coarse)

    return ChshStrategy(
        dA=s.dA,
        dB=s.dB,
        state=s.state,
        alice_pvms=tuple(merge(s.alice_pvms[x], s.dA) for x in (0, 1)),
        bob_pvms=tuple(merge(s.bob_pvms[y], s.dB) for y in (0, 1)),
    )


def chsh_reduction_odd(s: QuantumStrategy, o: Sequence[int]) -> ChshStrategy:
    """Coarse-grain an odd-d strategy, routing answer ``d - 1`` to a fresh EPR pair.

    Answers ``0..d-2`` merge as in the even case.  On the event that a party
    answers ``d - 1`` it instead measures its half of an appended EPR pair
    with the ideal CHSH qubit measurements, so the coarse projectors are
    ``merged (x) I + P^{d-1} (x) P_qubit``.
    """
    if s.d % 2 == 0:
        raise InputError(f"odd-d reduction requires odd d, got {s.d}")
    o = _check_sign_vector(s.d, o)
    qubit = ideal_maxent_strategy(2)

    def lift(pvm, qubit_pvm, dim):
        coarse = [np.zeros((dim, dim), dtype=complex) for _ in range(2)]
        for a in range(s.d - 1):
            coarse[_merged_bit(a, o)] += pvm[a]
        eye = np.eye(2)
        return tuple(
            np.kron(coarse[t], eye) + np.kron(pvm[s.d - 1], qubit_pvm[t]) for t in range(2)
        )

    epr = np.eye(2) / math.sqrt(2)
    psi_mat = np.kron(s.state.reshape(s.dA, s.dB), epr)
    return ChshStrategy(
        dA=2 * s.dA,
        dB=2 * s.dB,
        state=psi_mat.reshape(-1),
        alice_pvms=tuple(lift(s.alice_pvms[x], qubit.alice_pvms[x], s.dA) for x in (0, 1)),
        bob_pvms=tuple(lift(s.bob_pvms[y], qubit.bob_pvms[y], s.dB) for y in (0, 1)),
    )


def cross_contribution(p: Correlation, o: Sequence[int]) -> float:
    """Signed cross-term contribution ``C(o)`` appearing in the reduction identity.

    Sums ``(-1)^(bit(a) + bit(b) + x*y) p(a, b | x, y)`` over questions
    ``x, y in {0, 1}`` and paired answers ``a, b`` lying in different blocks
    (the odd-d leftover answer is excluded: its contribution averages out
    against the EPR pair).
    """
    o = _check_sign_vector(p.d, o)
    paired = 2 * (p.d // 2)
    total = 0.0
    for x in (0, 1):
        for y in (0, 1):
            for a in range(paired):
                for b in range(paired):
                    if a // 2 == b // 2:
                        continue
                    sign = -1.0 if (_merged_bit(a, o) + _merged_bit(b, o) + x * y) % 2 else 1.0
                    total += sign * p.table[x, y, a, b]
    return total


def greedy_sign_selection(s: QuantumStrategy) -> tuple[int, ...]:
    """Choose the sign vector block by block so that ``C(o) >= 0``.

    For m = 1, 2, ... the contribution of cross terms between block m and all
    earlier blocks flips sign with ``o[m]``, so picking the non-negative
    option (ties resolve to 0) makes the total a sum of non-negative parts.
    """
    p = correlation_from_quantum(s)
    d = s.d
    n = d // 2
    bits = [0] * n  # chosen coarse-flip bit per block
    for m in range(1, n):
        partial = 0.0
        for x in (0, 1):
            for y in (0, 1):
                for m_prev in range(m):
                    for a in (2 * m, 2 * m + 1):
                        for b in (2 * m_prev, 2 * m_prev + 1):
                            sign_ab = -1.0 if (a % 2) ^ bits[m] ^ (b % 2) ^ bits[m_prev] ^ (x * y % 2) else 1.0
                            partial += sign_ab * (p.table[x, y, a, b] + p.table[x, y, b, a])
        if partial < 0:
            bits[m] = 1
    return tuple(bits[1:])
