"""Construction and evaluation of the d-outcome CHSH-like Bell functionals.

The scenario has Alice questions ``x in {0,1,2}``, Bob questions
``y in {0,1,2,3}`` and answers ``0..d-1`` per party.  A functional is a real
coefficient tensor ``coeff[x, y, a, b]``; its value on a correlation is the
plain inner product with the probability table.

Two families are provided:

* the *plain* family (:func:`build_maxent`), whose maximum self-tests the
  maximally entangled state of local dimension ``d``;
* the *tilted* family (:func:`build_tilted`), aimed at states with arbitrary
  Schmidt coefficients ``c_0..c_{d-1}``.

Both are assembled from per-block two-outcome pieces:

* ``CHSH_m`` couples answers ``{2m, 2m+1}`` on questions ``x, y in {0, 1}``
  with the familiar sign ``(-1)^(a + b + x*y)``.
* ``CHSH'_m`` couples answer labels ``{2m+1, 2m+2}`` (labels taken mod ``d``,
  so for even ``d`` the last block wraps around to answers ``{d-1, 0}``) on
  questions ``x in {0, 2}``, ``y in {2, 3}``.  The questions are relabelled
  ``f(0)=0, f(2)=1`` and ``g(2)=0, g(3)=1`` and the sign exponent uses the
  un-reduced labels, which is equivalent to using answer parities since a
  label and its mod-``d`` reduction share parity.

Answer pairs outside the blocks ("cross terms") are penalized with weight
``-epsilon``.  For odd ``d`` one answer per family sits outside every block;
its diagonal probabilities earn a bonus instead, and by default
(:attr:`CrossDiagonalMode.EXCLUDE`) the pairs ``(d-1, d-1)`` and ``(0, 0)``
are removed from the penalized sets so the ideal strategy is not charged for
its leftover mass.  :attr:`CrossDiagonalMode.INCLUDE` keeps them penalized.

Marginal ("tilt") terms are realized through the ``y = 0`` column, so tilted
functionals are only meaningful on no-signaling correlations; :func:`evaluate`
enforces this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Literal, Sequence

import numpy as np

from .correlations import Correlation, no_signaling_residual
from .errors import InputError, ShapeMismatchError

#: Questions carrying the plain blocks and the relabelled blocks, respectively.
PLAIN_QUESTIONS = tuple(product((0, 1), (0, 1)))
PRIMED_QUESTIONS = tuple(product((0, 2), (2, 3)))

#: Bonus coefficient on the leftover diagonal for odd d (plain family).
ODD_BONUS = math.sqrt(2.0) / 2.0

#: No-signaling tolerance applied when evaluating tilted functionals.
NS_TOL = 1e-7

_COEFF_TOL = 1e-9  # tolerance on |sum c_i^2 - 1| and on TiltedSpec round trips


class Variant(str, Enum):
    MAXENT = "maxent"
    TILTED = "tilted"


class CrossDiagonalMode(str, Enum):
    """Treatment of the odd-d leftover diagonal pairs in the cross sets."""

    EXCLUDE = "exclude"
    INCLUDE = "include"


def n_blocks(d: int) -> int:
    """Number of two-answer blocks per family."""
    return d // 2


def block_answer_pairs(d: int, primed: bool = False) -> tuple[tuple[int, int], ...]:
    """Ordered answer pair of each block; primed blocks wrap mod d for even d."""
    if primed:
        return tuple(((2 * m + 1) % d, (2 * m + 2) % d) for m in range(d // 2))
    return tuple((2 * m, 2 * m + 1) for m in range(d // 2))


def quantum_bound(d: int) -> float:
    """Largest quantum value of the plain functional (proved for even d)."""
    return 2.0 * math.sqrt(2.0) * (2 if d > 2 else 1)


def classical_reference_bound(d: int) -> float:
    """Classical bound of the plain functional for even d (see classical_max notes)."""
    return 2.0 * (2 if d > 2 else 1)


def _check_d(d: int) -> None:
    if d < 2:
        raise InputError(f"local dimension must satisfy d >= 2, got {d}")


def _check_full_scenario(p: Correlation, need_primed: bool) -> None:
    if p.nx < 2 or p.ny < 2:
        raise ShapeMismatchError(f"correlation must cover questions x,y in {{0,1}}, got {p.nx}x{p.ny}")
    if need_primed and (p.nx < 3 or p.ny < 4):
        raise ShapeMismatchError(
            f"correlation must cover 3 Alice and 4 Bob questions, got {p.nx}x{p.ny}"
        )


def _check_block(d: int, m: int) -> None:
    if not 0 <= m < n_blocks(d):
        raise InputError(f"block index m={m} out of range for d={d} (0..{n_blocks(d) - 1})")


# ---------------------------------------------------------------------------
# sub-functional values
# ---------------------------------------------------------------------------


def chsh_m_value(p: Correlation, m: int) -> float:
    """Value of the block functional CHSH_m on ``p``.

    ``sum_{x,y in {0,1}} sum_{a,b in {2m, 2m+1}} (-1)^(a + b + x*y) p(a,b|x,y)``.
    """
    _check_full_scenario(p, need_primed=False)
    _check_block(p.d, m)
    total = 0.0
    for x, y in PLAIN_QUESTIONS:
        for a in (2 * m, 2 * m + 1):
            for b in (2 * m, 2 * m + 1):
                sign = -1.0 if (a + b + x * y) % 2 else 1.0
                total += sign * p.table[x, y, a, b]
    return float(total)


def chsh_prime_m_value(p: Correlation, m: int) -> float:
    """Value of the relabelled block functional CHSH'_m on ``p``.

    Labels ``2m+1, 2m+2`` keep their parity in the sign exponent; the observed
    answers are the labels reduced mod d.
    """
    _check_full_scenario(p, need_primed=True)
    _check_block(p.d, m)
    d = p.d
    total = 0.0
    for x, y in PRIMED_QUESTIONS:
        fx, gy = x // 2, y - 2
        for la in (2 * m + 1, 2 * m + 2):
            for lb in (2 * m + 1, 2 * m + 2):
                sign = -1.0 if (la + lb + fx * gy) % 2 else 1.0
                total += sign * p.table[x, y, la % d, lb % d]
    return float(total)


def tchsh_m_value(p: Correlation, m: int, alpha: float) -> float:
    """Tilted block value ``alpha * [p(2m|x=0) - p(2m+1|x=0)] + CHSH_m``.

    The marginal is read from the ``y = 0`` column, which is unambiguous for
    no-signaling correlations.  ``alpha`` may be negative; its sign selects
    which of the two block answers the marginal term rewards.
    """
    if not -2.0 < alpha < 2.0:
        raise InputError(f"tilt parameter must satisfy |alpha| < 2, got {alpha}")
    _check_block(p.d, m)
    marg = p.table[0, 0, 2 * m, :].sum() - p.table[0, 0, 2 * m + 1, :].sum()
    return alpha * float(marg) + chsh_m_value(p, m)


def tchsh_prime_m_value(p: Correlation, m: int, alpha: float) -> float:
    """Tilted relabelled block value; marginal answers are ``2m+1`` and ``2m+2 mod d``."""
    if not -2.0 < alpha < 2.0:
        raise InputError(f"tilt parameter must satisfy |alpha| < 2, got {alpha}")
    _check_block(p.d, m)
    d = p.d
    u, v = (2 * m + 1) % d, (2 * m + 2) % d
    marg = p.table[0, 0, u, :].sum() - p.table[0, 0, v, :].sum()
    return alpha * float(marg) + chsh_prime_m_value(p, m)


# ---------------------------------------------------------------------------
# cross terms
# ---------------------------------------------------------------------------


def cross_sets(
    d: int, mode: CrossDiagonalMode = CrossDiagonalMode.EXCLUDE
) -> tuple[frozenset, frozenset]:
    """The penalized index sets ``(C, C')`` as sets of ``(a, b, x, y)`` tuples.

    ``C`` covers questions ``{0,1}^2`` and answer pairs outside every plain
    block; ``C'`` covers ``{0,2} x {2,3}`` and pairs outside every primed
    block.  In EXCLUDE mode (odd d only) the leftover diagonal pairs
    ``(d-1, d-1)`` and ``(0, 0)`` are dropped from ``C`` and ``C'``.
    """
    _check_d(d)
    plain_pairs = {(a, a + 1) for a, _ in block_answer_pairs(d)}
    in_plain = {(a, b) for lo, hi in block_answer_pairs(d) for a in (lo, hi) for b in (lo, hi)}
    in_primed = {(a, b) for u, v in block_answer_pairs(d, primed=True) for a in (u, v) for b in (u, v)}
    cross_plain = {(a, b) for a in range(d) for b in range(d) if (a, b) not in in_plain}
    cross_primed = {(a, b) for a in range(d) for b in range(d) if (a, b) not in in_primed}
    if d % 2 == 1 and mode is CrossDiagonalMode.EXCLUDE:
        cross_plain.discard((d - 1, d - 1))
        cross_primed.discard((0, 0))
    c = frozenset((a, b, x, y) for (a, b) in cross_plain for x, y in PLAIN_QUESTIONS)
    c_prime = frozenset((a, b, x, y) for (a, b) in cross_primed for x, y in PRIMED_QUESTIONS)
    return c, c_prime


def cross_value(
    p: Correlation,
    which: Literal["C", "Cprime"],
    mode: CrossDiagonalMode = CrossDiagonalMode.EXCLUDE,
) -> float:
    """Total probability mass of ``p`` on one of the penalized sets."""
    if which not in ("C", "Cprime"):
        raise InputError(f"cross set selector must be 'C' or 'Cprime', got {which!r}")
    _check_full_scenario(p, need_primed=which == "Cprime")
    c, c_prime = cross_sets(p.d, mode)
    chosen = c if which == "C" else c_prime
    return float(sum(p.table[x, y, a, b] for (a, b, x, y) in chosen))


# ---------------------------------------------------------------------------
# tilted parameters
# ---------------------------------------------------------------------------


def _alpha_from_theta(theta: float) -> float:
    """Tilt strength with ``sin 2theta = sqrt((4 - a^2) / (4 + a^2))``.

    Signed: positive for theta < pi/4 (first coefficient dominant), negative
    for theta > pi/4, so that the block's marginal term always rewards the
    heavier answer.
    """
    s, c = math.sin(2 * theta), math.cos(2 * theta)
    return 2.0 * c / math.sqrt(1.0 + s * s)


@dataclass(frozen=True)
class TiltedSpec:
    """Derived per-block parameters of a tilted functional.

    All arrays have one entry per block (``d // 2``).  ``theta[m]`` is the
    block angle ``arctan(c_{2m+1} / c_{2m})``; ``alpha`` is the tilt strength,
    ``i_alpha = sqrt(8 + 2 alpha^2)`` the corresponding quantum maximum used
    for normalization, and ``mu = arctan(sin 2 theta)`` Bob's ideal
    measurement angle.  The ``_prime`` arrays are the primed-block analogues
    with ``theta_prime[m] = arctan(c_{(2m+2) mod d} / c_{2m+1})``.

    ``alpha`` entries are signed: negative exactly when the block's second
    coefficient exceeds its first, which keeps the normalized block maximum
    attainable by the target state.  ``|alpha| < 2`` always, and the round
    trip ``sin 2 theta = sqrt((4 - alpha^2) / (4 + alpha^2))`` holds for
    every block.
    """

    c: tuple[float, ...]
    theta: tuple[float, ...]
    alpha: tuple[float, ...]
    i_alpha: tuple[float, ...]
    mu: tuple[float, ...]
    theta_prime: tuple[float, ...]
    alpha_prime: tuple[float, ...]
    i_alpha_prime: tuple[float, ...]
    mu_prime: tuple[float, ...]

    @property
    def d(self) -> int:
        return len(self.c)

    @classmethod
    def from_coefficients(cls, c: Sequence[float], tol: float = _COEFF_TOL) -> TiltedSpec:
        c = tuple(float(v) for v in c)
        d = len(c)
        _check_d(d)
        if any(not 0.0 < v < 1.0 for v in c):
            raise InputError(f"state coefficients must lie strictly in (0, 1), got {c}")
        norm_defect = abs(sum(v * v for v in c) - 1.0)
        if norm_defect > tol:
            raise InputError(
                f"state coefficients must be normalized: |sum c_i^2 - 1| = {norm_defect:.3e} > {tol:.3e}"
            )
        theta, theta_prime = [], []
        for m in range(d // 2):
            theta.append(math.atan2(c[2 * m + 1], c[2 * m]))
            theta_prime.append(math.atan2(c[(2 * m + 2) % d], c[2 * m + 1]))
        alpha = [_alpha_from_theta(t) for t in theta]
        alpha_prime = [_alpha_from_theta(t) for t in theta_prime]
        return cls(
            c=c,
            theta=tuple(theta),
            alpha=tuple(alpha),
            i_alpha=tuple(math.sqrt(8.0 + 2.0 * a * a) for a in alpha),
            mu=tuple(math.atan(math.sin(2 * t)) for t in theta),
            theta_prime=tuple(theta_prime),
            alpha_prime=tuple(alpha_prime),
            i_alpha_prime=tuple(math.sqrt(8.0 + 2.0 * a * a) for a in alpha_prime),
            mu_prime=tuple(math.atan(math.sin(2 * t)) for t in theta_prime),
        )


# ---------------------------------------------------------------------------
# functional container and builders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BellFunctional:
    """A linear functional on correlations, stored as its coefficient tensor."""

    d: int
    epsilon: float
    variant: Variant
    mode: CrossDiagonalMode
    coeff: np.ndarray
    tilted_spec: TiltedSpec | None = None

    def __post_init__(self):
        coeff = np.array(self.coeff, dtype=float)
        if coeff.shape != (3, 4, self.d, self.d):
            raise ShapeMismatchError(
                f"coefficient tensor must have shape (3, 4, {self.d}, {self.d}), got {coeff.shape}"
            )
        coeff.flags.writeable = False
        object.__setattr__(self, "coeff", coeff)


def _check_epsilon(epsilon: float, allow_zero_epsilon: bool) -> None:
    if epsilon < 0 or (epsilon == 0 and not allow_zero_epsilon):
        raise InputError(
            f"cross-term penalty must be positive, got {epsilon}; "
            "pass allow_zero_epsilon=True (research use) to permit 0"
        )


def _add_block_terms(coeff: np.ndarray, d: int) -> None:
    """Plain-block CHSH signs on questions {0,1}^2."""
    for m in range(d // 2):
        for x, y in PLAIN_QUESTIONS:
            for a in (2 * m, 2 * m + 1):
                for b in (2 * m, 2 * m + 1):
                    coeff[x, y, a, b] += -1.0 if (a + b + x * y) % 2 else 1.0


def _add_primed_block_terms(coeff: np.ndarray, d: int) -> None:
    for m in range(d // 2):
        for x, y in PRIMED_QUESTIONS:
            fx, gy = x // 2, y - 2
            for la in (2 * m + 1, 2 * m + 2):
                for lb in (2 * m + 1, 2 * m + 2):
                    coeff[x, y, la % d, lb % d] += -1.0 if (la + lb + fx * gy) % 2 else 1.0


def _add_cross_and_bonus(
    coeff: np.ndarray, d: int, epsilon: float, mode: CrossDiagonalMode, bonus: float
) -> None:
    c, c_prime = cross_sets(d, mode)
    for a, b, x, y in c | c_prime:
        coeff[x, y, a, b] -= epsilon
    if d % 2 == 1:
        for x, y in PLAIN_QUESTIONS:
            coeff[x, y, d - 1, d - 1] += bonus
        for x, y in PRIMED_QUESTIONS:
            coeff[x, y, 0, 0] += bonus


def build_maxent(
    d: int,
    epsilon: float,
    mode: CrossDiagonalMode = CrossDiagonalMode.EXCLUDE,
    *,
    allow_zero_epsilon: bool = False,
) -> BellFunctional:
    """Functional targeting the maximally entangled state of local dimension d.

    ``sum_m CHSH_m  (+ sum_m CHSH'_m for d > 2)  - epsilon (CROSS + CROSS')``,
    plus, for odd d, the bonus ``sqrt(2)/2`` on the leftover diagonal
    probabilities ``p(d-1, d-1 | x, y in {0,1})`` and ``p(0, 0 | x in {0,2},
    y in {2,3})``.
    """
    _check_d(d)
    _check_epsilon(epsilon, allow_zero_epsilon)
    coeff = np.zeros((3, 4, d, d))
    _add_block_terms(coeff, d)
    if d > 2:
        _add_primed_block_terms(coeff, d)
    _add_cross_and_bonus(coeff, d, epsilon, mode, ODD_BONUS)
    return BellFunctional(d=d, epsilon=float(epsilon), variant=Variant.MAXENT, mode=mode, coeff=coeff)


def build_tilted(
    c: Sequence[float],
    epsilon: float,
    mode: CrossDiagonalMode = CrossDiagonalMode.EXCLUDE,
    *,
    allow_zero_epsilon: bool = False,
) -> BellFunctional:
    """Functional targeting the state with Schmidt coefficients ``c``.

    Each block contributes its tilted CHSH piece normalized by its own quantum
    maximum: ``sum_m (1 / i_alpha[m]) tCHSH_m(alpha[m])`` plus the primed
    analogue for d > 2, ``- epsilon (CROSS + CROSS')``, and for odd d a bonus
    of ``1/4`` on the leftover diagonals.  At uniform coefficients every tilt
    vanishes and the non-cross part equals the plain functional divided by
    ``2 sqrt(2)``.
    """
    spec = TiltedSpec.from_coefficients(c)
    d = spec.d
    _check_epsilon(epsilon, allow_zero_epsilon)
    coeff = np.zeros((3, 4, d, d))
    for m in range(d // 2):
        scale = 1.0 / spec.i_alpha[m]
        for x, y in PLAIN_QUESTIONS:
            for a in (2 * m, 2 * m + 1):
                for b in (2 * m, 2 * m + 1):
                    sign = -1.0 if (a + b + x * y) % 2 else 1.0
                    coeff[x, y, a, b] += scale * sign
        # Marginal tilt, realized through the y = 0 column.
        coeff[0, 0, 2 * m, :] += scale * spec.alpha[m]
        coeff[0, 0, 2 * m + 1, :] -= scale * spec.alpha[m]
    if d > 2:
        for m in range(d // 2):
            scale = 1.0 / spec.i_alpha_prime[m]
            for x, y in PRIMED_QUESTIONS:
                fx, gy = x // 2, y - 2
                for la in (2 * m + 1, 2 * m + 2):
                    for lb in (2 * m + 1, 2 * m + 2):
                        sign = -1.0 if (la + lb + fx * gy) % 2 else 1.0
                        coeff[x, y, la % d, lb % d] += scale * sign
            coeff[0, 0, (2 * m + 1) % d, :] += scale * spec.alpha_prime[m]
            coeff[0, 0, (2 * m + 2) % d, :] -= scale * spec.alpha_prime[m]
    _add_cross_and_bonus(coeff, d, epsilon, mode, 0.25)
    return BellFunctional(
        d=d,
        epsilon=float(epsilon),
        variant=Variant.TILTED,
        mode=mode,
        coeff=coeff,
        tilted_spec=spec,
    )


def evaluate(f: BellFunctional, p: Correlation, *, ns_tol: float = NS_TOL) -> float:
    """Value of the functional on a correlation (plain inner product).

    Tilted functionals embed marginal terms in the ``y = 0`` column, so they
    are only evaluated on no-signaling tables; inputs whose no-signaling
    residual exceeds ``ns_tol`` are rejected.
    """
    if p.d != f.d:
        raise ShapeMismatchError(f"dimension mismatch: functional d={f.d}, correlation d={p.d}")
    if p.nx != 3 or p.ny != 4:
        raise ShapeMismatchError(f"correlation must cover the 3x4-question scenario, got {p.nx}x{p.ny}")
    if f.variant is Variant.TILTED:
        residual = no_signaling_residual(p)
        if residual > ns_tol:
            raise InputError(
                f"tilted functionals require no-signaling input: residual {residual:.3e} > {ns_tol:.3e}"
            )
    return float(np.tensordot(f.coeff, p.table, axes=4))
