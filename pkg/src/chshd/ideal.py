"""Reference strategies that attain the functionals' target values.

All measurements act within two-dimensional answer blocks, so every projector
is assembled from the closed-form eigenvectors of
``cos(mu) sigma_Z + sin(mu) sigma_X`` rather than a general eigensolver:

* ``+1`` eigenvector ``(cos(mu/2), sin(mu/2))``,
* ``-1`` eigenvector ``(sin(mu/2), -cos(mu/2))``,

both real with a non-negative first component (the fixed phase convention).

The plain ideal strategy measures, per block, ``sigma_Z`` (x = 0, the
computational basis), ``sigma_X`` (x = 1 on plain blocks, x = 2 on primed
blocks) and ``(sigma_Z +- sigma_X)/sqrt(2)`` for Bob, on the maximally
entangled state.  For odd ``d`` the leftover answers get the rank-one
projectors ``|d-1><d-1|`` (plain family) and ``|0><0|`` (primed family).
The tilted strategy keeps Alice unchanged, replaces the state by
``sum_i c_i |ii>`` and rotates Bob's block angles to ``mu_m``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .correlations import Correlation, QuantumStrategy, correlation_from_quantum
from .errors import InputError
from .functionals import TiltedSpec, block_answer_pairs, n_blocks


def pair_projectors(mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenprojectors of ``cos(mu) sigma_Z + sin(mu) sigma_X`` onto +-1."""
    plus = np.array([math.cos(mu / 2), math.sin(mu / 2)])
    minus = np.array([math.sin(mu / 2), -math.cos(mu / 2)])
    return np.outer(plus, plus).astype(complex), np.outer(minus, minus).astype(complex)


def embed_pair(d: int, pair: tuple[int, int], block: np.ndarray) -> np.ndarray:
    """Place a 2x2 matrix on the ordered basis pair ``(|i>, |j>)`` of C^d."""
    i, j = pair
    out = np.zeros((d, d), dtype=complex)
    out[i, i], out[i, j] = block[0, 0], block[0, 1]
    out[j, i], out[j, j] = block[1, 0], block[1, 1]
    return out


def _basis_projector(d: int, i: int) -> np.ndarray:
    out = np.zeros((d, d), dtype=complex)
    out[i, i] = 1.0
    return out


def _blockwise_pvm(
    d: int,
    primed: bool,
    mu_of_block: Sequence[float],
    leftover: int | None,
) -> tuple[np.ndarray, ...]:
    """PVM assigning each block's +1/-1 eigenprojectors to its two answers."""
    projectors: list[np.ndarray | None] = [None] * d
    for m, pair in enumerate(block_answer_pairs(d, primed=primed)):
        plus, minus = pair_projectors(mu_of_block[m])
        projectors[pair[0]] = embed_pair(d, pair, plus)
        projectors[pair[1]] = embed_pair(d, pair, minus)
    if leftover is not None:
        projectors[leftover] = _basis_projector(d, leftover)
    assert all(p is not None for p in projectors)
    return tuple(projectors)  # type: ignore[arg-type]


def _assemble_strategy(d: int, state: np.ndarray, mu, mu_prime) -> QuantumStrategy:
    odd = d % 2 == 1
    plain_leftover = d - 1 if odd else None
    primed_leftover = 0 if odd else None
    blocks = n_blocks(d)
    alice = (
        _blockwise_pvm(d, False, [0.0] * blocks, plain_leftover),  # computational basis
        _blockwise_pvm(d, False, [math.pi / 2] * blocks, plain_leftover),  # sigma_X per block
        _blockwise_pvm(d, True, [math.pi / 2] * blocks, primed_leftover),
    )
    bob = (
        _blockwise_pvm(d, False, list(mu), plain_leftover),
        _blockwise_pvm(d, False, [-v for v in mu], plain_leftover),
        _blockwise_pvm(d, True, list(mu_prime), primed_leftover),
        _blockwise_pvm(d, True, [-v for v in mu_prime], primed_leftover),
    )
    return QuantumStrategy(d=d, dA=d, dB=d, state=state, alice_pvms=alice, bob_pvms=bob)


@lru_cache(maxsize=None)
def ideal_maxent_strategy(d: int) -> QuantumStrategy:
    """Optimal strategy for the plain functional: maximally entangled state,
    per-block CHSH measurements (Bob at angles +-pi/4)."""
    if d < 2:
        raise InputError(f"local dimension must satisfy d >= 2, got {d}")
    state = (np.eye(d) / math.sqrt(d)).reshape(-1).astype(complex)
    blocks = n_blocks(d)
    return _assemble_strategy(d, state, [math.pi / 4] * blocks, [math.pi / 4] * blocks)


@lru_cache(maxsize=None)
def ideal_maxent_correlation(d: int) -> Correlation:
    return correlation_from_quantum(ideal_maxent_strategy(d))


def ideal_tilted_strategy(spec: TiltedSpec) -> QuantumStrategy:
    """Strategy attaining the tilted functional's target value.

    The state is ``sum_i c_i |ii>``; Alice measures as in the plain case and
    Bob's block angles are ``mu_m = arctan(sin 2 theta_m)`` (primed blocks
    analogously).  Every block then reaches its normalized maximum regardless
    of which of its two coefficients dominates, because the tilt strengths
    are signed accordingly.
    """
    d = spec.d
    state = np.diag(spec.c).reshape(-1).astype(complex)
    return _assemble_strategy(d, state, spec.mu, spec.mu_prime)


def ideal_tilted_correlation(spec: TiltedSpec) -> Correlation:
    return correlation_from_quantum(ideal_tilted_strategy(spec))
