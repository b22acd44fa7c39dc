"""Functional construction, sub-functional values, cross sets, tilted parameters."""

import math

import numpy as np
import pytest

from chshd import (
    BellFunctional,
    Correlation,
    CrossDiagonalMode,
    InputError,
    ShapeMismatchError,
    TiltedSpec,
    Variant,
    build_maxent,
    build_tilted,
    chsh_m_value,
    chsh_prime_m_value,
    classical_reference_bound,
    correlation_from_deterministic,
    cross_sets,
    cross_value,
    evaluate,
    n_blocks,
    quantum_bound,
    tchsh_m_value,
    tchsh_prime_m_value,
)
from chshd import DeterministicStrategy
from chshd.functionals import ODD_BONUS, PLAIN_QUESTIONS, PRIMED_QUESTIONS

from oracles import qubit_chsh_table

LIN_TOL = 1e-12
SQRT2 = math.sqrt(2.0)


def random_table(d, rng, nx=3, ny=4):
    """Random correlation table, normalized per question pair (signaling allowed)."""
    t = rng.random((nx, ny, d, d))
    t /= t.sum(axis=(2, 3), keepdims=True)
    return Correlation(d=d, table=t)


def embed_qubit_chsh(d):
    """Ideal qubit CHSH in block 0 of the plain questions, leftovers elsewhere zero."""
    table = np.zeros((3, 4, d, d))
    table[:2, :2, :2, :2] = qubit_chsh_table()
    # fill the remaining question pairs with a fixed in-block distribution
    for x in range(3):
        for y in range(4):
            if x < 2 and y < 2:
                continue
            table[x, y, 0, 0] = 1.0
    return Correlation(d=d, table=table)


# ---------------------------------------------------------------------------
# block values against hand-counted signs
# ---------------------------------------------------------------------------


def test_chsh_m_value_on_ideal_qubit_block():
    p = embed_qubit_chsh(2)
    assert chsh_m_value(p, 0) == pytest.approx(2 * SQRT2, abs=1e-12)


def test_chsh_m_value_on_deterministic_tables():
    # fA = fB = 0 on the block questions: all four pairs hit (0,0), sign (-1)^(xy).
    p = correlation_from_deterministic(DeterministicStrategy((0, 0, 0), (0, 0, 0, 0)), d=2)
    assert chsh_m_value(p, 0) == pytest.approx(2.0)
    # flipping Bob's answer for y=1 makes signs (+,-,+,+) -> value 2 again
    p = correlation_from_deterministic(DeterministicStrategy((0, 0, 0), (0, 1, 0, 0)), d=2)
    assert chsh_m_value(p, 0) == pytest.approx(2.0)
    # all-ones: signs (+,+,+,-)(a=b=1) -> 1+1+1-1 = 2
    p = correlation_from_deterministic(DeterministicStrategy((1, 1, 1), (1, 1, 1, 1)), d=2)
    assert chsh_m_value(p, 0) == pytest.approx(2.0)


def test_chsh_prime_m_value_wraparound_block_even_d():
    # d=4, primed block m=1 couples labels {3, 4}, i.e. answers {3, 0}.
    # Deterministic a=b=0 (label 4): sign (-1)^(4+4+f g) = (-1)^(f g).
    p = correlation_from_deterministic(DeterministicStrategy((0, 0, 0), (0, 0, 0, 0)), d=4)
    assert chsh_prime_m_value(p, 1) == pytest.approx(2.0)
    # a=b=3 (label 3): sign (-1)^(3+3+f g) = (-1)^(f g) -> also 2.
    p = correlation_from_deterministic(DeterministicStrategy((3, 3, 3), (3, 3, 3, 3)), d=4)
    assert chsh_prime_m_value(p, 1) == pytest.approx(2.0)
    # a=3 (label 3), b=0 (label 4): sign (-1)^(3+4+f g) = -(-1)^(f g) -> -2.
    p = correlation_from_deterministic(DeterministicStrategy((3, 3, 3), (0, 0, 0, 0)), d=4)
    assert chsh_prime_m_value(p, 1) == pytest.approx(-2.0)


def test_block_value_range_checks():
    p = random_table(4, np.random.default_rng(0))
    with pytest.raises(InputError):
        chsh_m_value(p, 2)
    with pytest.raises(InputError):
        chsh_prime_m_value(p, -1)


def test_tchsh_m_value_adds_marginal():
    rng = np.random.default_rng(1)
    p = random_table(2, rng)
    base = chsh_m_value(p, 0)
    marg = float(p.table[0, 0, 0, :].sum() - p.table[0, 0, 1, :].sum())
    assert tchsh_m_value(p, 0, 0.7) == pytest.approx(base + 0.7 * marg, abs=LIN_TOL)
    assert tchsh_m_value(p, 0, -0.7) == pytest.approx(base - 0.7 * marg, abs=LIN_TOL)
    with pytest.raises(InputError):
        tchsh_m_value(p, 0, 2.0)


def test_tchsh_prime_m_value_uses_label_marginals():
    rng = np.random.default_rng(2)
    p = random_table(4, rng)
    base = chsh_prime_m_value(p, 1)
    marg = float(p.table[0, 0, 3, :].sum() - p.table[0, 0, 0, :].sum())
    assert tchsh_prime_m_value(p, 1, 0.3) == pytest.approx(base + 0.3 * marg, abs=LIN_TOL)


# ---------------------------------------------------------------------------
# cross sets
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "d,mode,plain_pairs,primed_pairs",
    [
        (2, CrossDiagonalMode.EXCLUDE, 0, 0),
        (3, CrossDiagonalMode.EXCLUDE, 4, 4),
        (3, CrossDiagonalMode.INCLUDE, 5, 5),
        (4, CrossDiagonalMode.EXCLUDE, 8, 8),
        (5, CrossDiagonalMode.EXCLUDE, 16, 16),
        (6, CrossDiagonalMode.EXCLUDE, 24, 24),
    ],
)
def test_cross_set_sizes(d, mode, plain_pairs, primed_pairs):
    c, c_prime = cross_sets(d, mode)
    assert len(c) == 4 * plain_pairs  # four question pairs per answer pair
    assert len(c_prime) == 4 * primed_pairs


def test_cross_sets_exclude_drops_leftover_diagonals():
    c_ex, cp_ex = cross_sets(3, CrossDiagonalMode.EXCLUDE)
    c_in, cp_in = cross_sets(3, CrossDiagonalMode.INCLUDE)
    assert {(a, b) for a, b, _, _ in c_in - c_ex} == {(2, 2)}
    assert {(a, b) for a, b, _, _ in cp_in - cp_ex} == {(0, 0)}


def test_cross_value_on_uniform_d4():
    p = Correlation(d=4, table=np.full((3, 4, 4, 4), 1 / 16))
    assert cross_value(p, "C") == pytest.approx(2.0, abs=LIN_TOL)
    assert cross_value(p, "Cprime") == pytest.approx(2.0, abs=LIN_TOL)


def test_cross_value_counts_deterministic_hits():
    # d=4, fA=0, fB=2: (0,2) is outside every plain and primed block.
    p = correlation_from_deterministic(DeterministicStrategy((0, 0, 0), (2, 2, 2, 2)), d=4)
    assert cross_value(p, "C") == pytest.approx(4.0)
    assert cross_value(p, "Cprime") == pytest.approx(4.0)


def test_cross_value_selector_validation():
    p = random_table(3, np.random.default_rng(3))
    with pytest.raises(InputError):
        cross_value(p, "Cboth")


# ---------------------------------------------------------------------------
# builders: structure and decomposition identity
# ---------------------------------------------------------------------------


def test_maxent_coefficients_spot_checks():
    f = build_maxent(4, 0.25)
    c = f.coeff
    assert c[0, 0, 0, 0] == 1.0 and c[0, 0, 0, 1] == -1.0
    assert c[1, 1, 0, 0] == -1.0  # xy = 1 flips the block sign
    assert c[0, 0, 0, 2] == -0.25  # cross pair
    assert c[0, 2, 1, 2] == -1.0  # primed block m=0, labels (1,2), f g = 0
    assert c[2, 3, 1, 2] == 1.0  # f g = 1 flips it
    assert c[0, 2, 3, 0] == -1.0  # wraparound block m=1, labels (3,4)
    assert c[1, 0, 0, 0] == 1.0
    assert np.all(c[:, :, :, :][1, 2:] == 0)  # question pairs outside both groups


def test_maxent_d2_has_no_primed_or_cross_terms():
    f = build_maxent(2, 0.7)
    assert np.all(f.coeff[2] == 0)
    assert np.all(f.coeff[:, 2:] == 0)
    assert set(np.unique(f.coeff[:2, :2])) == {-1.0, 1.0}


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6, 7])
@pytest.mark.parametrize("mode", list(CrossDiagonalMode))
def test_maxent_decomposition_identity(d, mode):
    """evaluate == sum of blocks - eps * cross + bonus * leftovers, on random tables."""
    rng = np.random.default_rng(10 * d)
    eps = 0.37
    f = build_maxent(d, eps, mode)
    for _ in range(10):
        p = random_table(d, rng)
        expected = sum(chsh_m_value(p, m) for m in range(n_blocks(d)))
        if d > 2:
            expected += sum(chsh_prime_m_value(p, m) for m in range(n_blocks(d)))
        expected -= eps * (cross_value(p, "C", mode) + cross_value(p, "Cprime", mode))
        if d % 2:
            expected += ODD_BONUS * sum(
                float(p.table[x, y, d - 1, d - 1]) for x, y in PLAIN_QUESTIONS
            )
            expected += ODD_BONUS * sum(float(p.table[x, y, 0, 0]) for x, y in PRIMED_QUESTIONS)
        assert evaluate(f, p) == pytest.approx(expected, abs=LIN_TOL)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_tilted_decomposition_identity(d):
    rng = np.random.default_rng(20 + d)
    eps = 0.21
    c = rng.random(d) + 0.2
    c /= np.linalg.norm(c)
    f = build_tilted(tuple(c), eps)
    spec = f.tilted_spec
    for _ in range(10):
        t = rng.random((3, 4, d, d))
        t /= t.sum(axis=(2, 3), keepdims=True)
        # symmetrize marginals so the table is no-signaling in the y-direction:
        # use a product table q(a|x) r(b|y) which is trivially no-signaling.
        qa = rng.random((3, d))
        qa /= qa.sum(axis=1, keepdims=True)
        rb = rng.random((4, d))
        rb /= rb.sum(axis=1, keepdims=True)
        table = np.einsum("xa,yb->xyab", qa, rb)
        p = Correlation(d=d, table=table)
        expected = sum(
            tchsh_m_value(p, m, spec.alpha[m]) / spec.i_alpha[m] for m in range(n_blocks(d))
        )
        if d > 2:
            expected += sum(
                tchsh_prime_m_value(p, m, spec.alpha_prime[m]) / spec.i_alpha_prime[m]
                for m in range(n_blocks(d))
            )
        expected -= eps * (cross_value(p, "C") + cross_value(p, "Cprime"))
        if d % 2:
            expected += 0.25 * sum(float(p.table[x, y, d - 1, d - 1]) for x, y in PLAIN_QUESTIONS)
            expected += 0.25 * sum(float(p.table[x, y, 0, 0]) for x, y in PRIMED_QUESTIONS)
        assert evaluate(f, p) == pytest.approx(expected, abs=LIN_TOL)


def test_evaluate_is_linear():
    rng = np.random.default_rng(30)
    f = build_maxent(3, 0.5)
    for _ in range(20):
        p = random_table(3, rng)
        q = random_table(3, rng)
        lam = float(rng.random())
        mix = Correlation(d=3, table=lam * p.table + (1 - lam) * q.table)
        expected = lam * evaluate(f, p) + (1 - lam) * evaluate(f, q)
        assert evaluate(f, mix) == pytest.approx(expected, abs=LIN_TOL)


def test_tilted_uniform_matches_rescaled_maxent():
    """At uniform coefficients the tilted tensor is the plain one divided by 2 sqrt 2."""
    for d in (2, 3, 4, 5, 6):
        eps = 0.11
        uniform = (1.0 / math.sqrt(d),) * d
        tilted = build_tilted(uniform, eps)
        plain = build_maxent(d, eps * 2 * SQRT2)
        assert np.max(np.abs(tilted.coeff - plain.coeff / (2 * SQRT2))) < LIN_TOL


def test_epsilon_guards():
    with pytest.raises(InputError):
        build_maxent(3, 0.0)
    with pytest.raises(InputError):
        build_maxent(3, -0.1)
    with pytest.raises(InputError):
        build_maxent(3, -0.1, allow_zero_epsilon=True)
    f = build_maxent(3, 0.0, allow_zero_epsilon=True)
    assert f.epsilon == 0.0
    with pytest.raises(InputError):
        build_tilted((0.8, 0.6), 0.0)


def test_build_rejects_small_d():
    with pytest.raises(InputError):
        build_maxent(1, 0.1)


def test_functional_variant_and_shape():
    f = build_maxent(3, 0.1)
    assert f.variant is Variant.MAXENT and f.d == 3 and f.coeff.shape == (3, 4, 3, 3)
    with pytest.raises(ValueError):
        f.coeff[0, 0, 0, 0] = 5.0
    with pytest.raises(ShapeMismatchError):
        BellFunctional(d=3, epsilon=0.1, variant=Variant.MAXENT,
                       mode=CrossDiagonalMode.EXCLUDE, coeff=np.zeros((3, 4, 2, 2)))


def test_evaluate_shape_and_ns_guards():
    f = build_maxent(3, 0.1)
    with pytest.raises(ShapeMismatchError):
        evaluate(f, random_table(2, np.random.default_rng(0)))
    with pytest.raises(ShapeMismatchError):
        evaluate(f, random_table(3, np.random.default_rng(0), nx=2, ny=2))
    ft = build_tilted((0.8, 0.6), 0.1)
    signaling = random_table(2, np.random.default_rng(1))  # generic table signals
    with pytest.raises(InputError):
        evaluate(ft, signaling)


# ---------------------------------------------------------------------------
# tilted parameters
# ---------------------------------------------------------------------------


def test_alpha_at_pi_over_8():
    theta = math.pi / 8
    spec = TiltedSpec.from_coefficients((math.cos(theta), math.sin(theta)))
    assert spec.alpha[0] == pytest.approx(2.0 / math.sqrt(3.0), abs=1e-12)
    assert spec.alpha[0] == pytest.approx(1.1547005383792517, abs=1e-12)


def test_alpha_signed_when_second_coefficient_dominates():
    spec = TiltedSpec.from_coefficients((0.6, 0.8))
    assert spec.alpha[0] < 0
    assert abs(spec.alpha[0]) < 2


def test_alpha_roundtrip_identity():
    rng = np.random.default_rng(40)
    for _ in range(25):
        d = int(rng.integers(2, 7))
        c = rng.random(d) + 0.1
        c /= np.linalg.norm(c)
        spec = TiltedSpec.from_coefficients(tuple(c))
        for theta, alpha in zip(spec.theta + spec.theta_prime, spec.alpha + spec.alpha_prime):
            lhs = math.sin(2 * theta)
            rhs = math.sqrt((4 - alpha**2) / (4 + alpha**2))
            assert lhs == pytest.approx(rhs, abs=1e-12)
            assert spec.d == d


def test_tilted_spec_rejects_bad_coefficients():
    with pytest.raises(InputError):
        TiltedSpec.from_coefficients((0.9, 0.9))  # not normalized
    with pytest.raises(InputError):
        TiltedSpec.from_coefficients((1.0, 0.0))  # boundary coefficient
    with pytest.raises(InputError):
        TiltedSpec.from_coefficients((-0.6, 0.8))  # negative
    with pytest.raises(InputError):
        TiltedSpec.from_coefficients((1.0,))  # d < 2


def test_mu_is_arctan_sin_two_theta():
    spec = TiltedSpec.from_coefficients((0.8, 0.6))
    theta = math.atan2(0.6, 0.8)
    assert spec.mu[0] == pytest.approx(math.atan(math.sin(2 * theta)), abs=1e-15)
    assert spec.i_alpha[0] == pytest.approx(math.sqrt(8 + 2 * spec.alpha[0] ** 2), abs=1e-15)


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def test_bounds():
    assert quantum_bound(2) == pytest.approx(2 * SQRT2)
    for d in range(3, 9):
        assert quantum_bound(d) == pytest.approx(4 * SQRT2)
    assert classical_reference_bound(2) == 2.0
    for d in range(3, 9):
        assert classical_reference_bound(d) == 4.0


def test_uniform_table_value_d3_is_bonus_only():
    """Blocks cancel on a uniform table; only the odd-d bonus survives."""
    f = build_maxent(3, 0.0, allow_zero_epsilon=True)
    p = Correlation(d=3, table=np.full((3, 4, 3, 3), 1 / 9))
    assert evaluate(f, p) == pytest.approx(4 * SQRT2 / 9, abs=LIN_TOL)
