"""Bell functionals certifying maximally entangled states of any local dimension.

The package builds CHSH-like functionals for the 3-question/4-question,
d-answer scenario, computes their exact classical maxima, generates the ideal
quantum strategies attaining the quantum bound, optimizes generic strategies
by alternating ascent, and verifies the rigid structure of maximally violating
correlations.
"""

from .classical import ClassicalMaxResult, classical_max, classical_value_of
from .correlations import (
    ChshStrategy,
    Correlation,
    DeterministicStrategy,
    QuantumStrategy,
    ValidationReport,
    correlation_from_deterministic,
    correlation_from_quantum,
    no_signaling_residual,
    validate_correlation,
    validate_strategy,
)
from .errors import (
    ChshdError,
    CrossTermMassError,
    EnumerationCapError,
    InputError,
    NumericalIntegrityError,
    ShapeMismatchError,
    UndefinedBlockError,
)
from .functionals import (
    BellFunctional,
    CrossDiagonalMode,
    TiltedSpec,
    Variant,
    block_answer_pairs,
    build_maxent,
    build_tilted,
    chsh_m_value,
    chsh_prime_m_value,
    classical_reference_bound,
    cross_sets,
    cross_value,
    evaluate,
    n_blocks,
    quantum_bound,
    tchsh_m_value,
    tchsh_prime_m_value,
)
from .ideal import (
    ideal_maxent_correlation,
    ideal_maxent_strategy,
    ideal_tilted_correlation,
    ideal_tilted_strategy,
)
from .seesaw import (
    InitKind,
    SeesawConfig,
    SeesawResult,
    bell_operator_matrix,
    chsh_reduction_even,
    chsh_reduction_odd,
    chsh_value,
    cross_contribution,
    greedy_sign_selection,
    principal_eigenvector,
    seesaw,
)
from .selftest import (
    BlockWeights,
    SelfTestCheck,
    SelfTestReport,
    block_correlation,
    cross_mass,
    extract_block_weights,
    ideal_chsh_block,
    verify_selftest,
    verify_selftest_tilted,
)

__version__ = "0.1.0"

__all__ = [
    "BellFunctional",
    "BlockWeights",
    "ChshStrategy",
    "ChshdError",
    "ClassicalMaxResult",
    "Correlation",
    "CrossDiagonalMode",
    "CrossTermMassError",
    "DeterministicStrategy",
    "EnumerationCapError",
    "InitKind",
    "InputError",
    "NumericalIntegrityError",
    "QuantumStrategy",
    "SeesawConfig",
    "SeesawResult",
    "SelfTestCheck",
    "SelfTestReport",
    "ShapeMismatchError",
    "TiltedSpec",
    "UndefinedBlockError",
    "ValidationReport",
    "Variant",
    "bell_operator_matrix",
    "block_answer_pairs",
    "block_correlation",
    "build_maxent",
    "build_tilted",
    "chsh_m_value",
    "chsh_prime_m_value",
    "chsh_reduction_even",
    "chsh_reduction_odd",
    "chsh_value",
    "classical_max",
    "classical_reference_bound",
    "classical_value_of",
    "correlation_from_deterministic",
    "correlation_from_quantum",
    "cross_contribution",
    "cross_mass",
    "cross_sets",
    "cross_value",
    "evaluate",
    "extract_block_weights",
    "greedy_sign_selection",
    "ideal_chsh_block",
    "ideal_maxent_correlation",
    "ideal_maxent_strategy",
    "ideal_tilted_correlation",
    "ideal_tilted_strategy",
    "n_blocks",
    "no_signaling_residual",
    "principal_eigenvector",
    "quantum_bound",
    "seesaw",
    "tchsh_m_value",
    "tchsh_prime_m_value",
    "validate_correlation",
    "validate_strategy",
    "verify_selftest",
    "verify_selftest_tilted",
]
