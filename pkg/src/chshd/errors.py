"""Exception hierarchy for the chshd package.

Structural problems (wrong array shapes, malformed containers) raise
:class:`ShapeMismatchError` immediately; numeric invariant violations in user
data are instead collected into validation reports so callers can inspect
every defect at once.
"""

from __future__ import annotations


class ChshdError(Exception):
    """Base class for all package-specific errors."""


class ShapeMismatchError(ChshdError):
    """An array or container does not have the required shape."""


class InputError(ChshdError, ValueError):
    """A parameter is outside its documented domain."""


class NumericalIntegrityError(ChshdError):
    """A computed quantity violates a numerical integrity bound.

    Raised e.g. when a Born-rule probability carries an imaginary residue
    above tolerance, which indicates corrupted input matrices rather than
    ordinary round-off.
    """


class CrossTermMassError(InputError):
    """A correlation carries too much cross-term mass for the requested operation."""

    def __init__(self, mass: float, tol: float):
        super().__init__(
            f"cross-term mass {mass:.3e} exceeds tolerance {tol:.3e}; "
            "block weights are only defined for block-diagonal correlations"
        )
        self.mass = mass
        self.tol = tol


class UndefinedBlockError(InputError):
    """A block carries (numerically) zero weight, so its normalized correlation is undefined."""


class EnumerationCapError(InputError):
    """A classical enumeration would exceed the configured strategy-count cap."""

    def __init__(self, d: int, cap: int):
        count = d**7
        super().__init__(
            f"exhaustive enumeration for d={d} would scan {count} deterministic "
            f"strategies, above the cap d<={cap}; raise the cap explicitly to proceed"
        )
        self.d = d
        self.cap = cap
        self.count = count
