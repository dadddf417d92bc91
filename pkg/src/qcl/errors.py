"""Exception types shared by the qcl modules."""

from __future__ import annotations


class QclError(Exception):
    """Base class for all library-specific errors."""


class NotUnitary(QclError):
    """Input matrix fails the unitarity check."""


class ZeroProbability(QclError):
    """A measurement branch with (numerically) zero probability was applied."""


class SubsystemUnitary(QclError):
    """Operation undefined when the compressed map is unitary (|omega| = 1)."""


class OutsideRange(QclError):
    """omega lies outside the numerical range W(U)."""


class DegenerateRange(QclError):
    """W(U) degenerates to a point or a chord; triangle machinery undefined."""


class OmegaMismatch(QclError):
    """The two states have different diagonal expectations <z|Uz>."""


class DegenerateSpectrum(QclError):
    """U has repeated eigenvalues where distinct ones are required."""
