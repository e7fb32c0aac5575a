"""Exception types shared across the package."""

from __future__ import annotations


class RicciLabError(Exception):
    """Base class for all package errors."""


class InputError(RicciLabError, ValueError):
    """Malformed or inconsistent input (dimension mismatch, wrong base point, ...)."""


class DegeneracyError(RicciLabError, ValueError):
    """Singular metric, degenerate plane or rank-deficient vector set."""


class ConsistencyError(RicciLabError):
    """An algebraic identity that must hold failed beyond tolerance."""


class InfeasibleParameters(RicciLabError, ValueError):
    """Parameters violate a construction inequality.

    ``inequality`` names the violated condition in plain text.
    """

    def __init__(self, inequality: str, detail: str = "", minimal=None):
        self.inequality = inequality
        self.detail = detail
        self.minimal = minimal
        msg = inequality if not detail else f"{inequality}: {detail}"
        super().__init__(msg)


class ConstructionError(RicciLabError):
    """A certificate failed after construction; ``point`` is the failing sample."""

    def __init__(self, message: str, point=None, certificate=None):
        self.point = point
        self.certificate = certificate
        super().__init__(message)


class AdmissibilityError(RicciLabError, ValueError):
    """Deformation parameters violate one or more admissibility inequalities."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v["name"] + ": " + v["detail"] for v in self.violations))
