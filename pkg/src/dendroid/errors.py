"""Exception types shared across the package.

Every checked failure raises a subclass of :class:`DendroidError` carrying a
human-readable message and, where useful, a structured ``witness`` attribute.
"""
from __future__ import annotations


class DendroidError(Exception):
    """Base class for all checked failures."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


# -- trees ------------------------------------------------------------------

class InvalidTree(DendroidError):
    pass


class DuplicateChild(InvalidTree):
    pass


class MultipleRoots(InvalidTree):
    pass


class CycleDetected(InvalidTree):
    pass


class OrphanEdge(InvalidTree):
    pass


# -- tree maps and faces ----------------------------------------------------

class NotMonotone(DendroidError):
    pass


class NotInnerEdge(DendroidError):
    pass


class RelationNotInClosure(DendroidError):
    pass


class RootMismatch(DendroidError):
    pass


# -- group actions ----------------------------------------------------------

class InvalidGroup(DendroidError):
    pass


class NotAnAction(DendroidError):
    pass


class NotInjective(DendroidError):
    pass


class NotEquivariant(DendroidError):
    pass


class OrbitMismatch(DendroidError):
    pass


# -- complexes --------------------------------------------------------------

class EmptyE(DendroidError):
    pass


class NotGStable(DendroidError):
    pass


class NotInner(DendroidError):
    pass


class NotAPushout(DendroidError):
    pass


# -- anodyne machinery ------------------------------------------------------

class MalformedPoset(DendroidError):
    pass


class VerificationFailed(DendroidError):
    pass


# -- tensor -----------------------------------------------------------------

class OrderNotAntisymmetric(DendroidError):
    pass


class FactorsNotOpen(DendroidError):
    pass


# -- genuine / reedy / indexing ---------------------------------------------

class AxiomViolation(DendroidError):
    pass


class TruncationTooSmall(DendroidError):
    pass
