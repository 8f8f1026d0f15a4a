"""Measurement records and frequency data shared by estimation and certification.

A record is either a list of von Neumann bases (each a unitary whose columns
are the basis kets) or a list of independently measured rank-1 projectors
that need not sum to the identity.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .qcore import basis_projectors, require_projector, require_unitary

__all__ = [
    "BASES",
    "PROJECTORS",
    "INFINITE",
    "MeasurementRecord",
    "FrequencyData",
    "PhysicalProbabilities",
]

BASES = "bases"
PROJECTORS = "projectors"

#: Sentinel for noiseless data (infinitely many copies per setting).
INFINITE = float("inf")


@dataclass(frozen=True)
class MeasurementRecord:
    """Ordered measurement settings of one kind over a fixed dimension."""

    dim: int
    kind: str
    elements: tuple  # unitaries for BASES, (d, d) projector arrays for PROJECTORS

    def __post_init__(self):
        if self.kind not in (BASES, PROJECTORS):
            raise ValueError(f"unknown record kind {self.kind!r}")
        for el in self.elements:
            if el.shape != (self.dim, self.dim):
                raise ValueError("record element has wrong dimension")

    @property
    def count(self) -> int:
        return len(self.elements)

    def validate(self):
        for el in self.elements:
            if self.kind == BASES:
                require_unitary(el)
                pis = basis_projectors(el)
                if np.linalg.norm(pis.sum(axis=0) - np.eye(self.dim)) > TOL.povm_completeness * self.dim:
                    raise ValueError("basis projectors do not sum to identity")
            else:
                require_projector(el)
        return self

    def constraint_operators(self) -> np.ndarray:
        """All rank-1 constraint operators as a stack of shape (n, d, d)."""
        if self.kind == BASES:
            return np.concatenate([basis_projectors(u) for u in self.elements])
        return np.stack(self.elements)

    def prefix(self, n: int) -> "MeasurementRecord":
        return MeasurementRecord(self.dim, self.kind, self.elements[:n])


def basis_record(dim: int, unitaries) -> MeasurementRecord:
    return MeasurementRecord(dim, BASES, tuple(np.asarray(u, dtype=complex) for u in unitaries))


def projector_record(dim: int, projectors) -> MeasurementRecord:
    return MeasurementRecord(dim, PROJECTORS, tuple(np.asarray(p, dtype=complex) for p in projectors))


@dataclass(frozen=True)
class FrequencyData:
    """Relative frequencies matching a MeasurementRecord's layout.

    ``values`` has shape (K, d) for per-basis data (rows sum to 1) or (L,)
    for per-projector data.  ``copies`` is the number of copies per setting,
    or INFINITE for exact Born probabilities.
    """

    kind: str
    values: np.ndarray
    copies: float = INFINITE

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        v = self.values
        if np.any(v < -1e-12):
            raise ValueError("frequencies must be non-negative")
        if self.kind == BASES:
            if v.ndim != 2:
                raise ValueError("per-basis frequencies must be (K, d)")
            if np.max(np.abs(v.sum(axis=1) - 1.0)) > 1e-9:
                raise ValueError("per-basis frequencies must sum to 1")
        elif self.kind == PROJECTORS:
            if v.ndim != 1:
                raise ValueError("per-projector frequencies must be a flat vector")
            if np.any(v > 1.0 + 1e-12):
                raise ValueError("projector frequencies must lie in [0, 1]")
        else:
            raise ValueError(f"unknown frequency kind {self.kind!r}")
        if not (self.copies == INFINITE or self.copies > 0):
            raise ValueError("copies must be positive or INFINITE")

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def prefix(self, n: int) -> "FrequencyData":
        return FrequencyData(self.kind, self.values[:n], self.copies)


@dataclass(frozen=True)
class PhysicalProbabilities:
    """Physically attainable probabilities plus a state that generates them."""

    kind: str
    values: np.ndarray
    generator_state: np.ndarray = field(repr=False)

    @property
    def flat(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float).reshape(-1)
