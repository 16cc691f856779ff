"""System types: classical and quantum wire factors and their monoidal products.

A system is an ordered list of factors, each either a finite classical set or
a finite-dimensional quantum system.  The tensor unit is the empty factor
list.  Classical multi-indices always run over the classical factors in list
order; the joint quantum space is the tensor product of the quantum factors
in list order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import LoccKitError


@dataclass(frozen=True)
class ClassicalSystem:
    """A finite classical set, identified by its cardinality."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise LoccKitError(f"classical system size must be >= 1, got {self.size}")

    def __repr__(self):
        return f"C{self.size}"


@dataclass(frozen=True)
class QuantumSystem:
    """A finite-dimensional quantum system (Hilbert space dimension)."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise LoccKitError(f"quantum dimension must be >= 1, got {self.dim}")

    def __repr__(self):
        return f"Q{self.dim}"


Factor = Union[ClassicalSystem, QuantumSystem]


@dataclass(frozen=True)
class Scalar:
    """A non-negative real scalar; the empty diagram is the scalar 1."""

    value: float

    def __post_init__(self):
        if self.value < 0:
            raise LoccKitError(f"scalars are non-negative, got {self.value}")


SCALAR_ONE = Scalar(1.0)


@dataclass(frozen=True)
class SystemType:
    """An ordered list of classical/quantum wire factors."""

    factors: tuple[Factor, ...]

    def __init__(self, factors=()):
        object.__setattr__(self, "factors", tuple(factors))
        for f in self.factors:
            if not isinstance(f, (ClassicalSystem, QuantumSystem)):
                raise LoccKitError(f"invalid system factor {f!r}")

    @staticmethod
    def unit() -> "SystemType":
        return SystemType(())

    @staticmethod
    def classical(*sizes: int) -> "SystemType":
        return SystemType(tuple(ClassicalSystem(s) for s in sizes))

    @staticmethod
    def quantum(*dims: int) -> "SystemType":
        return SystemType(tuple(QuantumSystem(d) for d in dims))

    @property
    def classical_sizes(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors if isinstance(f, ClassicalSystem))

    @property
    def quantum_dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors if isinstance(f, QuantumSystem))

    @property
    def classical_dim(self) -> int:
        return math.prod(self.classical_sizes)

    @property
    def quantum_dim(self) -> int:
        return math.prod(self.quantum_dims)

    @property
    def is_classical(self) -> bool:
        return all(isinstance(f, ClassicalSystem) for f in self.factors)

    @property
    def is_unit(self) -> bool:
        return not self.factors

    def tensor(self, other: "SystemType") -> "SystemType":
        return SystemType(self.factors + other.factors)

    def classical_indices(self) -> Iterator[tuple[int, ...]]:
        """All classical multi-indices, in row-major (first factor slowest) order."""
        return itertools.product(*(range(s) for s in self.classical_sizes))

    def flatten_classical(self, index: tuple[int, ...]) -> int:
        """Row-major flattening of a classical multi-index."""
        sizes = self.classical_sizes
        if len(index) != len(sizes):
            raise LoccKitError(
                f"classical index {index} does not match factors {sizes}")
        flat = 0
        for i, s in zip(index, sizes):
            if not 0 <= i < s:
                raise LoccKitError(f"classical index {index} out of range for {sizes}")
            flat = flat * s + i
        return flat

    def unflatten_classical(self, flat: int) -> tuple[int, ...]:
        sizes = self.classical_sizes
        out = []
        for s in reversed(sizes):
            out.append(flat % s)
            flat //= s
        return tuple(reversed(out))

    def __repr__(self):
        if not self.factors:
            return "I"
        return " @ ".join(repr(f) for f in self.factors)


def unit_type() -> SystemType:
    return SystemType.unit()
