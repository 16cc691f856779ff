"""The classical process model: matrices over the non-negative reals.

Processes from a size-m classical system to a size-n one are n-by-m matrices
with entries >= 0.  Sequential composition is matrix multiplication, the
monoidal product is the Kronecker product, and time-reversal is the
transpose.  Normalised processes are exactly the column-stochastic matrices.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .errors import DimensionMismatchError, LoccKitError
from .systems import ClassicalSystem, Scalar, SystemType


class Process(ABC):
    """Common interface of the two concrete process models.

    Both models support the same capabilities: diagram-order composition
    (``>>``), the monoidal product (``@``), time-reversal (``dagger``),
    non-negative scaling and addition, and a canonical numeric representation
    used for equality testing.
    """

    source: SystemType
    target: SystemType

    @abstractmethod
    def then(self, other: "Process") -> "Process": ...

    @abstractmethod
    def tensor(self, other: "Process") -> "Process": ...

    @abstractmethod
    def dagger(self) -> "Process": ...

    @abstractmethod
    def scaled(self, coefficient: float) -> "Process": ...

    @abstractmethod
    def plus(self, other: "Process") -> "Process": ...

    def __rshift__(self, other):
        return self.then(other)

    def __matmul__(self, other):
        return self.tensor(other)

    def __add__(self, other):
        return self.plus(other)

    def __rmul__(self, coefficient):
        return self.scaled(coefficient)

    def as_scalar(self) -> Scalar:
        """Read a unit -> unit process off as a scalar."""
        if not (self.source.is_unit and self.target.is_unit):
            raise LoccKitError(
                f"process {self.source} -> {self.target} is not a scalar")
        return Scalar(float(self._scalar_value()))

    @abstractmethod
    def _scalar_value(self) -> float: ...


class ClassicalProcess(Process):
    """A matrix with non-negative real entries between classical systems.

    The matrix is indexed (target, source) with classical multi-indices
    flattened row-major over the factor lists.
    """

    def __init__(self, source: SystemType, target: SystemType, matrix):
        if not source.is_classical or not target.is_classical:
            raise LoccKitError("classical processes need all-classical types")
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape != (target.classical_dim, source.classical_dim):
            raise DimensionMismatchError(
                (target.classical_dim, source.classical_dim), matrix.shape,
                context="classical matrix shape")
        if matrix.size and matrix.min() < 0:
            raise LoccKitError(
                f"classical process entries must be >= 0, min is {matrix.min()}")
        self.source = source
        self.target = target
        self.matrix = matrix
        self.matrix.flags.writeable = False

    @staticmethod
    def identity(system: SystemType) -> "ClassicalProcess":
        return ClassicalProcess(system, system, np.eye(system.classical_dim))

    @staticmethod
    def from_sizes(source_size: int, target_size: int, matrix) -> "ClassicalProcess":
        return ClassicalProcess(
            SystemType.classical(source_size), SystemType.classical(target_size), matrix)

    @staticmethod
    def state(weights, factors=None) -> "ClassicalProcess":
        """A classical state (source = unit) with the given weight vector."""
        weights = np.asarray(weights, dtype=float)
        target = SystemType.classical(len(weights)) if factors is None else factors
        return ClassicalProcess(SystemType.unit(), target, weights.reshape(-1, 1))

    def then(self, other: Process) -> Process:
        if not isinstance(other, ClassicalProcess):
            return NotImplemented
        if self.target != other.source:
            raise DimensionMismatchError(self.target, other.source, context="compose")
        return ClassicalProcess(self.source, other.target, other.matrix @ self.matrix)

    def tensor(self, other: Process) -> Process:
        if not isinstance(other, ClassicalProcess):
            return NotImplemented
        return ClassicalProcess(
            self.source.tensor(other.source),
            self.target.tensor(other.target),
            np.kron(self.matrix, other.matrix))

    def dagger(self) -> "ClassicalProcess":
        return ClassicalProcess(self.target, self.source, self.matrix.T)

    def scaled(self, coefficient: float) -> "ClassicalProcess":
        if coefficient < 0:
            raise LoccKitError(f"scaling coefficient must be >= 0, got {coefficient}")
        return ClassicalProcess(self.source, self.target, coefficient * self.matrix)

    def plus(self, other: Process) -> Process:
        if not isinstance(other, ClassicalProcess):
            return NotImplemented
        if self.source != other.source or self.target != other.target:
            raise DimensionMismatchError(
                (self.source, self.target), (other.source, other.target),
                context="sum of processes")
        return ClassicalProcess(self.source, self.target, self.matrix + other.matrix)

    def _scalar_value(self) -> float:
        return float(self.matrix[0, 0])

    def __repr__(self):
        return f"ClassicalProcess({self.source} -> {self.target})"


def discard_classical(system: SystemType) -> ClassicalProcess:
    """The marginalisation effect: the all-ones row vector."""
    return ClassicalProcess(
        system, SystemType.unit(), np.ones((1, system.classical_dim)))


def delta_state(index: int, size: int) -> ClassicalProcess:
    """The point distribution delta_index on a size-`size` system."""
    weights = np.zeros(size)
    weights[index] = 1.0
    return ClassicalProcess.state(weights)


def identity_resolution(system: ClassicalSystem) -> list[tuple[ClassicalProcess, ClassicalProcess]]:
    """The point-state/point-effect pairs whose outer sum is the identity.

    Returns size-many ``(|x>, <x|)`` pairs; summing ``|x><x|`` reproduces the
    identity matrix exactly (entries are exact 0.0/1.0 floats).
    """
    pairs = []
    for x in range(system.size):
        ket = delta_state(x, system.size)
        pairs.append((ket, ket.dagger()))
    return pairs
