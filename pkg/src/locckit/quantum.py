"""The quantum process model: classically indexed families of CP maps.

A hybrid process between systems with classical and quantum factors is stored
as a sparse family of Choi matrices, one per pair (classical output
multi-index, classical input multi-index); absent pairs are the zero CP map.

Choi convention: for a CP map ``F`` from dimension ``din`` to ``dout``,

    J = sum_ij  E_ij (x) F(E_ij),

a square matrix of size ``din * dout`` with row index ``i * dout + a``
(input-major).  With this convention the Choi of a Kraus operator ``K``
(shape ``dout x din``) is the outer product of ``K.T.reshape(-1)`` with its
conjugate, the trace effect on dimension ``d`` has Choi ``I_d``, and the
Hilbert-Schmidt adjoint is an index swap plus conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import ClassicalProcess, Process
from .errors import (ChoiValidationError, DimensionMismatchError,
                     LoccKitError)
from .systems import SystemType

HERMITIAN_TOL = 1e-12
PSD_CLAMP_TOL = 1e-10


# ---------------------------------------------------------------------------
# Choi matrix primitives
# ---------------------------------------------------------------------------

def choi_from_kraus(kraus_ops, input_dim: int, output_dim: int) -> np.ndarray:
    """Build the Choi matrix of the CP map with the given Kraus operators."""
    d = input_dim * output_dim
    choi = np.zeros((d, d), dtype=complex)
    for op in kraus_ops:
        op = np.asarray(op, dtype=complex)
        if op.shape != (output_dim, input_dim):
            raise ChoiValidationError(
                f"Kraus operator shape {op.shape} does not match "
                f"(output, input) = ({output_dim}, {input_dim})")
        vec = op.T.reshape(-1)
        choi += np.outer(vec, vec.conj())
    return choi


def identity_choi(dim: int) -> np.ndarray:
    vec = np.eye(dim, dtype=complex).reshape(-1)
    return np.outer(vec, vec)


def trace_effect_choi(dim: int) -> np.ndarray:
    """Choi of the trace effect rho -> tr(rho); equals the identity matrix."""
    return np.eye(dim, dtype=complex)


def apply_choi(choi: np.ndarray, rho: np.ndarray, input_dim: int,
               output_dim: int) -> np.ndarray:
    """Apply the CP map with the given Choi matrix to an input matrix."""
    j4 = choi.reshape(input_dim, output_dim, input_dim, output_dim)
    return np.einsum("ij,iajb->ab", rho, j4)


def choi_then(first: np.ndarray, second: np.ndarray, din: int, dmid: int,
              dout: int) -> np.ndarray:
    """Choi matrix of the sequential composite (first, then second)."""
    a4 = first.reshape(din, dmid, din, dmid)
    b4 = second.reshape(dmid, dout, dmid, dout)
    out = np.einsum("ibjB,bcBC->icjC", a4, b4)
    return out.reshape(din * dout, din * dout)


def choi_tensor(left: np.ndarray, right: np.ndarray, din_l: int, dout_l: int,
                din_r: int, dout_r: int) -> np.ndarray:
    """Choi matrix of the parallel composite (left factor first)."""
    a4 = left.reshape(din_l, dout_l, din_l, dout_l)
    b4 = right.reshape(din_r, dout_r, din_r, dout_r)
    out = np.einsum("iajb,kcld->ikacjlbd", a4, b4)
    d = din_l * din_r * dout_l * dout_r
    return out.reshape(d, d)


def choi_dagger(choi: np.ndarray, din: int, dout: int) -> np.ndarray:
    """Choi matrix of the Hilbert-Schmidt adjoint map."""
    j4 = choi.reshape(din, dout, din, dout)
    return j4.transpose(1, 0, 3, 2).conj().reshape(din * dout, din * dout)


def choi_trace_out_target(choi: np.ndarray, din: int, dout: int) -> np.ndarray:
    """Partial trace over the output leg; identity iff trace-preserving."""
    j4 = choi.reshape(din, dout, din, dout)
    return np.einsum("iaja->ij", j4)


def validate_choi(matrix, input_dim: int, output_dim: int,
                  clamp: bool = True) -> np.ndarray:
    """Check Hermiticity and positivity; clamp eigenvalues in [-1e-10, 0).

    Anything below the clamp threshold is rejected: complete positivity is an
    invariant of stored components, not a hope.
    """
    matrix = np.asarray(matrix, dtype=complex)
    d = input_dim * output_dim
    if matrix.shape != (d, d):
        raise ChoiValidationError(
            f"Choi shape {matrix.shape} does not match dims "
            f"({input_dim}, {output_dim})")
    herm_defect = np.abs(matrix - matrix.conj().T).max() if d else 0.0
    if herm_defect > HERMITIAN_TOL:
        raise ChoiValidationError(
            f"Choi matrix is not Hermitian (defect {herm_defect:.3e})")
    eigvals, eigvecs = np.linalg.eigh((matrix + matrix.conj().T) / 2)
    if eigvals.size and eigvals.min() < -PSD_CLAMP_TOL:
        raise ChoiValidationError(
            f"Choi matrix is not positive semidefinite "
            f"(min eigenvalue {eigvals.min():.3e})")
    if not clamp or not eigvals.size or eigvals.min() >= 0:
        return matrix
    clamped = np.clip(eigvals, 0.0, None)
    return (eigvecs * clamped) @ eigvecs.conj().T


@dataclass(frozen=True)
class ChoiMatrix:
    """A validated Choi matrix together with its input/output dimensions."""

    entries: np.ndarray
    input_dim: int
    output_dim: int

    def __post_init__(self):
        object.__setattr__(
            self, "entries",
            validate_choi(self.entries, self.input_dim, self.output_dim))


@dataclass(frozen=True)
class DensityState:
    """A positive semidefinite matrix; possibly sub-normalised."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise LoccKitError(f"density matrix must be square, got {mat.shape}")
        object.__setattr__(self, "matrix", validate_choi(mat, mat.shape[0], 1))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


# ---------------------------------------------------------------------------
# Hybrid processes
# ---------------------------------------------------------------------------

class HybridProcess(Process):
    """A process between hybrid types, as a sparse Choi-matrix family.

    ``components`` maps ``(y, x)`` pairs of classical multi-indices (output
    first) to Choi matrices of size ``source.quantum_dim *
    target.quantum_dim``.  Pairs that are absent denote the zero CP map.
    """

    def __init__(self, source: SystemType, target: SystemType, components,
                 validate: bool = False):
        self.source = source
        self.target = target
        din, dout = source.quantum_dim, target.quantum_dim
        stored = {}
        for (y, x), mat in components.items():
            y, x = tuple(y), tuple(x)
            target.flatten_classical(y)
            source.flatten_classical(x)
            mat = np.asarray(mat, dtype=complex)
            if validate:
                mat = validate_choi(mat, din, dout)
            elif mat.shape != (din * dout, din * dout):
                raise ChoiValidationError(
                    f"component {(y, x)} has shape {mat.shape}, expected "
                    f"{(din * dout, din * dout)}")
            mat.flags.writeable = False
            stored[(y, x)] = mat
        self.components = stored

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(source: SystemType, target: SystemType) -> "HybridProcess":
        return HybridProcess(source, target, {})

    @staticmethod
    def identity(system: SystemType) -> "HybridProcess":
        choi = identity_choi(system.quantum_dim)
        comps = {(x, x): choi for x in system.classical_indices()}
        return HybridProcess(system, system, comps)

    @staticmethod
    def from_classical(process: ClassicalProcess) -> "HybridProcess":
        comps = {}
        ys, xs = np.nonzero(process.matrix)
        for yf, xf in zip(ys, xs):
            y = process.target.unflatten_classical(int(yf))
            x = process.source.unflatten_classical(int(xf))
            comps[(y, x)] = np.array([[process.matrix[yf, xf]]], dtype=complex)
        return HybridProcess(process.source, process.target, comps)

    # -- capabilities -------------------------------------------------------

    def then(self, other: Process) -> "HybridProcess":
        if isinstance(other, ClassicalProcess):
            other = HybridProcess.from_classical(other)
        if not isinstance(other, HybridProcess):
            return NotImplemented
        if self.target != other.source:
            raise DimensionMismatchError(self.target, other.source, context="compose")
        din = self.source.quantum_dim
        dmid = self.target.quantum_dim
        dout = other.target.quantum_dim
        by_mid = {}
        for (z, y), mat in other.components.items():
            by_mid.setdefault(y, []).append((z, mat))
        acc = {}
        for (y, x), first in self.components.items():
            for z, second in by_mid.get(y, ()):
                linked = choi_then(first, second, din, dmid, dout)
                key = (z, x)
                if key in acc:
                    acc[key] = acc[key] + linked
                else:
                    acc[key] = linked
        return HybridProcess(self.source, other.target, acc)

    def __rrshift__(self, other):
        if isinstance(other, ClassicalProcess):
            return HybridProcess.from_classical(other).then(self)
        return NotImplemented

    def tensor(self, other: Process) -> "HybridProcess":
        if isinstance(other, ClassicalProcess):
            other = HybridProcess.from_classical(other)
        if not isinstance(other, HybridProcess):
            return NotImplemented
        din_l, dout_l = self.source.quantum_dim, self.target.quantum_dim
        din_r, dout_r = other.source.quantum_dim, other.target.quantum_dim
        comps = {}
        for (y1, x1), a in self.components.items():
            for (y2, x2), b in other.components.items():
                comps[(y1 + y2, x1 + x2)] = choi_tensor(
                    a, b, din_l, dout_l, din_r, dout_r)
        return HybridProcess(
            self.source.tensor(other.source), self.target.tensor(other.target), comps)

    def __rmatmul__(self, other):
        if isinstance(other, ClassicalProcess):
            return HybridProcess.from_classical(other).tensor(self)
        return NotImplemented

    def dagger(self) -> "HybridProcess":
        din, dout = self.source.quantum_dim, self.target.quantum_dim
        comps = {(x, y): choi_dagger(mat, din, dout)
                 for (y, x), mat in self.components.items()}
        return HybridProcess(self.target, self.source, comps)

    def scaled(self, coefficient: float) -> "HybridProcess":
        if coefficient < 0:
            raise LoccKitError(f"scaling coefficient must be >= 0, got {coefficient}")
        return HybridProcess(
            self.source, self.target,
            {k: coefficient * v for k, v in self.components.items()})

    def plus(self, other: Process) -> "HybridProcess":
        if isinstance(other, ClassicalProcess):
            other = HybridProcess.from_classical(other)
        if not isinstance(other, HybridProcess):
            return NotImplemented
        if self.source != other.source or self.target != other.target:
            raise DimensionMismatchError(
                (self.source, self.target), (other.source, other.target),
                context="sum of processes")
        acc = {k: v.copy() for k, v in self.components.items()}
        for k, v in other.components.items():
            acc[k] = acc[k] + v if k in acc else v
        return HybridProcess(self.source, self.target, acc)

    def _scalar_value(self) -> float:
        mat = self.components.get(((), ()))
        return 0.0 if mat is None else float(mat[0, 0].real)

    def component(self, y, x) -> np.ndarray:
        """Choi matrix at classical indices (y, x); zeros if absent."""
        d = self.source.quantum_dim * self.target.quantum_dim
        return self.components.get(
            (tuple(y), tuple(x)), np.zeros((d, d), dtype=complex))

    def max_abs(self) -> float:
        if not self.components:
            return 0.0
        return max(np.abs(m).max() for m in self.components.values())

    def trace_preservation_defect(self) -> float:
        """Max-norm distance from trace preservation, over classical inputs."""
        din = self.source.quantum_dim
        eye = np.eye(din)
        by_x = {}
        for (y, x), mat in self.components.items():
            tr = choi_trace_out_target(mat, din, self.target.quantum_dim)
            by_x[x] = by_x[x] + tr if x in by_x else tr
        defect = 0.0
        for x in self.source.classical_indices():
            summed = by_x.get(x)
            if summed is None:
                defect = max(defect, 1.0)
            else:
                defect = max(defect, float(np.abs(summed - eye).max()))
        return defect

    def __repr__(self):
        return (f"HybridProcess({self.source} -> {self.target}, "
                f"{len(self.components)} components)")


# ---------------------------------------------------------------------------
# Ingestion and evaluation helpers
# ---------------------------------------------------------------------------

def cp_from_kraus(kraus_ops, input_dim: int | None = None,
                  output_dim: int | None = None) -> HybridProcess:
    """A single CP map, given by Kraus operators, as a hybrid process.

    Dimensions are inferred from the first operator; an empty list (the zero
    process) requires explicit dimensions.
    """
    kraus_ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
    if kraus_ops:
        shape = kraus_ops[0].shape
        if len(shape) != 2:
            raise ChoiValidationError(f"Kraus operators must be matrices, got {shape}")
        output_dim = shape[0] if output_dim is None else output_dim
        input_dim = shape[1] if input_dim is None else input_dim
    elif input_dim is None or output_dim is None:
        raise ChoiValidationError(
            "an empty Kraus list needs explicit input_dim and output_dim")
    source = SystemType.quantum(input_dim)
    target = SystemType.quantum(output_dim)
    if not kraus_ops:
        return HybridProcess.zero(source, target)
    choi = choi_from_kraus(kraus_ops, input_dim, output_dim)
    return HybridProcess(source, target, {((), ()): choi})


def prepare_pure(vector, target: SystemType | None = None) -> HybridProcess:
    """The preparation process of a pure state (source = unit)."""
    vector = np.asarray(vector, dtype=complex).reshape(-1)
    if not np.any(vector):
        raise LoccKitError("cannot prepare the zero vector")
    if target is None:
        target = SystemType.quantum(len(vector))
    elif target.quantum_dim != len(vector) or target.classical_dim != 1:
        raise DimensionMismatchError(
            SystemType.quantum(len(vector)), target, context="prepare_pure")
    choi = np.outer(vector, vector.conj())
    key = ((0,) * len(target.classical_sizes), ())
    return HybridProcess(SystemType.unit(), target, {key: choi})


def maximally_mixed_feed(dim: int) -> HybridProcess:
    """Time-reverse of the trace effect: the unnormalised maximally mixed state."""
    return HybridProcess(
        SystemType.unit(), SystemType.quantum(dim),
        {((), ()): np.eye(dim, dtype=complex)})


def discard_hybrid(system: SystemType) -> HybridProcess:
    """The discarding effect on a hybrid type (target = unit)."""
    choi = trace_effect_choi(system.quantum_dim)
    comps = {((), x): choi for x in system.classical_indices()}
    return HybridProcess(system, SystemType.unit(), comps)


def embed_classical(op: ClassicalProcess, source: SystemType,
                    target: SystemType) -> HybridProcess:
    """Promote a classical op to act on a hybrid type, quantum wires untouched.

    The classical factors of `source`/`target` must match the op's; the
    quantum factors must agree between the two (they pass overhead).
    """
    if source.classical_sizes != op.source.classical_sizes:
        raise DimensionMismatchError(op.source, source, context="embed_classical source")
    if target.classical_sizes != op.target.classical_sizes:
        raise DimensionMismatchError(op.target, target, context="embed_classical target")
    if source.quantum_dims != target.quantum_dims:
        raise DimensionMismatchError(
            source, target, context="embed_classical quantum passthrough")
    ident = identity_choi(source.quantum_dim)
    comps = {}
    ys, xs = np.nonzero(op.matrix)
    for yf, xf in zip(ys, xs):
        y = target.unflatten_classical(int(yf))
        x = source.unflatten_classical(int(xf))
        comps[(y, x)] = op.matrix[yf, xf] * ident
    return HybridProcess(source, target, comps)


def apply_to_state(process: HybridProcess, x, rho) -> dict[tuple, DensityState]:
    """Evaluate one classical input column of a process on a quantum state.

    Returns, per classical output multi-index, the (possibly trace-decreasing)
    branch output; absent components give zero branches.
    """
    x = tuple(x)
    process.source.flatten_classical(x)
    mat = rho.matrix if isinstance(rho, DensityState) else np.asarray(rho, dtype=complex)
    din, dout = process.source.quantum_dim, process.target.quantum_dim
    if mat.shape != (din, din):
        raise DimensionMismatchError((din, din), mat.shape, context="apply_to_state")
    branches = {}
    for y in process.target.classical_indices():
        comp = process.components.get((y, x))
        if comp is None:
            out = np.zeros((dout, dout), dtype=complex)
        else:
            out = apply_choi(comp, mat, din, dout)
        branches[y] = DensityState(out)
    return branches


def dagger_quantum(process: HybridProcess) -> HybridProcess:
    """Time-reversal of a hybrid process (adjoint CP maps, transposed indices)."""
    return process.dagger()
