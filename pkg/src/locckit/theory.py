"""Model-independent process capabilities.

The functions here form the working surface of the process theory: diagram
composition, monoidal product, non-negative linear structure, discarding,
time-reversal, and the normalised/unital/pure predicates.  They dispatch over
the two concrete models (classical matrices and hybrid Choi families),
promoting classical processes where the models mix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import ClassicalProcess, Process, discard_classical
from .errors import DimensionMismatchError, LoccKitError, ZeroProcessError
from .quantum import HybridProcess, discard_hybrid
from .systems import SystemType

DEFAULT_TOL = 1e-9
PURITY_RANK_TOL = 1e-8
_WITNESS_FLOOR = 1e-14


def _promote_pair(f: Process, g: Process) -> tuple[Process, Process]:
    if isinstance(f, ClassicalProcess) and isinstance(g, HybridProcess):
        return HybridProcess.from_classical(f), g
    if isinstance(f, HybridProcess) and isinstance(g, ClassicalProcess):
        return f, HybridProcess.from_classical(g)
    return f, g


def compose(f: Process, g: Process) -> Process:
    """Diagram-order composition: f first, then g."""
    f, g = _promote_pair(f, g)
    return f.then(g)


def tensor(f: Process, g: Process) -> Process:
    f, g = _promote_pair(f, g)
    return f.tensor(g)


def dagger(f: Process) -> Process:
    return f.dagger()


def identity(system: SystemType) -> Process:
    if system.is_classical:
        return ClassicalProcess.identity(system)
    return HybridProcess.identity(system)


def discard(system: SystemType) -> Process:
    """The discarding effect on the given system type."""
    if system.is_classical:
        return discard_classical(system)
    return discard_hybrid(system)


def reversed_discard(system: SystemType) -> Process:
    """Dagger of discarding: the unnormalised uniform / maximally mixed state."""
    return discard(system).dagger()


@dataclass(frozen=True)
class LinearCombination:
    """A finite non-negative combination of processes with common type."""

    terms: tuple[tuple[float, Process], ...]

    def __post_init__(self):
        terms = tuple((float(c), p) for c, p in self.terms)
        if not terms:
            raise LoccKitError("a linear combination needs at least one term")
        for c, _ in terms:
            if c < 0:
                raise LoccKitError(f"combination coefficients must be >= 0, got {c}")
        src, tgt = terms[0][1].source, terms[0][1].target
        for _, p in terms[1:]:
            if p.source != src or p.target != tgt:
                raise DimensionMismatchError(
                    (src, tgt), (p.source, p.target), context="linear combination")
        object.__setattr__(self, "terms", terms)


def linear_combine(combination) -> Process:
    """Evaluate a non-negative combination into a single process."""
    if not isinstance(combination, LinearCombination):
        combination = LinearCombination(tuple(combination))
    acc = None
    for coefficient, process in combination.terms:
        term = process.scaled(coefficient)
        acc = term if acc is None else compose_sum(acc, term)
    return acc


def compose_sum(f: Process, g: Process) -> Process:
    f, g = _promote_pair(f, g)
    return f.plus(g)


# ---------------------------------------------------------------------------
# Equality
# ---------------------------------------------------------------------------

def max_difference(f: Process, g: Process) -> float:
    """Max-norm distance between canonical representations."""
    if f.source != g.source or f.target != g.target:
        raise DimensionMismatchError(
            (f.source, f.target), (g.source, g.target), context="comparison")
    f, g = _promote_pair(f, g)
    if isinstance(f, ClassicalProcess):
        return float(np.abs(f.matrix - g.matrix).max()) if f.matrix.size else 0.0
    keys = set(f.components) | set(g.components)
    diff = 0.0
    for key in keys:
        diff = max(diff, float(np.abs(f.component(*key) - g.component(*key)).max()))
    return diff


def approx_eq(f: Process, g: Process, tol: float = DEFAULT_TOL) -> bool:
    return max_difference(f, g) <= tol


# ---------------------------------------------------------------------------
# Normalisation and unitality
# ---------------------------------------------------------------------------

def normalisation_defect(f: Process) -> float:
    """Distance from `discard(target) o f == discard(source)`."""
    if isinstance(f, ClassicalProcess):
        if not f.matrix.size:
            return 0.0
        return float(np.abs(f.matrix.sum(axis=0) - 1.0).max())
    return f.trace_preservation_defect()


def is_normalised(f: Process, tol: float = DEFAULT_TOL) -> bool:
    """Stochastic / trace-preserving-per-classical-input, within tol."""
    if tol <= 0:
        raise LoccKitError(f"tolerance must be > 0, got {tol}")
    return normalisation_defect(f) <= tol


def unitality_defect(f: Process) -> float:
    """Distance from f mapping the reversed discard of its source to its target's.

    This is the direct reading of unitality; it agrees with `dagger(f)` being
    normalised, which duality tests exercise through the other code path.
    """
    lhs = compose(reversed_discard(f.source), f)
    return max_difference(lhs, reversed_discard(f.target))


def is_unital(f: Process, tol: float = DEFAULT_TOL) -> bool:
    if tol <= 0:
        raise LoccKitError(f"tolerance must be > 0, got {tol}")
    return unitality_defect(f) <= tol


# ---------------------------------------------------------------------------
# Purity: extremality in the cone of processes
# ---------------------------------------------------------------------------

def _classical_entry_terms(f: ClassicalProcess):
    ys, xs = np.nonzero(f.matrix)
    return [((int(y), int(x)), float(f.matrix[y, x])) for y, x in zip(ys, xs)]


def _hybrid_eigen_terms(f: HybridProcess):
    """Per-component eigendecompositions: (key, eigenvalues, eigenvectors)."""
    out = []
    for key, mat in f.components.items():
        vals, vecs = np.linalg.eigh(mat)
        out.append((key, np.clip(vals, 0.0, None), vecs))
    return out


def is_pure(f: Process, tol: float = PURITY_RANK_TOL) -> bool:
    """Extremality test: a single nonzero component of numerical rank one.

    Eigenvalues below `tol` relative to the largest across the whole family
    count as zero.  The zero process is rejected (purity is undefined at the
    cone apex).
    """
    if tol <= 0:
        raise LoccKitError(f"tolerance must be > 0, got {tol}")
    if isinstance(f, ClassicalProcess):
        if not f.matrix.size or f.matrix.max() == 0.0:
            raise ZeroProcessError("purity is undefined on the zero process")
        threshold = tol * f.matrix.max()
        return int((f.matrix > threshold).sum()) == 1
    eigen = _hybrid_eigen_terms(f)
    largest = max((vals.max() for _, vals, _ in eigen if vals.size), default=0.0)
    if largest == 0.0:
        raise ZeroProcessError("purity is undefined on the zero process")
    threshold = tol * largest
    live = [(key, int((vals > threshold).sum())) for key, vals, _ in eigen]
    nonzero = [(key, rank) for key, rank in live if rank > 0]
    return len(nonzero) == 1 and nonzero[0][1] == 1


def impurity_witness(f: Process, tol: float = PURITY_RANK_TOL):
    """A decomposition certifying impurity, or None when f is pure.

    When present, the result is a `LinearCombination` of two or more pairwise
    non-proportional processes recomposing to f; terms are point processes
    (classical) or rank-one Choi components from eigendecompositions.
    """
    if is_pure(f, tol):
        return None
    if isinstance(f, ClassicalProcess):
        floor = _WITNESS_FLOOR * f.matrix.max()
        terms = []
        for (y, x), weight in _classical_entry_terms(f):
            if weight <= floor:
                continue
            point = np.zeros_like(f.matrix)
            point[y, x] = 1.0
            terms.append((weight, ClassicalProcess(f.source, f.target, point)))
        return LinearCombination(tuple(terms))
    eigen = _hybrid_eigen_terms(f)
    largest = max(vals.max() for _, vals, _ in eigen if vals.size)
    floor = _WITNESS_FLOOR * largest
    terms = []
    for key, vals, vecs in eigen:
        for i in range(len(vals)):
            if vals[i] <= floor:
                continue
            piece = HybridProcess(
                f.source, f.target,
                {key: np.outer(vecs[:, i], vecs[:, i].conj())})
            terms.append((float(vals[i]), piece))
    return LinearCombination(tuple(terms))
