"""Multipartite pure states, orthonormal families, and product-state oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FamilyValidationError, LoccKitError

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class PartyPartition:
    """Local Hilbert-space dimensions of the parties, in party order."""

    dims: tuple[int, ...]

    def __init__(self, dims):
        dims = tuple(int(d) for d in dims)
        if not dims or any(d < 1 for d in dims):
            raise LoccKitError(f"invalid party dimensions {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def num_parties(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)


class PureState:
    """A complex amplitude vector over the joint system of a partition."""

    def __init__(self, amplitudes, partition: PartyPartition):
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if len(amplitudes) != partition.total_dim:
            raise LoccKitError(
                f"amplitude length {len(amplitudes)} does not match "
                f"partition dims {partition.dims}")
        if not np.any(amplitudes):
            raise LoccKitError("pure states must be nonzero")
        self.amplitudes = amplitudes
        self.amplitudes.flags.writeable = False
        self.partition = partition

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        return PureState(self.amplitudes / self.norm, self.partition)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.partition.dims)

    def __repr__(self):
        return f"PureState(dims={self.partition.dims})"


def _check_bipartition(parties, num_parties: int) -> tuple[int, ...]:
    parties = tuple(sorted(set(int(p) for p in parties)))
    if any(p < 0 or p >= num_parties for p in parties):
        raise LoccKitError(f"bipartition {parties} out of range for {num_parties} parties")
    if not parties or len(parties) == num_parties:
        raise LoccKitError("bipartition must be a nonempty proper subset of the parties")
    return parties


def schmidt_rank(state: PureState, bipartition, tol: float = DEFAULT_TOL) -> int:
    """Numerical rank of the amplitude matrix reshaped along a bipartition.

    Rank one means the state is a product across the cut.  Singular values
    below `tol` relative to the largest count as zero.
    """
    left = _check_bipartition(bipartition, state.partition.num_parties)
    right = tuple(p for p in range(state.partition.num_parties) if p not in left)
    tensor = state.as_tensor().transpose(left + right)
    dims = state.partition.dims
    rows = math.prod(dims[p] for p in left)
    singular = np.linalg.svd(tensor.reshape(rows, -1), compute_uv=False)
    return int((singular > tol * singular[0]).sum())


@dataclass(frozen=True)
class ProductFactorization:
    """Per-party local vectors whose tensor product reproduces a joint state."""

    factors: tuple[np.ndarray, ...]

    def recompose(self) -> np.ndarray:
        out = np.array([1.0 + 0.0j])
        for factor in self.factors:
            out = np.kron(out, factor)
        return out


def product_factorize(state: PureState, tol: float = DEFAULT_TOL):
    """Split a fully product state into local factors; None if entangled.

    Parties are peeled left to right by rank-one SVD; any cut with a second
    singular value above `tol` (relative) means entanglement.  The returned
    factors recompose to the state within `tol` times its norm.
    """
    dims = state.partition.dims
    factors = []
    vec = state.amplitudes
    for dim in dims[:-1]:
        mat = vec.reshape(dim, -1)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        if len(s) > 1 and s[1] > tol * s[0]:
            return None
        factors.append(u[:, 0])
        vec = s[0] * vh[0, :]
    factors.append(vec)
    result = ProductFactorization(tuple(factors))
    if np.abs(result.recompose() - state.amplitudes).max() > tol * max(state.norm, 1.0):
        return None
    return result


class OrthonormalFamily:
    """A complete labeled family of pure states on a multipartite system."""

    def __init__(self, labels, states: dict, partition: PartyPartition,
                 validate: bool = True, tol: float = DEFAULT_TOL):
        self.labels = tuple(labels)
        self.partition = partition
        self.states = dict(states)
        if set(self.labels) != set(self.states):
            raise FamilyValidationError("labels and state keys differ")
        if len(set(self.labels)) != len(self.labels):
            raise FamilyValidationError("duplicate labels")
        for label, state in self.states.items():
            if state.partition != partition:
                raise FamilyValidationError(
                    f"state {label!r} has partition {state.partition.dims}, "
                    f"expected {partition.dims}")
        if validate:
            if len(self.labels) != partition.total_dim:
                raise FamilyValidationError(
                    f"family has {len(self.labels)} members, completeness "
                    f"needs {partition.total_dim}")
            deviation = self.gram_deviation()
            if deviation > tol:
                raise FamilyValidationError(
                    f"family is not orthonormal (Gram deviation {deviation:.3e})")

    @property
    def size(self) -> int:
        return len(self.labels)

    def state(self, label) -> PureState:
        return self.states[label]

    def index(self, label) -> int:
        return self.labels.index(label)

    def members(self):
        for label in self.labels:
            yield label, self.states[label]

    def gram_matrix(self) -> np.ndarray:
        vectors = np.stack([self.states[b].amplitudes for b in self.labels])
        return vectors.conj() @ vectors.T

    def gram_deviation(self) -> float:
        gram = self.gram_matrix()
        return float(np.abs(gram - np.eye(len(self.labels))).max())


@dataclass(frozen=True)
class MemberReport:
    label: str
    product: bool
    sequential_cut_ranks: tuple[int, ...]


@dataclass(frozen=True)
class FamilyReport:
    complete: bool
    cardinality: int
    expected_cardinality: int
    orthonormal: bool
    max_gram_deviation: float
    members: tuple[MemberReport, ...]

    @property
    def entangled_labels(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.members if not m.product)

    @property
    def all_product(self) -> bool:
        return not self.entangled_labels

    @property
    def valid(self) -> bool:
        return self.complete and self.orthonormal


def check_family(family: OrthonormalFamily, tol: float = DEFAULT_TOL) -> FamilyReport:
    """Verify completeness and orthonormality; classify members as product
    or entangled.  Violations are reported, not raised."""
    expected = family.partition.total_dim
    deviation = family.gram_deviation()
    num_parties = family.partition.num_parties
    members = []
    for label, state in family.members():
        if num_parties == 1:
            ranks: tuple[int, ...] = ()
            product = True
        else:
            ranks = tuple(
                schmidt_rank(state, range(k + 1), tol)
                for k in range(num_parties - 1))
            product = product_factorize(state, tol) is not None
        members.append(MemberReport(label, product, ranks))
    return FamilyReport(
        complete=family.size == expected,
        cardinality=family.size,
        expected_cardinality=expected,
        orthonormal=deviation <= tol,
        max_gram_deviation=deviation,
        members=tuple(members))
