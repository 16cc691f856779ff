"""Built-in state families and random generators used across tests and the CLI."""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.stats import unitary_group

from .states import OrthonormalFamily, PartyPartition, PureState


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 1:
        phase = np.exp(2j * np.pi * rng.random())
        return np.array([[phase]])
    return unitary_group.rvs(dim, random_state=rng)


def _kron_all(vectors) -> np.ndarray:
    out = np.array([1.0 + 0.0j])
    for v in vectors:
        out = np.kron(out, v)
    return out


def _tuple_label(index: tuple[int, ...], dims: tuple[int, ...]) -> str:
    if all(d <= 9 for d in dims):
        return "".join(str(i) for i in index)
    return ",".join(str(i) for i in index)


def computational_basis(dims) -> OrthonormalFamily:
    """The product basis of computational states on the given local dims."""
    partition = PartyPartition(dims)
    labels, states = [], {}
    for index in itertools.product(*(range(d) for d in partition.dims)):
        vecs = []
        for party, i in enumerate(index):
            v = np.zeros(partition.dims[party], dtype=complex)
            v[i] = 1.0
            vecs.append(v)
        label = _tuple_label(index, partition.dims)
        labels.append(label)
        states[label] = PureState(_kron_all(vecs), partition)
    return OrthonormalFamily(labels, states, partition)


def bell_basis() -> OrthonormalFamily:
    partition = PartyPartition((2, 2))
    s = 1 / math.sqrt(2)
    vectors = {
        "phi_plus": [s, 0, 0, s],
        "phi_minus": [s, 0, 0, -s],
        "psi_plus": [0, s, s, 0],
        "psi_minus": [0, s, -s, 0],
    }
    states = {k: PureState(v, partition) for k, v in vectors.items()}
    return OrthonormalFamily(list(vectors), states, partition)


def four_state_basis() -> OrthonormalFamily:
    """{|00>, |11>, |01>+|10>, |01>-|10>}, superpositions normalised."""
    partition = PartyPartition((2, 2))
    s = 1 / math.sqrt(2)
    vectors = {
        "0": [1, 0, 0, 0],
        "1": [0, 0, 0, 1],
        "+": [0, s, s, 0],
        "-": [0, s, -s, 0],
    }
    states = {k: PureState(v, partition) for k, v in vectors.items()}
    return OrthonormalFamily(list(vectors), states, partition)


def domino_basis() -> OrthonormalFamily:
    """The nine bipartite-qutrit product states arranged as dominoes.

    All members are product states, yet the family is the classic example of
    a basis that cannot be distinguished by any normalised LOCC protocol.
    """
    partition = PartyPartition((3, 3))

    def ket(i, d=3):
        v = np.zeros(d, dtype=complex)
        v[i] = 1.0
        return v

    def plus(i, j, d=3):
        return (ket(i, d) + ket(j, d)) / math.sqrt(2)

    def minus(i, j, d=3):
        return (ket(i, d) - ket(j, d)) / math.sqrt(2)

    pairs = {
        "11": (ket(1), ket(1)),
        "0(0+1)": (ket(0), plus(0, 1)),
        "0(0-1)": (ket(0), minus(0, 1)),
        "2(1+2)": (ket(2), plus(1, 2)),
        "2(1-2)": (ket(2), minus(1, 2)),
        "(1+2)0": (plus(1, 2), ket(0)),
        "(1-2)0": (minus(1, 2), ket(0)),
        "(0+1)2": (plus(0, 1), ket(2)),
        "(0-1)2": (minus(0, 1), ket(2)),
    }
    states = {k: PureState(np.kron(a, b), partition) for k, (a, b) in pairs.items()}
    return OrthonormalFamily(list(pairs), states, partition)


def random_product_family(dims, rng: np.random.Generator) -> OrthonormalFamily:
    """A random complete orthonormal family of product states.

    Party i's local basis is rotated by a Haar unitary that may depend on the
    labels chosen by earlier parties, so the family is generally not a plain
    tensor product of local bases (the domino basis shows why this extra
    generality matters).
    """
    partition = PartyPartition(dims)
    labels, states = [], {}
    unitary_cache: dict = {}
    for index in itertools.product(*(range(d) for d in partition.dims)):
        vecs = []
        for party, i in enumerate(index):
            prefix = (party,) + index[:party]
            if prefix not in unitary_cache:
                unitary_cache[prefix] = haar_unitary(partition.dims[party], rng)
            vecs.append(unitary_cache[prefix][:, i])
        label = _tuple_label(index, partition.dims)
        labels.append(label)
        states[label] = PureState(_kron_all(vecs), partition)
    return OrthonormalFamily(labels, states, partition)


BUNDLED_FAMILIES = {
    "computational_2x2": lambda: computational_basis((2, 2)),
    "bell_basis": bell_basis,
    "four_state_basis": four_state_basis,
    "domino_basis": domino_basis,
}
