"""State oracles: Schmidt ranks, product factorization, family checks."""

import math

import numpy as np
import pytest

from locckit import (OrthonormalFamily, PartyPartition, PureState,
                     check_family, product_factorize, schmidt_rank)
from locckit.corpus import (bell_basis, computational_basis, domino_basis,
                            four_state_basis, haar_unitary,
                            random_product_family)
from locckit.errors import FamilyValidationError, LoccKitError

BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def kron_all(*vectors):
    out = np.array([1.0 + 0.0j])
    for v in vectors:
        out = np.kron(out, v)
    return out


def random_state(rng, dims):
    v = rng.normal(size=math.prod(dims)) + 1j * rng.normal(size=math.prod(dims))
    return PureState(v / np.linalg.norm(v), PartyPartition(dims))


def test_schmidt_rank_of_products_and_bell():
    two = PartyPartition((2, 2))
    assert schmidt_rank(PureState([1, 0, 0, 0], two), [0]) == 1
    bell = PureState(BELL, two)
    assert schmidt_rank(bell, [0]) == 2
    # oracle: singular values of the reshaped amplitude matrix
    singular = np.linalg.svd(BELL.reshape(2, 2), compute_uv=False)
    assert np.allclose(singular, [1 / np.sqrt(2)] * 2)


def test_schmidt_rank_three_party_cut():
    three = PartyPartition((2, 2, 2))
    psi = kron_all(np.array([1, 0]), np.array([0, 1, 1, 0]) / np.sqrt(2))
    state = PureState(psi, three)
    assert schmidt_rank(state, [0]) == 1
    assert schmidt_rank(state, [1]) == 2
    assert schmidt_rank(state, [0, 1]) == 2


def test_schmidt_rank_validates_bipartition():
    state = PureState(BELL, PartyPartition((2, 2)))
    with pytest.raises(LoccKitError):
        schmidt_rank(state, [])
    with pytest.raises(LoccKitError):
        schmidt_rank(state, [0, 1])
    with pytest.raises(LoccKitError):
        schmidt_rank(state, [2])


def test_schmidt_rank_invariant_under_local_unitaries():
    rng = np.random.default_rng(11)
    for _ in range(10):
        state = random_state(rng, (2, 3, 2))
        cut = [0] if rng.random() < 0.5 else [0, 1]
        before = schmidt_rank(state, cut, 1e-8)
        locals_ = [haar_unitary(d, rng) for d in (2, 3, 2)]
        rotated = np.einsum(
            "abc,ia,jb,kc->ijk", state.as_tensor(), *locals_).reshape(-1)
        after = schmidt_rank(PureState(rotated, state.partition), cut, 1e-8)
        assert before == after


def test_product_factorize_simple_product():
    state = PureState([0, 1, 0, 0], PartyPartition((2, 2)))  # |01>
    factorization = product_factorize(state)
    assert factorization is not None
    a, b = factorization.factors
    assert abs(abs(np.vdot(a, [1, 0])) - 1) < 1e-12
    assert abs(abs(np.vdot(b, [0, 1])) - 1) < 1e-12
    assert np.abs(factorization.recompose() - state.amplitudes).max() < 1e-12


def test_product_factorize_rejects_entangled():
    assert product_factorize(PureState(BELL, PartyPartition((2, 2)))) is None
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = 1 / np.sqrt(2)
    assert product_factorize(PureState(ghz, PartyPartition((2, 2, 2)))) is None


def test_product_factorize_recomposes_random_products():
    rng = np.random.default_rng(13)
    for _ in range(20):
        dims = (2, 3, 2)
        vecs = [rng.normal(size=d) + 1j * rng.normal(size=d) for d in dims]
        vecs = [v / np.linalg.norm(v) for v in vecs]
        state = PureState(kron_all(*vecs), PartyPartition(dims))
        factorization = product_factorize(state)
        assert factorization is not None
        assert np.abs(factorization.recompose() - state.amplitudes).max() < 1e-9


def test_check_family_computational():
    report = check_family(computational_basis((2, 2)))
    assert report.valid and report.all_product
    assert report.max_gram_deviation == 0.0
    assert all(m.sequential_cut_ranks == (1,) for m in report.members)


def test_check_family_four_state():
    report = check_family(four_state_basis())
    assert report.valid
    assert set(report.entangled_labels) == {"+", "-"}


def test_check_family_reports_incompleteness():
    partition = PartyPartition((2, 2))
    states = {
        "a": PureState([1, 0, 0, 0], partition),
        "b": PureState([0, 1, 0, 0], partition),
        "c": PureState([0, 0, 1, 0], partition),
    }
    family = OrthonormalFamily(list(states), states, partition, validate=False)
    report = check_family(family)
    assert not report.complete
    assert report.cardinality == 3 and report.expected_cardinality == 4
    with pytest.raises(FamilyValidationError):
        OrthonormalFamily(list(states), states, partition)


def test_check_family_reports_gram_violation():
    partition = PartyPartition((2, 2))
    overlap = np.array([1, 1, 0, 0], dtype=complex) / np.sqrt(2)
    states = {
        "a": PureState([1, 0, 0, 0], partition),
        "b": PureState(overlap, partition),
        "c": PureState([0, 0, 1, 0], partition),
        "d": PureState([0, 0, 0, 1], partition),
    }
    family = OrthonormalFamily(list(states), states, partition, validate=False)
    report = check_family(family)
    assert report.complete and not report.orthonormal
    assert report.max_gram_deviation == pytest.approx(1 / np.sqrt(2))


def test_bell_basis_members_all_entangled():
    report = check_family(bell_basis())
    assert report.valid
    assert len(report.entangled_labels) == 4


def test_domino_basis_is_product_and_complete():
    family = domino_basis()
    report = check_family(family)
    assert report.valid and report.all_product
    assert family.size == 9


def test_random_product_family_is_valid():
    rng = np.random.default_rng(17)
    for dims in ((2, 2), (2, 3), (2, 2, 2)):
        family = random_product_family(dims, rng)
        report = check_family(family, 1e-8)
        assert report.valid and report.all_product


def test_family_validates_partition_match():
    partition = PartyPartition((2, 2))
    other = PartyPartition((4,))
    states = {"a": PureState([1, 0, 0, 0], other)}
    with pytest.raises(FamilyValidationError):
        OrthonormalFamily(["a"], states, partition, validate=False)
