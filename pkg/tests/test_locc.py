"""LOCC protocols: assembly, evaluation, reversal, expansion, builders."""

import math

import numpy as np
import pytest

import locckit as lk
from locckit import (ClassicalProcess, OrthonormalFamily, PartyPartition,
                     PureState, SystemType, apply_to_state)
from locckit.corpus import (bell_basis, computational_basis, domino_basis,
                            four_state_basis, haar_unitary,
                            random_product_family)
from locckit.errors import (EntangledMemberError, NotNormalisedError,
                            ProtocolDirectionError, WireMismatchError)
from locckit.locc import (LoccProtocol, LoccRound, apply_protocol,
                          assemble_instrument, build_product_distinguisher,
                          build_product_preparation, expand_as_product_mixture,
                          local_instrument, prepared_state,
                          protocol_as_process, protocol_is_normalised,
                          protocol_is_unital, protocol_normalisation_defect,
                          protocol_structural_difference,
                          protocol_unitality_defect, reverse_protocol,
                          success_probability, theorem_check,
                          verify_distinguishing, verify_preparation)
from locckit.states import schmidt_rank
from locckit.suite import (assignment_post, best_assignment,
                           computational_candidate, measurement_instrument,
                           outcome_table, projective_candidate,
                           trivial_shared_state, two_round_candidate,
                           with_post)

KET = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
}


def plus_minus_basis():
    """{|0+>, |0->, |1+>, |1->}: product but not computational."""
    partition = PartyPartition((2, 2))
    states = {
        a + b: PureState(np.kron(KET[a], KET[b]), partition)
        for a in "01" for b in "+-"
    }
    return OrthonormalFamily(list(states), states, partition)


def conditional_basis():
    """{|00>, |01>, |1+>, |1->}: the second basis depends on the first label."""
    partition = PartyPartition((2, 2))
    states = {
        "00": PureState(np.kron(KET["0"], KET["0"]), partition),
        "01": PureState(np.kron(KET["0"], KET["1"]), partition),
        "1+": PureState(np.kron(KET["1"], KET["+"]), partition),
        "1-": PureState(np.kron(KET["1"], KET["-"]), partition),
    }
    return OrthonormalFamily(list(states), states, partition)


# ---------------------------------------------------------------------------
# Instruments
# ---------------------------------------------------------------------------

def test_assemble_single_party_with_trivial_globals():
    inst = measurement_instrument(0, 2)
    pre = trivial_shared_state(1)
    post = ClassicalProcess(SystemType.classical(2), SystemType.classical(2), np.eye(2))
    assembled = assemble_instrument(pre, [inst], post)
    direct = inst.process
    for o in range(2):
        assert np.allclose(assembled.component((o,), (0,)),
                           direct.component((o,), (0,)))


def test_assemble_identity_everything():
    ident = local_instrument(0, 1, 1, 2, 2, {(0, 0): [np.eye(2)]})
    pre = trivial_shared_state(1)
    post = ClassicalProcess(SystemType.classical(1), SystemType.classical(1), [[1.0]])
    assembled = assemble_instrument(pre, [ident], post)
    expected = lk.HybridProcess.identity(SystemType.quantum(2))
    assert np.allclose(assembled.component((0,), (0,)), expected.component((), ()))


def test_parity_instrument_from_z_measurements_and_xor():
    # oracle: evaluate on the four computational basis states directly
    locals_ = [measurement_instrument(i, 2) for i in range(2)]
    xor = np.zeros((2, 4))
    for o1 in range(2):
        for o2 in range(2):
            xor[o1 ^ o2, o1 * 2 + o2] = 1.0
    post = ClassicalProcess(SystemType.classical(2, 2), SystemType.classical(2), xor)
    parity = assemble_instrument(trivial_shared_state(2), locals_, post)
    for b1 in range(2):
        for b2 in range(2):
            rho = np.zeros((4, 4), dtype=complex)
            rho[b1 * 2 + b2, b1 * 2 + b2] = 1.0
            branches = apply_to_state(parity, (0,), rho)
            weights = {z: branches[(z,)].trace for z in range(2)}
            assert weights[b1 ^ b2] == pytest.approx(1.0)
            assert weights[1 - (b1 ^ b2)] == pytest.approx(0.0)


def test_wire_mismatch_names_round_and_party():
    destructive = measurement_instrument(0, 2)  # quantum out collapses to 1
    keep = measurement_instrument(0, 2, keep_state=True, classical_in=2)
    post = ClassicalProcess(SystemType.classical(2), SystemType.classical(2), np.eye(2))
    with pytest.raises(WireMismatchError) as err:
        LoccProtocol(
            rounds=(LoccRound(trivial_shared_state(1), (destructive,)),
                    LoccRound(ClassicalProcess(
                        SystemType.classical(2), SystemType.classical(2), np.eye(2)),
                        (keep,))),
            post=post)
    assert "round 1" in str(err.value) and "party 0" in str(err.value)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def test_single_party_z_protocol():
    family = computational_basis((2,))
    protocol = computational_candidate((2,), 2)
    assert np.allclose(apply_protocol(protocol, family.state("1")), [0, 1])
    assert verify_distinguishing(protocol, family).passed


def test_product_distinguisher_on_point_state():
    family = computational_basis((2, 2))
    distinguisher = build_product_distinguisher(family)
    weights = apply_protocol(distinguisher, family.state("01"))
    expected = np.zeros(4)
    expected[family.index("01")] = 1.0
    assert np.allclose(weights, expected)


def test_normalised_protocol_weights_sum_to_one():
    rng = np.random.default_rng(3)
    partition = PartyPartition((2, 3))
    for k in range(5):
        protocol = (projective_candidate((2, 3), 6, rng=rng) if k % 2
                    else two_round_candidate((2, 3), 6, rng))
        amplitudes = rng.normal(size=6) + 1j * rng.normal(size=6)
        state = PureState(amplitudes / np.linalg.norm(amplitudes), partition)
        weights = apply_protocol(protocol, state)
        assert weights.sum() == pytest.approx(1.0, abs=1e-9)
        assert weights.min() >= -1e-12


def test_fold_agrees_with_materialised_process():
    # dual route: party-wise folding vs one composed hybrid process
    rng = np.random.default_rng(5)
    family = computational_basis((2, 2))
    protocol = two_round_candidate((2, 2), 4, rng)
    proc = protocol_as_process(protocol)
    for label, state in family.members():
        weights = apply_protocol(protocol, state)
        prep = lk.prepare_pure(state.amplitudes, SystemType.quantum(2, 2))
        start = lk.tensor(lk.delta_state(0, 1), prep)
        end = lk.compose(start, proc)
        direct = np.array([end.component((b,), ())[0, 0].real for b in range(4)])
        assert np.abs(weights - direct).max() < 1e-10


def test_defect_folds_agree_with_materialised_process():
    rng = np.random.default_rng(7)
    protocol = projective_candidate((2, 2), 4, rng=rng)
    proc = protocol_as_process(protocol)
    assert protocol_normalisation_defect(protocol) == pytest.approx(
        lk.normalisation_defect(proc), abs=1e-12)
    assert protocol_unitality_defect(protocol) == pytest.approx(
        lk.unitality_defect(proc), abs=1e-12)
    prep = build_product_preparation(computational_basis((2, 2)))
    assert protocol_normalisation_defect(prep) == pytest.approx(
        lk.normalisation_defect(protocol_as_process(prep)), abs=1e-12)
    assert protocol_unitality_defect(prep) == pytest.approx(
        lk.unitality_defect(protocol_as_process(prep)), abs=1e-12)


def test_apply_protocol_validates_shapes():
    family = computational_basis((2, 2))
    protocol = build_product_distinguisher(family)
    wrong = PureState([1, 0, 0, 0, 0, 0], PartyPartition((2, 3)))
    with pytest.raises(lk.DimensionMismatchError):
        apply_protocol(protocol, wrong)
    preparation = build_product_preparation(family)
    with pytest.raises(ProtocolDirectionError):
        apply_protocol(preparation, family.state("00"))


# ---------------------------------------------------------------------------
# Reversal
# ---------------------------------------------------------------------------

def test_reverse_is_involutive_componentwise():
    rng = np.random.default_rng(11)
    for protocol in (
            build_product_preparation(computational_basis((2, 2))),
            projective_candidate((2, 2), 4, rng=rng),
            two_round_candidate((2, 2), 4, rng)):
        twice = reverse_protocol(reverse_protocol(protocol))
        assert protocol_structural_difference(protocol, twice) == 0.0


def test_reverse_of_preparation_distinguishes():
    family = plus_minus_basis()
    preparation = build_product_preparation(family)
    distinguisher = reverse_protocol(preparation)
    report = verify_distinguishing(distinguisher, family)
    assert report.passed and report.max_deviation < 1e-9


def test_normalised_reverses_to_unital_and_back():
    rng = np.random.default_rng(13)
    for protocol in (
            build_product_preparation(computational_basis((2, 2))),
            projective_candidate((2, 2), 4, rng=rng),
            two_round_candidate((2, 2), 4, rng)):
        assert protocol_is_normalised(protocol, 1e-9)
        assert protocol_is_unital(reverse_protocol(protocol), 1e-9)


def test_reversal_swaps_feed_and_discard():
    rng = np.random.default_rng(17)
    protocol = projective_candidate((2, 2), 4, rng=rng)
    assert protocol.discard_quantum and not protocol.feed_quantum
    reversed_ = reverse_protocol(protocol)
    assert reversed_.feed_quantum and not reversed_.discard_quantum
    assert reversed_.quantum_input_dims == ()
    assert reversed_.quantum_output_dims == (2, 2)


# ---------------------------------------------------------------------------
# Preparation verification
# ---------------------------------------------------------------------------

def test_verify_preparation_of_built_protocol():
    for family in (computational_basis((2, 2)), plus_minus_basis(),
                   conditional_basis(), domino_basis()):
        preparation = build_product_preparation(family)
        report = verify_preparation(preparation, family)
        assert report.passed
        assert report.max_trace_distance < 1e-9


def test_verify_preparation_against_wrong_family_fails():
    right = computational_basis((2, 2))
    wrong = plus_minus_basis()
    preparation = build_product_preparation(right)
    report = verify_preparation(preparation, wrong)
    assert not report.passed
    assert report.failing_labels


def test_prepared_state_matches_target_density():
    family = conditional_basis()
    preparation = build_product_preparation(family)
    for idx, (label, state) in enumerate(family.members()):
        rho = prepared_state(preparation, idx)
        assert np.abs(rho - state.density()).max() < 1e-12


# ---------------------------------------------------------------------------
# Product-mixture expansion
# ---------------------------------------------------------------------------

def test_expansion_of_product_preparation_is_single_term():
    family = computational_basis((2, 2))
    preparation = build_product_preparation(family)
    for idx, (label, state) in enumerate(family.members()):
        mixture = expand_as_product_mixture(preparation, idx)
        assert len(mixture.terms) == 1
        weight, factors = mixture.terms[0]
        assert weight == pytest.approx(1.0)
        joint = np.array([1.0 + 0j])
        for f in factors:
            joint = np.kron(joint, f)
        assert abs(abs(np.vdot(joint, state.amplitudes)) - 1.0) < 1e-12


def test_expansion_recomposes_to_protocol_output():
    rng = np.random.default_rng(19)
    family = bell_basis()
    for protocol in (computational_candidate((2, 2), 4),
                     projective_candidate((2, 2), 4, rng=rng),
                     two_round_candidate((2, 2), 4, rng)):
        reversed_ = reverse_protocol(protocol)
        for b in range(4):
            mixture = expand_as_product_mixture(reversed_, b)
            direct = prepared_state(reversed_, b)
            assert np.abs(mixture.recompose() - direct).max() < 1e-8
            for _, factors in mixture.terms:
                joint = np.array([1.0 + 0j])
                for f in factors:
                    joint = np.kron(joint, f)
                state = PureState(joint, family.partition)
                assert schmidt_rank(state, [0]) == 1


def test_expansion_fidelity_with_entangled_targets_below_one():
    family = bell_basis()
    protocol = computational_candidate((2, 2), 4)
    reversed_ = reverse_protocol(protocol)
    for idx, (label, state) in enumerate(family.members()):
        mixture = expand_as_product_mixture(reversed_, idx)
        assert mixture.max_term_fidelity(state) <= 0.5 + 1e-9
        assert mixture.mixture_fidelity(state) < 1 - 1e-6


def test_expansion_direction_check():
    family = computational_basis((2, 2))
    distinguisher = build_product_distinguisher(family)
    with pytest.raises(ProtocolDirectionError):
        expand_as_product_mixture(distinguisher, 0)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def test_build_preparation_is_normalised():
    for family in (computational_basis((2, 2)), plus_minus_basis(),
                   conditional_basis(), domino_basis()):
        preparation = build_product_preparation(family)
        assert protocol_normalisation_defect(preparation) < 1e-9


def test_build_distinguisher_excludes_entangled_families():
    with pytest.raises(EntangledMemberError) as err:
        build_product_distinguisher(bell_basis())
    assert "phi_plus" in str(err.value)


def test_build_distinguisher_on_random_product_family():
    rng = np.random.default_rng(23)
    family = random_product_family((2, 2, 3), rng)
    distinguisher = build_product_distinguisher(family)
    report = verify_distinguishing(distinguisher, family)
    assert report.passed and report.max_deviation < 1e-9
    assert protocol_is_unital(distinguisher, 1e-9)


def test_distinguisher_is_measurement_plus_label_assembly():
    family = computational_basis((2, 2))
    distinguisher = build_product_distinguisher(family)
    # each party's reversed instrument is a computational-basis effect family
    for inst in distinguisher.rounds[0].locals:
        for b in range(4):
            comp = inst.component(b, 0)
            assert comp.shape == (2, 2)
    report = verify_distinguishing(distinguisher, family)
    assert report.passed


# ---------------------------------------------------------------------------
# Verdicts and success probability
# ---------------------------------------------------------------------------

def test_theorem_check_consistent_on_product_family():
    family = computational_basis((2, 2))
    verdict = theorem_check(build_product_distinguisher(family), family)
    assert verdict.verdict == "CONSISTENT_DISTINGUISHES"


def test_theorem_check_inconclusive_on_bell():
    family = bell_basis()
    verdict = theorem_check(computational_candidate((2, 2), 4), family)
    assert verdict.verdict == "INCONCLUSIVE"
    assert verdict.evidence["failing_labels"]


def test_theorem_check_inconclusive_on_nondistinguishing_product():
    family = computational_basis((2, 2))
    rng = np.random.default_rng(29)
    verdict = theorem_check(projective_candidate((2, 2), 4, rng=rng), family)
    assert verdict.verdict == "INCONCLUSIVE"


def test_success_probability_perfect_and_guessing():
    family = computational_basis((2, 2))
    distinguisher = build_product_distinguisher(family)
    assert success_probability(distinguisher, family) == pytest.approx(1.0)
    guess = np.zeros((4, 4))
    guess[0, :] = 1.0
    fixed = with_post(computational_candidate((2, 2), 4),
                      ClassicalProcess(SystemType.classical(2, 2),
                                       SystemType.classical(4), guess))
    assert success_probability(fixed, family) == pytest.approx(0.25)


def test_zz_with_best_assignment_on_bell_is_half():
    family = bell_basis()
    candidate = computational_candidate((2, 2), 4)
    table = outcome_table(candidate, family)
    # oracle: Born-rule outcome table computed from the amplitudes
    born = np.zeros((4, 4))
    for col, (_, state) in enumerate(family.members()):
        for out in range(4):
            born[out, col] = abs(state.amplitudes[out]) ** 2
    assert np.abs(table - born).max() < 1e-12
    success, assignment = best_assignment(table)
    assert success == pytest.approx(0.5, abs=1e-9)
    tuned = with_post(candidate, assignment_post(assignment, (2, 2), 4))
    assert success_probability(tuned, family) == pytest.approx(0.5, abs=1e-9)


def test_success_probability_rejects_unnormalised():
    family = computational_basis((2, 2))
    lossy = local_instrument(0, 1, 1, 2, 2, {(0, 0): [np.eye(2) * 0.5]})
    other = local_instrument(1, 1, 1, 2, 2, {(0, 0): [np.eye(2)]})
    post = ClassicalProcess(SystemType.classical(1, 1), SystemType.classical(4),
                            np.array([[1.0], [0.0], [0.0], [0.0]]))
    protocol = LoccProtocol(
        rounds=(LoccRound(trivial_shared_state(2), (lossy, other)),), post=post)
    with pytest.raises(NotNormalisedError):
        success_probability(protocol, family)
    with pytest.raises(lk.LoccKitError):
        success_probability(build_product_distinguisher(family), family,
                            prior=[0.5, 0.5, 0.5, 0.5])
