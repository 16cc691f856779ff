"""Candidate protocol generators and the refutation driver.

The refutation suite throws seeded random LOCC protocols (Haar-rotated local
projective measurements wired through random stochastic classical operations)
plus hand-crafted local-measurement candidates at a family, recording verdicts
and success probabilities.  For families with an entangled member no candidate
can pass; the driver asserts exactly that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classical import ClassicalProcess
from .corpus import haar_unitary
from .locc import (LoccProtocol, LoccRound, LocalInstrument, local_instrument,
                   apply_protocol, success_probability, theorem_check,
                   protocol_normalisation_defect, VERDICT_INCONCLUSIVE)
from .states import OrthonormalFamily
from .systems import SystemType


# ---------------------------------------------------------------------------
# Instrument and protocol constructors
# ---------------------------------------------------------------------------

def measurement_instrument(party: int, dim: int, unitary=None,
                           keep_state: bool = False,
                           classical_in: int = 1) -> LocalInstrument:
    """Projective measurement in the basis rotated by `unitary`.

    Destructive by default (quantum output collapses to the unit wire); with
    `keep_state` the post-measurement state is kept.  With `classical_in` > 1
    the same measurement is applied for every classical input value.
    """
    unitary = np.eye(dim) if unitary is None else np.asarray(unitary, dtype=complex)
    comps = {}
    for c in range(classical_in):
        for o in range(dim):
            basis_vector = unitary[:, o]
            if keep_state:
                kraus = np.outer(basis_vector, basis_vector.conj())
            else:
                kraus = basis_vector.conj().reshape(1, dim)
            comps[(o, c)] = [kraus]
    return local_instrument(
        party, classical_in=classical_in, classical_out=dim, quantum_in=dim,
        quantum_out=dim if keep_state else 1, components=comps, validate=False)


def conditional_measurement_instrument(party: int, dim: int, unitaries,
                                       keep_state: bool = False) -> LocalInstrument:
    """A measurement whose basis depends on the classical input value."""
    comps = {}
    for c, unitary in enumerate(unitaries):
        unitary = np.asarray(unitary, dtype=complex)
        for o in range(dim):
            v = unitary[:, o]
            kraus = np.outer(v, v.conj()) if keep_state else v.conj().reshape(1, dim)
            comps[(o, c)] = [kraus]
    return local_instrument(
        party, classical_in=len(unitaries), classical_out=dim, quantum_in=dim,
        quantum_out=dim if keep_state else 1, components=comps, validate=False)


def trivial_shared_state(n_parties: int) -> ClassicalProcess:
    """Round-one global op feeding the trivial classical value to all parties."""
    return ClassicalProcess(
        SystemType.classical(1), SystemType.classical(*([1] * n_parties)),
        np.ones((1, 1)))


def random_stochastic(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    mat = rng.random((rows, cols)) + 1e-3
    return mat / mat.sum(axis=0, keepdims=True)


def identity_post(cout_sizes, num_labels: int) -> ClassicalProcess:
    total = math.prod(cout_sizes)
    if total != num_labels:
        raise ValueError(f"outcome space {total} does not match {num_labels} labels")
    return ClassicalProcess(
        SystemType.classical(*cout_sizes), SystemType.classical(num_labels),
        np.eye(num_labels))


def assignment_post(assignment, cout_sizes, num_labels: int) -> ClassicalProcess:
    """Deterministic outcome-to-label post-processing."""
    total = math.prod(cout_sizes)
    matrix = np.zeros((num_labels, total))
    for out, label in enumerate(assignment):
        matrix[label, out] = 1.0
    return ClassicalProcess(
        SystemType.classical(*cout_sizes), SystemType.classical(num_labels), matrix)


def projective_candidate(dims, num_labels: int, unitaries=None,
                         rng: np.random.Generator | None = None,
                         post: ClassicalProcess | None = None,
                         keep_state: bool = True) -> LoccProtocol:
    """One round of local projective measurements plus classical post-processing."""
    dims = tuple(dims)
    if unitaries is None:
        unitaries = [haar_unitary(d, rng) for d in dims]
    instruments = tuple(
        measurement_instrument(i, d, unitaries[i], keep_state=keep_state)
        for i, d in enumerate(dims))
    if post is None:
        if rng is None:
            post = identity_post(dims, num_labels)
        else:
            post = ClassicalProcess(
                SystemType.classical(*dims), SystemType.classical(num_labels),
                random_stochastic(rng, num_labels, math.prod(dims)))
    return LoccProtocol(
        rounds=(LoccRound(trivial_shared_state(len(dims)), instruments),),
        post=post, discard_quantum=True, feed_quantum=False)


def two_round_candidate(dims, num_labels: int,
                        rng: np.random.Generator) -> LoccProtocol:
    """Measure, broadcast through a random stochastic op, measure again."""
    dims = tuple(dims)
    n = len(dims)
    first = tuple(
        measurement_instrument(i, d, haar_unitary(d, rng), keep_state=True)
        for i, d in enumerate(dims))
    total = math.prod(dims)
    broadcast = ClassicalProcess(
        SystemType.classical(*dims), SystemType.classical(*dims),
        random_stochastic(rng, total, total))
    second = tuple(
        conditional_measurement_instrument(
            i, d, [haar_unitary(d, rng) for _ in range(d)])
        for i, d in enumerate(dims))
    post = ClassicalProcess(
        SystemType.classical(*dims), SystemType.classical(num_labels),
        random_stochastic(rng, num_labels, total))
    return LoccProtocol(
        rounds=(LoccRound(trivial_shared_state(n), first),
                LoccRound(broadcast, second)),
        post=post, discard_quantum=True, feed_quantum=False)


def computational_candidate(dims, num_labels: int,
                            post: ClassicalProcess | None = None) -> LoccProtocol:
    """Every party measures in the computational basis (destructively)."""
    return projective_candidate(
        dims, num_labels,
        unitaries=[np.eye(d) for d in dims], post=post, keep_state=False)


# ---------------------------------------------------------------------------
# Outcome tables and optimal assignments
# ---------------------------------------------------------------------------

def with_post(protocol: LoccProtocol, post: ClassicalProcess) -> LoccProtocol:
    return LoccProtocol(protocol.rounds, post, protocol.discard_quantum,
                        protocol.feed_quantum)


def outcome_table(protocol: LoccProtocol, family: OrthonormalFamily) -> np.ndarray:
    """Measurement outcome distribution per family member, post stripped.

    Rows run over the final-round classical outcome tuples (flattened), one
    column per family label.
    """
    cout = protocol.rounds[-1].classical_out_sizes
    stripped = with_post(protocol, identity_post(cout, math.prod(cout)))
    table = np.zeros((math.prod(cout), family.size))
    for idx, (_, state) in enumerate(family.members()):
        table[:, idx] = apply_protocol(stripped, state)
    return table


def best_assignment(table: np.ndarray, prior=None) -> tuple[float, np.ndarray]:
    """Exhaustively optimal outcome-to-label assignment for a given table."""
    n_out, n_labels = table.shape
    if prior is None:
        prior = np.full(n_labels, 1.0 / n_labels)
    weighted = table * np.asarray(prior)[None, :]
    assignment = weighted.argmax(axis=1)
    return float(weighted.max(axis=1).sum()), assignment


def optimal_assignment_success(protocol: LoccProtocol, family: OrthonormalFamily,
                               prior=None) -> tuple[float, LoccProtocol]:
    """Best success achievable by re-wiring the protocol's post-processing."""
    table = outcome_table(protocol, family)
    success, assignment = best_assignment(table, prior)
    cout = protocol.rounds[-1].classical_out_sizes
    return success, with_post(
        protocol, assignment_post(assignment, cout, family.size))


# ---------------------------------------------------------------------------
# Refutation driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CandidateResult:
    name: str
    kind: str
    verdict: str
    max_deviation: float
    success: float
    optimal_assignment_success: float | None


@dataclass(frozen=True)
class RefutationResult:
    applicable: bool
    candidates: tuple[CandidateResult, ...] = ()
    entangled_labels: tuple[str, ...] = ()

    @property
    def passing_candidates(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.candidates
                     if c.verdict != VERDICT_INCONCLUSIVE)

    @property
    def max_success(self) -> float:
        return max((c.success for c in self.candidates), default=0.0)

    @property
    def max_projective_optimal_success(self) -> float:
        vals = [c.optimal_assignment_success for c in self.candidates
                if c.optimal_assignment_success is not None]
        return max(vals, default=0.0)


def generate_candidates(family: OrthonormalFamily, suite_size: int,
                        seed: int) -> list[tuple[str, str, LoccProtocol]]:
    """The seeded candidate list: hand-crafted first, then random draws."""
    dims = family.partition.dims
    n_labels = family.size
    rng = np.random.default_rng(seed)
    candidates: list[tuple[str, str, LoccProtocol]] = []
    base = computational_candidate(dims, n_labels)
    candidates.append(("computational_measurement", "projective", base))
    _, tuned = optimal_assignment_success(base, family)
    candidates.append(("computational_measurement_best_assignment",
                       "projective", tuned))
    for k in range(suite_size):
        if k % 2 == 0:
            candidates.append((f"random_projective_{k:03d}", "projective",
                               projective_candidate(dims, n_labels, rng=rng)))
        else:
            candidates.append((f"random_two_round_{k:03d}", "two_round",
                               two_round_candidate(dims, n_labels, rng)))
    return candidates


def run_refutation(family: OrthonormalFamily, suite_size: int = 100,
                   seed: int = 0, tol: float = 1e-9) -> RefutationResult:
    """Throw the candidate suite at a family with an entangled member.

    Families whose members are all product are out of this driver's scope
    (the constructive distinguisher handles them); `applicable` is False.
    """
    from .states import check_family

    report = check_family(family, tol)
    entangled = report.entangled_labels
    if not entangled:
        return RefutationResult(applicable=False)
    results = []
    for name, kind, protocol in generate_candidates(family, suite_size, seed):
        verdict = theorem_check(protocol, family, tol)
        success = success_probability(protocol, family, tol=max(tol, 1e-9))
        optimal = None
        if kind == "projective":
            optimal, _ = optimal_assignment_success(protocol, family)
        results.append(CandidateResult(
            name=name, kind=kind, verdict=verdict.verdict,
            max_deviation=verdict.distinguishing.max_deviation,
            success=success, optimal_assignment_success=optimal))
    return RefutationResult(True, tuple(results), entangled)
