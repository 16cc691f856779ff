"""LOCC instruments and multi-round protocols.

A protocol is a sequence of rounds, each a global classical operation followed
by one local instrument per party, plus a final classical post-processing map.
Quantum wires pass over the global operations untouched.  The same structure
serves both directions: a distinguishing protocol consumes a joint quantum
state and outputs a label; its time-reverse consumes a label and prepares a
state.  Reversal daggers every component and swaps the boundary conventions
(discarded quantum outputs become maximally mixed feeds).

Evaluation never materialises a protocol as one big process: states are
folded through the rounds party by party, and normalisation checks fold the
discarding effect backwards, so costs track the protocol's classical sparsity.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .classical import ClassicalProcess, Process
from .errors import (DimensionMismatchError, EntangledMemberError,
                     LoccKitError, NotNormalisedError, ProtocolDirectionError,
                     WireMismatchError)
from .quantum import (HybridProcess, apply_choi, choi_from_kraus,
                      discard_hybrid, embed_classical, identity_choi,
                      maximally_mixed_feed, validate_choi)
from .states import (OrthonormalFamily, PureState, check_family,
                     product_factorize)
from .systems import ClassicalSystem, QuantumSystem, SystemType

DEFAULT_TOL = 1e-9

# A global classical operation is just a classical process acting on the
# product of the parties' classical wires; quantum wires pass overhead.
GlobalClassicalOp = ClassicalProcess


# ---------------------------------------------------------------------------
# Protocol structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LocalInstrument:
    """One party's operation in a round: [C cin, Q qin] -> [C cout, Q qout]."""

    party: int
    process: HybridProcess

    def __post_init__(self):
        for name, st in (("source", self.process.source), ("target", self.process.target)):
            factors = st.factors
            ok = (len(factors) == 2
                  and isinstance(factors[0], ClassicalSystem)
                  and isinstance(factors[1], QuantumSystem))
            if not ok:
                raise WireMismatchError(
                    f"local instrument {name} must be [classical, quantum], got {st}",
                    party=self.party)

    @property
    def classical_in(self) -> int:
        return self.process.source.factors[0].size

    @property
    def classical_out(self) -> int:
        return self.process.target.factors[0].size

    @property
    def quantum_in(self) -> int:
        return self.process.source.factors[1].dim

    @property
    def quantum_out(self) -> int:
        return self.process.target.factors[1].dim

    def dagger(self) -> "LocalInstrument":
        return LocalInstrument(self.party, self.process.dagger())

    def component(self, cout: int, cin: int) -> np.ndarray | None:
        return self.process.components.get(((cout,), (cin,)))

    def components_by_cin(self) -> dict[int, list[tuple[int, np.ndarray]]]:
        out: dict[int, list[tuple[int, np.ndarray]]] = {}
        for ((cout,), (cin,)), mat in self.process.components.items():
            out.setdefault(cin, []).append((cout, mat))
        for lst in out.values():
            lst.sort(key=lambda t: t[0])
        return out

    def components_by_cout(self) -> dict[int, list[tuple[int, np.ndarray]]]:
        out: dict[int, list[tuple[int, np.ndarray]]] = {}
        for ((cout,), (cin,)), mat in self.process.components.items():
            out.setdefault(cout, []).append((cin, mat))
        for lst in out.values():
            lst.sort(key=lambda t: t[0])
        return out


def local_instrument(party: int, classical_in: int, classical_out: int,
                     quantum_in: int, quantum_out: int, components,
                     validate: bool = True) -> LocalInstrument:
    """Build a local instrument from {(cout, cin): Choi or Kraus list}."""
    source = SystemType((ClassicalSystem(classical_in), QuantumSystem(quantum_in)))
    target = SystemType((ClassicalSystem(classical_out), QuantumSystem(quantum_out)))
    comps = {}
    for (cout, cin), value in components.items():
        if isinstance(value, (list, tuple)):
            mat = choi_from_kraus(value, quantum_in, quantum_out)
        else:
            mat = np.asarray(value, dtype=complex)
        comps[((cout,), (cin,))] = mat
    return LocalInstrument(
        party, HybridProcess(source, target, comps, validate=validate))


@dataclass(frozen=True, eq=False)
class LoccRound:
    """A global classical operation followed by per-party local instruments."""

    global_op: ClassicalProcess
    locals: tuple[LocalInstrument, ...]

    def __post_init__(self):
        object.__setattr__(self, "locals", tuple(self.locals))
        for i, inst in enumerate(self.locals):
            if inst.party != i:
                raise WireMismatchError(
                    f"instrument for party {inst.party} at position {i}", party=i)

    @property
    def classical_in_sizes(self) -> tuple[int, ...]:
        return tuple(inst.classical_in for inst in self.locals)

    @property
    def classical_out_sizes(self) -> tuple[int, ...]:
        return tuple(inst.classical_out for inst in self.locals)

    @property
    def quantum_in_dims(self) -> tuple[int, ...]:
        return tuple(inst.quantum_in for inst in self.locals)

    @property
    def quantum_out_dims(self) -> tuple[int, ...]:
        return tuple(inst.quantum_out for inst in self.locals)


@dataclass(frozen=True, eq=False)
class LoccProtocol:
    """R >= 1 rounds plus classical post-processing to the label wire.

    `discard_quantum` caps residual quantum outputs with discarding;
    `feed_quantum` feeds the first round's quantum inputs with the
    time-reverse of discarding (the unnormalised maximally mixed state), which
    is how reversal of a discarding protocol is represented.
    """

    rounds: tuple[LoccRound, ...]
    post: ClassicalProcess
    discard_quantum: bool = True
    feed_quantum: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rounds", tuple(self.rounds))
        if not self.rounds:
            raise WireMismatchError("a protocol needs at least one round")
        n = len(self.rounds[0].locals)
        first = self.rounds[0].global_op
        if len(first.source.factors) != 1:
            raise WireMismatchError(
                "round 1's global operation must have a single classical "
                f"input wire, got {first.source}", round_index=0)
        for r, rnd in enumerate(self.rounds):
            if len(rnd.locals) != n:
                raise WireMismatchError(
                    f"round has {len(rnd.locals)} parties, expected {n}",
                    round_index=r)
            if rnd.global_op.target.classical_sizes != rnd.classical_in_sizes:
                raise WireMismatchError(
                    f"global op target {rnd.global_op.target.classical_sizes} "
                    f"does not match instruments' classical inputs "
                    f"{rnd.classical_in_sizes}", round_index=r)
            if r > 0:
                prev = self.rounds[r - 1]
                if rnd.global_op.source.classical_sizes != prev.classical_out_sizes:
                    raise WireMismatchError(
                        f"global op source {rnd.global_op.source.classical_sizes} "
                        f"does not match previous round's classical outputs "
                        f"{prev.classical_out_sizes}", round_index=r)
                for i in range(n):
                    if rnd.locals[i].quantum_in != prev.locals[i].quantum_out:
                        raise WireMismatchError(
                            f"quantum wire {prev.locals[i].quantum_out} -> "
                            f"{rnd.locals[i].quantum_in}", round_index=r, party=i)
        if self.post.source.classical_sizes != self.rounds[-1].classical_out_sizes:
            raise WireMismatchError(
                f"post-processing source {self.post.source.classical_sizes} does "
                f"not match final classical outputs "
                f"{self.rounds[-1].classical_out_sizes}")
        if len(self.post.target.factors) != 1:
            raise WireMismatchError(
                f"post-processing must target a single label wire, got "
                f"{self.post.target}")

    @property
    def num_parties(self) -> int:
        return len(self.rounds[0].locals)

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)

    @property
    def input_size(self) -> int:
        return self.rounds[0].global_op.source.classical_dim

    @property
    def num_labels(self) -> int:
        return self.post.target.classical_dim

    @property
    def quantum_input_dims(self) -> tuple[int, ...]:
        """Open quantum input dims; empty when the inputs are fed internally."""
        if self.feed_quantum:
            return ()
        return self.rounds[0].quantum_in_dims

    @property
    def quantum_output_dims(self) -> tuple[int, ...]:
        if self.discard_quantum:
            return ()
        return self.rounds[-1].quantum_out_dims


# ---------------------------------------------------------------------------
# Folding machinery
# ---------------------------------------------------------------------------

def _apply_component_stack(rho: np.ndarray, qdims: list[int], slot: int,
                           stack: np.ndarray, qout: int) -> np.ndarray:
    """Apply a stack of CP components to one tensor slot of a joint matrix.

    `rho` has shape (Q, Q) for Q = prod(qdims); the result has shape
    (n, Q', Q') with the slot dimension replaced by `qout`.
    """
    qin = qdims[slot]
    pre = math.prod(qdims[:slot])
    post = math.prod(qdims[slot + 1:])
    rho6 = rho.reshape(pre, qin, post, pre, qin, post)
    stack5 = stack.reshape(-1, qin, qout, qin, qout)
    out = np.einsum("pisqjt,niajb->npasqbt", rho6, stack5)
    q_new = pre * qout * post
    return out.reshape(-1, q_new, q_new)


def _backward_component_stack(effect: np.ndarray, qdims: list[int], slot: int,
                              stack: np.ndarray, qin: int) -> np.ndarray:
    """Pull an effect operator back through a stack of CP components.

    tr(E' rho) == tr(E Phi(rho)) for every rho, slot-wise.
    """
    qout = qdims[slot]
    pre = math.prod(qdims[:slot])
    post = math.prod(qdims[slot + 1:])
    e6 = effect.reshape(pre, qout, post, pre, qout, post)
    stack5 = stack.reshape(-1, qin, qout, qin, qout)
    out = np.einsum("pasqbt,njbia->npisqjt", e6, stack5)
    q_new = pre * qin * post
    return out.reshape(-1, q_new, q_new)


def _fold_classical(branches: dict, op: ClassicalProcess,
                    backward: bool = False) -> dict:
    """Recombine classical branch keys through a global classical operation."""
    src, tgt = op.source, op.target
    out: dict = {}
    for key, mat in branches.items():
        if backward:
            flat = tgt.flatten_classical(key)
            row = op.matrix[flat]
            for xf in np.nonzero(row)[0]:
                new = src.unflatten_classical(int(xf))
                out[new] = out.get(new, 0) + row[xf] * mat
        else:
            flat = src.flatten_classical(key)
            col = op.matrix[:, flat]
            for yf in np.nonzero(col)[0]:
                new = tgt.unflatten_classical(int(yf))
                out[new] = out.get(new, 0) + col[yf] * mat
    return out


def _fold_round_forward(branches: dict, rnd: LoccRound) -> dict:
    qdims = list(rnd.quantum_in_dims)
    for i, inst in enumerate(rnd.locals):
        by_cin = inst.components_by_cin()
        out: dict = {}
        for key, rho in branches.items():
            options = by_cin.get(key[i], ())
            if not options:
                continue
            stack = np.stack([mat for _, mat in options])
            results = _apply_component_stack(rho, qdims, i, stack, inst.quantum_out)
            for (cout, _), res in zip(options, results):
                new_key = key[:i] + (cout,) + key[i + 1:]
                out[new_key] = out.get(new_key, 0) + res
        branches = out
        qdims[i] = inst.quantum_out
    return branches


def _fold_round_backward(effects: dict, rnd: LoccRound) -> dict:
    qdims = list(rnd.quantum_out_dims)
    for i in reversed(range(len(rnd.locals))):
        inst = rnd.locals[i]
        by_cout = inst.components_by_cout()
        out: dict = {}
        for key, eff in effects.items():
            options = by_cout.get(key[i], ())
            if not options:
                continue
            stack = np.stack([mat for _, mat in options])
            results = _backward_component_stack(eff, qdims, i, stack, inst.quantum_in)
            for (cin, _), res in zip(options, results):
                new_key = key[:i] + (cin,) + key[i + 1:]
                out[new_key] = out.get(new_key, 0) + res
        effects = out
        qdims[i] = inst.quantum_in
    return effects


def _forward_branches(protocol: LoccProtocol, input_index: int,
                      rho: np.ndarray | None) -> dict:
    """Fold a classical input (and optional joint state) through the protocol.

    Returns branches over the post-processing target keyed by 1-tuples, each a
    joint matrix over the residual quantum outputs (discarding is NOT applied;
    callers trace if they need weights).
    """
    qin_total = math.prod(protocol.rounds[0].quantum_in_dims)
    if protocol.feed_quantum:
        start = np.eye(qin_total, dtype=complex)
        if rho is not None:
            raise ProtocolDirectionError(
                "protocol feeds its own quantum inputs; no state expected")
    elif rho is None:
        if qin_total != 1:
            raise ProtocolDirectionError(
                f"protocol has open quantum inputs "
                f"{protocol.rounds[0].quantum_in_dims}; a state is required")
        start = np.array([[1.0 + 0.0j]])
    else:
        if rho.shape != (qin_total, qin_total):
            raise DimensionMismatchError(
                (qin_total, qin_total), rho.shape, context="protocol input state")
        start = np.asarray(rho, dtype=complex)
    branches = {(input_index,): start}
    for r, rnd in enumerate(protocol.rounds):
        branches = _fold_classical(branches, rnd.global_op)
        branches = _fold_round_forward(branches, rnd)
    return _fold_classical(branches, protocol.post)


def protocol_normalisation_defect(protocol: LoccProtocol) -> float:
    """Distance from `discard o P == discard` via a backward effect fold."""
    qout_total = math.prod(protocol.rounds[-1].quantum_out_dims)
    eye_out = np.eye(qout_total, dtype=complex)
    effects = {(b,): eye_out for b in range(protocol.num_labels)}
    effects = _fold_classical(effects, protocol.post, backward=True)
    for rnd in reversed(protocol.rounds):
        effects = _fold_round_backward(effects, rnd)
        effects = _fold_classical(effects, rnd.global_op, backward=True)
    qin_total = math.prod(protocol.rounds[0].quantum_in_dims)
    if protocol.feed_quantum:
        effects = {key: np.array([[np.trace(eff)]]) for key, eff in effects.items()}
        expected = np.eye(1)
    else:
        expected = np.eye(qin_total)
    defect = 0.0
    for x in range(protocol.input_size):
        eff = effects.get((x,))
        if eff is None:
            defect = max(defect, 1.0)
        else:
            defect = max(defect, float(np.abs(eff - expected).max()))
    return defect


def protocol_unitality_defect(protocol: LoccProtocol) -> float:
    """Distance of P applied to the reversed discard from the reversed discard."""
    total = 0.0
    qout_total = math.prod(protocol.rounds[-1].quantum_out_dims)
    acc: dict = {}
    for x in range(protocol.input_size):
        if protocol.feed_quantum:
            branches = _forward_branches(protocol, x, None)
        else:
            qin_total = math.prod(protocol.rounds[0].quantum_in_dims)
            branches = _forward_branches(protocol, x, np.eye(qin_total, dtype=complex))
        for key, mat in branches.items():
            acc[key] = acc.get(key, 0) + mat
    for b in range(protocol.num_labels):
        mat = acc.get((b,), np.zeros((qout_total, qout_total)))
        if protocol.discard_quantum:
            total = max(total, abs(float(np.trace(mat).real) - 1.0))
        else:
            total = max(total, float(np.abs(mat - np.eye(qout_total)).max()))
    return total


def protocol_is_normalised(protocol: LoccProtocol, tol: float = DEFAULT_TOL) -> bool:
    return protocol_normalisation_defect(protocol) <= tol


def protocol_is_unital(protocol: LoccProtocol, tol: float = DEFAULT_TOL) -> bool:
    return protocol_unitality_defect(protocol) <= tol


# ---------------------------------------------------------------------------
# Whole-protocol process materialisation (small protocols only)
# ---------------------------------------------------------------------------

def _interleaved(csizes, qdims) -> SystemType:
    factors = []
    for c, q in zip(csizes, qdims):
        factors.extend([ClassicalSystem(c), QuantumSystem(q)])
    return SystemType(factors)


def protocol_as_process(protocol: LoccProtocol) -> HybridProcess:
    """Compose the whole protocol into a single hybrid process.

    Exponential in the number of classical wires; meant for small protocols
    (tests, serialisation checks), not for the evaluation paths.
    """
    rnd0 = protocol.rounds[0]
    qin = rnd0.quantum_in_dims
    source = SystemType.classical(protocol.input_size).tensor(SystemType.quantum(*qin))
    proc = embed_classical(rnd0.global_op, source,
                           _interleaved(rnd0.classical_in_sizes, qin))
    for r, rnd in enumerate(protocol.rounds):
        if r > 0:
            prev = protocol.rounds[r - 1]
            proc = proc.then(embed_classical(
                rnd.global_op,
                _interleaved(prev.classical_out_sizes, rnd.quantum_in_dims),
                _interleaved(rnd.classical_in_sizes, rnd.quantum_in_dims)))
        layer = None
        for inst in rnd.locals:
            layer = inst.process if layer is None else layer.tensor(inst.process)
        proc = proc.then(layer)
    last = protocol.rounds[-1]
    qout = last.quantum_out_dims
    target = SystemType.classical(protocol.num_labels).tensor(SystemType.quantum(*qout))
    proc = proc.then(embed_classical(
        protocol.post, _interleaved(last.classical_out_sizes, qout), target))
    if protocol.discard_quantum:
        ident = HybridProcess.identity(SystemType.classical(protocol.num_labels))
        proc = proc.then(ident.tensor(discard_hybrid(SystemType.quantum(*qout))))
    if protocol.feed_quantum:
        feeds = HybridProcess.identity(SystemType.classical(protocol.input_size))
        for d in qin:
            feeds = feeds.tensor(maximally_mixed_feed(d))
        proc = feeds.then(proc)
    return proc


def assemble_instrument(pre: ClassicalProcess, locals: list[LocalInstrument],
                        post: ClassicalProcess) -> HybridProcess:
    """One LOCC instrument: global op, local instruments, global op.

    Quantum wires pass over both global operations; the result is a single
    hybrid process from [C pre-in, Q inputs] to [C post-out, Q outputs].
    """
    locals = tuple(locals)
    qin = tuple(inst.quantum_in for inst in locals)
    qout = tuple(inst.quantum_out for inst in locals)
    cin = tuple(inst.classical_in for inst in locals)
    cout = tuple(inst.classical_out for inst in locals)
    if pre.target.classical_sizes != cin:
        raise WireMismatchError(
            f"pre-op target {pre.target.classical_sizes} vs instrument inputs {cin}")
    if post.source.classical_sizes != cout:
        raise WireMismatchError(
            f"post-op source {post.source.classical_sizes} vs instrument outputs {cout}")
    source = SystemType(
        tuple(ClassicalSystem(s) for s in pre.source.classical_sizes)
        + tuple(QuantumSystem(d) for d in qin))
    target = SystemType(
        tuple(ClassicalSystem(s) for s in post.target.classical_sizes)
        + tuple(QuantumSystem(d) for d in qout))
    proc = embed_classical(pre, source, _interleaved(cin, qin))
    layer = None
    for inst in locals:
        layer = inst.process if layer is None else layer.tensor(inst.process)
    proc = proc.then(layer)
    return proc.then(embed_classical(post, _interleaved(cout, qout), target))


# ---------------------------------------------------------------------------
# Evaluation and verification
# ---------------------------------------------------------------------------

def apply_protocol(protocol: LoccProtocol, state: PureState) -> np.ndarray:
    """Run a distinguishing-direction protocol on a state.

    Returns the weight vector over the label set (residual quantum outputs
    are discarded; for a normalised protocol the weights sum to one).
    """
    if protocol.input_size != 1:
        raise ProtocolDirectionError(
            f"distinguishing protocols take a trivial classical input, "
            f"got size {protocol.input_size}")
    dims = protocol.quantum_input_dims
    if state.partition.dims != dims:
        raise DimensionMismatchError(
            dims, state.partition.dims, context="protocol party dimensions")
    branches = _forward_branches(protocol, 0, state.density())
    weights = np.zeros(protocol.num_labels)
    for (b,), mat in branches.items():
        weights[b] += float(np.trace(mat).real)
    return weights


def prepared_state(protocol: LoccProtocol, label_index: int) -> np.ndarray:
    """Run a preparation-direction protocol on a point label distribution.

    Returns the joint output density matrix (classical outputs marginalised).
    """
    if not 0 <= label_index < protocol.input_size:
        raise LoccKitError(
            f"label index {label_index} out of range for input size "
            f"{protocol.input_size}")
    if protocol.discard_quantum or math.prod(protocol.quantum_output_dims) == 1:
        raise ProtocolDirectionError(
            "preparation evaluation needs open quantum outputs")
    if not protocol.feed_quantum and math.prod(protocol.rounds[0].quantum_in_dims) != 1:
        raise ProtocolDirectionError(
            "preparation evaluation needs trivial or fed quantum inputs")
    branches = _forward_branches(protocol, label_index, None)
    qout_total = math.prod(protocol.quantum_output_dims)
    rho = np.zeros((qout_total, qout_total), dtype=complex)
    for _, mat in branches.items():
        rho += mat
    return rho


@dataclass(frozen=True)
class DistinguishingReport:
    per_label: dict
    max_deviation: float
    passed: bool

    @property
    def failing_labels(self) -> tuple:
        return tuple(sorted(k for k, v in self.per_label.items() if not v[1]))


def verify_distinguishing(protocol: LoccProtocol, family: OrthonormalFamily,
                          tol: float = DEFAULT_TOL) -> DistinguishingReport:
    """Check that the protocol maps each family member to its own label.

    Per label, the deviation is the max-norm distance of the output weight
    vector from the point distribution on that label.
    """
    per_label = {}
    worst = 0.0
    for idx, (label, state) in enumerate(family.members()):
        weights = apply_protocol(protocol, state)
        point = np.zeros(len(weights))
        point[idx] = 1.0
        deviation = float(np.abs(weights - point).max())
        per_label[label] = (deviation, deviation <= tol)
        worst = max(worst, deviation)
    return DistinguishingReport(per_label, worst, worst <= tol)


@dataclass(frozen=True)
class PreparationReport:
    per_label: dict
    max_trace_distance: float
    passed: bool

    @property
    def failing_labels(self) -> tuple:
        return tuple(sorted(k for k, v in self.per_label.items() if not v[1]))


def _trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    eigvals = np.linalg.eigvalsh(a - b)
    return 0.5 * float(np.abs(eigvals).sum())


def verify_preparation(protocol: LoccProtocol, family: OrthonormalFamily,
                       tol: float = DEFAULT_TOL) -> PreparationReport:
    """Check that the protocol prepares each family member from its label.

    The deviation per label is the trace distance between the prepared state
    and the target projector.
    """
    if protocol.input_size != family.size:
        raise ProtocolDirectionError(
            f"protocol takes classical input of size {protocol.input_size}, "
            f"family has {family.size} labels")
    if protocol.quantum_output_dims != family.partition.dims:
        raise DimensionMismatchError(
            family.partition.dims, protocol.quantum_output_dims,
            context="prepared party dimensions")
    per_label = {}
    worst = 0.0
    for idx, (label, state) in enumerate(family.members()):
        rho = prepared_state(protocol, idx)
        distance = _trace_distance(rho, state.density())
        per_label[label] = (distance, distance <= tol)
        worst = max(worst, distance)
    return PreparationReport(per_label, worst, worst <= tol)


# ---------------------------------------------------------------------------
# Time-reversal
# ---------------------------------------------------------------------------

def reverse_protocol(protocol: LoccProtocol) -> LoccProtocol:
    """Dagger every component and run the rounds backwards.

    The post-processing becomes the first round's classical feed and vice
    versa; discarded quantum outputs become maximally mixed feeds.  The
    operation is involutive componentwise.
    """
    num_rounds = protocol.num_rounds
    rounds = []
    for k in range(num_rounds):
        global_op = (protocol.post if k == 0
                     else protocol.rounds[num_rounds - k].global_op).dagger()
        locals_ = tuple(inst.dagger()
                        for inst in protocol.rounds[num_rounds - 1 - k].locals)
        rounds.append(LoccRound(global_op, locals_))
    return LoccProtocol(
        rounds=tuple(rounds),
        post=protocol.rounds[0].global_op.dagger(),
        discard_quantum=protocol.feed_quantum,
        feed_quantum=protocol.discard_quantum)


def protocol_structural_difference(a: LoccProtocol, b: LoccProtocol) -> float:
    """Max componentwise difference between two protocols' descriptions."""
    if (a.num_rounds != b.num_rounds or a.num_parties != b.num_parties
            or a.discard_quantum != b.discard_quantum
            or a.feed_quantum != b.feed_quantum):
        return float("inf")
    diff = float(np.abs(a.post.matrix - b.post.matrix).max()) \
        if a.post.matrix.shape == b.post.matrix.shape else float("inf")
    for ra, rb in zip(a.rounds, b.rounds):
        if ra.global_op.matrix.shape != rb.global_op.matrix.shape:
            return float("inf")
        diff = max(diff, float(np.abs(ra.global_op.matrix - rb.global_op.matrix).max()))
        for ia, ib in zip(ra.locals, rb.locals):
            if ia.process.source != ib.process.source or ia.process.target != ib.process.target:
                return float("inf")
            keys = set(ia.process.components) | set(ib.process.components)
            for key in keys:
                diff = max(diff, float(np.abs(
                    ia.process.component(*key) - ib.process.component(*key)).max()))
    return diff


# ---------------------------------------------------------------------------
# Product-mixture expansion (the proof's resolution-insertion step)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductMixture:
    """A non-negative mixture of products of local pure states."""

    terms: tuple  # of (weight, tuple of per-party unit vectors)
    dims: tuple[int, ...]

    @property
    def total_weight(self) -> float:
        return float(sum(w for w, _ in self.terms))

    def recompose(self) -> np.ndarray:
        d = math.prod(self.dims)
        rho = np.zeros((d, d), dtype=complex)
        for weight, factors in self.terms:
            joint = np.array([1.0 + 0.0j])
            for f in factors:
                joint = np.kron(joint, f)
            rho += weight * np.outer(joint, joint.conj())
        return rho

    def max_term_fidelity(self, state: PureState) -> float:
        """Largest squared overlap of any single product term with the state."""
        psi = state.amplitudes / state.norm
        best = 0.0
        for weight, factors in self.terms:
            if weight <= 0:
                continue
            joint = np.array([1.0 + 0.0j])
            for f in factors:
                joint = np.kron(joint, f)
            best = max(best, float(abs(np.vdot(psi, joint)) ** 2))
        return best

    def mixture_fidelity(self, state: PureState) -> float:
        """<psi|rho|psi> for the trace-normalised mixture."""
        rho = self.recompose()
        trace = float(np.trace(rho).real)
        if trace == 0.0:
            return 0.0
        psi = state.amplitudes / state.norm
        return float(np.vdot(psi, rho @ psi).real) / trace


_EIG_FLOOR = 1e-12


def expand_as_product_mixture(protocol: LoccProtocol,
                              label_index: int) -> ProductMixture:
    """Expand a preparation protocol's output on one label into product form.

    Inserting point resolutions on every internal classical wire splits the
    diagram into classical trajectories; along each, the parties' quantum
    chains decouple, and eigendecomposing every party's output turns each
    trajectory into weighted products of local pure states.  The mixture
    recomposes to the protocol's output density matrix on that label.
    """
    if protocol.discard_quantum or math.prod(protocol.quantum_output_dims) == 1:
        raise ProtocolDirectionError(
            "product-mixture expansion needs open quantum outputs")
    if not protocol.feed_quantum and math.prod(protocol.rounds[0].quantum_in_dims) != 1:
        raise ProtocolDirectionError(
            "product-mixture expansion needs trivial or fed quantum inputs")
    if not 0 <= label_index < protocol.input_size:
        raise LoccKitError(
            f"label index {label_index} out of range for input size "
            f"{protocol.input_size}")
    n = protocol.num_parties
    qin_dims = protocol.rounds[0].quantum_in_dims
    if protocol.feed_quantum:
        init = [np.eye(d, dtype=complex) for d in qin_dims]
    else:
        init = [np.array([[1.0 + 0.0j]]) for _ in range(n)]
    post_column_sums = protocol.post.matrix.sum(axis=0)
    raw_terms = []

    def run_round(r: int, x_key: tuple[int, ...], sigmas, weight: float):
        rnd = protocol.rounds[r]
        options = []
        for i, inst in enumerate(rnd.locals):
            outs = []
            for cout, mat in inst.components_by_cin().get(x_key[i], ()):
                outs.append((cout, apply_choi(
                    mat, sigmas[i], inst.quantum_in, inst.quantum_out)))
            options.append(outs)
        for combo in itertools.product(*options):
            y_key = tuple(c for c, _ in combo)
            new_sigmas = [s for _, s in combo]
            if r == protocol.num_rounds - 1:
                yf = protocol.post.source.flatten_classical(y_key)
                w = weight * float(post_column_sums[yf])
                if w != 0.0:
                    raw_terms.append((w, new_sigmas))
            else:
                nxt = protocol.rounds[r + 1].global_op
                col = nxt.matrix[:, nxt.source.flatten_classical(y_key)]
                for xf in np.nonzero(col)[0]:
                    run_round(r + 1, nxt.target.unflatten_classical(int(xf)),
                              new_sigmas, weight * float(col[xf]))

    first = protocol.rounds[0].global_op
    col = first.matrix[:, label_index]
    for xf in np.nonzero(col)[0]:
        run_round(0, first.target.unflatten_classical(int(xf)), init,
                  float(col[xf]))

    terms = []
    for weight, sigmas in raw_terms:
        local_pures = []
        for sigma in sigmas:
            vals, vecs = np.linalg.eigh(sigma)
            top = vals.max() if vals.size else 0.0
            keep = [(float(vals[k]), vecs[:, k]) for k in range(len(vals))
                    if vals[k] > _EIG_FLOOR * max(top, 1.0)]
            local_pures.append(keep)
        for combo in itertools.product(*local_pures):
            w = weight * math.prod(lam for lam, _ in combo)
            if w > 0.0:
                terms.append((w, tuple(vec for _, vec in combo)))
    return ProductMixture(tuple(terms), protocol.quantum_output_dims)


# ---------------------------------------------------------------------------
# The constructive protocols
# ---------------------------------------------------------------------------

def build_product_preparation(family: OrthonormalFamily,
                              tol: float = DEFAULT_TOL) -> LoccProtocol:
    """The one-round normalised protocol preparing an all-product family.

    A classical copy broadcasts the label to every party; party i prepares its
    local factor of the labelled state.  Raises `EntangledMemberError` if any
    member fails to factorise.
    """
    dims = family.partition.dims
    n = len(dims)
    size = family.size
    factors_by_label = {}
    for label, state in family.members():
        factorization = product_factorize(state, tol)
        if factorization is None:
            raise EntangledMemberError(label, "no rank-one factorization")
        factors_by_label[label] = tuple(
            f / np.linalg.norm(f) for f in factorization.factors)
    copy_source = SystemType.classical(size)
    copy_target = SystemType.classical(*([size] * n))
    copy = np.zeros((size ** n, size))
    for b in range(size):
        copy[copy_target.flatten_classical((b,) * n), b] = 1.0
    instruments = []
    for i in range(n):
        comps = {}
        for b, label in enumerate(family.labels):
            vec = factors_by_label[label][i]
            comps[(0, b)] = np.outer(vec, vec.conj())
        instruments.append(local_instrument(
            i, classical_in=size, classical_out=1, quantum_in=1,
            quantum_out=dims[i], components=comps, validate=False))
    post = ClassicalProcess(
        SystemType.classical(*([1] * n)), SystemType.classical(1), [[1.0]])
    return LoccProtocol(
        rounds=(LoccRound(ClassicalProcess(copy_source, copy_target, copy),
                          tuple(instruments)),),
        post=post, discard_quantum=False, feed_quantum=False)


def build_product_distinguisher(family: OrthonormalFamily,
                                tol: float = DEFAULT_TOL) -> LoccProtocol:
    """Time-reverse of the product preparation: a unital distinguisher.

    Each party measures against its local factors; the reversed copy keeps
    only unanimous outcomes, which for an orthonormal product family yields
    the correct label exactly.
    """
    return reverse_protocol(build_product_preparation(family, tol))


# ---------------------------------------------------------------------------
# Verdicts and quantitative metrics
# ---------------------------------------------------------------------------

VERDICT_CONSISTENT = "CONSISTENT_DISTINGUISHES"
VERDICT_CONTRADICTION = "CONTRADICTION"
VERDICT_INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class TheoremVerdict:
    verdict: str
    family_report: object
    distinguishing: DistinguishingReport
    evidence: dict = field(default_factory=dict)


def theorem_check(protocol: LoccProtocol, family: OrthonormalFamily,
                  tol: float = DEFAULT_TOL) -> TheoremVerdict:
    """Confront a protocol with a family and classify the outcome.

    A protocol that distinguishes a family with an entangled member would
    contradict the impossibility result; the verdict then carries the
    product-mixture expansion of the reversed protocol on that member as
    evidence.  This must never occur on correct inputs.
    """
    family_report = check_family(family, tol)
    distinguishing = verify_distinguishing(protocol, family, tol)
    if distinguishing.passed:
        entangled = family_report.entangled_labels
        if entangled:
            label = entangled[0]
            idx = family.index(label)
            mixture = expand_as_product_mixture(reverse_protocol(protocol), idx)
            evidence = {
                "label": label,
                "num_terms": len(mixture.terms),
                "max_term_fidelity": mixture.max_term_fidelity(family.state(label)),
                "mixture_fidelity": mixture.mixture_fidelity(family.state(label)),
            }
            return TheoremVerdict(VERDICT_CONTRADICTION, family_report,
                                  distinguishing, evidence)
        return TheoremVerdict(VERDICT_CONSISTENT, family_report, distinguishing)
    return TheoremVerdict(
        VERDICT_INCONCLUSIVE, family_report, distinguishing,
        {"failing_labels": list(distinguishing.failing_labels)})


def success_probability(protocol: LoccProtocol, family: OrthonormalFamily,
                        prior=None, tol: float = DEFAULT_TOL) -> float:
    """Average probability of naming the state right, under a prior.

    Only defined for normalised protocols; raises `NotNormalisedError`
    otherwise.
    """
    defect = protocol_normalisation_defect(protocol)
    if defect > tol:
        raise NotNormalisedError(
            f"success probability needs a normalised protocol "
            f"(defect {defect:.3e})")
    if prior is None:
        prior = np.full(family.size, 1.0 / family.size)
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (family.size,) or prior.min() < 0 \
            or abs(prior.sum() - 1.0) > tol:
        raise LoccKitError("prior must be a distribution over the labels")
    total = 0.0
    for idx, (label, state) in enumerate(family.members()):
        weights = apply_protocol(protocol, state)
        total += prior[idx] * weights[idx]
    return float(total)
