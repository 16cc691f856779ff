"""Scenario files: families plus named protocols in a versioned JSON format.

Complex numbers are stored as [re, im] pairs, matrices row-major.  Classical
operations carry their factored source/target sizes; instrument components are
stored as Choi matrices and may be supplied as Kraus lists on ingestion look
(`"kraus"` instead of `"choi"`).  Everything is validated at load: family
completeness and orthonormality, protocol wire chaining, and complete
positivity of every component.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .classical import ClassicalProcess
from .errors import ScenarioFormatError, UnknownProtocolError
from .locc import LoccProtocol, LoccRound, local_instrument
from .states import OrthonormalFamily, PartyPartition, PureState
from .systems import SystemType

FORMAT_VERSION = 1


@dataclass
class Scenario:
    scenario_id: str
    partition: PartyPartition
    family: OrthonormalFamily
    protocols: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def protocol(self, name: str) -> LoccProtocol:
        if name not in self.protocols:
            raise UnknownProtocolError(
                f"protocol {name!r} not in scenario {self.scenario_id!r}; "
                f"available: {sorted(self.protocols)}")
        return self.protocols[name]


# ---------------------------------------------------------------------------
# Encoding helpers
# ---------------------------------------------------------------------------

def _encode_complex_matrix(mat: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(mat)]


def _decode_complex_matrix(rows, where: str) -> np.ndarray:
    try:
        return np.array([[complex(re, im) for re, im in row] for row in rows])
    except (TypeError, ValueError) as exc:
        raise ScenarioFormatError(
            f"expected rows of [re, im] pairs ({exc})", field=where) from None


def _encode_complex_vector(vec: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(vec)]


def _decode_complex_vector(entries, where: str) -> np.ndarray:
    try:
        return np.array([complex(re, im) for re, im in entries])
    except (TypeError, ValueError) as exc:
        raise ScenarioFormatError(
            f"expected [re, im] pairs ({exc})", field=where) from None


def _encode_classical(op: ClassicalProcess) -> dict:
    return {
        "source_factors": list(op.source.classical_sizes),
        "target_factors": list(op.target.classical_sizes),
        "matrix": [[float(v) for v in row] for row in op.matrix],
    }


def _decode_classical(obj, where: str) -> ClassicalProcess:
    try:
        source = SystemType.classical(*obj["source_factors"])
        target = SystemType.classical(*obj["target_factors"])
        return ClassicalProcess(source, target, np.array(obj["matrix"], dtype=float))
    except ScenarioFormatError:
        raise
    except KeyError as exc:
        raise ScenarioFormatError(f"missing key {exc}", field=where) from None
    except Exception as exc:
        raise ScenarioFormatError(str(exc), field=where) from None


def _encode_instrument(inst) -> dict:
    comps = []
    for ((cout,), (cin,)), mat in sorted(inst.process.components.items()):
        comps.append({
            "classical_out": cout,
            "classical_in": cin,
            "choi": _encode_complex_matrix(mat),
        })
    return {
        "party": inst.party,
        "classical_in": inst.classical_in,
        "classical_out": inst.classical_out,
        "quantum_in": inst.quantum_in,
        "quantum_out": inst.quantum_out,
        "components": comps,
    }


def _decode_instrument(obj, where: str):
    try:
        comps = {}
        for k, comp in enumerate(obj["components"]):
            key = (int(comp["classical_out"]), int(comp["classical_in"]))
            if "kraus" in comp:
                comps[key] = [
                    _decode_complex_matrix(m, f"{where}.components[{k}].kraus")
                    for m in comp["kraus"]]
            elif "choi" in comp:
                comps[key] = _decode_complex_matrix(
                    comp["choi"], f"{where}.components[{k}].choi")
            else:
                raise ScenarioFormatError(
                    "component needs 'choi' or 'kraus'",
                    field=f"{where}.components[{k}]")
        return local_instrument(
            int(obj["party"]), int(obj["classical_in"]), int(obj["classical_out"]),
            int(obj["quantum_in"]), int(obj["quantum_out"]), comps, validate=True)
    except ScenarioFormatError:
        raise
    except KeyError as exc:
        raise ScenarioFormatError(f"missing key {exc}", field=where) from None
    except Exception as exc:
        raise ScenarioFormatError(str(exc), field=where) from None


def protocol_to_dict(protocol: LoccProtocol) -> dict:
    return {
        "discard_quantum": protocol.discard_quantum,
        "feed_quantum": protocol.feed_quantum,
        "rounds": [
            {
                "global_op": _encode_classical(rnd.global_op),
                "locals": [_encode_instrument(inst) for inst in rnd.locals],
            }
            for rnd in protocol.rounds
        ],
        "post": _encode_classical(protocol.post),
    }


def protocol_from_dict(obj, where: str = "protocol") -> LoccProtocol:
    try:
        rounds = []
        for r, rnd in enumerate(obj["rounds"]):
            global_op = _decode_classical(
                rnd["global_op"], f"{where}.rounds[{r}].global_op")
            instruments = tuple(
                _decode_instrument(inst, f"{where}.rounds[{r}].locals[{i}]")
                for i, inst in enumerate(rnd["locals"]))
            rounds.append(LoccRound(global_op, instruments))
        return LoccProtocol(
            rounds=tuple(rounds),
            post=_decode_classical(obj["post"], f"{where}.post"),
            discard_quantum=bool(obj.get("discard_quantum", True)),
            feed_quantum=bool(obj.get("feed_quantum", False)))
    except ScenarioFormatError:
        raise
    except KeyError as exc:
        raise ScenarioFormatError(f"missing key {exc}", field=where) from None
    except Exception as exc:
        raise ScenarioFormatError(str(exc), field=where) from None


def protocol_matches_partition(protocol: LoccProtocol,
                               partition: PartyPartition) -> bool:
    """A protocol type-checks if its open quantum boundary fits the parties."""
    if protocol.num_parties != partition.num_parties:
        return False
    return (protocol.quantum_input_dims == partition.dims
            or protocol.quantum_output_dims == partition.dims)


# ---------------------------------------------------------------------------
# Whole-scenario (de)serialisation
# ---------------------------------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "id": scenario.scenario_id,
        "metadata": dict(scenario.metadata),
        "partition": list(scenario.partition.dims),
        "family": {
            "labels": list(scenario.family.labels),
            "states": {
                label: _encode_complex_vector(state.amplitudes)
                for label, state in scenario.family.members()
            },
        },
        "protocols": {
            name: protocol_to_dict(protocol)
            for name, protocol in scenario.protocols.items()
        },
    }


def scenario_from_dict(obj, tol: float = 1e-9) -> Scenario:
    if not isinstance(obj, dict):
        raise ScenarioFormatError("scenario must be a JSON object")
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise ScenarioFormatError(
            f"unsupported format_version {version!r}", field="format_version")
    try:
        partition = PartyPartition(obj["partition"])
    except KeyError:
        raise ScenarioFormatError("missing key", field="partition") from None
    except Exception as exc:
        raise ScenarioFormatError(str(exc), field="partition") from None
    fam_obj = obj.get("family")
    if not isinstance(fam_obj, dict):
        raise ScenarioFormatError("missing or invalid", field="family")
    labels = fam_obj.get("labels")
    states_obj = fam_obj.get("states")
    if not isinstance(labels, list) or not isinstance(states_obj, dict):
        raise ScenarioFormatError("needs 'labels' and 'states'", field="family")
    states = {}
    for label in labels:
        if label not in states_obj:
            raise ScenarioFormatError(
                f"state for label {label!r} missing", field="family.states")
        vec = _decode_complex_vector(states_obj[label], f"family.states[{label}]")
        try:
            states[label] = PureState(vec, partition)
        except Exception as exc:
            raise ScenarioFormatError(
                str(exc), field=f"family.states[{label}]") from None
    try:
        family = OrthonormalFamily(labels, states, partition, validate=True, tol=tol)
    except Exception as exc:
        raise ScenarioFormatError(str(exc), field="family") from None
    protocols = {}
    for name, pobj in obj.get("protocols", {}).items():
        protocol = protocol_from_dict(pobj, where=f"protocols.{name}")
        if not protocol_matches_partition(protocol, partition):
            raise ScenarioFormatError(
                f"protocol does not type-check against partition "
                f"{partition.dims}: quantum inputs "
                f"{protocol.quantum_input_dims}, outputs "
                f"{protocol.quantum_output_dims}", field=f"protocols.{name}")
        if protocol.num_labels != len(labels) and protocol.input_size != len(labels):
            raise ScenarioFormatError(
                f"protocol label wire does not match the {len(labels)} labels",
                field=f"protocols.{name}")
        protocols[name] = protocol
    metadata = obj.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ScenarioFormatError("metadata must be a string map", field="metadata")
    return Scenario(
        scenario_id=str(obj.get("id", "unnamed")),
        partition=partition, family=family, protocols=protocols,
        metadata={str(k): str(v) for k, v in metadata.items()})


def bundled_scenario_names() -> list[str]:
    base = resources.files("locckit") / "scenarios"
    return sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".json"))


def resolve_scenario_path(path_or_name: str):
    """A real file path wins; otherwise fall back to the bundled scenarios."""
    if os.path.exists(path_or_name):
        return path_or_name, open(path_or_name, "r", encoding="utf-8").read()
    name = path_or_name[:-5] if path_or_name.endswith(".json") else path_or_name
    candidate = resources.files("locckit") / "scenarios" / f"{name}.json"
    if candidate.is_file():
        return f"bundled:{name}", candidate.read_text(encoding="utf-8")
    raise ScenarioFormatError(
        f"no such file, and no bundled scenario named {name!r} "
        f"(bundled: {bundled_scenario_names()})")


def load_scenario(path_or_name: str, tol: float = 1e-9) -> Scenario:
    """Load and fully validate a scenario file (or bundled scenario name)."""
    resolved, text = resolve_scenario_path(path_or_name)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(
            f"JSON parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}", field=resolved) from None
    return scenario_from_dict(obj, tol=tol)


def save_scenario(scenario: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(scenario_to_dict(scenario), handle, indent=1, sort_keys=True)
        handle.write("\n")
