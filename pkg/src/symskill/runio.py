"""Run artifacts: canonical JSON, seed derivation, model (de)serialization,
and the run-directory layout.

Everything written here must be byte-identical across runs with the same
configuration and seed, so no timestamps, no environment echoes, and all
JSON is emitted with sorted keys.
"""

from __future__ import annotations

import json
import os
import zlib
from typing import Iterable, Mapping, Sequence

from .core import (
    ConfigurationError,
    Dataset,
    LiftedAtom,
    Literal,
    Model,
    Operator,
    Predicate,
    Skill,
    Transition,
    Variable,
)

MODEL_FILE = "model.json"
DOMAIN_FILE = "domain.pddl"
CONFIG_FILE = "config.json"
EVENTS_FILE = "events.jsonl"
LEDGER_FILE = "predicate_ledger.json"
REPORT_FILE = "report.json"


def canonical_json(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_json(path: str, obj: object) -> None:
    write_text(path, canonical_json(obj))


def append_jsonl(path: str, obj: object) -> None:
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, sort_keys=True) + "\n")


def derive_seed(master: int, label: str) -> int:
    """A stable per-purpose seed; crc32 keeps it platform-independent."""
    return zlib.crc32(f"{master}:{label}".encode("utf-8")) & 0xFFFFFFFF


# ---------------------------------------------------------------------------
# model serialization
# ---------------------------------------------------------------------------

def predicate_to_dict(p: Predicate) -> dict:
    return {
        "name": p.name,
        "parameters": list(p.parameters),
        "semantics": p.semantics,
    }


def predicate_from_dict(d: Mapping) -> Predicate:
    return Predicate(
        d["name"], tuple(d["parameters"]), semantics=d.get("semantics", "")
    )


def _atom_to_list(a: LiftedAtom) -> list:
    return [a.predicate.name, [v.name for v in a.variables]]


def operator_to_dict(op: Operator) -> dict:
    return {
        "name": op.name,
        "skill": {"name": op.skill.name, "parameters": list(op.skill.parameters)},
        "parameters": [
            {"name": v.name, "types": sorted(v.types)} for v in op.parameters
        ],
        "preconditions": sorted(
            [l.atom.predicate.name, [v.name for v in l.atom.variables], l.positive]
            for l in op.preconditions
        ),
        "inequalities": sorted(list(pair) for pair in op.inequalities),
        "add_effects": sorted(_atom_to_list(a) for a in op.add_effects),
        "delete_effects": sorted(_atom_to_list(a) for a in op.delete_effects),
        "provenance": list(op.provenance),
    }


def model_to_dict(model: Model) -> dict:
    return {
        "predicates": [
            predicate_to_dict(p)
            for p in sorted(model.predicates, key=lambda p: p.name)
        ],
        "operators": [operator_to_dict(op) for op in model.operators],
        "rejected": {
            skill: sorted(names) for skill, names in sorted(model.rejected.items())
        },
    }


def model_from_dict(d: Mapping) -> Model:
    predicates = {
        p["name"]: predicate_from_dict(p) for p in d.get("predicates", [])
    }
    operators = []
    for od in d.get("operators", []):
        skill = Skill(od["skill"]["name"], tuple(od["skill"]["parameters"]))
        variables = {
            vd["name"]: Variable(vd["name"], frozenset(vd["types"]))
            for vd in od["parameters"]
        }

        def atom(entry: Sequence) -> LiftedAtom:
            pname, vnames = entry[0], entry[1]
            if pname not in predicates:
                raise ConfigurationError(f"model file: unknown predicate {pname!r}")
            return LiftedAtom(
                predicate=predicates[pname],
                variables=tuple(variables[v] for v in vnames),
            )

        operators.append(
            Operator(
                name=od["name"],
                skill=skill,
                parameters=tuple(variables[vd["name"]] for vd in od["parameters"]),
                preconditions=frozenset(
                    Literal(atom(e), positive=bool(e[2]))
                    for e in od["preconditions"]
                ),
                inequalities=frozenset(
                    (a, b) for a, b in od.get("inequalities", [])
                ),
                add_effects=frozenset(atom(e) for e in od["add_effects"]),
                delete_effects=frozenset(atom(e) for e in od["delete_effects"]),
                provenance=tuple(od["provenance"]),
            )
        )
    rejected = {
        skill: frozenset(names)
        for skill, names in d.get("rejected", {}).items()
    }
    return Model(
        predicates=frozenset(predicates.values()),
        operators=tuple(operators),
        rejected=rejected,
    )


def save_model(path: str, model: Model) -> None:
    write_json(path, model_to_dict(model))


def load_model(path: str) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# dataset snapshots
# ---------------------------------------------------------------------------

def transition_to_dict(t: Transition) -> dict:
    return {
        "tid": t.tid,
        "episode": t.episode,
        "step": t.step,
        "before": t.before.id,
        "after": t.after.id,
        "skill": t.instance.skill.name,
        "args": [o.name for o in t.instance.arguments],
        "success": t.success,
    }


def write_dataset_snapshot(path: str, dataset: Dataset) -> None:
    lines = [
        json.dumps(transition_to_dict(t), sort_keys=True)
        for t in dataset.transitions()
    ]
    write_text(path, "\n".join(lines) + ("\n" if lines else ""))


# ---------------------------------------------------------------------------
# run directory
# ---------------------------------------------------------------------------

class RunDir:
    """Owns one run's artifact directory."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self._events_path = os.path.join(root, EVENTS_FILE)
        # a rerun into the same directory must not append to stale logs
        if os.path.exists(self._events_path):
            os.remove(self._events_path)

    def path(self, name: str) -> str:
        return os.path.join(self.root, name)

    def write_config(self, config: Mapping) -> None:
        write_json(self.path(CONFIG_FILE), dict(config))

    def event(self, payload: Mapping) -> None:
        append_jsonl(self._events_path, dict(payload))

    def write_iteration_snapshot(self, iteration: int, dataset: Dataset) -> None:
        write_dataset_snapshot(
            self.path(f"dataset_iter_{iteration:03d}.jsonl"), dataset
        )

    def write_model(self, model: Model) -> None:
        save_model(self.path(MODEL_FILE), model)

    def write_domain(self, text: str) -> None:
        write_text(self.path(DOMAIN_FILE), text)

    def write_ledger(self, entries: Iterable[Mapping]) -> None:
        write_json(self.path(LEDGER_FILE), [dict(e) for e in entries])

    def write_report(self, report: Mapping) -> None:
        write_json(self.path(REPORT_FILE), dict(report))
