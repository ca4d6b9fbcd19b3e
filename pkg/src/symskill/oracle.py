"""Predicate proposal and classification.

Two interchangeable annotator backends:

* ``ScriptedOracle`` — a deterministic stand-in that knows the kitchen's
  hidden fluents.  Given a contrasted state pair it proposes the
  lexicographically first hidden fluent whose denotation differs between
  the two states; with probability ``noise`` it proposes a distractor
  fluent instead.  This is what tests and offline runs use.
* ``FMProposer`` — renders prompt templates and calls a chat-completion
  endpoint (ORACLE_ENDPOINT / ORACLE_MODEL / ORACLE_API_KEY), with a
  two-stage propose-then-verify exchange and edit-distance-1 snapping of
  returned type names onto the known vocabulary.

Classifier calls are batched: one call evaluates many ground atoms on one
state.
"""

from __future__ import annotations

import json
import os
import random
import re
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

from .core import (
    Classifier,
    ClassifierError,
    ConfigurationError,
    GroundAtom,
    ObjectRef,
    Predicate,
    Skill,
    StateHandle,
    ground_predicates,
)
from .env import FLUENT_SIGNATURES, fluent_value

PRECONDITION = "precondition"
EFFECT = "effect"

# Hidden fluents the scripted annotator may reveal, lexicographic by name.
HIDDEN_POOL: tuple[Predicate, ...] = tuple(
    sorted(
        (
            Predicate("cooked", ("cookable",), semantics="item has been cooked"),
            Predicate("cut", ("cuttable",), semantics="item has been cut"),
            Predicate("gripper_empty", (), semantics="the gripper holds nothing"),
            Predicate("holding", ("pickupable",), semantics="gripper holds the item"),
            Predicate(
                "on_cutting_board", ("pickupable",),
                semantics="item is somewhere in the cutting board stack",
            ),
            Predicate(
                "on_station", ("pickupable", "station"),
                semantics="item is somewhere in the station's stack",
            ),
            Predicate(
                "on_stove", ("pickupable",),
                semantics="item is somewhere in the stove stack",
            ),
            Predicate(
                "stacked_on", ("pickupable", "pickupable"),
                semantics="first item rests directly on the second",
            ),
            Predicate("topmost", ("pickupable",), semantics="item is top of its stack"),
        ),
        key=lambda p: p.name,
    )
)

DISTRACTORS: tuple[Predicate, ...] = (
    Predicate("is_red", ("item",), semantics="always false in this kitchen"),
    Predicate("near_window", ("station",), semantics="always true in this kitchen"),
)


class ScriptedClassifier(Classifier):
    """Evaluates any hidden or distractor fluent on a kitchen state payload."""

    def evaluate_batch(
        self, atoms: Sequence[GroundAtom], state: StateHandle
    ) -> dict[GroundAtom, bool]:
        if state.payload is None:
            raise ClassifierError("state handle carries no concrete payload")
        out: dict[GroundAtom, bool] = {}
        for atom in atoms:
            name = atom.predicate.name
            if name not in FLUENT_SIGNATURES:
                raise ClassifierError(f"no classifier for fluent {name!r}", atom=atom)
            out[atom] = fluent_value(
                state.payload, name, tuple(o.name for o in atom.arguments)
            )
        return out


class TableClassifier(Classifier):
    """Evaluates fluents from recorded truth tables keyed by state id.

    Transcript replays carry per-state verdict tables; tiny hand-built
    domains in tests use the same mechanism.  ``default=None`` makes a
    missing entry an error, otherwise it fills the gap.
    """

    def __init__(
        self, tables: dict[str, dict[str, bool]], default: bool | None = None
    ):
        self._tables = tables
        self._default = default

    def evaluate_batch(
        self, atoms: Sequence[GroundAtom], state: StateHandle
    ) -> dict[GroundAtom, bool]:
        table = self._tables.get(state.id)
        if table is None:
            if self._default is None:
                raise ClassifierError(f"no verdict table for state {state.id!r}")
            table = {}
        out: dict[GroundAtom, bool] = {}
        for atom in atoms:
            verdict = table.get(str(atom), self._default)
            if verdict is None:
                raise ClassifierError(
                    f"state {state.id!r} has no verdict for {atom}", atom=atom
                )
            out[atom] = verdict
        return out


@dataclass(frozen=True)
class Proposal:
    predicate: Predicate
    distractor: bool


class Proposer:
    """Interface: turn one contrasted state pair into a candidate predicate."""

    def propose(
        self,
        skill: Skill,
        kind: str,
        state_pos: StateHandle,
        state_neg: StateHandle,
        vocabulary: Iterable[Predicate],
        rejected: frozenset[str],
        objects: Sequence[ObjectRef],
    ) -> Proposal | None:
        raise NotImplementedError


class ScriptedOracle(Proposer):
    """Scripted annotator over the hidden kitchen pool.

    noise=0.0 always proposes honestly; with noise > 0 each call first rolls
    the seeded RNG and may emit an unused distractor instead.  Returns None
    when every differing pool fluent is already known or rejected.
    """

    def __init__(
        self,
        noise: float = 0.0,
        seed: int = 0,
        classifier: Classifier | None = None,
    ):
        if not 0.0 <= noise <= 1.0:
            raise ConfigurationError(f"noise must be in [0,1], got {noise}")
        self.noise = noise
        self.pool = HIDDEN_POOL
        self.distractors = DISTRACTORS
        # replayed sessions evaluate fluents from recorded verdict tables
        self.classifier = classifier if classifier is not None else ScriptedClassifier()
        self._rng = random.Random(seed)

    def _denotation(
        self, pred: Predicate, state: StateHandle, objects: Sequence[ObjectRef]
    ) -> frozenset[GroundAtom]:
        atoms = sorted(ground_predicates([pred], objects), key=GroundAtom.sort_key)
        verdicts = self.classifier.evaluate_batch(atoms, state)
        return frozenset(a for a in atoms if verdicts[a])

    def propose(
        self,
        skill: Skill,
        kind: str,
        state_pos: StateHandle,
        state_neg: StateHandle,
        vocabulary: Iterable[Predicate],
        rejected: frozenset[str],
        objects: Sequence[ObjectRef],
    ) -> Proposal | None:
        if kind not in (PRECONDITION, EFFECT):
            raise ConfigurationError(f"unknown conflict kind {kind!r}")
        known = {p.name for p in vocabulary}
        if self.noise > 0 and self._rng.random() < self.noise:
            for d in self.distractors:  # already name-sorted
                if d.name not in known and d.name not in rejected:
                    return Proposal(predicate=d, distractor=True)
        for pred in self.pool:
            if pred.name in known or pred.name in rejected:
                continue
            if self._denotation(pred, state_pos, objects) != self._denotation(
                pred, state_neg, objects
            ):
                return Proposal(predicate=pred, distractor=False)
        return None


# ---------------------------------------------------------------------------
# foundation-model backend
# ---------------------------------------------------------------------------

def render_template(name: str, mapping: dict[str, str]) -> str:
    """Load templates/<name> and substitute {{key}} placeholders."""
    text = resources.files("symskill").joinpath("templates", name).read_text("utf-8")
    for key, value in mapping.items():
        text = text.replace("{{" + key + "}}", value)
    leftover = re.findall(r"\{\{(\w+)\}\}", text)
    if leftover:
        raise ConfigurationError(f"template {name}: unfilled placeholders {leftover}")
    return text


def _edit_distance(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def snap_token(token: str, known: Iterable[str]) -> str | None:
    """Return the known token the response meant, tolerating one edit."""
    candidates = sorted(known)
    if token in candidates:
        return token
    near = [k for k in candidates if _edit_distance(token, k) <= 1]
    return near[0] if len(near) == 1 else None


def parse_predicate_reply(text: str, known_types: Iterable[str]) -> Predicate:
    """Extract `name(type, ...)` from a completion, snapping type names."""
    m = re.search(r"([a-z][a-z0-9_]*)\s*\(([^()]*)\)", text, flags=re.IGNORECASE)
    if not m:
        raise ConfigurationError(f"no predicate found in reply: {text[:120]!r}")
    name = m.group(1).lower()
    raw = [t.strip() for t in m.group(2).split(",") if t.strip()]
    types: list[str] = []
    for tok in raw:
        snapped = snap_token(tok.lower().lstrip("?"), known_types)
        if snapped is None:
            raise ConfigurationError(f"unknown parameter type {tok!r} in reply")
        types.append(snapped)
    return Predicate(name=name, parameters=tuple(types))


class FMProposer(Proposer):
    """Chat-endpoint-backed proposer with a propose-then-verify exchange."""

    def __init__(
        self,
        known_types: Iterable[str],
        endpoint: str | None = None,
        model: str | None = None,
        api_key: str | None = None,
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint or os.environ.get("ORACLE_ENDPOINT", "")
        self.model = model or os.environ.get("ORACLE_MODEL", "")
        self.api_key = api_key or os.environ.get("ORACLE_API_KEY", "")
        if not self.endpoint or not self.model:
            raise ConfigurationError(
                "FM backend needs ORACLE_ENDPOINT and ORACLE_MODEL"
            )
        self.known_types = tuple(sorted(known_types))
        self.timeout = timeout

    def _chat(self, prompt: str) -> str:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        resp = httpx.post(
            self.endpoint, headers=headers, json=payload, timeout=self.timeout
        )
        resp.raise_for_status()
        data = resp.json()
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError) as exc:
            raise ConfigurationError(f"malformed completion response: {data}") from exc

    def propose(
        self,
        skill: Skill,
        kind: str,
        state_pos: StateHandle,
        state_neg: StateHandle,
        vocabulary: Iterable[Predicate],
        rejected: frozenset[str],
        objects: Sequence[ObjectRef],
    ) -> Proposal | None:
        template = (
            "propose_precondition.txt" if kind == PRECONDITION else "propose_effect.txt"
        )
        vocab_lines = "\n".join(
            str(p) for p in sorted(vocabulary, key=lambda p: p.name)
        )
        mapping = {
            "skill": skill.name,
            "skill_signature": f"{skill.name}({', '.join(skill.parameters)})",
            "state_pos": _describe_state(state_pos),
            "state_neg": _describe_state(state_neg),
            "vocabulary": vocab_lines or "(none yet)",
            "rejected": ", ".join(sorted(rejected)) or "(none)",
            "types": ", ".join(self.known_types),
        }
        reply = self._chat(render_template(template, mapping))
        predicate = parse_predicate_reply(reply, self.known_types)
        if predicate.name in rejected or predicate.name in {
            p.name for p in vocabulary
        }:
            return None
        verify = render_template(
            "evaluate_predicate.txt",
            {
                "predicate": str(predicate),
                "skill": skill.name,
                "kind": kind,
                "state_pos": _describe_state(state_pos),
                "state_neg": _describe_state(state_neg),
            },
        )
        verdict = self._chat(verify).strip().lower()
        if not verdict.startswith("yes"):
            return None
        return Proposal(predicate=predicate, distractor=False)


def _describe_state(state: StateHandle) -> str:
    payload = state.payload
    if payload is None:
        return state.id
    lines = []
    for station, items in payload.stacks:
        lines.append(f"{station}: {' / '.join(items) if items else '(empty)'}")
    lines.append(f"holding: {payload.holding or '(nothing)'}")
    lines.append(f"cooked: {', '.join(sorted(payload.cooked)) or '(none)'}")
    lines.append(f"cut: {', '.join(sorted(payload.cut)) or '(none)'}")
    return "\n".join(lines)
