"""Environments: a deterministic kitchen simulator and transcript replay.

The environment contract is stateful: ``reset`` starts an episode,
``observe`` returns the current opaque state handle, ``execute`` runs one
skill instance and returns a Transition.  Skills are black boxes from the
learner's point of view; failed skills leave the state untouched and the
Transition carries the very same state handle on both sides.

This module also owns the hidden kitchen fluent semantics
(``fluent_value``) used by the scripted annotator and by ground-truth goal
checking.  Learner code never imports it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .core import (
    ConfigurationError,
    FluentSpec,
    ObjectRef,
    PlanningTask,
    Skill,
    SkillInstance,
    StateHandle,
    SymskillError,
    Transition,
    TypeHierarchy,
)


class ReplayMissError(SymskillError):
    """Transcript replay was asked for a step it never recorded."""


STATIONS = ("cutting_board", "stove", "table")

FULL_ITEMS: dict[str, tuple[str, ...]] = {
    "patty": ("pickupable", "cookable"),
    "lettuce": ("pickupable", "cuttable"),
    "top_bun": ("pickupable",),
    "bottom_bun": ("pickupable",),
}

TWO_OBJECT_ITEMS: dict[str, tuple[str, ...]] = {
    "patty": ("pickupable", "cookable"),
    "lettuce": ("pickupable", "cuttable"),
}


def kitchen_hierarchy() -> TypeHierarchy:
    # item -> pickupable -> {cookable, cuttable}; station stands alone
    return TypeHierarchy(
        types=("item", "pickupable", "cookable", "cuttable", "station"),
        edges=(
            ("pickupable", "item"),
            ("cookable", "pickupable"),
            ("cuttable", "pickupable"),
        ),
    )


def kitchen_skills() -> dict[str, Skill]:
    return {
        s.name: s
        for s in (
            Skill("Pick", ("pickupable", "station")),
            Skill("Place", ("pickupable", "station")),
            Skill("Cut", ("cuttable", "station")),
            Skill("Cook", ("cookable", "station")),
            Skill("Stack", ("pickupable", "pickupable")),
        )
    }


@dataclass(frozen=True)
class KitchenState:
    """Hidden kitchen state; canonically serializable for determinism tests."""

    stacks: tuple[tuple[str, tuple[str, ...]], ...]  # (station, bottom..top)
    holding: str | None
    cooked: frozenset[str]
    cut: frozenset[str]

    def stack(self, station: str) -> tuple[str, ...]:
        for name, items in self.stacks:
            if name == station:
                return items
        raise ConfigurationError(f"unknown station {station!r}")

    def with_stack(self, station: str, items: tuple[str, ...]) -> "KitchenState":
        stacks = tuple(
            (name, items if name == station else old) for name, old in self.stacks
        )
        return replace(self, stacks=stacks)

    def station_of(self, item: str) -> str | None:
        for name, items in self.stacks:
            if item in items:
                return name
        return None

    def is_topmost(self, item: str) -> bool:
        return any(items and items[-1] == item for _, items in self.stacks)

    def canonical(self) -> str:
        location = {}
        for name, items in self.stacks:
            for item in items:
                location[item] = name
        return json.dumps(
            {
                "cooked": sorted(self.cooked),
                "cut": sorted(self.cut),
                "holding": self.holding,
                "location": location,
                "stacks": {name: list(items) for name, items in self.stacks},
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    def handle(self) -> StateHandle:
        return StateHandle(id=self.canonical(), payload=self)


def fluent_value(state: KitchenState, name: str, args: tuple[str, ...]) -> bool:
    """Hidden semantics of the kitchen fluents over a concrete state."""
    if name == "gripper_empty":
        return state.holding is None
    if name == "holding":
        (x,) = args
        return state.holding == x
    if name == "cooked":
        (x,) = args
        return x in state.cooked
    if name == "cut":
        (x,) = args
        return x in state.cut
    if name == "on_station":
        x, st = args
        return x in state.stack(st)
    if name == "on_cutting_board":
        (x,) = args
        return x in state.stack("cutting_board")
    if name == "on_stove":
        (x,) = args
        return x in state.stack("stove")
    if name == "topmost":
        (x,) = args
        return state.is_topmost(x)
    if name == "stacked_on":
        x, y = args
        for _, items in state.stacks:
            for low, high in zip(items, items[1:]):
                if high == x and low == y:
                    return True
        return False
    if name == "is_red":
        return False
    if name == "near_window":
        return True
    raise ConfigurationError(f"unknown fluent {name!r}")


FLUENT_SIGNATURES: dict[str, tuple[str, ...]] = {
    "cooked": ("cookable",),
    "cut": ("cuttable",),
    "gripper_empty": (),
    "holding": ("pickupable",),
    "is_red": ("item",),
    "near_window": ("station",),
    "on_cutting_board": ("pickupable",),
    "on_station": ("pickupable", "station"),
    "on_stove": ("pickupable",),
    "stacked_on": ("pickupable", "pickupable"),
    "topmost": ("pickupable",),
}


def kitchen_would_succeed(state: KitchenState, instance: SkillInstance) -> bool:
    skill = instance.skill.name
    args = tuple(o.name for o in instance.arguments)
    if skill == "Pick":
        o, st = args
        stack = state.stack(st)
        return state.holding is None and stack != () and stack[-1] == o
    if skill == "Place":
        o, _st = args
        return state.holding == o
    if skill == "Cut":
        o, st = args
        stack = state.stack(st)
        return (
            state.holding is None
            and st == "cutting_board"
            and stack != ()
            and stack[-1] == o
            and o not in state.cut
        )
    if skill == "Cook":
        o, st = args
        stack = state.stack(st)
        return (
            state.holding is None
            and st == "stove"
            and stack != ()
            and stack[-1] == o
            and o not in state.cooked
        )
    if skill == "Stack":
        o1, o2 = args
        return state.holding == o1 and state.is_topmost(o2)
    raise ConfigurationError(f"unknown skill {skill!r}")


def kitchen_effect(state: KitchenState, instance: SkillInstance) -> KitchenState:
    skill = instance.skill.name
    args = tuple(o.name for o in instance.arguments)
    if skill == "Pick":
        o, st = args
        return replace(state.with_stack(st, state.stack(st)[:-1]), holding=o)
    if skill == "Place":
        o, st = args
        return replace(state.with_stack(st, state.stack(st) + (o,)), holding=None)
    if skill == "Cut":
        o, _st = args
        return replace(state, cut=state.cut | {o})
    if skill == "Cook":
        o, _st = args
        return replace(state, cooked=state.cooked | {o})
    if skill == "Stack":
        o1, o2 = args
        st = state.station_of(o2)
        assert st is not None  # guaranteed by the success rule
        return replace(state.with_stack(st, state.stack(st) + (o1,)), holding=None)
    raise ConfigurationError(f"unknown skill {skill!r}")


class KitchenEnv:
    """The burger kitchen.  ``two_object=True`` keeps only patty and lettuce."""

    def __init__(self, two_object: bool = False):
        self.hierarchy = kitchen_hierarchy()
        self._items = TWO_OBJECT_ITEMS if two_object else FULL_ITEMS
        self._objects: dict[str, ObjectRef] = {}
        for item, types in sorted(self._items.items()):
            self._objects[item] = self.hierarchy.make_object(item, types)
        for st in STATIONS:
            self._objects[st] = self.hierarchy.make_object(st, ("station",))
        self.skills = kitchen_skills()
        self._two_object = two_object
        self._episode = -1
        self._step = 0
        self._tid = 0
        self._state: KitchenState = self.initial_state()

    # -- interface ---------------------------------------------------------

    def objects(self) -> frozenset[ObjectRef]:
        return frozenset(self._objects.values())

    def object_list(self) -> list[ObjectRef]:
        return [self._objects[k] for k in sorted(self._objects)]

    def object_named(self, name: str) -> ObjectRef:
        if name not in self._objects:
            raise ConfigurationError(f"unknown object {name!r}")
        return self._objects[name]

    def skill_list(self) -> list[Skill]:
        return [self.skills[k] for k in sorted(self.skills)]

    def initial_state(self) -> KitchenState:
        table = ("lettuce", "patty") if self._two_object else (
            "bottom_bun", "top_bun", "lettuce", "patty"
        )
        return KitchenState(
            stacks=(("cutting_board", ()), ("stove", ()), ("table", table)),
            holding=None,
            cooked=frozenset(),
            cut=frozenset(),
        )

    def reset(self, seed: int = 0) -> StateHandle:
        # the arrangement is fixed; the seed only matters to callers' RNGs
        del seed
        self._state = self.initial_state()
        self._episode += 1
        self._step = 0
        return self._state.handle()

    def observe(self) -> StateHandle:
        return self._state.handle()

    def peek_execute(
        self, state: StateHandle, instance: SkillInstance
    ) -> tuple[StateHandle, bool]:
        """Pure one-step simulation; does not touch the live episode."""
        payload: KitchenState = state.payload
        if payload is None:
            raise ConfigurationError("state handle has no kitchen payload")
        self._check_instance(instance)
        if not kitchen_would_succeed(payload, instance):
            return state, False
        return kitchen_effect(payload, instance).handle(), True

    def execute(self, instance: SkillInstance) -> Transition:
        self._check_instance(instance)
        before = self._state.handle()
        if kitchen_would_succeed(self._state, instance):
            self._state = kitchen_effect(self._state, instance)
            after, success = self._state.handle(), True
        else:
            after, success = before, False
        t = Transition(
            tid=self._tid,
            episode=max(self._episode, 0),
            step=self._step,
            before=before,
            instance=instance,
            after=after,
            success=success,
        )
        self._tid += 1
        self._step += 1
        return t

    def _check_instance(self, instance: SkillInstance) -> None:
        if instance.skill.name not in self.skills:
            raise ConfigurationError(f"unknown skill {instance.skill.name!r}")
        for obj in instance.arguments:
            if obj.name not in self._objects:
                raise ConfigurationError(f"unknown object {obj.name!r}")

    def ground_instances(self, skill: Skill) -> list[SkillInstance]:
        """All type-valid instances of a skill, sorted by argument names."""
        objs = self.object_list()
        pools = [[o for o in objs if o.has_type(t)] for t in skill.parameters]
        out: list[SkillInstance] = []

        def rec(i: int, acc: tuple[ObjectRef, ...]) -> None:
            if i == len(pools):
                out.append(SkillInstance(skill=skill, arguments=acc))
                return
            for o in pools[i]:
                rec(i + 1, acc + (o,))

        rec(0, ())
        return out

    def all_instances(self) -> list[SkillInstance]:
        out: list[SkillInstance] = []
        for skill in self.skill_list():
            out.extend(self.ground_instances(skill))
        return out

    # -- ground truth goal checking ---------------------------------------

    def fluent_holds(self, state: StateHandle, spec: FluentSpec) -> bool:
        """Truth of one task fluent; type-forbidden arguments read as false."""
        if spec.name not in FLUENT_SIGNATURES:
            raise ConfigurationError(f"unknown fluent {spec.name!r} in task")
        sig = FLUENT_SIGNATURES[spec.name]
        if len(spec.args) != len(sig):
            raise ConfigurationError(
                f"fluent {spec.name!r} expects {len(sig)} args, got {len(spec.args)}"
            )
        for arg in spec.args:
            if arg not in self._objects:
                raise ConfigurationError(f"unknown object {arg!r} in task fluent")
        for arg, t in zip(spec.args, sig):
            if not self._objects[arg].has_type(t):
                # well-formed but never satisfiable, e.g. cut(patty)
                return not spec.positive
        value = fluent_value(state.payload, spec.name, spec.args)
        return value if spec.positive else not value

    def ground_truth_check(self, task: PlanningTask) -> bool:
        state = self.observe()
        return all(self.fluent_holds(state, f) for f in task.relevant_fluents)


# ---------------------------------------------------------------------------
# transcript replay
# ---------------------------------------------------------------------------

class TranscriptEnv:
    """Replays a recorded episode stream; anything unrecorded is an error."""

    def __init__(
        self,
        hierarchy: TypeHierarchy,
        objects: Sequence[ObjectRef],
        skills: Sequence[Skill],
        transitions: Sequence[Transition],
        verdicts: dict[str, dict[str, bool]],
    ):
        self.hierarchy = hierarchy
        self._objects = {o.name: o for o in objects}
        self.skills = {s.name: s for s in skills}
        self._transitions = list(transitions)
        self.verdicts = verdicts
        self._index: dict[tuple[str, tuple[str, tuple[str, ...]]], Transition] = {}
        for t in self._transitions:
            self._index.setdefault((t.before.id, t.instance.key()), t)
        self._cursor = 0
        self._state: StateHandle | None = None

    def objects(self) -> frozenset[ObjectRef]:  # type: ignore[override]
        return frozenset(self._objects.values())

    def object_list(self) -> list[ObjectRef]:
        return [self._objects[k] for k in sorted(self._objects)]

    def skill_list(self) -> list[Skill]:
        return [self.skills[k] for k in sorted(self.skills)]

    def reset(self, seed: int = 0) -> StateHandle:
        del seed
        if not self._transitions:
            raise ReplayMissError("transcript is empty")
        if self._cursor >= len(self._transitions):
            raise ReplayMissError("transcript exhausted")
        self._state = self._transitions[self._cursor].before
        return self._state

    def observe(self) -> StateHandle:
        if self._state is None:
            raise ReplayMissError("reset() must run before observe()")
        return self._state

    def execute(self, instance: SkillInstance) -> Transition:
        if self._state is None:
            raise ReplayMissError("reset() must run before execute()")
        nxt = (
            self._transitions[self._cursor]
            if self._cursor < len(self._transitions)
            else None
        )
        if (
            nxt is not None
            and nxt.before.id == self._state.id
            and nxt.instance.key() == instance.key()
        ):
            self._cursor += 1
            self._state = nxt.after
            return nxt
        hit = self._index.get((self._state.id, instance.key()))
        if hit is None:
            raise ReplayMissError(f"unrecorded step {instance} from {self._state.id}")
        self._state = hit.after
        return hit

    def upcoming(self) -> Transition | None:
        """The next recorded transition, or None when the tape ran out."""
        if self._cursor >= len(self._transitions):
            return None
        return self._transitions[self._cursor]


def write_transcript(
    path: str,
    env: KitchenEnv,
    transitions: Iterable[Transition],
    verdicts: dict[str, dict[str, bool]],
) -> None:
    """Serialize transitions as JSON lines with a leading metadata record."""
    meta = {
        "meta": {
            "types": sorted(env.hierarchy.types),
            "edges": sorted(list(e) for e in env.hierarchy.edges),
            "objects": {
                o.name: sorted(env.hierarchy.minimal(o.types))
                for o in env.object_list()
            },
            "skills": {s.name: list(s.parameters) for s in env.skill_list()},
        }
    }
    lines = [json.dumps(meta, sort_keys=True)]
    for t in transitions:
        rec = {
            "tid": t.tid,
            "episode": t.episode,
            "step": t.step,
            "before": t.before.id,
            "after": t.after.id,
            "skill": t.instance.skill.name,
            "args": [o.name for o in t.instance.arguments],
            "success": t.success,
            "verdicts": {
                sid: verdicts[sid]
                for sid in sorted({t.before.id, t.after.id})
                if sid in verdicts
            },
        }
        lines.append(json.dumps(rec, sort_keys=True))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_transcript(path: str) -> TranscriptEnv:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ConfigurationError(f"empty transcript file {path!r}")
    head = json.loads(lines[0])
    if "meta" not in head:
        raise ConfigurationError("transcript missing metadata record")
    meta = head["meta"]
    hierarchy = TypeHierarchy(
        types=meta["types"], edges=[tuple(e) for e in meta["edges"]]
    )
    objects = {
        name: hierarchy.make_object(name, types)
        for name, types in sorted(meta["objects"].items())
    }
    skills = {
        name: Skill(name, tuple(params))
        for name, params in sorted(meta["skills"].items())
    }
    transitions: list[Transition] = []
    verdicts: dict[str, dict[str, bool]] = {}
    states: dict[str, StateHandle] = {}
    for ln in lines[1:]:
        rec = json.loads(ln)
        before = states.setdefault(rec["before"], StateHandle(id=rec["before"]))
        after = states.setdefault(rec["after"], StateHandle(id=rec["after"]))
        skill = skills.get(rec["skill"])
        if skill is None:
            raise ConfigurationError(f"transcript uses unknown skill {rec['skill']!r}")
        instance = SkillInstance(
            skill=skill, arguments=tuple(objects[a] for a in rec["args"])
        )
        transitions.append(
            Transition(
                tid=rec["tid"],
                episode=rec["episode"],
                step=rec["step"],
                before=before,
                instance=instance,
                after=after if rec["success"] else before,
                success=rec["success"],
            )
        )
        for sid, table in rec.get("verdicts", {}).items():
            verdicts.setdefault(sid, {}).update(table)
    return TranscriptEnv(
        hierarchy=hierarchy,
        objects=list(objects.values()),
        skills=list(skills.values()),
        transitions=transitions,
        verdicts=verdicts,
    )


def make_task(
    name: str,
    tag: str,
    goal: Iterable[FluentSpec],
    relevant: Iterable[FluentSpec] | None = None,
) -> PlanningTask:
    goal_t = tuple(goal)
    return PlanningTask(
        name=name,
        tag=tag,
        goal=goal_t,
        relevant_fluents=tuple(relevant) if relevant is not None else goal_t,
    )


def _fl(name: str, *args: str, positive: bool = True) -> FluentSpec:
    return FluentSpec(name=name, args=args, positive=positive)


def kitchen_task_suite() -> list[PlanningTask]:
    """The scripted benchmark: 20 easy (optimal <= 7 steps), 10 hard
    (optimal <= 15), 5 impossible.  Initial table stack, bottom to top:
    bottom_bun, top_bun, lettuce, patty.  Goal positions are phrased
    with on_station(x, <station>) so any placement route the model
    prefers is physically equivalent; buried buns stay put."""
    easy = [
        ("hands_full", [_fl("gripper_empty", positive=False)]),
        ("patty_to_stove", [_fl("on_station", "patty", "stove")]),
        ("cook_patty", [_fl("cooked", "patty")]),
        ("patty_to_board", [_fl("on_station", "patty", "cutting_board")]),
        (
            "expose_and_hold",
            [_fl("gripper_empty", positive=False), _fl("topmost", "lettuce")],
        ),
        ("lettuce_to_stove", [_fl("on_station", "lettuce", "stove")]),
        ("cut_lettuce", [_fl("cut", "lettuce")]),
        (
            "cook_then_grab",
            [_fl("cooked", "patty"), _fl("gripper_empty", positive=False)],
        ),
        (
            "stove_then_hold",
            [
                _fl("on_station", "patty", "stove"),
                _fl("gripper_empty", positive=False),
            ],
        ),
        (
            "board_lettuce_hands_free",
            [_fl("gripper_empty"), _fl("on_station", "lettuce", "cutting_board")],
        ),
        (
            "stove_then_board",
            [
                _fl("on_station", "patty", "stove"),
                _fl("on_station", "lettuce", "cutting_board"),
            ],
        ),
        (
            "clear_to_stove",
            [
                _fl("on_station", "lettuce", "table", positive=False),
                _fl("on_station", "patty", "stove"),
                _fl("gripper_empty"),
            ],
        ),
        (
            "lettuce_atop_patty_board",
            [
                _fl("on_station", "patty", "cutting_board"),
                _fl("on_station", "lettuce", "cutting_board"),
                _fl("topmost", "lettuce"),
            ],
        ),
        ("expose_lettuce", [_fl("topmost", "lettuce")]),
        (
            "park_patty_on_stove",
            [_fl("on_station", "patty", "stove"), _fl("gripper_empty")],
        ),
        (
            "stove_pair",
            [
                _fl("on_station", "patty", "stove"),
                _fl("on_station", "lettuce", "stove"),
                _fl("topmost", "lettuce"),
            ],
        ),
        (
            "cook_patty_in_place",
            [_fl("cooked", "patty"), _fl("on_station", "patty", "stove")],
        ),
        ("cut_hands_free", [_fl("cut", "lettuce"), _fl("gripper_empty")]),
        (
            "clear_patty_from_table",
            [
                _fl("on_station", "patty", "table", positive=False),
                _fl("gripper_empty"),
            ],
        ),
        (
            "stage_lettuce",
            [
                _fl("on_station", "lettuce", "cutting_board"),
                _fl("topmost", "lettuce"),
            ],
        ),
    ]
    hard = [
        (
            "meal_stations",
            [
                _fl("cooked", "patty"),
                _fl("cut", "lettuce"),
                _fl("on_station", "patty", "stove"),
                _fl("on_station", "lettuce", "cutting_board"),
                _fl("gripper_empty"),
            ],
        ),
        (
            "crossed_parks",
            [
                _fl("on_station", "patty", "cutting_board"),
                _fl("topmost", "patty"),
                _fl("on_station", "lettuce", "stove"),
                _fl("topmost", "lettuce"),
                _fl("gripper_empty"),
            ],
        ),
        (
            "stations_then_idle",
            [
                _fl("cooked", "patty"),
                _fl("cut", "lettuce"),
                _fl("on_station", "patty", "stove"),
                _fl("on_station", "lettuce", "cutting_board"),
                _fl("topmost", "patty"),
                _fl("topmost", "lettuce"),
            ],
        ),
        (
            "cook_hold_station",
            [
                _fl("cooked", "patty"),
                _fl("on_station", "patty", "stove"),
                _fl("topmost", "patty"),
                _fl("cut", "lettuce"),
                _fl("gripper_empty", positive=False),
                _fl("on_station", "lettuce", "table", positive=False),
                _fl("on_station", "lettuce", "cutting_board", positive=False),
                _fl("on_station", "lettuce", "stove", positive=False),
            ],
        ),
        (
            "cook_then_clear_table",
            [
                _fl("cooked", "patty"),
                _fl("on_station", "patty", "stove"),
                _fl("on_station", "lettuce", "table", positive=False),
                _fl("gripper_empty"),
            ],
        ),
        (
            "cut_station_pair",
            [
                _fl("cut", "lettuce"),
                _fl("on_station", "lettuce", "cutting_board"),
                _fl("topmost", "lettuce"),
                _fl("on_station", "patty", "stove"),
                _fl("topmost", "patty"),
                _fl("gripper_empty"),
            ],
        ),
        (
            "process_and_return",
            [
                _fl("cooked", "patty"),
                _fl("on_station", "patty", "table"),
                _fl("gripper_empty"),
            ],
        ),
        (
            "assembled_core",
            [
                _fl("cooked", "patty"),
                _fl("cut", "lettuce"),
                _fl("on_station", "patty", "table"),
                _fl("on_station", "lettuce", "table"),
                _fl("on_station", "bottom_bun", "table"),
                _fl("topmost", "lettuce"),
                _fl("topmost", "patty", positive=False),
                _fl("topmost", "bottom_bun", positive=False),
                _fl("gripper_empty"),
            ],
        ),
        (
            "cut_then_clear",
            [
                _fl("cut", "lettuce"),
                _fl("on_station", "lettuce", "cutting_board"),
                _fl("on_station", "patty", "table", positive=False),
                _fl("gripper_empty"),
            ],
        ),
        (
            "stove_to_board_relay",
            [
                _fl("cooked", "patty"),
                _fl("cut", "lettuce"),
                _fl("on_station", "lettuce", "stove"),
                _fl("topmost", "lettuce"),
                _fl("on_station", "patty", "cutting_board"),
                _fl("topmost", "patty"),
                _fl("gripper_empty"),
            ],
        ),
    ]
    impossible = [
        ("cut_the_patty", [_fl("cut", "patty")]),
        ("cook_the_lettuce", [_fl("cooked", "lettuce")]),
        ("cook_top_bun", [_fl("cooked", "top_bun")]),
        ("cut_bottom_bun", [_fl("cut", "bottom_bun")]),
        (
            "hold_two_at_once",
            # off every station at once means both are in the gripper
            [
                _fl("on_station", "patty", "table", positive=False),
                _fl("on_station", "patty", "cutting_board", positive=False),
                _fl("on_station", "patty", "stove", positive=False),
                _fl("on_station", "lettuce", "table", positive=False),
                _fl("on_station", "lettuce", "cutting_board", positive=False),
                _fl("on_station", "lettuce", "stove", positive=False),
            ],
        ),
    ]
    tasks = [make_task(name, "easy", goal) for name, goal in easy]
    tasks += [make_task(name, "hard", goal) for name, goal in hard]
    tasks += [make_task(name, "impossible", goal) for name, goal in impossible]
    return tasks
