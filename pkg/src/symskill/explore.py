"""Active exploration: candidate sequence generation and selection.

Candidates are scored on two axes: coverage (entropy gain of the
consecutive-skill-pair distribution if the sequence were executed) and
chainability (distance of the model-predicted executable-step ratio from
0.5 — a sequence the current model finds half-executable is maximally
informative).  One Pareto-selected sequence per iteration gets executed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

from .core import (
    AbstractState,
    Dataset,
    Model,
    ObjectRef,
    SkillInstance,
    Transition,
    apply,
    ground_for_instance,
    _satisfies_fast,
)


def _skill_name(step) -> str:
    if isinstance(step, str):
        return step
    if isinstance(step, SkillInstance):
        return step.skill.name
    return step.name  # a Skill


class PairCountMatrix:
    """Counts of consecutive skill pairs across executed episodes."""

    def __init__(self) -> None:
        self.counts: dict[tuple[str, str], int] = {}
        self.total = 0

    def add_pair(self, a: str, b: str, n: int = 1) -> None:
        self.counts[(a, b)] = self.counts.get((a, b), 0) + n
        self.total += n

    def add_sequence(self, steps: Sequence) -> None:
        names = [_skill_name(s) for s in steps]
        for a, b in zip(names, names[1:]):
            self.add_pair(a, b)

    @classmethod
    def from_dataset(cls, dataset: Dataset) -> "PairCountMatrix":
        m = cls()
        for episode in dataset.episodes:
            m.add_sequence([t.instance for t in episode])
        return m

    def copy(self) -> "PairCountMatrix":
        m = PairCountMatrix()
        m.counts = dict(self.counts)
        m.total = self.total
        return m

    def entropy(self) -> float:
        if self.total == 0:
            return 0.0
        h = 0.0
        for c in self.counts.values():
            if c > 0:
                p = c / self.total
                h -= p * math.log(p)
        return h

    def least_explored_pair(self, skill_names: Sequence[str]) -> tuple[str, str]:
        names = sorted(skill_names)
        return min(
            ((a, b) for a in names for b in names),
            key=lambda ab: (self.counts.get(ab, 0), ab),
        )


def coverage(matrix: PairCountMatrix, candidate: Sequence) -> float:
    """Entropy gain of the pair distribution from executing the candidate."""
    before = matrix.entropy()
    grown = matrix.copy()
    grown.add_sequence(candidate)
    return grown.entropy() - before


def chainability(
    model: Model,
    candidate: Sequence[SkillInstance],
    initial: AbstractState,
    objects: Sequence[ObjectRef],
) -> float:
    """|executable fraction − 1/2| under model simulation from the initial
    abstract state; inexecutable steps leave the simulated state unchanged."""
    if not candidate:
        return 0.5
    state = initial
    executable = 0
    for instance in candidate:
        chosen = None
        for op in model.operators_for(instance.skill.name):
            for gop in ground_for_instance(op, instance, objects):
                if _satisfies_fast(state.atoms, gop):
                    chosen = gop
                    break
            if chosen is not None:
                break
        if chosen is not None:
            executable += 1
            state = apply(state, chosen)
    return abs(executable / len(candidate) - 0.5)


@dataclass(frozen=True)
class ScoredSequence:
    index: int
    instances: tuple[SkillInstance, ...]
    coverage: float
    chainability: float


def pareto_front(points: Sequence[tuple[float, float]]) -> list[int]:
    """Indices of points not dominated under (maximize first, minimize second)."""
    out = []
    for i, (c_i, h_i) in enumerate(points):
        dominated = False
        for j, (c_j, h_j) in enumerate(points):
            if j == i:
                continue
            if c_j >= c_i and h_j <= h_i and (c_j > c_i or h_j < h_i):
                dominated = True
                break
        if not dominated:
            out.append(i)
    return out


def pareto_select(scored: Sequence[ScoredSequence]) -> ScoredSequence:
    """Front member with maximal coverage; ties to lower chainability, then
    generation order."""
    if not scored:
        raise ValueError("no candidates to select from")
    front = pareto_front([(s.coverage, s.chainability) for s in scored])
    return min(
        (scored[i] for i in front),
        key=lambda s: (-s.coverage, s.chainability, s.index),
    )


def _feasible(env, state, cands: Sequence[SkillInstance]) -> list[SkillInstance]:
    return [c for c in cands if env.peek_execute(state, c)[1]]


def _mini_script(
    env, state, by: dict, rng: random.Random, verbs: bool = True
) -> list[SkillInstance]:
    """One short purposeful stretch of steps, planned against the simulated
    state.  Mixes productive chains with near-miss variants: the near misses
    fail for exactly one reason, which is what invention feeds on.  With
    ``verbs`` off only manipulation steps are emitted, so the first episode
    settles the relational vocabulary before process verbs show up."""
    picks = by.get("Pick", [])
    places = by.get("Place", [])
    stacks = by.get("Stack", [])
    grabable = _feasible(env, state, picks)

    def settle(obj: str, here) -> list[SkillInstance]:
        # put the held object down at a station and apply a verb to it there;
        # the verb or its station argument is sometimes deliberately off
        dests = _feasible(
            env, here, [c for c in places if c.arguments[0].name == obj]
        )
        if not dests:
            return []
        dest = dests[rng.randrange(len(dests))]
        fit = {
            "stove": any(c.arguments[0].name == obj for c in by.get("Cook", [])),
            "cutting_board": any(
                c.arguments[0].name == obj for c in by.get("Cut", [])
            ),
        }
        matched = [c for c in dests if fit.get(c.arguments[1].name, False)]
        if verbs and matched and rng.random() < 0.7:
            # park it where its process verb applies
            dest = matched[rng.randrange(len(matched))]
        station = dest.arguments[1].name
        script = [dest]
        if not verbs:
            return script
        verb = {"cutting_board": "Cut", "stove": "Cook"}.get(station)
        if verb is None or rng.random() < 0.15:
            verb = ("Cut", "Cook")[rng.randrange(2)]
        off = sorted(
            {
                c.arguments[1].name
                for c in by.get(verb, [])
                if c.arguments[1].name != station
            }
        )
        # sometimes name the wrong station on purpose: the attempt then
        # fails on the argument alone
        where = station
        if off and rng.random() >= 0.9:
            where = off[rng.randrange(len(off))]
        procs = [
            c
            for c in by.get(verb, [])
            if c.arguments[0].name == obj and c.arguments[1].name == where
        ]
        if procs:
            script.append(procs[rng.randrange(len(procs))])
        return script

    if not grabable:
        # gripper is probably full: finish the carry, or drop onto a stack
        rest = _feasible(env, state, stacks)
        if rest and rng.random() < 0.4:
            return [rest[rng.randrange(len(rest))]]
        held = _feasible(env, state, places)
        if held:
            return settle(held[0].arguments[0].name, state)
        if not verbs:
            return []
        verb_pool = by.get(("Cut", "Cook")[rng.randrange(2)], [])
        return [verb_pool[rng.randrange(len(verb_pool))]] if verb_pool else []

    roll = rng.random()
    if roll < 0.5:
        first = grabable[rng.randrange(len(grabable))]
        obj = first.arguments[0].name
        script = [first]
        if rng.random() < 0.2:
            # try to put down an object that is not in hand
            wrong = [c for c in places if c.arguments[0].name != obj]
            if wrong:
                script.append(wrong[rng.randrange(len(wrong))])
        here = state
        for step in script:
            here, _ = env.peek_execute(here, step)
        script.extend(settle(obj, here))
        if rng.random() < 0.6:
            here = state
            for step in script:
                here, _ = env.peek_execute(here, step)
            nxt = _feasible(env, here, picks)
            if nxt:
                second = nxt[rng.randrange(len(nxt))]
                script.append(second)
                again = [c for c in nxt if c is not second]
                if again and rng.random() < 0.6:
                    # a second grab with a full gripper: fails on that alone
                    script.append(again[rng.randrange(len(again))])
        return script
    if roll < 0.65 and stacks:
        # grab something and drop it onto another object
        first = grabable[rng.randrange(len(grabable))]
        here, _ = env.peek_execute(state, first)
        rest = _feasible(env, here, stacks)
        script = [first]
        if rest:
            script.append(rest[rng.randrange(len(rest))])
        return script
    if roll < 0.8:
        sub = rng.random()
        loose = {g.arguments[0].name for g in grabable}
        offstation = [
            c
            for c in picks
            if c not in grabable and c.arguments[0].name in loose
        ]
        if offstation and sub < 0.45:
            # right object, wrong station argument: fails on that alone
            return [offstation[rng.randrange(len(offstation))]]
        buried = [
            c
            for c in picks
            if c not in grabable and c.arguments[0].name not in loose
        ]
        if buried and sub < 0.75:
            # reach for something under the pile
            return [buried[rng.randrange(len(buried))]]
        first = grabable[rng.randrange(len(grabable))]
        others = [c for c in grabable if c is not first]
        script = [first]
        if others:
            script.append(others[rng.randrange(len(others))])
        return script
    if roll < 0.92 and verbs:
        # apply a verb wherever the object happens to sit; usually name its
        # actual station, so the attempt fails only when the station kind is
        # wrong for the verb
        verb = ("Cut", "Cook")[rng.randrange(2)]
        pool = by.get(verb, [])
        seat = {
            g.arguments[0].name: g.arguments[1].name for g in grabable
        }
        seated = [
            c
            for c in pool
            if seat.get(c.arguments[0].name) == c.arguments[1].name
        ]
        if seated and rng.random() < 0.75:
            return [seated[rng.randrange(len(seated))]]
        if pool:
            return [pool[rng.randrange(len(pool))]]
    if places:
        # empty-handed placement attempt
        return [places[rng.randrange(len(places))]]
    return []


def _coverage_snippets(
    env, state, by: dict, counts: dict, primer: bool, cap: int
) -> list[SkillInstance]:
    """Deterministic episode-front probes for the transition classes
    invention cannot do without.  Each fires only while the collected data
    still lacks its class, so seed variance cannot starve a contrast."""
    snips: list[SkillInstance] = []
    here = state

    def emit(c) -> None:
        nonlocal here
        snips.append(c)
        here, _ = env.peek_execute(here, c)

    def loose() -> dict[str, SkillInstance]:
        return {
            c.arguments[0].name: c
            for c in _feasible(env, here, by.get("Pick", []))
        }

    def first(cands):
        return min(cands, key=lambda c: c.key()) if cands else None

    dest_for = {"Cook": "stove", "Cut": "cutting_board"}
    if not primer:
        for verb in ("Cook", "Cut"):
            pool = by.get(verb, [])
            if not pool:
                continue
            # the verb at the object's actual seat, before it is moved:
            # fails on the station kind alone
            if counts.get((verb, False), 0) < 1:
                seat = loose()
                probe = first(
                    [
                        c
                        for c in pool
                        if c.arguments[0].name in seat
                        and c.arguments[1].name
                        == seat[c.arguments[0].name].arguments[1].name
                        and not env.peek_execute(here, c)[1]
                    ]
                )
                if probe is not None:
                    emit(probe)
            if counts.get((verb, True), 0) >= 2:
                continue
            seat = loose()
            obj = next(
                (
                    o
                    for o in sorted(seat)
                    if any(c.arguments[0].name == o for c in pool)
                ),
                None,
            )
            if obj is None:
                continue
            dest = dest_for[verb]
            if seat[obj].arguments[1].name != dest:
                emit(seat[obj])
                place = first(
                    [
                        c
                        for c in by.get("Place", [])
                        if c.arguments[0].name == obj
                        and c.arguments[1].name == dest
                    ]
                )
                if place is not None:
                    emit(place)
            done = first(
                [
                    c
                    for c in pool
                    if c.arguments[0].name == obj
                    and c.arguments[1].name == dest
                ]
            )
            if done is not None and env.peek_execute(here, done)[1]:
                emit(done)
    if counts.get(("Pick", False), 0) < 3:
        seat = loose()
        # name a station the object is not at: the argument is the only flaw
        probe = first(
            [
                c
                for c in by.get("Pick", [])
                if c.arguments[0].name in seat
                and c.arguments[1].name
                != seat[c.arguments[0].name].arguments[1].name
            ]
        )
        if probe is not None:
            emit(probe)
        # build a two-pile and reach for its base
        seat = loose()
        for top in sorted(seat):
            grab = seat[top]
            after_grab, ok = env.peek_execute(here, grab)
            if not ok:
                continue
            drop = first(
                [
                    c
                    for c in by.get("Stack", [])
                    if c.arguments[0].name == top
                    and c.arguments[1].name in seat
                    and c.arguments[1].name != top
                    and env.peek_execute(after_grab, c)[1]
                ]
            )
            if drop is None:
                continue
            base = drop.arguments[1].name
            emit(grab)
            emit(drop)
            under = first(
                [
                    c
                    for c in by.get("Pick", [])
                    if c.arguments[0].name == base
                    and c.arguments[1].name
                    == seat[base].arguments[1].name
                ]
            )
            if under is not None:
                emit(under)
            break
    return snips[:cap]


def generate_candidates(
    env,
    matrix: PairCountMatrix,
    rng: random.Random,
    batch: int,
    steps: int,
    violation_rate: float = 0.25,
    model: Model | None = None,
    class_counts: dict | None = None,
) -> list[tuple[SkillInstance, ...]]:
    """Scripted candidate generator.

    Each candidate simulates forward from the episode-initial state and is
    assembled from short purposeful scripts (grab-carry-process runs, double
    grabs, bare verb attempts) interleaved with single filler steps; roughly
    ``violation_rate`` of the filler picks a currently infeasible instance.
    One least-explored consecutive skill pair is injected at a random
    position, and no two consecutive steps repeat the identical ground
    instance.
    """
    # hold process verbs back until the manipulation vocabulary can carry
    # them: verb failures scored against a bare vocabulary get their true
    # discriminators rejected, and rejections stick.  Readiness = at least
    # two predicates, one of them relational (station binding needs a
    # 2-place predicate to be expressible at all)
    primer = matrix.total == 0
    if not primer and model is not None:
        preds = model.predicates
        relational = any(len(p.parameters) >= 2 for p in preds)
        primer = len(preds) < 2 or not relational
    verb_names = {"Cut", "Cook"}
    options = [
        c
        for c in env.all_instances()
        if not (primer and c.skill.name in verb_names)
    ]
    by_skill: dict[str, list[SkillInstance]] = {}
    for cand in options:
        by_skill.setdefault(cand.skill.name, []).append(cand)
    skill_names = [
        s.name
        for s in env.skill_list()
        if not (primer and s.name in verb_names)
    ]
    out: list[tuple[SkillInstance, ...]] = []
    base = env.initial_state().handle()
    snips = _coverage_snippets(
        env,
        base,
        by_skill,
        class_counts or {},
        primer,
        cap=max(steps - 3, 0),
    )
    for _ in range(batch):
        inject_a, inject_b = matrix.least_explored_pair(skill_names)
        inject_at = rng.randrange(max(steps - 1, 1)) if steps > 1 else steps
        inject_at = max(inject_at, len(snips))
        state = base
        seq: list[SkillInstance] = []
        queue: list[SkillInstance] = []
        prev_key = None
        for s in snips:
            seq.append(s)
            prev_key = s.key()
            state, _ = env.peek_execute(state, s)
        for i in range(len(snips), steps):
            if i == inject_at or i == inject_at + 1:
                queue.clear()
                want = inject_a if i == inject_at else inject_b
                feasible = _feasible(env, state, by_skill.get(want, []))
                pool = feasible or by_skill.get(want, []) or options
                choice = pool[rng.randrange(len(pool))]
            else:
                if not queue and rng.random() < 0.7:
                    queue = _mini_script(
                        env, state, by_skill, rng, verbs=not primer
                    )
                if queue:
                    choice = queue.pop(0)
                else:
                    feasible = []
                    infeasible = []
                    for cand in options:
                        _, ok = env.peek_execute(state, cand)
                        (feasible if ok else infeasible).append(cand)
                    if rng.random() < violation_rate:
                        pool = infeasible or options
                    else:
                        pool = feasible or options
                    fresh = [c for c in pool if c.key() != prev_key]
                    if not fresh:
                        fresh = [c for c in options if c.key() != prev_key]
                    choice = fresh[rng.randrange(len(fresh))]
            seq.append(choice)
            prev_key = choice.key()
            state, _ = env.peek_execute(state, choice)
        out.append(tuple(seq))
    return out


def random_candidate(
    env, rng: random.Random, steps: int
) -> tuple[SkillInstance, ...]:
    """Uniform skill + uniform valid arguments per step (baseline explorer)."""
    skills = env.skill_list()
    seq = []
    for _ in range(steps):
        skill = skills[rng.randrange(len(skills))]
        pool = env.ground_instances(skill)
        seq.append(pool[rng.randrange(len(pool))])
    return tuple(seq)


def collect(env, instances: Sequence[SkillInstance], dataset: Dataset) -> list[Transition]:
    """Execute one candidate as a fresh episode and record every transition."""
    env.reset()
    episode = [env.execute(instance) for instance in instances]
    return dataset.adopt_episode(episode)
