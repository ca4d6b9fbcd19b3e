"""Grounded STRIPS planning over learned models: top-k plan search by
iterated plan-forbidding, plus the task evaluation harness.

The searcher runs uniform-cost search on the product of the abstract state
space with a prefix trie of already-found plans; a path that leaves the
trie is "diverged" and unconstrained, and a goal pop whose action string
exactly equals a forbidden plan is rejected (its successors still expand,
so plans may pass through goal states).  Each found plan is forbidden and
the search rerun, which makes the k plans exactly the k cheapest distinct
action walks that reach the goal.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import (
    AbstractionCache,
    Classifier,
    ConfigurationError,
    FluentSpec,
    GroundAtom,
    GroundOperator,
    Model,
    ObjectRef,
    Operator,
    PlanningTask,
    SkillInstance,
    ground_predicates,
    try_ground,
    valid_bindings,
)

DEFAULT_K = 10
DEFAULT_NODE_CAP = 500_000


def ground_all(
    model: Model, objects: Sequence[ObjectRef]
) -> tuple[GroundOperator, ...]:
    """Every valid grounding of every operator, sorted by (name, binding)."""
    out: list[GroundOperator] = []
    for op in model.operators:
        for binding in valid_bindings(op.parameters, objects):
            gop = try_ground(op, binding)
            if gop is not None:
                out.append(gop)
    out.sort(key=GroundOperator.action_id)
    return tuple(out)


@dataclass(frozen=True)
class GroundProblem:
    """A fully grounded planning problem compiled to bitmasks."""

    universe: tuple[GroundAtom, ...]
    operators: tuple[GroundOperator, ...]
    init_mask: int
    goal_pos: int
    goal_neg: int
    unsat_goal: bool
    op_pre_pos: tuple[int, ...] = field(repr=False, default=())
    op_pre_neg: tuple[int, ...] = field(repr=False, default=())
    op_add: tuple[int, ...] = field(repr=False, default=())
    op_del: tuple[int, ...] = field(repr=False, default=())


def resolve_goal(
    model: Model, objects: Sequence[ObjectRef], goal: Iterable[FluentSpec]
) -> tuple[frozenset[GroundAtom], frozenset[GroundAtom]] | None:
    """Goal fluents as ground atoms; None when the goal names a predicate
    the model never learned or binds arguments of incompatible type — such
    a goal is unsatisfiable under the model, not an error."""
    by_name = {o.name: o for o in objects}
    pos: set[GroundAtom] = set()
    neg: set[GroundAtom] = set()
    for fl in goal:
        pred = model.predicate_named(fl.name)
        if pred is None:
            return None
        args = []
        for a in fl.args:
            if a not in by_name:
                return None
            args.append(by_name[a])
        try:
            atom = GroundAtom(predicate=pred, arguments=tuple(args))
        except ConfigurationError:
            return None
        (pos if fl.positive else neg).add(atom)
    return frozenset(pos), frozenset(neg)


def build_problem(
    model: Model,
    objects: Sequence[ObjectRef],
    init_atoms: frozenset[GroundAtom],
    goal: Iterable[FluentSpec],
) -> GroundProblem:
    universe = tuple(
        sorted(ground_predicates(model.predicates, objects), key=GroundAtom.sort_key)
    )
    index = {a: i for i, a in enumerate(universe)}

    def mask(atoms: Iterable[GroundAtom]) -> int:
        m = 0
        for a in atoms:
            m |= 1 << index[a]
        return m

    resolved = resolve_goal(model, objects, goal)
    operators = ground_all(model, objects)
    if resolved is None:
        return GroundProblem(
            universe=universe,
            operators=operators,
            init_mask=mask(init_atoms),
            goal_pos=0,
            goal_neg=0,
            unsat_goal=True,
        )
    goal_pos, goal_neg = resolved
    return GroundProblem(
        universe=universe,
        operators=operators,
        init_mask=mask(init_atoms),
        goal_pos=mask(goal_pos),
        goal_neg=mask(goal_neg),
        unsat_goal=False,
        op_pre_pos=tuple(mask(g.pre_pos) for g in operators),
        op_pre_neg=tuple(mask(g.pre_neg) for g in operators),
        op_add=tuple(mask(g.add) for g in operators),
        op_del=tuple(mask(g.delete) for g in operators),
    )


@dataclass(frozen=True)
class Plan:
    steps: tuple[GroundOperator, ...]

    @property
    def cost(self) -> int:
        return len(self.steps)  # unit action costs

    def action_ids(self) -> tuple[tuple[str, tuple[str, ...]], ...]:
        return tuple(g.action_id() for g in self.steps)


@dataclass(frozen=True)
class TopKResult:
    plans: tuple[Plan, ...]
    complete: bool
    budget_exceeded: bool


class _Trie:
    """Prefix tree of forbidden action-index sequences."""

    def __init__(self, sequences: Iterable[tuple[int, ...]]):
        self.children: list[dict[int, int]] = [{}]
        self.is_end: list[bool] = [False]
        for seq in sequences:
            node = 0
            for a in seq:
                nxt = self.children[node].get(a)
                if nxt is None:
                    nxt = len(self.children)
                    self.children[node][a] = nxt
                    self.children.append({})
                    self.is_end.append(False)
                node = nxt
            self.is_end[node] = True

    def step(self, node: int, action: int) -> int:
        if node < 0:
            return -1
        return self.children[node].get(action, -1)  # -1 = diverged, free


def solve_topk(
    problem: GroundProblem,
    k: int = DEFAULT_K,
    node_cap: int = DEFAULT_NODE_CAP,
) -> TopKResult:
    """The k cheapest distinct plans (walks included), by plan-forbidding."""
    if problem.unsat_goal or k <= 0:
        return TopKResult(plans=(), complete=True, budget_exceeded=False)
    goal_pos, goal_neg = problem.goal_pos, problem.goal_neg
    n_ops = len(problem.operators)
    found: list[tuple[int, ...]] = []
    pops = 0
    budget_exceeded = False

    while len(found) < k:
        trie = _Trie(found)
        heap: list[tuple[int, int, int, int, tuple[int, ...]]] = [
            (0, 0, problem.init_mask, 0, ())
        ]
        seq = 1
        settled: set[tuple[int, int]] = set()
        round_plan: tuple[int, ...] | None = None
        while heap:
            cost, _, state, node, path = heapq.heappop(heap)
            key = (state, node)
            if key in settled:
                continue
            settled.add(key)
            pops += 1
            if pops > node_cap:
                budget_exceeded = True
                break
            at_goal = (state & goal_pos) == goal_pos and (state & goal_neg) == 0
            if at_goal and not (node >= 0 and trie.is_end[node]):
                round_plan = path
                break
            for op_i in range(n_ops):
                if (state & problem.op_pre_pos[op_i]) != problem.op_pre_pos[op_i]:
                    continue
                if state & problem.op_pre_neg[op_i]:
                    continue
                child_state = (state & ~problem.op_del[op_i]) | problem.op_add[op_i]
                child_node = trie.step(node, op_i)
                if (child_state, child_node) in settled:
                    continue
                heapq.heappush(
                    heap, (cost + 1, seq, child_state, child_node, path + (op_i,))
                )
                seq += 1
        if budget_exceeded:
            break
        if round_plan is None:
            break  # exhausted: no further plan exists
        found.append(round_plan)

    plans = tuple(
        Plan(steps=tuple(problem.operators[i] for i in seq)) for seq in found
    )
    return TopKResult(
        plans=plans, complete=not budget_exceeded, budget_exceeded=budget_exceeded
    )


# ---------------------------------------------------------------------------
# task evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaskResult:
    name: str
    tag: str
    solved: bool
    plans_tried: int  # the PB metric: 1-based success index, else k
    plans_found: int
    complete: bool
    budget_exceeded: bool
    detail: str = ""
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        # wall_time deliberately omitted: written reports must be
        # byte-identical across identical (config, seed) runs
        return {
            "name": self.name,
            "tag": self.tag,
            "solved": self.solved,
            "plans_tried": self.plans_tried,
            "plans_found": self.plans_found,
            "complete": self.complete,
            "budget_exceeded": self.budget_exceeded,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class EvalReport:
    tasks: tuple[TaskResult, ...]

    def by_tag(self, tag: str) -> tuple[TaskResult, ...]:
        return tuple(t for t in self.tasks if t.tag == tag)

    def solved_rate(self, tag: str) -> float:
        group = self.by_tag(tag)
        if not group:
            return 0.0
        return sum(1 for t in group if t.solved) / len(group)

    def mean_pb(self, tag: str) -> float:
        group = self.by_tag(tag)
        if not group:
            return 0.0
        return sum(t.plans_tried for t in group) / len(group)

    def to_dict(self) -> dict:
        tags = sorted({t.tag for t in self.tasks})
        return {
            "tasks": [t.to_dict() for t in self.tasks],
            "aggregates": {
                tag: {
                    "count": len(self.by_tag(tag)),
                    "solved_rate": self.solved_rate(tag),
                    "mean_pb": self.mean_pb(tag),
                }
                for tag in tags
            },
        }


def plan_to_instances(plan: Plan) -> list[SkillInstance]:
    """A plan's executable skill instances (operator bindings, skill slice)."""
    out = []
    for gop in plan.steps:
        skill = gop.operator.skill
        out.append(
            SkillInstance(skill=skill, arguments=gop.binding[: skill.arity])
        )
    return out


def evaluate(
    env,
    model: Model,
    classifier: Classifier,
    tasks: Sequence[PlanningTask],
    k: int = DEFAULT_K,
    node_cap: int = DEFAULT_NODE_CAP,
) -> EvalReport:
    """Plan and execute each task; impossible tasks count as solved exactly
    when the planner proves the goal unreachable and returns no plans."""
    objects = env.object_list()
    cache = AbstractionCache(classifier, objects)
    results: list[TaskResult] = []
    for task in tasks:
        env.reset()
        init = cache.abstract(env.observe(), model.predicates)
        problem = build_problem(model, objects, init.atoms, task.goal)
        topk = solve_topk(problem, k=k, node_cap=node_cap)
        solved = False
        detail = ""
        plans_tried = k
        if not topk.plans:
            if task.tag == "impossible" and topk.complete:
                solved = True
                plans_tried = 0
                detail = "goal proven unreachable"
            else:
                detail = (
                    "no plan found (budget exceeded)"
                    if topk.budget_exceeded
                    else "goal unreachable under model"
                )
        else:
            for i, plan in enumerate(topk.plans, start=1):
                env.reset()
                try:
                    for instance in plan_to_instances(plan):
                        env.execute(instance)
                except ConfigurationError as exc:
                    detail = f"environment rejected plan {i}: {exc}"
                    continue
                if env.ground_truth_check(task):
                    solved = True
                    plans_tried = i
                    break
            if not solved and not detail:
                detail = f"none of {len(topk.plans)} plans achieved the goal"
        results.append(
            TaskResult(
                name=task.name,
                tag=task.tag,
                solved=solved,
                plans_tried=plans_tried,
                plans_found=len(topk.plans),
                complete=topk.complete,
                budget_exceeded=topk.budget_exceeded,
                detail=detail,
            )
        )
    return EvalReport(tasks=tuple(results))


# ---------------------------------------------------------------------------
# task files
# ---------------------------------------------------------------------------

def _fluent_to_dict(fl: FluentSpec) -> dict:
    return {"name": fl.name, "args": list(fl.args), "positive": fl.positive}

def _fluent_from_dict(d: dict) -> FluentSpec:
    return FluentSpec(
        name=d["name"],
        args=tuple(d.get("args", ())),
        positive=bool(d.get("positive", True)),
    )


def save_tasks(path: str, tasks: Sequence[PlanningTask]) -> None:
    payload = [
        {
            "name": t.name,
            "tag": t.tag,
            "goal": [_fluent_to_dict(f) for f in t.goal],
            "relevant_fluents": [_fluent_to_dict(f) for f in t.relevant_fluents],
        }
        for t in tasks
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_tasks(path: str) -> list[PlanningTask]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    tasks = []
    for d in payload:
        goal = tuple(_fluent_from_dict(f) for f in d["goal"])
        relevant = tuple(
            _fluent_from_dict(f) for f in d.get("relevant_fluents", d["goal"])
        )
        tasks.append(
            PlanningTask(
                name=d["name"], tag=d["tag"], goal=goal, relevant_fluents=relevant
            )
        )
    return tasks
