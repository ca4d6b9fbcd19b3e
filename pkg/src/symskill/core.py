"""Core vocabulary: types, objects, skills, predicates, operators, and the
abstraction machinery everything else is built on.

All public classes here are immutable value objects; operations are pure
functions of their inputs.  Two conventions matter repo-wide:

* ``ObjectRef.types`` always stores the *upward-closed* type set (declared
  types plus every ancestor plus the root).  Build objects through
  ``TypeHierarchy.make_object`` and type checks reduce to set membership.
* Determinism: nothing in this module iterates an unordered set where the
  order can leak into results; callers sort by the ``sort_key`` helpers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Sequence

ROOT_TYPE = "object"


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

class SymskillError(Exception):
    """Base class for package errors."""


class ConfigurationError(SymskillError):
    """Invalid vocabulary, hierarchy, binding, or configuration input."""


class ClassifierError(SymskillError):
    """A classifier could not produce a verdict."""

    def __init__(self, message: str, atom: "GroundAtom | None" = None):
        super().__init__(message)
        self.atom = atom


class AbstractionError(SymskillError):
    """Abstraction failed; carries the offending atom when known."""

    def __init__(self, message: str, atom: "GroundAtom | None" = None):
        super().__init__(message)
        self.atom = atom


class VocabularyMismatchError(SymskillError):
    """A ground atom was checked against a state of a different universe."""


class InapplicableOperatorError(SymskillError):
    """apply() was called with unsatisfied preconditions."""


# ---------------------------------------------------------------------------
# type hierarchy and objects
# ---------------------------------------------------------------------------

class TypeHierarchy:
    """Finite type vocabulary with a subtype DAG under an implicit root.

    ``edges`` are (child, parent) pairs; a type with no declared parent sits
    directly below the root type ``object``.
    """

    __slots__ = ("_types", "_edges", "_ancestors")

    def __init__(self, types: Iterable[str], edges: Iterable[tuple[str, str]] = ()):
        self._types = frozenset(types)
        if ROOT_TYPE in self._types:
            raise ConfigurationError(f"{ROOT_TYPE!r} is implicit and cannot be declared")
        self._edges = frozenset(edges)
        parents: dict[str, set[str]] = {t: set() for t in self._types}
        for child, parent in self._edges:
            if child not in self._types:
                raise ConfigurationError(f"edge references unknown type {child!r}")
            if parent != ROOT_TYPE and parent not in self._types:
                raise ConfigurationError(f"edge references unknown type {parent!r}")
            if parent != ROOT_TYPE:
                parents[child].add(parent)
        ancestors: dict[str, frozenset[str]] = {}

        def close(t: str, trail: tuple[str, ...]) -> frozenset[str]:
            if t in ancestors:
                return ancestors[t]
            if t in trail:
                raise ConfigurationError(f"type hierarchy cycle through {t!r}")
            acc = {t, ROOT_TYPE}
            for p in parents[t]:
                acc |= close(p, trail + (t,))
            ancestors[t] = frozenset(acc)
            return ancestors[t]

        for t in sorted(self._types):
            close(t, ())
        ancestors[ROOT_TYPE] = frozenset({ROOT_TYPE})
        self._ancestors = ancestors

    @property
    def types(self) -> frozenset[str]:
        return self._types

    @property
    def edges(self) -> frozenset[tuple[str, str]]:
        return self._edges

    def known(self, name: str) -> bool:
        return name == ROOT_TYPE or name in self._types

    def is_subtype(self, child: str, ancestor: str) -> bool:
        """Reflexive-transitive subtype query."""
        if not self.known(child) or not self.known(ancestor):
            raise ConfigurationError(f"unknown type in query ({child!r}, {ancestor!r})")
        return ancestor in self._ancestors[child]

    def expand(self, types: Iterable[str]) -> frozenset[str]:
        """Upward closure of a declared type set (always includes the root)."""
        out: set[str] = {ROOT_TYPE}
        for t in types:
            if not self.known(t):
                raise ConfigurationError(f"unknown type {t!r}")
            out |= self._ancestors[t]
        return frozenset(out)

    def minimal(self, types: Iterable[str]) -> frozenset[str]:
        """Most-specific elements of a type set (root dropped when possible)."""
        ts = set(types)
        if not all(self.known(t) for t in ts):
            raise ConfigurationError(f"unknown type in {sorted(ts)!r}")
        if ts - {ROOT_TYPE}:
            ts -= {ROOT_TYPE}
        return frozenset(
            t for t in ts
            if not any(u != t and t in self._ancestors[u] for u in ts)
        )

    def parents_of(self, t: str) -> frozenset[str]:
        """Declared parents of a type; empty set means directly under root."""
        return frozenset(p for c, p in self._edges if c == t)

    def make_object(self, name: str, declared: Iterable[str]) -> "ObjectRef":
        decl = tuple(declared)
        if not decl:
            raise ConfigurationError(f"object {name!r} declares no types")
        return ObjectRef(name=name, types=self.expand(decl))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, TypeHierarchy)
            and self._types == other._types
            and self._edges == other._edges
        )

    def __hash__(self) -> int:
        return hash((self._types, self._edges))

    def __repr__(self) -> str:
        return f"TypeHierarchy(types={sorted(self._types)}, edges={sorted(self._edges)})"


@dataclass(frozen=True)
class ObjectRef:
    """A named object with its upward-closed type set."""

    name: str
    types: frozenset[str]

    def __post_init__(self) -> None:
        if not self.types:
            raise ConfigurationError(f"object {self.name!r} has no types")

    def has_type(self, type_name: str) -> bool:
        return type_name in self.types

    def __repr__(self) -> str:
        return f"ObjectRef({self.name})"


# ---------------------------------------------------------------------------
# skills and transitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Skill:
    """A black-box typed skill; the environment owns its behavior."""

    name: str
    parameters: tuple[str, ...]
    executor: Any = field(default=None, compare=False, repr=False)

    @property
    def arity(self) -> int:
        return len(self.parameters)


@dataclass(frozen=True)
class SkillInstance:
    """A skill bound to concrete objects."""

    skill: Skill
    arguments: tuple[ObjectRef, ...]

    def __post_init__(self) -> None:
        if len(self.arguments) != self.skill.arity:
            raise ConfigurationError(
                f"{self.skill.name} expects {self.skill.arity} arguments, "
                f"got {len(self.arguments)}"
            )
        for constraint, obj in zip(self.skill.parameters, self.arguments):
            if not obj.has_type(constraint):
                raise ConfigurationError(
                    f"{obj.name} does not satisfy type {constraint!r} "
                    f"for {self.skill.name}"
                )

    def key(self) -> tuple[str, tuple[str, ...]]:
        return (self.skill.name, tuple(o.name for o in self.arguments))

    def __str__(self) -> str:
        return f"{self.skill.name}({', '.join(o.name for o in self.arguments)})"


@dataclass(frozen=True)
class StateHandle:
    """Opaque state reference; equality is by id only."""

    id: str
    payload: Any = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Transition:
    """One experience tuple; failures leave the world unchanged."""

    tid: int
    episode: int
    step: int
    before: StateHandle
    instance: SkillInstance
    after: StateHandle
    success: bool

    def __post_init__(self) -> None:
        if not self.success and self.after != self.before:
            raise ConfigurationError(
                f"failed transition {self.tid} must keep after == before"
            )


class Dataset:
    """Episode-structured transition store; assigns transition ids."""

    def __init__(self) -> None:
        self.episodes: list[list[Transition]] = []
        self._count = 0

    def add_episode(
        self,
        steps: Sequence[tuple[StateHandle, SkillInstance, StateHandle, bool]],
    ) -> list[Transition]:
        episode = len(self.episodes)
        out: list[Transition] = []
        for step, (before, instance, after, success) in enumerate(steps):
            out.append(
                Transition(
                    tid=self._count,
                    episode=episode,
                    step=step,
                    before=before,
                    instance=instance,
                    after=after,
                    success=success,
                )
            )
            self._count += 1
        self.episodes.append(out)
        return out

    def adopt_episode(self, transitions: Sequence[Transition]) -> list[Transition]:
        """Store transitions that already carry ids (environment-assigned)."""
        episode = list(transitions)
        if episode:
            tids = [t.tid for t in episode]
            if len(set(tids)) != len(tids):
                raise ConfigurationError("duplicate transition ids in episode")
            self._count = max(self._count, max(tids) + 1)
        self.episodes.append(episode)
        return episode

    def transitions(self) -> Iterator[Transition]:
        for episode in self.episodes:
            yield from episode

    def for_skill(self, skill_name: str) -> list[Transition]:
        return [t for t in self.transitions() if t.instance.skill.name == skill_name]

    def states(self) -> list[StateHandle]:
        seen: dict[str, StateHandle] = {}
        for t in self.transitions():
            seen.setdefault(t.before.id, t.before)
            seen.setdefault(t.after.id, t.after)
        return [seen[k] for k in sorted(seen)]

    def __len__(self) -> int:
        return self._count

    def __bool__(self) -> bool:
        return self._count > 0


# ---------------------------------------------------------------------------
# predicates and abstract states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Predicate:
    """Typed relational symbol; semantics is documentation, not identity."""

    name: str
    parameters: tuple[str, ...]
    semantics: str = field(default="", compare=False)

    @property
    def arity(self) -> int:
        return len(self.parameters)

    def __str__(self) -> str:
        return f"{self.name}({', '.join(self.parameters)})"


@dataclass(frozen=True)
class GroundAtom:
    predicate: Predicate
    arguments: tuple[ObjectRef, ...]

    def __post_init__(self) -> None:
        if len(self.arguments) != self.predicate.arity:
            raise ConfigurationError(
                f"{self.predicate.name} expects {self.predicate.arity} args"
            )
        for constraint, obj in zip(self.predicate.parameters, self.arguments):
            if not obj.has_type(constraint):
                raise ConfigurationError(
                    f"{obj.name} does not satisfy type {constraint!r} "
                    f"for predicate {self.predicate.name}"
                )

    def sort_key(self) -> tuple[str, tuple[str, ...]]:
        return (self.predicate.name, tuple(o.name for o in self.arguments))

    def __str__(self) -> str:
        return f"{self.predicate.name}({','.join(o.name for o in self.arguments)})"


@dataclass(frozen=True)
class AbstractState:
    """Closed-world abstract state: atoms not listed are false."""

    atoms: frozenset[GroundAtom]
    universe: frozenset[GroundAtom]

    def __post_init__(self) -> None:
        if not self.atoms <= self.universe:
            stray = sorted(self.atoms - self.universe, key=GroundAtom.sort_key)
            raise ConfigurationError(f"atoms outside universe: {stray[:3]}")

    def truth(self, atom: GroundAtom) -> bool:
        if atom not in self.universe:
            raise VocabularyMismatchError(f"{atom} not in this state's universe")
        return atom in self.atoms


# ---------------------------------------------------------------------------
# lifted structures: variables, literals, operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Variable:
    """A typed operator parameter; usually a single type, possibly several."""

    name: str
    types: frozenset[str]

    def __post_init__(self) -> None:
        if not self.name.startswith("?"):
            raise ConfigurationError(f"variable name {self.name!r} must start with '?'")
        if not self.types:
            raise ConfigurationError(f"variable {self.name} has no types")

    def admits(self, obj: ObjectRef) -> bool:
        return self.types <= obj.types

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class LiftedAtom:
    predicate: Predicate
    variables: tuple[Variable, ...]

    def __post_init__(self) -> None:
        if len(self.variables) != self.predicate.arity:
            raise ConfigurationError(
                f"{self.predicate.name} expects {self.predicate.arity} variables"
            )

    def ground(self, assignment: Mapping[str, ObjectRef]) -> GroundAtom:
        return GroundAtom(
            predicate=self.predicate,
            arguments=tuple(assignment[v.name] for v in self.variables),
        )

    def sort_key(self) -> tuple[str, tuple[str, ...]]:
        return (self.predicate.name, tuple(v.name for v in self.variables))

    def __str__(self) -> str:
        return f"{self.predicate.name}({','.join(v.name for v in self.variables)})"


@dataclass(frozen=True)
class Literal:
    atom: LiftedAtom
    positive: bool = True

    def sort_key(self) -> tuple[int, tuple[str, tuple[str, ...]]]:
        return (0 if self.positive else 1, self.atom.sort_key())

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"not {self.atom}"


@dataclass(frozen=True)
class Operator:
    """Lifted STRIPS operator modeling one conditional behavior of a skill.

    The first ``skill.arity`` parameters correspond positionally to the
    skill's arguments; further parameters came from effect (or, behind a
    flag, precondition) objects.  ``inequalities`` hold sorted variable-name
    pairs that must bind distinct objects.
    """

    name: str
    skill: Skill
    parameters: tuple[Variable, ...]
    preconditions: frozenset[Literal]
    inequalities: frozenset[tuple[str, str]]
    add_effects: frozenset[LiftedAtom]
    delete_effects: frozenset[LiftedAtom]
    provenance: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.parameters) < self.skill.arity:
            raise ConfigurationError(
                f"{self.name}: fewer parameters than skill arity"
            )
        names = {v.name for v in self.parameters}
        if len(names) != len(self.parameters):
            raise ConfigurationError(f"{self.name}: duplicate parameter names")
        used = set()
        for lit in self.preconditions:
            used.update(v.name for v in lit.atom.variables)
        for atom in self.add_effects | self.delete_effects:
            used.update(v.name for v in atom.variables)
        for a, b in self.inequalities:
            used.update((a, b))
            if a >= b:
                raise ConfigurationError(f"{self.name}: inequality pair not sorted")
        if not used <= names:
            raise ConfigurationError(
                f"{self.name}: literals use undeclared variables {sorted(used - names)}"
            )
        if self.add_effects & self.delete_effects:
            raise ConfigurationError(f"{self.name}: add/delete effects overlap")
        if not self.provenance:
            raise ConfigurationError(f"{self.name}: provenance must be nonempty")
        object.__setattr__(
            self,
            "_pre_pos",
            frozenset(l.atom for l in self.preconditions if l.positive),
        )
        object.__setattr__(
            self,
            "_pre_neg",
            frozenset(l.atom for l in self.preconditions if not l.positive),
        )
        object.__setattr__(self, "_ground_cache", {})
        object.__setattr__(self, "_zeta_cache", {})

    @property
    def pre_pos(self) -> frozenset[LiftedAtom]:
        return self._pre_pos  # type: ignore[attr-defined]

    @property
    def pre_neg(self) -> frozenset[LiftedAtom]:
        return self._pre_neg  # type: ignore[attr-defined]

    def sort_key(self) -> tuple[str, str]:
        return (self.skill.name, self.name)


@dataclass(frozen=True)
class GroundOperator:
    """An operator with all parameters bound; precomputed ground literal sets."""

    operator: Operator
    binding: tuple[ObjectRef, ...]
    pre_pos: frozenset[GroundAtom]
    pre_neg: frozenset[GroundAtom]
    add: frozenset[GroundAtom]
    delete: frozenset[GroundAtom]

    def action_id(self) -> tuple[str, tuple[str, ...]]:
        return (self.operator.name, tuple(o.name for o in self.binding))

    def __str__(self) -> str:
        return f"{self.operator.name}({', '.join(o.name for o in self.binding)})"


def binding_respects_inequalities(
    operator: Operator, binding: Sequence[ObjectRef]
) -> bool:
    index = {v.name: i for i, v in enumerate(operator.parameters)}
    return all(
        binding[index[a]].name != binding[index[b]].name
        for a, b in operator.inequalities
    )


def try_ground(
    operator: Operator, binding: Sequence[ObjectRef]
) -> GroundOperator | None:
    """Ground an operator; None if the binding is type- or inequality-invalid."""
    if len(binding) != len(operator.parameters):
        raise ConfigurationError(
            f"{operator.name}: binding length {len(binding)} != "
            f"{len(operator.parameters)} parameters"
        )
    for var, obj in zip(operator.parameters, binding):
        if not var.admits(obj):
            return None
    if not binding_respects_inequalities(operator, binding):
        return None
    assignment = {v.name: o for v, o in zip(operator.parameters, binding)}
    return GroundOperator(
        operator=operator,
        binding=tuple(binding),
        pre_pos=frozenset(a.ground(assignment) for a in operator.pre_pos),
        pre_neg=frozenset(a.ground(assignment) for a in operator.pre_neg),
        add=frozenset(a.ground(assignment) for a in operator.add_effects),
        delete=frozenset(a.ground(assignment) for a in operator.delete_effects),
    )


def ground_operator(operator: Operator, binding: Sequence[ObjectRef]) -> GroundOperator:
    gop = try_ground(operator, binding)
    if gop is None:
        raise ConfigurationError(
            f"invalid binding {[o.name for o in binding]} for {operator.name}"
        )
    return gop


# ---------------------------------------------------------------------------
# model and planning task
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Model:
    """The learned model: predicate vocabulary plus per-skill operators.

    ``rejected`` maps skill name -> names of candidates that skill's
    invention loop has tried and rejected (persisted across iterations).
    """

    predicates: frozenset[Predicate]
    operators: tuple[Operator, ...]
    rejected: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "operators", tuple(sorted(self.operators, key=Operator.sort_key))
        )
        by_skill: dict[str, list[Operator]] = {}
        for op in self.operators:
            used = {l.atom.predicate for l in op.preconditions}
            used |= {a.predicate for a in op.add_effects | op.delete_effects}
            if not used <= self.predicates:
                missing = sorted(p.name for p in used - self.predicates)
                raise ConfigurationError(
                    f"{op.name} references predicates outside the model: {missing}"
                )
            by_skill.setdefault(op.skill.name, []).append(op)
        object.__setattr__(
            self, "_by_skill", {k: tuple(v) for k, v in by_skill.items()}
        )

    @classmethod
    def empty(cls) -> "Model":
        return cls(predicates=frozenset(), operators=())

    def operators_for(self, skill_name: str) -> tuple[Operator, ...]:
        return self._by_skill.get(skill_name, ())  # type: ignore[attr-defined]

    @property
    def rejected_predicates(self) -> frozenset[str]:
        out: set[str] = set()
        for names in self.rejected.values():
            out |= names
        return frozenset(out)

    def predicate_named(self, name: str) -> Predicate | None:
        for p in self.predicates:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class FluentSpec:
    """A name-level fluent reference used by task files; resolved late."""

    name: str
    args: tuple[str, ...] = ()
    positive: bool = True

    def __str__(self) -> str:
        body = f"{self.name}({','.join(self.args)})"
        return body if self.positive else f"not {body}"


@dataclass(frozen=True)
class PlanningTask:
    """A task: env-specific initial spec, goal fluents, ground-truth fluents."""

    name: str
    tag: str
    goal: tuple[FluentSpec, ...]
    relevant_fluents: tuple[FluentSpec, ...]
    initial_spec: Any = None
    goal_state: StateHandle | None = None

    def __post_init__(self) -> None:
        if self.tag not in ("easy", "hard", "impossible"):
            raise ConfigurationError(f"unknown task tag {self.tag!r}")


# ---------------------------------------------------------------------------
# grounding and abstraction
# ---------------------------------------------------------------------------

def ground_predicates(
    predicates: Iterable[Predicate],
    objects: Iterable[ObjectRef],
    hierarchy: TypeHierarchy | None = None,
) -> frozenset[GroundAtom]:
    """Every type-valid ground atom of the vocabulary over the objects."""
    objs = sorted(objects, key=lambda o: o.name)
    out: set[GroundAtom] = set()
    for pred in sorted(predicates, key=lambda p: p.name):
        if hierarchy is not None:
            for t in pred.parameters:
                if not hierarchy.known(t):
                    raise ConfigurationError(
                        f"predicate {pred.name} uses unknown type {t!r}"
                    )
        pools = [[o for o in objs if o.has_type(t)] for t in pred.parameters]
        for combo in itertools.product(*pools):
            out.add(GroundAtom(predicate=pred, arguments=tuple(combo)))
    return frozenset(out)


class Classifier:
    """Interface: batch truth evaluation of ground atoms on a state."""

    def evaluate_batch(
        self, atoms: Sequence[GroundAtom], state: StateHandle
    ) -> dict[GroundAtom, bool]:
        raise NotImplementedError


def abstract(
    state: StateHandle,
    predicates: Iterable[Predicate],
    objects: Iterable[ObjectRef],
    classifier: Classifier,
) -> AbstractState:
    """The abstraction function: all ground atoms true in the state."""
    universe = ground_predicates(predicates, objects)
    ordered = sorted(universe, key=GroundAtom.sort_key)
    try:
        verdicts = classifier.evaluate_batch(ordered, state)
    except ClassifierError as exc:
        raise AbstractionError(str(exc), atom=exc.atom) from exc
    atoms = frozenset(a for a in ordered if verdicts.get(a, False))
    return AbstractState(atoms=atoms, universe=universe)


class AbstractionCache:
    """Memoizes per-(state, predicate) verdicts for deterministic classifiers.

    The invention loop re-abstracts the dataset once per candidate; caching
    per predicate lets a grown vocabulary reuse all previous verdicts.
    """

    def __init__(self, classifier: Classifier, objects: Iterable[ObjectRef]):
        self._classifier = classifier
        self._objects = tuple(sorted(objects, key=lambda o: o.name))
        self._atoms_of: dict[Predicate, tuple[GroundAtom, ...]] = {}
        self._true: dict[tuple[str, Predicate], frozenset[GroundAtom]] = {}
        self._composite: dict[tuple[str, tuple[str, ...]], AbstractState] = {}

    @property
    def objects(self) -> tuple[ObjectRef, ...]:
        return self._objects

    def _atoms(self, pred: Predicate) -> tuple[GroundAtom, ...]:
        cached = self._atoms_of.get(pred)
        if cached is None:
            cached = tuple(
                sorted(ground_predicates([pred], self._objects), key=GroundAtom.sort_key)
            )
            self._atoms_of[pred] = cached
        return cached

    def abstract(self, state: StateHandle, predicates: Iterable[Predicate]) -> AbstractState:
        preds = sorted(predicates, key=lambda p: p.name)
        composite_key = (state.id, tuple(p.name for p in preds))
        done = self._composite.get(composite_key)
        if done is not None:
            return done
        missing = [p for p in preds if (state.id, p) not in self._true]
        if missing:
            batch: list[GroundAtom] = []
            for p in missing:
                batch.extend(self._atoms(p))
            try:
                verdicts = self._classifier.evaluate_batch(batch, state)
            except ClassifierError as exc:
                raise AbstractionError(str(exc), atom=exc.atom) from exc
            for p in missing:
                self._true[(state.id, p)] = frozenset(
                    a for a in self._atoms(p) if verdicts.get(a, False)
                )
        universe: set[GroundAtom] = set()
        atoms: set[GroundAtom] = set()
        for p in preds:
            universe.update(self._atoms(p))
            atoms.update(self._true[(state.id, p)])
        built = AbstractState(atoms=frozenset(atoms), universe=frozenset(universe))
        self._composite[composite_key] = built
        return built


# ---------------------------------------------------------------------------
# satisfaction, application, and the executability predictors
# ---------------------------------------------------------------------------

def satisfies(state: AbstractState, gop: GroundOperator) -> bool:
    """True iff the ground operator's preconditions hold in the state."""
    for atom in gop.pre_pos | gop.pre_neg:
        if atom not in state.universe:
            raise VocabularyMismatchError(f"{atom} not in this state's universe")
    return _satisfies_fast(state.atoms, gop)


def _satisfies_fast(atoms: frozenset[GroundAtom], gop: GroundOperator) -> bool:
    return gop.pre_pos <= atoms and gop.pre_neg.isdisjoint(atoms)


def apply(state: AbstractState, gop: GroundOperator) -> AbstractState:
    """STRIPS successor: (atoms - delete) | add."""
    if not _satisfies_fast(state.atoms, gop):
        raise InapplicableOperatorError(f"{gop} preconditions unsatisfied")
    return AbstractState(
        atoms=(state.atoms - gop.delete) | gop.add, universe=state.universe
    )


def valid_bindings(
    variables: Sequence[Variable], objects: Iterable[ObjectRef]
) -> list[tuple[ObjectRef, ...]]:
    """All type-valid assignments, lexicographic by (variable index, object name)."""
    objs = sorted(objects, key=lambda o: o.name)
    pools = [[o for o in objs if v.admits(o)] for v in variables]
    return [tuple(combo) for combo in itertools.product(*pools)]


def instance_bindings(
    operator: Operator, instance: SkillInstance, objects: Iterable[ObjectRef]
) -> Iterator[tuple[ObjectRef, ...]]:
    """Bindings whose first k slots are the instance arguments, positionally."""
    k = instance.skill.arity
    base = instance.arguments
    for var, obj in zip(operator.parameters[:k], base):
        if not var.admits(obj):
            return
    for extra in valid_bindings(operator.parameters[k:], objects):
        binding = base + extra
        if binding_respects_inequalities(operator, binding):
            yield binding


def ground_for_instance(
    operator: Operator, instance: SkillInstance, objects: Sequence[ObjectRef]
) -> tuple[GroundOperator, ...]:
    """All valid groundings of an operator for one skill instance, cached.

    The cache lives on the (immutable) operator; instances and object
    inventories recur constantly during scoring, so this is hot.
    """
    key = (instance.key(), tuple(o.name for o in objects))
    cache: dict = operator._ground_cache  # type: ignore[attr-defined]
    hit = cache.get(key)
    if hit is None:
        hit = tuple(
            gop
            for binding in instance_bindings(operator, instance, objects)
            if (gop := try_ground(operator, binding)) is not None
        )
        cache[key] = hit
    return hit


def _zeta_groundings(
    operator: Operator, instance: SkillInstance, objects: Sequence[ObjectRef]
) -> tuple[tuple[frozenset[GroundAtom], frozenset[GroundAtom]], ...]:
    """Grounded (must-hold, must-be-absent) post-state sets, cached."""
    key = (instance.key(), tuple(o.name for o in objects))
    cache: dict = operator._zeta_cache  # type: ignore[attr-defined]
    hit = cache.get(key)
    if hit is None:
        survivors = (operator.pre_pos - operator.delete_effects) | operator.add_effects
        rows = []
        for binding in instance_bindings(operator, instance, objects):
            if try_ground(operator, binding) is None:
                continue
            assignment = {v.name: o for v, o in zip(operator.parameters, binding)}
            rows.append(
                (
                    frozenset(a.ground(assignment) for a in survivors),
                    frozenset(a.ground(assignment) for a in operator.delete_effects),
                )
            )
        hit = tuple(rows)
        cache[key] = hit
    return hit


def alpha_holds(
    model: Model,
    instance: SkillInstance,
    state: AbstractState,
    objects: Sequence[ObjectRef],
) -> bool:
    """Model-predicted initiation: some operator grounding is satisfied.

    Bootstrap convention: a skill with no learned operators predicts true —
    an empty vocabulary distinguishes nothing, which is exactly what the
    invention conditions detect.
    """
    ops = model.operators_for(instance.skill.name)
    if not ops:
        return True
    atoms = state.atoms
    for op in ops:
        for gop in ground_for_instance(op, instance, objects):
            if _satisfies_fast(atoms, gop):
                return True
    return False


def zeta_holds(
    model: Model,
    instance: SkillInstance,
    state_after: AbstractState,
    objects: Sequence[ObjectRef],
) -> bool:
    """Model-predicted termination: positives of (Pre+ \\ Eff-) ∪ Eff+ hold
    and no Eff- atom remains, for some grounding.  Bootstrap mirrors alpha.
    """
    ops = model.operators_for(instance.skill.name)
    if not ops:
        return True
    atoms = state_after.atoms
    for op in ops:
        for pos, neg in _zeta_groundings(op, instance, objects):
            if pos <= atoms and neg.isdisjoint(atoms):
                return True
    return False
