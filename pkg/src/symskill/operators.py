"""Operator learning from successful transitions.

Successes are clustered by skill, by the lifted shape of their observed
abstract effect, and by the equality pattern among their arguments; each
nonempty cluster becomes one STRIPS operator whose preconditions are the
intersection of the members' abstract before-states, restricted to atoms
expressible over the operator's parameters.

Parameters are the skill's arguments (positionally) plus any extra objects
appearing in effect atoms, in first-occurrence order over the canonically
sorted effect; a config flag additionally admits parameters witnessed by
cluster-common precondition atoms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    AbstractionCache,
    Dataset,
    GroundAtom,
    LiftedAtom,
    Literal,
    Model,
    ObjectRef,
    Operator,
    Predicate,
    SkillInstance,
    Transition,
    TypeHierarchy,
    Variable,
)

Token = tuple[str, int]  # ("a", skill-arg index) or ("e", extra index)


def effect_diff(
    before_atoms: frozenset[GroundAtom], after_atoms: frozenset[GroundAtom]
) -> tuple[tuple[GroundAtom, ...], tuple[GroundAtom, ...]]:
    adds = tuple(sorted(after_atoms - before_atoms, key=GroundAtom.sort_key))
    dels = tuple(sorted(before_atoms - after_atoms, key=GroundAtom.sort_key))
    return adds, dels


def _token_walk(
    instance: SkillInstance,
    adds: Sequence[GroundAtom],
    dels: Sequence[GroundAtom],
) -> tuple[tuple[int, ...], tuple[tuple[str, str, tuple[Token, ...]], ...], list[str]]:
    """Canonical tokenization of one transition's effect.

    Returns (argument equality signature, tokenized atoms, extra object names
    in first-occurrence order).  Tokens name skill-argument positions or
    extra-object slots, so the result is object-identity-free.
    """
    args = [o.name for o in instance.arguments]
    argsig = tuple(args.index(a) for a in args)
    token_of: dict[str, Token] = {}
    for a in args:
        if a not in token_of:
            token_of[a] = ("a", args.index(a))
    extras: list[str] = []
    atom_tokens: list[tuple[str, str, tuple[Token, ...]]] = []
    for polarity, atoms in (("+", adds), ("-", dels)):
        for atom in atoms:
            toks: list[Token] = []
            for o in atom.arguments:
                if o.name not in token_of:
                    token_of[o.name] = ("e", len(extras))
                    extras.append(o.name)
                toks.append(token_of[o.name])
            atom_tokens.append((polarity, atom.predicate.name, tuple(toks)))
    return argsig, tuple(atom_tokens), extras


def lifted_effect_key(
    instance: SkillInstance,
    adds: Sequence[GroundAtom],
    dels: Sequence[GroundAtom],
) -> tuple:
    argsig, atom_tokens, _ = _token_walk(instance, adds, dels)
    return (instance.skill.name, argsig, atom_tokens)


@dataclass(frozen=True)
class ClusterMember:
    transition: Transition
    adds: tuple[GroundAtom, ...]
    dels: tuple[GroundAtom, ...]
    binding: tuple[ObjectRef, ...]  # skill args then extra effect objects


@dataclass(frozen=True)
class Cluster:
    key: tuple
    members: tuple[ClusterMember, ...]

    @property
    def skill_name(self) -> str:
        return self.key[0]


def cluster_transitions(
    dataset: Dataset,
    predicates: Iterable[Predicate],
    cache: AbstractionCache,
) -> list[Cluster]:
    """Group successful transitions by lifted effect shape; sorted, deterministic."""
    preds = tuple(sorted(predicates, key=lambda p: p.name))
    objects_by_name = {o.name: o for o in cache.objects}
    groups: dict[tuple, list[ClusterMember]] = {}
    for t in dataset.transitions():
        if not t.success:
            continue
        before = cache.abstract(t.before, preds)
        after = cache.abstract(t.after, preds)
        adds, dels = effect_diff(before.atoms, after.atoms)
        argsig, atom_tokens, extras = _token_walk(t.instance, adds, dels)
        key = (t.instance.skill.name, argsig, atom_tokens)
        binding = t.instance.arguments + tuple(objects_by_name[n] for n in extras)
        groups.setdefault(key, []).append(
            ClusterMember(transition=t, adds=adds, dels=dels, binding=binding)
        )
    out = [
        Cluster(key=key, members=tuple(sorted(ms, key=lambda m: m.transition.tid)))
        for key, ms in groups.items()
    ]
    out.sort(key=lambda c: c.key)
    return out


def _intersect_types(
    members: Sequence[ClusterMember], index: int
) -> frozenset[str]:
    its: frozenset[str] | None = None
    for m in members:
        ts = m.binding[index].types
        its = ts if its is None else its & ts
    assert its is not None
    return its


def _extend_with_precondition_params(
    cluster: Cluster,
    predicates: tuple[Predicate, ...],
    cache: AbstractionCache,
    gammas: list[frozenset[GroundAtom]],
    vtypes: list[frozenset[str]],
) -> tuple[list[tuple[ObjectRef, ...]], list[frozenset[str]]]:
    """Admit extra parameters witnessed by cluster-common before-state atoms.

    A (predicate, slot pattern) with exactly one open slot yields a new
    parameter when every member has exactly one non-parameter object filling
    the slot truthfully.  Single pass over the original parameters.
    """
    members = cluster.members
    bindings = [list(m.binding) for m in members]
    base = len(bindings[0])
    added_types: list[frozenset[str]] = []
    for pred in predicates:
        if pred.arity == 0:
            continue
        for hole in range(pred.arity):
            slots = [s for s in range(pred.arity) if s != hole]
            for combo in itertools.product(range(base), repeat=len(slots)):
                if not all(
                    pred.parameters[s] in vtypes[i] for s, i in zip(slots, combo)
                ):
                    continue
                witnesses: list[ObjectRef] = []
                for m_idx, member in enumerate(members):
                    bound = {o.name for o in member.binding}
                    hits = []
                    for obj in cache.objects:
                        if obj.name in bound or not obj.has_type(pred.parameters[hole]):
                            continue
                        argv: list[ObjectRef] = []
                        it = iter(combo)
                        for s in range(pred.arity):
                            argv.append(
                                obj if s == hole else member.binding[next(it)]
                            )
                        if GroundAtom(pred, tuple(argv)) in gammas[m_idx]:
                            hits.append(obj)
                    if len(hits) != 1:
                        witnesses = []
                        break
                    witnesses.append(hits[0])
                if witnesses:
                    its: frozenset[str] | None = None
                    for w in witnesses:
                        its = w.types if its is None else its & w.types
                    assert its is not None
                    for b, w in zip(bindings, witnesses):
                        b.append(w)
                    added_types.append(its)
    return [tuple(b) for b in bindings], vtypes + added_types


def learn_operators(
    dataset: Dataset,
    predicates: Iterable[Predicate],
    cache: AbstractionCache,
    hierarchy: TypeHierarchy,
    extra_precondition_params: bool = False,
) -> tuple[Operator, ...]:
    """Induce one operator per nonempty effect cluster of successes."""
    preds = tuple(sorted(predicates, key=lambda p: p.name))
    clusters = cluster_transitions(dataset, preds, cache)
    counters: dict[str, int] = {}
    operators: list[Operator] = []
    for cluster in clusters:
        _, _, atom_tokens = cluster.key
        if not atom_tokens:
            continue  # no observable abstract effect; no operator
        members = cluster.members
        skill = members[0].transition.instance.skill
        gammas = [
            cache.abstract(m.transition.before, preds).atoms for m in members
        ]
        vtypes = [
            _intersect_types(members, i) for i in range(len(members[0].binding))
        ]
        bindings = [m.binding for m in members]
        if extra_precondition_params:
            bindings, vtypes = _extend_with_precondition_params(
                cluster, preds, cache, gammas, vtypes
            )
        n_params = len(bindings[0])
        params = tuple(
            Variable(name=f"?x{i}", types=hierarchy.minimal(vtypes[i]))
            for i in range(n_params)
        )

        # lift effects from the representative member; repeated arguments
        # resolve to their first-occurrence parameter, as in the cluster key
        rep = members[0]
        var_of: dict[str, Variable] = {}
        for i, obj in enumerate(bindings[0]):
            var_of.setdefault(obj.name, params[i])
        add_effects = frozenset(
            LiftedAtom(a.predicate, tuple(var_of[o.name] for o in a.arguments))
            for a in rep.adds
        )
        delete_effects = frozenset(
            LiftedAtom(a.predicate, tuple(var_of[o.name] for o in a.arguments))
            for a in rep.dels
        )

        positives: set[Literal] = set()
        negatives: set[Literal] = set()
        for pred in preds:
            for combo in itertools.product(range(n_params), repeat=pred.arity):
                if not all(
                    pred.parameters[s] in vtypes[i] for s, i in enumerate(combo)
                ):
                    continue
                grounded = [
                    GroundAtom(pred, tuple(bindings[m][i] for i in combo))
                    for m in range(len(members))
                ]
                truth = [g in gammas[m] for m, g in enumerate(grounded)]
                atom = LiftedAtom(pred, tuple(params[i] for i in combo))
                if all(truth):
                    positives.add(Literal(atom, positive=True))
                elif not any(truth):
                    negatives.add(Literal(atom, positive=False))

        inequalities: set[tuple[str, str]] = set()
        for i, j in itertools.combinations(range(n_params), 2):
            if any(
                bindings[m][i].name == bindings[m][j].name
                for m in range(len(members))
            ):
                continue
            # only constrain pairs something could actually instantiate twice
            if not any(
                vtypes[i] <= o.types and vtypes[j] <= o.types
                for o in cache.objects
            ):
                continue
            pair = tuple(sorted((params[i].name, params[j].name)))
            inequalities.add(pair)  # type: ignore[arg-type]

        seq = counters.get(skill.name, 0)
        counters[skill.name] = seq + 1
        operators.append(
            Operator(
                name=f"{skill.name}_{seq}",
                skill=skill,
                parameters=params,
                preconditions=frozenset(positives | negatives),
                inequalities=frozenset(inequalities),
                add_effects=add_effects,
                delete_effects=delete_effects,
                provenance=tuple(m.transition.tid for m in members),
            )
        )
    return tuple(operators)


def model_rebuild(
    model: Model,
    dataset: Dataset,
    cache: AbstractionCache,
    hierarchy: TypeHierarchy,
    extra_precondition_params: bool = False,
) -> Model:
    """Re-learn all operators from scratch under the model's vocabulary."""
    ops = learn_operators(
        dataset, model.predicates, cache, hierarchy, extra_precondition_params
    )
    return Model(predicates=model.predicates, operators=ops, rejected=model.rejected)
