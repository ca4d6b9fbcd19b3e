"""Predicate invention: conflict detection, candidate scoring, the
invention loop, and post-hoc vocabulary reevaluation.

A conflict is a success/failure pair of one skill that the current model
cannot tell apart — on the initiation side (both before-states predicted
executable) or on the termination side (both after-states predicted
terminal).  Conflicts drive annotator queries; accepted candidates must
strictly beat the score threshold computed over all of the skill's
transitions under a hypothetical rebuild.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    AbstractionCache,
    Dataset,
    Model,
    ObjectRef,
    Predicate,
    StateHandle,
    Transition,
    TypeHierarchy,
    alpha_holds,
    instance_bindings,
    try_ground,
    zeta_holds,
)
from .operators import effect_diff, learn_operators
from .oracle import EFFECT, PRECONDITION, Proposer


@dataclass(frozen=True)
class Conflict:
    kind: str  # PRECONDITION or EFFECT
    skill_name: str
    positive: Transition  # the success
    negative: Transition  # the failure

    def contrasted(self) -> tuple[StateHandle, StateHandle]:
        if self.kind == PRECONDITION:
            return self.positive.before, self.negative.before
        return self.positive.after, self.negative.after

    def pair_key(self) -> tuple[str, int, int]:
        return (self.kind, self.positive.tid, self.negative.tid)


def find_conflicts(
    model: Model,
    dataset: Dataset,
    cache: AbstractionCache,
    kind: str,
    skill_name: str | None = None,
) -> list[Conflict]:
    """All indistinguishable success/failure pairs, ordered by (tid, tid)."""
    objects = cache.objects
    preds = model.predicates
    names = (
        [skill_name]
        if skill_name is not None
        else sorted({t.instance.skill.name for t in dataset.transitions()})
    )
    out: list[Conflict] = []
    for name in names:
        txs = dataset.for_skill(name)
        successes = [t for t in txs if t.success]
        failures = [t for t in txs if not t.success]
        if kind == PRECONDITION:
            hot_s = [
                t
                for t in successes
                if alpha_holds(
                    model, t.instance, cache.abstract(t.before, preds), objects
                )
            ]
            hot_f = [
                t
                for t in failures
                if alpha_holds(
                    model, t.instance, cache.abstract(t.before, preds), objects
                )
            ]
        elif kind == EFFECT:
            hot_s = [
                t
                for t in successes
                if zeta_holds(
                    model, t.instance, cache.abstract(t.after, preds), objects
                )
            ]
            hot_f = [
                t
                for t in failures
                if zeta_holds(
                    model, t.instance, cache.abstract(t.after, preds), objects
                )
            ]
        else:
            raise ValueError(f"unknown conflict kind {kind!r}")
        for ts in hot_s:
            for tf in hot_f:
                out.append(
                    Conflict(kind=kind, skill_name=name, positive=ts, negative=tf)
                )
    out.sort(key=lambda c: (c.skill_name, c.positive.tid, c.negative.tid))
    return out


def _explains_effect(
    model: Model,
    transition: Transition,
    cache: AbstractionCache,
    objects: Sequence[ObjectRef],
) -> bool:
    """Some operator grounding reproduces the observed nonempty effect exactly."""
    preds = model.predicates
    before = cache.abstract(transition.before, preds)
    after = cache.abstract(transition.after, preds)
    adds, dels = effect_diff(before.atoms, after.atoms)
    if not adds and not dels:
        return False
    add_set, del_set = frozenset(adds), frozenset(dels)
    for op in model.operators_for(transition.instance.skill.name):
        for binding in instance_bindings(op, transition.instance, objects):
            gop = try_ground(op, binding)
            if gop is None:
                continue
            if gop.add == add_set and gop.delete == del_set:
                return True
    return False


def skill_score(
    model: Model,
    dataset: Dataset,
    cache: AbstractionCache,
    skill_name: str,
    kind: str,
) -> float:
    """Fraction of the skill's transitions the model gets right for the kind."""
    objects = cache.objects
    preds = model.predicates
    txs = dataset.for_skill(skill_name)
    if not txs:
        return 1.0
    valid = 0
    for t in txs:
        if kind == PRECONDITION:
            predicted = alpha_holds(
                model, t.instance, cache.abstract(t.before, preds), objects
            )
            ok = predicted == t.success
        elif kind == EFFECT:
            ok = (not t.success) or _explains_effect(model, t, cache, objects)
        else:
            raise ValueError(f"unknown conflict kind {kind!r}")
        if ok:
            valid += 1
    return valid / len(txs)


def score_candidate(
    candidate: Predicate,
    skill_name: str,
    kind: str,
    model: Model,
    dataset: Dataset,
    cache: AbstractionCache,
    hierarchy: TypeHierarchy,
    extra_precondition_params: bool = False,
) -> float:
    """Score a candidate by rebuilding operators under the grown vocabulary."""
    grown = model.predicates | {candidate}
    ops = learn_operators(
        dataset, grown, cache, hierarchy, extra_precondition_params
    )
    hypothetical = Model(predicates=grown, operators=ops, rejected=model.rejected)
    return skill_score(hypothetical, dataset, cache, skill_name, kind)


def invent(
    model: Model,
    dataset: Dataset,
    cache: AbstractionCache,
    hierarchy: TypeHierarchy,
    proposer: Proposer,
    threshold: float = 0.6,
    budget: int = 8,
    extra_precondition_params: bool = False,
) -> tuple[Model, list[dict]]:
    """Resolve conflicts skill by skill, querying the annotator under a
    per-skill proposal budget; initiation-side conflicts go first.

    Accepted predicates trigger an immediate operator rebuild so later
    conflict checks see the improved model; rejected candidate names are
    remembered per skill across calls via the model itself.
    """
    events: list[dict] = []
    successes: dict[str, int] = {}
    for t in dataset.transitions():
        name = t.instance.skill.name
        successes.setdefault(name, 0)
        if t.success:
            successes[name] += 1
    # well-supported skills first: the vocabulary they earn raises the
    # scores sparser skills' candidates can reach in the same pass
    skill_names = sorted(successes, key=lambda n: (-successes[n], n))
    for name in skill_names:
        spent = 0
        dead_pairs: set[tuple[str, int, int]] = set()
        while spent < budget:
            conflict = None
            for kind in (PRECONDITION, EFFECT):
                found = find_conflicts(model, dataset, cache, kind, name)
                found = [c for c in found if c.pair_key() not in dead_pairs]
                if found:
                    conflict = found[0]
                    break
            if conflict is None:
                break
            state_pos, state_neg = conflict.contrasted()
            rejected = model.rejected.get(name, frozenset())
            skill = conflict.positive.instance.skill
            proposal = proposer.propose(
                skill,
                conflict.kind,
                state_pos,
                state_neg,
                model.predicates,
                rejected,
                cache.objects,
            )
            if proposal is None:
                # nothing unused separates this pair; skip it without
                # charging the budget, the next pair may still be live
                dead_pairs.add(conflict.pair_key())
                events.append(
                    {
                        "event": "exhausted",
                        "skill": name,
                        "kind": conflict.kind,
                        "pair": [conflict.positive.tid, conflict.negative.tid],
                    }
                )
                continue
            spent += 1
            candidate = proposal.predicate
            known = {p.name for p in model.predicates}
            if candidate.name in known or candidate.name in rejected:
                dead_pairs.add(conflict.pair_key())
                continue
            score = score_candidate(
                candidate,
                name,
                conflict.kind,
                model,
                dataset,
                cache,
                hierarchy,
                extra_precondition_params,
            )
            accepted = score > threshold
            events.append(
                {
                    "event": "accepted" if accepted else "rejected",
                    "skill": name,
                    "kind": conflict.kind,
                    "predicate": str(candidate),
                    "score": score,
                    "pair": [conflict.positive.tid, conflict.negative.tid],
                }
            )
            if accepted:
                grown = model.predicates | {candidate}
                ops = learn_operators(
                    dataset, grown, cache, hierarchy, extra_precondition_params
                )
                model = Model(
                    predicates=grown, operators=ops, rejected=model.rejected
                )
            else:
                remembered = dict(model.rejected)
                remembered[name] = rejected | {candidate.name}
                model = Model(
                    predicates=model.predicates,
                    operators=model.operators,
                    rejected=remembered,
                )
    return model, events


def _is_tautology(
    predicate: Predicate, states: Sequence[StateHandle], cache: AbstractionCache
) -> bool:
    """Constant grounded truth across every observed state."""
    if not states:
        return False
    first = cache.abstract(states[0], [predicate]).atoms
    return all(
        cache.abstract(s, [predicate]).atoms == first for s in states[1:]
    )


def reevaluate(
    model: Model,
    dataset: Dataset,
    cache: AbstractionCache,
    hierarchy: TypeHierarchy,
    extra_precondition_params: bool = False,
) -> tuple[Model, list[dict]]:
    """Prune the vocabulary: tautologies always; then any predicate whose
    removal does not strictly lower some skill's score on either side.
    Operators are rebuilt after every drop.
    """
    events: list[dict] = []
    states = dataset.states()
    skill_names = sorted({t.instance.skill.name for t in dataset.transitions()})

    def rebuilt(preds: frozenset[Predicate]) -> Model:
        ops = learn_operators(
            dataset, preds, cache, hierarchy, extra_precondition_params
        )
        return Model(predicates=preds, operators=ops, rejected=model.rejected)

    def all_scores(m: Model) -> dict[tuple[str, str], float]:
        return {
            (name, kind): skill_score(m, dataset, cache, name, kind)
            for name in skill_names
            for kind in (PRECONDITION, EFFECT)
        }

    for pred in sorted(model.predicates, key=lambda p: p.name):
        if _is_tautology(pred, states, cache):
            model = rebuilt(model.predicates - {pred})
            events.append({"event": "pruned_tautology", "predicate": pred.name})

    baseline = all_scores(model)
    for pred in sorted(model.predicates, key=lambda p: p.name):
        reduced = rebuilt(model.predicates - {pred})
        needed = False
        for name in skill_names:
            for kind in (PRECONDITION, EFFECT):
                reduced_score = skill_score(reduced, dataset, cache, name, kind)
                if reduced_score < baseline[(name, kind)]:
                    needed = True
                    break
            if needed:
                break
        if not needed:
            model = reduced
            baseline = all_scores(model)
            events.append({"event": "pruned_unneeded", "predicate": pred.name})
    return model, events
