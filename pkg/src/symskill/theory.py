"""Model quality checks and the sample-complexity bound.

``check_soundness`` re-derives every operator's claim from its provenance
transitions; ``check_consistency`` compares the model's executability and
post-state predictions against the whole dataset; ``empirical_d_compl``
is the observed rate of either disagreement.  ``sample_bound`` computes
how many transitions guarantee, with probability 1 - delta, that a
consistent model's disagreement rate is below epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    AbstractionCache,
    Dataset,
    Model,
    Transition,
    alpha_holds,
    ground_for_instance,
    zeta_holds,
)
from .operators import effect_diff

LOG_SPACE_EXPONENT_LIMIT = 200_000
_FLOAT_SAFE_LOG10 = 280.0


def _abstract_pair(cache: AbstractionCache, model: Model, t: Transition):
    before = cache.abstract(t.before, model.predicates)
    after = cache.abstract(t.after, model.predicates)
    return before, after


def check_soundness(
    model: Model, dataset: Dataset, cache: AbstractionCache
) -> list[str]:
    """Violation messages; empty means every operator is backed by its data.

    An operator is sound when each transition it was built from is a
    success with some type-valid binding whose preconditions hold in the
    abstracted before-state and whose grounded effects equal the observed
    atom diff exactly.  An empty model passes vacuously.
    """
    by_tid = {t.tid: t for t in dataset.transitions()}
    objects = cache.objects
    violations: list[str] = []
    for op in model.operators:
        for tid in op.provenance:
            t = by_tid.get(tid)
            if t is None:
                violations.append(f"{op.name}: provenance tid {tid} not in dataset")
                continue
            if not t.success:
                violations.append(
                    f"{op.name}: provenance tid {tid} is a failed transition"
                )
                continue
            before, after = _abstract_pair(cache, model, t)
            adds, dels = effect_diff(before.atoms, after.atoms)
            adds_f, dels_f = frozenset(adds), frozenset(dels)
            atoms = before.atoms
            ok = False
            for gop in ground_for_instance(op, t.instance, objects):
                if not gop.pre_pos <= atoms:
                    continue
                if not gop.pre_neg.isdisjoint(atoms):
                    continue
                if gop.add == adds_f and gop.delete == dels_f:
                    ok = True
                    break
            if not ok:
                violations.append(
                    f"{op.name}: no grounding reproduces transition {tid} "
                    f"(skill {t.instance.skill.name})"
                )
    return violations


@dataclass(frozen=True)
class Mismatch:
    tid: int
    skill: str
    kind: str  # "executability" or "post_state"
    predicted: bool
    observed: bool


@dataclass(frozen=True)
class ConsistencyReport:
    mismatches: tuple[Mismatch, ...]
    exempt_mismatches: tuple[Mismatch, ...]
    exempt_skills: tuple[str, ...]

    @property
    def consistent(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        def rows(items: tuple[Mismatch, ...]) -> list[dict]:
            return [
                {
                    "tid": m.tid,
                    "skill": m.skill,
                    "kind": m.kind,
                    "predicted": m.predicted,
                    "observed": m.observed,
                }
                for m in items
            ]

        return {
            "consistent": self.consistent,
            "mismatches": rows(self.mismatches),
            "exempt_mismatches": rows(self.exempt_mismatches),
            "exempt_skills": list(self.exempt_skills),
        }


def _transition_mismatches(
    model: Model, cache: AbstractionCache, t: Transition
) -> list[Mismatch]:
    objects = cache.objects
    before, after = _abstract_pair(cache, model, t)
    out = []
    predicted = alpha_holds(model, t.instance, before, objects)
    if predicted != t.success:
        out.append(
            Mismatch(
                tid=t.tid,
                skill=t.instance.skill.name,
                kind="executability",
                predicted=predicted,
                observed=t.success,
            )
        )
    if t.success and not zeta_holds(model, t.instance, after, objects):
        out.append(
            Mismatch(
                tid=t.tid,
                skill=t.instance.skill.name,
                kind="post_state",
                predicted=False,
                observed=True,
            )
        )
    return out


def check_consistency(
    model: Model, dataset: Dataset, cache: AbstractionCache
) -> ConsistencyReport:
    """Compare predictions with every recorded transition.

    Skills that never succeeded anywhere in the dataset cannot have
    operators, so their (vacuously permissive) predictions are reported
    separately rather than counted as inconsistency.
    """
    succeeded = {t.instance.skill.name for t in dataset.transitions() if t.success}
    seen = {t.instance.skill.name for t in dataset.transitions()}
    exempt = tuple(sorted(seen - succeeded))
    mismatches: list[Mismatch] = []
    exempt_mismatches: list[Mismatch] = []
    for t in dataset.transitions():
        rows = _transition_mismatches(model, cache, t)
        if t.instance.skill.name in exempt:
            exempt_mismatches.extend(rows)
        else:
            mismatches.extend(rows)
    return ConsistencyReport(
        mismatches=tuple(mismatches),
        exempt_mismatches=tuple(exempt_mismatches),
        exempt_skills=exempt,
    )


def empirical_d_compl(
    model: Model, dataset: Dataset, cache: AbstractionCache
) -> float:
    """Observed disagreement rate: the fraction of transitions whose
    executability prediction is wrong or whose observed successful
    post-state the model rejects.  Empty dataset -> 0.0."""
    transitions = list(dataset.transitions())
    if not transitions:
        return 0.0
    bad = sum(
        1 for t in transitions if _transition_mismatches(model, cache, t)
    )
    return bad / len(transitions)


@dataclass(frozen=True)
class SampleBound:
    """The transition count guaranteeing an epsilon-accurate model.

    ``a_max`` is 3 ** (p_max * object_count ** mu_max): the number of
    candidate operator templates per (skill, predicate) cell, each ground
    atom being a positive precondition, a negative one, or absent.
    ``h_size_bound`` is log base 3 of the hypothesis-class size.  When the
    numbers leave the exactly-representable regime the integer fields are
    None, ``log_space`` is set, and only the log10 figures are meaningful
    (the delta term is negligible there and is dropped).
    """

    epsilon: float
    delta: float
    p_max: int
    omega_count: int
    object_count: int
    mu_max: int
    exponent: int
    a_max: int | None
    h_size_bound: int | None
    h_size_log10: float
    n: int | None
    n_log10: float
    log_space: bool

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "p_max": self.p_max,
            "omega_count": self.omega_count,
            "object_count": self.object_count,
            "mu_max": self.mu_max,
            "exponent": self.exponent,
            "a_max": None if self.log_space else str(self.a_max),
            "h_size_bound": None if self.log_space else str(self.h_size_bound),
            "h_size_log10": self.h_size_log10,
            "n": None if self.log_space else self.n,
            "n_log10": self.n_log10,
            "log_space": self.log_space,
        }


def sample_bound(
    epsilon: float,
    delta: float,
    p_max: int,
    omega_count: int,
    object_count: int,
    mu_max: int,
) -> SampleBound:
    if not (0 < epsilon <= 1) or not (0 < delta < 1):
        raise ValueError("epsilon must be in (0, 1] and delta in (0, 1)")
    if min(p_max, omega_count, object_count) < 1 or mu_max < 0:
        raise ValueError("counts must be positive (mu_max may be zero)")
    groundings = object_count ** mu_max
    exponent = p_max * groundings
    log10_3 = math.log10(3.0)
    h_size_log10 = (
        math.log10(p_max)
        + exponent * log10_3
        + math.log10(omega_count)
        + mu_max * math.log10(object_count)
    )
    log_space = exponent > LOG_SPACE_EXPONENT_LIMIT or h_size_log10 > _FLOAT_SAFE_LOG10
    if log_space:
        n_log10 = h_size_log10 + math.log10(math.log(3.0)) - math.log10(epsilon)
        return SampleBound(
            epsilon=epsilon,
            delta=delta,
            p_max=p_max,
            omega_count=omega_count,
            object_count=object_count,
            mu_max=mu_max,
            exponent=exponent,
            a_max=None,
            h_size_bound=None,
            h_size_log10=h_size_log10,
            n=None,
            n_log10=n_log10,
            log_space=True,
        )
    a_max = 3 ** exponent
    h_size = p_max * a_max * omega_count * groundings
    raw = (float(h_size) * math.log(3.0) + math.log(1.0 / delta)) / epsilon
    n = math.ceil(raw)
    return SampleBound(
        epsilon=epsilon,
        delta=delta,
        p_max=p_max,
        omega_count=omega_count,
        object_count=object_count,
        mu_max=mu_max,
        exponent=exponent,
        a_max=a_max,
        h_size_bound=h_size,
        h_size_log10=h_size_log10,
        n=n,
        n_log10=math.log10(raw) if raw > 0 else 0.0,
        log_space=False,
    )
