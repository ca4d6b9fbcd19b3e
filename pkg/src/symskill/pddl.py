"""PDDL emission and parsing for learned models.

Emission is canonical: alphabetical types/predicates/actions, precondition
literals printed as inequalities, then positives, then negatives (each
sorted), effects as adds then deletes, and every conjunction wrapped in
``(and ...)``.  Emitting, parsing, and emitting again reproduces the file
byte for byte.

Typing schemes:

* ``native`` — usable when the type hierarchy is a tree and every operator
  parameter has a single most-specific type; emits a ``(:types ...)``
  section and typed parameters.
* ``membership`` — the fallback: all parameters are plain ``object`` and
  static ``is_<type>`` predicates carry the typing in preconditions and
  problem inits.  Exact for any hierarchy.
* ``either`` — opt-in only: multi-type parameters print as
  ``(either t1 t2)``.  PDDL reads that disjunctively while learned
  multi-type parameters are conjunctive, so external planners may
  over-ground such domains; the default never picks this scheme.

``auto`` resolves to native when possible, else membership.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    ConfigurationError,
    FluentSpec,
    GroundAtom,
    LiftedAtom,
    Literal,
    Model,
    ObjectRef,
    Operator,
    Predicate,
    ROOT_TYPE,
    Skill,
    TypeHierarchy,
    Variable,
)

REQUIREMENTS = ":strips :typing :negative-preconditions :equality"

_EXTERNAL_PROVENANCE = (-1,)  # marks operators read back from PDDL text


def sanitize_name(raw: str) -> str:
    out = re.sub(r"[^a-z0-9_]", "_", raw.lower())
    if not out or not out[0].isalpha():
        out = "x" + out
    return out


class _NameMap:
    """Per-namespace raw -> sanitized names; collisions are errors."""

    def __init__(self, namespace: str):
        self.namespace = namespace
        self._fwd: dict[str, str] = {}
        self._owner: dict[str, str] = {}

    def get(self, raw: str) -> str:
        if raw in self._fwd:
            return self._fwd[raw]
        clean = sanitize_name(raw)
        prior = self._owner.get(clean)
        if prior is not None and prior != raw:
            raise ConfigurationError(
                f"{self.namespace} names {prior!r} and {raw!r} both "
                f"sanitize to {clean!r}"
            )
        self._fwd[raw] = clean
        self._owner[clean] = raw
        return clean


def _hierarchy_is_tree(hierarchy: TypeHierarchy) -> bool:
    return all(len(hierarchy.parents_of(t)) <= 1 for t in hierarchy.types)


def _single_minimal(hierarchy: TypeHierarchy, types: frozenset[str]) -> str | None:
    mins = hierarchy.minimal(types)
    if len(mins) == 1:
        return next(iter(mins))
    return None


def native_typing_ok(model: Model, hierarchy: TypeHierarchy) -> bool:
    if not _hierarchy_is_tree(hierarchy):
        return False
    for pred in model.predicates:
        if not all(hierarchy.known(t) for t in pred.parameters):
            return False
    for op in model.operators:
        for v in op.parameters:
            if _single_minimal(hierarchy, v.types) is None:
                return False
    return True


def _membership_transform(
    model: Model, hierarchy: TypeHierarchy
) -> tuple[Model, TypeHierarchy]:
    """Retype everything to ``object`` and push typing into is_<t> statics."""
    preds: dict[str, Predicate] = {}
    for p in model.predicates:
        preds[p.name] = Predicate(
            p.name, tuple(ROOT_TYPE for _ in p.parameters), semantics=p.semantics
        )
    for t in sorted(hierarchy.types):
        name = f"is_{t}"
        if name in preds:
            raise ConfigurationError(
                f"membership predicate {name!r} collides with an existing predicate"
            )
        preds[name] = Predicate(name, (ROOT_TYPE,), semantics=f"object has type {t}")

    def relift(atom: LiftedAtom, vmap: dict[str, Variable]) -> LiftedAtom:
        return LiftedAtom(
            predicate=preds[atom.predicate.name],
            variables=tuple(vmap[v.name] for v in atom.variables),
        )

    ops = []
    for op in model.operators:
        vmap = {
            v.name: Variable(v.name, frozenset({ROOT_TYPE})) for v in op.parameters
        }
        lits = {
            Literal(relift(l.atom, vmap), positive=l.positive)
            for l in op.preconditions
        }
        for v in op.parameters:
            for t in sorted(hierarchy.minimal(v.types)):
                lits.add(
                    Literal(LiftedAtom(preds[f"is_{t}"], (vmap[v.name],)))
                )
        ops.append(
            Operator(
                name=op.name,
                skill=op.skill,
                parameters=tuple(vmap[v.name] for v in op.parameters),
                preconditions=frozenset(lits),
                inequalities=op.inequalities,
                add_effects=frozenset(relift(a, vmap) for a in op.add_effects),
                delete_effects=frozenset(relift(a, vmap) for a in op.delete_effects),
                provenance=op.provenance,
            )
        )
    flat = Model(predicates=frozenset(preds.values()), operators=tuple(ops))
    return flat, TypeHierarchy(types=())


def _resolve_scheme(model: Model, hierarchy: TypeHierarchy, typing: str) -> str:
    if typing not in ("auto", "native", "membership", "either"):
        raise ConfigurationError(f"unknown typing scheme {typing!r}")
    if typing == "auto":
        return "native" if native_typing_ok(model, hierarchy) else "membership"
    if typing == "native" and not native_typing_ok(model, hierarchy):
        raise ConfigurationError(
            "native typing requires a tree hierarchy and single-type parameters"
        )
    if typing == "either" and not _hierarchy_is_tree(hierarchy):
        raise ConfigurationError("either typing still requires a tree hierarchy")
    return typing


def _types_section(hierarchy: TypeHierarchy, tmap: _NameMap) -> list[str]:
    if not hierarchy.types:
        return []
    groups: dict[str, list[str]] = {}
    for t in hierarchy.types:
        parents = hierarchy.parents_of(t)
        parent = next(iter(parents)) if parents else ROOT_TYPE
        groups.setdefault(parent, []).append(t)
    lines = ["  (:types"]
    body = []
    for parent in sorted(groups):
        kids = " ".join(tmap.get(t) for t in sorted(groups[parent]))
        body.append(f"    {kids} - {tmap.get(parent) if parent != ROOT_TYPE else ROOT_TYPE}")
    lines.extend(body)
    lines[-1] += ")"
    return lines


def _var_types(
    v: Variable, hierarchy: TypeHierarchy, tmap: _NameMap, scheme: str
) -> str:
    if scheme == "membership":
        return ROOT_TYPE
    mins = sorted(hierarchy.minimal(v.types))
    if len(mins) == 1:
        t = mins[0]
        return tmap.get(t) if t != ROOT_TYPE else ROOT_TYPE
    if scheme != "either":
        raise ConfigurationError(
            f"parameter {v.name} has types {mins}; use the either or "
            "membership scheme"
        )
    return "(either " + " ".join(
        tmap.get(t) if t != ROOT_TYPE else ROOT_TYPE for t in mins
    ) + ")"


def _atom_str(atom: LiftedAtom, pmap: _NameMap) -> str:
    name = pmap.get(atom.predicate.name)
    if not atom.variables:
        return f"({name})"
    return f"({name} " + " ".join(v.name for v in atom.variables) + ")"


def emit_domain(
    model: Model,
    hierarchy: TypeHierarchy,
    name: str = "learned",
    typing: str = "auto",
) -> str:
    scheme = _resolve_scheme(model, hierarchy, typing)
    if scheme == "membership":
        model, hierarchy = _membership_transform(model, hierarchy)
        scheme = "native"  # flat single-type model prints natively

    tmap = _NameMap("type")
    pmap = _NameMap("predicate")
    amap = _NameMap("action")

    lines = [f"(define (domain {sanitize_name(name)})"]
    lines.append(f"  (:requirements {REQUIREMENTS})")
    lines.extend(_types_section(hierarchy, tmap))

    lines.append("  (:predicates")
    pred_lines = []
    for p in sorted(model.predicates, key=lambda p: p.name):
        pname = pmap.get(p.name)
        if p.arity == 0:
            pred_lines.append(f"    ({pname})")
        else:
            parts = []
            for i, t in enumerate(p.parameters):
                tt = tmap.get(t) if t != ROOT_TYPE else ROOT_TYPE
                parts.append(f"?x{i} - {tt}")
            pred_lines.append(f"    ({pname} " + " ".join(parts) + ")")
    if not pred_lines:
        pred_lines = ["    "]
    pred_lines[-1] += ")"
    lines.extend(pred_lines)

    for op in sorted(model.operators, key=lambda o: o.name):
        aname = amap.get(op.name)
        lines.append(f"  (:action {aname}")
        params = " ".join(
            f"{v.name} - {_var_types(v, hierarchy, tmap, scheme)}"
            for v in op.parameters
        )
        lines.append(f"    :parameters ({params})")
        pre_parts = [
            f"(not (= {a} {b}))" for a, b in sorted(op.inequalities)
        ]
        pre_parts += [
            _atom_str(l.atom, pmap)
            for l in sorted(op.preconditions, key=Literal.sort_key)
            if l.positive
        ]
        pre_parts += [
            f"(not {_atom_str(l.atom, pmap)})"
            for l in sorted(op.preconditions, key=Literal.sort_key)
            if not l.positive
        ]
        body = " ".join(pre_parts)
        lines.append(f"    :precondition (and{' ' + body if body else ''})")
        eff_parts = [
            _atom_str(a, pmap)
            for a in sorted(op.add_effects, key=LiftedAtom.sort_key)
        ]
        eff_parts += [
            f"(not {_atom_str(a, pmap)})"
            for a in sorted(op.delete_effects, key=LiftedAtom.sort_key)
        ]
        ebody = " ".join(eff_parts)
        lines.append(f"    :effect (and{' ' + ebody if ebody else ''}))")

    lines.append(")")
    text = "\n".join(lines) + "\n"
    if not text.isascii():
        raise ConfigurationError("emitted domain contains non-ASCII characters")
    return text


def emit_problem(
    task_name: str,
    domain_name: str,
    model: Model,
    hierarchy: TypeHierarchy,
    objects: Sequence[ObjectRef],
    init_atoms: Iterable[GroundAtom],
    goal: Sequence[FluentSpec],
    typing: str = "auto",
) -> str:
    scheme = _resolve_scheme(model, hierarchy, typing)
    init = set(init_atoms)
    objs = sorted(objects, key=lambda o: o.name)
    tmap = _NameMap("type")
    pmap = _NameMap("predicate")
    omap = _NameMap("object")

    obj_lines: list[str] = []
    extra_init: list[tuple[str, tuple[str, ...]]] = []
    if scheme == "membership":
        for o in objs:
            obj_lines.append(f"    {omap.get(o.name)} - {ROOT_TYPE}")
            for t in sorted(hierarchy.minimal(o.types)):
                extra_init.append((f"is_{t}", (o.name,)))
    else:
        for o in objs:
            mins = sorted(hierarchy.minimal(o.types))
            if len(mins) != 1 and scheme != "either":
                raise ConfigurationError(
                    f"object {o.name} has types {mins}; use the membership scheme"
                )
            if len(mins) == 1:
                t = mins[0]
                tt = tmap.get(t) if t != ROOT_TYPE else ROOT_TYPE
            else:
                tt = "(either " + " ".join(tmap.get(t) for t in mins) + ")"
            obj_lines.append(f"    {omap.get(o.name)} - {tt}")

    init_facts = [
        (a.predicate.name, tuple(o.name for o in a.arguments)) for a in init
    ]
    init_facts.extend(extra_init)
    init_lines = []
    for pred, args in sorted(init_facts):
        if args:
            body = " ".join(omap.get(a) for a in args)
            init_lines.append(f"    ({pmap.get(pred)} {body})")
        else:
            init_lines.append(f"    ({pmap.get(pred)})")

    goal_parts = []
    for fl in sorted(goal, key=lambda f: (not f.positive, f.name, f.args)):
        if fl.args:
            body = " ".join(omap.get(a) for a in fl.args)
            s = f"({pmap.get(fl.name)} {body})"
        else:
            s = f"({pmap.get(fl.name)})"
        goal_parts.append(s if fl.positive else f"(not {s})")

    lines = [f"(define (problem {sanitize_name(task_name)})"]
    lines.append(f"  (:domain {sanitize_name(domain_name)})")
    lines.append("  (:objects")
    obj_lines = obj_lines or ["    "]
    obj_lines[-1] += ")"
    lines.extend(obj_lines)
    lines.append("  (:init")
    init_lines = init_lines or ["    "]
    init_lines[-1] += ")"
    lines.extend(init_lines)
    lines.append(f"  (:goal (and {' '.join(goal_parts)}))" if goal_parts
                 else "  (:goal (and))")
    lines.append(")")
    text = "\n".join(lines) + "\n"
    if not text.isascii():
        raise ConfigurationError("emitted problem contains non-ASCII characters")
    return text


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParsedDomain:
    """A domain read back from text: name, type tree, and a skeleton model.

    Actions become operators attached to stub zero-parameter skills named
    by stripping a trailing ``_<digits>`` suffix, so ``cut_0`` and
    ``cut_1`` group under the same skill.
    """

    name: str
    hierarchy: TypeHierarchy
    model: Model


def _tokenize(text: str) -> list[str]:
    out: list[str] = []
    for line in text.splitlines():
        code = line.split(";", 1)[0]
        code = code.replace("(", " ( ").replace(")", " ) ")
        out.extend(code.split())
    return out


def _read_sexpr(tokens: list[str], pos: int) -> tuple[object, int]:
    if pos >= len(tokens):
        raise ConfigurationError("unexpected end of PDDL text")
    tok = tokens[pos]
    if tok == "(":
        items: list[object] = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _read_sexpr(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise ConfigurationError("unbalanced parenthesis in PDDL text")
        return items, pos + 1
    if tok == ")":
        raise ConfigurationError("unexpected ')' in PDDL text")
    return tok, pos + 1


def _parse_typed_list(
    items: Sequence[object],
) -> list[tuple[str, tuple[str, ...]]]:
    """A PDDL typed list: names, '-', then a type or (either ...)."""
    out: list[tuple[str, tuple[str, ...]]] = []
    pending: list[str] = []
    i = 0
    while i < len(items):
        item = items[i]
        if item == "-":
            if i + 1 >= len(items):
                raise ConfigurationError("dangling '-' in typed list")
            ann = items[i + 1]
            if isinstance(ann, list):
                if not ann or ann[0] != "either":
                    raise ConfigurationError(f"bad type annotation {ann!r}")
                types = tuple(str(t) for t in ann[1:])
            else:
                types = (str(ann),)
            for name in pending:
                out.append((name, types))
            pending = []
            i += 2
        else:
            if not isinstance(item, str):
                raise ConfigurationError(f"unexpected form {item!r} in typed list")
            pending.append(item)
            i += 1
    for name in pending:
        out.append((name, (ROOT_TYPE,)))
    return out


def _section(items: Sequence[object], key: str) -> list[object] | None:
    for item in items:
        if isinstance(item, list) and item and str(item[0]).lower() == key:
            return list(item[1:])
    return None


_ACTION_SUFFIX = re.compile(r"_(\d+)$")


def skill_name_of(action_name: str) -> str:
    return _ACTION_SUFFIX.sub("", action_name)


def _parse_literals(
    form: object,
) -> tuple[list[tuple[str, tuple[str, ...], bool]], list[tuple[str, str]]]:
    """A precondition/effect conjunction: (pred args), (not ...), (not (= ..))."""
    if not isinstance(form, list):
        raise ConfigurationError(f"expected a formula, got {form!r}")
    items = form[1:] if form and form[0] == "and" else [form]
    lits: list[tuple[str, tuple[str, ...], bool]] = []
    ineqs: list[tuple[str, str]] = []
    for item in items:
        if not isinstance(item, list) or not item:
            raise ConfigurationError(f"bad literal {item!r}")
        if item[0] == "not":
            if len(item) != 2 or not isinstance(item[1], list) or not item[1]:
                raise ConfigurationError(f"bad negation {item!r}")
            inner = item[1]
            if inner[0] == "=":
                if len(inner) != 3:
                    raise ConfigurationError(f"bad inequality {item!r}")
                a, b = str(inner[1]), str(inner[2])
                ineqs.append((min(a, b), max(a, b)))
            else:
                lits.append((str(inner[0]), tuple(str(x) for x in inner[1:]), False))
        elif item[0] == "=":
            raise ConfigurationError("positive equality atoms are not supported")
        else:
            lits.append((str(item[0]), tuple(str(x) for x in item[1:]), True))
    return lits, ineqs


def parse_domain(text: str) -> ParsedDomain:
    tokens = _tokenize(text)
    form, pos = _read_sexpr(tokens, 0)
    if pos != len(tokens):
        raise ConfigurationError("trailing tokens after domain definition")
    if not isinstance(form, list) or not form or form[0] != "define":
        raise ConfigurationError("not a PDDL define form")
    head = form[1]
    if not isinstance(head, list) or len(head) != 2 or head[0] != "domain":
        raise ConfigurationError("missing (domain <name>)")
    name = str(head[1])
    sections = form[2:]

    types_items = _section(sections, ":types") or []
    typed = _parse_typed_list(types_items)
    type_names: set[str] = set()
    edges: set[tuple[str, str]] = set()
    for t, parents in typed:
        type_names.add(t)
        for p in parents:
            if p != ROOT_TYPE:
                type_names.add(p)
                edges.add((t, p))
    hierarchy = TypeHierarchy(types=type_names, edges=edges)

    pred_items = _section(sections, ":predicates") or []
    predicates: dict[str, Predicate] = {}
    for item in pred_items:
        if not isinstance(item, list) or not item:
            raise ConfigurationError(f"bad predicate declaration {item!r}")
        pname = str(item[0])
        params = _parse_typed_list(item[1:])
        for _, types in params:
            if len(types) != 1:
                raise ConfigurationError(
                    f"predicate {pname} uses an either type; not supported"
                )
        if pname in predicates:
            raise ConfigurationError(f"duplicate predicate {pname!r}")
        predicates[pname] = Predicate(pname, tuple(t[1][0] for t in params))

    skills: dict[str, Skill] = {}
    operators: list[Operator] = []
    for item in sections:
        if not (isinstance(item, list) and item and str(item[0]).lower() == ":action"):
            continue
        if len(item) < 2:
            raise ConfigurationError("action without a name")
        aname = str(item[1])
        fields: dict[str, object] = {}
        i = 2
        while i < len(item):
            kw = str(item[i]).lower()
            if not kw.startswith(":") or i + 1 >= len(item):
                raise ConfigurationError(f"malformed action {aname!r}")
            fields[kw] = item[i + 1]
            i += 2
        raw_params = fields.get(":parameters", [])
        if not isinstance(raw_params, list):
            raise ConfigurationError(f"{aname}: bad :parameters")
        variables: dict[str, Variable] = {}
        order: list[Variable] = []
        for vname, vtypes in _parse_typed_list(raw_params):
            if not vname.startswith("?"):
                raise ConfigurationError(f"{aname}: parameter {vname!r} not a variable")
            if vname in variables:
                raise ConfigurationError(f"{aname}: duplicate parameter {vname!r}")
            v = Variable(vname, frozenset(vtypes))
            variables[vname] = v
            order.append(v)

        def lift(pred: str, args: tuple[str, ...]) -> LiftedAtom:
            p = predicates.get(pred)
            if p is None:
                raise ConfigurationError(f"{aname}: unknown predicate {pred!r}")
            vs = []
            for a in args:
                if a not in variables:
                    raise ConfigurationError(f"{aname}: undeclared variable {a!r}")
                vs.append(variables[a])
            return LiftedAtom(predicate=p, variables=tuple(vs))

        pre_lits, ineqs = _parse_literals(fields.get(":precondition", ["and"]))
        eff_lits, eff_ineqs = _parse_literals(fields.get(":effect", ["and"]))
        if eff_ineqs:
            raise ConfigurationError(f"{aname}: inequality in effect")
        adds = frozenset(lift(p, a) for p, a, pos_ in eff_lits if pos_)
        dels = frozenset(lift(p, a) for p, a, pos_ in eff_lits if not pos_)
        sname = skill_name_of(aname)
        skill = skills.setdefault(sname, Skill(sname, ()))
        operators.append(
            Operator(
                name=aname,
                skill=skill,
                parameters=tuple(order),
                preconditions=frozenset(
                    Literal(lift(p, a), positive=pos_) for p, a, pos_ in pre_lits
                ),
                inequalities=frozenset(ineqs),
                add_effects=adds,
                delete_effects=dels,
                provenance=_EXTERNAL_PROVENANCE,
            )
        )

    model = Model(
        predicates=frozenset(predicates.values()), operators=tuple(operators)
    )
    return ParsedDomain(name=name, hierarchy=hierarchy, model=model)
