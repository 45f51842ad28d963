"""Recursive expansion of template instances into ground triple graphs.

Expansion of one instance proceeds as:

1. every `none` argument whose parameter declares a default is replaced by
   that default;
2. an instance carrying a list-expansion mode is unfolded over its
   list-valued arguments (cross product, zipMin truncating, zipMax padding
   with `none`) and each unfolded instance expands normally;
3. an instance that still passes `none` to a non-optional parameter is
   discarded; only that instance, not the surrounding expansion;
4. `ottr:Triple` emits its three arguments as one triple; any other template
   has its arguments substituted through its body, with body blank nodes
   renamed to `_:b{counter}_{label}` so repeated runs are byte-identical.

The counter is the index of the top-level instance, so results are
order-independent and reproducible under concurrent expansion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .stottr import Instance, Library, TemplateDefinition
from .terms import (
    NONE,
    OTTR_TRIPLE,
    Blank,
    ListTerm,
    Literal,
    NoneTerm,
    Term,
    Triple,
    TripleGraph,
    Variable,
    triple_sort_key,
)


class ExpansionError(Exception):
    def __init__(self, message: str, template: str | None = None):
        super().__init__(message)
        self.template = template


class UnknownTemplateError(ExpansionError):
    pass


class SignatureOnlyTemplateError(ExpansionError):
    pass


class ArityMismatchError(ExpansionError):
    pass


class DepthExceededError(ExpansionError):
    pass


class InvalidTripleError(ExpansionError):
    pass


class ExpandAllError(ExpansionError):
    """Aggregates the per-instance failures of a batch expansion."""

    def __init__(self, failures: list[tuple[int, ExpansionError]]):
        lines = [f"instance {i}: {err}" for i, err in failures]
        super().__init__("; ".join(lines))
        self.failures = failures


@dataclass
class ExpansionContext:
    library: Library
    instance_counter: int = 0
    max_depth: int = 64


def _apply_defaults(args: tuple[Term, ...], tdef: TemplateDefinition) -> tuple[Term, ...]:
    return tuple(
        param.default if isinstance(arg, NoneTerm) and param.default is not None else arg
        for arg, param in zip(args, tdef.parameters)
    )


def _substitute(term: Term, env: dict[str, Term], counter: int) -> Term:
    # Blank nodes written in a body are freshened; argument values pass
    # through untouched.
    if isinstance(term, Variable):
        return env[term.name]
    if isinstance(term, Blank):
        return Blank(f"b{counter}_{term.label}")
    if isinstance(term, ListTerm):
        return ListTerm(_substitute(t, env, counter) for t in term.items)
    return term


def _unfold_mode(inst: Instance) -> list[Instance]:
    marked = [i for i, arg in enumerate(inst.arguments) if isinstance(arg, ListTerm)]
    if not marked:
        return [Instance(inst.template, inst.arguments, None)]
    lists: list[tuple[Term, ...]] = [inst.arguments[i].items for i in marked]  # type: ignore[union-attr]

    if inst.expansion == "cross":
        combos = list(itertools.product(*lists))
    elif inst.expansion == "zipMin":
        combos = list(zip(*lists))
    else:  # zipMax
        combos = list(itertools.zip_longest(*lists, fillvalue=NONE))

    out = []
    for combo in combos:
        args = list(inst.arguments)
        for pos, value in zip(marked, combo):
            args[pos] = value
        out.append(Instance(inst.template, args, None))
    return out


def _emit_triple(args: tuple[Term, ...], out: set[Triple]) -> None:
    s, p, o = args
    for term in args:
        if isinstance(term, Variable):
            raise InvalidTripleError(f"unbound variable ?{term.name} reached ottr:Triple", OTTR_TRIPLE)
    try:
        out.add(Triple(s, p, o))
    except ValueError as exc:
        raise InvalidTripleError(str(exc), OTTR_TRIPLE) from None


def _expand(inst: Instance, ctx: ExpansionContext, depth: int, out: set[Triple]) -> None:
    if depth > ctx.max_depth:
        raise DepthExceededError(f"expansion depth exceeded {ctx.max_depth}", inst.template.value)

    tdef = ctx.library.lookup(inst.template.value)
    if tdef is None:
        raise UnknownTemplateError(f"unknown template {inst.template.value}", inst.template.value)
    if len(inst.arguments) != tdef.arity:
        raise ArityMismatchError(
            f"{tdef.iri.value} expects {tdef.arity} arguments, got {len(inst.arguments)}",
            tdef.iri.value,
        )

    args = _apply_defaults(inst.arguments, tdef)

    if inst.expansion is not None:
        for sub in _unfold_mode(Instance(inst.template, args, inst.expansion)):
            _expand(sub, ctx, depth + 1, out)
        return

    # A none value on a non-optional parameter discards this instance only.
    for arg, param in zip(args, tdef.parameters):
        if isinstance(arg, NoneTerm) and not param.optional:
            return

    if tdef.iri.value == OTTR_TRIPLE:
        _emit_triple(args, out)
        return

    if tdef.body is None:
        raise SignatureOnlyTemplateError(
            f"{tdef.iri.value} has no body and cannot be expanded", tdef.iri.value,
        )

    env = {param.name: arg for param, arg in zip(tdef.parameters, args)}
    for body_inst in tdef.body:
        new_args = tuple(_substitute(a, env, ctx.instance_counter) for a in body_inst.arguments)
        _expand(Instance(body_inst.template, new_args, body_inst.expansion), ctx, depth + 1, out)


def expand_instance(inst: Instance, ctx: ExpansionContext) -> TripleGraph:
    """Expand one instance into its ground triple graph."""
    out: set[Triple] = set()
    _expand(inst, ctx, 0, out)
    return TripleGraph(out)


def expand_all(instances: list[Instance], ctx: ExpansionContext) -> TripleGraph:
    """Union of the per-instance graphs; instance i expands with counter
    `ctx.instance_counter + i` so blank labels do not depend on evaluation
    order."""
    triples: set[Triple] = set()
    failures: list[tuple[int, ExpansionError]] = []
    for i, inst in enumerate(instances):
        sub = ExpansionContext(ctx.library, ctx.instance_counter + i, ctx.max_depth)
        try:
            triples |= expand_instance(inst, sub).triples
        except ExpansionError as exc:
            failures.append((i, exc))
    if failures:
        raise ExpandAllError(failures)
    return TripleGraph(triples)


def provenance_expand(
    instances: list[Instance], ctx: ExpansionContext
) -> list[tuple[Triple, frozenset[int]]]:
    """Each distinct output triple mapped to every top-level instance index
    that produces it. Projecting to triples equals expand_all."""
    producers: dict[Triple, set[int]] = {}
    failures: list[tuple[int, ExpansionError]] = []
    for i, inst in enumerate(instances):
        sub = ExpansionContext(ctx.library, ctx.instance_counter + i, ctx.max_depth)
        try:
            graph = expand_instance(inst, sub)
        except ExpansionError as exc:
            failures.append((i, exc))
            continue
        for t in graph:
            producers.setdefault(t, set()).add(i)
    if failures:
        raise ExpandAllError(failures)
    return sorted(
        ((t, frozenset(idx)) for t, idx in producers.items()),
        key=lambda pair: triple_sort_key(pair[0]),
    )


def filter_published(
    instances: list[Instance],
    library: Library,
    status_param: str = "publicationStatus",
    published_value: str = "published",
) -> list[Instance]:
    """Drop instances whose publication-status argument is a literal other
    than the published marker. Templates without the parameter pass through."""
    kept = []
    for inst in instances:
        tdef = library.lookup(inst.template.value)
        keep = True
        if tdef is not None and len(inst.arguments) == tdef.arity:
            for param, arg in zip(tdef.parameters, inst.arguments):
                if param.name == status_param:
                    if isinstance(arg, Literal) and arg.lexical != published_value:
                        keep = False
                    break
        if keep:
            kept.append(inst)
    return kept
