"""Static validation of template libraries: references, arity, types,
defaults, modifiers, and acyclicity of the template dependency graph."""

from __future__ import annotations

from dataclasses import dataclass

from .stottr import (
    Instance,
    IriType,
    Library,
    ListType,
    LiteralType,
    ParamType,
    TemplateDefinition,
    TopType,
)
from .terms import (
    RDFS_LITERAL,
    Blank,
    Iri,
    ListTerm,
    Literal,
    NoneTerm,
    Term,
    Variable,
    compact_iri,
)

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    template: Iri | None
    message: str

    def render(self, library: Library | None = None) -> str:
        prefixes = library.prefixes if library is not None else None
        where = compact_iri(self.template, prefixes) if self.template else "-"
        return f"{self.severity} {self.code} {where}: {self.message}"


def is_subtype(sub: ParamType, sup: ParamType) -> bool:
    """Minimal lattice: Top above everything, rdfs:Literal above all literal
    datatypes, lists covariant in their element type."""
    if isinstance(sup, TopType):
        return True
    if sub == sup:
        return True
    if isinstance(sub, LiteralType) and isinstance(sup, LiteralType):
        return sup.datatype == RDFS_LITERAL
    if isinstance(sub, ListType) and isinstance(sup, ListType):
        return is_subtype(sub.element, sup.element)
    return False


def term_matches_type(term: Term, ptype: ParamType, var_types: dict[str, ParamType]) -> bool:
    if isinstance(term, Variable):
        return is_subtype(var_types.get(term.name, TopType()), ptype)
    if isinstance(term, NoneTerm):
        return True
    if isinstance(ptype, TopType):
        return True
    if isinstance(term, (Iri, Blank)):
        return isinstance(ptype, IriType)
    if isinstance(term, Literal):
        return isinstance(ptype, LiteralType) and ptype.datatype in (term.datatype, RDFS_LITERAL)
    if isinstance(term, ListTerm):
        return isinstance(ptype, ListType) and all(
            term_matches_type(item, ptype.element, var_types) for item in term.items
        )
    return False


def _is_expansion_marked(arg: Term, var_types: dict[str, ParamType]) -> bool:
    if isinstance(arg, ListTerm):
        return True
    return isinstance(arg, Variable) and isinstance(var_types.get(arg.name), ListType)


def _type_name(ptype: ParamType) -> str:
    if isinstance(ptype, TopType):
        return "any"
    if isinstance(ptype, IriType):
        return "IRI"
    if isinstance(ptype, LiteralType):
        return f"literal<{ptype.datatype}>"
    return f"List<{_type_name(ptype.element)}>"


def _check_instance_args(
    caller: TemplateDefinition,
    inst: Instance,
    callee: TemplateDefinition,
    var_types: dict[str, ParamType],
    out: list[Diagnostic],
) -> None:
    blank_capable = {p.name for p in caller.parameters if not p.nonblank}
    for arg, param in zip(inst.arguments, callee.parameters):
        marked = inst.expansion is not None and _is_expansion_marked(arg, var_types)
        if marked:
            # The expansion mode feeds the list's elements to the parameter.
            if isinstance(arg, ListTerm):
                ok = all(term_matches_type(item, param.ptype, var_types) for item in arg.items)
            else:
                element = var_types[arg.name].element  # type: ignore[union-attr]
                ok = is_subtype(element, param.ptype)
        else:
            ok = term_matches_type(arg, param.ptype, var_types)
        if not ok:
            out.append(Diagnostic(
                ERROR, "E_TYPE", caller.iri,
                f"argument for ?{param.name} of {callee.iri.value} is not compatible "
                f"with {_type_name(param.ptype)}",
            ))
        if isinstance(arg, NoneTerm) and not param.optional:
            out.append(Diagnostic(
                ERROR, "E_NONE_NONOPTIONAL", caller.iri,
                f"none passed for non-optional ?{param.name} of {callee.iri.value}",
            ))
        if param.nonblank:
            # The non-blank flag propagates: a variable that may hold a blank
            # node cannot feed a non-blank position, and a marked list feeds
            # its elements to the parameter.
            if isinstance(arg, Blank):
                out.append(Diagnostic(
                    ERROR, "E_BLANK_NONBLANK", caller.iri,
                    f"blank node passed for non-blank ?{param.name} of {callee.iri.value}",
                ))
            elif isinstance(arg, Variable) and arg.name in blank_capable:
                out.append(Diagnostic(
                    ERROR, "E_BLANK_NONBLANK", caller.iri,
                    f"?{arg.name} may hold a blank node but ?{param.name} of "
                    f"{callee.iri.value} is non-blank",
                ))
            elif marked and isinstance(arg, ListTerm) and any(
                isinstance(item, Blank) for item in arg.items
            ):
                out.append(Diagnostic(
                    ERROR, "E_BLANK_NONBLANK", caller.iri,
                    f"list expanded into non-blank ?{param.name} of "
                    f"{callee.iri.value} contains a blank node",
                ))


def _used_variables(term: Term, acc: set[str]) -> None:
    if isinstance(term, Variable):
        acc.add(term.name)
    elif isinstance(term, ListTerm):
        for item in term.items:
            _used_variables(item, acc)


def dependency_graph(library: Library) -> list[tuple[Iri, Iri]]:
    """Distinct (caller, callee) edges over template IRIs; ottr:Triple appears
    as a callee node."""
    edges: set[tuple[Iri, Iri]] = set()
    for tdef in library.templates.values():
        for inst in tdef.body or ():
            edges.add((tdef.iri, inst.template))
    return sorted(edges, key=lambda e: (e[0].value, e[1].value))


def _find_cycles(library: Library) -> list[list[str]]:
    # Iterative Tarjan SCC over the template call graph.
    graph: dict[str, list[str]] = {
        iri: sorted({i.template.value for i in (tdef.body or ()) if i.template.value in library.templates})
        for iri, tdef in library.templates.items()
    }
    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    sccs: list[list[str]] = []

    def strongconnect(root: str) -> None:
        work = [(root, iter(graph[root]))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = lowlink[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(graph[succ])))
                    advanced = True
                    break
                if succ in on_stack:
                    lowlink[node] = min(lowlink[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                sccs.append(component)

    for iri in sorted(graph):
        if iri not in index:
            strongconnect(iri)

    cycles = []
    for scc in sccs:
        if len(scc) > 1 or scc[0] in graph.get(scc[0], []):
            cycles.append(sorted(scc))
    return sorted(cycles)


def check_library(library: Library) -> list[Diagnostic]:
    """All diagnostics for a parsed library; empty means well-typed."""
    out: list[Diagnostic] = []

    for tdef in library.templates.values():
        var_types = tdef.param_types()

        seen: set[str] = set()
        for param in tdef.parameters:
            if param.name in seen:
                out.append(Diagnostic(
                    ERROR, "E_DUP_PARAM", tdef.iri, f"duplicate parameter ?{param.name}",
                ))
            seen.add(param.name)
            if param.default is not None and not term_matches_type(param.default, param.ptype, {}):
                out.append(Diagnostic(
                    ERROR, "E_DEFAULT_TYPE", tdef.iri,
                    f"default for ?{param.name} is not compatible with {_type_name(param.ptype)}",
                ))

        if tdef.body is None:
            continue

        used: set[str] = set()
        for inst in tdef.body:
            for arg in inst.arguments:
                _used_variables(arg, used)
            callee = library.lookup(inst.template.value)
            if callee is None:
                out.append(Diagnostic(
                    ERROR, "E_UNKNOWN_TEMPLATE", tdef.iri,
                    f"reference to unknown template {inst.template.value}",
                ))
                continue
            if len(inst.arguments) != callee.arity:
                out.append(Diagnostic(
                    ERROR, "E_ARITY", tdef.iri,
                    f"{callee.iri.value} expects {callee.arity} arguments, got {len(inst.arguments)}",
                ))
                continue
            _check_instance_args(tdef, inst, callee, var_types, out)

        for param in tdef.parameters:
            if param.name not in used:
                out.append(Diagnostic(
                    WARNING, "W_UNUSED_PARAM", tdef.iri, f"parameter ?{param.name} is never used",
                ))

    for cycle in _find_cycles(library):
        loop = " -> ".join(cycle + [cycle[0]])
        out.append(Diagnostic(
            ERROR, "E_CYCLE", Iri(cycle[0]), f"template dependency cycle: {loop}",
        ))

    return sorted(out, key=lambda d: (d.template.value if d.template else "", d.code, d.message))


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity == ERROR for d in diagnostics)
