"""Library documentation: user-facing classification, call-hierarchy
rendering, and a Markdown overview with per-template parameter tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import yaml

from .stottr import Library, ParseFailure, parse_term_string, ptype_to_stottr, term_to_stottr
from .terms import Iri, compact_iri, is_absolute_iri
from .typecheck import dependency_graph

if TYPE_CHECKING:
    from .workflow import Workflow


@dataclass(frozen=True)
class ParamDoc:
    description: str = ""
    example: str = ""


@dataclass
class TemplateDoc:
    iri: str
    description: str = ""
    limitations: str = ""
    params: dict[str, ParamDoc] = field(default_factory=dict)
    changelog: tuple[str, ...] = ()


class DocsFormatError(ValueError):
    pass


def load_template_docs(text: str, library: Library) -> dict[str, TemplateDoc]:
    """Read the sidecar documentation file: a mapping keyed by template name."""
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise DocsFormatError("documentation file must be a mapping keyed by template IRI")
    docs: dict[str, TemplateDoc] = {}
    for key, entry in data.items():
        iri = _resolve_doc_key(str(key), library)
        entry = entry or {}
        params = {
            str(name): ParamDoc(str(p.get("description", "")), str(p.get("example", "")))
            for name, p in (entry.get("params", {}) or {}).items()
        }
        docs[iri] = TemplateDoc(
            iri=iri,
            description=str(entry.get("description", "")),
            limitations=str(entry.get("limitations", "")),
            params=params,
            changelog=tuple(str(c) for c in entry.get("changelog", []) or []),
        )
    return docs


def _resolve_doc_key(key: str, library: Library) -> str:
    try:
        term = parse_term_string(key, library.prefixes)
        if isinstance(term, Iri):
            return term.value
    except ParseFailure:
        pass
    if "://" in key and is_absolute_iri(key):
        return key
    raise DocsFormatError(f"documentation key is not a template IRI: {key!r}")


def classify_user_facing(library: Library) -> dict[str, bool]:
    """A template is user-facing iff no other template's body instantiates it."""
    referenced: set[str] = set()
    for caller, callee in dependency_graph(library):
        if caller.value != callee.value:
            referenced.add(callee.value)
    return {iri: iri not in referenced for iri in library.templates}


def render_hierarchy(library: Library, format: str = "text") -> str:
    """Deterministic rendering of the template call graph."""
    edges = [
        (compact_iri(a, library.prefixes), compact_iri(b, library.prefixes))
        for a, b in dependency_graph(library)
    ]
    edges.sort()
    if format == "text":
        return "\n".join(f"{a} -> {b}" for a, b in edges) + ("\n" if edges else "")
    if format != "dot":
        raise ValueError(f"unknown hierarchy format {format!r}")
    names = sorted(
        {compact_iri(t.iri, library.prefixes) for t in library.templates.values()}
        | {n for edge in edges for n in edge}
    )
    lines = ["digraph templates {"]
    lines.extend(f'  "{name}";' for name in names)
    lines.extend(f'  "{a}" -> "{b}";' for a, b in edges)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _param_table(tdef, doc: TemplateDoc | None, prefixes) -> list[str]:
    rows = [
        "| Parameter | Type | Optional | Default | Description | Example |",
        "|---|---|---|---|---|---|",
    ]
    for param in tdef.parameters:
        pdoc = (doc.params.get(param.name) if doc else None) or ParamDoc()
        default = term_to_stottr(param.default, prefixes) if param.default is not None else "-"
        rows.append(
            f"| ?{param.name} | {ptype_to_stottr(param.ptype, prefixes)} "
            f"| {'yes' if param.optional else 'no'} | {default} "
            f"| {pdoc.description or '-'} | {pdoc.example or '-'} |"
        )
    return rows


def render_library_doc(
    library: Library,
    docs: dict[str, TemplateDoc] | None = None,
    workflows: list["Workflow"] | None = None,
) -> str:
    """One Markdown document: inventory (user-facing first), call hierarchy,
    per-template parameter tables, and workflow step listings."""
    docs = docs or {}
    workflows = workflows or []
    user_facing = classify_user_facing(library)
    prefixes = library.prefixes

    def inventory_order(tdef) -> tuple[int, str]:
        return (0 if user_facing[tdef.iri.value] else 1, tdef.iri.value)

    ordered = sorted(library.templates.values(), key=inventory_order)

    out: list[str] = ["# Template Library", ""]

    out += ["## Templates", "", "| Template | Role | Parameters | Documented |", "|---|---|---|---|"]
    for tdef in ordered:
        role = "user-facing" if user_facing[tdef.iri.value] else "internal"
        out.append(
            f"| {compact_iri(tdef.iri, prefixes)} | {role} | {len(tdef.parameters)} "
            f"| {'yes' if tdef.iri.value in docs else 'no'} |"
        )
    out.append("")

    out += ["## Call Hierarchy", "", "```"]
    hierarchy = render_hierarchy(library, "text").rstrip("\n")
    out.append(hierarchy if hierarchy else "(no templates)")
    out += ["```", ""]

    out += ["## Template Details", ""]
    for tdef in ordered:
        name = compact_iri(tdef.iri, prefixes)
        out.append(f"### {name}")
        out.append("")
        role = "User-facing template." if user_facing[tdef.iri.value] else "Internal sub-template."
        out.append(role)
        out.append("")
        doc = docs.get(tdef.iri.value)
        if doc is None:
            out.append("*undocumented*")
            out.append("")
        else:
            if doc.description:
                out.append(doc.description)
                out.append("")
            if doc.limitations:
                out.append(f"**Limitations:** {doc.limitations}")
                out.append("")
        if tdef.parameters:
            out.extend(_param_table(tdef, doc, prefixes))
        else:
            out.append("No parameters.")
        out.append("")
        if tdef.body is None:
            out.append("Signature only; no body defined yet.")
            out.append("")
        if doc is not None and doc.changelog:
            out.append("**Change log:**")
            out.extend(f"- {entry}" for entry in doc.changelog)
            out.append("")

    out += ["## Workflows", ""]
    if not workflows:
        out.append("none defined")
        out.append("")
    else:
        for wf in workflows:
            out.append(f"### {wf.name}")
            out.append("")
            for i, step in enumerate(wf.steps, start=1):
                after = f" (after: {', '.join(step.after)})" if step.after else ""
                out.append(
                    f"{i}. {step.id}: {compact_iri(step.template, prefixes)}{after}"
                )
            out.append("")

    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n"
