"""Core RDF model: terms, triples, graphs, prefix maps, and connectivity."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
OTTR_NS = "http://ns.ottr.xyz/0.4/"

RDF_TYPE = RDF_NS + "type"
RDF_LANGSTRING = RDF_NS + "langString"
RDFS_LITERAL = RDFS_NS + "Literal"
XSD_STRING = XSD_NS + "string"
OTTR_TRIPLE = OTTR_NS + "Triple"
OTTR_IRI = OTTR_NS + "IRI"
OTTR_TERM = OTTR_NS + "Term"

# Shared vocabulary namespaces are ignored when judging whether a growing
# graph is connected; otherwise e.g. owl:Class would link everything.
DEFAULT_EXCLUDED_NAMESPACES = (RDF_NS, RDFS_NS, OWL_NS, XSD_NS)

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")


def is_absolute_iri(value: str) -> bool:
    return bool(_SCHEME_RE.match(value))


@dataclass(frozen=True)
class Iri:
    value: str

    def __post_init__(self):
        if not is_absolute_iri(self.value):
            raise ValueError(f"not an absolute IRI: {self.value!r}")


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING
    language: str | None = None

    def __post_init__(self):
        # A language tag forces the rdf:langString datatype.
        if self.language is not None:
            object.__setattr__(self, "datatype", RDF_LANGSTRING)


@dataclass(frozen=True)
class Blank:
    label: str


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class NoneTerm:
    """The explicit 'no value' marker usable as an argument."""


@dataclass(frozen=True)
class ListTerm:
    items: tuple["Term", ...]

    def __init__(self, items):
        object.__setattr__(self, "items", tuple(items))


Term = Iri | Literal | Blank | Variable | NoneTerm | ListTerm

NONE = NoneTerm()


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if not isinstance(self.subject, (Iri, Blank)):
            raise ValueError(f"triple subject must be an IRI or blank node, got {self.subject}")
        if not isinstance(self.predicate, Iri):
            raise ValueError(f"triple predicate must be an IRI, got {self.predicate}")
        if not isinstance(self.object, (Iri, Blank, Literal)):
            raise ValueError(f"triple object must be an IRI, blank node or literal, got {self.object}")


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def escape_literal(text: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in text)


def term_to_ntriples(term: Term) -> str:
    """Render a ground term in N-Triples syntax."""
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, Blank):
        return f"_:{term.label}"
    if isinstance(term, Literal):
        body = f'"{escape_literal(term.lexical)}"'
        if term.language is not None:
            return f"{body}@{term.language}"
        if term.datatype == XSD_STRING:
            return body
        return f"{body}^^<{term.datatype}>"
    raise ValueError(f"not a ground RDF term: {term}")


def term_sort_key(term: Term) -> str:
    """A total, deterministic ordering key over all term variants."""
    if isinstance(term, Iri):
        return f"0<{term.value}>"
    if isinstance(term, Blank):
        return f"1_:{term.label}"
    if isinstance(term, Literal):
        return f'2"{term.lexical}"^^{term.datatype}@{term.language or ""}'
    if isinstance(term, Variable):
        return f"3?{term.name}"
    if isinstance(term, NoneTerm):
        return "4none"
    return "5(" + ",".join(term_sort_key(t) for t in term.items) + ")"


def triple_sort_key(t: Triple) -> tuple[str, str, str]:
    return (term_sort_key(t.subject), term_sort_key(t.predicate), term_sort_key(t.object))


@dataclass(frozen=True)
class TripleGraph:
    """An immutable set of ground triples."""

    triples: frozenset[Triple] = field(default_factory=frozenset)

    def __init__(self, triples=()):
        object.__setattr__(self, "triples", frozenset(triples))

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self.triples

    def union(self, *others: "TripleGraph") -> "TripleGraph":
        merged = set(self.triples)
        for g in others:
            merged |= g.triples
        return TripleGraph(merged)

    def __or__(self, other: "TripleGraph") -> "TripleGraph":
        return self.union(other)

    def sorted_triples(self) -> list[Triple]:
        return sorted(self.triples, key=triple_sort_key)

    def to_ntriples(self) -> str:
        lines = sorted(
            f"{term_to_ntriples(t.subject)} {term_to_ntriples(t.predicate)} {term_to_ntriples(t.object)} ."
            for t in self.triples
        )
        return "\n".join(lines) + ("\n" if lines else "")


class UnboundPrefix(KeyError):
    def __init__(self, label: str):
        super().__init__(label)
        self.label = label

    def __str__(self) -> str:
        return f"unbound prefix {self.label!r}"


class PrefixConflict(ValueError):
    pass


class PrefixMap:
    """Label-to-namespace bindings. Re-binding a label to a new namespace is an error."""

    def __init__(self, bindings: dict[str, str] | None = None):
        self._bindings: dict[str, str] = {}
        for label, ns in (bindings or {}).items():
            self.bind(label, ns)

    def bind(self, label: str, namespace: str) -> None:
        existing = self._bindings.get(label)
        if existing is not None and existing != namespace:
            raise PrefixConflict(f"prefix {label!r} already bound to <{existing}>")
        self._bindings[label] = namespace

    def namespace(self, label: str) -> str:
        try:
            return self._bindings[label]
        except KeyError:
            raise UnboundPrefix(label) from None

    def __contains__(self, label: str) -> bool:
        return label in self._bindings

    def __eq__(self, other) -> bool:
        return isinstance(other, PrefixMap) and self._bindings == other._bindings

    def __len__(self) -> int:
        return len(self._bindings)

    def items(self) -> list[tuple[str, str]]:
        return sorted(self._bindings.items())

    def copy(self) -> "PrefixMap":
        return PrefixMap(dict(self._bindings))

    def shrink(self, iri: str) -> tuple[str, str] | None:
        """Return (label, local) for the longest matching namespace, or None."""
        best: tuple[str, str] | None = None
        for label, ns in sorted(self._bindings.items()):
            if iri.startswith(ns) and (best is None or len(ns) > len(self._bindings[best[0]])):
                best = (label, iri[len(ns):])
        return best


def resolve(prefixed_name: str, prefixes: PrefixMap) -> Iri:
    """Expand `label:local` against a prefix map."""
    label, sep, local = prefixed_name.partition(":")
    if not sep:
        raise ValueError(f"not a prefixed name: {prefixed_name!r}")
    return Iri(prefixes.namespace(label) + local)


def compact_iri(iri: Iri, prefixes: PrefixMap | None) -> str:
    """Prefixed-name rendering where a binding exists, else `<iri>`."""
    if prefixes is not None:
        hit = prefixes.shrink(iri.value)
        if hit is not None and _is_local_name(hit[1]):
            return f"{hit[0]}:{hit[1]}"
    return f"<{iri.value}>"


_LOCAL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_-]*$")


def _is_local_name(text: str) -> bool:
    return bool(_LOCAL_RE.match(text))


class _UnionFind:
    def __init__(self):
        self.parent: dict[Term, Term] = {}

    def add(self, x: Term) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: Term) -> Term:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: Term, b: Term) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def connected_components(
    graph: TripleGraph,
    excluded_namespaces: tuple[str, ...] = DEFAULT_EXCLUDED_NAMESPACES,
) -> list[frozenset[Term]]:
    """Partition the graph's entity nodes into undirected connected components.

    Nodes are the IRIs and blank nodes in subject or object position, minus
    IRIs under an excluded namespace. Literals never act as nodes, so triples
    sharing only a literal value do not connect their subjects.
    """

    def is_node(term: Term) -> bool:
        if isinstance(term, Blank):
            return True
        if isinstance(term, Iri):
            return not any(term.value.startswith(ns) for ns in excluded_namespaces)
        return False

    uf = _UnionFind()
    for t in graph:
        s_ok, o_ok = is_node(t.subject), is_node(t.object)
        if s_ok:
            uf.add(t.subject)
        if o_ok:
            uf.add(t.object)
        if s_ok and o_ok:
            uf.union(t.subject, t.object)

    groups: dict[Term, set[Term]] = {}
    for node in uf.parent:
        groups.setdefault(uf.find(node), set()).add(node)
    return sorted(
        (frozenset(g) for g in groups.values()),
        key=lambda g: min(term_sort_key(n) for n in g),
    )


def component_count(
    graph: TripleGraph,
    excluded_namespaces: tuple[str, ...] = DEFAULT_EXCLUDED_NAMESPACES,
) -> int:
    return len(connected_components(graph, excluded_namespaces))
