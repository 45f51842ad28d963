"""ottrkit: a toolchain for OTTR-style ontology templates."""

from .expand import (
    ExpansionContext,
    ExpansionError,
    expand_all,
    expand_instance,
    provenance_expand,
)
from .stottr import (
    Instance,
    Library,
    Parameter,
    ParseDiagnostic,
    ParseFailure,
    TemplateDefinition,
    parse_instances,
    parse_library,
    serialize_instances,
    serialize_library,
)
from .terms import (
    Blank,
    Iri,
    ListTerm,
    Literal,
    NONE,
    PrefixMap,
    Term,
    Triple,
    TripleGraph,
    Variable,
    connected_components,
    resolve,
)
from .typecheck import Diagnostic, check_library, dependency_graph

__all__ = [
    "Blank",
    "Diagnostic",
    "ExpansionContext",
    "ExpansionError",
    "Instance",
    "Iri",
    "Library",
    "ListTerm",
    "Literal",
    "NONE",
    "Parameter",
    "ParseDiagnostic",
    "ParseFailure",
    "PrefixMap",
    "TemplateDefinition",
    "Term",
    "Triple",
    "TripleGraph",
    "Variable",
    "check_library",
    "connected_components",
    "dependency_graph",
    "expand_all",
    "expand_instance",
    "parse_instances",
    "parse_library",
    "provenance_expand",
    "resolve",
    "serialize_instances",
    "serialize_library",
]

__version__ = "0.1.0"
