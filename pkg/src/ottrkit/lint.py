"""Design-principle lints over libraries and instance sets.

Rules:

- R_OUTPUT_REDUNDANCY: a triple is produced by two or more instances.
- R_INSTANCE_DUPLICATE: byte-identical instances.
- R_SHARED_VALUE: a non-IRI argument value recurring across many instances,
  a candidate for extraction into a shared entity or sub-template.
- R_AXIOM_SCATTER: schema-level triples about one ground term are emitted
  from more than one defining template instead of a single encapsulating one.
- R_PARAM_COUNT: a template header with too many parameters.
- R_NAMING: an IRI under a configured namespace violating its naming pattern.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field

from .expand import ExpansionContext, provenance_expand
from .stottr import Instance, Library, instance_to_stottr, term_to_stottr
from .terms import (
    NONE,
    OTTR_TRIPLE,
    OWL_NS,
    RDFS_NS,
    Blank,
    Iri,
    ListTerm,
    Literal,
    NoneTerm,
    Term,
    Variable,
    compact_iri,
    term_sort_key,
    term_to_ntriples,
)

ERROR = "error"
WARNING = "warning"
INFO = "info"

DEFAULT_AXIOM_PREDICATES = frozenset({
    RDFS_NS + "domain",
    RDFS_NS + "range",
    RDFS_NS + "subClassOf",
    RDFS_NS + "subPropertyOf",
    OWL_NS + "inverseOf",
    OWL_NS + "equivalentClass",
    OWL_NS + "disjointWith",
})


@dataclass(frozen=True)
class NamingRule:
    iri_prefix: str
    pattern: str


@dataclass
class LintConfig:
    param_count_threshold: int = 7
    shared_value_threshold: int = 3
    naming_rules: list[NamingRule] = field(default_factory=list)
    axiom_predicates: frozenset[str] = DEFAULT_AXIOM_PREDICATES

    def __post_init__(self):
        if self.param_count_threshold < 1 or self.shared_value_threshold < 1:
            raise ValueError("lint thresholds must be >= 1")


@dataclass(frozen=True)
class LintFinding:
    rule: str
    severity: str
    subjects: tuple[str, ...]
    message: str

    def render(self) -> str:
        return f"{self.severity} {self.rule} {', '.join(self.subjects)}: {self.message}"


def _sorted(findings: list[LintFinding]) -> list[LintFinding]:
    return sorted(findings, key=lambda f: (f.rule, f.subjects, f.message))


def load_lint_config(data: dict, library: Library) -> LintConfig:
    """Build a LintConfig from a parsed mapping document."""
    from .stottr import parse_term_string

    config = LintConfig()
    if "paramCountThreshold" in data:
        config.param_count_threshold = int(data["paramCountThreshold"])
    if "sharedValueThreshold" in data:
        config.shared_value_threshold = int(data["sharedValueThreshold"])
    for rule in data.get("namingRules", []):
        config.naming_rules.append(NamingRule(str(rule["prefix"]), str(rule["pattern"])))
    if "axiomPredicates" in data:
        preds = set()
        for name in data["axiomPredicates"]:
            term = parse_term_string(str(name), library.prefixes)
            if not isinstance(term, Iri):
                raise ValueError(f"axiom predicate is not an IRI: {name!r}")
            preds.add(term.value)
        config.axiom_predicates = frozenset(preds)
    config.__post_init__()
    return config


# ---------------------------------------------------------------------------
# Redundancy over instance sets
# ---------------------------------------------------------------------------

def lint_output_redundancy(instances: list[Instance], library: Library) -> list[LintFinding]:
    """One warning per triple produced by two or more instances."""
    findings = []
    for triple, producers in provenance_expand(instances, ExpansionContext(library)):
        if len(producers) >= 2:
            indices = sorted(producers)
            rendered = " ".join(
                term_to_ntriples(t) for t in (triple.subject, triple.predicate, triple.object)
            )
            findings.append(LintFinding(
                "R_OUTPUT_REDUNDANCY", WARNING,
                tuple(str(i) for i in indices),
                f"triple {rendered} is produced by instances {', '.join(map(str, indices))}",
            ))
    return _sorted(findings)


def lint_instantiation_redundancy(
    instances: list[Instance], config: LintConfig | None = None
) -> list[LintFinding]:
    config = config or LintConfig()
    findings = []

    by_text: dict[str, list[int]] = {}
    for i, inst in enumerate(instances):
        by_text.setdefault(instance_to_stottr(inst, None), []).append(i)
    for text, indices in sorted(by_text.items()):
        if len(indices) >= 2:
            findings.append(LintFinding(
                "R_INSTANCE_DUPLICATE", WARNING,
                tuple(str(i) for i in indices),
                f"instances {', '.join(map(str, indices))} are identical: {text}",
            ))

    # IRIs are links by design; literals, blanks and lists are payload values
    # whose repetition suggests extraction.
    value_uses: dict[Term, set[int]] = {}
    for i, inst in enumerate(instances):
        for arg in inst.arguments:
            if isinstance(arg, (Literal, Blank, ListTerm)):
                value_uses.setdefault(arg, set()).add(i)
    for value in sorted(value_uses, key=term_sort_key):
        uses = value_uses[value]
        if len(uses) >= config.shared_value_threshold:
            indices = sorted(uses)
            findings.append(LintFinding(
                "R_SHARED_VALUE", INFO,
                tuple(str(i) for i in indices),
                f"value {term_to_stottr(value, None)} recurs in {len(indices)} instances; "
                f"consider a shared entity or sub-template",
            ))
    return _sorted(findings)


# ---------------------------------------------------------------------------
# Axiom encapsulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Tracked:
    """A term value plus the template whose text introduced it (None while
    the value is still symbolic, i.e. depends on a caller)."""
    term: Term
    origin: str | None


def _track_sub(term: Term, env: dict[str, _Tracked], owner: str) -> _Tracked:
    if isinstance(term, Variable):
        return env.get(term.name, _Tracked(term, None))
    if isinstance(term, ListTerm):
        items = [_track_sub(t, env, owner) for t in term.items]
        origin = owner if all(tr.origin is not None for tr in items) else None
        return _Tracked(ListTerm(tr.term for tr in items), origin)
    return _Tracked(term, owner)


def _unfold_tracked_mode(mode: str, args: list[_Tracked]) -> list[list[_Tracked]]:
    marked = [i for i, tr in enumerate(args) if isinstance(tr.term, ListTerm)]
    if not marked:
        return [args]
    lists = [
        [_Tracked(item, args[i].origin) for item in args[i].term.items]  # type: ignore[union-attr]
        for i in marked
    ]
    if mode == "cross":
        combos = list(itertools.product(*lists))
    elif mode == "zipMin":
        combos = list(zip(*lists))
    else:
        combos = list(itertools.zip_longest(*lists, fillvalue=_Tracked(NONE, None)))
    out = []
    for combo in combos:
        row = list(args)
        for pos, value in zip(marked, combo):
            row[pos] = value
        out.append(row)
    return out


def _walk_instance(
    template_iri: str,
    args: list[_Tracked],
    library: Library,
    config: LintConfig,
    definers: dict[Term, set[str]],
    depth: int,
) -> None:
    callee = library.lookup(template_iri)
    if callee is None or len(args) != callee.arity or depth > 64:
        return
    # Defaults are written in the callee's signature, so the callee is the
    # origin of any value they supply.
    for i, param in enumerate(callee.parameters):
        if isinstance(args[i].term, NoneTerm) and param.default is not None:
            args[i] = _Tracked(param.default, callee.iri.value)
    if template_iri == OTTR_TRIPLE:
        subj, pred = args[0], args[1]
        if (
            isinstance(pred.term, Iri)
            and pred.term.value in config.axiom_predicates
            and isinstance(subj.term, Iri)
            and subj.origin is not None
        ):
            definers.setdefault(subj.term, set()).add(subj.origin)
        return
    if callee.body is None:
        return
    env = {param.name: arg for param, arg in zip(callee.parameters, args)}
    owner = callee.iri.value
    for inst in callee.body:
        tracked = [_track_sub(a, env, owner) for a in inst.arguments]
        if inst.expansion is not None:
            for row in _unfold_tracked_mode(inst.expansion, tracked):
                _walk_instance(inst.template.value, row, library, config, definers, depth + 1)
        else:
            _walk_instance(inst.template.value, tracked, library, config, definers, depth + 1)


def lint_axiom_encapsulation(library: Library, config: LintConfig | None = None) -> list[LintFinding]:
    """Attribute every ground-subject axiomatic triple to the template whose
    body supplied the subject, then flag subjects with several suppliers.

    Inlining a callee with ground arguments charges the axioms to whichever
    template wrote the ground term, so a dedicated axiom-holding template
    keeps single ownership no matter how many templates instantiate it.
    """
    config = config or LintConfig()
    definers: dict[Term, set[str]] = {}
    for tdef in library.sorted_templates():
        if tdef.body is None:
            continue
        env = {p.name: _Tracked(Variable(p.name), None) for p in tdef.parameters}
        owner = tdef.iri.value
        for inst in tdef.body:
            tracked = [_track_sub(a, env, owner) for a in inst.arguments]
            if inst.expansion is not None:
                for row in _unfold_tracked_mode(inst.expansion, tracked):
                    _walk_instance(inst.template.value, row, library, config, definers, 1)
            else:
                _walk_instance(inst.template.value, tracked, library, config, definers, 1)

    findings = []
    for term in sorted(definers, key=term_sort_key):
        templates = sorted(definers[term])
        if len(templates) >= 2:
            findings.append(LintFinding(
                "R_AXIOM_SCATTER", ERROR,
                tuple(compact_iri(Iri(t), library.prefixes) for t in templates),
                f"axiomatic triples about {term_to_ntriples(term)} are defined in "
                f"{len(templates)} templates: {', '.join(templates)}",
            ))
    return _sorted(findings)


# ---------------------------------------------------------------------------
# Header checks
# ---------------------------------------------------------------------------

def _ground_iris(term: Term):
    if isinstance(term, Iri):
        yield term
    elif isinstance(term, ListTerm):
        for item in term.items:
            yield from _ground_iris(item)


def lint_headers(library: Library, config: LintConfig | None = None) -> list[LintFinding]:
    config = config or LintConfig()
    findings = []

    for tdef in library.sorted_templates():
        count = len(tdef.parameters)
        if count > config.param_count_threshold:
            findings.append(LintFinding(
                "R_PARAM_COUNT", WARNING,
                (compact_iri(tdef.iri, library.prefixes),),
                f"{count} parameters exceed the threshold of {config.param_count_threshold}; "
                f"consider splitting the header",
            ))

    if config.naming_rules:
        candidates: set[str] = set(library.templates)
        for tdef in library.templates.values():
            for inst in tdef.body or ():
                candidates.add(inst.template.value)
                for arg in inst.arguments:
                    candidates.update(i.value for i in _ground_iris(arg))
        for rule in config.naming_rules:
            regex = re.compile(rule.pattern)
            for iri in sorted(candidates):
                if iri.startswith(rule.iri_prefix):
                    local = iri[len(rule.iri_prefix):]
                    if not regex.search(local):
                        findings.append(LintFinding(
                            "R_NAMING", WARNING,
                            (f"<{iri}>",),
                            f"local name {local!r} does not match {rule.pattern!r} "
                            f"required under <{rule.iri_prefix}>",
                        ))
    return _sorted(findings)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def render_findings(findings: list[LintFinding]) -> str:
    return "\n".join(f.render() for f in findings) + ("\n" if findings else "")


def findings_report(findings: list[LintFinding]) -> dict:
    """Machine-readable report keyed by rule id."""
    by_rule: dict[str, list[dict]] = {}
    for f in findings:
        by_rule.setdefault(f.rule, []).append({
            "severity": f.severity,
            "subjects": list(f.subjects),
            "message": f.message,
        })
    return {rule: by_rule[rule] for rule in sorted(by_rule)}


def report_to_json(findings: list[LintFinding]) -> str:
    return json.dumps(findings_report(findings), indent=2, sort_keys=True)


def has_lint_errors(findings: list[LintFinding]) -> bool:
    return any(f.severity == ERROR for f in findings)
