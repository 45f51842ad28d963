"""Instantiation-order workflows: validation, topological ordering, and
connectivity simulation over the growing output graph."""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field

import yaml

from .expand import ExpansionContext, expand_instance
from .stottr import (
    TOP,
    Instance,
    Library,
    ParamType,
    ParseFailure,
    parse_ptype_string,
    parse_term_string,
    ptype_to_stottr,
    term_to_stottr,
)
from .terms import (
    DEFAULT_EXCLUDED_NAMESPACES,
    NONE,
    Iri,
    Term,
    Triple,
    TripleGraph,
    component_count,
    is_absolute_iri,
)
from .typecheck import ERROR, Diagnostic


@dataclass(frozen=True)
class Const:
    term: Term


@dataclass(frozen=True)
class MintAuto:
    pass


@dataclass(frozen=True)
class Ref:
    step: str
    param: str


@dataclass(frozen=True)
class UserInput:
    ptype: ParamType


Binding = Const | MintAuto | Ref | UserInput


@dataclass
class WorkflowStep:
    id: str
    template: Iri
    after: tuple[str, ...] = ()
    bindings: dict[str, Binding] = field(default_factory=dict)


@dataclass
class Workflow:
    name: str
    steps: tuple[WorkflowStep, ...] = ()

    def step_ids(self) -> list[str]:
        return [s.id for s in self.steps]


class WorkflowFormatError(ValueError):
    pass


class WorkflowCycleError(Exception):
    code = "E_WF_CYCLE"


_ID_RE = re.compile(r"^[A-Za-z0-9_-]+$")


def _parse_iri(text: str, library: Library) -> Iri:
    try:
        term = parse_term_string(text, library.prefixes)
    except ParseFailure:
        if "://" in text and is_absolute_iri(text):
            return Iri(text)
        raise WorkflowFormatError(f"not a template IRI: {text!r}") from None
    if not isinstance(term, Iri):
        raise WorkflowFormatError(f"not a template IRI: {text!r}")
    return term


def parse_binding(text: str, library: Library) -> Binding:
    """Binding strings: `const:<term>`, `mint:auto`, `ref:<step>.<param>`,
    `input:<type>`."""
    if text == "mint:auto":
        return MintAuto()
    if text.startswith("const:"):
        try:
            return Const(parse_term_string(text[len("const:"):].strip(), library.prefixes))
        except ParseFailure as exc:
            raise WorkflowFormatError(f"bad const binding {text!r}: {exc}") from None
    if text.startswith("ref:"):
        target = text[len("ref:"):].strip()
        step, sep, param = target.partition(".")
        if not sep or not step or not param:
            raise WorkflowFormatError(f"ref binding must be 'ref:<step>.<param>': {text!r}")
        return Ref(step, param)
    if text.startswith("input:"):
        type_text = text[len("input:"):].strip()
        if not type_text:
            return UserInput(TOP)
        try:
            return UserInput(parse_ptype_string(type_text, library.prefixes))
        except ParseFailure as exc:
            raise WorkflowFormatError(f"bad input binding {text!r}: {exc}") from None
    raise WorkflowFormatError(f"unknown binding kind: {text!r}")


def load_workflow(text: str, library: Library) -> Workflow:
    """Read a workflow document (YAML key-value form)."""
    data = yaml.safe_load(text)
    if not isinstance(data, dict) or "name" not in data:
        raise WorkflowFormatError("workflow document must be a mapping with a 'name'")
    name = str(data["name"])
    if not _ID_RE.match(name):
        raise WorkflowFormatError(f"workflow name must match {_ID_RE.pattern}: {name!r}")
    steps = []
    for raw in data.get("steps", []) or []:
        if not isinstance(raw, dict) or "id" not in raw or "template" not in raw:
            raise WorkflowFormatError("each step needs 'id' and 'template'")
        step_id = str(raw["id"])
        if not _ID_RE.match(step_id):
            raise WorkflowFormatError(f"step id must match {_ID_RE.pattern}: {step_id!r}")
        after = tuple(str(a) for a in raw.get("after", []) or [])
        bindings = {
            str(param): parse_binding(str(value), library)
            for param, value in (raw.get("bindings", {}) or {}).items()
        }
        steps.append(WorkflowStep(step_id, _parse_iri(str(raw["template"]), library), after, bindings))
    return Workflow(name, tuple(steps))


def load_sample_inputs(text: str, library: Library) -> dict[tuple[str, str], Term]:
    """Read sample user inputs: a mapping step -> parameter -> term string."""
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise WorkflowFormatError("sample inputs must be a mapping")
    out: dict[tuple[str, str], Term] = {}
    for step, params in data.items():
        if not isinstance(params, dict):
            raise WorkflowFormatError(f"sample inputs for step {step!r} must be a mapping")
        for param, value in params.items():
            try:
                out[(str(step), str(param))] = parse_term_string(str(value), library.prefixes)
            except ParseFailure as exc:
                raise WorkflowFormatError(f"bad sample input {step}.{param}: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_workflow(workflow: Workflow, library: Library) -> list[Diagnostic]:
    from .docgen import classify_user_facing

    diagnostics: list[Diagnostic] = []
    user_facing = classify_user_facing(library)
    seen: dict[str, int] = {}

    def diag(code: str, step: WorkflowStep, message: str) -> None:
        diagnostics.append(Diagnostic(ERROR, code, step.template, f"step {step.id}: {message}"))

    for index, step in enumerate(workflow.steps):
        if step.id in seen:
            diag("E_WF_ORDER", step, "duplicate step id")
        else:
            seen[step.id] = index

        tdef = library.lookup(step.template.value)
        if tdef is None or step.template.value not in library.templates:
            diag("E_WF_UNKNOWN_TEMPLATE", step, f"unknown template {step.template.value}")
            continue
        if not user_facing.get(step.template.value, False):
            diag("E_WF_UNKNOWN_TEMPLATE", step,
                 f"{step.template.value} is not user-facing and cannot be a workflow step")

        for dep in step.after:
            if dep not in seen or seen[dep] >= index:
                diag("E_WF_ORDER", step, f"'after' must reference an earlier step, got {dep!r}")

        param_names = {p.name for p in tdef.parameters}
        for name, binding in sorted(step.bindings.items()):
            if name not in param_names:
                diag("E_WF_UNBOUND_PARAM", step, f"binds nonexistent parameter ?{name}")
                continue
            if isinstance(binding, Ref):
                if binding.step not in seen or seen[binding.step] >= index:
                    diag("E_WF_BAD_REF", step,
                         f"ref target must be an earlier step, got {binding.step!r}")
                    continue
                target = workflow.steps[seen[binding.step]]
                target_binding = target.bindings.get(binding.param)
                if not isinstance(target_binding, (Const, MintAuto)):
                    diag("E_WF_BAD_REF", step,
                         f"ref target {binding.step}.{binding.param} is not a const or minted value")
        for param in tdef.parameters:
            if not param.optional and param.name not in step.bindings:
                diag("E_WF_UNBOUND_PARAM", step, f"non-optional parameter ?{param.name} is unbound")

    return diagnostics


# ---------------------------------------------------------------------------
# Ordering
# ---------------------------------------------------------------------------

def suggest_order(workflow: Workflow) -> list[str]:
    """Topological order over `after` and ref dependencies; ties keep
    declaration order."""
    index = {step.id: i for i, step in enumerate(workflow.steps)}
    deps: dict[str, set[str]] = {step.id: set() for step in workflow.steps}
    for step in workflow.steps:
        for dep in step.after:
            if dep in deps:
                deps[step.id].add(dep)
        for binding in step.bindings.values():
            if isinstance(binding, Ref) and binding.step in deps:
                deps[step.id].add(binding.step)

    dependents: dict[str, list[str]] = {sid: [] for sid in deps}
    indegree = {sid: len(dep) for sid, dep in deps.items()}
    for sid, dep in deps.items():
        for d in dep:
            dependents[d].append(sid)

    ready = [index[sid] for sid, deg in indegree.items() if deg == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        sid = workflow.steps[heapq.heappop(ready)].id
        order.append(sid)
        for succ in dependents[sid]:
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heapq.heappush(ready, index[succ])
    if len(order) != len(workflow.steps):
        stuck = sorted(sid for sid, deg in indegree.items() if deg > 0)
        raise WorkflowCycleError(f"workflow dependencies are cyclic among: {', '.join(stuck)}")
    return order


# ---------------------------------------------------------------------------
# Connectivity simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepReport:
    step_id: str
    components_after: int
    flagged: bool  # True when the graph is disconnected after this step
    minted: tuple[str, ...] = ()


def simulate_connectivity(
    workflow: Workflow,
    library: Library,
    sample_inputs: dict[tuple[str, str], Term] | None = None,
    base: str = "http://example.org",
    excluded_namespaces: tuple[str, ...] = DEFAULT_EXCLUDED_NAMESPACES,
) -> list[StepReport]:
    """Instantiate the steps in order and report the cumulative graph's
    component count after each one. Auto-minted values become
    `{base}/{workflow}/{step}/{n}`; missing user inputs become
    `{base}/sample/{step}/{param}` placeholders."""
    sample_inputs = sample_inputs or {}
    base = base.rstrip("/")
    values: dict[tuple[str, str], Term] = {}
    cumulative: set[Triple] = set()
    reports: list[StepReport] = []

    for idx, step in enumerate(workflow.steps):
        tdef = library.lookup(step.template.value)
        if tdef is None:
            raise WorkflowFormatError(f"step {step.id}: unknown template {step.template.value}")
        args: list[Term] = []
        minted: list[str] = []
        for param in tdef.parameters:
            binding = step.bindings.get(param.name)
            if binding is None:
                value: Term = NONE
            elif isinstance(binding, Const):
                value = binding.term
            elif isinstance(binding, MintAuto):
                value = Iri(f"{base}/{workflow.name}/{step.id}/{len(minted)}")
                minted.append(value.value)
            elif isinstance(binding, Ref):
                try:
                    value = values[(binding.step, binding.param)]
                except KeyError:
                    raise WorkflowFormatError(
                        f"step {step.id}: unresolved ref {binding.step}.{binding.param}"
                    ) from None
            else:  # UserInput
                value = sample_inputs.get(
                    (step.id, param.name),
                    Iri(f"{base}/sample/{step.id}/{param.name}"),
                )
            if isinstance(binding, (Const, MintAuto)):
                values[(step.id, param.name)] = value
            args.append(value)

        graph = expand_instance(Instance(step.template, args), ExpansionContext(library, idx))
        cumulative |= graph.triples
        count = component_count(TripleGraph(cumulative), excluded_namespaces)
        reports.append(StepReport(step.id, count, count > 1, tuple(minted)))
    return reports


def render_step_reports(reports: list[StepReport]) -> str:
    lines = []
    for r in reports:
        note = "  <- graph is disconnected" if r.flagged else ""
        lines.append(f"{r.step_id}: components-after={r.components_after}{note}")
    return "\n".join(lines) + ("\n" if lines else "")


def workflow_to_dict(workflow: Workflow) -> dict:
    return {
        "name": workflow.name,
        "steps": [
            {
                "id": step.id,
                "template": step.template.value,
                "after": list(step.after),
                "bindings": {
                    name: _binding_to_string(binding)
                    for name, binding in sorted(step.bindings.items())
                },
            }
            for step in workflow.steps
        ],
    }


def _binding_to_string(binding: Binding) -> str:
    if isinstance(binding, Const):
        return f"const:{term_to_stottr(binding.term, None)}"
    if isinstance(binding, MintAuto):
        return "mint:auto"
    if isinstance(binding, Ref):
        return f"ref:{binding.step}.{binding.param}"
    return f"input:{ptype_to_stottr(binding.ptype, None)}"
