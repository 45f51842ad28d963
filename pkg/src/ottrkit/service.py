"""HTTP instantiation service with durable, replayable sessions.

Each session is an append-only log on disk: one stOTTR instance per accepted
request, preceded by comment lines recording minted IRIs and workflow steps.
The log is itself a valid instance file, and replaying it reproduces the
session graph and mint counter exactly.
"""

from __future__ import annotations

import threading
import urllib.parse
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .docgen import TemplateDoc, classify_user_facing
from .expand import ExpansionContext, expand_instance
from .lint import LintConfig, findings_report, lint_instantiation_redundancy, lint_output_redundancy
from .stottr import (
    Instance,
    IriType,
    Library,
    ListType,
    LiteralType,
    ParamType,
    ParseFailure,
    TopType,
    instance_to_stottr,
    parse_instances,
    parse_term_string,
    ptype_to_stottr,
    term_to_stottr,
    to_turtle,
)
from .terms import Blank, Iri, NoneTerm, TripleGraph, component_count
from .typecheck import term_matches_type
from .workflow import Const, MintAuto, Ref, Workflow, suggest_order, workflow_to_dict


@dataclass
class Session:
    id: str
    instances: list[Instance] = field(default_factory=list)
    graph: TripleGraph = field(default_factory=TripleGraph)
    mint_counter: int = 0
    minted: list[str] = field(default_factory=list)
    # workflow name -> step id -> parameter -> term string
    workflow_state: dict[str, dict[str, dict[str, str]]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, directory: Path, library: Library):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.library = library
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def _log_path(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.log"

    def create(self) -> Session:
        session = Session(id=uuid.uuid4().hex)
        with self._lock:
            self._log_path(session.id).write_text("", encoding="utf-8")
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is not None:
                return session
            path = self._log_path(session_id)
            if not _valid_session_id(session_id) or not path.exists():
                return None
            session = self._replay(session_id, path.read_text(encoding="utf-8"))
            self._sessions[session_id] = session
            return session

    def append(self, session: Session, inst: Instance, minted: list[str], step: tuple[str, str] | None) -> None:
        lines = []
        if minted:
            lines.append("# mint=" + " ".join(f"<{m}>" for m in minted))
        if step is not None:
            lines.append(f"# step={step[0]}:{step[1]}")
        lines.append(f"{instance_to_stottr(inst, None)} .")
        with self._log_path(session.id).open("a", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    def _replay(self, session_id: str, text: str) -> Session:
        session = Session(id=session_id)
        pending_mints: list[str] = []
        pending_step: tuple[str, str] | None = None
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("# mint="):
                pending_mints = [m.strip("<>") for m in line[len("# mint="):].split()]
                continue
            if line.startswith("# step="):
                wf, _, step = line[len("# step="):].partition(":")
                pending_step = (wf, step)
                continue
            if line.startswith("#"):
                continue
            insts = parse_instances(line, self.library)
            for inst in insts:
                self._apply(session, inst, pending_mints, pending_step)
            pending_mints, pending_step = [], None
        return session

    def _apply(self, session: Session, inst: Instance, minted: list[str], step: tuple[str, str] | None) -> None:
        index = len(session.instances)
        graph = expand_instance(inst, ExpansionContext(self.library, index))
        session.instances.append(inst)
        session.graph = session.graph | graph
        session.minted.extend(minted)
        session.mint_counter += len(minted)
        if step is not None:
            self.record_step(session, inst, step)

    def record_step(self, session: Session, inst: Instance, step: tuple[str, str]) -> None:
        tdef = self.library.lookup(inst.template.value)
        values = {}
        if tdef is not None and len(inst.arguments) == tdef.arity:
            values = {
                param.name: term_to_stottr(arg, None)
                for param, arg in zip(tdef.parameters, inst.arguments)
                if not isinstance(arg, NoneTerm)
            }
        session.workflow_state.setdefault(step[0], {})[step[1]] = values


def _valid_session_id(session_id: str) -> bool:
    # Session ids name log files, so restrict them well clear of path tricks.
    return session_id.isalnum()


class InstanceRequest(BaseModel):
    template: str
    args: list[str] = []
    mint: list[str] = []
    workflow: str | None = None
    step: str | None = None


def _diag(code: str, message: str, template: str | None = None) -> dict:
    return {"severity": "error", "code": code, "template": template, "message": message}


def _ptype_info(ptype: ParamType) -> dict:
    if isinstance(ptype, TopType):
        return {"kind": "top"}
    if isinstance(ptype, IriType):
        return {"kind": "iri"}
    if isinstance(ptype, LiteralType):
        return {"kind": "literal", "datatype": ptype.datatype}
    assert isinstance(ptype, ListType)
    return {"kind": "list", "element": _ptype_info(ptype.element)}


def create_app(
    library: Library,
    base_iri: str = "http://example.org",
    session_dir: str | Path = "sessions",
    workflows: list[Workflow] | None = None,
    docs: dict[str, TemplateDoc] | None = None,
) -> FastAPI:
    app = FastAPI(title="template instantiation service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )
    store = SessionStore(Path(session_dir), library)
    base = base_iri.rstrip("/")
    workflows = workflows or []
    workflow_index = {wf.name: wf for wf in workflows}
    docs = docs or {}
    user_facing = classify_user_facing(library)

    app.state.store = store

    def find_template(ref: str):
        candidates = [ref, urllib.parse.unquote(ref)]
        for candidate in candidates:
            tdef = library.lookup(candidate)
            if tdef is not None:
                return tdef
        for candidate in candidates:
            try:
                term = parse_term_string(candidate, library.prefixes)
                if isinstance(term, Iri):
                    tdef = library.lookup(term.value)
                    if tdef is not None:
                        return tdef
            except ParseFailure:
                continue
        return None

    def get_session(session_id: str) -> Session:
        session = store.get(session_id)
        if session is None:
            raise HTTPException(404, detail=f"unknown session {session_id!r}")
        return session

    @app.get("/api/templates")
    def list_templates() -> list[dict]:
        return [
            {"iri": iri, "userFacing": user_facing[iri]}
            for iri in sorted(library.templates)
        ]

    @app.get("/api/templates/{iri:path}/schema")
    def template_schema(iri: str) -> dict:
        tdef = find_template(iri)
        if tdef is None:
            raise HTTPException(404, detail=f"unknown template {iri!r}")
        doc = docs.get(tdef.iri.value)
        parameters = []
        for param in tdef.parameters:
            pdoc = doc.params.get(param.name) if doc else None
            parameters.append({
                "name": param.name,
                "type": _ptype_info(param.ptype),
                "typeLabel": ptype_to_stottr(param.ptype, library.prefixes),
                "optional": param.optional,
                "default": term_to_stottr(param.default, library.prefixes)
                if param.default is not None else None,
                "description": pdoc.description if pdoc else "",
                "exampleValue": pdoc.example if pdoc else "",
            })
        return {
            "iri": tdef.iri.value,
            "userFacing": user_facing.get(tdef.iri.value, False),
            "description": doc.description if doc else "",
            "parameters": parameters,
        }

    @app.post("/api/sessions", status_code=201)
    def create_session() -> dict:
        session = store.create()
        return {"sessionId": session.id}

    @app.get("/api/sessions/{session_id}")
    def session_info(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            return {
                "sessionId": session.id,
                "instances": len(session.instances),
                "totalTriples": len(session.graph),
                "mintedIris": list(session.minted),
                "connectedComponents": component_count(session.graph),
            }

    @app.post("/api/sessions/{session_id}/instances")
    def add_instance(session_id: str, request: InstanceRequest) -> dict:
        session = get_session(session_id)
        tdef = find_template(request.template)
        if tdef is None:
            raise HTTPException(404, detail=f"unknown template {request.template!r}")

        diagnostics = []
        if len(request.args) != tdef.arity:
            diagnostics.append(_diag(
                "E_ARITY",
                f"{tdef.iri.value} expects {tdef.arity} arguments, got {len(request.args)}",
                tdef.iri.value,
            ))
            raise HTTPException(422, detail={"diagnostics": diagnostics})

        param_names = [p.name for p in tdef.parameters]
        for name in request.mint:
            if name not in param_names:
                diagnostics.append(_diag(
                    "E_TYPE", f"mint refers to nonexistent parameter ?{name}", tdef.iri.value,
                ))
        if diagnostics:
            raise HTTPException(422, detail={"diagnostics": diagnostics})

        with session.lock:
            minted: list[str] = []
            args = []
            for param, raw in zip(tdef.parameters, request.args):
                if param.name in request.mint:
                    iri = f"{base}/{session.id}/{session.mint_counter + len(minted)}"
                    minted.append(iri)
                    args.append(Iri(iri))
                    continue
                try:
                    term = parse_term_string(raw, library.prefixes)
                except ParseFailure as exc:
                    diagnostics.append(_diag(
                        "E_TYPE", f"parameter '{param.name}': unparseable term {raw!r} ({exc})",
                        tdef.iri.value,
                    ))
                    continue
                if not term_matches_type(term, param.ptype, {}):
                    diagnostics.append(_diag(
                        "E_TYPE",
                        f"parameter '{param.name}': value {raw!r} does not match the declared type",
                        tdef.iri.value,
                    ))
                if isinstance(term, Blank) and param.nonblank:
                    diagnostics.append(_diag(
                        "E_BLANK_NONBLANK",
                        f"parameter '{param.name}': blank node passed to a non-blank parameter",
                        tdef.iri.value,
                    ))
                args.append(term)
            if diagnostics:
                raise HTTPException(422, detail={"diagnostics": diagnostics})

            inst = Instance(tdef.iri, args)
            before = len(session.graph)
            index = len(session.instances)
            graph = expand_instance(inst, ExpansionContext(library, index))

            step = None
            if request.workflow and request.step:
                step = (request.workflow, request.step)
            session.instances.append(inst)
            session.graph = session.graph | graph
            session.minted.extend(minted)
            session.mint_counter += len(minted)
            if step is not None:
                store.record_step(session, inst, step)
            store.append(session, inst, minted, step)

            return {
                "instanceIndex": index,
                "mintedIris": minted,
                "triplesAdded": len(session.graph) - before,
                "totalTriples": len(session.graph),
                "connectedComponents": component_count(session.graph),
            }

    @app.get("/api/sessions/{session_id}/graph")
    def session_graph(session_id: str, format: str = "ntriples"):
        session = get_session(session_id)
        with session.lock:
            if format == "ntriples":
                return PlainTextResponse(session.graph.to_ntriples())
            if format == "turtle":
                return PlainTextResponse(to_turtle(session.graph, library.prefixes))
        raise HTTPException(422, detail=f"unknown format {format!r}")

    @app.post("/api/sessions/{session_id}/lint")
    def session_lint(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            findings = lint_output_redundancy(session.instances, library)
            findings += lint_instantiation_redundancy(session.instances, LintConfig())
            return {"findings": findings_report(findings)}

    @app.get("/api/workflows")
    def list_workflows() -> list[dict]:
        return [workflow_to_dict(wf) for wf in workflows]

    @app.post("/api/sessions/{session_id}/workflow/{name}/advance")
    def advance_workflow(session_id: str, name: str) -> dict:
        session = get_session(session_id)
        wf = workflow_index.get(name)
        if wf is None:
            raise HTTPException(404, detail=f"unknown workflow {name!r}")
        order = suggest_order(wf)
        steps = {s.id: s for s in wf.steps}
        with session.lock:
            completed = session.workflow_state.get(name, {})
            next_id = next((sid for sid in order if sid not in completed), None)
            if next_id is None:
                return {"nextStep": None, "completed": order}
            step = steps[next_id]
            unmet = [dep for dep in step.after if dep not in completed]
            if unmet:
                raise HTTPException(409, detail={
                    "message": f"step {next_id!r} requires {', '.join(unmet)} first",
                    "unmet": unmet,
                })
            bindings = {}
            for param, binding in sorted(step.bindings.items()):
                if isinstance(binding, Ref):
                    entry = {
                        "kind": "ref",
                        "value": completed.get(binding.step, {}).get(binding.param),
                        "source": f"{binding.step}.{binding.param}",
                    }
                elif isinstance(binding, Const):
                    entry = {"kind": "const", "value": term_to_stottr(binding.term, None)}
                elif isinstance(binding, MintAuto):
                    entry = {"kind": "mint"}
                else:
                    entry = {"kind": "input", "type": ptype_to_stottr(binding.ptype, library.prefixes)}
                bindings[param] = entry
            return {
                "nextStep": {
                    "stepId": step.id,
                    "template": step.template.value,
                    "bindings": bindings,
                },
                "completed": [sid for sid in order if sid in completed],
            }

    return app


def serve(
    library: Library,
    port: int,
    base_iri: str,
    session_dir: str | Path = "sessions",
    workflows: list[Workflow] | None = None,
    docs: dict[str, TemplateDoc] | None = None,
    host: str = "127.0.0.1",
) -> None:
    import uvicorn

    app = create_app(library, base_iri, session_dir, workflows, docs)
    uvicorn.run(app, host=host, port=port, log_level="warning")
