"""Command-line interface.

Exit codes: 0 success, 1 error-severity diagnostics or findings,
2 usage or I/O errors. The OTTRKIT_BASE_IRI environment variable supplies
the default base IRI for minting.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import yaml

from .docgen import load_template_docs, render_hierarchy, render_library_doc
from .expand import ExpandAllError, ExpansionContext, expand_all, filter_published
from .ingest import IngestError, ingest_csv, load_mapping
from .lint import (
    LintConfig,
    has_lint_errors,
    lint_axiom_encapsulation,
    lint_headers,
    lint_instantiation_redundancy,
    lint_output_redundancy,
    load_lint_config,
    render_findings,
    report_to_json,
)
from .stottr import (
    Library,
    ParseFailure,
    parse_instances,
    parse_library,
    serialize_instances,
    to_turtle,
)
from .typecheck import check_library, has_errors
from .workflow import (
    WorkflowCycleError,
    WorkflowFormatError,
    load_sample_inputs,
    load_workflow,
    render_step_reports,
    simulate_connectivity,
    validate_workflow,
)

USAGE_ERROR = 2
DIAGNOSTIC_ERROR = 1


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _CliIOError(f"cannot read {path}: {exc}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _CliIOError(f"cannot write {path}: {exc}") from None


class _CliIOError(Exception):
    pass


def _load_library(path: str) -> Library:
    text = _read(path)
    try:
        return parse_library(text)
    except ParseFailure as exc:
        for diag in exc.diagnostics:
            print(f"{path}:{diag}", file=sys.stderr)
        raise


def _load_checked_library(path: str) -> Library:
    library = _load_library(path)
    diagnostics = check_library(library)
    for diag in diagnostics:
        print(diag.render(library), file=sys.stderr)
    if has_errors(diagnostics):
        raise _CheckFailed()
    return library


class _CheckFailed(Exception):
    pass


def _load_instances(path: str, library: Library):
    text = _read(path)
    try:
        return parse_instances(text, library)
    except ParseFailure as exc:
        for diag in exc.diagnostics:
            print(f"{path}:{diag}", file=sys.stderr)
        raise


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_check(args) -> int:
    library = _load_library(args.library)
    diagnostics = check_library(library)
    for diag in diagnostics:
        print(diag.render(library))
    return DIAGNOSTIC_ERROR if has_errors(diagnostics) else 0


def _cmd_expand(args) -> int:
    library = _load_checked_library(args.library)
    instances = _load_instances(args.instances, library)
    if args.published_only:
        instances = filter_published(instances, library)
    try:
        graph = expand_all(instances, ExpansionContext(library))
    except ExpandAllError as exc:
        for index, err in exc.failures:
            print(f"instance {index}: {err}", file=sys.stderr)
        return DIAGNOSTIC_ERROR
    text = graph.to_ntriples() if args.format == "ntriples" else to_turtle(graph, library.prefixes)
    _write(args.output, text)
    return 0


def _cmd_lint(args) -> int:
    library = _load_checked_library(args.library)
    config = LintConfig()
    if args.config:
        config = load_lint_config(yaml.safe_load(_read(args.config)) or {}, library)
    findings = lint_headers(library, config) + lint_axiom_encapsulation(library, config)
    if args.instances:
        instances = _load_instances(args.instances, library)
        findings += lint_output_redundancy(instances, library)
        findings += lint_instantiation_redundancy(instances, config)
    if args.format == "json":
        sys.stdout.write(report_to_json(findings) + "\n")
    else:
        sys.stdout.write(render_findings(findings))
    return DIAGNOSTIC_ERROR if has_lint_errors(findings) else 0


def _cmd_doc(args) -> int:
    library = _load_checked_library(args.library)
    if args.format == "dot":
        _write(args.output, render_hierarchy(library, "dot"))
        return 0
    docs = load_template_docs(_read(args.docs), library) if args.docs else {}
    workflows = [load_workflow(_read(path), library) for path in args.workflow or []]
    _write(args.output, render_library_doc(library, docs, workflows))
    return 0


def _cmd_workflow_validate(args) -> int:
    library = _load_checked_library(args.library)
    workflow = load_workflow(_read(args.workflow), library)
    diagnostics = validate_workflow(workflow, library)
    for diag in diagnostics:
        print(diag.render(library))
    if diagnostics:
        return DIAGNOSTIC_ERROR
    sample_inputs = load_sample_inputs(_read(args.inputs), library) if args.inputs else {}
    reports = simulate_connectivity(workflow, library, sample_inputs, base=args.base)
    sys.stdout.write(render_step_reports(reports))
    return 0


def _cmd_ingest(args) -> int:
    library = _load_checked_library(args.library)
    config = load_mapping(_read(args.mapping), library)
    instances, diagnostics = ingest_csv(_read(args.data), config, library)
    for diag in diagnostics:
        print(diag.render(), file=sys.stderr)
    if args.published_only:
        instances = filter_published(instances, library)
    if args.format == "instances":
        _write(args.output, serialize_instances(instances, library.prefixes))
    else:
        graph = expand_all(instances, ExpansionContext(library))
        text = graph.to_ntriples() if args.format == "ntriples" else to_turtle(graph, library.prefixes)
        _write(args.output, text)
    return DIAGNOSTIC_ERROR if any(d.kind == "error" for d in diagnostics) else 0


def _cmd_serve(args) -> int:
    from .service import serve

    library = _load_checked_library(args.library)
    docs = load_template_docs(_read(args.docs), library) if args.docs else {}
    workflows = [load_workflow(_read(path), library) for path in args.workflow or []]
    serve(
        library,
        port=args.port,
        base_iri=args.base,
        session_dir=args.sessions,
        workflows=workflows,
        docs=docs,
        host=args.host,
    )
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ottrkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="type-check a template library")
    p.add_argument("-l", "--library", required=True)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("expand", help="expand an instance file into triples")
    p.add_argument("-l", "--library", required=True)
    p.add_argument("-i", "--instances", required=True)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--format", choices=["ntriples", "turtle"], default="ntriples")
    p.add_argument("--published-only", action="store_true")
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("lint", help="run design-principle lints")
    p.add_argument("-l", "--library", required=True)
    p.add_argument("-i", "--instances", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=_cmd_lint)

    p = sub.add_parser("doc", help="generate library documentation")
    p.add_argument("-l", "--library", required=True)
    p.add_argument("--docs", default=None)
    p.add_argument("--workflow", action="append", default=None)
    p.add_argument("--format", choices=["md", "dot"], default="md")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_doc)

    p = sub.add_parser("workflow", help="workflow tools")
    wf_sub = p.add_subparsers(dest="workflow_command", required=True)
    v = wf_sub.add_parser("validate", help="validate a workflow and simulate connectivity")
    v.add_argument("-l", "--library", required=True)
    v.add_argument("-w", "--workflow", required=True)
    v.add_argument("--inputs", default=None)
    v.add_argument("--base", default=os.environ.get("OTTRKIT_BASE_IRI", "http://example.org"))
    v.set_defaults(func=_cmd_workflow_validate)

    p = sub.add_parser("ingest", help="map a CSV file to instances or triples")
    p.add_argument("-l", "--library", required=True)
    p.add_argument("--mapping", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--format", choices=["instances", "ntriples", "turtle"], default="instances")
    p.add_argument("--published-only", action="store_true")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("serve", help="run the instantiation HTTP service")
    p.add_argument("-l", "--library", required=True)
    p.add_argument("--port", type=int, required=True)
    env_base = os.environ.get("OTTRKIT_BASE_IRI")
    p.add_argument("--base", default=env_base, required=env_base is None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--sessions", default="sessions")
    p.add_argument("--docs", default=None)
    p.add_argument("--workflow", action="append", default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (_CliIOError, WorkflowFormatError, IngestError, WorkflowCycleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ParseFailure:
        return DIAGNOSTIC_ERROR
    except _CheckFailed:
        return DIAGNOSTIC_ERROR


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
