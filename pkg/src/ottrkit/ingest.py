"""CSV-to-instances mapping: one template instance per data row, driven by a
column-binding configuration."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass

import yaml

from .expand import ExpansionContext, expand_all
from .stottr import Instance, Library, ParseFailure, parse_term_string
from .terms import (
    NONE,
    XSD_STRING,
    Iri,
    Literal,
    Term,
    TripleGraph,
    is_absolute_iri,
)


@dataclass(frozen=True)
class IriCell:
    pass


@dataclass(frozen=True)
class LiteralCell:
    datatype: str = XSD_STRING


@dataclass(frozen=True)
class LangCell:
    tag: str


CellType = IriCell | LiteralCell | LangCell


@dataclass(frozen=True)
class Column:
    name: str
    cell: CellType = LiteralCell()


@dataclass(frozen=True)
class Constant:
    term: Term


@dataclass(frozen=True)
class MintPattern:
    pattern: str  # `{column}` placeholders

    def columns(self) -> list[str]:
        return re.findall(r"\{([^{}]+)\}", self.pattern)


@dataclass(frozen=True)
class SkipIfEmpty:
    """Bind the cell as a plain string literal; an empty cell skips the whole
    row deliberately (recorded as a skip, not an error)."""
    column: str


ColumnBinding = Column | Constant | MintPattern | SkipIfEmpty


@dataclass
class MappingConfig:
    template: Iri
    bindings: dict[str, ColumnBinding]
    delimiter: str = ","
    base: str | None = None


@dataclass(frozen=True)
class RowDiagnostic:
    row: int  # 1-based data row number
    column: str
    message: str
    kind: str = "error"  # "error" | "skip"

    def render(self) -> str:
        return f"row {self.row}, column {self.column!r}: {self.message}"


class IngestError(Exception):
    """File-level failure: malformed CSV or an invalid mapping."""


class MappingFormatError(IngestError):
    pass


# ---------------------------------------------------------------------------
# Mapping configuration
# ---------------------------------------------------------------------------

def load_mapping(text: str, library: Library) -> MappingConfig:
    data = yaml.safe_load(text)
    if not isinstance(data, dict) or "template" not in data or "bindings" not in data:
        raise MappingFormatError("mapping must be a mapping with 'template' and 'bindings'")

    template = _parse_iri(str(data["template"]), library)
    tdef = library.lookup(template.value)
    if tdef is None:
        raise MappingFormatError(f"unknown template {template.value}")

    bindings: dict[str, ColumnBinding] = {}
    param_names = {p.name for p in tdef.parameters}
    for name, raw in (data["bindings"] or {}).items():
        name = str(name)
        if name not in param_names:
            raise MappingFormatError(f"binding for nonexistent parameter ?{name}")
        bindings[name] = _parse_binding(name, raw, library)

    for param in tdef.parameters:
        if not param.optional and param.name not in bindings:
            raise MappingFormatError(f"non-optional parameter ?{param.name} is unbound")

    delimiter = str(data.get("delimiter", ","))
    if len(delimiter) != 1:
        raise MappingFormatError(f"delimiter must be one character, got {delimiter!r}")
    base = str(data["base"]) if data.get("base") else None
    if base is not None and not is_absolute_iri(base):
        raise MappingFormatError(f"base is not an absolute IRI: {base!r}")
    return MappingConfig(template, bindings, delimiter, base)


def _parse_iri(text: str, library: Library) -> Iri:
    try:
        term = parse_term_string(text, library.prefixes)
        if isinstance(term, Iri):
            return term
    except ParseFailure:
        if "://" in text and is_absolute_iri(text):
            return Iri(text)
    raise MappingFormatError(f"not a template IRI: {text!r}")


def _parse_binding(param: str, raw, library: Library) -> ColumnBinding:
    if not isinstance(raw, dict):
        raise MappingFormatError(f"binding for ?{param} must be a mapping")
    if "constant" in raw:
        try:
            return Constant(parse_term_string(str(raw["constant"]), library.prefixes))
        except ParseFailure as exc:
            raise MappingFormatError(f"bad constant for ?{param}: {exc}") from None
    if "mint" in raw:
        pattern = str(raw["mint"])
        if not MintPattern(pattern).columns():
            raise MappingFormatError(f"mint pattern for ?{param} has no {{column}} placeholder")
        return MintPattern(pattern)
    if "skipIfEmpty" in raw:
        return SkipIfEmpty(str(raw["skipIfEmpty"]))
    if "column" in raw:
        return Column(str(raw["column"]), _parse_cell_type(param, raw.get("as"), library))
    raise MappingFormatError(f"binding for ?{param} needs column, constant, mint or skipIfEmpty")


def _parse_cell_type(param: str, raw, library: Library) -> CellType:
    if raw is None:
        return LiteralCell()
    if raw == "iri":
        return IriCell()
    if isinstance(raw, dict):
        if "datatype" in raw:
            term = parse_term_string(str(raw["datatype"]), library.prefixes)
            if not isinstance(term, Iri):
                raise MappingFormatError(f"datatype for ?{param} is not an IRI")
            return LiteralCell(term.value)
        if "lang" in raw:
            return LangCell(str(raw["lang"]))
    raise MappingFormatError(f"bad 'as' for ?{param}: expected iri, {{datatype: ...}} or {{lang: ...}}")


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

def _read_rows(csv_text: str, delimiter: str) -> list[list[str]]:
    # A well-quoted file always contains an even number of quote characters;
    # an odd count means an unterminated quote somewhere.
    if csv_text.count('"') % 2 == 1:
        raise IngestError("malformed CSV: unbalanced quotes")
    try:
        reader = csv.reader(io.StringIO(csv_text), delimiter=delimiter, strict=True)
        return [row for row in reader if row]
    except csv.Error as exc:
        raise IngestError(f"malformed CSV: {exc}") from None


def ingest_csv(
    csv_text: str, config: MappingConfig, library: Library
) -> tuple[list[Instance], list[RowDiagnostic]]:
    """Map each data row to an instance. Rows with bad cells are skipped with
    one diagnostic per bad cell; row order is preserved."""
    tdef = library.lookup(config.template.value)
    if tdef is None:
        raise IngestError(f"unknown template {config.template.value}")

    rows = _read_rows(csv_text, config.delimiter)
    if not rows:
        raise IngestError("CSV needs a header row")
    header = [cell.strip() for cell in rows[0]]
    positions = {name: i for i, name in enumerate(header)}

    referenced = set()
    for binding in config.bindings.values():
        if isinstance(binding, Column):
            referenced.add(binding.name)
        elif isinstance(binding, SkipIfEmpty):
            referenced.add(binding.column)
        elif isinstance(binding, MintPattern):
            referenced.update(binding.columns())
    missing = sorted(referenced - set(positions))
    if missing:
        raise IngestError(f"columns not in header: {', '.join(missing)}")

    instances: list[Instance] = []
    diagnostics: list[RowDiagnostic] = []

    for row_number, raw_row in enumerate(rows[1:], start=1):
        cells = [cell.strip() for cell in raw_row]
        if len(cells) != len(header):
            diagnostics.append(RowDiagnostic(
                row_number, "-", f"row has {len(cells)} fields, expected {len(header)}",
            ))
            continue

        def cell(column: str) -> str:
            return cells[positions[column]]

        skipped = False
        for binding in config.bindings.values():
            if isinstance(binding, SkipIfEmpty) and cell(binding.column) == "":
                diagnostics.append(RowDiagnostic(
                    row_number, binding.column, "row skipped: cell is empty", kind="skip",
                ))
                skipped = True
                break
        if skipped:
            continue

        args: list[Term] = []
        row_diags: list[RowDiagnostic] = []
        for param in tdef.parameters:
            binding = config.bindings.get(param.name)
            args.append(_bind_cell(binding, param, cell, config, row_number, row_diags))
        if row_diags:
            diagnostics.extend(row_diags)
            continue
        instances.append(Instance(config.template, args))

    return instances, diagnostics


def _bind_cell(binding, param, cell, config, row_number, diags) -> Term:
    if binding is None:
        return NONE
    if isinstance(binding, Constant):
        return binding.term
    if isinstance(binding, SkipIfEmpty):
        return Literal(cell(binding.column))
    if isinstance(binding, MintPattern):
        minted = binding.pattern
        for column in binding.columns():
            value = cell(column)
            if value == "":
                diags.append(RowDiagnostic(
                    row_number, column, "mint placeholder cell is empty",
                ))
                return NONE
            minted = minted.replace("{" + column + "}", value)
        if not is_absolute_iri(minted):
            diags.append(RowDiagnostic(
                row_number, binding.columns()[0], f"minted value is not an absolute IRI: {minted!r}",
            ))
            return NONE
        return Iri(minted)

    value = cell(binding.name)
    if value == "":
        if param.optional or param.default is not None:
            return NONE
        diags.append(RowDiagnostic(
            row_number, binding.name,
            f"empty cell for non-optional parameter ?{param.name}",
        ))
        return NONE
    if isinstance(binding.cell, IriCell):
        if not is_absolute_iri(value):
            if config.base is None:
                diags.append(RowDiagnostic(
                    row_number, binding.name,
                    f"not an absolute IRI and no base configured: {value!r}",
                ))
                return NONE
            value = config.base.rstrip("/") + "/" + value
        try:
            return Iri(value)
        except ValueError as exc:
            diags.append(RowDiagnostic(row_number, binding.name, str(exc)))
            return NONE
    if isinstance(binding.cell, LangCell):
        return Literal(value, language=binding.cell.tag)
    return Literal(value, datatype=binding.cell.datatype)


def ingest_to_graph(csv_text: str, config: MappingConfig, library: Library) -> TripleGraph:
    """Compose ingestion with expansion."""
    instances, _ = ingest_csv(csv_text, config, library)
    return expand_all(instances, ExpansionContext(library))
