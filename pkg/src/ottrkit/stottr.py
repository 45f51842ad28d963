"""stOTTR template and instance files: data model, parser, and serializer.

The accepted syntax:

    file        = { prefixDecl | stmt } ;
    prefixDecl  = "@prefix" PNAME ":" IRIREF "." ;
    stmt        = templateDef | instance "." ;
    templateDef = name "[" [ param { "," param } ] "]"
                  [ "::" "{" [ instance { "," instance } ] "}" ] "." ;
    param       = [ "?" | "!" | "?!" | "!?" ] [ ptype ] VARIABLE [ "=" term ] ;
    ptype       = name | "List" "<" ptype ">" ;
    instance    = [ ("cross"|"zipMin"|"zipMax") "|" ] name "(" [ arg { "," arg } ] ")" ;
    arg         = term | VARIABLE | "none" | "(" [ term { "," term } ] ")" ;
    term        = name | IRIREF | LITERAL | BLANK ;
    name        = PNAME ":" LOCAL ;

plus `#` line comments. As a convenience the parser also accepts a full
`<iri>` wherever a prefixed name is expected; the serializer emits one
whenever an IRI cannot be compacted, so any library or instance list can be
written out and read back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    NONE,
    OTTR_IRI,
    OTTR_TERM,
    OTTR_TRIPLE,
    XSD_STRING,
    Blank,
    Iri,
    ListTerm,
    Literal,
    NoneTerm,
    PrefixConflict,
    PrefixMap,
    Term,
    TripleGraph,
    Variable,
    compact_iri,
    escape_literal,
    is_absolute_iri,
    triple_sort_key,
)


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TopType:
    pass


@dataclass(frozen=True)
class IriType:
    pass


@dataclass(frozen=True)
class LiteralType:
    datatype: str


@dataclass(frozen=True)
class ListType:
    element: "ParamType"


ParamType = TopType | IriType | LiteralType | ListType

TOP = TopType()
IRI_TYPE = IriType()


@dataclass(frozen=True)
class Parameter:
    name: str
    ptype: ParamType = TOP
    optional: bool = False
    nonblank: bool = False
    default: Term | None = None


@dataclass(frozen=True)
class Instance:
    template: Iri
    arguments: tuple[Term, ...]
    expansion: str | None = None  # "cross" | "zipMin" | "zipMax"

    def __init__(self, template: Iri, arguments, expansion: str | None = None):
        object.__setattr__(self, "template", template)
        object.__setattr__(self, "arguments", tuple(arguments))
        object.__setattr__(self, "expansion", expansion)


@dataclass(frozen=True)
class TemplateDefinition:
    iri: Iri
    parameters: tuple[Parameter, ...]
    body: tuple[Instance, ...] | None = None  # None = signature-only declaration

    def __init__(self, iri: Iri, parameters, body=None):
        object.__setattr__(self, "iri", iri)
        object.__setattr__(self, "parameters", tuple(parameters))
        object.__setattr__(self, "body", tuple(body) if body is not None else None)

    @property
    def arity(self) -> int:
        return len(self.parameters)

    def param_types(self) -> dict[str, ParamType]:
        return {p.name: p.ptype for p in self.parameters}


BUILTIN_TRIPLE = TemplateDefinition(
    Iri(OTTR_TRIPLE),
    # The predicate of an RDF triple can never be a blank node, so the
    # non-blank flag lets the checker reject blank-capable arguments there.
    (
        Parameter("subject", TOP),
        Parameter("predicate", IRI_TYPE, nonblank=True),
        Parameter("object", TOP),
    ),
)


@dataclass
class Library:
    prefixes: PrefixMap = field(default_factory=PrefixMap)
    templates: dict[str, TemplateDefinition] = field(default_factory=dict)

    def lookup(self, iri_value: str) -> TemplateDefinition | None:
        if iri_value == OTTR_TRIPLE:
            return BUILTIN_TRIPLE
        return self.templates.get(iri_value)

    def sorted_templates(self) -> list[TemplateDefinition]:
        return [self.templates[k] for k in sorted(self.templates)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Library)
            and self.prefixes == other.prefixes
            and self.templates == other.templates
        )


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class ParseFailure(Exception):
    """Raised when a file does not parse; carries every collected diagnostic."""

    def __init__(self, diagnostics: list[ParseDiagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


class _Diag(Exception):
    # Internal: aborts the current statement, caught by the recovery loop.
    def __init__(self, line: int, column: int, message: str):
        super().__init__(message)
        self.diagnostic = ParseDiagnostic(line, column, message)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

def _is_ident_start(c: str) -> bool:
    return c.isalnum() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_" or c == "-"


def _is_var_start(c: str) -> bool:
    return c.isalpha() or c == "_"


@dataclass
class _Token:
    kind: str
    value: str
    line: int
    column: int


_PUNCT = {
    "[": "lbracket",
    "]": "rbracket",
    "(": "lparen",
    ")": "rparen",
    "{": "lbrace",
    "}": "rbrace",
    ",": "comma",
    ".": "dot",
    "|": "pipe",
    "=": "equals",
}

_ESCAPE_MAP = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


class _Lexer:
    """On-demand tokenizer. Inside `List<...>` types the parser raises
    `angle_depth` so that '<' and '>' lex as punctuation, not IRI delimiters."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.column = 1
        self.angle_depth = 0

    def _peek_char(self, offset: int = 0) -> str:
        j = self.pos + offset
        return self.text[j] if j < len(self.text) else ""

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.text):
                if self.text[self.pos] == "\n":
                    self.line += 1
                    self.column = 1
                else:
                    self.column += 1
                self.pos += 1

    def _skip_trivia(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in " \t\r\n":
                self._advance()
            elif c == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance()
            else:
                return

    def next_token(self) -> _Token:
        self._skip_trivia()
        line, col = self.line, self.column
        c = self._peek_char()
        if c == "":
            return _Token("eof", "", line, col)

        if c in _PUNCT:
            self._advance()
            return _Token(_PUNCT[c], c, line, col)

        if c == ":":
            if self._peek_char(1) == ":":
                self._advance(2)
                return _Token("dcolon", "::", line, col)
            self._advance()
            return _Token("colon", ":", line, col)

        if c == "^":
            if self._peek_char(1) == "^":
                self._advance(2)
                return _Token("dcaret", "^^", line, col)
            raise _Diag(line, col, "unexpected character '^'")

        if c == "?":
            nxt = self._peek_char(1)
            if _is_var_start(nxt):
                self._advance()
                return _Token("variable", self._lex_ident(), line, col)
            if nxt == "!":
                self._advance(2)
                return _Token("mod_optbang", "?!", line, col)
            self._advance()
            return _Token("mod_opt", "?", line, col)

        if c == "!":
            if self._peek_char(1) == "?" and not _is_var_start(self._peek_char(2)):
                self._advance(2)
                return _Token("mod_bangopt", "!?", line, col)
            self._advance()
            return _Token("mod_bang", "!", line, col)

        if c == "_" and self._peek_char(1) == ":":
            self._advance(2)
            if not _is_ident_start(self._peek_char()):
                raise _Diag(line, col, "blank node label expected after '_:'")
            return _Token("blank", self._lex_ident(), line, col)

        if c == "<":
            if self.angle_depth > 0:
                self._advance()
                return _Token("lt", "<", line, col)
            return self._lex_iriref(line, col)

        if c == ">":
            if self.angle_depth > 0:
                self._advance()
                return _Token("gt", ">", line, col)
            raise _Diag(line, col, "unexpected character '>'")

        if c == '"':
            return self._lex_string(line, col)

        if c == "@":
            if self.text.startswith("@prefix", self.pos) and not _is_ident_char(self._peek_char(7)):
                self._advance(7)
                return _Token("atprefix", "@prefix", line, col)
            return self._lex_langtag(line, col)

        if _is_ident_start(c):
            return _Token("ident", self._lex_ident(), line, col)

        raise _Diag(line, col, f"unexpected character {c!r}")

    def _lex_ident(self) -> str:
        start = self.pos
        self._advance()
        while _is_ident_char(self._peek_char()):
            self._advance()
        return self.text[start:self.pos]

    def _lex_iriref(self, line: int, col: int) -> _Token:
        self._advance()  # '<'
        chars: list[str] = []
        while True:
            c = self._peek_char()
            if c == ">":
                self._advance()
                return _Token("iriref", "".join(chars), line, col)
            if c == "" or c in " \t\r\n":
                raise _Diag(line, col, "unterminated IRI reference")
            if c in '<"{}|^`':
                raise _Diag(self.line, self.column, f"invalid character {c!r} in IRI reference")
            chars.append(c)
            self._advance()

    def _lex_string(self, line: int, col: int) -> _Token:
        self._advance()  # opening quote
        chars: list[str] = []
        while True:
            c = self._peek_char()
            if c == "" or c == "\n":
                raise _Diag(line, col, "unterminated string literal")
            if c == '"':
                self._advance()
                return _Token("string", "".join(chars), line, col)
            if c == "\\":
                esc = self._peek_char(1)
                if esc not in _ESCAPE_MAP:
                    raise _Diag(self.line, self.column, f"unknown escape sequence '\\{esc}'")
                chars.append(_ESCAPE_MAP[esc])
                self._advance(2)
                continue
            chars.append(c)
            self._advance()

    def _lex_langtag(self, line: int, col: int) -> _Token:
        self._advance()  # '@'
        start = self.pos
        if not self._peek_char().isalpha():
            raise _Diag(line, col, "language tag expected after '@'")
        while self._peek_char().isalpha():
            self._advance()
        while self._peek_char() == "-" and (self._peek_char(1).isalnum()):
            self._advance()
            while self._peek_char().isalnum():
                self._advance()
        return _Token("langtag", self.text[start:self.pos], line, col)

    def skip_to_statement_end(self) -> None:
        """Error recovery: advance past the next '.' outside strings, IRI
        references and comments (or to end of input)."""
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == ".":
                self._advance()
                return
            if c == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance()
            elif c == '"':
                self._advance()
                while self.pos < len(self.text) and self.text[self.pos] not in '"\n':
                    self._advance(2 if self.text[self.pos] == "\\" else 1)
                self._advance()
            elif c == "<" and self.angle_depth == 0:
                self._advance()
                while self.pos < len(self.text) and self.text[self.pos] not in ">\n":
                    self._advance()
                self._advance()
            else:
                self._advance()


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_MODES = ("cross", "zipMin", "zipMax")


class _Parser:
    def __init__(self, text: str, prefixes: PrefixMap | None = None):
        self.lexer = _Lexer(text)
        self.buffer: list[_Token] = []
        self.prefixes = prefixes.copy() if prefixes is not None else PrefixMap()
        self.diagnostics: list[ParseDiagnostic] = []
        self.templates: dict[str, TemplateDefinition] = {}
        self.template_order: list[tuple[str, _Token]] = []
        self.instances: list[Instance] = []
        self.instance_positions: list[_Token] = []

    # token plumbing -------------------------------------------------------

    def _peek(self, k: int = 0) -> _Token:
        while len(self.buffer) <= k:
            self.buffer.append(self.lexer.next_token())
        return self.buffer[k]

    def _next(self) -> _Token:
        tok = self._peek()
        self.buffer.pop(0)
        return tok

    def _expect(self, kind: str, what: str) -> _Token:
        tok = self._next()
        if tok.kind != kind:
            raise _Diag(tok.line, tok.column, f"expected {what}, found {tok.value or 'end of input'!r}")
        return tok

    def _error(self, tok: _Token, message: str) -> _Diag:
        return _Diag(tok.line, tok.column, message)

    # names and terms ------------------------------------------------------

    def _resolve_name(self, label_tok: _Token, local: str) -> Iri:
        label = label_tok.value
        if label not in self.prefixes:
            raise self._error(label_tok, f"unbound prefix {label!r}")
        try:
            return Iri(self.prefixes.namespace(label) + local)
        except ValueError as exc:
            raise self._error(label_tok, str(exc)) from None

    def _parse_name(self) -> Iri:
        tok = self._next()
        if tok.kind == "iriref":
            if not is_absolute_iri(tok.value):
                raise self._error(tok, f"not an absolute IRI: <{tok.value}>")
            return Iri(tok.value)
        if tok.kind != "ident":
            raise self._error(tok, f"expected a name, found {tok.value or 'end of input'!r}")
        self._expect("colon", "':' in prefixed name")
        local_tok = self._expect("ident", "local name")
        return self._resolve_name(tok, local_tok.value)

    def _parse_term(self) -> Term:
        tok = self._peek()
        if tok.kind in ("ident", "iriref"):
            return self._parse_name()
        if tok.kind == "string":
            return self._parse_literal()
        if tok.kind == "blank":
            self._next()
            return Blank(tok.value)
        raise self._error(tok, f"expected a term, found {tok.value or 'end of input'!r}")

    def _parse_literal(self) -> Literal:
        tok = self._expect("string", "string literal")
        nxt = self._peek()
        if nxt.kind == "langtag":
            self._next()
            return Literal(tok.value, language=nxt.value)
        if nxt.kind == "dcaret":
            self._next()
            dt = self._parse_name()
            return Literal(tok.value, datatype=dt.value)
        return Literal(tok.value)

    def _parse_arg(self, var_types: dict[str, ParamType] | None) -> Term:
        tok = self._peek()
        if tok.kind == "variable":
            self._next()
            if var_types is not None and tok.value not in var_types:
                raise self._error(tok, f"variable ?{tok.value} is not a parameter of this template")
            return Variable(tok.value)
        if tok.kind == "ident" and tok.value == "none" and self._peek(1).kind != "colon":
            self._next()
            return NONE
        if tok.kind == "lparen":
            self._next()
            items: list[Term] = []
            if self._peek().kind != "rparen":
                items.append(self._parse_term())
                while self._peek().kind == "comma":
                    self._next()
                    items.append(self._parse_term())
            self._expect("rparen", "')' closing list")
            return ListTerm(items)
        return self._parse_term()

    # parameter types ------------------------------------------------------

    def _parse_ptype(self, depth: int = 0) -> ParamType:
        tok = self._next()
        if tok.kind == "ident" and tok.value == "List" and self._peek_is_angle():
            if depth >= 2:
                raise self._error(tok, "list types may nest at most twice")
            self.lexer.angle_depth += 1
            try:
                self._expect("lt", "'<' after List")
                inner = self._parse_ptype(depth + 1)
                self._expect("gt", "'>' closing List type")
            finally:
                self.lexer.angle_depth -= 1
            return ListType(inner)
        if tok.kind == "iriref":
            if not is_absolute_iri(tok.value):
                raise self._error(tok, f"not an absolute IRI: <{tok.value}>")
            return self._type_for(Iri(tok.value))
        if tok.kind != "ident":
            raise self._error(tok, f"expected a parameter type, found {tok.value!r}")
        self._expect("colon", "':' in type name")
        local_tok = self._expect("ident", "local name")
        return self._type_for(self._resolve_name(tok, local_tok.value))

    def _peek_is_angle(self) -> bool:
        # A '<' immediately after 'List' begins a type argument. Peeking is
        # done on raw text so the '<' is never mis-lexed as an IRI opener.
        if self.buffer:
            return self.buffer[0].kind == "lt"
        self.lexer._skip_trivia()
        return self.lexer._peek_char() == "<"

    @staticmethod
    def _type_for(iri: Iri) -> ParamType:
        if iri.value == OTTR_IRI:
            return IRI_TYPE
        if iri.value == OTTR_TERM:
            return TOP
        return LiteralType(iri.value)

    # statements -----------------------------------------------------------

    def _parse_prefix_decl(self) -> None:
        self._expect("atprefix", "'@prefix'")
        label_tok = self._expect("ident", "prefix label")
        self._expect("colon", "':' after prefix label")
        iri_tok = self._expect("iriref", "namespace IRI")
        if not is_absolute_iri(iri_tok.value):
            raise self._error(iri_tok, f"namespace is not an absolute IRI: <{iri_tok.value}>")
        self._expect("dot", "'.' ending @prefix")
        try:
            self.prefixes.bind(label_tok.value, iri_tok.value)
        except PrefixConflict as exc:
            raise self._error(label_tok, str(exc)) from None

    def _parse_param(self) -> Parameter:
        optional = nonblank = False
        tok = self._peek()
        if tok.kind == "mod_opt":
            self._next()
            optional = True
        elif tok.kind == "mod_bang":
            self._next()
            nonblank = True
        elif tok.kind in ("mod_optbang", "mod_bangopt"):
            self._next()
            optional = nonblank = True

        ptype: ParamType = TOP
        if self._peek().kind in ("ident", "iriref"):
            ptype = self._parse_ptype()

        var_tok = self._expect("variable", "parameter variable")
        default: Term | None = None
        if self._peek().kind == "equals":
            self._next()
            default = self._parse_term()
        return Parameter(var_tok.value, ptype, optional, nonblank, default)

    def _parse_instance(self, var_types: dict[str, ParamType] | None) -> Instance:
        mode: str | None = None
        tok = self._peek()
        if tok.kind == "ident" and tok.value in _MODES and self._peek(1).kind == "pipe":
            self._next()
            self._next()
            mode = tok.value
        head_tok = self._peek()
        template = self._parse_name()
        self._expect("lparen", "'(' opening argument list")
        args: list[Term] = []
        if self._peek().kind != "rparen":
            args.append(self._parse_arg(var_types))
            while self._peek().kind == "comma":
                self._next()
                args.append(self._parse_arg(var_types))
        self._expect("rparen", "')' closing argument list")

        if mode is not None and not _has_expandable_arg(args, var_types):
            raise self._error(head_tok, f"'{mode}' requires at least one list-valued argument")
        return Instance(template, args, mode)

    def _parse_template_def(self, head: Iri, head_tok: _Token) -> None:
        self._expect("lbracket", "'[' opening parameter list")
        params: list[Parameter] = []
        if self._peek().kind != "rbracket":
            params.append(self._parse_param())
            while self._peek().kind == "comma":
                self._next()
                params.append(self._parse_param())
        self._expect("rbracket", "']' closing parameter list")

        body: list[Instance] | None = None
        if self._peek().kind == "dcolon":
            self._next()
            self._expect("lbrace", "'{' opening template body")
            body = []
            var_types = {p.name: p.ptype for p in params}
            if self._peek().kind != "rbrace":
                body.append(self._parse_instance(var_types))
                while self._peek().kind == "comma":
                    self._next()
                    body.append(self._parse_instance(var_types))
            self._expect("rbrace", "'}' closing template body")
        self._expect("dot", "'.' ending template definition")

        if head.value == OTTR_TRIPLE:
            raise self._error(head_tok, "ottr:Triple is built in and must not be redefined")
        if head.value in self.templates:
            raise self._error(head_tok, f"duplicate template definition for {head.value}")
        self.templates[head.value] = TemplateDefinition(head, params, body)
        self.template_order.append((head.value, head_tok))

    def parse_file(self) -> None:
        while True:
            try:
                tok = self._peek()
                if tok.kind == "eof":
                    return
                if tok.kind == "atprefix":
                    self._parse_prefix_decl()
                elif tok.kind == "ident" and tok.value in _MODES and self._peek(1).kind == "pipe":
                    inst = self._parse_instance(None)
                    self._expect("dot", "'.' ending instance")
                    self.instances.append(inst)
                    self.instance_positions.append(tok)
                elif tok.kind in ("ident", "iriref"):
                    head_tok = tok
                    head = self._parse_name()
                    nxt = self._peek()
                    if nxt.kind == "lbracket":
                        self._parse_template_def(head, head_tok)
                    elif nxt.kind == "lparen":
                        inst = self._finish_instance_args(head)
                        self._expect("dot", "'.' ending instance")
                        self.instances.append(inst)
                        self.instance_positions.append(head_tok)
                    else:
                        raise self._error(nxt, f"expected '[' or '(' after name, found {nxt.value or 'end of input'!r}")
                else:
                    raise self._error(tok, f"expected a statement, found {tok.value or 'end of input'!r}")
            except _Diag as exc:
                self.diagnostics.append(exc.diagnostic)
                self.buffer.clear()
                self.lexer.angle_depth = 0
                self.lexer.skip_to_statement_end()

    def _finish_instance_args(self, head: Iri) -> Instance:
        self._expect("lparen", "'(' opening argument list")
        args: list[Term] = []
        if self._peek().kind != "rparen":
            args.append(self._parse_arg(None))
            while self._peek().kind == "comma":
                self._next()
                args.append(self._parse_arg(None))
        self._expect("rparen", "')' closing argument list")
        return Instance(head, args, None)


def _has_expandable_arg(args: list[Term], var_types: dict[str, ParamType] | None) -> bool:
    for arg in args:
        if isinstance(arg, ListTerm):
            return True
        if (
            isinstance(arg, Variable)
            and var_types is not None
            and isinstance(var_types.get(arg.name), ListType)
        ):
            return True
    return False


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def parse_library(text: str) -> Library:
    """Parse a template library. Raises ParseFailure carrying one diagnostic
    per problem; a failed parse never returns a partial library."""
    parser = _Parser(text)
    parser.parse_file()
    for tok in parser.instance_positions:
        parser.diagnostics.append(
            ParseDiagnostic(tok.line, tok.column, "instance statement not allowed in a template library")
        )
    if parser.diagnostics:
        raise ParseFailure(sorted(parser.diagnostics, key=lambda d: (d.line, d.column)))
    return Library(parser.prefixes, parser.templates)


def parse_instances(text: str, library: Library | None = None) -> list[Instance]:
    """Parse an instance file. Prefixes from `library` are in scope and the
    file may declare additional ones."""
    parser = _Parser(text, library.prefixes if library is not None else None)
    parser.parse_file()
    for name, tok in parser.template_order:
        parser.diagnostics.append(
            ParseDiagnostic(tok.line, tok.column, "template definition not allowed in an instance file")
        )
    if parser.diagnostics:
        raise ParseFailure(sorted(parser.diagnostics, key=lambda d: (d.line, d.column)))
    return parser.instances


def parse_term_string(text: str, prefixes: PrefixMap) -> Term:
    """Parse one argument term (`none`, lists and variables included)."""
    parser = _Parser(text, prefixes)
    try:
        term = parser._parse_arg(None)
        tail = parser._peek()
    except _Diag as exc:
        raise ParseFailure([exc.diagnostic]) from None
    if tail.kind != "eof":
        raise ParseFailure([ParseDiagnostic(tail.line, tail.column, f"unexpected trailing input {tail.value!r}")])
    return term


def parse_ptype_string(text: str, prefixes: PrefixMap) -> ParamType:
    parser = _Parser(text, prefixes)
    try:
        ptype = parser._parse_ptype()
        tail = parser._peek()
    except _Diag as exc:
        raise ParseFailure([exc.diagnostic]) from None
    if tail.kind != "eof":
        raise ParseFailure([ParseDiagnostic(tail.line, tail.column, f"unexpected trailing input {tail.value!r}")])
    return ptype


# ---------------------------------------------------------------------------
# Serializer
# ---------------------------------------------------------------------------

def term_to_stottr(term: Term, prefixes: PrefixMap | None = None) -> str:
    if isinstance(term, Iri):
        return compact_iri(term, prefixes)
    if isinstance(term, Literal):
        body = f'"{escape_literal(term.lexical)}"'
        if term.language is not None:
            return f"{body}@{term.language}"
        if term.datatype == XSD_STRING:
            return body
        return f"{body}^^{compact_iri(Iri(term.datatype), prefixes)}"
    if isinstance(term, Blank):
        return f"_:{term.label}"
    if isinstance(term, Variable):
        return f"?{term.name}"
    if isinstance(term, NoneTerm):
        return "none"
    if isinstance(term, ListTerm):
        return "(" + ", ".join(term_to_stottr(t, prefixes) for t in term.items) + ")"
    raise ValueError(f"unserializable term: {term!r}")


def ptype_to_stottr(ptype: ParamType, prefixes: PrefixMap | None = None) -> str:
    if isinstance(ptype, TopType):
        return compact_iri(Iri(OTTR_TERM), prefixes)
    if isinstance(ptype, IriType):
        return compact_iri(Iri(OTTR_IRI), prefixes)
    if isinstance(ptype, LiteralType):
        return compact_iri(Iri(ptype.datatype), prefixes)
    return f"List<{ptype_to_stottr(ptype.element, prefixes)}>"


def _param_to_stottr(param: Parameter, prefixes: PrefixMap) -> str:
    parts = []
    if param.optional and param.nonblank:
        parts.append("?!")
    elif param.optional:
        parts.append("?")
    elif param.nonblank:
        parts.append("!")
    if not isinstance(param.ptype, TopType):
        parts.append(ptype_to_stottr(param.ptype, prefixes))
    parts.append(f"?{param.name}")
    out = " ".join(parts)
    if param.default is not None:
        out += f" = {term_to_stottr(param.default, prefixes)}"
    return out


def instance_to_stottr(inst: Instance, prefixes: PrefixMap | None = None) -> str:
    head = compact_iri(inst.template, prefixes)
    args = ", ".join(term_to_stottr(a, prefixes) for a in inst.arguments)
    text = f"{head}({args})"
    if inst.expansion is not None:
        text = f"{inst.expansion} | {text}"
    return text


def serialize_library(library: Library) -> str:
    """Deterministic text form: prefixes sorted by label, templates by IRI."""
    lines = [f"@prefix {label}: <{ns}> ." for label, ns in library.prefixes.items()]
    if lines:
        lines.append("")
    for tdef in library.sorted_templates():
        head = compact_iri(tdef.iri, library.prefixes)
        params = ", ".join(_param_to_stottr(p, library.prefixes) for p in tdef.parameters)
        if tdef.body is None:
            lines.append(f"{head}[{params}] .")
        elif not tdef.body:
            lines.append(f"{head}[{params}] :: {{ }} .")
        else:
            body = ",\n".join(f"  {instance_to_stottr(i, library.prefixes)}" for i in tdef.body)
            lines.append(f"{head}[{params}] :: {{\n{body}\n}} .")
        lines.append("")
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + ("\n" if lines else "")


def serialize_instances(instances: list[Instance], prefixes: PrefixMap | None = None) -> str:
    lines = []
    if prefixes is not None:
        lines.extend(f"@prefix {label}: <{ns}> ." for label, ns in prefixes.items())
        if lines:
            lines.append("")
    lines.extend(f"{instance_to_stottr(i, prefixes)} ." for i in instances)
    return "\n".join(lines) + ("\n" if lines else "")


def instance_sort_key(inst: Instance) -> str:
    return instance_to_stottr(inst, None)


def to_turtle(graph: TripleGraph, prefixes: PrefixMap) -> str:
    """Line-oriented Turtle: prefix header plus one sorted triple per line."""
    lines = [f"@prefix {label}: <{ns}> ." for label, ns in prefixes.items()]
    if lines:
        lines.append("")
    for t in sorted(graph, key=triple_sort_key):
        s = term_to_stottr(t.subject, prefixes)
        p = term_to_stottr(t.predicate, prefixes)
        o = term_to_stottr(t.object, prefixes)
        lines.append(f"{s} {p} {o} .")
    return "\n".join(lines) + ("\n" if lines else "")
