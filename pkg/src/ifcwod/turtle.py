"""Turtle and N-Triples serialization and parsing.

Output is deterministic: triples are ordered by the N-Triples form of subject,
predicate and object. Turtle output groups predicates per subject with ``;``
but uses no other abbreviation. The parser accepts the common Turtle subset
(prefixes, base, ``a``, ``;``/``,`` lists, numeric and boolean shorthand,
``[...]`` blank nodes) but rejects collections.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from urllib.parse import urljoin

from .rdf import (
    IRI, BNode, Literal, Graph, RdfError, RDF_TYPE, XSD, XSD_STRING, make_triple,
    sorted_triples, group_by_subject,
)

FORMATS = ("turtle", "ntriples")

XSD_INTEGER = XSD.integer
XSD_DECIMAL = XSD.decimal
XSD_DOUBLE = XSD.double
XSD_BOOLEAN = XSD.boolean


class RdfSyntaxError(RdfError):
    def __init__(self, message, line=None, col=None):
        self.line, self.col = line, col
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(f"{message}{where}")


# --- lexer ---------------------------------------------------------------

@dataclass
class Token:
    kind: str
    value: object
    pos: int
    line: int = 0
    col: int = 0


_PN_CHAR = r"(?:[\w\-]|%[0-9A-Fa-f]{2}|\\[_~.\-!$&'()*+,;=/?#@%])"
_PN_LOCAL = rf"(?:(?:{_PN_CHAR}|:)(?:(?:{_PN_CHAR}|[.:])*(?:{_PN_CHAR}|:))?)"
_PN_PREFIX = r"(?:[^\W\d_](?:[\w.\-]*[\w\-])?)"

_TOKEN_SPECS = [
    ("WS", r"[ \t\r\n]+"),
    ("COMMENT", r"#[^\r\n]*"),
    ("IRIREF", r"<[^<>\"{}|^`\\\x00-\x20]*(?:\\[uU][0-9A-Fa-f]+[^<>\"{}|^`\\\x00-\x20]*)*>"),
    ("STRING", r'"""(?:[^"\\]|\\.|"(?!""))*"""' r"|'''(?:[^'\\]|\\.|'(?!''))*'''"
               r'|"(?:[^"\\\r\n]|\\.)*"' r"|'(?:[^'\\\r\n]|\\.)*'"),
    ("BLANK", r"_:[\w](?:[\w.\-]*[\w\-])?"),
    ("VAR", r"[?$][A-Za-z_][A-Za-z0-9_]*"),
    ("LANGTAG", r"@[A-Za-z]+(?:-[A-Za-z0-9]+)*"),
    ("DOUBLE", r"[+-]?(?:\d+\.\d*[eE][+-]?\d+|\.\d+[eE][+-]?\d+|\d+[eE][+-]?\d+)"),
    ("DECIMAL", r"[+-]?\d*\.\d+"),
    ("INTEGER", r"[+-]?\d+"),
    ("PNAME", rf"{_PN_PREFIX}?:{_PN_LOCAL}?"),
    ("NAME", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("OP", r"\^\^|&&|\|\||!=|<=|>=|[.;,\[\](){}=<>!*+/|^\-]"),
]
_LEXER = re.compile("|".join(f"(?P<{k}>{v})" for k, v in _TOKEN_SPECS))

_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(raw, pos_of):
    out, i = [], 0
    while i < len(raw):
        c = raw[i]
        if c != "\\":
            out.append(c)
            i += 1
            continue
        nxt = raw[i + 1:i + 2]
        if nxt in _ESCAPES:
            out.append(_ESCAPES[nxt])
            i += 2
        elif nxt in ("u", "U"):
            n = 4 if nxt == "u" else 8
            hexs = raw[i + 2:i + 2 + n]
            if not re.fullmatch(r"[0-9A-Fa-f]{%d}" % n, hexs):
                raise RdfSyntaxError(f"bad \\{nxt} escape", *pos_of(i))
            out.append(chr(int(hexs, 16)))
            i += 2 + n
        else:
            raise RdfSyntaxError(f"unknown escape \\{nxt}", *pos_of(i))
    return "".join(out)


_PN_ESC = re.compile(r"\\([_~.\-!$&'()*+,;=/?#@%])")


def tokenize(text: str):
    """Yield tokens; raises RdfSyntaxError with line/column on junk."""
    starts = [0] + [m.end() for m in re.finditer(r"\n", text)]

    def where(pos):
        ln = bisect.bisect_right(starts, pos)
        return ln, pos - starts[ln - 1] + 1

    pos, n = 0, len(text)
    while pos < n:
        m = _LEXER.match(text, pos)
        if not m:
            raise RdfSyntaxError(f"unexpected character {text[pos]!r}", *where(pos))
        kind, raw = m.lastgroup, m.group()
        if kind in ("WS", "COMMENT"):
            pos = m.end()
            continue
        line, col = where(pos)
        if kind == "IRIREF":
            value = _unescape(raw[1:-1], lambda i: (line, col))
        elif kind == "STRING":
            q = 3 if raw[:3] in ('"""', "'''") else 1
            value = _unescape(raw[q:-q], lambda i: (line, col + q + i))
        elif kind == "PNAME":
            prefix, _, local = raw.partition(":")
            value = (prefix, _PN_ESC.sub(r"\1", local))
        elif kind == "BLANK":
            value = raw[2:]
        elif kind == "LANGTAG":
            value = raw[1:]
        elif kind == "VAR":
            value = raw[1:]
        else:
            value = raw
        yield Token(kind, value, pos, line, col)
        pos = m.end()


class TokenStream:
    def __init__(self, text):
        self.tokens = list(tokenize(text))
        self.i = 0
        lines = text.split("\n")
        self._end = (len(lines), len(lines[-1]) + 1)

    def peek(self, k=0):
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise RdfSyntaxError("unexpected end of input", *self._end)
        self.i += 1
        return tok

    def at(self, kind, value=None, k=0):
        tok = self.peek(k)
        return tok is not None and tok.kind == kind and (value is None or tok.value == value)

    def at_keyword(self, word):
        tok = self.peek()
        return tok is not None and tok.kind == "NAME" and tok.value.upper() == word

    def expect(self, kind, value=None, what=None):
        tok = self.peek()
        if tok is None or tok.kind != kind or (value is not None and tok.value != value):
            self.fail(f"expected {what or value or kind}")
        return self.next()

    def fail(self, message):
        tok = self.peek()
        if tok is None:
            raise RdfSyntaxError(message + ", got end of input", *self._end)
        raise RdfSyntaxError(f"{message}, got {tok.kind} {tok.value!r}", tok.line, tok.col)

    def done(self):
        return self.i >= len(self.tokens)


def literal_from_token(tok: Token):
    if tok.kind == "INTEGER":
        return Literal(tok.value, XSD_INTEGER)
    if tok.kind == "DECIMAL":
        return Literal(tok.value, XSD_DECIMAL)
    if tok.kind == "DOUBLE":
        return Literal(tok.value, XSD_DOUBLE)
    if tok.kind == "NAME" and tok.value in ("true", "false"):
        return Literal(tok.value, XSD_BOOLEAN)
    return None


def read_literal_tail(ts: TokenStream, lexical: str, resolve_iri):
    """After a STRING token: optional @lang or ^^datatype."""
    if ts.at("LANGTAG"):
        tok = ts.next()
        try:
            return Literal(lexical, lang=tok.value)
        except RdfError as e:
            raise RdfSyntaxError(str(e), tok.line, tok.col) from None
    if ts.at("OP", "^^"):
        ts.next()
        return Literal(lexical, resolve_iri(ts.next()))
    return Literal(lexical)


# --- serialization -------------------------------------------------------

def _escape(s: str, ascii_only: bool) -> str:
    out = []
    for ch in s:
        o = ord(ch)
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif o < 0x20 or o == 0x7F:
            out.append(f"\\u{o:04X}")
        elif o > 0x7E and ascii_only:
            out.append(f"\\u{o:04X}" if o <= 0xFFFF else f"\\U{o:08X}")
        else:
            out.append(ch)
    return "".join(out)


def _escape_iri(s: str, ascii_only: bool) -> str:
    out = []
    for ch in s:
        o = ord(ch)
        if o <= 0x20 or ch in '<>"{}|^`\\' or (o > 0x7E and ascii_only):
            out.append(f"\\u{o:04X}" if o <= 0xFFFF else f"\\U{o:08X}")
        else:
            out.append(ch)
    return "".join(out)


def nt_term(t) -> str:
    if isinstance(t, IRI):
        return "<" + _escape_iri(t.value, True) + ">"
    if isinstance(t, BNode):
        return "_:" + t.id
    s = '"' + _escape(t.lexical, True) + '"'
    if t.lang:
        return s + "@" + t.lang
    return s + "^^" + nt_term(t.datatype)


_SAFE_LOCAL = re.compile(r"^(?:[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)?$")


class _Abbreviator:
    def __init__(self, prefixes):
        # longest namespace first, then smallest prefix name
        self.items = sorted(prefixes.items(), key=lambda kv: (-len(kv[1]), kv[0]))

    def __call__(self, iri: IRI) -> str:
        for prefix, ns in self.items:
            if iri.value.startswith(ns):
                local = iri.value[len(ns):]
                if _SAFE_LOCAL.match(local):
                    return f"{prefix}:{local}"
        return "<" + _escape_iri(iri.value, False) + ">"


def _ttl_term(t, abbrev) -> str:
    if isinstance(t, IRI):
        return abbrev(t)
    if isinstance(t, BNode):
        return "_:" + t.id
    s = '"' + _escape(t.lexical, False) + '"'
    if t.lang:
        return s + "@" + t.lang
    return s + "^^" + abbrev(t.datatype)


def serialize(graph: Graph, format: str = "turtle") -> str:
    if format == "ntriples":
        return "".join(f"{nt_term(s)} {nt_term(p)} {nt_term(o)} .\n" for s, p, o in sorted_triples(graph))
    if format != "turtle":
        raise ValueError(f"unknown format {format!r}")
    abbrev = _Abbreviator(graph.prefixes)
    lines = [f"@prefix {p}: <{_escape_iri(ns, False)}> ." for p, ns in sorted(graph.prefixes.items())]
    if lines and graph.triples:
        lines.append("")
    for subject, group in group_by_subject(sorted_triples(graph)):
        group = list(group)
        parts = []
        for _, p, o in group:
            pred = "a" if p == RDF_TYPE else abbrev(p)
            parts.append(f"{pred} {_ttl_term(o, abbrev)}")
        head = _ttl_term(subject, abbrev)
        lines.append(f"{head} " + " ;\n    ".join(parts) + " .")
    return "\n".join(lines) + ("\n" if lines else "")


# --- parsing -------------------------------------------------------------

class _TurtleParser:
    def __init__(self, text):
        self.ts = TokenStream(text)
        self.graph = Graph()
        self.base = None
        self.anon = 0

    def iri(self, tok):
        if tok.kind == "IRIREF":
            value = tok.value
            if self.base is not None:
                value = urljoin(self.base, value)
            try:
                return IRI(value)
            except RdfError:
                raise RdfSyntaxError(f"relative IRI <{tok.value}> with no base", tok.line, tok.col) from None
        if tok.kind == "PNAME":
            prefix, local = tok.value
            if prefix not in self.graph.prefixes:
                raise RdfSyntaxError(f"undeclared prefix {prefix!r}", tok.line, tok.col)
            return IRI(self.graph.prefixes[prefix] + local)
        raise RdfSyntaxError(f"expected IRI, got {tok.kind} {tok.value!r}", tok.line, tok.col)

    def parse(self):
        ts = self.ts
        while not ts.done():
            if ts.at("LANGTAG", "prefix") or ts.at_keyword("PREFIX"):
                sparql_style = ts.next().kind == "NAME"
                tok = ts.expect("PNAME", what="prefix name")
                if tok.value[1]:
                    raise RdfSyntaxError("prefix declaration must end with ':'", tok.line, tok.col)
                ns = self.iri(ts.expect("IRIREF"))
                self.graph.bind(tok.value[0], ns.value)
                if not sparql_style:
                    ts.expect("OP", ".")
            elif ts.at("LANGTAG", "base") or ts.at_keyword("BASE"):
                sparql_style = ts.next().kind == "NAME"
                self.base = self.iri(ts.expect("IRIREF")).value
                if not sparql_style:
                    ts.expect("OP", ".")
            else:
                self.triples()
                ts.expect("OP", ".", "'.' at end of statement")
        return self.graph

    def fresh(self):
        self.anon += 1
        return BNode(f"anon{self.anon}")

    def subject(self):
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "BLANK":
            ts.next()
            return BNode(tok.value), False
        if ts.at("OP", "["):
            return self.blank_property_list(), True
        if ts.at("OP", "("):
            ts.fail("collections are not supported")
        return self.iri(ts.next()), False

    def blank_property_list(self):
        ts = self.ts
        ts.expect("OP", "[")
        node = self.fresh()
        if not ts.at("OP", "]"):
            self.predicate_object_list(node)
        ts.expect("OP", "]")
        return node

    def triples(self):
        subj, was_anon = self.subject()
        if was_anon and self.ts.at("OP", "."):
            return
        self.predicate_object_list(subj)

    def predicate_object_list(self, subj):
        ts = self.ts
        while True:
            tok = ts.next()
            pred = RDF_TYPE if (tok.kind == "NAME" and tok.value == "a") else self.iri(tok)
            while True:
                self.graph.add(subj, pred, self.object())
                if not ts.at("OP", ","):
                    break
                ts.next()
            if not ts.at("OP", ";"):
                return
            while ts.at("OP", ";"):
                ts.next()
            if ts.at("OP", ".") or ts.at("OP", "]") or ts.done():
                return

    def object(self):
        ts = self.ts
        tok = ts.peek()
        if tok is None:
            ts.fail("expected object")
        if tok.kind == "STRING":
            ts.next()
            return read_literal_tail(ts, tok.value, lambda t: self.iri(t))
        lit = literal_from_token(tok)
        if lit is not None:
            ts.next()
            return lit
        if tok.kind == "BLANK":
            ts.next()
            return BNode(tok.value)
        if ts.at("OP", "["):
            return self.blank_property_list()
        if ts.at("OP", "("):
            ts.fail("collections are not supported")
        return self.iri(ts.next())


def _parse_ntriples(text: str) -> Graph:
    g = Graph()
    for lineno, line in enumerate(text.split("\n"), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            toks = list(tokenize(line))
        except RdfSyntaxError as e:
            raise RdfSyntaxError(str(e).split(" at line")[0], lineno, e.col) from None

        def bad(msg, tok=None):
            return RdfSyntaxError(msg, lineno, tok.col if tok else len(line) + 1)

        it = iter(toks)

        def nxt(what):
            tok = next(it, None)
            if tok is None:
                raise bad(f"expected {what}")
            return tok

        def term(tok, allowed):
            if tok.kind == "IRIREF" and "iri" in allowed:
                try:
                    return IRI(tok.value)
                except RdfError as e:
                    raise bad(str(e), tok) from None
            if tok.kind == "BLANK" and "blank" in allowed:
                return BNode(tok.value)
            raise bad(f"unexpected {tok.kind} {tok.value!r}", tok)

        s = term(nxt("subject"), ("iri", "blank"))
        p = term(nxt("predicate"), ("iri",))
        tok = nxt("object")
        if tok.kind == "STRING":
            o = Literal(tok.value)
            tok = nxt("'.'")
            if tok.kind == "LANGTAG":
                o = Literal(o.lexical, lang=tok.value)
                tok = nxt("'.'")
            elif tok.kind == "OP" and tok.value == "^^":
                dt = nxt("datatype IRI")
                if dt.kind != "IRIREF":
                    raise bad("datatype must be an IRI", dt)
                o = Literal(o.lexical, IRI(dt.value))
                tok = nxt("'.'")
        else:
            o = term(tok, ("iri", "blank"))
            tok = nxt("'.'")
        if not (tok.kind == "OP" and tok.value == "."):
            raise bad("expected '.'", tok)
        extra = next(it, None)
        if extra is not None:
            raise bad("trailing content after '.'", extra)
        g.triples.add(make_triple(s, p, o))
    return g


def parse(text: str, format: str = "turtle") -> Graph:
    if format == "ntriples":
        return _parse_ntriples(text)
    if format != "turtle":
        raise ValueError(f"unknown format {format!r}")
    return _TurtleParser(text).parse()


def format_for_path(path) -> str:
    return "ntriples" if str(path).endswith(".nt") else "turtle"
