"""A parser for the subset of EXPRESS (ISO 10303-11) that IFC entity
declarations use: supertypes, explicit attributes, OPTIONAL flags,
aggregations and INVERSE clauses.

DERIVE, UNIQUE and WHERE clauses are skipped but recorded, and FUNCTION,
RULE, PROCEDURE and CONSTANT blocks are skipped whole.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .rdf import lower_first


class ExpressSyntaxError(ValueError):
    def __init__(self, message, line=None, col=None):
        self.line, self.col = line, col
        super().__init__(f"{message} (line {line}, column {col})" if line else message)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "warning" | "error"
    message: str
    line: Optional[int] = None

    def __str__(self):
        loc = f"line {self.line}: " if self.line else ""
        return f"{self.severity}: {loc}{self.message}"


@dataclass(frozen=True)
class Aggregation:
    kind: str  # set | list | bag | array
    low: object = None
    high: object = None  # None means unbounded ("?")

    def __post_init__(self):
        if isinstance(self.low, int) and isinstance(self.high, int) and self.low > self.high:
            raise ValueError(f"aggregation bounds [{self.low}:{self.high}] have low > high")


@dataclass
class AttributeDef:
    name: str
    type_name: str
    is_optional: bool = False
    aggregation: tuple = ()  # outermost first; empty when scalar

    @property
    def is_aggregate(self):
        return bool(self.aggregation)

    @property
    def is_ordered(self):
        return bool(self.aggregation) and self.aggregation[0].kind in ("list", "array")


@dataclass
class InverseAttributeDef:
    name: str
    relationship_entity: str
    for_attribute: str
    aggregation: tuple = ()


@dataclass
class SkippedSpan:
    kind: str
    start_line: int
    end_line: int


@dataclass
class EntityDef:
    name: str
    is_abstract: bool = False
    supertypes: list = field(default_factory=list)
    attributes: list = field(default_factory=list)
    inverses: list = field(default_factory=list)
    redeclared: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    line: int = 0


@dataclass
class ExpressSchema:
    name: Optional[str] = None
    entities: dict = field(default_factory=dict)
    selects: dict = field(default_factory=dict)
    enumerations: dict = field(default_factory=dict)
    types: dict = field(default_factory=dict)  # defined type -> underlying base type
    diagnostics: list = field(default_factory=list)
    unresolved: set = field(default_factory=set)
    skipped: list = field(default_factory=list)

    def __post_init__(self):
        self._index = {}
        for kind in ("entities", "selects", "enumerations", "types"):
            for k in getattr(self, kind):
                self._index.setdefault(k.upper(), k)

    def canonical(self, name: str) -> Optional[str]:
        """Declared spelling of a name looked up case-insensitively."""
        return self._index.get(name.upper())

    def entity(self, name: str) -> Optional[EntityDef]:
        key = self.canonical(name)
        return self.entities.get(key) if key else None

    def is_select(self, name):
        key = self.canonical(name)
        return key in self.selects

    def is_enumeration(self, name):
        key = self.canonical(name)
        return key in self.enumerations

    def knows(self, name):
        return self.canonical(name) is not None


# --- tokens --------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\(\*.*?\*\))
  | (?P<linecomment>--[^\n]*)
  | (?P<string>'(?:[^']|'')*')
  | (?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><\*|:=:|:<>:|<>|<=|>=|\|\||[;:()\[\],=?\\.<>*+\-/|{}])
""", re.VERBOSE | re.DOTALL)

_SECTIONS = {"INVERSE", "DERIVE", "UNIQUE", "WHERE", "END_ENTITY"}
_SKIP_BLOCKS = {"FUNCTION": "END_FUNCTION", "RULE": "END_RULE",
                "PROCEDURE": "END_PROCEDURE", "CONSTANT": "END_CONSTANT"}
_AGGREGATES = {"SET", "LIST", "BAG", "ARRAY"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int

    @property
    def upper(self):
        return self.text.upper()


def _tokenize(text):
    toks, pos, line, line_start = [], 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m and m.lastgroup == "op" and text.startswith("(*", pos):
            raise ExpressSyntaxError("unterminated comment", line, pos - line_start + 1)
        if not m:
            if text[pos] == "'":
                raise ExpressSyntaxError("unterminated string", line, pos - line_start + 1)
            raise ExpressSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment", "linecomment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0
        self.schema = ExpressSchema()

    # token helpers
    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else _Tok("eof", "", 1, 1)
            raise ExpressSyntaxError("unexpected end of input", last.line, last.col)
        self.i += 1
        return tok

    def at(self, word):
        tok = self.peek()
        return tok is not None and tok.upper == word

    def expect(self, text):
        tok = self.next()
        if tok.upper != text.upper():
            raise ExpressSyntaxError(f"expected {text!r}, got {tok.text!r}", tok.line, tok.col)
        return tok

    def ident(self):
        tok = self.next()
        if tok.kind != "ident":
            raise ExpressSyntaxError(f"expected identifier, got {tok.text!r}", tok.line, tok.col)
        return tok.text

    def skip_balanced(self):
        depth = 0
        while True:
            tok = self.next()
            if tok.text == "(":
                depth += 1
            elif tok.text == ")":
                depth -= 1
                if depth == 0:
                    return

    def warn(self, message, line=None):
        self.schema.diagnostics.append(Diagnostic("warning", message, line))

    # grammar
    def parse(self):
        s = self.schema
        while self.peek() is not None:
            tok = self.peek()
            word = tok.upper
            if word == "SCHEMA":
                self.next()
                s.name = self.ident()
            elif word == "ENTITY":
                self.entity()
            elif word == "TYPE":
                self.type_decl()
            elif word in _SKIP_BLOCKS:
                self.skip_block(word, _SKIP_BLOCKS[word])
            elif word in ("END_ENTITY", "END_TYPE"):
                raise ExpressSyntaxError(f"{tok.text} without matching opener", tok.line, tok.col)
            else:
                self.next()
        return s

    def skip_block(self, opener, closer):
        start = self.next()
        depth = 1
        while depth:
            tok = self.peek()
            if tok is None:
                raise ExpressSyntaxError(f"unbalanced {opener}: missing {closer}", start.line, start.col)
            self.next()
            if tok.upper == opener:
                depth += 1
            elif tok.upper == closer:
                depth -= 1
        self.schema.skipped.append(SkippedSpan(opener, start.line, tok.line))

    def entity(self):
        start = self.expect("ENTITY")
        e = EntityDef(self.ident(), line=start.line)
        # header: ABSTRACT / SUPERTYPE OF (...) / SUBTYPE OF (...)
        while not self.at(";"):
            tok = self.next()
            word = tok.upper
            if word == "ABSTRACT":
                e.is_abstract = True
            elif word == "SUPERTYPE":
                if self.at("OF"):
                    self.next()
                    self.skip_balanced()
            elif word == "SUBTYPE":
                self.expect("OF")
                self.expect("(")
                while True:
                    e.supertypes.append(self.ident())
                    sep = self.next()
                    if sep.text == ")":
                        break
                    if sep.text != ",":
                        raise ExpressSyntaxError(f"expected ',' or ')', got {sep.text!r}", sep.line, sep.col)
            elif word in ("ENTITY", "END_ENTITY"):
                raise ExpressSyntaxError(f"unbalanced ENTITY {e.name}", start.line, start.col)
            else:
                raise ExpressSyntaxError(f"unexpected {tok.text!r} in entity header", tok.line, tok.col)
        self.expect(";")

        section = "explicit"
        while True:
            tok = self.peek()
            if tok is None or tok.upper in ("ENTITY", "TYPE", "END_SCHEMA"):
                raise ExpressSyntaxError(f"unbalanced ENTITY {e.name}: missing END_ENTITY",
                                         start.line, start.col)
            word = tok.upper
            if word == "END_ENTITY":
                self.next()
                self.expect(";")
                break
            if word == "INVERSE":
                self.next()
                section = "inverse"
                continue
            if word in ("DERIVE", "UNIQUE", "WHERE"):
                self.skip_section(e, word)
                continue
            if section == "explicit":
                self.explicit_attribute(e)
            else:
                self.inverse_attribute(e)
        if self.schema.canonical(e.name) in self.schema.entities:
            self.schema.diagnostics.append(Diagnostic("error", f"duplicate entity {e.name}", start.line))
            return
        self.schema.entities[e.name] = e
        self.schema._index.setdefault(e.name.upper(), e.name)

    def skip_section(self, e, word):
        start = self.next()
        end = start
        depth = 0
        while True:
            tok = self.peek()
            if tok is None:
                raise ExpressSyntaxError(f"unbalanced ENTITY {e.name}: missing END_ENTITY", start.line, start.col)
            if depth == 0 and tok.upper in _SECTIONS:
                break
            if tok.upper in ("ENTITY", "TYPE"):
                raise ExpressSyntaxError(f"unbalanced ENTITY {e.name}: missing END_ENTITY", e.line, 1)
            if tok.text == "(":
                depth += 1
            elif tok.text == ")":
                depth -= 1
            end = self.next()
        e.skipped.append(SkippedSpan(word, start.line, end.line))

    def attribute_names(self):
        names = []
        while True:
            if self.at("SELF"):
                # SELF\Supertype.Attr redeclaration
                self.next()
                self.expect("\\")
                self.ident()
                self.expect(".")
                names.append(("redeclared", self.ident()))
            else:
                names.append(("new", self.ident()))
            tok = self.next()
            if tok.text == ":":
                return names
            if tok.text != ",":
                raise ExpressSyntaxError(f"expected ':' or ',', got {tok.text!r}", tok.line, tok.col)

    def type_expr(self):
        aggs, optional = [], False
        while True:
            tok = self.peek()
            if tok is None:
                self.next()
            word = tok.upper
            if word in ("OPTIONAL", "UNIQUE", "GENERIC"):
                optional = optional or word == "OPTIONAL"
                self.next()
                continue
            if word in _AGGREGATES:
                self.next()
                low = high = None
                if self.at("["):
                    self.next()
                    low = self.bound()
                    self.expect(":")
                    high = self.bound()
                    self.expect("]")
                self.expect("OF")
                try:
                    aggs.append(Aggregation(word.lower(), low, high))
                except ValueError as err:
                    raise ExpressSyntaxError(str(err), tok.line, tok.col) from None
                continue
            name = self.ident()
            if self.at("("):  # STRING(255), BINARY(32)
                self.skip_balanced()
            if self.at("FIXED"):
                self.next()
            return name, optional, tuple(aggs)

    def bound(self):
        parts = []
        while not (self.at(":") or self.at("]")):
            parts.append(self.next().text)
        text = "".join(parts)
        if text == "?":
            return None
        return int(text) if text.isdigit() else text

    def explicit_attribute(self, e):
        names = self.attribute_names()
        type_name, optional, aggs = self.type_expr()
        self.expect(";")
        for kind, name in names:
            if kind == "redeclared":
                e.redeclared.append(name)
            else:
                e.attributes.append(AttributeDef(name, type_name, optional, aggs))

    def inverse_attribute(self, e):
        name = self.ident()
        self.expect(":")
        rel, _, aggs = self.type_expr()
        self.expect("FOR")
        target = self.ident()
        if self.at("."):
            self.next()
            target = self.ident()
        self.expect(";")
        e.inverses.append(InverseAttributeDef(name, rel, target, aggs))

    def type_decl(self):
        start = self.expect("TYPE")
        name = self.ident()
        self.expect("=")
        if self.at("EXTENSIBLE"):
            self.next()
        if self.at("GENERIC_ENTITY"):
            self.next()
        if self.at("SELECT"):
            self.next()
            members = []
            if self.at("("):
                self.next()
                while True:
                    members.append(self.ident())
                    sep = self.next()
                    if sep.text == ")":
                        break
            if self.at("BASED_ON"):
                self.next()
                self.ident()
                if self.at("WITH"):
                    self.next()
                    self.skip_balanced()
            self.schema.selects[name] = members
        elif self.at("ENUMERATION"):
            self.next()
            items = []
            if self.at("OF"):
                self.next()
                self.expect("(")
                while True:
                    items.append(self.ident())
                    sep = self.next()
                    if sep.text == ")":
                        break
            self.schema.enumerations[name] = items
        else:
            base, _, aggs = self.type_expr()
            self.schema.types[name] = base
        self.schema._index.setdefault(name.upper(), name)
        # optional WHERE rules up to END_TYPE
        while not self.at("END_TYPE"):
            if self.peek() is None or self.at("ENTITY") or self.at("TYPE"):
                raise ExpressSyntaxError(f"unbalanced TYPE {name}: missing END_TYPE", start.line, start.col)
            self.next()
        self.next()
        self.expect(";")


def _validate(schema: ExpressSchema):
    for e in schema.entities.values():
        for sup in e.supertypes:
            if schema.entity(sup) is None:
                schema.unresolved.add(sup)
        seen = {}
        for attr, owner in all_attributes(schema, e.name):
            key = attr.name.upper()
            if key in seen and seen[key] != owner:
                schema.diagnostics.append(Diagnostic(
                    "error", f"{e.name}: attribute {attr.name} declared in both {seen[key]} and {owner}", e.line))
            elif key in seen:
                schema.diagnostics.append(Diagnostic("error", f"{e.name}: duplicate attribute {attr.name}", e.line))
            seen[key] = owner
        for inv in e.inverses:
            rel = schema.entity(inv.relationship_entity)
            if rel is None:
                schema.unresolved.add(inv.relationship_entity)
                schema.diagnostics.append(Diagnostic(
                    "warning", f"{e.name}.{inv.name}: relationship entity {inv.relationship_entity} not in schema",
                    e.line))
                continue
            if find_attribute(schema, rel.name, inv.for_attribute) is None:
                schema.diagnostics.append(Diagnostic(
                    "error", f"{e.name}.{inv.name}: {inv.for_attribute} is not a forward attribute of {rel.name}",
                    e.line))


def parse_schema(text: str) -> ExpressSchema:
    schema = _Parser(text).parse()
    _validate(schema)
    return schema


def read_schema(path) -> ExpressSchema:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        text = data.decode("latin-1")
    return parse_schema(text)


# --- schema queries ------------------------------------------------------

def supertype_chain(schema: ExpressSchema, name: str) -> list:
    """Ancestors of an entity, nearest first, breadth-first. Unresolved names are included."""
    out, queue, seen = [], [name], set()
    while queue:
        current = queue.pop(0)
        e = schema.entity(current)
        if e is None:
            continue
        for sup in e.supertypes:
            key = sup.upper()
            if key in seen:
                continue
            seen.add(key)
            out.append(schema.canonical(sup) or sup)
            queue.append(sup)
    return out


def is_subtype(schema: ExpressSchema, name: str, ancestor: str) -> bool:
    if name.upper() == ancestor.upper():
        return True
    return any(a.upper() == ancestor.upper() for a in supertype_chain(schema, name))


def all_attributes(schema: ExpressSchema, name: str, _seen=None) -> list:
    """Explicit attributes in instance-parameter order: inherited first, as (AttributeDef, owner)."""
    e = schema.entity(name)
    if e is None:
        return []
    seen = _seen if _seen is not None else set()
    if e.name in seen:
        return []
    seen.add(e.name)
    out = []
    for sup in e.supertypes:
        for item in all_attributes(schema, sup, seen):
            out.append(item)
    out.extend((a, e.name) for a in e.attributes)
    return out


def find_attribute(schema, entity_name, attr_name):
    """Search the entity's own attributes, then its supertypes' (nearest first)."""
    for owner in [entity_name] + supertype_chain(schema, entity_name):
        e = schema.entity(owner)
        if e is None:
            continue
        for a in e.attributes:
            if a.name.upper() == attr_name.upper():
                return a, e.name
    return None


def _find_prefixed(schema, entity_name, prefix):
    for owner in [entity_name] + supertype_chain(schema, entity_name):
        e = schema.entity(owner)
        if e is None:
            continue
        for a in e.attributes:
            if a.name.startswith(prefix):
                return a, e.name
    return None


@dataclass(frozen=True)
class InverseLink:
    """One inverse attribute resolved against its relationship entity."""

    entity: str  # declaring entity (e)
    inverse: str  # inverse attribute name as declared
    p: str
    relationship: str  # R
    for_attribute: str
    counterpart: Optional[str]
    r: str

    @property
    def tuple(self):
        return (self.p, self.r)


def inverse_links(schema: ExpressSchema, name: str, inherited: bool = True, diagnostics=None) -> list:
    """Resolve the inverse attributes of an entity.

    The range type r is the element type of the relationship's counterpart
    attribute (Relating* <-> Related*). When the counterpart lies outside the
    parsed schema, the FOR attribute's own type stands in and a warning is
    recorded.
    """
    diagnostics = diagnostics if diagnostics is not None else []
    owners = [name] + (supertype_chain(schema, name) if inherited else [])
    links = []
    for owner in owners:
        e = schema.entity(owner)
        if e is None:
            continue
        for inv in e.inverses:
            rel = schema.entity(inv.relationship_entity)
            if rel is None:
                diagnostics.append(Diagnostic(
                    "warning", f"{e.name}.{inv.name}: relationship {inv.relationship_entity} unknown; skipped"))
                continue
            found = find_attribute(schema, rel.name, inv.for_attribute)
            if found is None:
                diagnostics.append(Diagnostic(
                    "warning", f"{e.name}.{inv.name}: {inv.for_attribute} not found on {rel.name}; skipped"))
                continue
            for_attr, _ = found
            counterpart = None
            if for_attr.name.startswith("Relating"):
                counterpart = _find_prefixed(schema, rel.name, "Related")
            elif for_attr.name.startswith("Related"):
                counterpart = _find_prefixed(schema, rel.name, "Relating")
            if counterpart is not None:
                r = counterpart[0].type_name
                cp_name = counterpart[0].name
            else:
                r = for_attr.type_name
                cp_name = None
                diagnostics.append(Diagnostic(
                    "warning", f"{e.name}.{inv.name}: no Relating/Related counterpart on {rel.name}; "
                               f"range falls back to {for_attr.name} type {r}"))
            links.append(InverseLink(e.name, inv.name, lower_first(inv.name), rel.name,
                                     for_attr.name, cp_name, schema.canonical(r) or r))
    return links


def collect_inverse_tuples(schema: ExpressSchema, entity_name: str, diagnostics=None) -> set:
    if schema.entity(entity_name) is None:
        raise KeyError(f"unknown entity {entity_name}")
    return {link.tuple for link in inverse_links(schema, entity_name, True, diagnostics)}
