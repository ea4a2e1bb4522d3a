"""A SPARQL subset: SELECT over one basic graph pattern with simple FILTERs.

Supported: PREFIX/BASE, SELECT [DISTINCT] vars or *, optional WHERE, triple
patterns with ``;`` and ``,`` abbreviations and ``a``, and
``FILTER(term op term && ...)`` comparisons. Everything else is rejected
with UnsupportedFeature rather than silently misread.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Optional

from .rdf import IRI, Literal, RDF_TYPE, XSD
from .turtle import RdfSyntaxError, TokenStream, literal_from_token, nt_term, read_literal_tail

log = logging.getLogger(__name__)

_UNSUPPORTED_KEYWORDS = {
    "OPTIONAL", "UNION", "MINUS", "GRAPH", "SERVICE", "BIND", "VALUES", "ORDER", "GROUP",
    "HAVING", "LIMIT", "OFFSET", "CONSTRUCT", "ASK", "DESCRIBE", "FROM", "EXISTS", "NOT",
    "INSERT", "DELETE", "COUNT", "SUM", "MIN", "MAX", "AVG", "SAMPLE",
}
_PATH_OPS = {"/", "|", "^", "*", "+", "?"}
_COMPARE = {"=", "!=", "<", "<=", ">", ">="}
_NUMERIC = {XSD[t] for t in (
    "integer", "decimal", "double", "float", "int", "long", "short", "byte", "nonNegativeInteger",
    "positiveInteger", "negativeInteger", "nonPositiveInteger", "unsignedInt", "unsignedLong")}


class QuerySyntaxError(RdfSyntaxError):
    pass


class UnsupportedFeature(QuerySyntaxError):
    pass


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return f"?{self.name}"


@dataclass(frozen=True)
class Filter:
    left: object
    op: str
    right: object

    @property
    def variables(self):
        return {t for t in (self.left, self.right) if isinstance(t, Var)}


@dataclass
class Query:
    prefixes: dict
    variables: Optional[list]  # None for SELECT *
    distinct: bool
    patterns: list
    filters: list = field(default_factory=list)

    @property
    def pattern_count(self):
        return len(self.patterns)

    @property
    def pattern_variables(self):
        out = []
        for pat in self.patterns:
            for t in pat:
                if isinstance(t, Var) and t not in out:
                    out.append(t)
        return out

    @property
    def projection(self):
        return self.variables if self.variables is not None else self.pattern_variables


class _Parser:
    def __init__(self, text):
        try:
            self.ts = TokenStream(text)
        except RdfSyntaxError as e:
            raise QuerySyntaxError(str(e).split(" at line")[0], e.line, e.col) from None
        self.prefixes = {}
        self.base = None

    def fail(self, message, cls=QuerySyntaxError):
        tok = self.ts.peek()
        line, col = (tok.line, tok.col) if tok else self.ts._end
        raise cls(message, line, col)

    def unsupported_check(self):
        tok = self.ts.peek()
        if tok is not None and tok.kind == "NAME" and tok.value.upper() in _UNSUPPORTED_KEYWORDS:
            self.fail(f"unsupported feature: {tok.value.upper()}", UnsupportedFeature)

    def parse(self) -> Query:
        ts = self.ts
        while ts.at_keyword("PREFIX") or ts.at_keyword("BASE"):
            if ts.next().value.upper() == "BASE":
                self.base = ts.expect("IRIREF", what="base IRI").value
                continue
            tok = ts.expect("PNAME", what="prefix name")
            if tok.value[1]:
                self.fail("prefix declaration must end with ':'")
            self.prefixes[tok.value[0]] = self.iri_value(ts.expect("IRIREF", what="namespace IRI").value)
        self.unsupported_check()
        if not ts.at_keyword("SELECT"):
            self.fail("expected SELECT")
        ts.next()
        distinct = False
        if ts.at_keyword("DISTINCT"):
            ts.next()
            distinct = True
        elif ts.at_keyword("REDUCED"):
            self.fail("unsupported feature: REDUCED", UnsupportedFeature)
        variables = []
        if ts.at("OP", "*"):
            ts.next()
            variables = None
        else:
            while ts.at("VAR"):
                variables.append(Var(ts.next().value))
            if ts.at("OP", "("):
                self.fail("unsupported feature: projection expressions", UnsupportedFeature)
            self.unsupported_check()
            if not variables:
                self.fail("expected projection variables or *")
        if ts.at_keyword("WHERE"):
            ts.next()
        self.unsupported_check()
        ts.expect("OP", "{", what="'{'")
        patterns, filters = self.group()
        ts.expect("OP", "}", what="'}'")
        if not ts.done():
            self.unsupported_check()
            self.fail("unexpected trailing input")
        if not patterns:
            self.fail("empty basic graph pattern")
        q = Query(self.prefixes, variables, distinct, patterns, filters)
        known = set(q.pattern_variables)
        for v in variables or ():
            if v not in known:
                self.fail(f"projected variable {v} does not occur in any pattern")
        return q

    def iri_value(self, raw):
        if self.base and ":" not in raw.split("/")[0]:
            return self.base + raw
        return raw

    def group(self):
        ts = self.ts
        patterns, filters = [], []
        while not ts.at("OP", "}"):
            if ts.peek() is None:
                self.fail("unterminated group")
            self.unsupported_check()
            if ts.at("OP", "{"):
                self.fail("unsupported feature: nested groups", UnsupportedFeature)
            if ts.at_keyword("FILTER"):
                ts.next()
                filters.extend(self.filter())
                if ts.at("OP", "."):
                    ts.next()
                continue
            subj = self.term(position="subject")
            self.predicate_object_list(subj, patterns)
            if ts.at("OP", "."):
                ts.next()
            elif not ts.at("OP", "}") and not ts.at_keyword("FILTER"):
                self.unsupported_check()
                self.fail("expected '.' or '}'")
        return patterns, filters

    def predicate_object_list(self, subj, patterns):
        ts = self.ts
        while True:
            pred = self.verb()
            while True:
                patterns.append((subj, pred, self.term(position="object")))
                if not ts.at("OP", ","):
                    break
                ts.next()
            if not ts.at("OP", ";"):
                return
            while ts.at("OP", ";"):
                ts.next()
            if ts.at("OP", ".") or ts.at("OP", "}"):
                return

    def verb(self):
        ts = self.ts
        if ts.at("NAME", "a"):
            ts.next()
            pred = RDF_TYPE
        elif ts.at("OP") and ts.peek().value in _PATH_OPS | {"!", "("}:
            self.fail("unsupported feature: property paths", UnsupportedFeature)
        else:
            pred = self.term(position="predicate")
        nxt = ts.peek()
        if nxt is not None and nxt.kind == "OP" and nxt.value in _PATH_OPS:
            self.fail("unsupported feature: property paths", UnsupportedFeature)
        return pred

    def resolve(self, tok):
        if tok.kind == "IRIREF":
            value = self.iri_value(tok.value)
            try:
                return IRI(value)
            except ValueError:
                raise QuerySyntaxError(f"relative IRI <{value}> without BASE", tok.line, tok.col) from None
        if tok.kind == "PNAME":
            prefix, local = tok.value
            if prefix not in self.prefixes:
                raise QuerySyntaxError(f"undeclared prefix {prefix!r}", tok.line, tok.col)
            return IRI(self.prefixes[prefix] + local)
        raise QuerySyntaxError(f"expected an IRI, got {tok.kind} {tok.value!r}", tok.line, tok.col)

    def term(self, position):
        ts = self.ts
        tok = ts.peek()
        if tok is None:
            self.fail(f"expected {position}")
        if tok.kind == "VAR":
            ts.next()
            return Var(tok.value)
        if tok.kind == "BLANK":
            ts.next()
            return Var("_:" + tok.value)  # blank nodes in a BGP behave as undistinguished variables
        if tok.kind in ("IRIREF", "PNAME"):
            ts.next()
            return self.resolve(tok)
        if position == "predicate":
            self.fail("expected a predicate")
        if tok.kind == "OP" and tok.value in ("[", "("):
            self.fail("unsupported feature: blank node syntax and collections", UnsupportedFeature)
        if tok.kind == "STRING":
            ts.next()
            if position == "subject":
                self.fail("literal in subject position")
            return read_literal_tail(ts, tok.value, lambda t: self.resolve(t))
        lit = literal_from_token(tok)
        if lit is not None and position != "subject":
            ts.next()
            return lit
        self.fail(f"expected {position}")

    def filter(self):
        ts = self.ts
        ts.expect("OP", "(", what="'(' after FILTER")
        out = [self.comparison()]
        while ts.at("OP", "&&"):
            ts.next()
            out.append(self.comparison())
        if ts.at("OP", "||"):
            self.fail("unsupported feature: '||' in FILTER", UnsupportedFeature)
        ts.expect("OP", ")", what="')'")
        return out

    def comparison(self):
        ts = self.ts
        self.unsupported_check()
        if ts.at("NAME") and ts.at("OP", "(", k=1):
            self.fail(f"unsupported feature: function {ts.peek().value}()", UnsupportedFeature)
        left = self.term(position="filter operand")
        tok = ts.peek()
        if tok is None or tok.kind != "OP" or tok.value not in _COMPARE:
            self.fail("expected a comparison operator")
        ts.next()
        right = self.term(position="filter operand")
        if not isinstance(left, Var) and not isinstance(right, Var):
            self.fail("a FILTER comparison needs at least one variable")
        return Filter(left, tok.value, right)


def parse_query(text: str) -> Query:
    return _Parser(text).parse()


# --- evaluation ------------------------------------------------------------

@dataclass
class EvalReport:
    variables: list
    solutions: list  # list of tuples of terms (None for unbound), a multiset
    intermediate_rows: int
    wall_time: float
    join_order: list
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.solutions)


def _numeric(t):
    if isinstance(t, Literal) and t.datatype in _NUMERIC:
        try:
            return Decimal(t.lexical)
        except InvalidOperation:
            return None
    return None


def compare(a, op, b) -> bool:
    """Filter comparison: numeric order for numeric literals, equality for anything else."""
    na, nb = _numeric(a), _numeric(b)
    if na is not None and nb is not None:
        return {"=": na == nb, "!=": na != nb, "<": na < nb, "<=": na <= nb,
                ">": na > nb, ">=": na >= nb}[op]
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if isinstance(a, Literal) and isinstance(b, Literal) and a.datatype == b.datatype == XSD.string:
        return {"<": a.lexical < b.lexical, "<=": a.lexical <= b.lexical,
                ">": a.lexical > b.lexical, ">=": a.lexical >= b.lexical}[op]
    return False


def join_order(store, encoded) -> list:
    """Greedy order: smallest exact count first, then the smallest pattern sharing a variable."""
    counts = [store.count_ids(*(None if isinstance(t, Var) else t for t in pat)) for pat in encoded]
    remaining = list(range(len(encoded)))
    order, bound = [], set()
    while remaining:
        connected = [i for i in remaining if bound & {t for t in encoded[i] if isinstance(t, Var)}]
        pool = connected or remaining
        best = min(pool, key=lambda i: (counts[i], i))
        order.append(best)
        remaining.remove(best)
        bound |= {t for t in encoded[best] if isinstance(t, Var)}
    return order


def evaluate(store, query: Query) -> EvalReport:
    t0 = time.perf_counter()
    warnings = []
    variables = query.projection
    encoded, missing = [], False
    for pat in query.patterns:
        row = []
        for t in pat:
            if isinstance(t, Var):
                row.append(t)
            else:
                id_ = store.id_of(t)
                missing |= id_ is None
                row.append(id_)
        encoded.append(tuple(row))
    order = join_order(store, encoded) if not missing else list(range(len(encoded)))

    pending = list(query.filters)
    rows = [{}] if not missing else []
    produced = 0
    for i in order:
        pat = encoded[i]
        out = []
        for row in rows:
            key = [row.get(t) if isinstance(t, Var) else t for t in pat]
            for triple in store.scan_ids(*key):
                new = dict(row)
                ok = True
                for t, v in zip(pat, triple):
                    if isinstance(t, Var):
                        if new.setdefault(t, v) != v:
                            ok = False
                            break
                if ok:
                    out.append(new)
        produced += len(out)
        bound = set(out[0]) if out else set()
        ready = [f for f in pending if f.variables <= bound]
        if ready:
            out = [r for r in out if all(_check(store, f, r) for f in ready)]
            pending = [f for f in pending if f not in ready]
        rows = out
        if not rows:
            break
    if rows and pending:
        unbound = sorted({str(v) for f in pending for v in f.variables})
        warnings.append(f"FILTER on unbound variable(s) {', '.join(unbound)} evaluates to false")
        rows = []
    for w in warnings:
        log.warning(w)

    solutions = [tuple(store.term(r[v]) if v in r else None for v in variables) for r in rows]
    if query.distinct:
        solutions = list(dict.fromkeys(solutions))
    return EvalReport(variables, solutions, produced, time.perf_counter() - t0, order, warnings)


def _check(store, f, row):
    a = store.term(row[f.left]) if isinstance(f.left, Var) else f.left
    b = store.term(row[f.right]) if isinstance(f.right, Var) else f.right
    return compare(a, f.op, b)


def to_tsv(report: EvalReport) -> str:
    """Sorted TSV with N-Triples terms, for diffing result sets."""
    header = "\t".join(str(v) for v in report.variables)
    lines = sorted("\t".join("" if t is None else nt_term(t) for t in sol) for sol in report.solutions)
    return "\n".join([header] + lines) + "\n"


__all__ = ["Var", "Filter", "Query", "EvalReport", "QuerySyntaxError", "UnsupportedFeature",
           "parse_query", "evaluate", "compare", "join_order", "to_tsv"]
