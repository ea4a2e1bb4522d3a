"""RDF terms, triples and an in-memory graph with a prefix table."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import groupby
from typing import Iterable, Iterator, NamedTuple, Optional, Union

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_PREFIX = re.compile(r"^([A-Za-z][A-Za-z0-9_]*)?$")
_LANG = re.compile(r"^[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*$")


class RdfError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class IRI:
    value: str

    def __post_init__(self):
        if not _SCHEME.match(self.value):
            raise RdfError(f"IRI is not absolute: {self.value!r}")

    def __str__(self):
        return self.value


@dataclass(frozen=True, order=True)
class BNode:
    id: str

    def __post_init__(self):
        if not self.id or not re.match(r"^[A-Za-z0-9_][A-Za-z0-9_.\-]*$", self.id) or self.id.endswith("."):
            raise RdfError(f"bad blank node label: {self.id!r}")

    def __str__(self):
        return "_:" + self.id


@dataclass(frozen=True, order=True)
class Literal:
    """A literal. Simple literals are normalized to an explicit xsd:string datatype."""

    lexical: str
    datatype: Optional[IRI] = None
    lang: Optional[str] = None

    def __post_init__(self):
        if self.lang is not None:
            if self.datatype is not None and self.datatype != RDF_LANGSTRING:
                raise RdfError("literal cannot carry both a datatype and a language tag")
            if not _LANG.match(self.lang):
                raise RdfError(f"bad language tag: {self.lang!r}")
            object.__setattr__(self, "datatype", None)
        elif self.datatype is None:
            object.__setattr__(self, "datatype", XSD_STRING)

    def __str__(self):
        return self.lexical


Term = Union[IRI, BNode, Literal]


class Triple(NamedTuple):
    subject: Union[IRI, BNode]
    predicate: IRI
    object: Term


def make_triple(s, p, o) -> Triple:
    if not isinstance(s, (IRI, BNode)):
        raise RdfError(f"subject must be an IRI or blank node, got {s!r}")
    if not isinstance(p, IRI):
        raise RdfError(f"predicate must be an IRI, got {p!r}")
    if not isinstance(o, (IRI, BNode, Literal)):
        raise RdfError(f"object must be an RDF term, got {o!r}")
    return Triple(s, p, o)


class Namespace(str):
    """Namespace string whose attributes and items mint IRIs."""

    def term(self, local: str) -> IRI:
        return IRI(str(self) + local)

    def __getattr__(self, local):
        if local.startswith("__"):
            raise AttributeError(local)
        return self.term(local)

    def __getitem__(self, local):
        if isinstance(local, str):
            return self.term(local)
        return str.__getitem__(self, local)


RDF = Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
RDFS = Namespace("http://www.w3.org/2000/01/rdf-schema#")
OWL = Namespace("http://www.w3.org/2002/07/owl#")
XSD = Namespace("http://www.w3.org/2001/XMLSchema#")

XSD_STRING = IRI(XSD + "string")
RDF_LANGSTRING = IRI(RDF + "langString")
RDF_TYPE = IRI(RDF + "type")

STANDARD_PREFIXES = {"rdf": str(RDF), "rdfs": str(RDFS), "owl": str(OWL), "xsd": str(XSD)}


@dataclass
class Graph:
    triples: set = field(default_factory=set)
    prefixes: dict = field(default_factory=dict)

    def add(self, s, p, o) -> None:
        self.triples.add(make_triple(s, p, o))

    def update(self, triples: Iterable) -> None:
        for t in triples:
            self.add(*t)

    def bind(self, prefix: str, ns: str) -> "Graph":
        if not _PREFIX.match(prefix):
            raise RdfError(f"malformed prefix {prefix!r}: must match [A-Za-z][A-Za-z0-9_]* or be empty")
        if not _SCHEME.match(str(ns)):
            raise RdfError(f"namespace is not absolute: {ns!r}")
        self.prefixes[prefix] = str(ns)
        return self

    def __len__(self):
        return len(self.triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples)

    def __contains__(self, triple):
        return tuple(triple) in self.triples

    def __or__(self, other: "Graph") -> "Graph":
        g = Graph(set(self.triples), dict(self.prefixes))
        g.triples |= other.triples
        for k, v in other.prefixes.items():
            g.prefixes.setdefault(k, v)
        return g

    def match(self, s=None, p=None, o=None) -> Iterator[Triple]:
        for t in self.triples:
            if (s is None or t[0] == s) and (p is None or t[1] == p) and (o is None or t[2] == o):
                yield t

    def objects(self, s=None, p=None):
        return [t[2] for t in self.match(s, p, None)]

    def subjects(self, p=None, o=None):
        return [t[0] for t in self.match(None, p, o)]

    def value(self, s=None, p=None, o=None):
        for t in self.match(s, p, o):
            if s is None:
                return t[0]
            if o is None:
                return t[2]
            return t[1]
        return None


def register_prefix(graph: Graph, prefix: str, ns: str) -> Graph:
    return graph.bind(prefix, ns)


def lower_first(name: str) -> str:
    return name[:1].lower() + name[1:]


# --- isomorphism ---------------------------------------------------------

def _bnodes(g: Graph):
    out = set()
    for s, _, o in g.triples:
        if isinstance(s, BNode):
            out.add(s)
        if isinstance(o, BNode):
            out.add(o)
    return out


def _colors(g: Graph, nodes):
    # Weisfeiler-Lehman style refinement over blank nodes; ground terms are their own color.
    color = {b: "" for b in nodes}

    def key(t):
        return t if not isinstance(t, BNode) else ("b", color[t])

    for _ in range(len(nodes) + 1):
        sig = {b: [] for b in nodes}
        for s, p, o in g.triples:
            if isinstance(s, BNode):
                sig[s].append(("out", p, key(o)))
            if isinstance(o, BNode):
                sig[o].append(("in", p, key(s)))
        new = {b: repr((color[b], sorted(map(repr, sig[b])))) for b in nodes}
        if len(set(new.values())) == len(set(color.values())):
            color = new
            break
        color = new
    return color


def isomorphic(g1: Graph, g2: Graph) -> bool:
    """True if the graphs are equal up to a renaming of blank nodes."""
    if len(g1) != len(g2):
        return False
    b1, b2 = _bnodes(g1), _bnodes(g2)
    if len(b1) != len(b2):
        return False
    ground1 = {t for t in g1.triples if not isinstance(t[0], BNode) and not isinstance(t[2], BNode)}
    ground2 = {t for t in g2.triples if not isinstance(t[0], BNode) and not isinstance(t[2], BNode)}
    if ground1 != ground2:
        return False
    if not b1:
        return True
    c1, c2 = _colors(g1, b1), _colors(g2, b2)
    if sorted(c1.values()) != sorted(c2.values()):
        return False
    rest2 = g2.triples - ground2
    rest1 = sorted(g1.triples - ground1, key=repr)
    order = sorted(b1, key=lambda b: (c1[b], b.id))
    by_color = {k: [b for b in b2 if c2[b] == k] for k in set(c2.values())}

    def apply(m, t):
        return tuple(m.get(x, x) if isinstance(x, BNode) else x for x in t)

    def search(i, mapping, used):
        if i == len(order):
            return all(apply(mapping, t) in rest2 for t in rest1)
        b = order[i]
        for cand in by_color[c1[b]]:
            if cand in used:
                continue
            mapping[b] = cand
            ok = True
            for t in rest1:
                nodes = [x for x in (t[0], t[2]) if isinstance(x, BNode)]
                if all(x in mapping for x in nodes) and b in nodes and apply(mapping, t) not in rest2:
                    ok = False
                    break
            if ok and search(i + 1, mapping, used | {cand}):
                return True
            del mapping[b]
        return False

    return search(0, {}, frozenset())


def sorted_triples(g: Graph):
    from .turtle import nt_term
    return sorted(g.triples, key=lambda t: (nt_term(t[0]), nt_term(t[1]), nt_term(t[2])))


def group_by_subject(triples):
    return groupby(triples, key=lambda t: t[0])
