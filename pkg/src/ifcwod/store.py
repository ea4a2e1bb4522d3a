"""In-memory triple store over integer ids with SPO, POS and OSP indices.

Each index is a sorted list of id tuples; range scans use binary search on
a bound prefix. Writes go to a pending set and are merged into the indices
in one sort, which keeps bulk loads and materialization rounds cheap.
"""

from __future__ import annotations

import sys
from bisect import bisect_left
from dataclasses import dataclass

from .rdf import OWL, RDF_TYPE, RDFS, Graph

_TOP = sys.maxsize


class MaterializationError(RuntimeError):
    def __init__(self, message, added):
        super().__init__(message)
        self.added = added


class Store:
    def __init__(self, graph: Graph | None = None):
        self._ids = {}
        self._terms = []
        self._triples = set()
        self._pending = set()
        self.spo, self.pos, self.osp = [], [], []
        if graph is not None:
            self.load(graph)

    # --- dictionary ------------------------------------------------------

    def encode(self, term) -> int:
        id_ = self._ids.get(term)
        if id_ is None:
            id_ = self._ids[term] = len(self._terms)
            self._terms.append(term)
        return id_

    def id_of(self, term):
        return self._ids.get(term)

    def term(self, id_):
        return self._terms[id_]

    # --- writes ----------------------------------------------------------

    def add_ids(self, s, p, o) -> bool:
        t = (s, p, o)
        if t in self._triples:
            return False
        self._triples.add(t)
        self._pending.add(t)
        return True

    def add(self, s, p, o) -> bool:
        return self.add_ids(self.encode(s), self.encode(p), self.encode(o))

    def load(self, graph) -> "Store":
        for s, p, o in graph:
            self.add(s, p, o)
        self.commit()
        return self

    def commit(self):
        if not self._pending:
            return
        new = self._pending
        self._pending = set()
        self.spo = sorted(self.spo + list(new))
        self.pos = sorted(self.pos + [(p, o, s) for s, p, o in new])
        self.osp = sorted(self.osp + [(o, s, p) for s, p, o in new])

    # --- reads -----------------------------------------------------------

    def __len__(self):
        return len(self._triples)

    def __contains__(self, triple):
        ids = [self._ids.get(t) for t in triple]
        return None not in ids and tuple(ids) in self._triples

    def _plan(self, s, p, o):
        """Index, bound prefix and a permutation back to (s, p, o)."""
        if s is not None:
            if p is not None:
                return self.spo, (s, p), lambda t: t
            if o is not None:
                return self.osp, (o, s), lambda t: (t[1], t[2], t[0])
            return self.spo, (s,), lambda t: t
        if p is not None:
            return self.pos, (p,) if o is None else (p, o), lambda t: (t[2], t[0], t[1])
        if o is not None:
            return self.osp, (o,), lambda t: (t[1], t[2], t[0])
        return self.spo, (), lambda t: t

    @staticmethod
    def _range(index, prefix):
        if not prefix:
            return 0, len(index)
        lo = bisect_left(index, prefix)
        hi = bisect_left(index, prefix + (_TOP,) * (3 - len(prefix)))
        return lo, hi

    def scan_ids(self, s=None, p=None, o=None):
        self.commit()
        if s is not None and p is not None and o is not None:
            if (s, p, o) in self._triples:
                yield (s, p, o)
            return
        index, prefix, back = self._plan(s, p, o)
        lo, hi = self._range(index, prefix)
        for i in range(lo, hi):
            yield back(index[i])

    def count_ids(self, s=None, p=None, o=None) -> int:
        self.commit()
        if s is not None and p is not None and o is not None:
            return int((s, p, o) in self._triples)
        index, prefix, _ = self._plan(s, p, o)
        lo, hi = self._range(index, prefix)
        return hi - lo

    def _ids_or_missing(self, *terms):
        out = []
        for t in terms:
            if t is None:
                out.append(None)
            else:
                id_ = self._ids.get(t)
                if id_ is None:
                    return None
                out.append(id_)
        return out

    def match(self, s=None, p=None, o=None):
        ids = self._ids_or_missing(s, p, o)
        if ids is None:
            return
        for t in self.scan_ids(*ids):
            yield tuple(self._terms[i] for i in t)

    def count(self, s=None, p=None, o=None) -> int:
        ids = self._ids_or_missing(s, p, o)
        return 0 if ids is None else self.count_ids(*ids)

    def triples(self):
        yield from self.match()

    def to_graph(self, prefixes=None) -> Graph:
        g = Graph()
        for ns_prefix, ns in (prefixes or {}).items():
            g.bind(ns_prefix, ns)
        g.update(self.triples())
        return g

    def coherent(self) -> bool:
        self.commit()
        a = set(self.spo)
        return (a == self._triples and len(self.spo) == len(self._triples)
                and {(s, p, o) for p, o, s in self.pos} == a
                and {(s, p, o) for o, s, p in self.osp} == a)


def load(store: Store, graph) -> Store:
    return store.load(graph)


# --- materialization --------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    kind: str  # transitive | symmetric | inverse | subproperty
    p: object = None
    q: object = None


def rules_from_store(store: Store) -> list:
    """Rules implied by OWL typings and rdfs:subPropertyOf edges already in the store."""
    rules = set()
    for s, _, _ in store.match(None, RDF_TYPE, OWL.TransitiveProperty):
        rules.add(Rule("transitive", s))
    for s, _, _ in store.match(None, RDF_TYPE, OWL.SymmetricProperty):
        rules.add(Rule("symmetric", s))
    for s, _, o in store.match(None, OWL.inverseOf, None):
        rules.add(Rule("inverse", s, o))
    if store.count(None, RDFS.subPropertyOf, None):
        rules.add(Rule("subproperty"))
    return sorted(rules, key=lambda r: (r.kind, str(r.p), str(r.q)))


def _super_map(store, sub_id):
    """property id -> set of strict super-property ids (reflexive-transitive closure minus self)."""
    direct = {}
    for s, _, o in store.scan_ids(None, sub_id, None):
        direct.setdefault(s, set()).add(o)
    out = {}
    for start in direct:
        seen, stack = set(), list(direct[start])
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(direct.get(x, ()))
        seen.discard(start)
        out[start] = seen
    return out


def materialize(store: Store, rules, budget: int | None = None) -> Store:
    """Semi-naive forward chaining to a fixpoint.

    Each round joins only the triples derived in the previous round against
    the whole store. Raises MaterializationError when the store outgrows the
    budget; triples added so far stay in the store.
    """
    store.commit()
    trans, sym, inv = set(), set(), {}
    subprop = False
    for r in rules:
        if r.kind == "subproperty":
            subprop = True
            continue
        p = store.encode(r.p)
        if r.kind == "transitive":
            trans.add(p)
        elif r.kind == "symmetric":
            sym.add(p)
        elif r.kind == "inverse":
            q = store.encode(r.q)
            inv.setdefault(p, set()).add(q)
            inv.setdefault(q, set()).add(p)
        else:
            raise ValueError(f"unknown rule {r.kind!r}")
    sub_id = store.encode(RDFS.subPropertyOf)
    added = 0
    delta = set(store._triples)
    while delta:
        supers = _super_map(store, sub_id) if subprop else {}
        if subprop and any(t[1] == sub_id for t in delta):
            # new hierarchy edges can apply to any existing triple
            delta = set(store._triples)
        new = set()
        for s, p, o in delta:
            if p in trans:
                for _, _, o2 in store.scan_ids(o, p, None):
                    new.add((s, p, o2))
                for s0, _, _ in store.scan_ids(None, p, s):
                    new.add((s0, p, o))
            if p in sym:
                new.add((o, p, s))
            for q in inv.get(p, ()):
                new.add((o, q, s))
            for sup in supers.get(p, ()):
                new.add((s, sup, o))
        delta = {t for t in new if store.add_ids(*t)}
        added += len(delta)
        store.commit()
        if budget is not None and len(store) > budget:
            raise MaterializationError(
                f"closure exceeded the budget of {budget} triples ({added} added so far)", added)
    return store
