import pytest

from ifcwod.rdf import OWL, RDF_TYPE, RDFS, XSD, Graph, Literal, Namespace
from ifcwod.store import MaterializationError, Rule, Store, materialize, rules_from_store

EX = Namespace("http://example.org/")


def chain(n, p=EX.next):
    g = Graph()
    for i in range(n - 1):
        g.add(EX[f"n{i}"], p, EX[f"n{i + 1}"])
    return g


def test_dictionary_encoding_is_stable():
    st = Store()
    a = st.encode(EX.a)
    assert st.encode(EX.a) == a
    assert st.term(a) == EX.a
    assert st.id_of(EX.zzz) is None


def test_match_on_every_binding_pattern():
    g = Graph()
    g.add(EX.a, EX.p, EX.b)
    g.add(EX.a, EX.q, Literal("1", XSD.integer))
    g.add(EX.c, EX.p, EX.b)
    st = Store(g)
    assert st.count() == 3
    assert st.count(EX.a) == 2
    assert st.count(None, EX.p) == 2
    assert st.count(None, None, EX.b) == 2
    assert st.count(EX.a, EX.p) == 1
    assert st.count(EX.a, None, EX.b) == 1
    assert st.count(None, EX.p, EX.b) == 2
    assert st.count(EX.a, EX.p, EX.b) == 1
    assert set(st.match(None, EX.p, None)) == {(EX.a, EX.p, EX.b), (EX.c, EX.p, EX.b)}
    assert list(st.match(EX.unknown)) == []
    assert st.coherent()


def test_duplicates_are_ignored():
    st = Store()
    assert st.add(EX.a, EX.p, EX.b)
    assert not st.add(EX.a, EX.p, EX.b)
    assert len(st) == 1 and st.coherent()


def test_round_trip_to_graph():
    g = chain(5)
    assert Store(g).to_graph().triples == g.triples


def test_transitive_chain():
    st = Store(chain(4))
    materialize(st, [Rule("transitive", EX.next)])
    assert st.count(None, EX.next) == 6


def test_symmetric_and_inverse():
    g = Graph()
    g.add(EX.a, EX.adj, EX.b)
    g.add(EX.a, EX.before, EX.b)
    st = Store(g)
    materialize(st, [Rule("symmetric", EX.adj), Rule("inverse", EX.before, EX.after)])
    assert (EX.b, EX.adj, EX.a) in st
    assert (EX.b, EX.after, EX.a) in st


def test_subproperty_closure_including_late_edges():
    g = chain(3, EX.child)
    g.add(EX.child, RDFS.subPropertyOf, EX.kin)
    g.add(EX.kin, RDFS.subPropertyOf, EX.related)
    st = Store(g)
    materialize(st, [Rule("subproperty")])
    assert st.count(None, EX.related) == 2
    assert st.count(None, EX.kin) == 2


def test_rules_from_owl_typings():
    g = chain(3)
    g.add(EX.next, RDF_TYPE, OWL.TransitiveProperty)
    g.add(EX.next, OWL.inverseOf, EX.prev)
    st = Store(g)
    rules = rules_from_store(st)
    assert Rule("transitive", EX.next) in rules and Rule("inverse", EX.next, EX.prev) in rules
    materialize(st, rules)
    assert (EX.n0, EX.next, EX.n2) in st and (EX.n2, EX.prev, EX.n0) in st


def test_budget_aborts_with_partial_closure():
    st = Store(chain(30))
    with pytest.raises(MaterializationError) as e:
        materialize(st, [Rule("transitive", EX.next)], budget=100)
    assert e.value.added > 0
    assert st.coherent()


def test_materialize_is_idempotent():
    st = Store(chain(6))
    materialize(st, [Rule("transitive", EX.next)])
    n = len(st)
    materialize(st, [Rule("transitive", EX.next)])
    assert len(st) == n == 5 + 4 + 3 + 2 + 1
