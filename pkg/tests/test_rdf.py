import pytest

from ifcwod import turtle
from ifcwod.rdf import (
    IRI, RDF_TYPE, XSD, XSD_STRING, BNode, Graph, Literal, RdfError, isomorphic, lower_first, make_triple,
)
from ifcwod.turtle import RdfSyntaxError, nt_term, parse, serialize

EX = "http://example.org/"


def test_plain_literal_gets_xsd_string():
    assert Literal("a").datatype == XSD_STRING
    assert Literal("a") == Literal("a", XSD_STRING)


def test_lang_literal_has_no_datatype():
    lit = Literal("参照記号", lang="ja-JP")
    assert lit.datatype is None and lit.lang == "ja-JP"


@pytest.mark.parametrize("bad", [
    lambda: IRI("relative/path"),
    lambda: Literal("x", XSD.string, lang="en"),
    lambda: Literal("x", lang="not a tag"),
    lambda: BNode("has space"),
])
def test_invalid_terms_rejected(bad):
    with pytest.raises(RdfError):
        bad()


def test_literal_subject_rejected():
    with pytest.raises(RdfError):
        make_triple(Literal("x"), IRI(EX + "p"), IRI(EX + "o"))


def test_lower_first():
    assert lower_first("IsExternal") == "isExternal"
    assert lower_first("Reference") == "reference"
    assert lower_first("") == ""


def test_bind_rejects_bad_prefix():
    with pytest.raises(RdfError):
        Graph().bind("1x", EX)


def test_ntriples_escapes_non_ascii():
    assert nt_term(Literal("é\n")) == '"\\u00E9\\n"^^<http://www.w3.org/2001/XMLSchema#string>'


def test_turtle_layout_is_sorted_and_deterministic():
    g = Graph()
    g.bind("ex", EX)
    g.add(IRI(EX + "b"), IRI(EX + "p"), Literal("2", XSD.integer))
    g.add(IRI(EX + "a"), RDF_TYPE, IRI(EX + "C"))
    g.add(IRI(EX + "a"), IRI(EX + "p"), Literal("x", lang="en"))
    text = serialize(g)
    assert text == (
        "@prefix ex: <http://example.org/> .\n\n"
        'ex:a ex:p "x"@en ;\n'
        "    a ex:C .\n"
        'ex:b ex:p "2"^^<http://www.w3.org/2001/XMLSchema#integer> .\n'
    )
    assert serialize(g) == text


def test_empty_graph_serializes_to_header_only():
    g = Graph()
    g.bind("ex", EX)
    assert serialize(g) == "@prefix ex: <http://example.org/> .\n"
    assert serialize(Graph(), "ntriples") == ""


def test_turtle_parse_shorthand():
    g = parse("""
        @prefix ex: <http://example.org/> .
        PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
        ex:s a ex:C ; ex:n 3, 4.5, 1e3 ; ex:b true ;
             ex:o [ ex:q "v"@fr ] .
    """)
    assert len(g) == 7
    assert (IRI(EX + "s"), IRI(EX + "n"), Literal("4.5", XSD.decimal)) in g
    assert (IRI(EX + "s"), IRI(EX + "b"), Literal("true", XSD.boolean)) in g


def test_turtle_rejects_collections():
    with pytest.raises(RdfSyntaxError):
        parse("@prefix ex: <http://example.org/> . ex:s ex:p ( ex:a ) .")


def test_ntriples_error_has_line_number():
    text = "<http://a/s> <http://a/p> <http://a/o> .\n<http://a/s> <http://a/p> <http://a/o>\n"
    with pytest.raises(RdfSyntaxError) as e:
        parse(text, "ntriples")
    assert e.value.line == 2


def test_unknown_prefix_is_an_error():
    with pytest.raises(RdfSyntaxError):
        parse("nope:s nope:p nope:o .")


def test_isomorphism_ignores_blank_labels():
    g1, g2 = Graph(), Graph()
    p = IRI(EX + "p")
    g1.add(BNode("a"), p, BNode("b"))
    g1.add(BNode("b"), p, Literal("x"))
    g2.add(BNode("z"), p, BNode("y"))
    g2.add(BNode("y"), p, Literal("x"))
    assert isomorphic(g1, g2)
    g2.add(BNode("y"), p, BNode("y"))
    assert not isomorphic(g1, g2)


def test_format_for_path():
    assert turtle.format_for_path("x.nt") == "ntriples"
    assert turtle.format_for_path("x.ttl") == "turtle"
