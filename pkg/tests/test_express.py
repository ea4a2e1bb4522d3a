import pytest

from ifcwod import express
from ifcwod.express import ExpressSyntaxError, parse_schema


def test_sequence_entities_and_inverses(sequence_schema):
    proc = sequence_schema.entity("IfcProcess")
    assert proc.is_abstract
    assert [i.name for i in proc.inverses] == ["IsPredecessorTo", "IsSuccessorFrom", "OperatesOn"]
    assert proc.inverses[0].relationship_entity == "IfcRelSequence"
    assert proc.inverses[0].for_attribute == "RelatingProcess"


def test_where_rules_are_skipped_not_parsed(sequence_schema):
    seq = sequence_schema.entity("IfcRelSequence")
    assert [a.name for a in seq.attributes] == [
        "RelatingProcess", "RelatedProcess", "TimeLag", "SequenceType", "UserDefinedSequenceType"]
    assert seq.attributes[2].is_optional


def test_types_selects_enums(sequence_schema):
    s = sequence_schema
    assert s.selects["IfcProcessSelect"] == ["IfcProcess", "IfcTypeProcess"] or \
        list(s.selects["IfcProcessSelect"]) == ["IfcProcess", "IfcTypeProcess"]
    assert "FINISH_START" in s.enumerations["IfcSequenceEnum"]
    assert s.types["IfcLabel"].upper().startswith("STRING")


def test_case_insensitive_lookup(sequence_schema):
    assert sequence_schema.canonical("IFCPROCESS") == "IfcProcess"
    assert sequence_schema.entity("ifcrelsequence").name == "IfcRelSequence"


def test_supertype_chain(sequence_schema):
    chain = express.supertype_chain(sequence_schema, "IfcRelSequence")
    assert chain[:3] == ["IfcRelConnects", "IfcRelationship", "IfcRoot"]
    assert express.is_subtype(sequence_schema, "IfcRelSequence", "IfcRelationship")
    assert not express.is_subtype(sequence_schema, "IfcProcess", "IfcRelationship")


def test_inherited_attributes(sequence_schema):
    names = [a.name for a, _ in express.all_attributes(sequence_schema, "IfcRelSequence")]
    assert names[:4] == ["GlobalId", "OwnerHistory", "Name", "Description"]
    assert names[-1] == "UserDefinedSequenceType"


def test_counterpart_fallback_warns(sequence_schema):
    diags = []
    links = express.inverse_links(sequence_schema, "IfcProcess", diagnostics=diags)
    op = [l for l in links if l.inverse == "OperatesOn"][0]
    assert op.counterpart is None and op.r == "IfcProcessSelect"
    assert any("OperatesOn" in str(d) for d in diags)


def test_unknown_entity_raises(sequence_schema):
    with pytest.raises(KeyError):
        express.collect_inverse_tuples(sequence_schema, "IfcNope")


def test_aggregates():
    s = parse_schema("""SCHEMA T;
    ENTITY A; Xs : LIST [2:3] OF SET [1:?] OF REAL; END_ENTITY;
    END_SCHEMA;""")
    a = s.entity("A").attributes[0]
    assert [g.kind for g in a.aggregation] == ["list", "set"]
    assert a.aggregation[0].low == 2 and a.aggregation[1].high is None
    assert a.is_ordered


@pytest.mark.parametrize("text", [
    "SCHEMA T; ENTITY A; X : REAL; END_SCHEMA;",
    "SCHEMA T; ENTITY A; X : LIST [3:1] OF REAL; END_ENTITY; END_SCHEMA;",
    "SCHEMA T; (* never closed END_SCHEMA;",
])
def test_malformed_schemas_raise_with_location(text):
    with pytest.raises(ExpressSyntaxError) as e:
        parse_schema(text)
    assert e.value.line is not None


def test_unresolved_names_are_recorded_not_fatal():
    s = parse_schema("SCHEMA T; ENTITY A SUBTYPE OF (B); X : IfcMissing; END_ENTITY; END_SCHEMA;")
    assert s.entity("A") is not None
    assert "B" in s.unresolved


def test_subset_schema_loads_clean(subset_schema):
    assert subset_schema.entity("IfcRelDefinesByProperties") is not None
    assert not [d for d in subset_schema.diagnostics if d.severity == "error"]
