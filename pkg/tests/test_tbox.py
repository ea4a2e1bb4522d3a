import pytest

from ifcwod import tbox
from ifcwod.psd import PropertyType, PsdDocument, PsdPropertyDef
from ifcwod.rdf import IRI, OWL, RDF_TYPE, RDFS, Literal, Namespace
from ifcwod.tbox import IFCWOD, ForgeError

IFC = Namespace(tbox.DEFAULT_IFCOWL)


def test_core_hierarchy():
    g = tbox.core_tbox()
    for name in ("hasSingleValue", "hasEnumeratedValue", "hasListValue", "hasReferenceValue",
                 "hasTableValue", "hasBoundedValue"):
        assert g.value(IFCWOD[name], RDFS.subPropertyOf) == IFCWOD.hasSimpleProperty
    assert set(g.objects(IFCWOD.hasSimpleProperty, RDFS.domain)) == {IFC.IfcPropertySet, IFC.IfcComplexProperty}
    assert (IFCWOD.hasComplexProperty, RDF_TYPE, OWL.IrreflexiveProperty) in g
    assert (IFCWOD.value, RDF_TYPE, OWL.DatatypeProperty) in g


def test_relationship_properties_subset(subset_schema):
    props = {p.iri: p for p in tbox.relationship_properties(subset_schema)}
    p = props[IFCWOD.isDefinedBy_IfcObject]
    assert p.domain == IFC.IfcObject
    assert p.link.relationship == "IfcRelDefinesByProperties"


def test_non_relationship_inverses_are_not_emitted(sequence_schema):
    iris = {p.iri for p in tbox.relationship_properties(sequence_schema)}
    # IfcRelAssignsToProcess does not reach IfcRelationship in the fixture
    assert IFCWOD.operatesOn_IfcProcess not in iris
    assert IFCWOD.isSuccessorFrom_IfcProcess in iris


def test_pset_namespace_and_prefix():
    assert str(tbox.pset_namespace("Pset_WallCommon")) == "http://buildingsmart.org/ontology/ifcwod/Pset_WallCommon#"
    assert tbox.pset_prefix("Pset_WallCommon") == "pset_WallCommon"


def _doc(*props):
    return PsdDocument("Pset_T", "d", ["IfcWall"], list(props))


def test_duplicate_property_names_get_suffix():
    a = PsdPropertyDef("Width", PropertyType("single_value", datatype="IfcLengthMeasure"))
    b = PsdPropertyDef("Width", PropertyType("single_value", datatype="IfcLengthMeasure"))
    warnings = []
    iris = [p.iri for p in tbox.pset_properties(_doc(a, b), warnings=warnings)]
    ns = tbox.pset_namespace("Pset_T")
    assert iris == [ns.width, ns.width_2]
    assert warnings


def test_reference_and_list_ranges():
    ref = PsdPropertyDef("Owner", PropertyType("reference_value", ref_type="IfcPerson"))
    lst = PsdPropertyDef("Heights", PropertyType("list_value", datatype="IfcLengthMeasure"))
    g = tbox.map_psd(_doc(ref, lst))
    ns = tbox.pset_namespace("Pset_T")
    assert g.value(ns.owner, RDFS.range) == IFC.IfcPerson
    assert g.value(ns.owner, RDFS.subPropertyOf) == IFCWOD.hasReferenceValue
    assert g.value(ns.heights, RDFS.subPropertyOf) == IFCWOD.hasListValue


def test_characteristics_file():
    text = """
    # comment
    prefix ex: <http://example.org/>
    transitive ex:p   # trailing
    symmetric <http://example.org/q>
    inverse ex:p ex:r
    """
    entries = tbox.parse_characteristics(text)
    ex = Namespace("http://example.org/")
    assert entries == [("transitive", ex.p), ("symmetric", ex.q), ("inverse", ex.p, ex.r)]
    g = tbox.apply_characteristics(tbox.base_graph(), entries)
    assert (ex.p, RDF_TYPE, OWL.TransitiveProperty) in g
    assert (ex.p, OWL.inverseOf, ex.r) in g


@pytest.mark.parametrize("text", ["transitive nope:p", "sometimes ifcwod:p", "inverse ifcwod:p"])
def test_bad_characteristics(text):
    with pytest.raises(ForgeError):
        tbox.parse_characteristics(text)


def test_forge_is_deterministic(subset_schema, psd_docs):
    from ifcwod.turtle import serialize
    assert serialize(tbox.forge(subset_schema, psd_docs)) == serialize(tbox.forge(subset_schema, psd_docs[::-1]))


def test_forged_labels_are_typed(forged):
    assert Literal("isDefinedBy") in set(forged.objects(IFCWOD.isDefinedBy_IfcObject, RDFS.label))
    assert (IRI("http://buildingsmart.org/ontology/ifcwod/Pset_WallCommon"), RDF_TYPE, OWL.Ontology) in forged
