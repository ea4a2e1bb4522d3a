import pytest

from ifcwod import psd
from ifcwod.psd import PsdError, parse_psd


def by_name(docs):
    return {d.name: d for d in docs}


def test_bundled_psds(psd_docs):
    docs = by_name(psd_docs)
    assert set(docs) == {"Pset_DoorCommon", "Pset_SpaceCommon", "Pset_StackTerminalTypeCommon", "Pset_WallCommon"}
    st = docs["Pset_StackTerminalTypeCommon"]
    ref, status = st.properties
    assert ref.ptype.kind == "single_value" and ref.ptype.datatype == "IfcIdentifier"
    assert ("ja-JP", "参照記号") in [tuple(a) for a in ref.name_aliases]
    assert status.ptype.kind == "enumerated_value"
    assert status.ptype.enum_name == "PEnum_ElementStatus"
    assert status.ptype.items == ("NEW", "EXISTING", "DEMOLISH", "TEMPORARY")
    assert "IfcStackTerminal" in st.applicable_classes


def test_parallel_read_matches_sequential(psd_docs):
    par = psd.read_psd_dir(psd.__file__.rsplit("/", 1)[0] + "/data/psd", parallel=True)
    assert [d.name for d in par] == [d.name for d in psd_docs]


def doc(props):
    return f"<PropertySetDef><Name>Pset_X</Name><PropertyDefs>{props}</PropertyDefs></PropertySetDef>"


def test_unsupported_type_is_warned_not_fatal():
    d = parse_psd(doc("<PropertyDef><Name>T</Name><PropertyType><TypeComplexProperty/></PropertyType></PropertyDef>"))
    assert d.properties[0].ptype.kind == "unsupported"
    assert d.warnings


def test_enumeration_without_items_is_unsupported():
    d = parse_psd(doc("<PropertyDef><Name>S</Name><PropertyType><TypePropertyEnumeratedValue>"
                      "<EnumList name='E'/></TypePropertyEnumeratedValue></PropertyType></PropertyDef>"))
    assert d.properties[0].ptype.kind == "unsupported" and d.warnings


@pytest.mark.parametrize("xml", ["<PropertySetDef>", "<PropertySetDef><Definition/></PropertySetDef>"])
def test_malformed_documents(xml):
    with pytest.raises(PsdError):
        parse_psd(xml)
