"""Reader for buildingSMART Property Set Definition (PSD_IFC4.xsd) files."""

from __future__ import annotations

import logging
import os
import re
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

log = logging.getLogger(__name__)

# <PropertyType> child element -> ptype kind
PTYPE_ELEMENTS = {
    "TypePropertySingleValue": "single_value",
    "TypePropertyEnumeratedValue": "enumerated_value",
    "TypePropertyReferenceValue": "reference_value",
    "TypePropertyListValue": "list_value",
    "TypePropertyBoundedValue": "bounded_value",
    "TypePropertyTableValue": "table_value",
}


class PsdError(ValueError):
    pass


@dataclass(frozen=True)
class PropertyType:
    kind: str
    datatype: Optional[str] = None
    enum_name: Optional[str] = None
    items: tuple = ()
    ref_type: Optional[str] = None
    datatypes: tuple = ()  # table columns (defining, defined)

    def __post_init__(self):
        if self.kind == "enumerated_value" and not self.items:
            raise PsdError(f"enumeration {self.enum_name!r} has no items")


@dataclass
class PsdPropertyDef:
    name: str
    ptype: PropertyType
    definition: str = ""
    ifcguid: Optional[str] = None
    name_aliases: list = field(default_factory=list)
    definition_aliases: list = field(default_factory=list)

    @property
    def supported(self):
        return self.ptype.kind != "unsupported"


@dataclass
class PsdDocument:
    name: str
    definition: str = ""
    applicable_classes: list = field(default_factory=list)
    properties: list = field(default_factory=list)
    ifcguid: Optional[str] = None
    warnings: list = field(default_factory=list)

    @property
    def is_standard(self):
        return self.name.startswith("Pset_")


def _local(tag):
    return tag.rsplit("}", 1)[-1]


def _child(el, name):
    for c in el:
        if _local(c.tag) == name:
            return c
    return None


def _children(el, name):
    return [c for c in el if _local(c.tag) == name]


def _text(el):
    return " ".join((el.text or "").split()) if el is not None else ""


def _aliases(el, container, item):
    box = _child(el, container)
    if box is None:
        return []
    return [(a.get("lang", ""), (a.text or "").strip()) for a in _children(box, item)]


def _datatype(el):
    dt = _child(el, "DataType")
    return dt.get("type") if dt is not None else None


def _property_type(pdef, warnings, pname):
    box = _child(pdef, "PropertyType")
    if box is None or not len(box):
        warnings.append(f"{pname}: missing <PropertyType>")
        return PropertyType("unsupported")
    el = box[0]
    tag = _local(el.tag)
    kind = PTYPE_ELEMENTS.get(tag)
    if kind is None:
        warnings.append(f"{pname}: unsupported property type <{tag}>")
        return PropertyType("unsupported")
    if kind == "enumerated_value":
        enum = _child(el, "EnumList")
        if enum is None:
            warnings.append(f"{pname}: <TypePropertyEnumeratedValue> without <EnumList>")
            return PropertyType("unsupported")
        items = tuple(_text(i) for i in _children(enum, "EnumItem"))
        if not items:
            warnings.append(f"{pname}: enumeration {enum.get('name')} has no items")
            return PropertyType("unsupported")
        return PropertyType(kind, enum_name=enum.get("name"), items=items)
    if kind == "reference_value":
        return PropertyType(kind, ref_type=el.get("reftype") or _datatype(el))
    if kind == "list_value":
        inner = _child(el, "ListValue")
        return PropertyType(kind, datatype=_datatype(inner if inner is not None else el))
    if kind == "table_value":
        cols = []
        for part in ("DefiningValue", "DefinedValue"):
            sub = _child(el, part)
            if sub is not None:
                cols.append(_datatype(sub))
        return PropertyType(kind, datatype=cols[-1] if cols else None, datatypes=tuple(cols))
    return PropertyType(kind, datatype=_datatype(el))


def parse_psd(xml) -> PsdDocument:
    """Parse one PSD document from text or bytes (bytes honour the XML declaration)."""
    if isinstance(xml, str):
        # the declared encoding no longer applies once the text is decoded
        xml = re.sub(r"^\s*<\?xml[^>]*\?>", "", xml).encode("utf-8")
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as e:
        raise PsdError(f"malformed PSD XML: {e}") from None
    name = _text(_child(root, "Name"))
    if not name:
        raise PsdError("property set has no <Name>")
    doc = PsdDocument(name, _text(_child(root, "Definition")), ifcguid=root.get("ifcguid"))
    if not doc.is_standard:
        doc.warnings.append(f"non-standard property set name {name!r}")
    classes = _child(root, "ApplicableClasses")
    if classes is not None:
        doc.applicable_classes += [_text(c) for c in _children(classes, "ClassName")]
    for tv in _children(root, "ApplicableTypeValue"):
        if _text(tv) and _text(tv) not in doc.applicable_classes:
            doc.applicable_classes.append(_text(tv))
    defs = _child(root, "PropertyDefs")
    for pdef in _children(defs, "PropertyDef") if defs is not None else []:
        pname = _text(_child(pdef, "Name"))
        if not pname:
            raise PsdError(f"{name}: <PropertyDef> without <Name>")
        doc.properties.append(PsdPropertyDef(
            name=pname,
            ptype=_property_type(pdef, doc.warnings, pname),
            definition=_text(_child(pdef, "Definition")),
            ifcguid=pdef.get("ifcguid"),
            name_aliases=_aliases(pdef, "NameAliases", "NameAlias"),
            definition_aliases=_aliases(pdef, "DefinitionAliases", "DefinitionAlias"),
        ))
    for w in doc.warnings:
        log.warning("%s: %s", name, w)
    return doc


def read_psd(path) -> PsdDocument:
    with open(path, "rb") as fh:
        return parse_psd(fh.read())


def read_psd_dir(path, parallel=False) -> list:
    """All ``*.xml`` PSDs under a directory (or a single file), ordered by file name."""
    if os.path.isfile(path):
        return [read_psd(path)]
    names = sorted(n for n in os.listdir(path) if n.lower().endswith(".xml"))
    paths = [os.path.join(path, n) for n in names]
    if parallel:
        with ThreadPoolExecutor() as pool:
            return list(pool.map(read_psd, paths))
    return [read_psd(p) for p in paths]
