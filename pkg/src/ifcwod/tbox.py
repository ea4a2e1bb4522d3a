"""Generation of the IfcWoD TBox.

Three sources feed it: a fixed core vocabulary for property values, object
properties derived from the INVERSE attributes of an EXPRESS schema, and one
namespace of object properties per property set definition.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Optional

from . import express
from .rdf import (
    IRI, Graph, Literal, Namespace, OWL, RDF, RDFS, RDF_TYPE, STANDARD_PREFIXES, XSD, lower_first,
)

log = logging.getLogger(__name__)

IFCWOD = Namespace("http://buildingsmart.org/ontology/ifcwod#")
IFCWOD_ONTOLOGY = IRI("http://buildingsmart.org/ontology/ifcwod")
PSET_BASE = "http://buildingsmart.org/ontology/ifcwod/"
DEFAULT_IFCOWL = "https://w3id.org/ifc/IFC4_ADD1#"


class ForgeError(ValueError):
    pass


def pset_namespace(pset_name: str) -> Namespace:
    return Namespace(f"{PSET_BASE}{pset_name}#")


def pset_prefix(pset_name: str) -> str:
    return lower_first(pset_name)


def base_graph(ifcowl: str = DEFAULT_IFCOWL) -> Graph:
    g = Graph()
    for p, ns in STANDARD_PREFIXES.items():
        g.bind(p, ns)
    g.bind("ifcowl", ifcowl)
    g.bind("ifcwod", str(IFCWOD))
    return g


def _label(text):
    return Literal(text, XSD.string)


# (property, domain classes, range classes, super-property)
CORE_PROPERTIES = [
    ("hasSimpleProperty", ["IfcPropertySet", "IfcComplexProperty"],
     ["IfcValue", "ENUMERATION", "IfcObjectReferenceSelect"], None),
    ("hasComplexProperty", ["IfcPropertySet", "IfcComplexProperty"], ["IfcComplexProperty"], None),
    ("hasReferenceValue", [], ["IfcObjectReferenceSelect"], "hasSimpleProperty"),
    ("hasSingleValue", [], ["IfcValue"], "hasSimpleProperty"),
    ("hasListValue", [], ["IfcValue"], "hasSimpleProperty"),
    ("hasEnumeratedValue", [], ["ENUMERATION"], "hasSimpleProperty"),
    ("hasTableValue", [], ["IfcValue"], "hasSimpleProperty"),
    ("hasBoundedValue", [], ["IfcValue"], "hasSimpleProperty"),
]

PTYPE_SUPER = {
    "single_value": "hasSingleValue",
    "enumerated_value": "hasEnumeratedValue",
    "reference_value": "hasReferenceValue",
    "list_value": "hasListValue",
    "bounded_value": "hasBoundedValue",
    "table_value": "hasTableValue",
    "unsupported": "hasSimpleProperty",
}

# value-node and coordinate vocabulary used by the instance converter
DATATYPE_PROPERTIES = ["value", "coordinateX", "coordinateY", "coordinateZ"]


def core_tbox(ifcowl: str = DEFAULT_IFCOWL) -> Graph:
    ifc = Namespace(ifcowl)
    g = base_graph(ifcowl)
    g.add(IFCWOD_ONTOLOGY, RDF_TYPE, OWL.Ontology)
    for name, domains, ranges, parent in CORE_PROPERTIES:
        prop = IFCWOD[name]
        g.add(prop, RDF_TYPE, OWL.ObjectProperty)
        g.add(prop, RDFS.label, _label(name))
        g.add(prop, RDFS.subPropertyOf, IFCWOD[parent] if parent else OWL.topObjectProperty)
        for d in domains:
            g.add(prop, RDFS.domain, ifc[d])
        for r in ranges:
            g.add(prop, RDFS.range, ifc[r])
    g.add(IFCWOD.hasComplexProperty, RDF_TYPE, OWL.IrreflexiveProperty)
    g.add(IFCWOD.hasUnit, RDF_TYPE, OWL.ObjectProperty)
    g.add(IFCWOD.hasUnit, RDFS.label, _label("hasUnit"))
    g.add(IFCWOD.hasUnit, RDFS.domain, ifc.IfcValue)
    g.add(IFCWOD.hasUnit, RDFS.range, ifc.IfcUnit)
    for name in DATATYPE_PROPERTIES:
        g.add(IFCWOD[name], RDF_TYPE, OWL.DatatypeProperty)
        g.add(IFCWOD[name], RDFS.label, _label(name))
    g.add(IFCWOD.value, RDFS.domain, ifc.IfcValue)
    return g


@dataclass(frozen=True)
class DerivedProperty:
    iri: IRI
    label: str
    domain: IRI
    range: Optional[IRI]
    provenance: tuple  # ("relationship", entity, inverse) | ("pset", pset, property)
    link: Optional[express.InverseLink] = None
    super_property: Optional[IRI] = None


def is_relationship(schema, name):
    return any(a.upper() == "IFCRELATIONSHIP" for a in express.supertype_chain(schema, name))


def relationship_properties(schema, ifcowl: str = DEFAULT_IFCOWL, warnings=None) -> list:
    """One property per INVERSE attribute whose relationship entity is an IfcRelationship subtype.

    Only inverses declared on the entity itself are used, so a property is
    named after its declaring entity (``isDefinedBy_IfcObject``) and reaches
    subclasses through its domain.
    """
    warnings = warnings if warnings is not None else []
    ifc = Namespace(ifcowl)
    out = []
    for name in sorted(schema.entities):
        diags = []
        for link in express.inverse_links(schema, name, inherited=False, diagnostics=diags):
            if not is_relationship(schema, link.relationship):
                continue
            if not schema.knows(link.r):
                warnings.append(f"{link.p}_{name}: range {link.r} is not declared in the schema")
            out.append(DerivedProperty(
                iri=IFCWOD[f"{link.p}_{name}"], label=link.p, domain=ifc[name], range=ifc[link.r],
                provenance=("relationship", name, link.inverse), link=link))
        warnings.extend(d.message for d in diags)
    for w in warnings:
        log.debug(w)
    return out


def derive_relationship_properties(schema, ifcowl: str = DEFAULT_IFCOWL, warnings=None) -> Graph:
    g = base_graph(ifcowl)
    for prop in relationship_properties(schema, ifcowl, warnings):
        g.add(prop.iri, RDF_TYPE, OWL.ObjectProperty)
        g.add(prop.iri, RDFS.domain, prop.domain)
        g.add(prop.iri, RDFS.range, prop.range)
        g.add(prop.iri, RDFS.label, _label(prop.label))
    return g


def pset_properties(doc, ifcowl: str = DEFAULT_IFCOWL, warnings=None) -> list:
    warnings = warnings if warnings is not None else []
    ifc = Namespace(ifcowl)
    ns = pset_namespace(doc.name)
    out, seen = [], {}
    for pdef in doc.properties:
        local = lower_first(pdef.name)
        if local in seen:
            seen[local] += 1
            warnings.append(f"{doc.name}: duplicate property {pdef.name!r} renamed to {local}_{seen[local]}")
            local = f"{local}_{seen[local]}"
        else:
            seen[local] = 1
        pt = pdef.ptype
        if pt.kind == "enumerated_value":
            rng = ns[pt.enum_name]
        elif pt.kind == "reference_value":
            rng = ifc[pt.ref_type] if pt.ref_type else None
        elif pt.kind == "unsupported":
            rng = None
        else:
            rng = ifc[pt.datatype] if pt.datatype else None
            if rng is None:
                warnings.append(f"{doc.name}.{pdef.name}: no <DataType>; range left open")
        out.append(DerivedProperty(
            iri=ns[local], label=pdef.name, domain=ifc.IfcPropertySet, range=rng,
            provenance=("pset", doc.name, pdef.name), super_property=IFCWOD[PTYPE_SUPER[pt.kind]]))
    return out


def enum_individual(ns: Namespace, enum_name: str, item: str) -> IRI:
    return ns[f"{enum_name}_{item}"]


def map_psd(doc, ifcowl: str = DEFAULT_IFCOWL, warnings=None) -> Graph:
    warnings = warnings if warnings is not None else []
    ifc = Namespace(ifcowl)
    ns = pset_namespace(doc.name)
    g = base_graph(ifcowl)
    g.bind(pset_prefix(doc.name), str(ns))
    onto = IRI(str(ns).rstrip("#"))
    g.add(onto, RDF_TYPE, OWL.Ontology)
    g.add(onto, RDFS.label, _label(doc.name))
    if doc.definition:
        g.add(onto, RDFS.comment, _label(doc.definition))
    props = pset_properties(doc, ifcowl, warnings)
    for prop, pdef in zip(props, doc.properties):
        p = prop.iri
        g.add(p, RDF_TYPE, OWL.ObjectProperty)
        g.add(p, RDFS.label, _label(pdef.name))
        if pdef.definition:
            g.add(p, RDFS.comment, _label(pdef.definition))
        for lang, text in pdef.name_aliases:
            if text:
                g.add(p, RDFS.label, Literal(text, lang=lang) if lang else _label(text))
        for lang, text in pdef.definition_aliases:
            if text:
                g.add(p, RDFS.comment, Literal(text, lang=lang) if lang else _label(text))
        g.add(p, RDFS.subPropertyOf, prop.super_property)
        g.add(p, RDFS.domain, prop.domain)
        if prop.range is not None:
            g.add(p, RDFS.range, prop.range)
        if pdef.ptype.kind == "enumerated_value":
            cls = prop.range
            g.add(cls, RDF_TYPE, OWL.Class)
            g.add(cls, RDFS.subClassOf, ifc.ENUMERATION)
            g.add(cls, RDFS.label, _label(pdef.ptype.enum_name))
            for item in pdef.ptype.items:
                ind = enum_individual(ns, pdef.ptype.enum_name, item)
                g.add(ind, RDF_TYPE, OWL.NamedIndividual)
                g.add(ind, RDF_TYPE, cls)
                g.add(ind, RDFS.label, _label(item))
    for w in warnings:
        log.warning(w)
    return g


# --- property characteristics ---------------------------------------------

CHARACTERISTICS = {
    "transitive": OWL.TransitiveProperty,
    "symmetric": OWL.SymmetricProperty,
    "reflexive": OWL.ReflexiveProperty,
    "irreflexive": OWL.IrreflexiveProperty,
}


def parse_characteristics(text: str, prefixes=None) -> list:
    """Parse ``kind IRI`` lines (``inverse IRI IRI`` for inverse pairs); ``#`` starts a comment."""
    prefixes = dict(prefixes or {})
    prefixes.setdefault("ifcwod", str(IFCWOD))

    def resolve(tok, lineno):
        if tok.startswith("<") and tok.endswith(">"):
            return IRI(tok[1:-1])
        prefix, sep, local = tok.partition(":")
        if sep and prefix in prefixes:
            return IRI(prefixes[prefix] + local)
        raise ForgeError(f"line {lineno}: cannot resolve {tok!r}")

    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = re.sub(r"(^|\s)#.*$", "", line).strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].lower()
        if kind == "prefix" and len(parts) == 3:
            prefixes[parts[1].rstrip(":")] = parts[2].strip("<>")
        elif kind in CHARACTERISTICS and len(parts) == 2:
            out.append((kind, resolve(parts[1], lineno)))
        elif kind == "inverse" and len(parts) == 3:
            out.append((kind, resolve(parts[1], lineno), resolve(parts[2], lineno)))
        else:
            raise ForgeError(f"line {lineno}: cannot parse {line!r}")
    return out


def apply_characteristics(graph: Graph, entries) -> Graph:
    for entry in entries:
        if entry[0] == "inverse":
            graph.add(entry[1], OWL.inverseOf, entry[2])
        else:
            graph.add(entry[1], RDF_TYPE, CHARACTERISTICS[entry[0]])
    return graph


# --- whole TBox ------------------------------------------------------------

def check_unique(props) -> None:
    seen = {}
    for prop in props:
        prev = seen.setdefault(prop.iri, prop.provenance)
        if prev != prop.provenance:
            raise ForgeError(f"{prop.iri} declared by both {prev} and {prop.provenance}")


def forge(schema=None, psds=(), ifcowl: str = DEFAULT_IFCOWL, characteristics=(), warnings=None) -> Graph:
    """Core + relationship + pset TBox merged into one graph."""
    g = core_tbox(ifcowl)
    props = []
    if schema is not None:
        props += relationship_properties(schema, ifcowl, warnings)
        g = g | derive_relationship_properties(schema, ifcowl, [])
    for doc in sorted(psds, key=lambda d: d.name):
        props += pset_properties(doc, ifcowl, [])
        g = g | map_psd(doc, ifcowl, warnings)
    check_unique(props)
    return apply_characteristics(g, characteristics)
