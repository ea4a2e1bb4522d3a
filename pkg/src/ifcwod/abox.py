"""Conversion of STEP instance data into RDF.

Three modes are supported. ``ifcowl`` keeps the relationship-as-instance
modelling, ``ifcwod`` emits only the direct properties, and ``both`` emits
their union.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional
from urllib.parse import quote

from . import express, step, tbox as tb
from .rdf import (
    IRI, BNode, Graph, Literal, Namespace, OWL, RDFS, RDF_TYPE, XSD, lower_first,
)

log = logging.getLogger(__name__)

MODES = ("ifcowl", "ifcwod", "both")
POLICIES = ("literal_unless_unit", "always_node")
DEFAULT_BASE = "http://example.org/ifc/"

_BUILTINS = {"INTEGER", "REAL", "NUMBER", "BOOLEAN", "LOGICAL", "STRING", "BINARY"}
_COORDS = ("coordinateX", "coordinateY", "coordinateZ")

# IfcProperty subtypes handled by the pset enrichment, with the core property a minted one hangs under
_MEMBER_KINDS = {
    "IfcPropertySingleValue": "hasSingleValue",
    "IfcPropertyEnumeratedValue": "hasEnumeratedValue",
    "IfcPropertyListValue": "hasListValue",
    "IfcPropertyReferenceValue": "hasReferenceValue",
}


class ConversionError(ValueError):
    pass


@dataclass
class ConversionConfig:
    mode: str = "both"
    base: str = DEFAULT_BASE
    flatten_fixed_lists: bool = True
    value_node_policy: str = "literal_unless_unit"
    ifcowl: str = tb.DEFAULT_IFCOWL

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConversionError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.value_node_policy not in POLICIES:
            raise ConversionError(f"unknown value node policy {self.value_node_policy!r}")
        IRI(self.base)  # validates absoluteness


@dataclass
class Diagnostics:
    warnings: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def warn(self, msg):
        log.warning(msg)
        self.warnings.append(msg)

    def error(self, msg):
        log.error(msg)
        self.errors.append(msg)


def base_type(schema, name):
    """Follow defined types down to a builtin, select, enumeration or entity name."""
    seen = set()
    while name and name.upper() not in _BUILTINS:
        key = schema.canonical(name) if schema else None
        if key is None or key not in schema.types or key in seen:
            return key or name
        seen.add(key)
        name = schema.types[key]
    return name.upper() if name else name


def _real_literal(r: step.Real):
    raw = r.raw.lstrip("+")
    mantissa, e, exp = raw.upper().partition("E")
    if mantissa.endswith("."):
        mantissa += "0"
    if mantissa.startswith(".") or mantissa.startswith("-."):
        mantissa = mantissa.replace(".", "0.", 1)
    if e:
        return Literal(f"{mantissa}E{exp}", XSD.double)
    return Literal(mantissa, XSD.decimal)


def _kind_of(value):
    if isinstance(value, bool):
        return "BOOLEAN"
    if isinstance(value, int):
        return "INTEGER"
    if isinstance(value, step.Real):
        return "REAL"
    if isinstance(value, str):
        return "STRING"
    if isinstance(value, step.Enum):
        return "ENUM"
    if isinstance(value, step.Binary):
        return "BINARY"
    return None


_COMPATIBLE = {
    "INTEGER": {"INTEGER", "NUMBER", "REAL"},
    "REAL": {"REAL", "NUMBER"},
    "STRING": {"STRING"},
    "BINARY": {"BINARY"},
    "ENUM": {"BOOLEAN", "LOGICAL"},
}


def map_value(param, expected_type=None, schema=None, ifcowl=tb.DEFAULT_IFCOWL, diagnostics=None):
    """Leaf STEP parameter -> RDF term; ``None`` for ``$`` and ``*``."""
    diags = diagnostics if diagnostics is not None else Diagnostics()
    if param is step.UNSET or param is step.DERIVED:
        return None
    if isinstance(param, step.Typed):
        return map_value(param.param, param.keyword, schema, ifcowl, diags)
    expected = base_type(schema, expected_type) if expected_type else None
    kind = _kind_of(param)
    if kind is None:
        raise ConversionError(f"not a leaf value: {param!r}")

    if kind == "ENUM":
        name = param.name
        if expected in ("BOOLEAN", "LOGICAL") and name in ("T", "F"):
            return Literal("true" if name == "T" else "false", XSD.boolean)
        if expected and schema is not None and schema.is_enumeration(expected):
            items = schema.enumerations[schema.canonical(expected)]
            if name.upper() in (i.upper() for i in items):
                return IRI(Namespace(ifcowl) + name.upper())
        if expected is None and name in ("T", "F"):
            return Literal("true" if name == "T" else "false", XSD.boolean)
        diags.warn(f"enumeration value .{name}. not resolvable against {expected_type}; kept as string")
        return Literal(name)

    if expected and expected in _BUILTINS and expected not in _COMPATIBLE[kind]:
        diags.warn(f"{kind.lower()} value {param!r} does not match expected type {expected_type}")
    elif expected and schema is not None and (schema.entity(expected) or schema.is_enumeration(expected)):
        diags.warn(f"{kind.lower()} value {param!r} given where {expected_type} is expected")

    if kind == "INTEGER":
        if expected in ("REAL", "NUMBER"):
            return Literal(str(param), XSD.decimal)
        return Literal(str(param), XSD.integer)
    if kind == "REAL":
        return _real_literal(param)
    if kind == "BINARY":
        return Literal(param.raw[1:], XSD.hexBinary)
    return Literal(param)


class Converter:
    def __init__(self, model, schema, tbox: Optional[Graph] = None, cfg: Optional[ConversionConfig] = None):
        self.model = model
        self.schema = schema
        self.cfg = cfg or ConversionConfig()
        self.ifc = Namespace(self.cfg.ifcowl)
        self.diagnostics = Diagnostics()
        self.tbox = tbox if tbox is not None else Graph()
        self._declared = set(self.tbox.subjects(RDF_TYPE, OWL.ObjectProperty))
        self._attrs = {}
        self._names = {}
        self._minted = set()

    # --- symbol table ----------------------------------------------------

    def entity_name(self, keyword):
        if keyword not in self._names:
            e = self.schema.entity(keyword)
            self._names[keyword] = e.name if e is not None else keyword
        return self._names[keyword]

    def iri(self, id_):
        inst = self.model.instances.get(id_)
        if inst is None:
            return None
        return IRI(f"{self.cfg.base}{self.entity_name(inst.keyword)}_{id_}")

    def attributes(self, name):
        if name not in self._attrs:
            self._attrs[name] = express.all_attributes(self.schema, name)
        return self._attrs[name]

    def param(self, inst, attr_name):
        for (a, _owner), value in zip(self.attributes(self.entity_name(inst.keyword)), inst.params):
            if a.name == attr_name:
                return value
        return step.UNSET

    def is_a(self, inst, ancestor):
        return express.is_subtype(self.schema, self.entity_name(inst.keyword), ancestor)

    def leaf(self, value, expected):
        if isinstance(value, step.Ref):
            target = self.iri(value.id)
            if target is None:
                self.diagnostics.warn(f"dangling reference #{value.id}")
            return target
        return map_value(value, expected, self.schema, self.cfg.ifcowl, self.diagnostics)

    # --- driver ----------------------------------------------------------

    def convert(self) -> Graph:
        g = tb.base_graph(self.cfg.ifcowl)
        g.bind("", self.cfg.base)
        if self.cfg.mode in ("ifcowl", "both"):
            self.baseline(g)
        if self.cfg.mode in ("ifcwod", "both"):
            self.relationships(g)
            self.property_sets(g)
            if self.cfg.flatten_fixed_lists:
                self.coordinates(g)
        return g

    # --- baseline ----------------------------------------------------------

    def baseline(self, g):
        for id_ in sorted(self.model.instances):
            inst = self.model.instances[id_]
            name = self.entity_name(inst.keyword)
            subj = self.iri(id_)
            g.add(subj, RDF_TYPE, self.ifc[name])
            if self.schema.entity(name) is None:
                self.diagnostics.warn(f"#{id_}: {inst.keyword} is not in the schema; attributes skipped")
                continue
            attrs = self.attributes(name)
            if len(attrs) != len(inst.params):
                self.diagnostics.warn(
                    f"#{id_}: {name} expects {len(attrs)} parameters, found {len(inst.params)}")
            for (a, owner), value in zip(attrs, inst.params):
                pred = f"{a.name}_of_{owner}"
                self._emit_attr(g, subj, pred, value, a, ordered=a.is_ordered)

    def _emit_attr(self, g, subj, pred, value, a, ordered):
        if value is step.UNSET or value is step.DERIVED:
            return
        if isinstance(value, tuple):
            for i, item in enumerate(value, 1):
                if ordered:
                    self._emit_attr(g, subj, f"{pred}_{i}", item, a, ordered=True)
                else:
                    self._emit_attr(g, subj, pred, item, a, ordered=False)
            return
        obj = self.leaf(value, a.type_name)
        if obj is not None:
            g.add(subj, self.ifc[pred], obj)

    # --- enrichment: relationships ----------------------------------------

    def relationship_properties(self):
        props = tb.relationship_properties(self.schema, self.cfg.ifcowl, [])
        if self._declared:
            props = [p for p in props if p.iri in self._declared]
        return [p for p in props if p.link.counterpart is not None]

    def relationships(self, g):
        props = self.relationship_properties()
        for id_ in sorted(self.model.instances):
            inst = self.model.instances[id_]
            if not self.is_a(inst, "IfcRelationship"):
                continue
            for prop in props:
                link = prop.link
                if not self.is_a(inst, link.relationship):
                    continue
                xs = self.param(inst, link.for_attribute)
                ys = self.param(inst, link.counterpart)
                if xs is step.UNSET or ys is step.UNSET:
                    self.diagnostics.warn(
                        f"#{id_}: {link.for_attribute} or {link.counterpart} unset; no {prop.label} triple")
                    continue
                for x in _refs(xs):
                    xi = self.model.instances.get(x.id)
                    if xi is None or not self.is_a(xi, link.entity):
                        continue
                    for y in _refs(ys):
                        yi = self.iri(y.id)
                        if yi is not None:
                            g.add(self.iri(x.id), prop.iri, yi)

    # --- enrichment: property sets ----------------------------------------

    def pset_property(self, g, pset_name, prop_name, kind):
        candidate = tb.pset_namespace(pset_name)[lower_first(prop_name)]
        if candidate in self._declared:
            g.bind(tb.pset_prefix(pset_name), tb.pset_namespace(pset_name))
            return candidate, True
        ns = Namespace(f"{self.cfg.base}psd/{quote(pset_name, safe='')}#")
        iri = ns[quote(lower_first(prop_name), safe="")]
        if iri not in self._minted:
            self._minted.add(iri)
            self.diagnostics.warn(f"{pset_name}.{prop_name}: not in the forged TBox; minted {iri}")
        g.add(iri, RDF_TYPE, OWL.ObjectProperty)
        g.add(iri, RDFS.label, Literal(prop_name))
        g.add(iri, RDFS.subPropertyOf, tb.IFCWOD[kind])
        return iri, False

    def enum_individual(self, prop, item):
        cls = self.tbox.value(prop, RDFS.range)
        if cls is None:
            return None
        for ind in self.tbox.subjects(RDF_TYPE, cls):
            label = self.tbox.value(ind, RDFS.label)
            if label is not None and label.lexical.upper() == item.upper():
                return ind
        return None

    def value_term(self, g, member, value, unit):
        if value is step.UNSET or value is step.DERIVED:
            return None
        lit = self.leaf(value, "IfcValue")
        if lit is None:
            return None
        if unit is step.UNSET and self.cfg.value_node_policy == "literal_unless_unit":
            return lit
        node = BNode(f"value_{member.id}")
        type_name = value.keyword if isinstance(value, step.Typed) else "IfcValue"
        g.add(node, RDF_TYPE, self.ifc[self.schema.canonical(type_name) or type_name])
        g.add(node, tb.IFCWOD.value, lit)
        if isinstance(unit, step.Ref) and self.iri(unit.id) is not None:
            g.add(node, tb.IFCWOD.hasUnit, self.iri(unit.id))
        return node

    def property_sets(self, g):
        for id_ in sorted(self.model.instances):
            inst = self.model.instances[id_]
            if self.entity_name(inst.keyword) == "IfcPropertySet" or (
                    self.schema.entity(inst.keyword) and self.is_a(inst, "IfcPropertySet")):
                name = self.param(inst, "Name")
                if not isinstance(name, str):
                    self.diagnostics.warn(f"#{id_}: property set without a Name; skipped")
                    continue
                self.members(g, inst, name, self.param(inst, "HasProperties"), (id_,))

    def members(self, g, owner, set_name, refs, stack):
        subj = self.iri(owner.id)
        for ref in _refs(refs):
            member = self.model.instances.get(ref.id)
            if member is None:
                self.diagnostics.warn(f"#{owner.id}: dangling property #{ref.id}")
                continue
            kind = self.entity_name(member.keyword)
            if kind == "IfcComplexProperty":
                if member.id in stack:
                    path = " -> ".join(f"#{i}" for i in stack + (member.id,))
                    self.diagnostics.error(f"cyclic complex property: {path}")
                    continue
                g.add(subj, tb.IFCWOD.hasComplexProperty, self.iri(member.id))
                usage = self.param(member, "UsageName")
                self.members(g, member, usage if isinstance(usage, str) else set_name,
                             self.param(member, "HasProperties"), stack + (member.id,))
                continue
            if kind not in _MEMBER_KINDS:
                self.diagnostics.warn(f"#{member.id}: {kind} members are not enriched")
                continue
            prop_name = self.param(member, "Name")
            if not isinstance(prop_name, str):
                self.diagnostics.warn(f"#{member.id}: property without a Name; skipped")
                continue
            pred, forged = self.pset_property(g, set_name, prop_name, _MEMBER_KINDS[kind])
            for obj in self.member_values(g, member, kind, pred if forged else None):
                g.add(subj, pred, obj)

    def member_values(self, g, member, kind, forged_pred):
        if kind == "IfcPropertySingleValue":
            term = self.value_term(g, member, self.param(member, "NominalValue"), self.param(member, "Unit"))
            return [term] if term is not None else []
        if kind == "IfcPropertyReferenceValue":
            ref = self.param(member, "PropertyReference")
            target = self.leaf(ref, None) if isinstance(ref, step.Ref) else None
            return [target] if target is not None else []
        if kind == "IfcPropertyEnumeratedValue":
            out = []
            for v in _leaves(self.param(member, "EnumerationValues")):
                inner = v.param if isinstance(v, step.Typed) else v
                ind = self.enum_individual(forged_pred, str(inner)) if forged_pred and isinstance(inner, str) else None
                term = ind if ind is not None else self.leaf(v, "IfcValue")
                if term is not None:
                    out.append(term)
            return out
        out = []
        unit = self.param(member, "Unit")
        for v in _leaves(self.param(member, "ListValues")):
            lit = self.leaf(v, "IfcValue")
            if lit is not None and unit is step.UNSET:
                out.append(lit)
            elif lit is not None:
                self.diagnostics.warn(f"#{member.id}: list value units are not modelled; literal kept")
                out.append(lit)
        return out

    # --- enrichment: coordinates ------------------------------------------

    def coordinates(self, g):
        for id_ in sorted(self.model.instances):
            inst = self.model.instances[id_]
            if self.entity_name(inst.keyword) != "IfcCartesianPoint":
                continue
            coords = self.param(inst, "Coordinates")
            if not isinstance(coords, tuple) or len(coords) > 3:
                continue
            for pred, value in zip(_COORDS, coords):
                obj = self.leaf(value, "IfcLengthMeasure")
                if obj is not None:
                    g.add(self.iri(id_), tb.IFCWOD[pred], obj)


def _refs(value):
    if isinstance(value, step.Ref):
        return [value]
    if isinstance(value, tuple):
        return [v for v in value if isinstance(v, step.Ref)]
    return []


def _leaves(value):
    if isinstance(value, tuple):
        return list(value)
    if value is step.UNSET or value is step.DERIVED:
        return []
    return [value]


def convert(model, schema, tbox: Optional[Graph] = None, cfg: Optional[ConversionConfig] = None,
            diagnostics: Optional[Diagnostics] = None) -> Graph:
    c = Converter(model, schema, tbox, cfg)
    g = c.convert()
    if diagnostics is not None:
        diagnostics.warnings.extend(c.diagnostics.warnings)
        diagnostics.errors.extend(c.diagnostics.errors)
    return g
