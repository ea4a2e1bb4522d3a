"""Seeded synthetic IFC models with known answers for the bundled benchmark queries."""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass

from .step import DERIVED, UNSET, Enum, Real, Ref, StepInstance, StepModel, Typed

_GUID_CHARS = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_$"


@dataclass(frozen=True)
class SyntheticParams:
    walls: int = 1000
    external_walls: int = 370
    doors: int = 400
    doors_with_reference: int = 250
    spaces: int = 300
    spaces_above: int = 120
    processes: int = 100
    threshold: float = 3.0
    seed: int = 7

    def __post_init__(self):
        for name, value in asdict(self).items():
            if name not in ("threshold", "seed") and value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        for part, whole in (("external_walls", "walls"), ("doors_with_reference", "doors"),
                            ("spaces_above", "spaces")):
            if getattr(self, part) > getattr(self, whole):
                raise ValueError(f"{part} cannot exceed {whole}")


def expected_counts(params: SyntheticParams) -> dict:
    """Ground-truth solution counts of the bundled query pairs, known by construction."""
    return {
        "Q1": params.external_walls,
        "Q2": params.doors_with_reference,
        "Q3": params.spaces_above,
        "P": max(params.processes - 1, 0),
    }


class _Builder:
    def __init__(self, seed):
        self.rng = random.Random(seed)
        self.model = StepModel(schema_name="IFC4")
        self.next_id = 1
        self._owner = None

    def add(self, keyword, *params) -> Ref:
        iid = self.next_id
        self.next_id += 1
        self.model.instances[iid] = StepInstance(iid, keyword, tuple(params))
        return Ref(iid)

    def guid(self):
        return "".join(self.rng.choice(_GUID_CHARS) for _ in range(22))

    @property
    def owner(self):
        if self._owner is None:
            self._owner = self.add("IFCOWNERHISTORY", UNSET, UNSET, UNSET, Enum("NOCHANGE"),
                                   UNSET, UNSET, UNSET, 0)
        return self._owner

    def root(self, name=UNSET):
        return (self.guid(), self.owner, name, UNSET)

    def single(self, name, value, unit=UNSET):
        return self.add("IFCPROPERTYSINGLEVALUE", name, UNSET, value, unit)

    def pset(self, name, props, objects):
        ps = self.add("IFCPROPERTYSET", *self.root(name), tuple(props))
        self.add("IFCRELDEFINESBYPROPERTIES", *self.root(), tuple(objects), ps)
        return ps


def generate(params: SyntheticParams = SyntheticParams()) -> StepModel:
    """Walls, doors and spaces each carry their own property set; tasks form one sequence chain."""
    b = _Builder(params.seed)
    rng = b.rng

    external = set(rng.sample(range(params.walls), params.external_walls))
    for i in range(params.walls):
        w = b.add("IFCWALLSTANDARDCASE", *b.root(f"Wall {i}"), UNSET, UNSET, UNSET, f"W{i}")
        b.pset("Pset_WallCommon", [
            b.single("Reference", Typed("IFCIDENTIFIER", f"WT-{i % 7}")),
            b.single("IsExternal", Typed("IFCBOOLEAN", Enum("T" if i in external else "F"))),
        ], [w])

    with_ref = set(rng.sample(range(params.doors), params.doors_with_reference))
    for i in range(params.doors):
        d = b.add("IFCDOOR", *b.root(f"Door {i}"), UNSET, UNSET, UNSET, f"D{i}",
                  Typed("IFCPOSITIVELENGTHMEASURE", Real.of(2.1)), Real.of(0.9))
        props = [b.single("FireRating", Typed("IFCLABEL", rng.choice(["EI30", "EI60", "EI90"])))]
        if i in with_ref:
            props.insert(0, b.single("Reference", Typed("IFCIDENTIFIER", f"D-{i:04d}")))
        b.pset("Pset_DoorCommon", props, [d])

    unit = b.add("IFCSIUNIT", DERIVED, Enum("AREAUNIT"), UNSET, Enum("SQUARE_METRE")) if params.spaces else None
    above = set(rng.sample(range(params.spaces), params.spaces_above))
    for i in range(params.spaces):
        if i in above:
            elevation = round(params.threshold + rng.uniform(0.01, 10.0), 2)
        else:
            elevation = round(rng.uniform(0.0, params.threshold - 0.01), 2)
        elevation = max(elevation, 0.0)
        s = b.add("IFCSPACE", *b.root(f"Space {i}"), UNSET, UNSET, UNSET, f"Room {i}",
                  Enum("ELEMENT"), Enum("INTERNAL"), Real.of(elevation))
        b.pset("Pset_SpaceCommon", [
            b.single("Reference", Typed("IFCIDENTIFIER", f"S-{i:04d}")),
            b.single("GrossPlannedArea", Typed("IFCAREAMEASURE", Real.of(round(rng.uniform(5, 80), 1))), unit),
        ], [s])

    tasks = []
    for i in range(params.processes):
        tasks.append(b.add("IFCTASK", *b.root(f"Task {i}"), UNSET, f"T{i}", UNSET,
                           UNSET, UNSET, Enum("F"), UNSET, UNSET, Enum("CONSTRUCTION")))
    for a, c in zip(tasks, tasks[1:]):
        b.add("IFCRELSEQUENCE", *b.root(), a, c, UNSET, Enum("FINISH_START"), UNSET)

    return b.model


def redundancy_fixture(k: int = 50, seed: int = 7) -> StepModel:
    """k walls, each with its own Pset_WallCommon holding an IsExternal value."""
    return generate(SyntheticParams(walls=k, external_walls=k // 2, doors=0, doors_with_reference=0,
                                    spaces=0, spaces_above=0, processes=0, seed=seed))
