import pytest

from ifcwod import step, synthetic
from ifcwod.synthetic import SyntheticParams, expected_counts, generate


def small(**kw):
    base = dict(walls=20, external_walls=7, doors=10, doors_with_reference=4, spaces=8, spaces_above=3,
                processes=5, seed=3)
    base.update(kw)
    return SyntheticParams(**base)


def test_deterministic_for_a_seed():
    assert step.write_spf(generate(small())) == step.write_spf(generate(small()))
    assert step.write_spf(generate(small())) != step.write_spf(generate(small(seed=4)))


def test_counts_by_construction():
    m = generate(small())
    assert len(m.by_keyword("IFCWALLSTANDARDCASE")) == 20
    assert len(m.by_keyword("IFCDOOR")) == 10
    assert len(m.by_keyword("IFCSPACE")) == 8
    assert len(m.by_keyword("IFCTASK")) == 5
    assert len(m.by_keyword("IFCRELSEQUENCE")) == 4
    external = [p for p in m.by_keyword("IFCPROPERTYSINGLEVALUE")
                if p.params[0] == "IsExternal" and p.params[2] == step.Typed("IFCBOOLEAN", step.Enum("T"))]
    assert len(external) == 7
    assert not m.dangling()


def test_expected_counts():
    assert expected_counts(small()) == {"Q1": 7, "Q2": 4, "Q3": 3, "P": 4}
    assert expected_counts(small(processes=0))["P"] == 0


def test_all_zero_is_empty():
    zero = SyntheticParams(walls=0, external_walls=0, doors=0, doors_with_reference=0, spaces=0,
                           spaces_above=0, processes=0)
    assert len(generate(zero)) == 0


@pytest.mark.parametrize("kw", [dict(walls=-1), dict(external_walls=30), dict(spaces_above=9)])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        small(**kw)


def test_spf_round_trip():
    m = generate(small())
    assert step.parse_spf(step.write_spf(m)).instances == m.instances


def test_redundancy_fixture_shape():
    m = synthetic.redundancy_fixture(10)
    assert len(m.by_keyword("IFCWALLSTANDARDCASE")) == 10
    assert len(m.by_keyword("IFCPROPERTYSET")) == 10
