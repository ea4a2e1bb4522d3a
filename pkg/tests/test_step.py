import pytest

from ifcwod import step
from ifcwod.step import (
    DERIVED, UNSET, Binary, Enum, Real, Ref, StepSyntaxError, Typed, decode_string, encode_string, parse_spf,
)


def wrap(data):
    return "ISO-10303-21;HEADER;FILE_SCHEMA(('IFC4'));ENDSEC;DATA;" + data + "ENDSEC;END-ISO-10303-21;"


def test_wall_records(wall_model):
    m = wall_model
    assert m.schema_name == "IFC2X3"
    assert m[3060].keyword == "IFCWALLSTANDARDCASE"
    assert m[2937].params[2] == Typed("IFCLENGTHMEASURE", Real(0.32, "0.32"))
    assert m[2936].params[0] == "Retournement aux extrémités"
    rel = m[14997]
    assert rel.params[4] == tuple(Ref(i) for i in (2890, 2906, 3002, 3060, 4605, 4685, 12594, 12656))
    assert m[3085].params[1] == Enum("AXIS2")
    assert not m.dangling() and not m.warnings


def test_parameter_kinds():
    m = parse_spf(wrap("#1=IFCX($,*,-3,1.5E-3,.T.,\"0F\",'it''s',(1,(2)),IFCLABEL('a'));"))
    assert m[1].params == (UNSET, DERIVED, -3, Real(1.5e-3, "1.5E-3"), Enum("T"), Binary("0F"), "it's",
                           (1, (2,)), Typed("IFCLABEL", "a"))


def test_dangling_reference_is_a_warning():
    m = parse_spf(wrap("#1=IFCX(#9);"))
    assert m.dangling() == [(1, 9)]
    assert m.warnings


def test_comments_and_whitespace():
    m = parse_spf(wrap("/* c */ #1 = IFCX ( 1 , /* in */ 2 ) ;"))
    assert m[1].params == (1, 2)


@pytest.mark.parametrize("data,fragment", [
    ("#1=IFCX(1;", "expected"),
    ("#1=IFCX(1);#1=IFCY(2);", "duplicate"),
    ("#1=(IFCA(1)IFCB(2));", "complex"),
    ("#1=IFCX('unterminated);", ""),
])
def test_syntax_errors_carry_location(data, fragment):
    with pytest.raises(StepSyntaxError) as e:
        parse_spf(wrap(data))
    assert fragment in str(e.value)
    assert e.value.line == 1


def test_string_codec():
    assert decode_string("\\X2\\00E9\\X0\\") == "é"
    assert decode_string(r"\X\E9") == "é"
    assert decode_string(r"\S\i") == "é"
    assert decode_string("\\X4\\0001F600\\X0\\") == "\U0001F600"
    assert decode_string("a''b") == "a'b"
    for text in ["plain", "é\\", "日本語", "\U0001F600", "tab\tquote'"]:
        assert decode_string(encode_string(text)) == text
        assert encode_string(text).isascii()


@pytest.mark.parametrize("raw", [r"\X2\00E", r"\Q\x", "lone'quote"])
def test_malformed_escapes_raise(raw):
    with pytest.raises(ValueError):
        decode_string(raw)


def test_real_of_keeps_spf_lexical_form():
    assert Real.of(0.0).raw == "0.0"
    assert Real.of(1e300).raw == "1.E+300"
    assert float(Real.of(-2.5e-7).raw) == -2.5e-7


def test_write_then_read_is_identity(wall_model):
    text = step.write_spf(wall_model)
    again = parse_spf(text)
    assert again.instances == wall_model.instances
    assert step.write_spf(again) == text


def test_format_param_rejects_python_bool():
    with pytest.raises(TypeError):
        step.format_param(True)
