"""ISO 10303-21 (STEP Physical File) reading and writing.

Parameters are represented with plain Python values where one fits:
``int`` for integers, ``str`` for decoded strings and ``tuple`` for
aggregates. ``Real`` keeps the lexical form next to the float so a model
can be written back byte-for-byte.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from typing import Optional

MAX_DEPTH = 64
MAX_TOKEN = 1 << 20


class StepSyntaxError(ValueError):
    def __init__(self, message, line=None, col=None):
        self.line, self.col = line, col
        super().__init__(f"{message} (line {line}, column {col})" if line else message)


class _Sentinel:
    def __init__(self, text):
        self.text = text

    def __repr__(self):
        return self.text


UNSET = _Sentinel("$")
DERIVED = _Sentinel("*")


@dataclass(frozen=True)
class Real:
    value: float
    raw: str

    @classmethod
    def parse(cls, raw):
        return cls(float(raw), raw)

    @classmethod
    def of(cls, value: float):
        raw = repr(float(value)).upper()
        if "." not in raw:
            mantissa, _, exp = raw.partition("E")
            raw = mantissa + "." + ("E" + exp if exp else "")
        return cls(float(value), raw)


@dataclass(frozen=True)
class Ref:
    id: int


@dataclass(frozen=True)
class Enum:
    name: str


@dataclass(frozen=True)
class Binary:
    raw: str


@dataclass(frozen=True)
class Typed:
    keyword: str
    param: object


@dataclass
class StepInstance:
    id: int
    keyword: str
    params: tuple

    @property
    def param_count(self):
        return len(self.params)


@dataclass
class StepModel:
    header: list = field(default_factory=list)
    instances: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    schema_name: Optional[str] = None

    def __getitem__(self, id_):
        return self.instances[id_]

    def __len__(self):
        return len(self.instances)

    def by_keyword(self, keyword):
        kw = keyword.upper()
        return [inst for inst in self.instances.values() if inst.keyword == kw]

    def dangling(self):
        out = []
        for inst in self.instances.values():
            for ref in iter_refs(inst.params):
                if ref.id not in self.instances:
                    out.append((inst.id, ref.id))
        return out


def iter_refs(param):
    if isinstance(param, Ref):
        yield param
    elif isinstance(param, tuple):
        for p in param:
            yield from iter_refs(p)
    elif isinstance(param, Typed):
        yield from iter_refs(param.param)


# --- string codec ----------------------------------------------------------

_HEX = re.compile(r"[0-9A-Fa-f]+")


def decode_string(raw: str) -> str:
    """Decode the content between the quotes of an SPF string."""
    out, i, n = [], 0, len(raw)
    page = "iso8859-1"
    while i < n:
        c = raw[i]
        if c == "'":
            if raw[i + 1:i + 2] != "'":
                raise ValueError(f"lone quote at offset {i}")
            out.append("'")
            i += 2
        elif c != "\\":
            out.append(c)
            i += 1
        elif raw.startswith("\\\\", i):
            out.append("\\")
            i += 2
        elif raw.startswith("\\X2\\", i) or raw.startswith("\\X4\\", i):
            width = 4 if raw[i + 2] == "2" else 8
            end = raw.find("\\X0\\", i + 4)
            if end < 0:
                raise ValueError(f"malformed escape \\X{raw[i + 2]}\\ at offset {i}: missing \\X0\\")
            hexs = raw[i + 4:end]
            if len(hexs) % width or (hexs and not _HEX.fullmatch(hexs)):
                raise ValueError(f"malformed escape \\X{raw[i + 2]}\\ at offset {i}: bad hex run {hexs!r}")
            codec = "utf-16-be" if width == 4 else "utf-32-be"
            try:
                out.append(bytes.fromhex(hexs).decode(codec))
            except UnicodeDecodeError:
                raise ValueError(f"malformed escape \\X{raw[i + 2]}\\ at offset {i}: invalid code units") from None
            i = end + 4
        elif raw.startswith("\\X\\", i):
            hh = raw[i + 3:i + 5]
            if len(hh) != 2 or not _HEX.fullmatch(hh):
                raise ValueError(f"malformed escape \\X\\ at offset {i}")
            out.append(chr(int(hh, 16)))
            i += 5
        elif raw.startswith("\\S\\", i):
            if i + 3 >= n:
                raise ValueError(f"malformed escape \\S\\ at offset {i}")
            code = ord(raw[i + 3])
            if code > 0x7F:
                raise ValueError(f"malformed escape \\S\\ at offset {i}: non-ASCII base character")
            out.append(bytes([code + 0x80]).decode(page, errors="replace"))
            i += 4
        elif re.match(r"\\P[A-I]\\", raw[i:i + 4]):
            page = f"iso8859-{ord(raw[i + 2]) - ord('A') + 1}"
            i += 4
        else:
            raise ValueError(f"malformed escape {raw[i:i + 3]!r} at offset {i}")
    return "".join(out)


def encode_string(text: str) -> str:
    out, wide = [], []

    def flush():
        if wide:
            out.append("\\X2\\" + "".join(wide) + "\\X0\\")
            wide.clear()

    for ch in text:
        o = ord(ch)
        if 0x20 <= o <= 0x7E:
            flush()
            out.append("''" if ch == "'" else "\\\\" if ch == "\\" else ch)
        elif 0x80 <= o <= 0xFF:
            flush()
            out.append(f"\\X\\{o:02X}")
        elif o > 0xFFFF:
            flush()
            out.append(f"\\X4\\{o:08X}\\X0\\")
        else:
            wide.append(f"{o:04X}")
    flush()
    return "".join(out)


# --- tokenizer -------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>/\*.*?\*/)
  | (?P<string>'[^']*(?:''[^']*)*')
  | (?P<binary>"[0-9A-Fa-f]*")
  | (?P<ref>\#\d+)
  | (?P<enum>\.[A-Za-z_][A-Za-z0-9_]*\.)
  | (?P<number>[+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)
  | (?P<keyword>(?:END-)?ISO-10303-21|!?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),=;$*])
""", re.VERBOSE | re.DOTALL)


class _Reader:
    def __init__(self, text):
        self.text = text
        self.lines = [0] + [m.end() for m in re.finditer(r"\n", text)]
        self.toks = []
        pos, n = 0, len(text)
        while pos < n:
            m = _TOKEN.match(text, pos)
            if not m:
                if text[pos] == "'":
                    self.fail("unterminated string", pos)
                if text.startswith("/*", pos):
                    self.fail("unterminated comment", pos)
                self.fail(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            if kind not in ("ws", "comment"):
                if m.end() - pos > MAX_TOKEN:
                    self.fail("token exceeds maximum length", pos)
                self.toks.append((kind, m.group(), pos))
            pos = m.end()
        self.i = 0

    def where(self, pos):
        ln = bisect.bisect_right(self.lines, pos)
        return ln, pos - self.lines[ln - 1] + 1

    def fail(self, message, pos=None):
        if pos is None:
            tok = self.peek()
            pos = tok[2] if tok else len(self.text)
        raise StepSyntaxError(message, *self.where(pos))

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of file")
        self.i += 1
        return tok

    def expect(self, text):
        tok = self.next()
        if tok[1].upper() != text:
            self.fail(f"expected {text!r}, got {tok[1]!r}", tok[2])
        return tok

    def at(self, text):
        tok = self.peek()
        return tok is not None and tok[1].upper() == text

    def param(self, depth=0):
        if depth > MAX_DEPTH:
            self.fail(f"parameter nesting deeper than {MAX_DEPTH}")
        kind, text, pos = self.next()
        if kind == "string":
            try:
                return decode_string(text[1:-1])
            except ValueError as e:
                self.fail(str(e), pos)
        if kind == "number":
            if any(c in text for c in ".eE"):
                return Real.parse(text)
            return int(text)
        if kind == "ref":
            return Ref(int(text[1:]))
        if kind == "enum":
            return Enum(text[1:-1])
        if kind == "binary":
            return Binary(text[1:-1])
        if text == "$":
            return UNSET
        if text == "*":
            return DERIVED
        if text == "(":
            return self.param_list(depth + 1)
        if kind == "keyword":
            self.expect("(")
            inner = self.param(depth + 1)
            self.expect(")")
            return Typed(text.upper(), inner)
        self.fail(f"unexpected {text!r} in parameter list", pos)

    def param_list(self, depth):
        """Items up to and including the closing parenthesis."""
        items = []
        if self.at(")"):
            self.next()
            return tuple(items)
        while True:
            items.append(self.param(depth))
            kind, text, pos = self.next()
            if text == ")":
                return tuple(items)
            if text != ",":
                self.fail(f"expected ',' or ')', got {text!r}", pos)


def _header_schema(params):
    # FILE_SCHEMA(('IFC2X3'))
    if params and isinstance(params[0], tuple) and params[0] and isinstance(params[0][0], str):
        return params[0][0]
    return None


def parse_spf(text: str) -> StepModel:
    r = _Reader(text)
    model = StepModel()
    r.expect("ISO-10303-21")
    r.expect(";")
    r.expect("HEADER")
    r.expect(";")
    while not r.at("ENDSEC"):
        kind, kw, pos = r.next()
        if kind != "keyword":
            r.fail(f"expected header entity, got {kw!r}", pos)
        r.expect("(")
        params = r.param_list(1)
        end = r.expect(";")
        model.header.append(text[pos:end[2] + 1])
        if kw.upper() == "FILE_SCHEMA":
            model.schema_name = _header_schema(params)
    r.expect("ENDSEC")
    r.expect(";")
    while r.at("DATA"):
        r.next()
        if r.at("("):
            r.next()
            r.param_list(1)
        r.expect(";")
        while not r.at("ENDSEC"):
            kind, text_id, pos = r.next()
            if kind != "ref":
                r.fail(f"expected instance id, got {text_id!r}", pos)
            r.expect("=")
            kind, kw, kpos = r.next()
            if kind != "keyword":
                if kw == "(":
                    r.fail("complex entity instances are not supported", kpos)
                r.fail(f"expected entity keyword, got {kw!r}", kpos)
            r.expect("(")
            params = r.param_list(1)
            r.expect(";")
            iid = int(text_id[1:])
            if iid in model.instances:
                r.fail(f"duplicate instance id #{iid}", pos)
            model.instances[iid] = StepInstance(iid, kw.upper(), params)
        r.expect("ENDSEC")
        r.expect(";")
    r.expect("END-ISO-10303-21")
    r.expect(";")
    for src, target in model.dangling():
        model.warnings.append(f"#{src} references undefined #{target}")
    return model


def read_spf(path) -> StepModel:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError:
        text = data.decode("latin-1")
    return parse_spf(text)


# --- writer ----------------------------------------------------------------

def format_param(p) -> str:
    if p is UNSET:
        return "$"
    if p is DERIVED:
        return "*"
    if isinstance(p, bool):
        raise TypeError("booleans are written as Enum('T') / Enum('F')")
    if isinstance(p, int):
        return str(p)
    if isinstance(p, Real):
        return p.raw
    if isinstance(p, str):
        return "'" + encode_string(p) + "'"
    if isinstance(p, Ref):
        return f"#{p.id}"
    if isinstance(p, Enum):
        return f".{p.name}."
    if isinstance(p, Binary):
        return f'"{p.raw}"'
    if isinstance(p, Typed):
        return f"{p.keyword}({format_param(p.param)})"
    if isinstance(p, tuple):
        return "(" + ",".join(format_param(x) for x in p) + ")"
    raise TypeError(f"not a STEP parameter: {p!r}")


DEFAULT_HEADER = [
    "FILE_DESCRIPTION(('ViewDefinition [CoordinationView]'),'2;1');",
    "FILE_NAME('model.ifc','1970-01-01T00:00:00',(''),(''),'ifcwod','ifcwod','');",
]


def write_spf(model: StepModel) -> str:
    header = model.header or DEFAULT_HEADER + [f"FILE_SCHEMA(('{model.schema_name or 'IFC4'}'));"]
    lines = ["ISO-10303-21;", "HEADER;", *header, "ENDSEC;", "DATA;"]
    for iid in sorted(model.instances):
        inst = model.instances[iid]
        lines.append(f"#{iid}={inst.keyword}(" + ",".join(format_param(p) for p in inst.params) + ");")
    lines += ["ENDSEC;", "END-ISO-10303-21;"]
    return "\n".join(lines) + "\n"
