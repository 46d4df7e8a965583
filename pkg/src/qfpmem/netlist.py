"""Circuit representation, SPICE-subset netlist parser and cell builders.

Supported cards::

    Rname n+ n- <value>
    Cname n+ n- <value> [IC=<v>]
    Lname n+ n- <value> [IC=<i>]
    Vname n+ n- [DC] <value>
    Vname n+ n- PULSE(v1 v2 td tr tf pw per)
    Mname n+ n- [RON=..] [ROFF=..] [VON=..] [VOFF=..] [TAU=..] [VT=..] [X0=..]
                [MODE=det|stoch] [N=<int>] [SEED=<int>]
    .tran [tstep] <tstop>
    .end
    * comment

The first line is always the title.  Values accept the SPICE scale
suffixes f p n u m k meg g (case-insensitive, ``meg`` is 1e6 and ``m``
is 1e-3).  Node ``gnd`` is an alias of ground ``0``.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field, fields, replace
from typing import Union

from .devices import MemristorParams
from .errors import (
    DanglingNode,
    DuplicateName,
    InvalidParam,
    NetlistSyntaxError,
    UnknownElement,
)

GROUND = "0"

_SUFFIX = {
    "f": 1e-15,
    "p": 1e-12,
    "n": 1e-9,
    "u": 1e-6,
    "m": 1e-3,
    "k": 1e3,
    "meg": 1e6,
    "g": 1e9,
}
_NUMBER = re.compile(
    r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?)(meg|[fpnumkg])?$", re.IGNORECASE
)


def parse_value(token: str) -> float:
    """Convert a SPICE number such as ``1.2n`` or ``10meg`` to a float."""
    m = _NUMBER.match(token.strip())
    if not m:
        raise ValueError(f"bad number {token!r}")
    value = float(m.group(1))
    if m.group(2):
        value *= _SUFFIX[m.group(2).lower()]
    return value


def _node(label: str) -> str:
    return GROUND if label.lower() == "gnd" else label


def _positive(name: str, **values: float) -> None:
    for key, value in values.items():
        if not (value > 0 and math.isfinite(value)):
            raise InvalidParam(f"{name}: {key} must be positive, got {value}")


# -- elements ----------------------------------------------------------------

@dataclass(frozen=True)
class _TwoTerminal:
    name: str
    n_plus: str
    n_minus: str

    def __post_init__(self):
        object.__setattr__(self, "n_plus", _node(str(self.n_plus)))
        object.__setattr__(self, "n_minus", _node(str(self.n_minus)))
        if not self.name:
            raise InvalidParam("element name must be non-empty")

    @property
    def nodes(self) -> tuple[str, str]:
        return (self.n_plus, self.n_minus)


@dataclass(frozen=True)
class Resistor(_TwoTerminal):
    r: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        _positive(self.name, r=self.r)


@dataclass(frozen=True)
class Capacitor(_TwoTerminal):
    c: float = 1e-12
    v0: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        _positive(self.name, c=self.c)


@dataclass(frozen=True)
class Inductor(_TwoTerminal):
    l: float = 1e-9
    i0: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        _positive(self.name, l=self.l)


@dataclass(frozen=True)
class VDC(_TwoTerminal):
    v: float = 0.0


@dataclass(frozen=True)
class VPulse(_TwoTerminal):
    v1: float = 0.0
    v2: float = 1.0
    td: float = 0.0
    tr: float = 1e-9
    tf: float = 1e-9
    pw: float = 1e-6
    per: float = 2e-6

    def __post_init__(self):
        super().__post_init__()
        _positive(self.name, tr=self.tr, tf=self.tf, pw=self.pw)
        if self.td < 0:
            raise InvalidParam(f"{self.name}: td must be >= 0, got {self.td}")
        if self.per < (self.tr + self.pw + self.tf) * (1 - 1e-12):
            raise InvalidParam(f"{self.name}: per must be >= tr+pw+tf")

    @property
    def frequency(self) -> float:
        return 1.0 / self.per


@dataclass(frozen=True)
class Memristor(_TwoTerminal):
    params: MemristorParams = field(default_factory=MemristorParams)
    x0: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 <= self.x0 <= 1.0:
            raise InvalidParam(f"{self.name}: x0 must lie in [0, 1], got {self.x0}")


Element = Union[Resistor, Capacitor, Inductor, VDC, VPulse, Memristor]
Source = Union[VDC, VPulse]


# -- circuit -----------------------------------------------------------------

@dataclass(frozen=True)
class Circuit:
    """An ordered element list plus the optional ``.tran`` stop time."""

    title: str
    elements: tuple = ()
    tstop: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        seen: dict[str, str] = {}
        for el in self.elements:
            key = el.name.upper()
            if key in seen:
                raise DuplicateName(f"duplicate element name {el.name!r} (also {seen[key]!r})")
            seen[key] = el.name
        if self.tstop is not None and not self.tstop > 0:
            raise InvalidParam(f"tstop must be positive, got {self.tstop}")

    @property
    def nodes(self) -> set[str]:
        out = {GROUND}
        for el in self.elements:
            out.update(el.nodes)
        return out

    @property
    def sources(self) -> list[Source]:
        return [el for el in self.elements if isinstance(el, (VDC, VPulse))]

    @property
    def memristors(self) -> list[Memristor]:
        return [el for el in self.elements if isinstance(el, Memristor)]

    def element(self, name: str) -> Element:
        for el in self.elements:
            if el.name.upper() == name.upper():
                return el
        raise KeyError(name)

    def node_degrees(self) -> Counter:
        deg: Counter = Counter()
        for el in self.elements:
            for n in el.nodes:
                deg[n] += 1
        return deg

    def check_simulatable(self) -> None:
        """Raise unless the circuit has a source, ground and no dangling node."""
        if not self.sources:
            raise InvalidParam("circuit has no source")
        if len(self.nodes) < 2:
            raise InvalidParam("circuit needs at least two nodes")
        deg = self.node_degrees()
        if deg[GROUND] == 0:
            raise InvalidParam("no element is connected to ground node 0")
        for node, d in sorted(deg.items()):
            if node != GROUND and d < 2:
                raise DanglingNode(f"node {node!r} is connected to a single terminal")

    def replace_element(self, name: str, new: Element) -> Circuit:
        els = [new if el.name.upper() == name.upper() else el for el in self.elements]
        return replace(self, elements=tuple(els))


# -- parser ------------------------------------------------------------------

_MEM_KEYS = {
    "RON": "r_on",
    "ROFF": "r_off",
    "VON": "v_on",
    "VOFF": "v_off",
    "TAU": "tau_c",
    "VT": "v_t",
}


def _tokens(line: str) -> list[str]:
    line = re.sub(r"\s*=\s*", "=", line)
    return line.replace("(", " ").replace(")", " ").replace(",", " ").split()


def _num(token: str, what: str, lineno: int) -> float:
    try:
        return parse_value(token)
    except ValueError:
        raise NetlistSyntaxError(f"{what}: bad number {token!r}", lineno) from None


def _keyvals(tokens: list[str], allowed: set[str], lineno: int) -> dict[str, str]:
    out: dict[str, str] = {}
    for tok in tokens:
        if "=" not in tok:
            raise NetlistSyntaxError(f"expected KEY=value, got {tok!r}", lineno)
        key, _, val = tok.partition("=")
        key = key.upper()
        if key not in allowed:
            raise NetlistSyntaxError(f"unknown parameter {key!r}", lineno)
        if key in out:
            raise NetlistSyntaxError(f"parameter {key!r} given twice", lineno)
        if not val:
            raise NetlistSyntaxError(f"parameter {key!r} has no value", lineno)
        out[key] = val
    return out


def _parse_passive(tok: list[str], lineno: int) -> Element:
    kind = tok[0][0].upper()
    if len(tok) < 4:
        raise NetlistSyntaxError(
            f"expected '{tok[0]} n+ n- value', got {len(tok) - 1} fields (missing node or value)",
            lineno,
        )
    name, n1, n2 = tok[0], tok[1], tok[2]
    value = _num(tok[3], name, lineno)
    if kind == "R":
        if len(tok) != 4:
            raise NetlistSyntaxError(f"{name}: unexpected trailing fields {tok[4:]}", lineno)
        return Resistor(name, n1, n2, value)
    kv = _keyvals(tok[4:], {"IC"}, lineno)
    ic = _num(kv["IC"], name, lineno) if "IC" in kv else 0.0
    if kind == "C":
        return Capacitor(name, n1, n2, value, ic)
    return Inductor(name, n1, n2, value, ic)


def _parse_vsource(tok: list[str], lineno: int) -> Element:
    if len(tok) < 4:
        raise NetlistSyntaxError(f"expected '{tok[0]} n+ n- value', missing node or value", lineno)
    name, n1, n2 = tok[0], tok[1], tok[2]
    rest = tok[3:]
    if rest[0].upper() == "PULSE":
        args = rest[1:]
        if len(args) != 7:
            raise NetlistSyntaxError(f"{name}: PULSE needs 7 values (v1 v2 td tr tf pw per), got {len(args)}", lineno)
        v1, v2, td, tr, tf, pw, per = (_num(a, name, lineno) for a in args)
        return VPulse(name, n1, n2, v1, v2, td, tr, tf, pw, per)
    if rest[0].upper() == "DC":
        rest = rest[1:]
    if len(rest) != 1:
        raise NetlistSyntaxError(f"{name}: expected a single DC value", lineno)
    return VDC(name, n1, n2, _num(rest[0], name, lineno))


def _parse_memristor(tok: list[str], lineno: int) -> Element:
    if len(tok) < 3 or "=" in tok[1] or "=" in tok[2]:
        raise NetlistSyntaxError(f"expected '{tok[0]} n+ n- [KEY=value ...]', missing node", lineno)
    name, n1, n2 = tok[0], tok[1], tok[2]
    kv = _keyvals(tok[3:], set(_MEM_KEYS) | {"X0", "MODE", "N", "SEED"}, lineno)
    kwargs: dict = {}
    for key, attr in _MEM_KEYS.items():
        if key in kv:
            kwargs[attr] = _num(kv[key], name, lineno)
    if "MODE" in kv:
        mode = kv["MODE"].lower()
        if mode in ("det", "deterministic"):
            kwargs["mode"] = "deterministic"
        elif mode in ("stoch", "stochastic"):
            kwargs["mode"] = "stochastic"
        else:
            raise NetlistSyntaxError(f"{name}: MODE must be det or stoch, got {kv['MODE']!r}", lineno)
    for key, attr in (("N", "n_switches"), ("SEED", "seed")):
        if key in kv:
            try:
                kwargs[attr] = int(kv[key])
            except ValueError:
                raise NetlistSyntaxError(f"{name}: {key} must be an integer, got {kv[key]!r}", lineno) from None
    x0 = _num(kv["X0"], name, lineno) if "X0" in kv else 0.0
    return Memristor(name, n1, n2, MemristorParams(**kwargs), x0)


_PARSERS = {
    "R": _parse_passive,
    "C": _parse_passive,
    "L": _parse_passive,
    "V": _parse_vsource,
    "M": _parse_memristor,
}


def parse_netlist(text: str) -> Circuit:
    """Parse netlist text into a :class:`Circuit`.

    Circuits that contain a source are checked for dangling nodes;
    source-free fragments are accepted as-is.
    """
    if not text or not text.strip():
        raise NetlistSyntaxError("empty netlist", 1)
    lines = text.splitlines()
    title = lines[0].strip()
    elements: list[Element] = []
    first_line: dict[str, int] = {}
    tstop = None
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("*"):
            continue
        if line.startswith("."):
            tok = line.split()
            directive = tok[0].lower()
            if directive == ".end":
                break
            if directive == ".tran":
                if len(tok) not in (2, 3):
                    raise NetlistSyntaxError(".tran expects [tstep] tstop", lineno)
                tstop = _num(tok[-1], ".tran", lineno)
                if not tstop > 0:
                    raise NetlistSyntaxError(".tran tstop must be positive", lineno)
                continue
            raise NetlistSyntaxError(f"unsupported directive {tok[0]!r}", lineno)
        tok = _tokens(line)
        if not tok:
            raise NetlistSyntaxError(f"no element on line {raw!r}", lineno)
        kind = tok[0][0].upper()
        if kind not in _PARSERS:
            raise UnknownElement(f"unknown element type {tok[0][0]!r} in {tok[0]!r}", lineno)
        try:
            el = _PARSERS[kind](tok, lineno)
        except InvalidParam as exc:
            raise NetlistSyntaxError(str(exc), lineno) from None
        key = el.name.upper()
        if key in first_line:
            raise DuplicateName(f"duplicate element name {el.name!r} (first on line {first_line[key]})", lineno)
        first_line[key] = lineno
        elements.append(el)
    circuit = Circuit(title, tuple(elements), tstop)
    if circuit.sources:
        deg = circuit.node_degrees()
        for el in elements:
            for n in el.nodes:
                if n != GROUND and deg[n] < 2:
                    raise DanglingNode(f"node {n!r} is connected only to {el.name}", first_line[el.name.upper()])
    return circuit


# -- serialization -----------------------------------------------------------

def _fmt(value: float) -> str:
    return repr(float(value))


def _card(el: Element) -> str:
    head = f"{el.name} {el.n_plus} {el.n_minus}"
    if isinstance(el, Resistor):
        return f"{head} {_fmt(el.r)}"
    if isinstance(el, Capacitor):
        return f"{head} {_fmt(el.c)} IC={_fmt(el.v0)}"
    if isinstance(el, Inductor):
        return f"{head} {_fmt(el.l)} IC={_fmt(el.i0)}"
    if isinstance(el, VDC):
        return f"{head} DC {_fmt(el.v)}"
    if isinstance(el, VPulse):
        vals = " ".join(_fmt(getattr(el, k)) for k in ("v1", "v2", "td", "tr", "tf", "pw", "per"))
        return f"{head} PULSE({vals})"
    mp = el.params
    mode = "det" if mp.mode == "deterministic" else "stoch"
    return (
        f"{head} RON={_fmt(mp.r_on)} ROFF={_fmt(mp.r_off)} VON={_fmt(mp.v_on)} "
        f"VOFF={_fmt(mp.v_off)} TAU={_fmt(mp.tau_c)} VT={_fmt(mp.v_t)} X0={_fmt(el.x0)} "
        f"MODE={mode} N={mp.n_switches} SEED={mp.seed}"
    )


def to_netlist(circuit: Circuit) -> str:
    """Canonical netlist text; ``parse_netlist(to_netlist(c)) == c``."""
    lines = [circuit.title]
    lines += [_card(el) for el in circuit.elements]
    if circuit.tstop is not None:
        lines.append(f".tran {_fmt(circuit.tstop)}")
    lines.append(".end")
    return "\n".join(lines) + "\n"


# -- reference cells ---------------------------------------------------------

@dataclass(frozen=True)
class PackageParasitics:
    """Lumped bond-wire/pad model of one package pin pair.

    Defaults approximate a Quad Flat Pack: 10 ohm driver and load
    resistances, 1.2 nH wire inductance, 25 fF pad capacitance to ground.
    """

    r1: float = 10.0
    r2: float = 10.0
    l: float = 1.2e-9
    c: float = 25e-15

    def __post_init__(self):
        _positive("package", **{f.name: getattr(self, f.name) for f in fields(self)})


def square_wave(
    frequency: float,
    amplitude: float,
    *,
    duty: float = 0.5,
    edge_fraction: float = 1e-3,
    name: str = "VIN",
    n_plus: str = "in",
    n_minus: str = GROUND,
) -> VPulse:
    """Periodic pulse train from 0 V to ``amplitude``.

    Edges last ``edge_fraction`` of the period and the pulse width is set
    so that the time spent above half amplitude equals ``duty * period``.
    """
    _positive("square_wave", frequency=frequency)
    if not 0 < duty < 1:
        raise InvalidParam(f"duty must lie in (0, 1), got {duty}")
    per = 1.0 / frequency
    edge = per * edge_fraction
    pw = duty * per - edge
    if pw <= 0:
        raise InvalidParam("edges too slow for the requested duty cycle")
    return VPulse(name, n_plus, n_minus, 0.0, amplitude, 0.0, edge, edge, pw, per)


def build_packaged_cell(
    mp: MemristorParams | None = None,
    r1: float = 10.0,
    r2: float = 10.0,
    l: float = 1.2e-9,
    c: float = 25e-15,
    src: VPulse | VDC | None = None,
    *,
    x0: float = 0.0,
    tstop: float | None = None,
) -> Circuit:
    """Memristor behind a lumped package model.

    ``src -> R1 -> L -> a``, ``C`` from ``a`` to ground, memristor
    ``a -> b``, ``R2`` from ``b`` to ground.
    """
    _positive("packaged cell", r1=r1, r2=r2, l=l, c=c)
    mp = mp or MemristorParams()
    src = src or square_wave(1e4, 0.5)
    src = replace(src, n_plus="in", n_minus=GROUND)
    elements = (
        src,
        Resistor("R1", "in", "n1", r1),
        Inductor("L1", "n1", "a", l),
        Capacitor("C1", "a", GROUND, c),
        Memristor("M1", "a", "b", mp, x0),
        Resistor("R2", "b", GROUND, r2),
    )
    return Circuit("packaged memristor cell", elements, tstop)


def build_ideal_cell(
    mp: MemristorParams | None = None,
    r1: float = 10.0,
    r2: float = 10.0,
    src: VPulse | VDC | None = None,
    *,
    x0: float = 0.0,
    tstop: float | None = None,
) -> Circuit:
    """Same cell without package parasitics: ``src -> R1 -> M1 -> R2 -> gnd``."""
    _positive("ideal cell", r1=r1, r2=r2)
    mp = mp or MemristorParams()
    src = src or square_wave(1e4, 0.5)
    src = replace(src, n_plus="in", n_minus=GROUND)
    elements = (
        src,
        Resistor("R1", "in", "a", r1),
        Memristor("M1", "a", "b", mp, x0),
        Resistor("R2", "b", GROUND, r2),
    )
    return Circuit("ideal memristor cell", elements, tstop)
