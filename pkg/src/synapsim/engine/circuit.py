"""Circuit representation: nodes, elements, model cards, carried state.

A circuit owns its node table (ground is node 0), a flat element list,
and a ``state`` dict that persists device state between analyses: the
filament state X of each RRAM element and the floating-gate charge of
each floating-gate element.  Analyses read the carried state in and
write the final state back, so a programming transient followed by a DC
read sees the programmed device.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..floatgate import FloatingGateParams
from ..mosfet import MosParams
from ..rram import RramParams


@dataclass(frozen=True)
class PulseSpec:
    """The seven canonical pulse-waveform fields."""

    v1: float
    v2: float
    td: float
    tr: float
    tf: float
    pw: float
    per: float

    def value_at(self, t: float) -> float:
        if t < self.td:
            return self.v1
        tau = (t - self.td) % self.per if self.per > 0 else t - self.td
        if tau < self.tr:
            return self.v1 + (self.v2 - self.v1) * tau / self.tr
        tau -= self.tr
        if tau < self.pw:
            return self.v2
        tau -= self.pw
        if tau < self.tf:
            return self.v2 + (self.v1 - self.v2) * tau / self.tf
        return self.v1


@dataclass
class Resistor:
    name: str
    n1: str
    n2: str
    value: float


@dataclass
class Capacitor:
    name: str
    n1: str
    n2: str
    value: float


@dataclass
class VSource:
    name: str
    npos: str
    nneg: str
    dc: Optional[float] = None
    pulse: Optional[PulseSpec] = None

    def dc_value(self) -> float:
        if self.dc is not None:
            return self.dc
        if self.pulse is not None:
            return self.pulse.value_at(0.0)
        return 0.0

    def value_at(self, t: float) -> float:
        if self.pulse is not None:
            return self.pulse.value_at(t)
        return self.dc if self.dc is not None else 0.0


@dataclass
class ISource:
    name: str
    npos: str
    nneg: str
    dc: float = 0.0


@dataclass
class Mosfet:
    name: str
    nd: str
    ng: str
    ns: str
    model: str
    params: Optional[MosParams] = None


@dataclass
class RramElement:
    name: str
    npos: str
    nneg: str
    model: str
    x0: Optional[float] = None
    params: Optional[RramParams] = None

    @property
    def state_node(self) -> str:
        return self.name + "#x"


@dataclass
class FloatGateElement:
    name: str
    nd: str
    ns: str
    nsg: str
    nnfb: str
    npfb: str
    model: str
    qfg0: float = 0.0
    params: Optional[FloatingGateParams] = None

    @property
    def fg_node(self) -> str:
        return self.name + "#fg"


_MODEL_KINDS = {"cmg": MosParams, "rram": RramParams, "fg": FloatingGateParams}


class CircuitError(Exception):
    pass


class Circuit:
    """Mutable circuit under construction plus carried device state."""

    def __init__(self):
        self.nodes: dict[str, int] = {"0": 0}
        self.elements: list = []
        self.models: dict[str, tuple[str, object]] = {}
        self.state: dict[str, float] = {}
        # fg model name -> cmg model name used for its readout transistor
        self.fg_mos_ref: dict[str, str] = {}

    # -- construction -------------------------------------------------
    def node_index(self, name: str) -> int:
        name = name.lower()
        if name not in self.nodes:
            self.nodes[name] = len(self.nodes)
        return self.nodes[name]

    def add_model(self, name: str, kind: str, params) -> None:
        name = name.lower()
        if name in self.models:
            raise CircuitError(f"duplicate model '{name}'")
        if kind not in _MODEL_KINDS:
            raise CircuitError(f"unknown model kind '{kind}'")
        self.models[name] = (kind, params)

    def add(self, element) -> None:
        if any(e.name == element.name for e in self.elements):
            raise CircuitError(f"duplicate element '{element.name}'")
        self.elements.append(element)
        for node in self._terminals(element):
            self.node_index(node)
        if isinstance(element, RramElement):
            self.node_index(element.state_node)
        elif isinstance(element, FloatGateElement):
            self.node_index(element.fg_node)

    @staticmethod
    def _terminals(element) -> tuple[str, ...]:
        if isinstance(element, (Resistor, Capacitor)):
            return (element.n1, element.n2)
        if isinstance(element, (VSource, ISource)):
            return (element.npos, element.nneg)
        if isinstance(element, Mosfet):
            return (element.nd, element.ng, element.ns)
        if isinstance(element, RramElement):
            return (element.npos, element.nneg)
        if isinstance(element, FloatGateElement):
            return (element.nd, element.ns, element.nsg, element.nnfb,
                    element.npfb)
        raise CircuitError(f"unknown element type {type(element).__name__}")

    # -- finalization --------------------------------------------------
    def resolve(self) -> None:
        """Bind model references and seed carried state; idempotent."""
        kind_for = {Mosfet: "cmg", RramElement: "rram",
                    FloatGateElement: "fg"}
        for e in self.elements:
            want = kind_for.get(type(e))
            if want is None:
                continue
            entry = self.models.get(e.model)
            if entry is None:
                raise CircuitError(
                    f"element '{e.name}' references unknown model "
                    f"'{e.model}'")
            kind, params = entry
            if kind != want:
                raise CircuitError(
                    f"element '{e.name}' needs a '{want}' model but "
                    f"'{e.model}' is '{kind}'")
            e.params = params
            if isinstance(e, RramElement) and e.name not in self.state:
                x0 = e.x0 if e.x0 is not None else params.x_init
                self.state[e.name] = float(min(max(x0, 0.0), 1.0))
            elif isinstance(e, FloatGateElement) and e.name not in self.state:
                self.state[e.name] = float(e.qfg0)
        ground_touched = any("0" in self._terminals(e) for e in self.elements)
        if self.elements and not ground_touched:
            raise CircuitError("no element connects to ground node 0")

    def vsources(self) -> list[VSource]:
        return [e for e in self.elements if isinstance(e, VSource)]

    def element(self, name: str):
        name = name.lower()
        for e in self.elements:
            if e.name == name:
                return e
        raise KeyError(name)

    # -- serialization -------------------------------------------------
    def serialize(self) -> str:
        lines = []
        for name, (kind, params) in self.models.items():
            pairs = _model_pairs(kind, params)
            if kind == "fg" and name in self.fg_mos_ref:
                pairs.append(("mos", self.fg_mos_ref[name]))
            lines.append(f".model {name} {kind} " +
                         " ".join(f"{k}={v}" for k, v in pairs))
        for e in self.elements:
            lines.append(_element_card(e))
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return repr(float(x))


def _model_pairs(kind: str, params) -> list[tuple[str, str]]:
    if kind == "cmg":
        keys = ("l", "w", "t_si", "eot", "n_a", "n_i", "mu0", "v_fb",
                "temp", "e_mob", "v_sat")
        pairs = [(k, _fmt(getattr(params, k))) for k in keys]
        pairs.append(("mob_degradation", str(int(params.mob_degradation))))
        pairs.append(("vel_saturation", str(int(params.vel_saturation))))
        return pairs
    if kind == "rram":
        keys = ("g_on", "g_off", "v0", "k_set", "k_reset", "vc_set",
                "vc_reset", "p", "x_init")
        return [(k, _fmt(getattr(params, k))) for k in keys]
    keys = ("c_sg", "c_nfb", "c_pfb", "t_tun", "a_tun", "alpha_fn",
            "beta_fn")
    return [(k, _fmt(getattr(params, k))) for k in keys]


def _element_card(e) -> str:
    if isinstance(e, Resistor):
        return f"{e.name} {e.n1} {e.n2} {_fmt(e.value)}"
    if isinstance(e, Capacitor):
        return f"{e.name} {e.n1} {e.n2} {_fmt(e.value)}"
    if isinstance(e, VSource):
        parts = [e.name, e.npos, e.nneg]
        if e.dc is not None:
            parts += ["dc", _fmt(e.dc)]
        if e.pulse is not None:
            p = e.pulse
            parts.append("pulse(" + " ".join(_fmt(v) for v in
                         (p.v1, p.v2, p.td, p.tr, p.tf, p.pw, p.per)) + ")")
        return " ".join(parts)
    if isinstance(e, ISource):
        return f"{e.name} {e.npos} {e.nneg} dc {_fmt(e.dc)}"
    if isinstance(e, Mosfet):
        return f"{e.name} {e.nd} {e.ng} {e.ns} model={e.model}"
    if isinstance(e, RramElement):
        card = f"{e.name} {e.npos} {e.nneg} model={e.model}"
        if e.x0 is not None:
            card += f" x0={_fmt(e.x0)}"
        return card
    if isinstance(e, FloatGateElement):
        card = (f"{e.name} {e.nd} {e.ns} {e.nsg} {e.nnfb} {e.npfb} "
                f"model={e.model}")
        if e.qfg0 != 0.0:
            card += f" qfg0={_fmt(e.qfg0)}"
        return card
    raise CircuitError(f"cannot serialize {type(e).__name__}")
