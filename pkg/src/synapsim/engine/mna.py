"""Modified nodal analysis: system assembly, Newton solve, homotopy.

Unknown vector layout: node voltages for nodes 1..N-1 (ground dropped),
then one branch current per independent voltage source.  Each KCL row
carries the sum of currents leaving its node; voltage-source rows carry
the branch voltage constraint in volts; device state rows (RRAM filament
state, floating-gate charge constraint) are normalized to volt-like
units so one set of tolerances covers them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..floatgate import fn_current_and_grad
from ..mosfet import drain_current_and_grads
from ..rram import rram_current_and_grads, state_rate_and_grads
from .circuit import (Capacitor, Circuit, FloatGateElement, ISource,
                      Mosfet, Resistor, RramElement, VSource)

# convergence: row residuals must reach their absolute tolerance, with a
# floating-point floor of _RESID_FLOOR times the row's contribution scale
_RESID_FLOOR = 5e-15


class ConvergenceError(Exception):
    def __init__(self, message: str, worst_row: str = ""):
        super().__init__(message)
        self.worst_row = worst_row


@dataclass
class Tolerances:
    reltol: float = 1e-6
    vabstol: float = 1e-9
    iabstol: float = 1e-12
    max_iter: int = 100
    gmin: float = 0.0
    vlimit: float = 0.3


@dataclass
class EvalContext:
    """Everything an element stamp needs beyond the unknown vector."""

    mode: str                    # "dc" | "tran"
    time: float = 0.0
    h: float = 0.0
    integrator: str = "be"       # "be" | "trap"
    x_prev: Optional[np.ndarray] = None
    aux_prev: dict = field(default_factory=dict)
    sfactor: float = 1.0
    gmin: float = 0.0
    src_override: dict = field(default_factory=dict)


class SystemLayout:
    """Index bookkeeping for one circuit's MNA system."""

    def __init__(self, circuit: Circuit):
        circuit.resolve()
        self.circuit = circuit
        self.n_nodes = len(circuit.nodes)
        self.vsrc = circuit.vsources()
        self.branch: dict[str, int] = {
            e.name: self.n_nodes - 1 + j for j, e in enumerate(self.vsrc)}
        self.size = self.n_nodes - 1 + len(self.vsrc)
        index_to_name = {i: n for n, i in circuit.nodes.items()}
        self.node_names = [index_to_name[i] for i in range(self.n_nodes)]
        # row classification drives gmin application and tolerances
        self.row_kind = ["kcl"] * (self.n_nodes - 1) + ["vsrc"] * len(self.vsrc)
        self.state_rows: dict[str, int] = {}
        self.fg_rows: dict[str, int] = {}
        for e in circuit.elements:
            if isinstance(e, RramElement):
                row = circuit.nodes[e.state_node] - 1
                self.row_kind[row] = "state"
                self.state_rows[e.name] = row
            elif isinstance(e, FloatGateElement):
                self.fg_rows[e.name] = circuit.nodes[e.fg_node] - 1

    def row_name(self, row: int) -> str:
        if row < self.n_nodes - 1:
            return self.node_names[row + 1]
        return "i(" + self.vsrc[row - (self.n_nodes - 1)].name + ")"

    def column_names(self) -> list[str]:
        return (["v(%s)" % n for n in self.node_names[1:]] +
                ["i(%s)" % e.name for e in self.vsrc])

    def initial_vector(self) -> np.ndarray:
        """All-zero start, except carried device state."""
        x = np.zeros(self.size)
        for e in self.circuit.elements:
            if isinstance(e, RramElement):
                x[self.state_rows[e.name]] = self.circuit.state[e.name]
            elif isinstance(e, FloatGateElement):
                p = e.params
                x[self.fg_rows[e.name]] = (self.circuit.state[e.name] /
                                           p.c_total)
        return x


def _v(x: np.ndarray, idx: int) -> float:
    return 0.0 if idx == 0 else x[idx - 1]


class Assembler:
    """Builds residual, Jacobian, and per-row scale at a given point."""

    def __init__(self, layout: SystemLayout, ctx: EvalContext):
        self.layout = layout
        self.ctx = ctx
        self.f = np.zeros(layout.size)
        self.J = np.zeros((layout.size, layout.size))
        self.scale = np.zeros(layout.size)

    def _current(self, n1: int, n2: int, i: float, *grads):
        """Current i flows out of node n1 into node n2; grads are
        (column, di/dcol) pairs."""
        f, J, scale = self.f, self.J, self.scale
        if n1 != 0:
            f[n1 - 1] += i
            scale[n1 - 1] += abs(i)
            for col, g in grads:
                J[n1 - 1, col] += g
        if n2 != 0:
            f[n2 - 1] -= i
            scale[n2 - 1] += abs(i)
            for col, g in grads:
                J[n2 - 1, col] -= g

    def _two_node(self, n1: int, n2: int, i: float, g: float):
        cols = []
        if n1 != 0:
            cols.append((n1 - 1, g))
        if n2 != 0:
            cols.append((n2 - 1, -g))
        self._current(n1, n2, i, *cols)

    def assemble(self, x: np.ndarray):
        nodes = self.layout.circuit.nodes
        for e in self.layout.circuit.elements:
            if isinstance(e, Resistor):
                self._resistor(e, x, nodes)
            elif isinstance(e, Capacitor):
                self._capacitor(e.name, e.n1, e.n2, e.value, x, nodes)
            elif isinstance(e, VSource):
                self._vsource(e, x, nodes)
            elif isinstance(e, ISource):
                self._isource(e, x, nodes)
            elif isinstance(e, Mosfet):
                self._mosfet(e.params, e.nd, e.ng, e.ns, x, nodes)
            elif isinstance(e, RramElement):
                self._rram(e, x, nodes)
            elif isinstance(e, FloatGateElement):
                self._floatgate(e, x, nodes)
        self._apply_gmin(x)
        return self.f, self.J, self.scale

    # -- element stamps -------------------------------------------------
    def _resistor(self, e, x, nodes):
        n1, n2 = nodes[e.n1], nodes[e.n2]
        g = 1.0 / e.value
        self._two_node(n1, n2, g * (_v(x, n1) - _v(x, n2)), g)

    def _capacitor(self, name, node1, node2, value, x, nodes):
        ctx = self.ctx
        if ctx.mode == "dc":
            return
        n1, n2 = nodes[node1], nodes[node2]
        dv = _v(x, n1) - _v(x, n2)
        dv_prev = _v(ctx.x_prev, n1) - _v(ctx.x_prev, n2)
        if ctx.integrator == "trap" and name in ctx.aux_prev:
            geq = 2.0 * value / ctx.h
            i = geq * (dv - dv_prev) - ctx.aux_prev[name]
        else:
            geq = value / ctx.h
            i = geq * (dv - dv_prev)
        self._two_node(n1, n2, i, geq)

    def _vsource(self, e, x, nodes):
        ctx = self.ctx
        np_, nn = nodes[e.npos], nodes[e.nneg]
        if e.name in ctx.src_override:
            target = ctx.src_override[e.name]
        elif ctx.mode == "tran":
            target = e.value_at(ctx.time)
        else:
            target = e.dc_value()
        target *= ctx.sfactor
        row = self.layout.branch[e.name]
        i_br = x[row]
        self._current(np_, nn, i_br, (row, 1.0))
        self.f[row] = _v(x, np_) - _v(x, nn) - target
        self.scale[row] = abs(_v(x, np_)) + abs(_v(x, nn)) + abs(target)
        if np_ != 0:
            self.J[row, np_ - 1] += 1.0
        if nn != 0:
            self.J[row, nn - 1] -= 1.0

    def _isource(self, e, x, nodes):
        val = e.dc * self.ctx.sfactor
        self._current(nodes[e.npos], nodes[e.nneg], val)

    def _mosfet(self, params, nd, ng, ns, x, nodes):
        d, g, s = nodes[nd], nodes[ng], nodes[ns]
        v_gs = _v(x, g) - _v(x, s)
        v_ds = _v(x, d) - _v(x, s)
        i, gm, gds = drain_current_and_grads(params, v_gs, v_ds)
        cols = []
        if d != 0:
            cols.append((d - 1, gds))
        if g != 0:
            cols.append((g - 1, gm))
        if s != 0:
            cols.append((s - 1, -(gm + gds)))
        self._current(d, s, i, *cols)

    def _rram(self, e, x, nodes):
        ctx = self.ctx
        np_, nn = nodes[e.npos], nodes[e.nneg]
        xrow = self.layout.state_rows[e.name]
        xcol = xrow
        state = x[xcol]
        vpn = _v(x, np_) - _v(x, nn)
        i, di_dv, di_dx = rram_current_and_grads(e.params, vpn, state)
        cols = [(xcol, di_dx)]
        if np_ != 0:
            cols.append((np_ - 1, di_dv))
        if nn != 0:
            cols.append((nn - 1, -di_dv))
        self._current(np_, nn, i, *cols)

        f, J, scale = self.f, self.J, self.scale
        if ctx.mode == "dc":
            held = self.layout.circuit.state[e.name]
            f[xrow] += state - held
            J[xrow, xcol] += 1.0
            scale[xrow] += abs(state) + abs(held)
            return
        x_prev = ctx.x_prev[xcol]
        rate, dr_dv, dr_dx = state_rate_and_grads(e.params, vpn, state)
        if ctx.integrator == "trap" and e.name in ctx.aux_prev:
            half_h = 0.5 * ctx.h
            resid = state - x_prev - half_h * (rate + ctx.aux_prev[e.name])
            w = half_h
        else:
            resid = state - x_prev - ctx.h * rate
            w = ctx.h
        f[xrow] += resid
        J[xrow, xcol] += 1.0 - w * dr_dx
        if np_ != 0:
            J[xrow, np_ - 1] -= w * dr_dv
        if nn != 0:
            J[xrow, nn - 1] += w * dr_dv
        scale[xrow] += abs(state) + abs(x_prev) + abs(w * rate)

    def _floatgate(self, e, x, nodes):
        ctx = self.ctx
        p = e.params
        fg = nodes[e.fg_node]
        self._mosfet(p.mos, e.nd, e.fg_node, e.ns, x, nodes)
        if ctx.mode == "dc":
            # charge constraint replaces the floating node's KCL row
            fgrow = self.layout.fg_rows[e.name]
            q_held = self.layout.circuit.state[e.name]
            v_fg = _v(x, fg)
            q = 0.0
            for cap, node in ((p.c_sg, e.nsg), (p.c_nfb, e.nnfb),
                              (p.c_pfb, e.npfb)):
                n = nodes[node]
                q += cap * (v_fg - _v(x, n))
                if n != 0:
                    self.J[fgrow, n - 1] -= cap / p.c_total
            self.f[fgrow] += (q - q_held) / p.c_total
            self.J[fgrow, fg - 1] += 1.0
            self.scale[fgrow] += (abs(q) + abs(q_held)) / p.c_total
            return
        for suffix, cap, node in (("#csg", p.c_sg, e.nsg),
                                  ("#cnfb", p.c_nfb, e.nnfb),
                                  ("#cpfb", p.c_pfb, e.npfb)):
            self._capacitor(e.name + suffix, node, e.fg_node, cap, x, nodes)
        for term in (e.nnfb, e.npfb):
            n = nodes[term]
            v_t = _v(x, n) - _v(x, fg)
            i, di = fn_current_and_grad(p, v_t)
            cols = [(fg - 1, -di)]
            if n != 0:
                cols.append((n - 1, di))
            self._current(n, fg, i, *cols)

    def _apply_gmin(self, x):
        if self.ctx.gmin == 0.0:
            return
        for row in range(self.layout.n_nodes - 1):
            if self.layout.row_kind[row] == "kcl":
                self.f[row] += self.ctx.gmin * x[row]
                self.J[row, row] += self.ctx.gmin


def _residual_ok(layout: SystemLayout, f, scale, tol: Tolerances) -> bool:
    for row in range(layout.size):
        abstol = tol.iabstol if layout.row_kind[row] == "kcl" \
            else tol.vabstol
        if abs(f[row]) > max(abstol, _RESID_FLOOR * scale[row]):
            return False
    return True


def _dx_ok(layout: SystemLayout, dx, x, tol: Tolerances) -> bool:
    nv = layout.n_nodes - 1
    for i in range(layout.size):
        abstol = tol.vabstol if i < nv else tol.iabstol
        if abs(dx[i]) > abstol + tol.reltol * abs(x[i]):
            return False
    return True


def newton_solve(layout: SystemLayout, ctx: EvalContext, x0: np.ndarray,
                 tol: Tolerances):
    """Damped Newton iteration; returns (x, converged, worst_row)."""
    x = x0.copy()
    dx_ok = False
    worst = ""
    for _ in range(tol.max_iter):
        asm = Assembler(layout, ctx)
        f, J, scale = asm.assemble(x)
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(J))):
            return x, False, "non-finite residual"
        if dx_ok and _residual_ok(layout, f, scale, tol):
            return x, True, ""
        worst = layout.row_name(int(np.argmax(np.abs(f))))
        try:
            dx = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            return x, False, "singular matrix at " + worst
        if not np.all(np.isfinite(dx)):
            return x, False, "non-finite update at " + worst
        vmax = np.max(np.abs(dx[:layout.n_nodes - 1])) \
            if layout.n_nodes > 1 else 0.0
        s = 1.0 if vmax <= tol.vlimit else tol.vlimit / vmax
        x = x + s * dx
        dx_ok = (s == 1.0) and _dx_ok(layout, dx, x, tol)
    return x, False, worst


_GMIN_LADDER = [10.0 ** (-k) for k in range(3, 13)]


def solve_dc(layout: SystemLayout, tol: Tolerances,
             x0: Optional[np.ndarray] = None,
             src_override: Optional[dict] = None) -> np.ndarray:
    """Operating point with gmin-stepping and source-stepping fallbacks."""
    override = src_override or {}

    def attempt(xstart, sfactor=1.0, gmin=None):
        ctx = EvalContext(mode="dc", sfactor=sfactor,
                          gmin=tol.gmin if gmin is None else gmin,
                          src_override=override)
        return newton_solve(layout, ctx, xstart, tol)

    start = layout.initial_vector() if x0 is None else x0
    x, ok, worst = attempt(start)
    if ok:
        return x

    # gmin stepping: relax every KCL row, tighten by decades, then re-solve
    # at the target gmin
    x = start
    ladder_ok = True
    for gmin in _GMIN_LADDER:
        x, ok, _ = attempt(x, gmin=gmin)
        if not ok:
            ladder_ok = False
            break
    if ladder_ok:
        x, ok, _ = attempt(x)
        if ok:
            return x

    # source stepping from the dead circuit
    x = layout.initial_vector()
    lam, step = 0.0, 0.25
    while lam < 1.0:
        target = min(1.0, lam + step)
        xs, ok, worst = attempt(x, sfactor=target)
        if ok:
            lam, x = target, xs
            step = min(0.25, step * 2.0)
        else:
            step *= 0.5
            if step < 1.0 / 1024.0:
                raise ConvergenceError(
                    "operating point failed (source stepping stalled at "
                    f"{lam:.4f}); worst residual row: {worst}", worst)
    return x


def post_step_aux(layout: SystemLayout, ctx: EvalContext,
                  x: np.ndarray) -> dict:
    """Companion-model history for the step just accepted at x.

    Records each capacitor's branch current and each RRAM element's
    state rate so the next step can integrate trapezoidally.
    """
    nodes = layout.circuit.nodes
    aux = {}

    def cap_current(name, n1, n2, value):
        dv = _v(x, n1) - _v(x, n2)
        dv_prev = _v(ctx.x_prev, n1) - _v(ctx.x_prev, n2)
        if ctx.integrator == "trap" and name in ctx.aux_prev:
            return 2.0 * value / ctx.h * (dv - dv_prev) - ctx.aux_prev[name]
        return value / ctx.h * (dv - dv_prev)

    for e in layout.circuit.elements:
        if isinstance(e, Capacitor):
            aux[e.name] = cap_current(e.name, nodes[e.n1], nodes[e.n2],
                                      e.value)
        elif isinstance(e, RramElement):
            vpn = _v(x, nodes[e.npos]) - _v(x, nodes[e.nneg])
            state = x[layout.state_rows[e.name]]
            aux[e.name] = state_rate_and_grads(e.params, vpn, state)[0]
        elif isinstance(e, FloatGateElement):
            p = e.params
            fg = nodes[e.fg_node]
            for suffix, cap, node in (("#csg", p.c_sg, e.nsg),
                                      ("#cnfb", p.c_nfb, e.nnfb),
                                      ("#cpfb", p.c_pfb, e.npfb)):
                aux[e.name + suffix] = cap_current(e.name + suffix,
                                                   nodes[node], fg, cap)
    return aux
