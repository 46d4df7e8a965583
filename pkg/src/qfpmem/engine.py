"""Modified nodal analysis and implicit transient integration.

Unknowns are ordered as non-ground node voltages (first appearance in the
element list), then inductor branch currents, then voltage-source branch
currents.  Branch currents flow from the ``+`` terminal through the
element to the ``-`` terminal.

Reactive elements are replaced by companion models each step (backward
Euler or trapezoidal).  Memristors are stamped as a linear conductance at
the state reached at the start of the step; the state is advanced after
the solve with the new terminal voltage.
"""

from __future__ import annotations

import io
import math
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from .devices import MemristorState, breakpoints, memristor_conductance, pulse_value
from .errors import (
    MissingSignal,
    NonFinite,
    SingularMatrix,
    SingularTopology,
    StepUnderflow,
)
from .linalg import LUFactors, linear_solve
from .netlist import (
    GROUND,
    VDC,
    Capacitor,
    Circuit,
    Inductor,
    Memristor,
    Resistor,
    VPulse,
)

Method = Literal["backward_euler", "trapezoidal"]

#: Upper bound on the default minimum step.  Package parasitics ring at
#: picosecond scale, so the step floor may not grow with the source period.
DT_MIN_CEILING = 1e-14


@dataclass(frozen=True)
class SolverConfig:
    """Transient solver settings.

    ``dt_min=None`` means one ten-millionth of the shortest source period,
    but never more than ``DT_MIN_CEILING``.
    """

    method: Method = "trapezoidal"
    steps_per_period: int = 2000
    reltol: float = 1e-4
    abstol_v: float = 1e-6
    abstol_i: float = 1e-9
    dt_min: float | None = None

    def __post_init__(self):
        if self.method not in ("backward_euler", "trapezoidal"):
            raise ValueError(f"unknown integration method {self.method!r}")
        if self.steps_per_period < 100:
            raise ValueError("steps_per_period must be >= 100")
        for name in ("reltol", "abstol_v", "abstol_i"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.dt_min is not None and not self.dt_min > 0:
            raise ValueError("dt_min must be positive")


# -- waveform ----------------------------------------------------------------

@dataclass
class Waveform:
    """Time grid plus named signals sampled on it."""

    t: np.ndarray
    signals: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.signals = {k: np.asarray(v, dtype=float) for k, v in self.signals.items()}
        if self.t.ndim != 1:
            raise ValueError("time axis must be one-dimensional")
        if self.t.size > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("time axis must be strictly increasing")
        for name, arr in self.signals.items():
            if arr.shape != self.t.shape:
                raise ValueError(f"signal {name!r} has {arr.shape}, expected {self.t.shape}")

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.signals[name]
        except KeyError:
            raise MissingSignal(f"no signal {name!r}; have {sorted(self.signals)}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.signals

    @property
    def names(self) -> list[str]:
        return list(self.signals)

    def to_csv(self, target) -> None:
        """Write ``t,<signal>...`` rows with 17 significant digits.

        ``target`` is a path or a text stream.
        """
        data = np.column_stack([self.t] + [self.signals[k] for k in self.names])
        header = ",".join(["t"] + self.names)
        if isinstance(target, (str, os.PathLike)):
            with open(target, "w", newline="") as fh:
                np.savetxt(fh, data, fmt="%.17g", delimiter=",", header=header, comments="")
        else:
            np.savetxt(target, data, fmt="%.17g", delimiter=",", header=header, comments="")

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, source) -> Waveform:
        if isinstance(source, (str, os.PathLike)):
            with open(source) as fh:
                text = fh.read()
        else:
            text = source.read()
        header, _, body = text.partition("\n")
        names = header.strip().split(",")
        if not names or names[0] != "t":
            raise ValueError("CSV header must start with 't'")
        data = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
        if data.size == 0:
            data = np.zeros((0, len(names)))
        return cls(data[:, 0], {n: data[:, i] for i, n in enumerate(names[1:], start=1)})


# -- assembly ----------------------------------------------------------------

@dataclass
class MnaSystem:
    """Index map and the DC matrix of a circuit.

    ``A``/``b`` hold the DC equations: capacitors open, inductors
    shorted, memristors at the conductance of their initial state.
    """

    index: dict[str, int]
    node_index: dict[str, int]
    A: np.ndarray
    b: np.ndarray
    stamps: list[tuple[str, str, tuple[int, ...]]]

    @property
    def n(self) -> int:
        return len(self.index)


def _conduction_check(circuit: Circuit) -> None:
    adj: dict[str, set[str]] = {n: set() for n in circuit.nodes}
    for el in circuit.elements:
        if isinstance(el, Capacitor):
            continue
        a, b = el.nodes
        adj[a].add(b)
        adj[b].add(a)
    seen = {GROUND}
    todo = [GROUND]
    while todo:
        for nb in adj[todo.pop()]:
            if nb not in seen:
                seen.add(nb)
                todo.append(nb)
    floating = sorted(set(circuit.nodes) - seen)
    if floating:
        raise SingularTopology(f"no DC path to ground from node(s) {', '.join(floating)}")


def _index_map(circuit: Circuit) -> tuple[dict[str, int], dict[str, int]]:
    node_index: dict[str, int] = {}
    for el in circuit.elements:
        for n in el.nodes:
            if n != GROUND and n not in node_index:
                node_index[n] = len(node_index)
    index = {f"v({n})": i for n, i in node_index.items()}
    for el in circuit.elements:
        if isinstance(el, Inductor):
            index[f"i({el.name})"] = len(index)
    for el in circuit.elements:
        if isinstance(el, (VDC, VPulse)):
            index[f"i({el.name})"] = len(index)
    return index, node_index


def _source_value(el, t: float) -> float:
    return el.v if isinstance(el, VDC) else pulse_value(t, el)


def _stamp_g(A: np.ndarray, i: int, j: int, g: float) -> None:
    if i >= 0:
        A[i, i] += g
    if j >= 0:
        A[j, j] += g
    if i >= 0 and j >= 0:
        A[i, j] -= g
        A[j, i] -= g


def _stamp_branch(A: np.ndarray, i: int, j: int, k: int) -> None:
    """KCL incidence of branch current ``k`` and its ``v(i) - v(j)`` term."""
    if i >= 0:
        A[i, k] += 1.0
        A[k, i] += 1.0
    if j >= 0:
        A[j, k] -= 1.0
        A[k, j] -= 1.0


def assemble(c: Circuit, x: dict[str, float] | None = None, t: float = 0.0) -> MnaSystem:
    """Build the DC MNA system of ``c`` at time ``t``.

    ``x`` optionally overrides memristor states by element name.
    """
    c.check_simulatable()
    _conduction_check(c)
    index, node_index = _index_map(c)
    n = len(index)
    A = np.zeros((n, n))
    b = np.zeros(n)
    stamps = []
    x = x or {}

    def node(label: str) -> int:
        return -1 if label == GROUND else node_index[label]

    for el in c.elements:
        i, j = node(el.n_plus), node(el.n_minus)
        if isinstance(el, Resistor):
            _stamp_g(A, i, j, 1.0 / el.r)
            stamps.append((el.name, "conductance", (i, j)))
        elif isinstance(el, Memristor):
            g = memristor_conductance(x.get(el.name, el.x0), el.params)
            _stamp_g(A, i, j, g)
            stamps.append((el.name, "conductance", (i, j)))
        elif isinstance(el, Capacitor):
            stamps.append((el.name, "open", (i, j)))
        elif isinstance(el, Inductor):
            k = index[f"i({el.name})"]
            _stamp_branch(A, i, j, k)
            stamps.append((el.name, "short", (i, j, k)))
        else:
            k = index[f"i({el.name})"]
            _stamp_branch(A, i, j, k)
            b[k] = _source_value(el, t)
            stamps.append((el.name, "vsource", (i, j, k)))
    return MnaSystem(index, node_index, A, b, stamps)


def _kcl_residual(A: np.ndarray, sol: np.ndarray, b: np.ndarray, n_nodes: int) -> float:
    if n_nodes == 0:
        return 0.0
    return float(np.abs(A[:n_nodes] @ sol - b[:n_nodes]).max())


def _record_dc(c: Circuit, sys: MnaSystem, sol: np.ndarray, x: dict[str, float]) -> dict[str, float]:
    s = sol.tolist() + [0.0]
    out = {name: s[k] for name, k in sys.index.items()}
    for el in c.memristors:
        i = -1 if el.n_plus == GROUND else sys.node_index[el.n_plus]
        j = -1 if el.n_minus == GROUND else sys.node_index[el.n_minus]
        xm = x.get(el.name, el.x0)
        out[f"i({el.name})"] = memristor_conductance(xm, el.params) * (s[i] - s[j])
        out[f"x({el.name})"] = xm
    return out


def dc_operating_point(c: Circuit, x0: dict[str, float] | None = None, cfg: SolverConfig | None = None) -> Waveform:
    """Single-sample waveform holding the DC solution at ``t = 0``."""
    cfg = cfg or SolverConfig()
    x0 = {m.name: (x0 or {}).get(m.name, m.x0) for m in c.memristors}
    sys = assemble(c, x0, 0.0)
    sol = linear_solve(sys.A, sys.b)
    if not np.all(np.isfinite(sol)):
        raise NonFinite("DC solution is not finite")
    resid = _kcl_residual(sys.A, sol, sys.b, len(sys.node_index))
    values = _record_dc(c, sys, sol, x0)
    return Waveform([0.0], {k: [v] for k, v in values.items()}, {"kcl_residual": resid})


# -- transient ---------------------------------------------------------------

class _Run:
    """One transient run; holds compiled stamps and the time-stepping loop."""

    def __init__(self, c: Circuit, cfg: SolverConfig, tstop: float):
        c.check_simulatable()
        _conduction_check(c)
        self.c = c
        self.cfg = cfg
        self.tstop = tstop
        self.index, self.node_index = _index_map(c)
        self.n = len(self.index)
        self.n_nodes = len(self.node_index)
        node = lambda lab: -1 if lab == GROUND else self.node_index[lab]  # noqa: E731

        static = np.zeros((self.n, self.n))
        self.caps: list[tuple[int, int, float]] = []
        self.inds: list[tuple[int, int, int, float]] = []
        self.srcs: list[tuple[int, object]] = []
        self.mems: list[tuple[int, int, Memristor]] = []
        for el in c.elements:
            i, j = node(el.n_plus), node(el.n_minus)
            if isinstance(el, Resistor):
                _stamp_g(static, i, j, 1.0 / el.r)
            elif isinstance(el, Capacitor):
                self.caps.append((i, j, el.c))
            elif isinstance(el, Inductor):
                k = self.index[f"i({el.name})"]
                _stamp_branch(static, i, j, k)
                self.inds.append((i, j, k, el.l))
            elif isinstance(el, Memristor):
                self.mems.append((i, j, el))
            else:
                k = self.index[f"i({el.name})"]
                _stamp_branch(static, i, j, k)
                self.srcs.append((k, el))
        self.static = static
        self._cache: dict[tuple[float, int], np.ndarray] = {}

        pulses = [el for el in c.sources if isinstance(el, VPulse)]
        self.period = min((p.per for p in pulses), default=tstop)
        self.h_base = self.period / cfg.steps_per_period
        self.dt_min = cfg.dt_min if cfg.dt_min is not None else min(self.period * 1e-7, DT_MIN_CEILING)
        bps = {0.0}
        for p in pulses:
            bps.update(breakpoints(p, tstop))
        self.breaks = sorted(t for t in bps if 0.0 <= t < tstop)
        if self.mems:
            self.cap_dt = min(m.params.tau_c for _, _, m in self.mems) / 50.0
            self.cap_v = [min(m.params.v_on, m.params.v_off) / 2.0 for _, _, m in self.mems]
        else:
            self.cap_dt = math.inf
            self.cap_v = []

    # matrices ---------------------------------------------------------------

    def _companion_matrix(self, h: float, order: int) -> np.ndarray:
        key = (h, order)
        A = self._cache.get(key)
        if A is None:
            if len(self._cache) > 256:
                self._cache.clear()
            A = self.static.copy()
            for i, j, c in self.caps:
                _stamp_g(A, i, j, (c if order == 1 else 2.0 * c) / h)
            for _, _, k, l in self.inds:
                A[k, k] -= (l if order == 1 else 2.0 * l) / h
            self._cache[key] = A
        return A

    def _fixed_grid(self, times: Iterable[float]) -> list[float]:
        grid = np.asarray(list(times), dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("fixed time grid must be strictly increasing with at least two points")
        tol = 1e-9 * self.tstop
        if abs(grid[0]) > tol or abs(grid[-1] - self.tstop) > tol:
            raise ValueError(f"fixed time grid must span [0, {self.tstop:g}]")
        out = grid[1:].tolist()
        out[-1] = self.tstop
        return out

    def _grid(self, extra: Iterable[float] | None) -> np.ndarray:
        n_uniform = int(math.ceil(self.tstop / self.h_base - 1e-9))
        pts = [np.arange(1, n_uniform + 1) * self.h_base]
        bps = np.asarray(self.breaks)
        pts.append(bps)
        pts.append(bps + self.dt_min)
        pts.append(np.array([self.tstop]))
        if extra is not None:
            pts.append(np.asarray(list(extra), dtype=float))
        grid = np.unique(np.concatenate(pts))
        grid = grid[(grid > 0) & (grid <= self.tstop * (1 + 1e-12))]
        grid[-1] = self.tstop if grid[-1] > self.tstop else grid[-1]
        tol = 1e-3 * self.dt_min
        keep = [grid[0]]
        for t in grid[1:]:
            if t - keep[-1] > tol:
                keep.append(t)
        if self.tstop - keep[-1] > tol:
            keep.append(self.tstop)
        else:
            keep[-1] = self.tstop
        return np.asarray(keep)

    # initial state ------------------------------------------------------------

    def _initial(self, x0: dict[str, float], use_ic: bool) -> np.ndarray:
        self._ic_cap_currents = [0.0] * len(self.caps)
        if not use_ic:
            sys_ = assemble(self.c, x0, 0.0)
            return linear_solve(sys_.A, sys_.b)
        # Capacitors become voltage constraints at v0, inductors current
        # constraints at i0; extra unknowns are the capacitor currents.
        caps = [el for el in self.c.elements if isinstance(el, Capacitor)]
        m = self.n + len(caps)
        A = np.zeros((m, m))
        b = np.zeros(m)
        A[: self.n, : self.n] = self.static
        ind_els = [el for el in self.c.elements if isinstance(el, Inductor)]
        for (_, _, k, _), el in zip(self.inds, ind_els):
            A[k, :] = 0.0
            A[k, k] = 1.0
            b[k] = el.i0
        for q, ((i, j, _), el) in enumerate(zip(self.caps, caps)):
            _stamp_branch(A, i, j, self.n + q)
            b[self.n + q] = el.v0
        for (i, j, mem) in self.mems:
            _stamp_g(A, i, j, memristor_conductance(x0[mem.name], mem.params))
        for k, el in self.srcs:
            b[k] = _source_value(el, 0.0)
        full = linear_solve(A, b)
        self._ic_cap_currents = full[self.n:].tolist()
        return full[: self.n]

    # main loop --------------------------------------------------------------

    def run(self, x0: dict[str, float], use_ic: bool, extra_times, fixed_times=None) -> Waveform:
        cfg = self.cfg
        trap = cfg.method == "trapezoidal"
        n = self.n
        states = [MemristorState.initial(x0[m.name], m.params, m.name) for _, _, m in self.mems]
        sol = self._initial({m.name: st.x for (_, _, m), st in zip(self.mems, states)}, use_ic)
        if not np.all(np.isfinite(sol)):
            raise NonFinite("initial solution is not finite")
        s = sol.tolist() + [0.0]

        caps, inds, srcs = self.caps, self.inds, self.srcs
        mem_nodes = [(i, j) for i, j, _ in self.mems]
        vc = [s[i] - s[j] for i, j, _ in caps]
        ic = list(self._ic_cap_currents) if use_ic else [0.0] * len(caps)
        il = [s[k] for _, _, k, _ in inds]
        vl = [s[i] - s[j] for i, j, _, _ in inds]

        reactive = bool(caps or inds)
        tols = [cfg.abstol_v] * len(caps) + [cfg.abstol_i] * len(inds)
        need_hist = 3 if trap else 2
        hist: deque = deque(maxlen=3)
        hist.append((0.0, vc + il))

        adaptive = fixed_times is None
        grid = self._grid(extra_times).tolist() if adaptive else self._fixed_grid(fixed_times)
        breaks = self.breaks
        tol_t = 1e-3 * self.dt_min
        next_break = 1  # breaks[0] == 0.0 is the start
        after_break = True

        times = [0.0]
        sols = [s[:n]]
        mem_i = [[st.conductance * (s[i] - s[j])] for st, (i, j) in zip(states, mem_nodes)]
        mem_x = [[st.x] for st in states]
        max_resid = 0.0
        n_nodes = self.n_nodes

        t = 0.0
        h_try = self.dt_min
        lu_key, lu = None, None
        h_prev = 0.0
        n_reject = 0
        for target in grid:
            while target - t > tol_t:
                remaining = target - t
                if adaptive:
                    biased = any(abs(s[i] - s[j]) > lim for (i, j), lim in zip(mem_nodes, self.cap_v))
                    h_lim = min(h_try, self.cap_dt) if biased else h_try
                    h = remaining / max(1, math.ceil(remaining / h_lim * (1 - 1e-9)))
                    # Equal substeps differ from the last step only by rounding;
                    # reusing it keeps the factorization cache warm.
                    if abs(h - h_prev) <= 1e-12 * h_prev:
                        h = h_prev
                else:
                    biased, h = True, remaining
                order = 1 if (not trap or after_break) else 2
                rejected = False
                g_now = [st.conductance for st in states]

                while True:
                    t_new = target if abs(remaining - h) <= tol_t else t + h
                    key = (h, order, *g_now)
                    if key != lu_key:
                        A = self._companion_matrix(h, order).copy()
                        for g, (i, j) in zip(g_now, mem_nodes):
                            _stamp_g(A, i, j, g)
                        try:
                            lu = LUFactors(A)
                        except SingularMatrix as exc:
                            raise SingularMatrix(f"at t={t_new:.6g}: {exc}") from None
                        lu_key = key
                    b = [0.0] * n
                    for k, el in srcs:
                        b[k] = _source_value(el, t_new)
                    for q, (i, j, c) in enumerate(caps):
                        if order == 1:
                            inj = c / h * vc[q]
                        else:
                            inj = 2.0 * c / h * vc[q] + ic[q]
                        if i >= 0:
                            b[i] += inj
                        if j >= 0:
                            b[j] -= inj
                    for q, (_, _, k, l) in enumerate(inds):
                        if order == 1:
                            b[k] = -l / h * il[q]
                        else:
                            b[k] = -2.0 * l / h * il[q] - vl[q]
                    b = np.array(b)
                    new, resid = lu.solve(b)
                    sn = new.tolist()
                    if not math.isfinite(sum(sn)):
                        raise NonFinite(f"non-finite solution at t={t_new:.6g}")
                    sn.append(0.0)

                    if not biased and h > self.cap_dt and any(
                        abs(sn[i] - sn[j]) > lim for (i, j), lim in zip(mem_nodes, self.cap_v)
                    ):
                        h = remaining / max(1, math.ceil(remaining / self.cap_dt * (1 - 1e-9)))
                        biased = True
                        continue

                    vals = [sn[i] - sn[j] for i, j, _ in caps] + [sn[k] for _, _, k, _ in inds]
                    if not adaptive or not reactive or len(hist) < need_hist or self._lte_ok(hist, t_new, vals, tols, trap, h):
                        break
                    n_reject += 1
                    rejected = True
                    if h / 2 < self.dt_min * (1 - 1e-9):
                        raise StepUnderflow(f"timestep below dt_min={self.dt_min:.3g} at t={t:.6g}")
                    h /= 2

                # accept
                if n_nodes:
                    max_resid = max(max_resid, max(map(abs, resid[:n_nodes].tolist())))
                for q, (i, j, c) in enumerate(caps):
                    v = sn[i] - sn[j]
                    if order == 1:
                        ic[q] = c / h * (v - vc[q])
                    else:
                        ic[q] = 2.0 * c / h * (v - vc[q]) - ic[q]
                    vc[q] = v
                for q, (i, j, k, _) in enumerate(inds):
                    il[q] = sn[k]
                    vl[q] = sn[i] - sn[j]
                for g, (i, j), st, cur, xs in zip(g_now, mem_nodes, states, mem_i, mem_x):
                    v = sn[i] - sn[j]
                    cur.append(g * v)
                    xs.append(st.advance(v, h))
                t = t_new
                s = sn
                h_prev = h
                times.append(t)
                sols.append(sn[:n])
                if after_break:
                    # The start-up step absorbs the conductance change of the
                    # long step before the breakpoint; differences across it
                    # are not truncation error.
                    hist.clear()
                hist.append((t, vals))
                # Only rejections and breakpoints shrink the step; a step
                # shortened by a grid point leaves h_try alone.
                h_try = min(2.0 * h if rejected else max(h_try, 2.0 * h), self.h_base)
                after_break = False
                while next_break < len(breaks) and breaks[next_break] <= t + tol_t:
                    if abs(breaks[next_break] - t) <= tol_t:
                        after_break = True
                        h_try = self.dt_min
                    next_break += 1

        sol_arr = np.array(sols).reshape(len(sols), n)
        signals = {name: sol_arr[:, k] for name, k in self.index.items()}
        for (_, _, m), cur, xs in zip(self.mems, mem_i, mem_x):
            signals[f"i({m.name})"] = np.asarray(cur)
            signals[f"x({m.name})"] = np.asarray(xs)
        meta = {
            "max_kcl_residual": max_resid,
            "rejected_steps": n_reject,
            "dt_min": self.dt_min,
            "h_base": self.h_base,
        }
        return Waveform(np.asarray(times), signals, meta)

    def _lte_ok(self, hist, t_new, vals, tols, trap, h) -> bool:
        """Divided-difference truncation-error test for all reactive states.

        Trapezoidal: h^3/12 * |x3| with the third derivative x3 ~ 6 f[t0..t3].
        Backward Euler: h^2/2 * |x2| with x2 ~ 2 f[t0..t2].
        """
        reltol = self.cfg.reltol
        if trap:
            (t0, y0), (t1, y1), (t2, y2) = hist
            t3 = t_new
            for q, tol_abs in enumerate(tols):
                a, b, c, d = y0[q], y1[q], y2[q], vals[q]
                d01 = (b - a) / (t1 - t0)
                d12 = (c - b) / (t2 - t1)
                d23 = (d - c) / (t3 - t2)
                d012 = (d12 - d01) / (t2 - t0)
                d123 = (d23 - d12) / (t3 - t1)
                lte = 0.5 * h * h * h * abs((d123 - d012) / (t3 - t0))
                if lte > reltol * max(abs(d), abs(c)) + tol_abs:
                    return False
        else:
            (t0, y0), (t1, y1) = list(hist)[-2:]
            t2 = t_new
            for q, tol_abs in enumerate(tols):
                a, b, c = y0[q], y1[q], vals[q]
                dd = ((c - b) / (t2 - t1) - (b - a) / (t1 - t0)) / (t2 - t0)
                lte = h * h * abs(dd)
                if lte > reltol * max(abs(c), abs(b)) + tol_abs:
                    return False
        return True


def transient(
    c: Circuit,
    cfg: SolverConfig | None = None,
    tstop: float | None = None,
    *,
    x0: dict[str, float] | None = None,
    use_ic: bool = False,
    extra_times: Iterable[float] | None = None,
    fixed_times: Iterable[float] | None = None,
) -> Waveform:
    """Integrate ``c`` from 0 to ``tstop``.

    The initial condition is the DC operating point, or the element
    ``IC`` values when ``use_ic`` is set.  ``extra_times`` are forced onto
    the adaptive time grid.  ``fixed_times`` (spanning ``[0, tstop]``)
    replaces step control entirely: exactly one step is taken between
    consecutive entries, so a run can replay the grid of another run.

    Signals: ``v(<node>)``, ``i(<L or V name>)``, ``i(<M name>)`` and the
    memristor state ``x(<M name>)``.
    """
    cfg = cfg or SolverConfig()
    tstop = tstop if tstop is not None else c.tstop
    if tstop is None or not tstop > 0:
        raise ValueError("tstop must be given (argument or .tran) and positive")
    run = _Run(c, cfg, tstop)
    x_init = {m.name: (x0 or {}).get(m.name, m.x0) for m in c.memristors}
    if extra_times is not None and fixed_times is not None:
        raise ValueError("give extra_times or fixed_times, not both")
    return run.run(x_init, use_ic, extra_times, fixed_times)
