"""Device models: pulse sources and the metastable-switch memristor.

The memristor is a population of two-state switches.  ``x`` is the
fraction of switches in the ON (low-resistance) state, and the device
conductance is the parallel mix of ON and OFF switches::

    G(x) = x / r_on + (1 - x) / r_off

Per timestep ``dt`` each OFF switch turns ON with probability
``P_set`` and each ON switch turns OFF with probability ``P_reset``::

    P_set   = clamp(dt / tau_c * sigmoid(( v - v_on)  / v_t), 0, 1)
    P_reset = clamp(dt / tau_c * sigmoid((-v - v_off) / v_t), 0, 1)

The deterministic mode advances the expected ON fraction; the stochastic
mode draws binomial switch counts for a finite population of
``n_switches`` devices.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .errors import DomainError, InvalidParam

Mode = Literal["deterministic", "stochastic"]


@dataclass(frozen=True)
class MemristorParams:
    """Parameters of one memristor.

    Resistances default to the measured mean R_on / R_off of the
    chalcogenide devices and both thresholds to the measured 0.15 V.
    ``tau_c`` and ``v_t`` are fitting constants.
    """

    r_on: float = 323.4
    r_off: float = 2924.655
    v_on: float = 0.15
    v_off: float = 0.15
    tau_c: float = 100e-9
    v_t: float = 0.026
    n_switches: int = 1000
    mode: Mode = "deterministic"
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.r_on < self.r_off:
            raise InvalidParam(f"need 0 < r_on < r_off, got r_on={self.r_on}, r_off={self.r_off}")
        for name in ("v_on", "v_off", "tau_c", "v_t"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidParam(f"{name} must be positive and finite, got {value}")
        if int(self.n_switches) != self.n_switches or self.n_switches < 1:
            raise InvalidParam(f"n_switches must be an integer >= 1, got {self.n_switches}")
        if self.mode not in ("deterministic", "stochastic"):
            raise InvalidParam(f"mode must be 'deterministic' or 'stochastic', got {self.mode!r}")

    def with_resistances(self, r_on: float, r_off: float) -> MemristorParams:
        return replace(self, r_on=r_on, r_off=r_off)


#: Low/high resistance defaults of the reference model before refitting
#: to the measured devices.
KNOWM_PRESET = MemristorParams(r_on=500.0, r_off=1500.0)


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def _check_fraction(x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"state x must lie in [0, 1], got {x}")


def memristor_conductance(x: float, mp: MemristorParams) -> float:
    """Conductance in siemens at ON fraction ``x``."""
    _check_fraction(x)
    return x / mp.r_on + (1.0 - x) / mp.r_off


def switching_probabilities(v: float, dt: float, mp: MemristorParams) -> tuple[float, float]:
    """Per-step (P_set, P_reset) for voltage ``v`` across the device."""
    scale = dt / mp.tau_c
    p_set = min(max(scale * _sigmoid((v - mp.v_on) / mp.v_t), 0.0), 1.0)
    p_reset = min(max(scale * _sigmoid((-v - mp.v_off) / mp.v_t), 0.0), 1.0)
    return p_set, p_reset


def state_update(
    x: float,
    v: float,
    dt: float,
    mp: MemristorParams,
    rng: np.random.Generator | None = None,
) -> float:
    """Advance the ON fraction by one step of length ``dt``.

    ``v`` is the voltage of the + terminal relative to the - terminal.
    Stochastic mode needs ``rng``; ``x`` is snapped to the nearest
    multiple of ``1/n_switches`` before the draw.
    """
    _check_fraction(x)
    if not (dt > 0 and math.isfinite(dt)):
        raise DomainError(f"dt must be positive and finite, got {dt}")
    p_set, p_reset = switching_probabilities(v, dt, mp)
    if mp.mode == "deterministic":
        x_new = x + ((1.0 - x) * p_set - x * p_reset)
    else:
        if rng is None:
            raise DomainError("stochastic mode requires a random generator")
        n = int(mp.n_switches)
        n_on = int(round(x * n))
        b_set = int(rng.binomial(n - n_on, p_set)) if p_set > 0 else 0
        b_reset = int(rng.binomial(n_on, p_reset)) if p_reset > 0 else 0
        x_new = (n_on + b_set - b_reset) / n
    return min(max(x_new, 0.0), 1.0)


def device_rng(seed: int, name: str) -> np.random.Generator:
    """Counter-based generator keyed by (seed, device name).

    Keying by name keeps each device's stream independent of the order in
    which devices are evaluated.
    """
    key = zlib.crc32(name.upper().encode("utf-8"))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), key])))


@dataclass
class MemristorState:
    """Mutable state of one memristor during a run."""

    x: float
    params: MemristorParams
    rng: np.random.Generator | None = field(default=None, repr=False)

    @classmethod
    def initial(cls, x0: float, params: MemristorParams, name: str = "M") -> MemristorState:
        _check_fraction(x0)
        rng = device_rng(params.seed, name) if params.mode == "stochastic" else None
        if params.mode == "stochastic":
            x0 = round(x0 * params.n_switches) / params.n_switches
        return cls(x0, params, rng)

    @property
    def conductance(self) -> float:
        return memristor_conductance(self.x, self.params)

    def advance(self, v: float, dt: float) -> float:
        self.x = state_update(self.x, v, dt, self.params, self.rng)
        return self.x


# -- pulse source ------------------------------------------------------------

def pulse_value(t: float, p) -> float:
    """Value of a SPICE ``PULSE(v1 v2 td tr tf pw per)`` source at time ``t``."""
    if t < p.td:
        return p.v1
    tau = math.fmod(t - p.td, p.per)
    if tau < p.tr:
        return p.v1 + (p.v2 - p.v1) * tau / p.tr
    tau -= p.tr
    if tau <= p.pw:
        return p.v2
    tau -= p.pw
    if tau < p.tf:
        return p.v2 + (p.v1 - p.v2) * tau / p.tf
    return p.v1


def breakpoints(p, tstop: float) -> list[float]:
    """Sorted corner times of a pulse source inside ``[0, tstop]``."""
    if p.td > tstop:
        return []
    offsets = (0.0, p.tr, p.tr + p.pw, p.tr + p.pw + p.tf)
    tol = 1e-9 * min(p.tr, p.tf, p.pw)
    out: list[float] = []
    k = 0
    while True:
        base = p.td + k * p.per
        if base > tstop + tol:
            break
        for off in offsets:
            t = base + off
            if t <= tstop + tol:
                out.append(min(t, tstop) if abs(t - tstop) <= tol else t)
        k += 1
    out.sort()
    deduped: list[float] = []
    for t in out:
        if not deduped or t - deduped[-1] > tol:
            deduped.append(t)
    return deduped
