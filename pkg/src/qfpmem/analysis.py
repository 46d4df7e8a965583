"""Packaged-vs-ideal error analysis and measurement statistics."""

from __future__ import annotations

import csv
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .devices import MemristorParams
from .engine import SolverConfig, Waveform, transient
from .errors import (
    EmptyState,
    InvalidStats,
    MalformedRow,
    MissingSignal,
    QfpmemError,
    SpanMismatch,
    SpanTooShort,
)
from .netlist import PackageParasitics, build_ideal_cell, build_packaged_cell, square_wave

STATES = ("on", "off")
DEFAULT_FREQUENCIES = (1e4, 1e6, 1e8, 1e9)
DEFAULT_AMPLITUDES = (0.5, -0.5)
MEMRISTOR_CURRENT = "i(M1)"


# -- measurements ------------------------------------------------------------

@dataclass(frozen=True)
class Measurement:
    cycle: int
    state: str
    resistance: float


@dataclass(frozen=True)
class MeasurementSet:
    """Per-cycle read resistances of the ON and OFF states."""

    records: tuple[Measurement, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        for rec in self.records:
            if rec.state not in STATES:
                raise ValueError(f"state must be 'on' or 'off', got {rec.state!r}")
            if not rec.resistance > 0:
                raise ValueError(f"resistance must be positive, got {rec.resistance}")
            if rec.cycle < 0:
                raise ValueError(f"cycle must be nonnegative, got {rec.cycle}")

    def values(self, state: str) -> list[float]:
        return [r.resistance for r in self.records if r.state == state]

    def __len__(self) -> int:
        return len(self.records)


MEASUREMENT_HEADER = ("cycle", "state", "resistance_ohm")


def read_measurements(path) -> MeasurementSet:
    """Load ``cycle,state,resistance_ohm`` rows.

    Raises :class:`MalformedRow` naming the first bad data row.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MEASUREMENT_HEADER:
            raise MalformedRow(f"header must be {','.join(MEASUREMENT_HEADER)}", 0)
        records = []
        for rowno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise MalformedRow(f"expected 3 fields, got {len(row)}", rowno)
            cycle_s, state, res_s = (cell.strip() for cell in row)
            try:
                cycle = int(cycle_s)
            except ValueError:
                raise MalformedRow(f"bad cycle index {cycle_s!r}", rowno) from None
            state = state.lower()
            if state not in STATES:
                raise MalformedRow(f"state must be on/off, got {state!r}", rowno)
            try:
                res = float(res_s)
            except ValueError:
                raise MalformedRow(f"bad resistance {res_s!r}", rowno) from None
            if cycle < 0 or not (res > 0 and math.isfinite(res)):
                raise MalformedRow("cycle must be >= 0 and resistance > 0", rowno)
            records.append(Measurement(cycle, state, res))
    return MeasurementSet(tuple(records))


def write_measurements(ms: MeasurementSet, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MEASUREMENT_HEADER)
        for r in ms.records:
            w.writerow([r.cycle, r.state, repr(r.resistance)])


# -- statistics --------------------------------------------------------------

@dataclass(frozen=True)
class StateStats:
    mean: float
    max: float
    min: float
    count: int

    def __post_init__(self):
        if not self.min <= self.mean <= self.max:
            raise ValueError(f"need min <= mean <= max, got {self.min}, {self.mean}, {self.max}")


#: Aggregates of the measured chalcogenide devices (100 write/erase cycles).
MEASURED_STATS = {
    "on": StateStats(mean=323.4, max=512.03, min=305.34, count=100),
    "off": StateStats(mean=2924.655, max=7682.6, min=1432.4, count=100),
}


def compute_stats(ms: MeasurementSet) -> dict[str, StateStats]:
    """Exact mean/max/min per state.

    The mean is the correctly rounded mean of the stored values.
    """
    out = {}
    for state in STATES:
        vals = ms.values(state)
        if not vals:
            raise EmptyState(f"no {state!r} records")
        out[state] = StateStats(statistics.mean(vals), max(vals), min(vals), len(vals))
    return out


@dataclass(frozen=True)
class HistBin:
    lo: float
    hi: float
    count: int


def histogram(ms: MeasurementSet, state: str, n_bins: int) -> list[HistBin]:
    """Equal-width bins over ``[min, max]``; the maximum falls in the last bin.

    A state whose values are all equal yields a single zero-width bin.
    """
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    vals = np.asarray(ms.values(state), dtype=float)
    if vals.size == 0:
        raise EmptyState(f"no {state!r} records")
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        return [HistBin(lo, hi, int(vals.size))]
    edges = lo + (hi - lo) * np.arange(n_bins + 1) / n_bins
    edges[-1] = hi
    counts, _ = np.histogram(vals, bins=edges)
    return [HistBin(float(edges[k]), float(edges[k + 1]), int(counts[k])) for k in range(n_bins)]


# -- corners -----------------------------------------------------------------

@dataclass(frozen=True)
class Corner:
    label: str
    r_on: float
    r_off: float


@dataclass(frozen=True)
class CornerSet:
    """The five {R_on, R_off} corners, labelled c1..c5."""

    corners: tuple[Corner, ...]

    def __post_init__(self):
        object.__setattr__(self, "corners", tuple(self.corners))
        for c in self.corners:
            if not 0 < c.r_on < c.r_off:
                raise InvalidStats(f"corner {c.label}: need r_on < r_off, got {c.r_on}, {c.r_off}")

    def __iter__(self):
        return iter(self.corners)

    def __len__(self) -> int:
        return len(self.corners)

    def __getitem__(self, label: str) -> Corner:
        for c in self.corners:
            if c.label == label:
                return c
        raise KeyError(label)

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.corners]


def corners_from_stats(stats: dict[str, StateStats]) -> CornerSet:
    on, off = stats["on"], stats["off"]
    pairs = [
        (on.mean, off.mean),
        (on.mean, off.max),
        (on.mean, off.min),
        (on.max, off.mean),
        (on.min, off.mean),
    ]
    return CornerSet(tuple(Corner(f"c{k}", r_on, r_off) for k, (r_on, r_off) in enumerate(pairs, start=1)))


DEFAULT_CORNERS = corners_from_stats(MEASURED_STATS)

STATS_HEADER = ("state", "mean_ohm", "max_ohm", "min_ohm", "count")


def write_stats_table(stats: dict[str, StateStats], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATS_HEADER)
        for state in ("off", "on"):
            s = stats[state]
            w.writerow([state, repr(s.mean), repr(s.max), repr(s.min), s.count])


def read_stats_table(path) -> dict[str, StateStats]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != STATS_HEADER:
        raise MalformedRow(f"header must be {','.join(STATS_HEADER)}", 0)
    out = {}
    for rowno, row in enumerate(rows[1:], start=1):
        try:
            state = row[0].strip().lower()
            mean, mx, mn = (float(v) for v in row[1:4])
            count = int(row[4])
        except (ValueError, IndexError):
            raise MalformedRow("expected state,mean,max,min,count", rowno) from None
        if state not in STATES:
            raise MalformedRow(f"unknown state {state!r}", rowno)
        out[state] = StateStats(mean, mx, mn, count)
    for state in STATES:
        if state not in out:
            raise EmptyState(f"stats table lacks {state!r}")
    return out


def write_histogram(bins: Sequence[HistBin], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("bin_lo_ohm", "bin_hi_ohm", "count"))
        for b in bins:
            w.writerow([repr(b.lo), repr(b.hi), b.count])


# -- synthetic data ----------------------------------------------------------

def _matched_sample(target: StateStats, n: int, rng: np.random.Generator) -> list[float]:
    """``n`` values with exactly the target min, max and (rounded) mean."""
    lo, hi, mean = target.min, target.max, target.mean
    if n == 1 or lo == hi:
        if not lo == mean == hi:
            raise ValueError("a single value requires min == mean == max")
        return [mean] * n
    if n == 2:
        raise ValueError("need at least 3 values to fix min, max and mean independently")
    u = rng.uniform(size=n - 2)
    need = Fraction(mean) * n - Fraction(lo) - Fraction(hi)
    frac = float(need / (n - 2) - Fraction(lo)) / (hi - lo)
    if not 0 < frac < 1:
        raise ValueError("target mean is not reachable from min and max")
    # Skew the uniform draws with a power law whose mean matches ``frac``.
    p_lo, p_hi = 1e-3, 1e3
    for _ in range(200):
        p = math.sqrt(p_lo * p_hi)
        if float(np.mean(u ** p)) > frac:
            p_lo = p
        else:
            p_hi = p
    vals = [lo + (hi - lo) * float(v) for v in u ** p]
    # Absorb the remaining mismatch in the value closest to the middle.
    k = min(range(len(vals)), key=lambda m: abs(vals[m] - (lo + hi) / 2))
    others = sum((Fraction(v) for m, v in enumerate(vals) if m != k), Fraction(0))
    vals[k] = float(need - others)
    full = [lo, hi] + vals
    step = 0
    while statistics.mean(full) != mean:
        direction = math.inf if statistics.mean(full) < mean else -math.inf
        full[2 + k] = math.nextafter(full[2 + k], direction)
        step += 1
        if step > 1000:
            raise RuntimeError("could not match the target mean")
    if not all(lo <= v <= hi for v in full[2:]):
        raise RuntimeError("adjusted value left the [min, max] range")
    order = rng.permutation(n)
    return [full[m] for m in order]


def synthetic_measurements(
    n_cycles: int = 100,
    seed: int = 2018,
    stats: dict[str, StateStats] | None = None,
) -> MeasurementSet:
    """Synthetic read-resistance records reproducing given aggregates.

    The raw measurements behind ``MEASURED_STATS`` are unpublished.  This
    generator builds a right-skewed sample per state whose min, max and
    mean equal the targets exactly, for exercising the statistics
    pipeline only.
    """
    stats = stats or MEASURED_STATS
    rng = np.random.default_rng(seed)
    on = _matched_sample(stats["on"], n_cycles, rng)
    off = _matched_sample(stats["off"], n_cycles, rng)
    records = []
    for k in range(n_cycles):
        records.append(Measurement(k, "on", on[k]))
        records.append(Measurement(k, "off", off[k]))
    return MeasurementSet(tuple(records))


# -- error signal ------------------------------------------------------------

def delta_current(packaged: Waveform, ideal: Waveform, signal: str = MEMRISTOR_CURRENT) -> Waveform:
    """``packaged[signal] - ideal[signal]`` on the union of both grids.

    Each waveform is linearly interpolated where it lacks a sample.
    """
    for wf, which in ((packaged, "packaged"), (ideal, "ideal")):
        if signal not in wf:
            raise MissingSignal(f"{which} waveform has no signal {signal!r}")
    t0a, t1a = packaged.t[0], packaged.t[-1]
    t0b, t1b = ideal.t[0], ideal.t[-1]
    span = max(t1a - t0a, t1b - t0b, 1e-300)
    if abs(t0a - t0b) > 1e-9 * span or abs(t1a - t1b) > 1e-9 * span:
        raise SpanMismatch(f"spans differ: [{t0a:g}, {t1a:g}] vs [{t0b:g}, {t1b:g}]")
    t = np.union1d(packaged.t, ideal.t)
    t = t[(t >= max(t0a, t0b)) & (t <= min(t1a, t1b))]
    di = np.interp(t, packaged.t, packaged[signal]) - np.interp(t, ideal.t, ideal[signal])
    return Waveform(t, {"delta_i": di})


class ErrorStats(NamedTuple):
    mean_abs: float
    std: float
    max_abs: float
    signed_mean: float


def average_error(di: Waveform, period: float, n_cycles: int = 5, signal: str = "delta_i") -> ErrorStats:
    """Time-weighted statistics of ``|di|`` over ``[0, n_cycles * period]``.

    The signal is treated as piecewise linear between samples and the
    integrals of ``|di|``, ``di`` and ``di**2`` are taken exactly
    (splitting segments at zero crossings), so the result does not depend
    on where the samples fall.  ``std`` is the standard deviation of
    ``|di|`` over time.
    """
    if not period > 0 or n_cycles < 1:
        raise ValueError("period must be positive and n_cycles >= 1")
    t_end = n_cycles * period
    t = di.t
    y = di[signal]
    if t.size < 2 or t[0] > 0 or t[-1] < t_end * (1 - 1e-9):
        raise SpanTooShort(f"waveform covers [{t[0]:g}, {t[-1]:g}], need [0, {t_end:g}]")
    inside = t < t_end
    tt = np.append(t[inside], t_end)
    yy = np.append(y[inside], np.interp(t_end, t, y))
    dt = np.diff(tt)
    a, b = yy[:-1], yy[1:]
    same_sign = a * b >= 0
    abs_a, abs_b = np.abs(a), np.abs(b)
    denom = np.where(same_sign, 1.0, abs_a + abs_b)
    int_abs = np.where(same_sign, 0.5 * (abs_a + abs_b), 0.5 * (a * a + b * b) / denom) * dt
    int_sq = (a * a + a * b + b * b) / 3.0 * dt
    int_signed = 0.5 * (a + b) * dt
    span = tt[-1] - tt[0]
    mean_abs = float(int_abs.sum() / span)
    var = float(int_sq.sum() / span) - mean_abs * mean_abs
    return ErrorStats(
        mean_abs=mean_abs,
        std=math.sqrt(max(var, 0.0)),
        max_abs=float(np.abs(yy).max()),
        signed_mean=float(int_signed.sum() / span),
    )


# -- experiment --------------------------------------------------------------

@dataclass(frozen=True)
class ErrorSummary:
    frequency: float
    corner: str
    amplitude: float
    mean_abs: float
    signed_mean: float
    std: float
    max_abs: float
    n_cycles: int


SWEEP_HEADER = (
    "frequency_hz",
    "corner",
    "amplitude_v",
    "mean_abs_a",
    "signed_mean_a",
    "std_a",
    "max_abs_a",
    "n_cycles",
)


class SweepError(QfpmemError):
    """A sweep point failed; ``corner`` and ``frequency`` locate it."""

    def __init__(self, corner: str, frequency: float, amplitude: float, cause: Exception):
        self.corner = corner
        self.frequency = frequency
        self.amplitude = amplitude
        self.cause = cause
        super().__init__(f"corner {corner}, {frequency:g} Hz, {amplitude:+g} V: {type(cause).__name__}: {cause}")


@dataclass(frozen=True)
class PairResult:
    packaged: Waveform
    ideal: Waveform
    delta: Waveform
    period: float


def simulate_pair(
    r_on: float,
    r_off: float,
    frequency: float,
    amplitude: float,
    mp_base: MemristorParams | None = None,
    pkg: PackageParasitics | None = None,
    cfg: SolverConfig | None = None,
    n_cycles: int = 5,
    *,
    duty: float = 0.5,
) -> PairResult:
    """Run the packaged and ideal cells under the same square-wave drive.

    Positive amplitudes start from the OFF state (x0 = 0, potentiation),
    negative ones from the ON state (x0 = 1, depression).  The ideal cell
    replays the packaged cell's accepted time grid step for step, so both
    runs discretize the memristor state identically.
    """
    if amplitude == 0:
        raise ValueError("amplitude must be nonzero")
    mp = (mp_base or MemristorParams()).with_resistances(r_on, r_off)
    pkg = pkg or PackageParasitics()
    cfg = cfg or SolverConfig()
    src = square_wave(frequency, amplitude, duty=duty)
    x0 = 0.0 if amplitude > 0 else 1.0
    tstop = n_cycles * src.per
    packaged = transient(build_packaged_cell(mp, pkg.r1, pkg.r2, pkg.l, pkg.c, src, x0=x0), cfg, tstop)
    ideal = transient(build_ideal_cell(mp, pkg.r1, pkg.r2, src, x0=x0), cfg, tstop, fixed_times=packaged.t)
    return PairResult(packaged, ideal, delta_current(packaged, ideal), src.per)


def _sweep_point(args) -> ErrorSummary:
    corner, freq, amplitude, mp_base, pkg, cfg, n_cycles, duty = args
    try:
        pair = simulate_pair(corner.r_on, corner.r_off, freq, amplitude, mp_base, pkg, cfg, n_cycles, duty=duty)
        stats = average_error(pair.delta, pair.period, n_cycles)
    except QfpmemError as exc:
        raise SweepError(corner.label, freq, amplitude, exc) from exc
    return ErrorSummary(freq, corner.label, amplitude, stats.mean_abs, stats.signed_mean, stats.std, stats.max_abs, n_cycles)


def corner_sweep(
    corners: CornerSet | Iterable[Corner] = DEFAULT_CORNERS,
    freqs: Sequence[float] = DEFAULT_FREQUENCIES,
    amplitude: float = 0.5,
    mp_base: MemristorParams | None = None,
    pkg: PackageParasitics | None = None,
    cfg: SolverConfig | None = None,
    *,
    n_cycles: int = 5,
    duty: float = 0.5,
    workers: int = 1,
) -> list[ErrorSummary]:
    """Error summary for every (corner, frequency) pair, corner-major order.

    With ``workers > 1`` the points run in separate processes; results are
    returned in the same order either way.
    """
    freqs = list(freqs)
    if not freqs:
        raise ValueError("at least one frequency is required")
    if amplitude == 0:
        raise ValueError("amplitude must be nonzero")
    tasks = [(c, float(f), float(amplitude), mp_base, pkg, cfg, n_cycles, duty) for c in corners for f in freqs]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, tasks))
    return [_sweep_point(task) for task in tasks]


def write_sweep(summaries: Iterable[ErrorSummary], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for s in summaries:
            w.writerow([
                repr(s.frequency), s.corner, repr(s.amplitude), repr(s.mean_abs),
                repr(s.signed_mean), repr(s.std), repr(s.max_abs), s.n_cycles,
            ])


def read_sweep(path) -> list[ErrorSummary]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        ErrorSummary(
            float(r["frequency_hz"]), r["corner"], float(r["amplitude_v"]), float(r["mean_abs_a"]),
            float(r["signed_mean_a"]), float(r["std_a"]), float(r["max_abs_a"]), int(r["n_cycles"]),
        )
        for r in rows
    ]


def default_workers() -> int:
    """Worker count from ``QFPMEM_WORKERS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("QFPMEM_WORKERS", "1")))
    except ValueError:
        return 1
