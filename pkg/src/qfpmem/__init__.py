"""Transient simulation of a memristor behind quad-flat-pack package parasitics.

The package models a single memristor read/write cell twice: once ideal
(source, series resistors, memristor) and once with the bond-wire
inductance and pad capacitance of the package in the signal path.  The
difference between the two memristor currents is the package-induced
error.
"""

from .analysis import (
    DEFAULT_CORNERS,
    MEASURED_STATS,
    Corner,
    CornerSet,
    ErrorStats,
    ErrorSummary,
    HistBin,
    Measurement,
    MeasurementSet,
    StateStats,
    average_error,
    compute_stats,
    corner_sweep,
    corners_from_stats,
    delta_current,
    histogram,
    read_measurements,
    simulate_pair,
    synthetic_measurements,
)
from .devices import (
    KNOWM_PRESET,
    MemristorParams,
    MemristorState,
    memristor_conductance,
    pulse_value,
    state_update,
    switching_probabilities,
)
from .engine import SolverConfig, Waveform, assemble, dc_operating_point, transient
from .errors import *  # noqa: F401,F403
from .linalg import linear_solve
from .netlist import (
    VDC,
    Capacitor,
    Circuit,
    Inductor,
    Memristor,
    PackageParasitics,
    Resistor,
    VPulse,
    build_ideal_cell,
    build_packaged_cell,
    parse_netlist,
    parse_value,
    square_wave,
    to_netlist,
)

__version__ = "0.1.0"


def data_path(name: str) -> str:
    """Path of a bundled netlist or dataset in ``qfpmem/data``."""
    from importlib.resources import files

    return str(files(__name__) / "data" / name)
