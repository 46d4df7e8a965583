"""Command-line front end.

Every command writes plain CSV plus a ``<out>.manifest.json`` sidecar that
records the exact argument list, resolved parameters and input digests.
``qfpmem replay`` re-executes a manifest.

Exit codes: 0 success, 1 bad input (netlist, flags, CSV rows),
2 solver failure, 3 file I/O.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    DEFAULT_AMPLITUDES,
    DEFAULT_FREQUENCIES,
    MEASUREMENT_HEADER,
    DEFAULT_CORNERS,
    STATS_HEADER,
    Corner,
    CornerSet,
    SweepError,
    compute_stats,
    corner_sweep,
    corners_from_stats,
    default_workers,
    histogram,
    read_measurements,
    read_stats_table,
    simulate_pair,
    write_histogram,
    write_stats_table,
    write_sweep,
)
from .devices import MemristorParams
from .engine import SolverConfig, Waveform, transient
from .errors import QfpmemError, SolverError
from .netlist import PackageParasitics, parse_netlist, parse_value

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3

#: Stand-ins for a zero package inductance/capacitance; the cell topology
#: needs both elements present.
L_FLOOR = 1e-18
C_FLOOR = 1e-21

_METHODS = {
    "trapezoidal": "trapezoidal",
    "trap": "trapezoidal",
    "backward_euler": "backward_euler",
    "be": "backward_euler",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out: Path, argv: list[str], command: str, params: dict, inputs: list, outputs: list) -> None:
    manifest = {
        "command": command,
        "argv": argv,
        "cwd": os.getcwd(),
        "params": params,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
        "version": __version__,
        "seed": params.get("memristor", {}).get("seed"),
    }
    with open(f"{out}.manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- argument helpers --------------------------------------------------------

def _value(text: str) -> float:
    try:
        return parse_value(text)
    except (ValueError, QfpmemError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _value_list(text: str) -> list[float]:
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    if not items:
        raise argparse.ArgumentTypeError("list must not be empty")
    return [_value(t) for t in items]


def _pkg(text: str) -> PackageParasitics:
    vals = _value_list(text)
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("--pkg needs r1,r2,l,c")
    r1, r2, l, c = vals
    if l < 0 or c < 0:
        raise argparse.ArgumentTypeError("package l and c must be >= 0")
    return PackageParasitics(r1, r2, l if l > 0 else L_FLOOR, c if c > 0 else C_FLOOR)


def _solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=sorted(_METHODS), default="trapezoidal")
    p.add_argument("--steps-per-period", type=int, default=SolverConfig.steps_per_period)
    p.add_argument("--reltol", type=_value, default=SolverConfig.reltol)


def _device_args(p: argparse.ArgumentParser) -> None:
    d = MemristorParams()
    p.add_argument("--tau-c", type=_value, default=d.tau_c, help="switching time constant [s]")
    p.add_argument("--v-t", type=_value, default=d.v_t, help="thermal voltage of the switches [V]")
    p.add_argument("--v-on", type=_value, default=d.v_on)
    p.add_argument("--v-off", type=_value, default=d.v_off)
    p.add_argument("--mode", choices=("deterministic", "stochastic"), default=d.mode)
    p.add_argument("--n-switches", type=int, default=d.n_switches)
    p.add_argument("--seed", type=int, default=d.seed)


def _config(ns) -> SolverConfig:
    return SolverConfig(method=_METHODS[ns.method], steps_per_period=ns.steps_per_period, reltol=ns.reltol)


def _device(ns) -> MemristorParams:
    return MemristorParams(
        v_on=ns.v_on, v_off=ns.v_off, tau_c=ns.tau_c, v_t=ns.v_t,
        n_switches=ns.n_switches, mode=ns.mode, seed=ns.seed,
    )


def _load_stats(path: Path):
    with open(path, newline="") as fh:
        header = tuple(h.strip() for h in fh.readline().strip().split(","))
    if header == STATS_HEADER:
        return read_stats_table(path)
    if header == MEASUREMENT_HEADER:
        return compute_stats(read_measurements(path))
    raise UsageError(f"{path}: not a measurement or stats table CSV")


def _corner(text: str, available: CornerSet) -> Corner:
    if ":" in text:
        ron, roff = (_value(s) for s in text.split(":", 1))
        if not 0 < ron < roff:
            raise UsageError(f"corner {text!r}: need 0 < r_on < r_off")
        return Corner(text, ron, roff)
    try:
        return available[text.lower()]
    except KeyError:
        raise UsageError(f"unknown corner {text!r}; expected one of {available.labels} or r_on:r_off") from None


# -- commands ----------------------------------------------------------------

def cmd_sim(ns, argv) -> int:
    path = Path(ns.netlist)
    text = path.read_text()
    circuit = parse_netlist(text)
    cfg = _config(ns)
    wf = transient(circuit, cfg, ns.tstop, use_ic=ns.uic)
    out = Path(ns.out)
    wf.to_csv(out)
    params = {"solver": asdict(cfg), "tstop": ns.tstop if ns.tstop is not None else circuit.tstop, "uic": ns.uic}
    _write_manifest(out, argv, "sim", params, [path], [out])
    return EXIT_OK


def cmd_compare(ns, argv) -> int:
    inputs = []
    corners = DEFAULT_CORNERS
    if ns.stats_csv:
        corners = corners_from_stats(_load_stats(Path(ns.stats_csv)))
        inputs.append(Path(ns.stats_csv))
    corner = _corner(ns.corner, corners)
    mp, cfg = _device(ns), _config(ns)
    pair = simulate_pair(
        corner.r_on, corner.r_off, ns.freq, ns.amplitude, mp, ns.pkg, cfg, ns.cycles, duty=ns.duty,
    )
    t = pair.delta.t
    wf = Waveform(t, {
        "v_in": np.interp(t, pair.packaged.t, pair.packaged["v(in)"]),
        "i_packaged": np.interp(t, pair.packaged.t, pair.packaged["i(M1)"]),
        "i_ideal": np.interp(t, pair.ideal.t, pair.ideal["i(M1)"]),
        "delta_i": pair.delta["delta_i"],
    })
    out = Path(ns.out)
    wf.to_csv(out)
    params = {
        "corner": asdict(corner), "frequency": ns.freq, "amplitude": ns.amplitude, "duty": ns.duty,
        "n_cycles": ns.cycles, "package": asdict(ns.pkg), "memristor": asdict(mp), "solver": asdict(cfg),
    }
    _write_manifest(out, argv, "compare", params, inputs, [out])
    return EXIT_OK


def cmd_sweep(ns, argv) -> int:
    inputs = []
    available = DEFAULT_CORNERS
    if ns.stats_csv:
        available = corners_from_stats(_load_stats(Path(ns.stats_csv)))
        inputs.append(Path(ns.stats_csv))
    if ns.corners:
        labels = [s.strip() for s in ns.corners.split(",") if s.strip()]
        if not labels:
            raise UsageError("--corners must not be empty")
        corners = CornerSet(tuple(_corner(s, available) for s in labels))
    else:
        corners = available
    mp, cfg = _device(ns), _config(ns)
    summaries = []
    for amp in ns.amplitudes:
        summaries += corner_sweep(
            corners, ns.freqs, amp, mp, ns.pkg, cfg, n_cycles=ns.cycles, duty=ns.duty, workers=ns.workers,
        )
    out = Path(ns.out)
    write_sweep(summaries, out)
    params = {
        "corners": [asdict(c) for c in corners], "frequencies": ns.freqs, "amplitudes": ns.amplitudes,
        "duty": ns.duty, "n_cycles": ns.cycles, "package": asdict(ns.pkg), "memristor": asdict(mp),
        "solver": asdict(cfg),
    }
    _write_manifest(out, argv, "sweep", params, inputs, [out])
    return EXIT_OK


def cmd_stats(ns, argv) -> int:
    path = Path(ns.measurements)
    ms = read_measurements(path)
    stats = compute_stats(ms)
    prefix = ns.out_prefix
    table = Path(f"{prefix}_table.csv")
    write_stats_table(stats, table)
    outputs = [table]
    for state in ("on", "off"):
        hist = Path(f"{prefix}_hist_{state}.csv")
        write_histogram(histogram(ms, state, ns.bins), hist)
        outputs.append(hist)
    _write_manifest(Path(prefix), argv, "stats", {"bins": ns.bins}, [path], outputs)
    return EXIT_OK


def cmd_replay(ns, argv) -> int:
    with open(ns.manifest) as fh:
        manifest = json.load(fh)
    base = Path(manifest.get("cwd", "."))
    for path, digest in manifest.get("inputs", {}).items():
        if _sha256(base / path) != digest:
            raise UsageError(f"input {path} changed since the manifest was written")
    cwd = os.getcwd()
    os.chdir(manifest.get("cwd", cwd))
    try:
        code = main(manifest["argv"])
    finally:
        os.chdir(cwd)
    if code != EXIT_OK:
        return code
    for path, digest in manifest.get("outputs", {}).items():
        if _sha256(base / path) != digest:
            print(f"qfpmem: replay output {path} differs from the recorded digest", file=sys.stderr)
            return EXIT_SOLVER
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qfpmem", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qfpmem {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sim", help="transient simulation of a netlist")
    p.add_argument("netlist")
    p.add_argument("--tstop", type=_value, default=None, help="overrides .tran")
    p.add_argument("--uic", action="store_true", help="start from element IC values")
    p.add_argument("--out", required=True)
    _solver_args(p)
    p.set_defaults(func=cmd_sim)

    def experiment(p):
        p.add_argument("--pkg", type=_pkg, default=PackageParasitics(), metavar="R1,R2,L,C")
        p.add_argument("--duty", type=float, default=0.5)
        p.add_argument("--cycles", type=int, default=5)
        p.add_argument("--stats-csv", default=None, help="measurement CSV or stats table defining the corners")
        p.add_argument("--out", required=True)
        _solver_args(p)
        _device_args(p)

    p = sub.add_parser("compare", help="packaged vs ideal cell for one corner")
    p.add_argument("--corner", default="c1", help="c1..c5 or r_on:r_off")
    p.add_argument("--freq", type=_value, default=1e4)
    p.add_argument("--amplitude", type=_value, default=0.5)
    experiment(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="error summary over corners, frequencies and amplitudes")
    p.add_argument("--corners", default=None, help="comma list of c1..c5 or r_on:r_off")
    p.add_argument("--freqs", type=_value_list, default=list(DEFAULT_FREQUENCIES))
    p.add_argument("--amplitudes", type=_value_list, default=list(DEFAULT_AMPLITUDES))
    p.add_argument("--workers", type=int, default=default_workers(), help="default: $QFPMEM_WORKERS or 1")
    experiment(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stats", help="resistance statistics and histograms of a measurement CSV")
    p.add_argument("measurements")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("replay", help="re-run a manifest and check the outputs match")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"qfpmem: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return ns.func(ns, argv)
    except OSError as exc:
        print(f"qfpmem: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SweepError as exc:
        print(f"qfpmem: error: {exc}", file=sys.stderr)
        return EXIT_SOLVER if isinstance(exc.cause, SolverError) else EXIT_INPUT
    except SolverError as exc:
        print(f"qfpmem: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, QfpmemError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"qfpmem: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
