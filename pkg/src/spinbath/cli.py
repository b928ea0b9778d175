"""Scenario-driven command line front end.

Subcommands::

    run          integrate a scenario (preset or config file); one CSV per
                 engine per correlation setting plus a <name>.meta sidecar
    compare      column-wise difference report between two trajectory CSVs
    fcorr-table  tabulate the initial-correlation drive f_corr(t)
    list-presets show the bundled parameter sets

Exit codes: 0 success, 1 usage or scenario error, 2 numerical failure,
3 comparison tolerance breach.

Scenario files are flat INI text (diff-friendly key = value lines under
section headers)::

    [scenario]
    name = demo            ; output file stem
    prep = down_z          ; down_z | up_z | plus_x
    engines = master_equation, exact_dephasing, short_time
    outputs = jz           ; observables of interest (metadata only)
    correlations = both    ; both | with | without

    [system]
    n_atoms = 1
    epsilon = 0.0
    delta = 4.0

    [bath]
    g = 0.05
    omega_c = 5.0
    beta = 1.0

    [simulation]
    t_max = 2.0
    dt = 0.001             ; optional, default 1e-3 * 2 pi / delta_tilde
    kernel_grid_dt = ...   ; optional, default dt / 2
    record_every = 4       ; optional, default 1

Floats are serialized with repr() and CSV cells with 17 significant
digits, so parse -> serialize -> parse is an identity and a rerun of the
same scenario with the same version is byte-identical.
"""

import argparse
import configparser
import dataclasses
import io
import os
import sys

import numpy as np

from . import __version__
from .bath import BathSpec, DEFAULT_POLICY, IntegrationError
from .corr_kernel import (Preparation, f_corr, f_corr_oracle, initial_state,
                          prep_vector)
from .exact_dephasing import dephasing_trajectory
from .master_equation import FailedRunError, SimConfig, evolve
from .short_time import rho_short, short_time_coeffs, short_time_expectations
from .spin_algebra import SystemParams, build_spin_operators

ENGINE_ME = "master_equation"
ENGINE_EXACT = "exact_dephasing"
ENGINE_SHORT = "short_time"
ENGINES = (ENGINE_ME, ENGINE_EXACT, ENGINE_SHORT)

CSV_COLUMNS = ("t", "jz", "jz2", "jy", "jx", "trace_err", "herm_err",
               "min_eig")


class ScenarioError(ValueError):
    """Scenario file cannot be parsed or violates an engine constraint."""


@dataclasses.dataclass(frozen=True)
class Scenario:
    name: str
    sys: SystemParams
    bath: BathSpec
    prep: Preparation
    sim: SimConfig
    engines: tuple = (ENGINE_ME,)
    outputs: tuple = ("jz",)
    correlations: str = "both"     # both | with | without

    def validate(self):
        for e in self.engines:
            if e not in ENGINES:
                raise ScenarioError(f"unknown engine '{e}'")
        if not self.engines:
            raise ScenarioError("at least one engine is required")
        if ENGINE_EXACT in self.engines and self.sys.epsilon != 0.0:
            raise ScenarioError(
                "engine exact_dephasing requires epsilon = 0 "
                f"(got epsilon = {self.sys.epsilon})")
        if self.correlations not in ("both", "with", "without"):
            raise ScenarioError(
                f"correlations must be both/with/without, "
                f"got '{self.correlations}'")

    def corr_settings(self, no_corr=False):
        settings = {"both": (True, False), "with": (True,),
                    "without": (False,)}[self.correlations]
        if no_corr:
            settings = tuple(s for s in settings if not s)
            if not settings:
                settings = (False,)
        return settings


# --------------------------------------------------------------------------
# scenario file round trip
# --------------------------------------------------------------------------

def _split_list(raw):
    return tuple(x.strip() for x in raw.split(",") if x.strip())


def parse_scenario(text):
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"scenario parse error: {exc}") from exc
    try:
        sec = cp["scenario"]
        name = sec.get("name", "scenario")
        prep = Preparation(sec.get("prep", "down_z"))
        engines = _split_list(sec.get("engines", ENGINE_ME))
        outputs = _split_list(sec.get("outputs", "jz"))
        correlations = sec.get("correlations", "both")

        def require(section, key):
            val = cp[section].getfloat(key)
            if val is None:
                raise ScenarioError(f"missing required key '{key}' "
                                    f"in [{section}]")
            return val

        s = cp["system"]
        sysp = SystemParams(epsilon=s.getfloat("epsilon", 0.0),
                            delta=require("system", "delta"),
                            n_atoms=s.getint("n_atoms", 1))
        b = cp["bath"]
        bath = BathSpec(g=require("bath", "g"),
                        omega_c=require("bath", "omega_c"),
                        beta=b.getfloat("beta", 1.0))
        m = cp["simulation"]
        sim = SimConfig(
            t_max=require("simulation", "t_max"),
            dt=m.getfloat("dt", fallback=None),
            kernel_grid_dt=m.getfloat("kernel_grid_dt", fallback=None),
            record_every=m.getint("record_every", 1))
    except ScenarioError:
        raise
    except (KeyError, ValueError, configparser.Error) as exc:
        raise ScenarioError(f"scenario error: {exc}") from exc
    sc = Scenario(name=name, sys=sysp, bath=bath, prep=prep, sim=sim,
                  engines=engines, outputs=outputs, correlations=correlations)
    sc.validate()
    return sc


def load_scenario(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    return parse_scenario(text)


def serialize_scenario(sc):
    out = io.StringIO()
    out.write("[scenario]\n")
    out.write(f"name = {sc.name}\n")
    out.write(f"prep = {sc.prep.value}\n")
    out.write(f"engines = {', '.join(sc.engines)}\n")
    out.write(f"outputs = {', '.join(sc.outputs)}\n")
    out.write(f"correlations = {sc.correlations}\n\n")
    out.write("[system]\n")
    out.write(f"n_atoms = {sc.sys.n_atoms}\n")
    out.write(f"epsilon = {sc.sys.epsilon!r}\n")
    out.write(f"delta = {sc.sys.delta!r}\n\n")
    out.write("[bath]\n")
    out.write(f"g = {sc.bath.g!r}\n")
    out.write(f"omega_c = {sc.bath.omega_c!r}\n")
    out.write(f"beta = {sc.bath.beta!r}\n\n")
    out.write("[simulation]\n")
    out.write(f"t_max = {sc.sim.t_max!r}\n")
    if sc.sim.dt is not None:
        out.write(f"dt = {sc.sim.dt!r}\n")
    if sc.sim.kernel_grid_dt is not None:
        out.write(f"kernel_grid_dt = {sc.sim.kernel_grid_dt!r}\n")
    out.write(f"record_every = {sc.sim.record_every}\n")
    return out.getvalue()


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

def _preset(name, n, eps, delta, prep="down_z", engines=(ENGINE_ME,),
            outputs=("jz",), t_max=2.0, dt=None, record_every=4):
    return Scenario(
        name=name,
        sys=SystemParams(epsilon=eps, delta=delta, n_atoms=n),
        bath=BathSpec(g=0.05, omega_c=5.0, beta=1.0),
        prep=Preparation(prep),
        sim=SimConfig(t_max=t_max, dt=dt, record_every=record_every),
        engines=tuple(engines), outputs=tuple(outputs))


PRESETS = {p.name: p for p in [
    _preset("fig1", 1, 0.0, 4.0, engines=(ENGINE_ME, ENGINE_EXACT)),
    _preset("fig2", 10, 0.0, 4.0, engines=(ENGINE_ME, ENGINE_EXACT)),
    _preset("fig3", 2, 0.5, 3.5),
    _preset("fig4", 10, 0.5, 3.5),
    _preset("fig5", 10, 1.5, 2.5),
    _preset("fig6", 2, 0.5, 3.5, outputs=("jz2",)),
    _preset("fig7", 10, 0.5, 3.5, outputs=("jz2",)),
    _preset("fig8", 1000, 0.0, 4.0, engines=(ENGINE_EXACT, ENGINE_SHORT),
            t_max=0.05, dt=2.5e-4, record_every=2),
    _preset("fig8b", 1000, 0.5, 3.5, engines=(ENGINE_SHORT,),
            t_max=0.05, dt=2.5e-4, record_every=2),
    _preset("fig9", 10, 1.5, 2.5, prep="up_z"),
    _preset("fig10", 10, 1.0, 3.0, prep="plus_x", outputs=("jx",)),
]}

_PRESET_NOTES = {
    "fig1": "pure dephasing benchmark, N=1 (master equation vs exact)",
    "fig2": "pure dephasing benchmark, N=10",
    "fig3": "full model, N=2, eps=0.5, delta=3.5",
    "fig4": "full model, N=10, eps=0.5, delta=3.5",
    "fig5": "full model, N=10, eps=1.5, delta=2.5",
    "fig6": "jz second moment, N=2, eps=0.5, delta=3.5",
    "fig7": "jz second moment, N=10, eps=0.5, delta=3.5",
    "fig8": "large N=1000 dephasing, exact vs short-time",
    "fig8b": "large N=1000, eps=0.5, short-time only",
    "fig9": "spins-up preparation, N=10, eps=1.5, delta=2.5",
    "fig10": "Jx-aligned preparation, N=10, eps=1, delta=3",
}


def get_scenario(args):
    """Scenario from --preset or positional file (exactly one required)."""
    has_file = getattr(args, "scenario_file", None) is not None
    if args.preset is not None and has_file:
        raise ScenarioError("give either a scenario file or --preset, not both")
    if args.preset is not None:
        if args.preset not in PRESETS:
            known = ", ".join(sorted(PRESETS))
            raise ScenarioError(f"unknown preset '{args.preset}' "
                                f"(known: {known})")
        return PRESETS[args.preset]
    if has_file:
        return load_scenario(args.scenario_file)
    raise ScenarioError("a scenario file or --preset is required")


# --------------------------------------------------------------------------
# engines -> column dicts
# --------------------------------------------------------------------------

def recorded_times(sc):
    """The time grid evolve() records, reproduced for the analytic engines."""
    dt, n_steps, _ = sc.sim.resolve(sc.sys)
    keep = [k for k in range(n_steps + 1)
            if k % sc.sim.record_every == 0 or k == n_steps]
    return np.array([k * dt for k in keep])


def _run_master(sc, with_corr, policy=None):
    ops = build_spin_operators(sc.sys.n_atoms)
    rho0 = initial_state(sc.prep, ops)
    config = dataclasses.replace(sc.sim, include_correlations=with_corr)
    traj = evolve(rho0, sc.sys, sc.bath, sc.prep, config, policy)
    return {"t": traj.times, "jz": traj.jz, "jz2": traj.jz2, "jy": traj.jy,
            "jx": traj.jx, "trace_err": traj.trace_err,
            "herm_err": traj.herm_err, "min_eig": traj.min_eig}


def _run_exact(sc, with_corr, policy=None):
    times = recorded_times(sc)
    return dephasing_trajectory(times, sc.prep, sc.sys, sc.bath, with_corr,
                                policy)


def _run_short(sc, with_corr, policy=None):
    times = recorded_times(sc)
    ops = build_spin_operators(sc.sys.n_atoms)
    coeffs = short_time_coeffs(sc.sys, sc.bath, sc.prep, with_corr, policy)
    psi0 = prep_vector(sc.prep, sc.sys.n_atoms).astype(complex)
    jz2_op = ops.jz @ ops.jz
    vals = short_time_expectations(times, psi0,
                                   (ops.jz, jz2_op, ops.jy, ops.jx), coeffs)
    n = sc.sys.n_atoms
    out = {"t": times, "jz": 2.0 * vals[0] / n, "jz2": 4.0 * vals[1] / n**2,
           "jy": 2.0 * vals[2] / n, "jx": 2.0 * vals[3] / n,
           "trace_err": np.zeros(times.size),
           "herm_err": np.zeros(times.size),
           "min_eig": np.full(times.size, np.nan)}
    if ops.dim <= 64:
        rho0 = initial_state(sc.prep, ops)
        for i, t in enumerate(times):
            rho = rho_short(t, rho0, coeffs)
            out["trace_err"][i] = abs(np.trace(rho) - 1.0)
            out["herm_err"][i] = float(np.max(np.abs(rho - rho.conj().T)))
            out["min_eig"][i] = float(
                np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)[0])
    return out


_ENGINE_RUNNERS = {ENGINE_ME: _run_master, ENGINE_EXACT: _run_exact,
                   ENGINE_SHORT: _run_short}


# --------------------------------------------------------------------------
# CSV / metadata
# --------------------------------------------------------------------------

def format_cell(x):
    return "%.17g" % x


def write_csv(path, cols):
    data = [np.asarray(cols[c], dtype=float) for c in CSV_COLUMNS]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in zip(*data):
            fh.write(",".join(format_cell(x) for x in row) + "\n")


def read_csv(path):
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except (OSError, ValueError) as exc:
        raise ScenarioError(f"cannot read CSV: {exc}") from exc
    if data.dtype.names is None:
        raise ScenarioError(f"{path}: not a trajectory CSV")
    return np.atleast_1d(data)


def write_meta(path, sc, files):
    dt, n_steps, kdt = sc.sim.resolve(sc.sys)
    lines = [
        f"name = {sc.name}",
        f"version = {__version__}",
        f"prep = {sc.prep.value}",
        f"engines = {', '.join(sc.engines)}",
        f"outputs = {', '.join(sc.outputs)}",
        f"correlations = {sc.correlations}",
        f"system.n_atoms = {sc.sys.n_atoms}",
        f"system.epsilon = {sc.sys.epsilon!r}",
        f"system.delta = {sc.sys.delta!r}",
        f"system.delta_tilde = {sc.sys.delta_tilde!r}",
        f"bath.g = {sc.bath.g!r}",
        f"bath.omega_c = {sc.bath.omega_c!r}",
        f"bath.beta = {sc.bath.beta!r}",
        f"sim.t_max = {sc.sim.t_max!r}",
        f"sim.dt = {dt!r}",
        f"sim.n_steps = {n_steps}",
        f"sim.kernel_grid_dt = {kdt!r}",
        f"sim.record_every = {sc.sim.record_every}",
        f"quadrature.rel_tol = {DEFAULT_POLICY.rel_tol!r}",
        f"quadrature.abs_tol = {DEFAULT_POLICY.abs_tol!r}",
    ]
    if ENGINE_SHORT in sc.engines:
        lines.append("short_time.validity_window = "
                     f"{0.1 / sc.sys.delta_tilde!r}")
    lines.append(f"files = {', '.join(files)}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_run(args):
    sc = get_scenario(args)
    sc.validate()
    os.makedirs(args.out, exist_ok=True)
    files = []
    for engine in sc.engines:
        for with_corr in sc.corr_settings(no_corr=args.no_corr):
            cols = _ENGINE_RUNNERS[engine](sc, with_corr)
            tag = "corr" if with_corr else "nocorr"
            fname = f"{sc.name}__{engine}_{tag}.csv"
            write_csv(os.path.join(args.out, fname), cols)
            files.append(fname)
            print(f"wrote {fname}")
    write_meta(os.path.join(args.out, f"{sc.name}.meta"), sc, files)
    print(f"wrote {sc.name}.meta")
    return 0


def cmd_compare(args):
    a = read_csv(args.csv_a)
    b = read_csv(args.csv_b)
    col = args.column
    for tab, path in ((a, args.csv_a), (b, args.csv_b)):
        if col not in tab.dtype.names:
            raise ScenarioError(f"{path}: no column '{col}'")
    ta, tb = a["t"], b["t"]
    span = max(1.0, float(np.max(ta) - np.min(ta)))
    if ta.size == tb.size and np.max(np.abs(ta - tb)) <= 1e-12 * span:
        ya, yb = a[col], b[col]
        tref = ta
    elif args.interpolate:
        lo = max(ta.min(), tb.min())
        hi = min(ta.max(), tb.max())
        mask = (ta >= lo) & (ta <= hi)
        if not mask.any():
            raise ScenarioError("time grids do not overlap")
        tref = ta[mask]
        ya = a[col][mask]
        yb = np.interp(tref, tb, b[col])
    else:
        raise ScenarioError(
            "time grids differ; pass --interpolate to compare anyway")
    diff = ya - yb
    max_abs = float(np.max(np.abs(diff)))
    rms = float(np.sqrt(np.mean(diff ** 2)))
    print(f"column={col} rows={tref.size} max_abs={max_abs:.6g} "
          f"rms={rms:.6g}")
    if args.tol is not None and not max_abs <= args.tol:
        print(f"tolerance breach: max_abs {max_abs:.6g} > {args.tol:.6g}")
        return 3
    return 0


def cmd_fcorr_table(args):
    sc = get_scenario(args)
    times = recorded_times(sc)
    vals = np.atleast_1d(f_corr(times, sc.prep, sc.sys, sc.bath))
    header = ["t", "f_corr"]
    cols = [times, vals]
    if args.oracle:
        oc = np.atleast_1d(f_corr_oracle(times, sc.prep, sc.sys, sc.bath))
        header.append("f_corr_oracle")
        cols.append(oc.real)
    out = sys.stdout if args.out is None else open(args.out, "w", newline="")
    try:
        out.write(",".join(header) + "\n")
        for row in zip(*cols):
            out.write(",".join(format_cell(x) for x in row) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_list_presets(args):
    order = sorted(PRESETS, key=lambda p: (len(p), p))
    for name in order:
        sc = PRESETS[name]
        print(f"{name:8s} N={sc.sys.n_atoms:<5d} eps={sc.sys.epsilon:<4g} "
              f"delta={sc.sys.delta:<4g} prep={sc.prep.value:8s} "
              f"engines={','.join(sc.engines)}  {_PRESET_NOTES[name]}")
    return 0


# --------------------------------------------------------------------------
# argument parsing / entry point
# --------------------------------------------------------------------------

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser():
    parser = _Parser(prog="spinbath",
                     description="collective spin-boson trajectory toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_run = sub.add_parser("run", help="integrate a scenario, write CSVs")
    p_run.add_argument("scenario_file", nargs="?", default=None)
    p_run.add_argument("--preset", default=None,
                       help="bundled scenario name (see list-presets)")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--no-corr", action="store_true",
                       help="drop the with-correlations runs")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="diff two trajectory CSVs")
    p_cmp.add_argument("csv_a")
    p_cmp.add_argument("csv_b")
    p_cmp.add_argument("column", nargs="?", default="jz")
    p_cmp.add_argument("--tol", type=float, default=None,
                       help="exit 3 if max-abs difference exceeds this")
    p_cmp.add_argument("--interpolate", action="store_true",
                       help="linearly interpolate the second grid onto the first")
    p_cmp.set_defaults(func=cmd_compare)

    p_fc = sub.add_parser("fcorr-table",
                          help="tabulate f_corr(t) for a scenario")
    p_fc.add_argument("scenario_file", nargs="?", default=None)
    p_fc.add_argument("--preset", default=None)
    p_fc.add_argument("--out", default=None, help="CSV path (default stdout)")
    p_fc.add_argument("--oracle", action="store_true",
                      help="append the discrete-mode oracle column")
    p_fc.set_defaults(func=cmd_fcorr_table)

    p_lp = sub.add_parser("list-presets", help="show bundled scenarios")
    p_lp.set_defaults(func=cmd_list_presets)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_usage(sys.stderr)
            return 1
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationError, FailedRunError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
