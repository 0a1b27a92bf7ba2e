"""Command-line front end.

Characterization sweeps (idvg, idvd, cv, gummel), canned device
experiments (rram-iv, rram-tune, fg-pulse), the crossbar AND experiment,
MNIST macromodel training, netlist execution and the solver-variant
throughput benchmark.  Every subcommand writes exactly one CSV whose
commented header block records the resolved parameters, so a run can be
reconstructed from its own artifact.

Exit statuses: 0 success, 1 simulation failure, 2 usage/parse error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .bench import bench_model_eval
from .engine import (AnalysisSpec, ConvergenceError, NetlistError, SimResult,
                     TransientError, parse_netlist, run_analysis)
from .floatgate import FloatingGateParams, fg_read_current, program_pulse
from .mosfet import (ChargeSolveError, MosParams, drain_current,
                     gummel_current, terminal_charges_grid)
from .neuro import (MacromodelConfig, TrainConfig, find_mnist,
                    train_and_gate, train_and_gate_software, train_macromodel)
from .paramfile import (ParamError, apply_params, load_params,
                        parse_assignments, split_scopes)
from .rram import RramParams, hysteresis_loop, tuning_curve_1t1r

EXIT_OK, EXIT_SIM, EXIT_USAGE = 0, 1, 2

_SCOPES = ("mos", "rram", "fg", "train")


def _overrides(args) -> dict:
    mapping = {}
    if args.params:
        mapping.update(load_params(args.params))
    mapping.update(parse_assignments(args.set))
    return split_scopes(mapping, _SCOPES)


def _resolve(args, primary: str, defaults: dict) -> dict:
    """Apply scoped + unscoped overrides; unscoped keys go to `primary`."""
    scoped = _overrides(args)
    out = {}
    for name, obj in defaults.items():
        mapping = dict(scoped.get(name, {}))
        if name == primary:
            mapping = {**scoped[""], **mapping}
        out[name] = apply_params(obj, mapping)
    leftovers = [s for s in scoped if s and scoped[s] and s not in defaults]
    if leftovers:
        raise ParamError(f"scope(s) {leftovers} not used by this subcommand")
    return out


def _metadata(args, extras: dict, param_objs: dict) -> list:
    lines = [f"synapsim {__version__}", f"subcommand: {args.subcommand}"]
    for key in extras:
        lines.append(f"{key}: {extras[key]}")
    for scope in sorted(param_objs):
        obj = param_objs[scope]
        for f in dataclasses.fields(obj):
            lines.append(f"{scope}.{f.name}: {getattr(obj, f.name)!r}")
    return lines


def _write(args, columns, data, metadata, default_name) -> str:
    path = args.out or default_name
    res = SimResult(columns=list(columns), data=np.atleast_2d(np.asarray(data, float)),
                    metadata=metadata)
    res.to_csv(path)
    print(f"wrote {path} ({res.data.shape[0]} rows)")
    return path


def _chunked(worker, payloads, jobs):
    """Order-preserving map, optionally across processes."""
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(worker, payloads))
    return [worker(p) for p in payloads]


def _split_grid(grid, jobs):
    parts = np.array_split(grid, max(jobs or 1, 1))
    return [part for part in parts if part.size]


def _float_list(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ParamError(f"bad numeric list {text!r}") from exc


# ---------------------------------------------------------------- sweeps

def _idvg_chunk(payload):
    p, v_g, vds_list, method = payload
    cols = [drain_current(p, v_g, v_ds, method=method) for v_ds in vds_list]
    return np.column_stack([v_g] + cols)


def cmd_idvg(args) -> int:
    objs = _resolve(args, "mos", {"mos": MosParams()})
    p = objs["mos"]
    vds_list = _float_list(args.vds)
    v_g = np.linspace(args.start, args.stop, args.points)
    payloads = [(p, chunk, vds_list, args.method)
                for chunk in _split_grid(v_g, args.jobs)]
    data = np.vstack(_chunked(_idvg_chunk, payloads, args.jobs))
    cols = ["v_g"] + [f"i_d_vds{v:g}" for v in vds_list]
    meta = _metadata(args, {"method": args.method, "v_ds": args.vds,
                            "sweep": f"v_g {args.start} {args.stop} {args.points}"},
                     objs)
    _write(args, cols, data, meta, "idvg.csv")
    return EXIT_OK


def _idvd_chunk(payload):
    p, v_ds, vg_list, method = payload
    cols = [drain_current(p, v_g, v_ds, method=method) for v_g in vg_list]
    return np.column_stack([v_ds] + cols)


def cmd_idvd(args) -> int:
    objs = _resolve(args, "mos", {"mos": MosParams()})
    p = objs["mos"]
    vg_list = _float_list(args.vg)
    v_ds = np.linspace(args.start, args.stop, args.points)
    payloads = [(p, chunk, vg_list, args.method)
                for chunk in _split_grid(v_ds, args.jobs)]
    data = np.vstack(_chunked(_idvd_chunk, payloads, args.jobs))
    cols = ["v_ds"] + [f"i_d_vg{v:g}" for v in vg_list]
    meta = _metadata(args, {"method": args.method, "v_g": args.vg,
                            "sweep": f"v_ds {args.start} {args.stop} {args.points}"},
                     objs)
    _write(args, cols, data, meta, "idvd.csv")
    return EXIT_OK


def _cv_chunk(payload):
    p, v_g, v_ds, method = payload
    tc = terminal_charges_grid(p, v_g, np.full_like(v_g, v_ds), method=method)
    return np.column_stack([v_g, tc.q_g, tc.q_s, tc.q_d, tc.q_bulk])


def cmd_cv(args) -> int:
    objs = _resolve(args, "mos", {"mos": MosParams()})
    p = objs["mos"]
    v_g = np.linspace(args.start, args.stop, args.points)
    payloads = [(p, chunk, args.vds, args.method)
                for chunk in _split_grid(v_g, args.jobs)]
    data = np.vstack(_chunked(_cv_chunk, payloads, args.jobs))
    c_gg = np.gradient(data[:, 1], v_g)
    data = np.column_stack([data, c_gg])
    cols = ["v_g", "q_g", "q_s", "q_d", "q_bulk", "c_gg"]
    meta = _metadata(args, {"method": args.method, "v_ds": args.vds,
                            "sweep": f"v_g {args.start} {args.stop} {args.points}",
                            "c_gg": "central differences of q_g on the sweep grid"},
                     objs)
    _write(args, cols, data, meta, "cv.csv")
    return EXIT_OK


def _gummel_chunk(payload):
    p, v_g, chunk, method = payload
    return np.array([gummel_current(p, v_g, float(v_x), method=method)
                     for v_x in chunk])


def cmd_gummel(args) -> int:
    objs = _resolve(args, "mos", {"mos": MosParams()})
    p = objs["mos"]
    v_x = np.linspace(-args.span, args.span, args.points)
    payloads = [(p, args.vg, chunk, args.method)
                for chunk in _split_grid(v_x, args.jobs)]
    i = np.concatenate(_chunked(_gummel_chunk, payloads, args.jobs))
    d1 = np.gradient(i, v_x)
    d2 = np.gradient(d1, v_x)
    d3 = np.gradient(d2, v_x)
    meta = _metadata(args, {"method": args.method, "v_g": args.vg,
                            "sweep": f"v_x -{args.span} {args.span} {args.points}",
                            "derivatives": "repeated central differences"},
                     objs)
    _write(args, ["v_x", "i", "di1", "di2", "di3"],
           np.column_stack([v_x, i, d1, d2, d3]), meta, "gummel.csv")
    return EXIT_OK


# ------------------------------------------------------- device experiments

def cmd_rram_iv(args) -> int:
    objs = _resolve(args, "rram", {"rram": RramParams()})
    p = objs["rram"]
    v, i, x = hysteresis_loop(p, v_peak=args.v_peak, period=args.period,
                              tstep=args.tstep)
    t = np.arange(v.size) * args.tstep
    meta = _metadata(args, {"v_peak": args.v_peak, "period": args.period,
                            "tstep": args.tstep}, objs)
    _write(args, ["t", "v", "i", "x"], np.column_stack([t, v, i, x]),
           meta, "rram_iv.csv")
    return EXIT_OK


def cmd_rram_tune(args) -> int:
    objs = _resolve(args, "rram", {"rram": RramParams(), "mos": MosParams()})
    v_pgm = np.linspace(args.vpgm_start, args.vpgm_stop, args.vpgm_points)
    x, i_read = tuning_curve_1t1r(objs["rram"], objs["mos"], v_pgm,
                                  v_set=args.v_set, v_read=args.v_read,
                                  width=args.width)
    meta = _metadata(args, {"v_set": args.v_set, "v_read": args.v_read,
                            "width": args.width}, objs)
    _write(args, ["v_pgm", "x", "i_read"], np.column_stack([v_pgm, x, i_read]),
           meta, "rram_tune.csv")
    return EXIT_OK


def cmd_fg_pulse(args) -> int:
    objs = _resolve(args, "fg", {"fg": FloatingGateParams()})
    p = objs["fg"]
    q_fg = 0.0
    rows = [(0, 0, 0.0, q_fg,
             fg_read_current(p, q_fg, v_read=args.v_read, v_sg=args.v_sg))]
    schedule = [("pfb", args.amp_strengthen)] * args.strengthen \
        + [("nfb", args.amp_weaken)] * args.weaken
    for k, (terminal, amp) in enumerate(schedule, 1):
        res = program_pulse(p, q_fg, terminal, amp, args.width,
                            v_read=args.v_read, v_sg=args.v_sg)
        q_fg = res.q_fg
        rows.append((k, 1 if terminal == "pfb" else 0, amp, q_fg, res.i_after))
    meta = _metadata(args, {"width": args.width, "v_read": args.v_read,
                            "v_sg": args.v_sg,
                            "pfb_column": "1 strengthen pulse, 0 weaken pulse"},
                     objs)
    _write(args, ["pulse", "pfb", "amplitude", "q_fg", "i_read"],
           np.array(rows, float), meta, "fg_pulse.csv")
    return EXIT_OK


# ----------------------------------------------------------- experiments

def cmd_crossbar_and(args) -> int:
    objs = _resolve(args, "train", {"train": TrainConfig(), "rram": RramParams()})
    cfg, p = objs["train"], objs["rram"]
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    device = train_and_gate(cfg=cfg, params=p)
    software = train_and_gate_software(params=p, cfg=cfg)
    patterns = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], float)
    targets = np.array([0, 0, 0, 1], float)
    data = np.column_stack([
        patterns, targets,
        device.activations, (device.activations > cfg.threshold).astype(float),
        software.activations, (software.activations > cfg.threshold).astype(float),
    ])
    meta = _metadata(args, {
        "device_epochs": device.epochs_used,
        "device_correct": device.n_correct,
        "software_epochs": software.epochs_used,
        "software_correct": software.n_correct,
        "device_weights": np.array2string(device.weights, precision=6),
        "software_weights": np.array2string(software.weights, precision=6),
    }, objs)
    _write(args, ["a", "b", "target", "act_dev", "pred_dev", "act_sw", "pred_sw"],
           data, meta, "crossbar_and.csv")
    if not (device.success and software.success):
        print("AND training did not reach 4/4", file=sys.stderr)
        return EXIT_SIM
    return EXIT_OK


def cmd_mnist_train(args) -> int:
    objs = _resolve(args, "train", {"train": MacromodelConfig()})
    cfg = objs["train"]
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    located = find_mnist(args.data_dir)
    if located is None:
        print("mnist-train: no IDX files found (use --data-dir or "
              "SYNAPSIM_MNIST_DIR)", file=sys.stderr)
        return EXIT_SIM
    train, test = located
    report = train_macromodel(cfg, train, test)
    epochs = np.arange(1, len(report.epoch_loss) + 1)
    data = np.column_stack([epochs, report.epoch_loss,
                            report.epoch_train_acc, report.epoch_test_acc])
    meta = _metadata(args, {"mode": report.mode,
                            "final_test_acc": report.final_test_acc}, objs)
    for row in report.confusion:
        meta.append("confusion: " + " ".join(str(int(v)) for v in row))
    _write(args, ["epoch", "loss", "train_acc", "test_acc"], data, meta,
           "mnist_train.csv")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        with open(args.netlist) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"run: cannot read netlist: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parsed = parse_netlist(text)
    for warning in parsed.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if not parsed.analyses:
        print("run: netlist has no analysis card", file=sys.stderr)
        return EXIT_USAGE
    result = None
    for spec in parsed.analyses:
        result = run_analysis(parsed.circuit, spec)
    head = [f"synapsim {__version__}", f"subcommand: run",
            f"netlist: {args.netlist}",
            f"analyses: {', '.join(s.kind for s in parsed.analyses)}"]
    result.metadata = head + result.metadata
    path = args.out or "run.csv"
    result.to_csv(path)
    print(f"wrote {path} ({result.data.shape[0]} rows)")
    return EXIT_OK


def cmd_bench(args) -> int:
    objs = _resolve(args, "mos", {"mos": MosParams()})
    try:
        r = bench_model_eval(objs["mos"], n=args.n, reps=args.reps,
                             seed=args.seed if args.seed is not None else 0)
    except ValueError as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    row = [r.n, r.reps,
           r.solver_s["reference"], r.solver_s["householder"],
           r.eval_s["reference"], r.eval_s["householder"],
           r.evals_per_s["reference"], r.evals_per_s["householder"],
           r.solver_ratio, r.eval_ratio,
           r.eval_spread["reference"], r.eval_spread["householder"]]
    cols = ["n", "reps", "solver_s_ref", "solver_s_hh", "eval_s_ref",
            "eval_s_hh", "evals_per_s_ref", "evals_per_s_hh",
            "solver_ratio", "eval_ratio", "eval_spread_ref", "eval_spread_hh"]
    meta = _metadata(args, {
        "grid": "v_g uniform [-0.5, 1.5], v_ds uniform [0, 1]",
        "timed": "charge solves (solver stage) + shared I_d/terminal-charge stage",
        "stat": f"median of {r.reps} repetitions after one warm-up pass",
    }, objs)
    _write(args, cols, [row], meta, "bench.csv")
    print(f"solver ratio reference/householder: {r.solver_ratio:.1f}x")
    print(f"complete-eval ratio reference/householder: {r.eval_ratio:.2f}x")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _common(sub):
    sub.add_argument("--params", help="key=value parameter file")
    sub.add_argument("--out", help="output CSV path")
    sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override one parameter (repeatable)")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--jobs", type=int, default=1,
                     help="parallel sweep chunks (deterministic ordering)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synapsim",
        description="Device-model characterization and crossbar experiments")
    parser.add_argument("--version", action="version",
                        version=f"synapsim {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sp = subs.add_parser("idvg", help="transfer sweep I_d(V_g)")
    _common(sp)
    sp.add_argument("--start", type=float, default=-0.5)
    sp.add_argument("--stop", type=float, default=1.5)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--vds", default="0.05,1.0", help="comma list of V_ds")
    sp.add_argument("--method", choices=["householder", "reference"],
                    default="householder")
    sp.set_defaults(func=cmd_idvg)

    sp = subs.add_parser("idvd", help="output sweep I_d(V_ds)")
    _common(sp)
    sp.add_argument("--start", type=float, default=0.0)
    sp.add_argument("--stop", type=float, default=1.0)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--vg", default="0.6,0.8,1.0,1.2", help="comma list of V_g")
    sp.add_argument("--method", choices=["householder", "reference"],
                    default="householder")
    sp.set_defaults(func=cmd_idvd)

    sp = subs.add_parser("cv", help="quasi-static terminal charges vs V_g")
    _common(sp)
    sp.add_argument("--start", type=float, default=-0.5)
    sp.add_argument("--stop", type=float, default=1.5)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--vds", type=float, default=0.0)
    sp.add_argument("--method", choices=["householder", "reference"],
                    default="householder")
    sp.set_defaults(func=cmd_cv)

    sp = subs.add_parser("gummel", help="symmetry sweep I(V_x) and derivatives")
    _common(sp)
    sp.add_argument("--vg", type=float, default=1.0)
    sp.add_argument("--span", type=float, default=0.1)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--method", choices=["householder", "reference"],
                    default="householder")
    sp.set_defaults(func=cmd_gummel)

    sp = subs.add_parser("rram-iv", help="bipolar hysteresis loop")
    _common(sp)
    sp.add_argument("--v-peak", type=float, default=1.2)
    sp.add_argument("--period", type=float, default=1e-3)
    sp.add_argument("--tstep", type=float, default=1e-6)
    sp.set_defaults(func=cmd_rram_iv)

    sp = subs.add_parser("rram-tune", help="1T1R compliance tuning curve")
    _common(sp)
    sp.add_argument("--vpgm-start", type=float, default=0.25)
    sp.add_argument("--vpgm-stop", type=float, default=1.4)
    sp.add_argument("--vpgm-points", type=int, default=16)
    sp.add_argument("--v-set", type=float, default=1.0)
    sp.add_argument("--v-read", type=float, default=0.1)
    sp.add_argument("--width", type=float, default=10e-6)
    sp.set_defaults(func=cmd_rram_tune)

    sp = subs.add_parser("fg-pulse", help="floating-gate program/read sequence")
    _common(sp)
    sp.add_argument("--strengthen", type=int, default=5)
    sp.add_argument("--weaken", type=int, default=5)
    sp.add_argument("--amp-strengthen", type=float, default=4.5)
    sp.add_argument("--amp-weaken", type=float, default=-3.1)
    sp.add_argument("--width", type=float, default=100e-6)
    sp.add_argument("--v-read", type=float, default=0.6)
    sp.add_argument("--v-sg", type=float, default=1.0)
    sp.set_defaults(func=cmd_fg_pulse)

    sp = subs.add_parser("crossbar-and", help="device-in-the-loop AND training")
    _common(sp)
    sp.set_defaults(func=cmd_crossbar_and)

    sp = subs.add_parser("mnist-train", help="macromodel MLP on MNIST IDX data")
    _common(sp)
    sp.add_argument("--data-dir", help="directory with the four IDX files")
    sp.set_defaults(func=cmd_mnist_train)

    sp = subs.add_parser("run", help="parse and run a netlist")
    _common(sp)
    sp.add_argument("netlist", help="netlist file path")
    sp.set_defaults(func=cmd_run)

    sp = subs.add_parser("bench", help="solver-variant throughput benchmark")
    _common(sp)
    sp.add_argument("--n", type=int, default=100_000)
    sp.add_argument("--reps", type=int, default=5)
    sp.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NetlistError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, TransientError, ChargeSolveError) as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIM
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
