"""Command-line harness.

Subcommands map onto the library layers: `analyze` sweeps the closed
forms, `stability` sweeps pole distances, `tables` reproduces the two
operating-point tables next to their reference values, `design` prints
the adopted operating points and tuned window sizes, `baseline` sweeps
the standard-backoff fixed point, and `simulate` drives the slotted
simulator from a scenario file.

Artifacts are CSV (one per command) written to stdout or, with --out,
into a directory under a fixed name. Floats are emitted with repr
precision so re-reading a CSV reproduces the values bit-identically.
Exit codes: 0 success, 1 analysis failure, 2 validation/usage error.
"""

import argparse
import csv
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__, config as config_mod, design, legacy, model
from . import sim as sim_mod
from .abtmac import AbtmacParams, cw_min, per_class_delay, qos_rates
from .errors import AnalysisError, MaclabError, ValidationError
from .model import ModelPoint
from .sim import RNG_ALGORITHM
from .timing import AccessMode, DEFAULT_TIMING, derive_slot_durations

# reference operating-point tables (delay and payload in slots,
# throughput in percent, ratio bounds dimensionless)
TABLE2_REFERENCE = {
    0.1: {"access_delay": 12.06, "max_ratio": 1.25, "min_ratio": 0.83},
    0.4: {"access_delay": 9.09, "max_ratio": 3.0, "min_ratio": 0.85},
    0.5: {"access_delay": 10.39, "max_ratio": 4.5, "min_ratio": 0.89},
    0.7: {"access_delay": 13.81, "max_ratio": 9.6, "min_ratio": 0.92},
    1.0: {"access_delay": 20.08, "max_ratio": 13.8, "min_ratio": 0.97},
}
TABLE3_REFERENCE = {
    0.31: {"payload": 58, "access_delay": 16.84, "throughput_pct": 70.34,
           "max_ratio": 4.81, "min_ratio": 0.88},
    0.45: {"payload": 40, "access_delay": 18.11, "throughput_pct": 61.10,
           "max_ratio": 7.90, "min_ratio": 0.90},
    0.55: {"payload": 34, "access_delay": 19.82, "throughput_pct": 55.76,
           "max_ratio": 11.00, "min_ratio": 0.91},
    0.6: {"payload": 32, "access_delay": 20.87, "throughput_pct": 53.41,
          "max_ratio": 12.50, "min_ratio": 0.92},
    0.7: {"payload": 29, "access_delay": 23.49, "throughput_pct": 48.89,
          "max_ratio": 16.80, "min_ratio": 0.92},
}


def _parse_range(text):
    """start:stop:step inclusive grid, or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ValidationError(
            f"range must be 'start:stop:step' or a single number, got {text!r}"
        ) from None
    if step <= 0 or stop < start:
        raise ValidationError(f"range {text!r} is empty or has non-positive step")
    count = int(round((stop - start) / step))
    return [start + i * step for i in range(count + 1)]


def _parse_list(text, cast=float):
    try:
        return [cast(p) for p in text.split(",") if p]
    except ValueError:
        raise ValidationError(f"bad list value {text!r}") from None


def _mode(name):
    try:
        return AccessMode(name)
    except ValueError:
        raise ValidationError(f"unknown access mode {name!r}") from None


def _timing(args):
    if getattr(args, "timing_config", None):
        return config_mod.timing_from_config(config_mod.read_config(args.timing_config))
    return DEFAULT_TIMING


def _slot_us(args, timing):
    return timing.slot * 1e6 if args.units == "us" else 1.0


def _write_rows(args, filename, header, rows):
    """CSV to --out/<filename> or stdout. Values formatted via repr."""

    def fmt(v):
        return repr(v) if isinstance(v, float) else v

    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, filename)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows([fmt(v) for v in row] for row in rows)
        print(path)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows([fmt(v) for v in row] for row in rows)


def _map_cells(fn, cells, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, cells))    # map preserves cell order
    return [fn(c) for c in cells]


# ---------------------------------------------------------------- analyze

def _analyze_cell(cell):
    rate, payload, mode_value, timing = cell
    d = derive_slot_durations(timing)
    pt = ModelPoint(rate, payload, AccessMode(mode_value))
    m = model.evaluate(pt, d)
    return (rate, payload, m.mean_collisions, m.collision_period,
            m.service_time, m.idle_gap, m.throughput, m.access_delay,
            m.overhead)

_ANALYZE_HEADER = ("rate", "payload", "mean_collisions", "collision_period",
                   "service_time", "idle_gap", "throughput", "access_delay",
                   "overhead")
_ANALYZE_SLOT_COLS = (3, 4, 5, 7, 8)


def _cmd_analyze(args):
    timing = _timing(args)
    rates = _parse_range(args.rates)
    cells = [(r, args.payload, args.mode, timing) for r in rates]
    rows = _map_cells(_analyze_cell, cells, args.workers)
    scale = _slot_us(args, timing)
    if scale != 1.0:
        rows = [tuple(v * scale if i in _ANALYZE_SLOT_COLS else v
                      for i, v in enumerate(row)) for row in rows]
    _write_rows(args, "analyze.csv", _ANALYZE_HEADER, rows)
    return 0


# ---------------------------------------------------------------- stability

def _stability_cell(cell):
    rate, payload, mode_value, timing = cell
    d = derive_slot_durations(timing)
    if payload is None:
        payload = design.optimal_payload(rate, d)
    pt = ModelPoint(rate, payload, AccessMode(mode_value))
    return (rate, payload, design.dominant_pole_distance(pt, d))


def _cmd_stability(args):
    timing = _timing(args)
    rates = _parse_range(args.rates)
    payloads = _parse_list(args.payloads) if args.payloads else [None]
    cells = [(r, p, args.mode, timing) for p in payloads for r in rates]
    rows = _map_cells(_stability_cell, cells, args.workers)
    _write_rows(args, "stability.csv", ("rate", "payload", "pole_distance"), rows)
    return 0


# ---------------------------------------------------------------- tables

def _cmd_tables(args):
    timing = _timing(args)
    d = derive_slot_durations(timing)
    scale = _slot_us(args, timing)
    rows = []
    if args.table == 2:
        header = ("rate", "access_delay", "max_ratio", "min_ratio",
                  "ref_access_delay", "ref_max_ratio", "ref_min_ratio",
                  "delta_access_delay", "delta_max_ratio", "delta_min_ratio")
        for rate, ref in TABLE2_REFERENCE.items():
            pt = ModelPoint(rate, 34.0, AccessMode.RTS_CTS)
            delay = model.mean_access_delay(pt, d)
            bounds = design.tolerable_ratio_bounds(pt, 0.10, d)
            rows.append((rate, delay * scale, bounds.max_ratio, bounds.min_ratio,
                         ref["access_delay"] * scale, ref["max_ratio"],
                         ref["min_ratio"],
                         (delay - ref["access_delay"]) * scale,
                         bounds.max_ratio - ref["max_ratio"],
                         bounds.min_ratio - ref["min_ratio"]))
        _write_rows(args, "table2.csv", header, rows)
        return 0
    header = ("rate", "balance_payload", "payload", "access_delay",
              "delay_payload_ratio_pct", "throughput_pct", "max_ratio",
              "min_ratio", "ref_payload", "ref_access_delay",
              "ref_throughput_pct", "ref_max_ratio", "ref_min_ratio",
              "delta_payload", "delta_access_delay", "delta_throughput_pct")
    for rate, ref in TABLE3_REFERENCE.items():
        balance = design.optimal_payload(rate, d)
        # delay and throughput are evaluated at the reference whole-slot
        # payload so the comparison columns line up
        pt = ModelPoint(rate, float(ref["payload"]), AccessMode.BASIC)
        delay = model.mean_access_delay(pt, d)
        tp = model.throughput(pt, d) * 100.0
        bounds = design.tolerable_ratio_bounds(pt, 0.10, d)
        rows.append((rate, balance, ref["payload"], delay * scale,
                     delay / ref["payload"] * 100.0, tp,
                     bounds.max_ratio, bounds.min_ratio,
                     ref["payload"], ref["access_delay"] * scale,
                     ref["throughput_pct"], ref["max_ratio"], ref["min_ratio"],
                     balance - ref["payload"],
                     (delay - ref["access_delay"]) * scale,
                     tp - ref["throughput_pct"]))
    _write_rows(args, "table3.csv", header, rows)
    return 0


# ---------------------------------------------------------------- design

def _cmd_design(args):
    timing = _timing(args)
    d = derive_slot_durations(timing)
    mode = _mode(args.mode)
    rate, payload = design.recommended_rate(mode)
    if args.target_rate is not None:
        rate = args.target_rate
        payload = design.optimal_payload(rate, d) if mode is AccessMode.BASIC else None
    lines = [f"mode: {mode.value}", f"attempt_rate: {rate}"]
    if payload is not None:
        lines.append(f"payload_slots: {round(payload)}")
    params = AbtmacParams(target_rate=rate)
    for m in _parse_list(args.stations, int):
        lines.append(f"cw_min[M={m}]: {cw_min(params, m)}")
    if args.qos:
        classes = config_mod.qos_from_config(config_mod.read_config(args.qos))
        m_total = sum(c.station_count for c in classes)
        n_bar = model.mean_collisions(rate)
        scale = _slot_us(args, timing)
        for cid, class_rate in qos_rates(rate, m_total, classes).items():
            delay = per_class_delay(class_rate, payload, mode, n_bar, d)
            lines.append(f"qos[{cid}]: rate {class_rate} "
                         f"delay {delay * scale}")
    text = "\n".join(lines) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "design.txt")
        with open(path, "w") as fh:
            fh.write(text)
        print(path)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------- baseline

def _baseline_cell(cell):
    m, payload, cw_lo, cw_hi, retry, timing = cell
    d = derive_slot_durations(timing)
    params = legacy.DcfParams(cw_min=cw_lo, cw_max=cw_hi, retry_limit=retry)
    rate = legacy.legacy_attempt_rate(m, params)
    out = []
    for mode in (AccessMode.BASIC, AccessMode.RTS_CTS):
        pt = ModelPoint(rate, payload, mode)
        out.append((m, mode.value, rate, model.throughput(pt, d),
                    model.mean_access_delay(pt, d)))
    return out


def _cmd_baseline(args):
    timing = _timing(args)
    stations = [int(x) for x in _parse_range(args.stations)]
    cells = [(m, args.payload, args.cw_min, args.cw_max, args.retry_limit, timing)
             for m in stations]
    nested = _map_cells(_baseline_cell, cells, args.workers)
    scale = _slot_us(args, timing)
    rows = [(m, mode, rate, tp, delay * scale)
            for cell in nested for (m, mode, rate, tp, delay) in cell]
    _write_rows(args, "baseline.csv",
                ("stations", "mode", "rate", "throughput", "access_delay"), rows)
    return 0


# ---------------------------------------------------------------- simulate

def _cmd_simulate(args):
    cfg = config_mod.load_scenario(args.scenario)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.duration is not None:
        overrides["duration"] = args.duration
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    timing = cfg.timing
    scale = _slot_us(args, timing)

    if args.m_ratios or args.sweep_payloads:
        rows = sim_mod.sensitivity_suite(
            cfg,
            m_estimates=_parse_list(args.m_ratios) if args.m_ratios else (),
            payloads=_parse_list(args.sweep_payloads) if args.sweep_payloads else ())
        table = [(r["kind"], r["value"], r["normalized_throughput"],
                  r["throughput_bps"], r["mean_access_delay"] * scale,
                  r["final_cw_min"]) for r in rows]
        _write_rows(args, "sensitivity.csv",
                    ("kind", "value", "normalized_throughput", "throughput_bps",
                     "mean_access_delay", "final_cw_min"), table)
        return 0

    if args.replications > 1:
        if args.trace:
            raise ValidationError("event tracing applies to single runs only")
        summary = sim_mod.run_replicated(cfg, args.replications)
        header = ["metric", "mean", "ci95_half_width"]
        rows = []
        for name in summary.mean:
            factor = scale if name == "mean_access_delay" else 1.0
            rows.append((name, summary.mean[name] * factor,
                         summary.half_width[name] * factor))
        _write_rows(args, "replications.csv", header, rows)
        return 0

    trace_fh = None
    trace = None
    if args.trace:
        parent = os.path.dirname(args.trace)
        if parent:
            os.makedirs(parent, exist_ok=True)
        trace_fh = open(args.trace, "w")
        def trace(event):
            trace_fh.write(json.dumps(event) + "\n")
    try:
        metrics = sim_mod.run(cfg, trace=trace)
    finally:
        if trace_fh:
            trace_fh.close()
    doc = dataclasses.asdict(metrics)
    doc["mean_access_delay"] *= scale
    doc["per_station_success"] = ";".join(str(v) for v in doc["per_station_success"])
    _write_rows(args, "metrics.csv", tuple(doc), (tuple(doc.values()),))
    return 0


# ---------------------------------------------------------------- plumbing

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="maclab",
        description="Contention-MAC laboratory: closed-form model, window "
                    "tuning, and slotted simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="override the random seed where one applies")
        p.add_argument("--out", default=None,
                       help="directory for artifacts (default: stdout)")
        p.add_argument("--timing-config", default=None,
                       help="INI file with a [timing] section")
        p.add_argument("--units", choices=("slots", "us"), default="slots",
                       help="unit for delay outputs")
        p.add_argument("--workers", type=int, default=1,
                       help="worker processes for sweep cells")

    p = sub.add_parser("analyze", help="closed-form metric sweep over attempt rate")
    p.add_argument("--mode", choices=("basic", "rts"), required=True)
    p.add_argument("--lambda", dest="rates", required=True,
                   help="attempt-rate grid start:stop:step")
    p.add_argument("--payload", type=float, default=34.0)
    common(p)

    p = sub.add_parser("stability", help="dominant-pole distance sweep")
    p.add_argument("--mode", choices=("basic", "rts"), required=True)
    p.add_argument("--lambda", dest="rates", required=True)
    p.add_argument("--payloads", default=None,
                   help="comma list of payloads; default: balance payload per rate")
    common(p)

    p = sub.add_parser("tables", help="operating-point tables with references")
    p.add_argument("--table", type=int, choices=(2, 3), required=True)
    common(p)

    p = sub.add_parser("design", help="recommended operating point and windows")
    p.add_argument("--mode", choices=("basic", "rts"), required=True)
    p.add_argument("--stations", default="100",
                   help="comma list of station counts for window sizing")
    p.add_argument("--target-rate", type=float, default=None,
                   help="override the adopted attempt rate")
    p.add_argument("--qos", default=None,
                   help="config file with a [qos] section to split rates over")
    common(p)

    p = sub.add_parser("baseline", help="standard-backoff fixed-point sweep")
    p.add_argument("--m", dest="stations", required=True,
                   help="station-count grid start:stop:step")
    p.add_argument("--payload", type=float, default=34.0)
    p.add_argument("--cw-min", type=int, default=32)
    p.add_argument("--cw-max", type=int, default=1024)
    p.add_argument("--retry-limit", type=int, default=7)
    common(p)

    p = sub.add_parser("simulate", help="run the slotted simulator")
    p.add_argument("--scenario", required=True, help="scenario INI file")
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--duration", type=int, default=None,
                   help="override scenario duration (slots)")
    p.add_argument("--trace", default=None,
                   help="write a JSON-lines event trace to this file")
    p.add_argument("--m-ratios", default=None,
                   help="sensitivity: comma list of assumed/true node ratios")
    p.add_argument("--sweep-payloads", default=None,
                   help="sensitivity: comma list of payloads (slots)")
    common(p)

    p = sub.add_parser("version", help="print version and RNG identifier")
    common(p)
    return parser


_HANDLERS = {
    "analyze": _cmd_analyze,
    "stability": _cmd_stability,
    "tables": _cmd_tables,
    "design": _cmd_design,
    "baseline": _cmd_baseline,
    "simulate": _cmd_simulate,
}


def execute(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    if args.command == "version":
        print(f"maclab {__version__} (rng: {RNG_ALGORITHM})")
        return 0
    try:
        return _HANDLERS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AnalysisError as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return 1
    except MaclabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(execute(sys.argv[1:]))


if __name__ == "__main__":
    main()
