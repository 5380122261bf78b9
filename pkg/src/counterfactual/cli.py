"""Command-line front end.

Every subcommand builds a report ``{"inputs", "results", "meta"}`` and writes
it in the format chosen by ``--format``.  Output carries no timestamps and
JSON keys are sorted, so identical arguments give identical bytes.

Exit codes: 0 success, 2 invalid input, 3 history cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import histories, info, interfero, jozsa, noise, tables
from .zeno import ProtocolParams, TallyMode, Variant, parse_events, run_ideal, success_record

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 2, 3
OUT_DIR_ENV = "COUNTERFACTUAL_OUT_DIR"

TOLERANCES = {
    "probability_sum": 1e-10,
    "amplitude": 1e-12,
    "table_value": 5e-4,
    "mutual_information": tables.MI_TOL,
}


class ConfigError(ValueError):
    pass


def _pkg_version() -> str:
    try:
        return version("counterfactual")
    except PackageNotFoundError:
        return "unknown"


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _unit_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {v}")
    return v


def _bit(text: str) -> int:
    if text not in ("0", "1"):
        raise argparse.ArgumentTypeError(f"expected 0 or 1, got {text!r}")
    return int(text)


def _complex(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _state(state) -> list[dict]:
    return [{"label": str(lab), **_complex(amp)} for lab, amp in sorted(state.items())]


def _params(args) -> ProtocolParams:
    return ProtocolParams(args.n, args.nprime, x=args.output_bit, variant=args.variant,
                          epsilon=args.epsilon, tally=args.tally)


def _params_inputs(p: ProtocolParams) -> dict:
    return {"n": p.n, "nprime": p.nprime, "output_bit": p.x, "variant": p.variant.value,
            "epsilon": p.epsilon, "tally": p.tally.value}


# --------------------------------------------------------------------------
# commands

def cmd_tables(args) -> dict:
    t = tables.build(args.which)
    return {"inputs": {"which": args.which},
            "results": {"title": t.title, "rows": t.rows, "notes": t.notes},
            "meta": {"columns": t.columns}}


def cmd_simulate(args) -> dict:
    p = _params(args)
    meta = {}
    if p.epsilon > 0.0:
        r = noise.run_noisy(p, representation=args.representation)
        res = {"p_success_0": r.p_final[0], "p_success_1": r.p_final[1],
               "p_fail": 1.0 - r.p_m_given_x, "p_success": r.p_m_given_x,
               "p_final0_given_success": r.p_mi_given_m_x[0],
               "p_final1_given_success": r.p_mi_given_m_x[1]}
        meta["representation"] = r.representation
    else:
        r = run_ideal(p)
        res = r.as_dict()
        res["p_success"] = r.p_success_0 + r.p_success_1
        meta["representation"] = r.engine
    if args.shots:
        rng = np.random.default_rng(args.seed)
        probs = np.clip([res["p_success_0"], res["p_success_1"], res["p_fail"]], 0.0, None)
        counts = rng.multinomial(args.shots, probs / probs.sum())
        res["samples"] = {"success_0": int(counts[0]), "success_1": int(counts[1]),
                          "fail": int(counts[2])}
    inputs = _params_inputs(p)
    inputs.update(representation=args.representation, shots=args.shots, seed=args.seed)
    return {"inputs": inputs, "results": res, "meta": meta}


def cmd_histories(args) -> dict:
    p = _params(args)
    if p.epsilon != 0.0:
        raise ValueError("histories are defined for epsilon = 0")
    steps = args.routine_steps
    if steps is not None and steps > p.nprime:
        raise ValueError("routine steps exceed nprime")
    record = (success_record(p, steps) if args.record == "success"
              else parse_events(args.record or ""))
    if any(not e.is_real for e in record):
        raise ValueError("a record lists real outcomes only; f/n are hypothetical")
    inputs = _params_inputs(p)
    inputs.update(record=args.record, routine_steps=steps, cap=args.cap, final=args.final)
    if args.all_f:
        h = histories.all_f_history(p, final=p.x if args.final else None, routine_steps=steps)
        rows = [{"history": str(h), "norm2": h.norm2, "vector": _state(h.vector)}]
        return {"inputs": inputs, "results": {"rows": rows}, "meta": {"method": "all-f trajectory"}}
    hs = histories.enumerate_histories(p, record, cap=args.cap, routine_steps=steps,
                                       final=args.final)
    rows = [{"history": str(h), "norm2": h.norm2, "all_f": h.is_all_f,
             "vector": _state(h.vector)} for h in hs]
    res = {"rows": rows, "coherent_sum": _state(histories.coherent_sum(hs, record))}
    if record:
        ok, w = histories.is_counterfactual_outcome(p, record, cap=args.cap)
        res["counterfactual"] = {"result": ok, "condition1": w.condition1,
                                 "condition2": w.condition2,
                                 "offending": [str(h) for h in w.offending],
                                 "other_output_probability": w.other_output_probability}
    return {"inputs": inputs, "results": res, "meta": {"method": "enumeration",
                                                       "count": len(rows)}}


def cmd_weak(args) -> dict:
    if args.network == "nested":
        net = interfero.build_nested_interferometer(args.computer_output)
        paths = args.path or ["A", "B", "C", "E", "F"]
        rows = []
        for path in paths:
            wv = interfero.weak_value(net, path)
            row = {"path": path, "value": _complex(wv.value), "overlap": _complex(wv.overlap)}
            if args.delta is not None:
                pr = interfero.perturb_path(net, path, args.delta)
                row["perturbed_amplitude"] = _complex(pr.amplitude)
                row["predicted_amplitude"] = _complex(pr.predicted)
            rows.append(row)
        res = {"rows": rows,
               "detection_probability": abs(interfero.detector_amplitude(net)) ** 2}
        inputs = {"network": "nested", "computer_output": args.computer_output,
                  "paths": paths, "delta": args.delta}
    else:
        projectors = args.projector or list(jozsa.PROJECTORS)
        rows = []
        for proj in projectors:
            wv = jozsa.weak_value_at_computer(proj, args.placement)
            rows.append({"projector": proj, "value": _complex(wv.value),
                         "overlap": _complex(wv.overlap)})
        res = {"rows": rows}
        inputs = {"network": "two-qubit", "placement": args.placement, "projectors": projectors}
    return {"inputs": inputs, "results": res, "meta": {}}


def cmd_mi(args) -> dict:
    if args.method == "repeat":
        runs = args.runs if args.runs is not None else 2 * args.n * args.nprime
        r = info.mutual_information_repeat(runs, args.epsilon)
        return {"inputs": {"method": "repeat", "runs": runs, "epsilon": args.epsilon},
                "results": {"mi_bits": r.mi_bits, "partition": r.partition},
                "meta": {}}
    p = info.zeno_params(args.n, args.nprime, args.epsilon)
    r = info.mutual_information_zeno(p, args.partition)
    res = {"mi_bits": r.mi_bits, "partition": r.partition,
           "conditional": r.conditional}
    if args.target is not None:
        best, values = info.best_partition(p, args.target)
        res.update(best_partition=best, candidates=values,
                   discrepancy=abs(r.mi_bits - args.target) > tables.MI_TOL)
    return {"inputs": {"method": "zeno", "n": args.n, "nprime": args.nprime,
                       "epsilon": args.epsilon, "partition": args.partition,
                       "target": args.target},
            "results": res, "meta": {"representation": "density"}}


# --------------------------------------------------------------------------
# parsing

def _add_protocol(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=_positive_int, default=2, help="subroutine steps N")
    p.add_argument("--nprime", type=_positive_int, default=2, help="routine steps N'")
    p.add_argument("--output-bit", "--output", type=_bit, default=0, help="computer output x")
    p.add_argument("--epsilon", type=_unit_float, default=0.0)
    p.add_argument("--variant", choices=[v.value for v in Variant], default="standard")
    p.add_argument("--tally", choices=[t.value for t in TallyMode], default="none")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "text"], default="json")
    common.add_argument("--out", help=f"output file; relative paths use ${OUT_DIR_ENV}")
    common.add_argument("--config", help="key=value file supplying defaults for flags")

    parser = argparse.ArgumentParser(prog="counterfactual",
                                     description="Counterfactual computation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tables", parents=[common], help="recompute a reference table")
    t.add_argument("--which", type=int, choices=sorted(tables.BUILDERS), required=True)
    t.set_defaults(func=cmd_tables)

    s = sub.add_parser("simulate", parents=[common], help="success probabilities")
    _add_protocol(s)
    s.add_argument("--representation", choices=["density", "ensemble"], default="density")
    s.add_argument("--shots", type=int, default=0, help="also sample this many runs")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_simulate)

    h = sub.add_parser("histories", parents=[common], help="enumerate histories")
    _add_protocol(h)
    h.add_argument("--cap", type=_positive_int, default=histories.DEFAULT_CAP)
    h.add_argument("--record", default="",
                   help="real-outcome prefix such as 0_30_30_2, or 'success'")
    h.add_argument("--routine-steps", type=int, default=None)
    h.add_argument("--final", action="store_true", help="include the final q1 measurement")
    h.add_argument("--all-f", action="store_true", help="only the all-f trajectory")
    h.set_defaults(func=cmd_histories)

    w = sub.add_parser("weak", parents=[common], help="weak values")
    w.add_argument("--network", choices=["nested", "two-qubit"], default="nested")
    w.add_argument("--path", action="append", help="path name (repeatable)")
    w.add_argument("--computer-output", type=_bit, default=0)
    w.add_argument("--delta", type=float, default=None, help="phase perturbation")
    w.add_argument("--projector", action="append", choices=sorted(jozsa.PROJECTORS))
    w.add_argument("--placement", choices=list(jozsa.PLACEMENTS), default="before-computer")
    w.set_defaults(func=cmd_weak)

    m = sub.add_parser("mi", parents=[common], help="mutual information")
    m.add_argument("--method", choices=["repeat", "zeno"], default="zeno")
    m.add_argument("--n", type=_positive_int, default=2)
    m.add_argument("--nprime", type=_positive_int, default=2)
    m.add_argument("--runs", type=_positive_int, default=None)
    m.add_argument("--epsilon", type=_unit_float, default=0.2)
    m.add_argument("--partition", choices=list(info.PARTITIONS), default=info.PARTITIONS[0])
    m.add_argument("--target", type=float, default=None,
                   help="reference MI; reports the closest partition and flags a miss")
    m.set_defaults(func=cmd_mi)
    parser.commands = {"tables": t, "simulate": s, "histories": h, "weak": w, "mi": m}
    return parser


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment.  Keys use flag names."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    # config supplies defaults; flags given on the command line still win
    known = {a.dest: a for a in parser.commands[args.command]._actions}
    cfg = read_config(args.config)
    for key in cfg:
        if key not in known or key in ("config", "help", "func"):
            raise ConfigError(f"unknown config key {key!r} for {args.command}")
    cli_args = [str(cfg_flag) for k, v in cfg.items()
                for cfg_flag in _config_flags(known[k], v)]
    return parser.parse_args([args.command, *cli_args, *argv[1:]])


def _config_flags(action, value: str) -> list[str]:
    flag = action.option_strings[0]
    if action.nargs == 0:
        if value.lower() in ("1", "true", "yes"):
            return [flag]
        if value.lower() in ("0", "false", "no"):
            return []
        raise ConfigError(f"expected a boolean for {flag}, got {value!r}")
    return [flag, value]


# --------------------------------------------------------------------------
# output

def _clean(obj):
    """JSON-safe copy: tuples to lists, numpy scalars to Python, NaN to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def to_json(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


def _flat(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flat(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(_clean(v), sort_keys=True)
        else:
            out[key] = v
    return out


def _result_rows(report: dict) -> list[dict]:
    res = _clean(report["results"])
    if "rows" in res:
        return [_flat(r) for r in res["rows"]]
    return [_flat(res)]


def to_csv(report: dict) -> str:
    rows = _result_rows(report)
    cols: list[str] = []
    for r in rows:
        cols += [c for c in r if c not in cols]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def to_text(report: dict) -> str:
    lines = [f"# {k} = {v}" for k, v in sorted(_flat(_clean(report["inputs"])).items())]
    for i, row in enumerate(_result_rows(report)):
        if i:
            lines.append("")
        width = max(len(k) for k in row)
        lines += [f"{k:<{width}}  {v}" for k, v in row.items()]
    notes = report["results"].get("notes") or []
    lines += [f"note: {n}" for n in notes]
    return "\n".join(lines) + "\n"


FORMATTERS = {"json": to_json, "csv": to_csv, "text": to_text}


def run(argv) -> tuple[argparse.Namespace, dict]:
    """Parse ``argv`` and build the report without writing it."""
    args = parse_args(list(argv))
    report = args.func(args)
    report["meta"].update(command=args.command, version=_pkg_version(), tolerances=TOLERANCES)
    return args, report


def _destination(out: str) -> Path:
    path = Path(out)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, report = run(argv)
        text = FORMATTERS[args.format](report)
    except histories.CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, ZeroDivisionError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # argparse
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    if args.out:
        dest = _destination(args.out)
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
