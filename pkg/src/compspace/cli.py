"""Command-line interface: ``compspace <command> ...``.

Values come from flags, then from ``--config FILE`` (JSON object whose
keys are the long flag names with ``-`` replaced by ``_``), then from
built-in defaults. Every file written is accompanied by
``<file>.meta.json`` holding the resolved configuration and its hash.

Exit codes: 0 ok, 2 usage, 3 not in support, 4 dimension/consistency,
5 I/O.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import aid, bdm, ctm, render, runner, tables
from .enumeration import IndexRange, UnsupportedSpaceError, space_size
from .machine import Dimension, Halt, MachineSpace, decode_rule

EXIT_USAGE = 2
EXIT_SUPPORT = 3
EXIT_DIMENSION = 4
EXIT_IO = 5


class UsageError(Exception):
    pass


# -- configuration --------------------------------------------------------------


def config_hash(config: dict) -> str:
    # thread count never changes results, so it stays out of the hash
    config = {k: v for k, v in config.items() if k != "threads"}
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _resolved(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")}


def _load_config(args: argparse.Namespace, parser: argparse.ArgumentParser, defaults: dict):
    file_values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_values = json.load(fh)
        except OSError as e:
            raise OSError(f"cannot read config {args.config!r}: {e.strerror}") from e
        except json.JSONDecodeError as e:
            raise UsageError(f"config {args.config!r} is not valid JSON: {e}") from e
        if not isinstance(file_values, dict):
            raise UsageError("config file must hold a JSON object")
    known = set(defaults)
    unknown = sorted(set(file_values) - known)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    for key, default in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, file_values.get(key, default))


def _write_meta(path: str, args: argparse.Namespace, **extra):
    config = _resolved(args)
    meta = {"config": config, "config_hash": config_hash(config), **extra}
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")


def _space(args) -> MachineSpace:
    try:
        return MachineSpace(args.states, args.symbols, Dimension(args.dim))
    except ValueError as e:
        raise UsageError(str(e)) from e


def _range(args, space: MachineSpace) -> IndexRange:
    end = space_size(space) if args.end is None else args.end
    r = IndexRange(args.start, end)
    try:
        return r.check(space)
    except IndexError as e:
        raise UsageError(str(e)) from e


def _budget(args, space) -> int:
    budget = runner.default_budget(space) if args.budget is None else args.budget
    if budget < 1:
        raise UsageError(f"budget must be >= 1, got {budget}")
    return budget


def _threads(args) -> int:
    import numba

    if args.threads < 1:
        raise UsageError(f"threads must be >= 1, got {args.threads}")
    numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    return args.threads


def _table(name_or_path: str) -> ctm.CTMTable:
    if name_or_path in tables.RECIPES:
        return tables.load(name_or_path)
    directory = os.environ.get(tables.TABLE_DIR_ENV)
    if directory and not os.path.exists(name_or_path):
        candidate = os.path.join(directory, name_or_path)
        if os.path.exists(candidate):
            name_or_path = candidate
    try:
        return ctm.load_table(name_or_path)
    except OSError as e:
        raise OSError(f"cannot read table {name_or_path!r}: {e.strerror}") from e


def read_grid(path: str) -> np.ndarray | str:
    """Rows of digits. A single row is returned as a string (1D input)."""
    try:
        with open(path, encoding="utf-8") as fh:
            rows = [line.strip() for line in fh if line.strip()]
    except OSError as e:
        raise OSError(f"cannot read {path!r}: {e.strerror}") from e
    if not rows or any(not r.isdigit() for r in rows):
        raise UsageError(f"{path}: expected rows of digits")
    if len(rows) == 1:
        return rows[0]
    if len({len(r) for r in rows}) != 1:
        raise bdm.DimensionError(f"{path}: rows have unequal lengths")
    return np.array([[int(c) for c in r] for r in rows], dtype=np.uint8)


def format_grid(grid) -> str:
    return "".join("".join(str(int(v)) for v in row) + "\n" for row in np.asarray(grid))


# -- commands ---------------------------------------------------------------------

SPACE_DEFAULTS = {"states": 2, "symbols": 2, "dim": 1, "start": 0, "end": None, "budget": None, "threads": 1}


def cmd_enumerate(args):
    space = _space(args)
    r = _range(args, space)
    print(json.dumps({"space": str(space), "size": space_size(space), "start": r.start, "end": r.end}))
    for i in range(r.start, min(r.end, r.start + args.limit)):
        rule = decode_rule(i, space)
        print(i, " ".join(_fmt_ins(ins) for ins in rule.table))
    return 0


def _fmt_ins(ins) -> str:
    if isinstance(ins, Halt):
        return f"H{ins.write}"
    return f"{ins.write}{ins.move.name[0]}{ins.next_state}"


def cmd_run_space(args):
    space = _space(args)
    r = _range(args, space)
    budget = _budget(args, space)
    workers = _threads(args)
    run = runner.run_space(space, r, budget, workers=workers, keep_batches=bool(args.records))
    summary = run.summary.as_dict()
    config = _resolved(args)
    summary["config_hash"] = config_hash(config)
    if args.records:
        runner.write_records_csv(run.records(), args.records)
        _write_meta(args.records, args)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=1, sort_keys=True)
            fh.write("\n")
        _write_meta(args.summary, args)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_ctm_build(args):
    space = _space(args)
    budget = _budget(args, space)
    workers = _threads(args)
    if args.sample:
        table = ctm.sample_table(space, args.sample, budget, seed=args.seed, workers=workers)
    else:
        r = _range(args, space)
        if args.symmetry and (r.start, r.end) != (0, space_size(space)):
            raise UsageError("--symmetry needs the full space")
        table = ctm.table_for_space(space, budget, r, symmetry=args.symmetry, workers=workers)
    ctm.save_table(table, args.out)
    _write_meta(args.out, args)
    print(json.dumps({"out": args.out, "entries": len(table), "halting": table.halting_total,
                      "total": table.total_machines, "config_hash": config_hash(_resolved(args))}))
    return 0


def cmd_ctm_query(args):
    table = _table(args.table)
    count = table.count(args.string)
    print(f"{args.string},{count},{table.ap(args.string):.12g},{table.ctm(args.string):.12g}")
    return 0


def cmd_ctm_merge(args):
    merged = _table(args.tables[0])
    for other in args.tables[1:]:
        merged = ctm.merge_tables(merged, _table(other))
    ctm.save_table(merged, args.out)
    _write_meta(args.out, args)
    return 0


def cmd_bdm(args):
    obj = read_grid(args.input)
    table = _table(args.table)
    d = args.block_size
    if d is None:
        d = bdm.DEFAULT_D_1D if isinstance(obj, str) else bdm.DEFAULT_D_2D
    value = bdm.bdm_value(obj, table, d, args.boundary, args.pad)
    entropy = bdm.shannon_block_entropy(obj if isinstance(obj, str) else np.asarray(obj).ravel(), 1)
    row = {"input_id": args.id or os.path.basename(args.input), "entropy": entropy, "bdm": value,
           "d": d, "boundary": bdm.Boundary(args.boundary).value}
    if args.format == "json":
        print(json.dumps(row))
    else:
        print(",".join(row))
        print(",".join(str(v) if not isinstance(v, float) else repr(v) for v in row.values()))
    return 0


def cmd_aid(args):
    obj = read_grid(args.input)
    if isinstance(obj, str):
        raise bdm.DimensionError("perturbation analysis needs a 2D object")
    table = _table(args.table)
    est = bdm.BDM(table, args.block_size, args.boundary, args.pad)
    kind = aid.GRAPH if args.family == "edges" else aid.GRID
    report = aid.signature(obj, args.family, est, kind=kind, measure=args.measure,
                           threshold=args.threshold, directed=args.directed)
    if args.out_csv:
        with open(args.out_csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(report.to_csv())
        _write_meta(args.out_csv, args)
    if args.out_json:
        with open(args.out_json, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
        _write_meta(args.out_json, args)
    if not (args.out_csv or args.out_json):
        sys.stdout.write(report.to_csv())
    return 0


def cmd_eca(args):
    init = "center" if args.init == "center" else [int(c) for c in args.init]
    try:
        grid = aid.eca_evolve(args.rule, args.width, args.steps, init)
    except ValueError as e:
        raise UsageError(str(e)) from e
    text = format_grid(grid)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        _write_meta(args.out, args)
    else:
        sys.stdout.write(text)
    return 0


def cmd_render(args):
    if args.records:
        space = _space(args)
        records = runner.read_records_csv(args.records, space)
        halted = [r.halted for r in records]
        steps = [r.steps for r in records]
        start = records[0].rule_index if records else 0
    else:
        space = _space(args)
        r = _range(args, space)
        run = runner.run_space(space, r, _budget(args, space), workers=_threads(args))
        halted, steps, start = run.halted, run.steps, r.start
    level = args.level or render.minimal_level(max(len(halted), 1))
    img = render.render_field(halted, steps, level)
    render.write_image(img, args.out)
    _write_meta(args.out, args)
    if args.sidecar:
        render.write_sidecar(args.sidecar, halted, steps, level, start)
        _write_meta(args.sidecar, args)
    return 0


# -- parser --------------------------------------------------------------------------


def _space_flags(p):
    p.add_argument("--states", type=int)
    p.add_argument("--symbols", type=int)
    p.add_argument("--dim", type=int, choices=(1, 2))
    p.add_argument("--start", type=int)
    p.add_argument("--end", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--threads", type=int)


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="compspace", description="Explore small machine spaces.")
    parser.add_argument("--config", help="JSON file with default option values")
    sub = parser.add_subparsers(dest="command", required=True)
    defaults: dict[str, dict] = {}

    def add(name, func, extra_defaults, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(func=func)
        p.add_argument("--config", help=argparse.SUPPRESS, dest="config_sub")
        defaults[name] = extra_defaults
        return p

    p = add("enumerate", cmd_enumerate, {**SPACE_DEFAULTS, "limit": 10}, help="space size and rules")
    _space_flags(p)
    p.add_argument("--limit", type=int)

    p = add("run-space", cmd_run_space, {**SPACE_DEFAULTS, "records": None, "summary": None}, help="run a range")
    _space_flags(p)
    p.add_argument("--records", help="CSV record dump")
    p.add_argument("--summary", help="JSON summary file")

    ctm_p = sub.add_parser("ctm", help="CTM tables")
    ctm_sub = ctm_p.add_subparsers(dest="ctm_command", required=True)

    def add_ctm(name, func, extra_defaults, **kw):
        p = ctm_sub.add_parser(name, **kw)
        p.set_defaults(func=func)
        p.add_argument("--config", help=argparse.SUPPRESS, dest="config_sub")
        defaults["ctm " + name] = extra_defaults
        return p

    p = add_ctm("build", cmd_ctm_build,
                {**SPACE_DEFAULTS, "out": None, "symmetry": False, "sample": None, "seed": 0})
    _space_flags(p)
    p.add_argument("--out")
    p.add_argument("--symmetry", action="store_const", const=True)
    p.add_argument("--sample", type=int, help="draw this many random rules instead of enumerating")
    p.add_argument("--seed", type=int)

    p = add_ctm("query", cmd_ctm_query, {"table": "1d-3-2"})
    p.add_argument("string")
    p.add_argument("--table")

    p = add_ctm("merge", cmd_ctm_merge, {"out": None})
    p.add_argument("tables", nargs="+")
    p.add_argument("--out")

    p = add("bdm", cmd_bdm, {"table": "1d-3-2", "input": None, "block_size": None, "boundary": "exact",
                             "pad": 0, "format": "csv", "id": None}, help="BDM of a text grid")
    p.add_argument("--table")
    p.add_argument("--input")
    p.add_argument("--block-size", type=int)
    p.add_argument("--boundary", choices=[b.value for b in bdm.Boundary])
    p.add_argument("--pad", type=int)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--id")

    p = add("aid", cmd_aid, {"table": "2d-4-2-sample", "input": None, "family": "flips", "block_size": 4,
                             "boundary": "exact", "pad": 0, "directed": False, "measure": None,
                             "threshold": None, "out_csv": None, "out_json": None}, help="perturbation report")
    p.add_argument("--table")
    p.add_argument("--input")
    p.add_argument("--family", choices=("flips", "edges"))
    p.add_argument("--block-size", type=int)
    p.add_argument("--boundary", choices=[b.value for b in bdm.Boundary])
    p.add_argument("--pad", type=int)
    p.add_argument("--directed", action="store_const", const=True)
    p.add_argument("--measure", choices=("cells", "vertices", "rows"))
    p.add_argument("--threshold", type=float)
    p.add_argument("--out-csv")
    p.add_argument("--out-json")

    p = add("eca", cmd_eca, {"rule": None, "width": 16, "steps": 16, "init": "center", "out": None},
            help="elementary CA space-time grid")
    p.add_argument("--rule", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--init")
    p.add_argument("--out")

    p = add("render", cmd_render, {**SPACE_DEFAULTS, "records": None, "level": None, "out": None,
                                   "sidecar": None}, help="runtime field as PPM")
    _space_flags(p)
    p.add_argument("--records", help="record dump from run-space")
    p.add_argument("--level", type=int)
    p.add_argument("--out")
    p.add_argument("--sidecar")
    return parser, defaults


_REQUIRED = {
    "ctm build": ("out",),
    "ctm merge": ("out",),
    "bdm": ("input",),
    "aid": ("input",),
    "eca": ("rule",),
    "render": ("out",),
}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, (ctm.NotInSupportError, bdm.MissingBlockError, aid.NoSuchEdgeError)):
        return EXIT_SUPPORT
    if isinstance(exc, (bdm.DimensionError, ctm.ConsistencyError, UnsupportedSpaceError, render.CapacityError)):
        return EXIT_DIMENSION
    if isinstance(exc, (OSError, ctm.TableFormatError)):
        return EXIT_IO
    if isinstance(exc, (ValueError, IndexError)):
        return EXIT_USAGE
    raise exc


def main(argv=None) -> int:
    parser, defaults = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config_sub", None):
        args.config = args.config or args.config_sub
    del args.config_sub
    name = args.command + (" " + args.ctm_command if args.command == "ctm" else "")
    try:
        _load_config(args, parser, defaults[name])
        missing = [k for k in _REQUIRED.get(name, ()) if getattr(args, k) is None]
        if missing:
            raise UsageError(f"missing required option(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 -- mapped to exit codes below
        code = _exit_code(exc)
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        json.dump({"error": type(exc).__name__, "message": str(msg), "exit": code}, sys.stderr)
        sys.stderr.write("\n")
        return code


if __name__ == "__main__":
    sys.exit(main())
