"""Command line entry point: ``cmiselect {select,benchmark,evaluate,export-q}``."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .bench import GAP_HEADER, TIMING_HEADER, ExperimentGrid, gap_experiment, rows_to_csv, timing_experiment
from .dataset import load_csv, make_folds
from .evaluation import default_k_grid, evaluate_methods
from .qmatrix import read_q_csv, write_q_csv
from .selector import BASELINES, METHODS, SelectionPipeline, select_from_matrices
from .solvers import SOLVERS, UNSUPPORTED, SolverConfig

log = logging.getLogger("cmiselect")
_UMASK = os.umask(0)
os.umask(_UMASK)


class CliError(Exception):
    pass


class OutputSet:
    """Stage output files in temporaries and move them into place together.

    If anything fails before :meth:`commit`, every staged file is removed so
    no partial output is left behind.
    """

    def __init__(self):
        self._staged: list[tuple[Path, Path]] = []

    def _stage(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        os.close(fd)
        # mkstemp creates 0600; give the final file the usual umask-derived mode
        os.chmod(tmp, 0o666 & ~_UMASK)
        self._staged.append((Path(tmp), path))
        return Path(tmp)

    def write_text(self, path, text: str) -> None:
        self._stage(path).write_text(text)

    def write_with(self, path, writer) -> None:
        """Stage a file produced by ``writer(tmp_path)``."""
        writer(self._stage(path))

    def commit(self) -> None:
        for tmp, final in self._staged:
            os.replace(tmp, final)
        self._staged.clear()

    def discard(self) -> None:
        for tmp, _ in self._staged:
            tmp.unlink(missing_ok=True)
        self._staged.clear()


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _manifest(args, inputs) -> str:
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "handler"}
    return _dumps({
        "command": args.command,
        "flags": flags,
        "seed": args.seed,
        "version": __version__,
        "inputs": {str(p): _digest(p) for p in inputs if p is not None},
    })


def _config(args) -> SolverConfig:
    shift = args.tpower_shift
    if shift not in ("auto", "gershgorin"):
        try:
            shift = float(shift)
        except ValueError:
            raise CliError(f"--tpower-shift must be auto, gershgorin or a number, got {shift!r}")
    try:
        return SolverConfig(
            max_iterations=args.tpower_max_iter,
            tolerance=args.tolerance,
            tpower_shift=shift,
            lowrank_d=args.lowrank_d,
            lowrank_epsilon=args.lowrank_eps,
            lowrank_delta=args.lowrank_delta,
            seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _check_method(name: str, allowed) -> None:
    if name in UNSUPPORTED:
        raise CliError(UNSUPPORTED[name])
    if name not in allowed:
        raise CliError(f"unknown method {name!r}; choose from {', '.join(allowed)}")


def _manifest_path(args, default_dir=None):
    if args.manifest:
        return Path(args.manifest)
    if default_dir is not None:
        return Path(default_dir) / "manifest.json"
    if args.output:
        return Path(str(args.output) + ".manifest.json")
    return None


def _emit(out: OutputSet, args, text: str, inputs) -> None:
    if args.output:
        out.write_text(args.output, text)
    else:
        sys.stdout.write(text)
    mpath = _manifest_path(args)
    if mpath is not None:
        out.write_text(mpath, _manifest(args, inputs))


def cmd_select(args, out: OutputSet) -> None:
    _check_method(args.method, METHODS)
    cfg = _config(args)
    if (args.input is None) == (args.q_matrix is None):
        raise CliError("give exactly one of --input or --q-matrix")
    if args.q_matrix is not None:
        if args.method == "mrmr":
            raise CliError("mrmr needs the redundancy matrix; run it on --input data")
        q_raw = read_q_csv(args.q_matrix)
        report = select_from_matrices(args.method, args.k, q_raw, cfg)
    else:
        data = load_csv(args.input, _label_column(args.label_column))
        pipe = SelectionPipeline(data, n_jobs=args.threads)
        report = pipe.select(args.method, args.k, cfg)
        if args.scheme_out:
            out.write_text(args.scheme_out, pipe.scheme.to_json())
    log.info("selected %s with objective %.6g", list(report.support), report.objective)
    _emit(out, args, report.to_json(timing=not args.omit_timing), [args.input, args.q_matrix])


def cmd_export_q(args, out: OutputSet) -> None:
    data = load_csv(args.input, _label_column(args.label_column))
    pipe = SelectionPipeline(data, n_jobs=args.threads)
    q = pipe.q if args.symmetrize else pipe.q_raw
    out.write_with(args.output, lambda tmp: write_q_csv(q, tmp))
    if args.scheme_out:
        out.write_text(args.scheme_out, pipe.scheme.to_json())
    out.write_text(_manifest_path(args), _manifest(args, [args.input]))


def cmd_benchmark(args, out: OutputSet) -> None:
    for s in args.solvers:
        _check_method(s, list(SOLVERS))
    cfg = _config(args)
    try:
        grid = ExperimentGrid.product(args.ns, args.ks, args.trials, args.seed)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid grid: {exc}") from None
    outdir = Path(args.output_dir)
    if args.experiment in ("timing", "both"):
        rows = timing_experiment(grid, args.solvers, cfg)
        out.write_text(outdir / "timing.csv", rows_to_csv(rows, TIMING_HEADER))
    if args.experiment in ("gap", "both"):
        rows = gap_experiment(grid, args.solvers, cfg)
        out.write_text(outdir / "gap.csv", rows_to_csv(rows, GAP_HEADER))
    out.write_text(_manifest_path(args, outdir), _manifest(args, []))


def _parse_k_values(text: str | None, n: int) -> list[int]:
    if text is None:
        return default_k_grid(n)
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"--k-values must be 'a:b' or a comma list, got {text!r}") from None


def cmd_evaluate(args, out: OutputSet) -> None:
    for m in args.methods:
        _check_method(m, [*METHODS, *BASELINES])
    if len(set(args.methods)) != len(args.methods):
        raise CliError("duplicate method names")
    cfg = _config(args)
    data = load_csv(args.input, _label_column(args.label_column))
    k_values = _parse_k_values(args.k_values, data.n)
    plan = make_folds(data, args.folds, seed=args.seed, mode=args.fold_mode)
    results = evaluate_methods(data, args.methods, k_values, plan, cfg, args.scope, args.threads)
    report = {
        "fold_mode": plan.mode,
        "n_folds": len(plan),
        "scope": args.scope,
        "methods": [r.to_dict() for r in results],
    }
    _emit(out, args, _dumps(report), [args.input])


def _label_column(value):
    try:
        return int(value)
    except ValueError:
        return value


def _add_solver_flags(p) -> None:
    g = p.add_argument_group("solver options")
    g.add_argument("--tpower-max-iter", type=int, default=1000,
                   help="iteration cap for tpower, spectral and eigen solves (default 1000)")
    g.add_argument("--tpower-shift", default="auto",
                   help="auto (adaptive), gershgorin, or a fixed nonnegative shift")
    g.add_argument("--tolerance", type=float, default=1e-8)
    g.add_argument("--lowrank-d", type=int, default=3)
    g.add_argument("--lowrank-eps", type=float, default=0.1)
    g.add_argument("--lowrank-delta", type=float, default=0.1)


def _add_output_flags(p, required=False) -> None:
    p.add_argument("--output", required=required, help="output path (stdout when omitted)")
    p.add_argument("--manifest", help="manifest path (default: <output>.manifest.json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmiselect", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for matrix construction (1 = sequential)")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="select k features and write a solver report")
    p.add_argument("--input", help="CSV with features and a label column")
    p.add_argument("--q-matrix", help="precomputed Q as CSV; skips discretization")
    p.add_argument("--label-column", default="-1", help="label column name or index (default -1)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", default="tpower",
                   help=f"one of {', '.join(METHODS)}")
    p.add_argument("--scheme-out", help="write the discretization scheme JSON here")
    p.add_argument("--omit-timing", action="store_true", help="leave wall_time_s out of the report")
    _add_output_flags(p)
    _add_solver_flags(p)
    p.set_defaults(handler=cmd_select)

    p = sub.add_parser("benchmark", help="random-matrix timing and objective-gap experiments")
    p.add_argument("--experiment", choices=["timing", "gap", "both"], default="both")
    p.add_argument("--ns", type=int, nargs="*", default=[100, 200, 500, 1000])
    p.add_argument("--ks", type=int, nargs="*", default=[10, 50])
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--solvers", nargs="+", default=["linear", "tpower", "spectral", "lowrank"])
    p.add_argument("--output-dir", required=True)
    p.add_argument("--manifest", help="manifest path (default: <output-dir>/manifest.json)")
    _add_solver_flags(p)
    p.set_defaults(handler=cmd_benchmark)

    p = sub.add_parser("evaluate", help="cross-validated win/tie/loss comparison of methods")
    p.add_argument("--input", required=True)
    p.add_argument("--label-column", default="-1")
    p.add_argument("--methods", nargs="+", default=["tpower", "lowrank", "linear", "jmi"])
    p.add_argument("--k-values", help="'a:b' range or comma list (default 10..min(n,100))")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--fold-mode", choices=["auto", "kfold", "loo"], default="auto")
    p.add_argument("--scope", choices=["global", "fold"], default="global",
                   help="discretize and select once (global) or inside each training fold")
    _add_output_flags(p)
    _add_solver_flags(p)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("export-q", help="write the CMI matrix Q as CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--label-column", default="-1")
    p.add_argument("--symmetrize", action="store_true", help="export (Q + Q^T)/2 instead of raw Q")
    p.add_argument("--scheme-out")
    _add_output_flags(p, required=True)
    p.set_defaults(handler=cmd_export_q)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    out = OutputSet()
    try:
        args.handler(args, out)
        out.commit()
    except (CliError, ValueError, OSError, RuntimeError) as exc:
        out.discard()
        print(f"cmiselect: error: {exc}", file=sys.stderr)
        return 1
    except BaseException:
        out.discard()
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())
