"""``asrmeso`` command line: generate, run and sweep scenarios.

Exit codes: 0 success, 1 other library error, 2 configuration error,
3 numerical failure, 4 packing saturation.
"""

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, set_threads
from . import config as C
from .errors import (
    AsrMesoError,
    ConfigurationError,
    NumericalFailure,
    PackingSaturationError,
    StepError,
)

THREADS_ENV = "ASRMESO_THREADS"
EXIT_CONFIG, EXIT_NUMERIC, EXIT_PACKING = 2, 3, 4


def _load(args):
    if args.preset and args.config:
        raise ConfigurationError("give either a config file or --preset, not both")
    if args.preset:
        cfg = C.load_preset(args.preset)
    elif args.config:
        cfg = C.load(args.config)
    else:
        raise ConfigurationError("no configuration given (config path or --preset NAME)")
    for item in args.set or ():
        if "=" not in item:
            raise ConfigurationError(f"--set expects PATH=VALUE, got {item!r}")
        path, value = item.split("=", 1)
        cfg = C.set_path(cfg, path.strip(), C.parse_value(value.strip()))
    if getattr(args, "seed", None) is not None:
        cfg = C.set_path(cfg, "geometry.seed", args.seed)
    if getattr(args, "out", None):
        cfg = C.set_path(cfg, "output.dir", args.out)
    return cfg


def _threads(args):
    n = args.threads
    if n is None and os.environ.get(THREADS_ENV):
        try:
            n = int(os.environ[THREADS_ENV])
        except ValueError:
            raise ConfigurationError(f"{THREADS_ENV} must be an integer") from None
    if n is not None:
        if n < 1:
            raise ConfigurationError("thread count must be >= 1")
        set_threads(n)


def _emit(d, prefix=""):
    for k, v in d.items():
        if isinstance(v, dict):
            _emit(v, f"{prefix}{k}.")
        else:
            print(f"{prefix}{k} = {json.dumps(v)}")


def cmd_generate(args):
    from .mesogen import write_structure
    from .scenario import build_specimen, summary
    from .vtk import write_vtk

    cfg = _load(args)
    res = C.build(cfg)
    spec = build_specimen(res)
    out = Path(args.out or C.get(cfg, "output.dir") or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_structure(out / "structure.txt", spec.structure)
    write_vtk(out / "mesh.vtk", spec.mesh)
    print(f"structure = {json.dumps(str(out / 'structure.txt'))}")
    print(f"mesh = {json.dumps(str(out / 'mesh.vtk'))}")
    print(f"seed = {res.seed}")
    _emit(summary(spec))
    return 0


def cmd_run(args):
    from .scenario import run_scenario

    cfg = _load(args)
    res = C.build(cfg)
    if args.dry_run:
        print(f"config_hash = {json.dumps(C.config_hash(cfg))}")
        _emit(cfg)
        print(f"resolved.v0_agg = {res.curve.v0_agg!r}")
        return 0
    _threads(args)
    if not (args.out or C.get(cfg, "output.dir")):
        cfg = C.set_path(cfg, "output.dir", str(Path("runs") / C.get(cfg, "scenario.name")))
    if C.get(cfg, "output.progress_every") == 0 and not args.quiet:
        cfg = C.set_path(cfg, "output.progress_every", 25)

    def progress(t, ez):
        print(f"t_real={t:9.3f} d  eps_z={ez:.6e}", flush=True)

    result = run_scenario(cfg, progress=None if args.quiet else progress)
    out = Path(C.get(cfg, "output.dir"))
    print(f"series = {json.dumps(str(out / 'series.csv'))}")
    print(f"manifest = {json.dumps(str(out / 'manifest.json'))}")
    print(f"final_eps_z = {result.series.rows[-1][3]!r}")
    return 0


def sweep_label(path, value):
    return f"{path}={json.dumps(value)}"


def write_comparison(path, param, values, series_list, columns=("eps_z", "frac_dmg_agg", "frac_dmg_paste")):
    """Aligned table: t_real, then one column per (variant, quantity)."""
    t0 = series_list[0].t
    for s in series_list[1:]:
        if len(s.t) != len(t0) or any(abs(a - b) > 1e-9 * max(1.0, abs(a)) for a, b in zip(s.t, t0)):
            raise ConfigurationError("sweep variants are not sampled on common times; "
                                     "keep solver.T_real, solver.n_steps and output.record_every fixed")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_real"] + [f"{c}[{sweep_label(param, v)}]" for v in values for c in columns])
        cols = [s.column(c) for s in series_list for c in columns]
        for i, t in enumerate(t0):
            w.writerow([repr(float(t))] + [repr(float(c[i])) for c in cols])


def cmd_sweep(args):
    from .scenario import run_scenario

    cfg = _load(args)
    C.get(cfg, args.param)
    values = [C.parse_value(v) for v in args.values]
    variants = [C.set_path(cfg, args.param, v) for v in values]
    for v in variants:
        C.build(v)
    _threads(args)
    out = Path(args.out or C.get(cfg, "output.dir") or Path("runs") / f"sweep-{args.param}")
    out.mkdir(parents=True, exist_ok=True)
    series = []
    for k, (value, v) in enumerate(zip(values, variants)):
        sub = out / f"variant_{k:02d}"
        v = C.set_path(v, "output.dir", str(sub))
        print(f"variant {k}: {sweep_label(args.param, value)}", flush=True)
        progress = None if args.quiet else (lambda t, ez: print(f"  t_real={t:9.3f} d  eps_z={ez:.6e}", flush=True))
        if not args.quiet and C.get(v, "output.progress_every") == 0:
            v = C.set_path(v, "output.progress_every", 25)
        series.append(run_scenario(v, progress=progress).series)
    write_comparison(out / "comparison.csv", args.param, values, series)
    print(f"comparison = {json.dumps(str(out / 'comparison.csv'))}")
    return 0


def cmd_presets(args):
    for name in C.preset_names():
        print(name)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="asrmeso", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"asrmeso {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress details")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("config", nargs="?", help="TOML run configuration")
        sp.add_argument("--preset", help="use a shipped preset instead of a file")
        sp.add_argument("--set", action="append", metavar="PATH=VALUE",
                        help="override a parameter, e.g. --set kinetics.K=1500 (repeatable)")
        sp.add_argument("--out", help="output directory")
        if seed:
            sp.add_argument("--seed", type=int, help="aggregate realization seed")

    g = sub.add_parser("generate", help="pack aggregates and write structure + mesh")
    common(g)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run one scenario")
    common(r)
    r.add_argument("--dry-run", action="store_true", help="validate and print the resolved configuration")
    r.add_argument("--threads", type=int, help=f"worker threads (default: ${THREADS_ENV} or all)")
    r.add_argument("--quiet", action="store_true", help="no progress lines")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run variants of one parameter and tabulate them")
    common(s)
    s.add_argument("--param", required=True, help="dotted parameter path")
    s.add_argument("--values", required=True, nargs="+", help="values (TOML literals)")
    s.add_argument("--threads", type=int)
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_sweep)

    ls = sub.add_parser("presets", help="list shipped presets")
    ls.set_defaults(func=cmd_presets)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PackingSaturationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PACKING
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, StepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except AsrMesoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
