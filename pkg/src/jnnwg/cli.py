"""Command line entry point (``jnnwg``).

Exit codes: 0 success, 2 invalid config or arguments, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import catalog
from .scenario import (
    ConfigError,
    canonical_json,
    load_config,
    parse_assignment,
    parse_config,
    run_scenario,
    run_sweep,
    set_path,
)

_KIND_OF_COMMAND = {
    "solve-dispersion": "dispersion",
    "propagate": "propagate",
    "emit-absorb": "emit-absorb",
    "rabi": "rabi",
}


def _add_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--scenario", help="builtin scenario name (see list-scenarios)")
    src.add_argument("--config", help="path to a JSON config document")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="PATH=VALUE",
                   help="override a config field, e.g. atoms.*.profile.g=0.2 (repeatable)")


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="run directory to create")
    p.add_argument("--overwrite", action="store_true", help="replace an existing run directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jnnwg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-dispersion", help="design hoppings for a target band")
    _add_source(p, required=False)
    p.add_argument("--kind", choices=["chiral_linear", "symmetric_linear", "quadratic", "cubic", "polynomial"])
    p.add_argument("--J", type=int, default=5)
    p.add_argument("--coefficient", type=float, help="v_g, q_g or c_g (default 1)")
    p.add_argument("--coefficients", type=str, help="comma-separated alpha_0..alpha_n for polynomial")
    p.add_argument("--omega0", type=float, default=0.0)
    _add_out(p)

    for name, text in (("propagate", "evolve a wave packet"),
                       ("emit-absorb", "emitter/absorber dynamics"),
                       ("rabi", "probe atom in an atomic-mirror cavity")):
        p = sub.add_parser(name, help=text)
        _add_source(p)
        _add_out(p)

    p = sub.add_parser("run", help="run any scenario or config")
    _add_source(p)
    _add_out(p)

    p = sub.add_parser("sweep", help="run a scenario over values of one field")
    _add_source(p)
    p.add_argument("--axis", required=True, help="dotted field path; '*' matches every list element")
    p.add_argument("--values", required=True, help="comma-separated JSON values")
    p.add_argument("--workers", type=int, default=1)
    _add_out(p)

    sub.add_parser("list-scenarios", help="list builtin scenarios")
    p = sub.add_parser("show-config", help="print a builtin scenario config")
    p.add_argument("scenario")
    return parser


def _dispersion_doc(args) -> dict:
    if args.scenario or args.config:
        return load_config(args.scenario, args.config, args.overrides)
    if not args.kind:
        raise ConfigError("kind", "give --scenario, --config or --kind")
    design = {"kind": args.kind, "J": args.J, "omega0": args.omega0}
    if args.coefficients:
        design["coefficients"] = [float(x) for x in args.coefficients.split(",")]
    if args.coefficient is not None:
        design["coefficient"] = args.coefficient
    doc = {"name": f"{args.kind}_J{args.J}", "kind": "dispersion", "v_g": 1.0,
           "waveguide": {"design": design}, "outputs": {"rel_tol": 0.01, "n_k": 1025}}
    for item in args.overrides:
        path, value = parse_assignment(item)
        doc = set_path(doc, path, value)
    return doc


def _run(args) -> int:
    if args.command == "list-scenarios":
        for name in catalog.names():
            doc = catalog.get(name)
            print(f"{name:16s} {doc['kind']:12s} {doc.get('description', '')}")
        return 0
    if args.command == "show-config":
        sys.stdout.write(canonical_json(catalog.get(args.scenario)))
        return 0
    if args.command == "solve-dispersion":
        doc = _dispersion_doc(args)
    else:
        doc = load_config(args.scenario, args.config, args.overrides)
    if args.command == "sweep":
        try:
            values = json.loads(f"[{args.values}]")
        except json.JSONDecodeError as exc:
            raise ConfigError("values", str(exc)) from None
        summaries = run_sweep(doc, args.axis, values, args.out, args.workers, args.overwrite)
        print(f"wrote {len(summaries)} runs and sweep.csv to {args.out}")
        return 0
    cfg = parse_config(doc)
    want = _KIND_OF_COMMAND.get(args.command)
    if want is not None and cfg.kind != want:
        raise ConfigError("kind", f"'{args.command}' runs {want} scenarios, this one is {cfg.kind}")
    result = run_scenario(cfg, args.out, args.overwrite)
    scalars = {k: v for k, v in result.summary.items() if isinstance(v, (int, float, str))}
    print(json.dumps(scalars, indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        return _run(args)
    except (ConfigError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
