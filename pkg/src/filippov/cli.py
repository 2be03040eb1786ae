"""Command-line front end.

Subcommands: analyze (full report, exit code mirrors the overall status),
flow (trajectory CSV plus an events sidecar), portrait (static SVG) and
sweep (emergent-singularity census per epsilon).  All numeric output uses
17 significant digits and files are written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from . import fieldspec, flow, portrait, regularize, stability
from .errors import FieldSpecError, FilippovError
from .tolerances import default_tols

EXIT_SATISFIED = 0
EXIT_VIOLATED = 1
EXIT_UNDETERMINED = 2
EXIT_INPUT = 3
EXIT_RUNTIME = 4

_STATUS_EXIT = {
    stability.SATISFIED: EXIT_SATISFIED,
    stability.VIOLATED: EXIT_VIOLATED,
    stability.UNDETERMINED: EXIT_UNDETERMINED,
}


class _F(float):
    # json.dumps with indent uses the pure-Python encoder, which formats
    # floats through repr; this pins the 17-significant-digit contract
    def __repr__(self) -> str:
        return "%.17g" % self


def _jsonable(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return _F(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def dumps_report(d: dict) -> str:
    return json.dumps(_jsonable(d), sort_keys=True, indent=2) + "\n"


def write_atomic(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(path: str | None, data: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(data)
    else:
        write_atomic(path, data)


def _load_spec(path: str) -> fieldspec.FieldSpec:
    with open(path) as fh:
        return fieldspec.parse(fh.read())


def _parse_window(text: str):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4 or parts[0] >= parts[1] or parts[2] >= parts[3]:
        raise FieldSpecError(f"bad window {text!r}")
    return tuple(parts)


def _parse_seed(text: str):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 2:
        raise FieldSpecError(f"bad seed {text!r}")
    return (parts[0], parts[1])


def _phi_from_name(name: str):
    if name == "bump":
        return regularize.make_transition("bump")
    if name.startswith("smoothstep"):
        n = int(name[len("smoothstep"):] or "1")
        return regularize.make_transition("smoothstep", n)
    raise FieldSpecError(f"unknown transition family {name!r}")


def _fmt(v: float) -> str:
    return "%.17g" % v


def cmd_analyze(args) -> int:
    spec = _load_spec(args.spec)
    Z = spec.to_field()
    window = args.window or spec.window
    opts = stability.GmOptions(window=window, optimistic=args.optimistic)
    report = stability.check_gm(Z, opts, default_tols())
    _emit(args.out, dumps_report(report.to_json_dict()))
    return _STATUS_EXIT[report.overall]


def cmd_flow(args) -> int:
    spec = _load_spec(args.spec)
    Z = spec.to_field()
    window = args.window or spec.window or stability.default_window(Z)
    seed = args.seed or spec.seed
    if seed is None:
        raise FieldSpecError("flow needs a seed (--seed or spec)")
    if not (window[0] <= seed[0] <= window[1]
            and window[2] <= seed[1] <= window[3]):
        raise FieldSpecError(f"seed {seed} outside window {window}")
    horizon = args.horizon or spec.horizon or 100.0
    tols = default_tols()
    side = "D" if abs(seed[1]) <= tols.event else ("N" if seed[1] > 0 else "S")
    traj = flow.advance_hybrid(Z, seed, side, horizon, window, tols)
    rows = ["t,x,y,field_tag"]
    for arc in traj.arcs:
        for t, (x, y) in zip(arc.ts, arc.states[:, :2]):
            rows.append(f"{_fmt(t)},{_fmt(x)},{_fmt(y)},{arc.tag}")
    _emit(args.out, "\n".join(rows) + "\n")
    events = {
        "closed": traj.closed.value,
        "events": [{"time": e.time, "kind": e.kind.value,
                    "state": [e.state[0], e.state[1]]}
                   for e in traj.events],
    }
    sidecar = None if args.out in (None, "-") else args.out + ".events.json"
    _emit(sidecar, dumps_report(events))
    return EXIT_SATISFIED


def cmd_portrait(args) -> int:
    spec = _load_spec(args.spec)
    Z = spec.to_field()
    window = args.window or spec.window or stability.default_window(Z)
    svg = portrait.render_portrait(Z, window, tols=default_tols())
    _emit(args.out, svg)
    return EXIT_SATISFIED


def cmd_sweep(args) -> int:
    spec = _load_spec(args.spec)
    Z = spec.to_field()
    eps = args.eps or spec.eps
    if not eps:
        raise FieldSpecError("sweep needs a nonempty epsilon list")
    window = args.window or spec.window or stability.default_window(Z)
    phi = _phi_from_name(args.phi or spec.phi or "smoothstep1")
    try:
        rows_out = regularize.epsilon_sweep(Z, phi, (window[0], window[1]),
                                            list(eps), default_tols())
    except ValueError as exc:
        raise FieldSpecError(str(exc)) from exc
    rows = ["epsilon,x,y,type,eig1_re,eig1_im,eig2_re,eig2_im"]
    for row in rows_out:
        for s in row.singularities:
            e1, e2 = s.eigenvalues
            rows.append(",".join([
                _fmt(row.epsilon), _fmt(s.position[0]), _fmt(s.position[1]),
                s.type.value, _fmt(e1.real), _fmt(e1.imag),
                _fmt(e2.real), _fmt(e2.imag)]))
    _emit(args.out, "\n".join(rows) + "\n")
    return EXIT_SATISFIED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="filippov",
        description="Analyze planar piecewise polynomial vector fields "
                    "split along y = 0.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("spec", help="field spec file (text or JSON)")
        p.add_argument("--window", type=_parse_window, default=None,
                       metavar="X0,X1,Y0,Y1")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("analyze", help="full structural-stability report")
    common(p)
    p.add_argument("--optimistic", action="store_true",
                   help="report clean semi-decisions as Satisfied")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("flow", help="hybrid trajectory export")
    common(p)
    p.add_argument("--seed", type=_parse_seed, default=None, metavar="X,Y")
    p.add_argument("--horizon", type=float, default=None, metavar="T")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("portrait", help="static SVG phase portrait")
    common(p)
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("sweep", help="emergent singularities per epsilon")
    common(p)
    p.add_argument("--eps", type=lambda s: [float(v) for v in s.split(",")],
                   default=None, metavar="E1,E2,...")
    p.add_argument("--phi", default=None, metavar="FAMILY",
                   help="smoothstepN or bump")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (FieldSpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FilippovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
