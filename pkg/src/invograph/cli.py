"""Command-line interface: ``invograph <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .census import GRID_VERSION, grid_specs, predicted_diameter, verify_report
from .errors import InvographError
from .formats import census_csv, format_certificate, format_class_dump, parse_matrix
from .gf import make_field
from .graph import all_involutions_census, bfs_census, default_workers, distance
from .involutions import DEFAULT_CLASS_CAP, ClassSpec, canonical_t, class_size, delta1, enumerate_class

CASES = ("prop24", "prop28", "lemma27", "cor26")


def _field(args):
    poly = None
    if args.poly:
        poly = [int(v) for v in args.poly.replace(",", " ").split()]
    return make_field(args.p, args.e, poly)


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _dump_json(path, payload):
    _write(path, json.dumps(payload, indent=2) + "\n")


def _add_field_args(p, need_k=True):
    p.add_argument("--n", type=int, required=True)
    if need_k:
        p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=int, required=True, help="field characteristic")
    p.add_argument("--e", type=int, default=1, help="extension degree")
    p.add_argument("--poly", help="defining polynomial coefficients, constant term first")


def _add_run_args(p):
    p.add_argument("--cap", type=int, default=DEFAULT_CLASS_CAP, help="largest class to enumerate")
    p.add_argument("--workers", type=int, default=None, help="worker threads (default: $INVOGRAPH_WORKERS or 1)")
    p.add_argument("--seed", type=int, default=0)


def cmd_class(args) -> int:
    F = _field(args)
    spec = ClassSpec(args.n, args.k, F)
    size = class_size(spec)
    print(f"{spec.label}: |X_k| = {size}, |Delta_1(t)| = {delta1(spec).shape[0]}")
    if args.list:
        orbit = enumerate_class(spec, cap=args.cap)
        if len(orbit) != size:
            print(f"enumeration found {len(orbit)} members, expected {size}", file=sys.stderr)
            return 1
        _write(args.list, format_class_dump(F, orbit.members))
    return 0


def cmd_census(args) -> int:
    F = _field(args)
    spec = ClassSpec(args.n, args.k, F)
    census = bfs_census(spec, method=args.method, cells=args.cells or bool(args.csv), workers=args.workers, cap=args.cap, seed=args.seed)
    for d, c in sorted(census.counts.items()):
        print(f"distance {d}: {c}")
    if census.unreached:
        print(f"unreached: {census.unreached}")
    print(f"diameter {census.diameter}, connected {census.connected}")
    if args.json:
        _dump_json(args.json, census.as_dict())
    if args.csv:
        _write(args.csv, census_csv(census))
    return 0 if census.connected else 1


def cmd_diameter(args) -> int:
    F = _field(args)
    spec = ClassSpec(args.n, args.k, F)
    census = bfs_census(spec, workers=args.workers, cap=args.cap, seed=args.seed)
    predicted = predicted_diameter(spec.n, spec.k, F.q, F.char)
    ok = census.connected and census.diameter == predicted
    print(f"{spec.label}: diameter {census.diameter} (predicted {predicted}) {'PASS' if ok else 'FAIL'}")
    if args.json:
        out = census.as_dict()
        out["predicted_diameter"] = predicted
        _dump_json(args.json, out)
    return 0 if ok else 1


def _read_vertex(path, spec):
    with open(path) as fh:
        F, m = parse_matrix(fh.read())
    if F != spec.field:
        raise InvographError("matrix file uses a different field")
    return m


def cmd_distance(args) -> int:
    F = _field(args)
    spec = ClassSpec(args.n, args.k, F)
    t = canonical_t(spec)
    x = _read_vertex(args.x, spec) if args.x else t
    y = _read_vertex(args.y, spec)
    d, cert = distance(x, y, spec, mode=args.mode, seed=args.seed, cap=args.cap)
    ok = cert.validate(x, y)
    print(f"distance {d}; certificate length {cert.length} {'valid' if ok else 'INVALID'}")
    if args.emit:
        _write(args.emit, format_certificate(cert))
    if args.json:
        _dump_json(args.json, {"spec": spec.as_dict(), "distance": d, "certificate_valid": ok})
    return 0 if ok else 1


def cmd_all(args) -> int:
    F = _field(args)
    census = all_involutions_census(args.n, F, cap=args.cap)
    for d, c in sorted(census.counts.items()):
        print(f"distance {d}: {c}")
    print(f"diameter {census.diameter}, connected {census.connected}")
    if args.json:
        _dump_json(args.json, census.as_dict())
    return 0 if census.connected else 1


def cmd_witness(args) -> int:
    from . import witnesses as W

    F = _field(args)
    case = args.case
    cert = None
    if case == "lemma27":
        if args.n % 2:
            raise InvographError("lemma27 needs n = 2k")
        report = W.transpose_distance_report(args.n // 2, F)
        cert = report.certificate
    elif case in ("prop24", "prop28"):
        if args.k is None:
            raise InvographError(f"{case} needs --k")
        spec = ClassSpec(args.n, args.k, F)
        build = W.far_involution_odd if case == "prop24" else W.far_involution_char2
        report = W.verify_far_involution(spec, build(args.n, args.k, F), case=case)
    else:
        if args.k is None:
            raise InvographError("cor26 needs --k")
        report, cert = _two_step_report(ClassSpec(args.n, args.k, F), args)
    print(f"{report.case} {report.spec.label}: d {report.bound} via {report.method}")
    for key, val in report.details.items():
        print(f"  {key}: {val}")
    if args.emit:
        if cert is not None:
            _write(args.emit, format_certificate(cert))
        else:
            _write(args.emit, format_class_dump(F, report.matrices.values()))
    if args.json:
        _dump_json(args.json, report.as_dict())
    return 0


def _two_step_report(spec, args):
    import time

    from . import witnesses as W

    t0 = time.perf_counter()
    orbit = enumerate_class(spec, cap=args.cap)
    members = orbit.members
    rng = np.random.default_rng(args.seed)
    idx = np.arange(len(members)) if args.samples is None or args.samples >= len(members) else np.sort(rng.choice(len(members), args.samples, replace=False))
    lengths = {}
    longest = None
    for i in idx:
        cert = W.two_step_path(members[i], spec)
        lengths[cert.length] = lengths.get(cert.length, 0) + 1
        if longest is None or cert.length > longest.length:
            longest = cert
    report = W.WitnessReport(
        case="cor26",
        spec=spec,
        matrices={"x": longest.target},
        bound="<= 2",
        method="explicit certificates" + ("" if len(idx) == len(members) else " (sampled)"),
        runtime_ms=(time.perf_counter() - t0) * 1000,
        details={"checked": int(len(idx)), "lengths": {str(k): v for k, v in sorted(lengths.items())}},
        certificate=longest,
    )
    return report, longest


def cmd_verify(args) -> int:
    if args.grid:
        specs = grid_specs(args.cap)
    else:
        if None in (args.n, args.k, args.p):
            raise InvographError("verify needs --n, --k and --p (or --grid)")
        specs = [ClassSpec(args.n, args.k, _field(args))]
    reports = []
    for spec in specs:
        r = verify_report(spec.n, spec.k, spec.field, cap=args.cap, workers=args.workers, seed=args.seed)
        reports.append(r)
        status = "PASS" if r.passed else "FAIL"
        print(f"{spec.label} [{r.mode}] {status}")
        for c in r.failures():
            print(f"  {c.name}: expected {c.expected}, observed {c.observed}")
        for note in r.notes:
            print(f"  note: {note}")
    ok = all(r.passed for r in reports)
    if args.json:
        payload = {"grid_version": GRID_VERSION if args.grid else None, "pass": ok, "reports": [r.as_dict() for r in reports]}
        _dump_json(args.json, payload)
    if args.csv:
        rows = ["n,k,q,distance,m,count"]
        for r in reports:
            if r.census is None:
                continue
            for line in census_csv(r.census).splitlines()[1:]:
                rows.append(f"{r.spec.n},{r.spec.k},{r.spec.q},{line}")
        _write(args.csv, "\n".join(rows) + "\n")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invograph", description="Commuting involution graphs of GL_n over finite fields.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("class", help="class size and member listing")
    _add_field_args(p)
    _add_run_args(p)
    p.add_argument("--list", metavar="FILE", help="write every class member")
    p.set_defaults(func=cmd_class)

    p = sub.add_parser("census", help="distance census from the base involution")
    _add_field_args(p)
    _add_run_args(p)
    p.add_argument("--method", choices=("orbit", "neighbors", "pairwise"), default="orbit")
    p.add_argument("--cells", action="store_true", help="split layers by the meet dimension m")
    p.add_argument("--json", metavar="FILE")
    p.add_argument("--csv", metavar="FILE")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("diameter", help="graph diameter compared with the prediction")
    _add_field_args(p)
    _add_run_args(p)
    p.add_argument("--json", metavar="FILE")
    p.set_defaults(func=cmd_diameter)

    p = sub.add_parser("distance", help="distance between two class members")
    _add_field_args(p)
    _add_run_args(p)
    p.add_argument("--x", metavar="FILE", help="first vertex in matrix text format (default: the base involution)")
    p.add_argument("--y", metavar="FILE", required=True, help="second vertex in matrix text format")
    p.add_argument("--mode", choices=("exact", "bounded"), default="exact")
    p.add_argument("--emit", metavar="FILE", help="write the path certificate")
    p.add_argument("--json", metavar="FILE")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("all-involutions", help="graph on all non-central involutions")
    _add_field_args(p, need_k=False)
    _add_run_args(p)
    p.add_argument("--json", metavar="FILE")
    p.set_defaults(func=cmd_all)

    p = sub.add_parser("witness", help="explicit lower-bound witnesses and path certificates")
    p.add_argument(
        "--case",
        choices=CASES,
        required=True,
        help="prop24: far involution, odd characteristic; prop28: far involution, characteristic 2; "
        "lemma27: d(t, t^T) = 4 with n = 2k; cor26: two-step paths to every member",
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--e", type=int, default=1)
    p.add_argument("--poly")
    _add_run_args(p)
    p.add_argument("--samples", type=int, help="cor26: check this many random members instead of all")
    p.add_argument("--emit", metavar="FILE")
    p.add_argument("--json", metavar="FILE")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", help="compare censuses with closed forms and predicted diameters")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--e", type=int, default=1)
    p.add_argument("--poly")
    p.add_argument("--grid", action="store_true", help="sweep the built-in grid")
    _add_run_args(p)
    p.add_argument("--json", metavar="FILE")
    p.add_argument("--csv", metavar="FILE")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", None) is None and hasattr(args, "workers"):
        args.workers = default_workers()
    try:
        return args.func(args)
    except (InvographError, OverflowError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
