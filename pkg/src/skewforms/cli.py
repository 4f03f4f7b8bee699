"""Command-line front end.

Subcommands: forms {d, wedge, closed, loop}, chars, legendre, evolve.
Exit codes: 0 success, 2 validation error, 3 domain error.  Every error
path prints a single line `E_VALIDATION: ...` or `E_DOMAIN: ...` to stderr.
Floats are written as shortest-round-trip decimals so repeated runs with the
same inputs and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import expr as ex
from . import forms as fm
from . import characteristics as ch
from . import legendre as lg
from . import evolution as ev

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DOMAIN = 3


class ValidationError(Exception):
    pass


def _f(value):
    return repr(float(value))


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as err:
        raise ValidationError(f"cannot read {path}: {err}")
    except json.JSONDecodeError as err:
        raise ValidationError(f"{path}: invalid JSON: {err}")


# ---------------------------------------------------------------------------
# forms


def _load_form_arg(path):
    try:
        return fm.form_from_dict(_load_json(path))
    except (ex.ParseError, fm.FormError, KeyError, TypeError) as err:
        raise ValidationError(f"{path}: {err}")


def _load_frame_arg(args, variables):
    if not getattr(args, "frame", None):
        return None
    doc = _load_json(args.frame)
    try:
        return fm.frame_from_dict(doc, variables)
    except (ex.ParseError, fm.FormError, KeyError) as err:
        raise ValidationError(f"{args.frame}: {err}")


def cmd_forms_d(args):
    theta = _load_form_arg(args.form)
    frame = _load_frame_arg(args, theta.variables)
    closed, residual = fm.is_closed(theta, frame, seed=args.seed)
    out = _out_dir(args)
    _write_json(out / "derivative.json", fm.form_to_dict(residual))
    _write_json(out / "diagnostics.json", {"closed": closed})
    print(f"closed: {str(closed).lower()}")
    return EXIT_OK


def cmd_forms_wedge(args):
    a = _load_form_arg(args.a)
    b = _load_form_arg(args.b)
    try:
        result = fm.wedge(a, b)
    except fm.FormError as err:
        raise ValidationError(str(err))
    out = _out_dir(args)
    _write_json(out / "wedge.json", fm.form_to_dict(result))
    return EXIT_OK


def cmd_forms_closed(args):
    theta = _load_form_arg(args.form)
    frame = _load_frame_arg(args, theta.variables)
    closed, residual = fm.is_closed(theta, frame, seed=args.seed)
    out = _out_dir(args)
    _write_json(out / "residual.json", fm.form_to_dict(residual))
    _write_json(out / "diagnostics.json", {"closed": closed})
    print(f"closed: {str(closed).lower()}")
    return EXIT_OK


def cmd_forms_loop(args):
    theta = _load_form_arg(args.form)
    try:
        loop = fm.loop_from_dict(_load_json(args.loop))
    except fm.FormError as err:
        raise ValidationError(f"{args.loop}: {err}")
    value = fm.loop_integral(theta, loop)
    print(_f(value))
    if args.out:
        _write_json(_out_dir(args) / "loop.json", {"value": value})
    return EXIT_OK


# ---------------------------------------------------------------------------
# chars


def _load_problem(path):
    doc = _load_json(path)
    try:
        variables = list(doc["vars"]) + [doc["u"]] + list(doc["p"])
        F = ex.parse(doc["F"], variables)
        return ch.PdeProblem(doc["n"], tuple(doc["vars"]), doc["u"],
                             tuple(doc["p"]), F)
    except (ex.ParseError, ch.CharacteristicsError, KeyError) as err:
        raise ValidationError(f"{path}: {err}")


def _strip_from_dict(doc):
    return ch.CharacteristicStrip(tuple(doc["x"]), float(doc["u"]), tuple(doc["p"]))


def _write_trajectory(path, problem, traj):
    header = (["s"] + list(problem.x_names) + [problem.u_name]
              + list(problem.p_names) + ["F_residual", "strip_residual"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for m in range(len(traj)):
            row = ([_f(traj.s[m])] + [_f(v) for v in traj.x[m]]
                   + [_f(traj.u[m])] + [_f(v) for v in traj.p[m]]
                   + [_f(traj.f_residual[m]), _f(traj.strip_residual[m])])
            writer.writerow(row)


def cmd_chars(args):
    problem = _load_problem(args.pde)
    if bool(args.strip) == bool(args.bundle):
        raise ValidationError("provide exactly one of --strip or --bundle")
    du_override = None
    if args.du_rhs:
        try:
            du_override = ex.parse(args.du_rhs, list(problem.all_names))
        except ex.ParseError as err:
            raise ValidationError(f"--du-rhs: {err}")
    out = _out_dir(args)
    if args.strip:
        doc = _load_json(args.strip)
        strip = _strip_from_dict(doc)
        try:
            traj = ch.integrate_strip(problem, strip, args.smax, args.h,
                                      du_override=du_override)
        except ch.InadmissibleStripError as err:
            print(f"E_VALIDATION: {err}", file=sys.stderr)
            return EXIT_VALIDATION
        _write_trajectory(out / "traj_0.csv", problem, traj)
        summary = {
            "max_f_residual": ch.dual_residual(traj),
            "max_strip_residual": float(np.nanmax(traj.strip_residual)),
            "samples": len(traj),
            "aborted": traj.aborted,
        }
        _write_json(out / "summary.json", summary)
        return EXIT_OK

    doc = _load_json(args.bundle)
    try:
        labels = [float(v) for v in doc["labels"]]
        strips = [_strip_from_dict(d) for d in doc["strips"]]
        transverse = int(doc["transverse"]) - 1
    except (KeyError, TypeError, ValueError) as err:
        raise ValidationError(f"{args.bundle}: {err}")
    try:
        bundle = ch.solve_bundle(problem, strips, labels, transverse,
                                 args.smax, args.h)
    except ch.CharacteristicsError as err:
        raise ValidationError(str(err))
    max_f = 0.0
    for k, traj in enumerate(bundle.trajectories):
        if traj is None:
            continue
        _write_trajectory(out / f"traj_{k}.csv", problem, traj)
        max_f = max(max_f, ch.dual_residual(traj))
    summary = {
        "labels": labels,
        "transverse": transverse + 1,
        "max_f_residual": max_f,
        "errors": {str(k): msg for k, msg in sorted(bundle.errors.items())},
    }
    if bundle.jacobians is not None:
        summary["jacobians"] = {
            "s": [float(v) for v in bundle.jacobian_s],
            "rows": [[float(v) for v in row] for row in bundle.jacobians],
        }
    _write_json(out / "bundle.json", summary)
    if args.scan_events:
        events = ev.jacobian_scan(bundle)
        _write_json(out / "events.json", ev.events_to_dicts(events))
        print(f"events: {len(events)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# legendre


def _parse_domain(text):
    try:
        return [tuple(float(v) for v in part.split(":")) for part in text.split(",")]
    except ValueError:
        raise ValidationError(f"bad domain '{text}'; expected lo:hi[,lo:hi]")


def cmd_legendre(args):
    if args.request:
        doc = _load_json(args.request)
        try:
            m = int(doc["m"])
            names = lg.default_velocity_names(m)
            L = ex.parse(doc["L"], list(names))
            domain = [tuple(float(v) for v in box) for box in doc["domain"]]
            grid = int(doc["grid"])
        except (KeyError, ValueError, ex.ParseError) as err:
            raise ValidationError(f"{args.request}: {err}")
    else:
        if not (args.L and args.domain and args.grid):
            raise ValidationError("need --request or all of --L/--domain/--grid")
        domain = _parse_domain(args.domain)
        names = lg.default_velocity_names(len(domain))
        try:
            L = ex.parse(args.L, list(names))
        except ex.ParseError as err:
            raise ValidationError(f"--L: {err}")
        grid = args.grid
    if len(domain) != len(names) or any(len(box) != 2 for box in domain):
        raise ValidationError("domain must give [lo, hi] per velocity axis")

    report = lg.degeneracy_check(L, domain, names, seed=args.seed)
    result = lg.legendre_transform(L, domain, grid, names)
    out = _out_dir(args)
    with open(out / "transform.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(result.momentum_names) + ["H"])
        for row in range(len(result.h_values)):
            writer.writerow([_f(v) for v in result.p_samples[row]]
                            + [_f(result.h_values[row])])
    diagnostics = {
        "hessian_det": ex.to_string(report.hessian_det),
        "identically_degenerate": report.identically_degenerate,
        "degeneracy_zeros": [list(z) for z in report.zeros],
        "closed_form": ex.to_string(result.closed_form)
        if result.closed_form is not None else None,
    }
    if result.m == 1 and not report.zeros and not report.identically_degenerate:
        diagnostics["involution_error"] = lg.involution_error(L, domain, grid, names)
    _write_json(out / "diagnostics.json", diagnostics)
    return EXIT_OK


# ---------------------------------------------------------------------------
# evolve


def _read_trajectory_csv(path):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(v) for v in row] for row in reader]
    except (OSError, ValueError, StopIteration) as err:
        raise ValidationError(f"{path}: {err}")
    if not rows:
        raise ValidationError(f"{path}: empty trajectory")
    cols = {name: i for i, name in enumerate(header)}
    needed = ["s", "x1", "x2", "u", "p1", "p2"]
    missing = [c for c in needed if c not in cols]
    if missing:
        raise ValidationError(f"{path}: missing columns {missing}")
    arr = np.array(rows)
    N = len(arr)
    return ch.Trajectory(
        s=arr[:, cols["s"]],
        x=arr[:, [cols["x1"], cols["x2"]]],
        u=arr[:, cols["u"]],
        p=arr[:, [cols["p1"], cols["p2"]]],
        f_residual=np.zeros(N),
        strip_residual=np.zeros(N),
    )


def cmd_evolve(args):
    have_exprs = args.a1 is not None and args.a2 is not None
    if have_exprs == bool(args.grid_field):
        raise ValidationError("provide either --a1/--a2 or --grid-field")
    if have_exprs:
        try:
            a1 = ex.parse(args.a1, list(ev.XI_NAMES))
            a2 = ex.parse(args.a2, list(ev.XI_NAMES))
        except ex.ParseError as err:
            raise ValidationError(f"component expression: {err}")
        rel = ev.build_relation(a1, a2, identity_tolerance=args.tol)
    else:
        try:
            grid = ev.grid_field_from_dict(_load_json(args.grid_field))
            rel = ev.build_relation(args.c1, args.c2, grid=grid,
                                    identity_tolerance=args.tol)
        except (ev.EvolutionError, KeyError, ValueError) as err:
            raise ValidationError(f"{args.grid_field}: {err}")
    report = ev.nonidentity_report(rel, seed=args.seed)
    doc = {
        "verdict": report.verdict,
        "max_abs_commutator": report.max_abs,
        "location": list(report.location),
        "tolerance": report.tolerance,
    }
    if args.traj:
        traj = _read_trajectory_csv(args.traj)
        if have_exprs:
            doc["identity_residual"] = ev.identity_on_structure(traj, a1, a2)
        else:
            doc["identity_residual"] = ev.identity_on_structure(
                traj, use_carried_momenta=True)
    out = _out_dir(args)
    _write_json(out / "relation.json", doc)
    print(f"verdict: {report.verdict}, max|K| = {_f(report.max_abs)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p):
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=42,
                   help="seed for the randomized zero test")
    p.add_argument("--h", type=float, default=1e-3, help="integration step")
    p.add_argument("--smax", type=float, default=1.0, help="integration horizon")
    p.add_argument("--tol", type=float, default=None, help="tolerance override")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="skewforms",
        description="Skew-symmetric form workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    forms = sub.add_parser("forms", help="exterior form operations")
    fsub = forms.add_subparsers(dest="forms_command", required=True)
    p = fsub.add_parser("d", help="exterior derivative + closure diagnostics")
    p.add_argument("--form", required=True)
    p.add_argument("--frame")
    _add_common(p)
    p.set_defaults(fn=cmd_forms_d)
    p = fsub.add_parser("wedge", help="wedge product of two forms")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_forms_wedge)
    p = fsub.add_parser("closed", help="closure test with residual form")
    p.add_argument("--form", required=True)
    p.add_argument("--frame")
    _add_common(p)
    p.set_defaults(fn=cmd_forms_closed)
    p = fsub.add_parser("loop", help="loop integral of a 1-form")
    p.add_argument("--form", required=True)
    p.add_argument("--loop", required=True)
    p.add_argument("--no-out", dest="out", action="store_const", const=None)
    _add_common(p)
    p.set_defaults(fn=cmd_forms_loop)

    p = sub.add_parser("chars", help="characteristic strip/bundle integration")
    p.add_argument("--pde", required=True)
    p.add_argument("--strip")
    p.add_argument("--bundle")
    p.add_argument("--scan-events", action="store_true",
                   help="run the Jacobian event scan on a bundle")
    p.add_argument("--du-rhs", help="override du/ds (checked by the strip residual)")
    _add_common(p)
    p.set_defaults(fn=cmd_chars)

    p = sub.add_parser("legendre", help="Legendre transform + degeneracy analysis")
    p.add_argument("--request", help="request file {m, L, domain, grid}")
    p.add_argument("--L", help="Lagrangian expression over v (or v1, v2)")
    p.add_argument("--domain", help="lo:hi[,lo:hi]")
    p.add_argument("--grid", type=int, help="samples per axis")
    _add_common(p)
    p.set_defaults(fn=cmd_legendre)

    p = sub.add_parser("evolve", help="evolutionary relation diagnostics")
    p.add_argument("--a1", help="first component over xi1, xi2")
    p.add_argument("--a2", help="second component over xi1, xi2")
    p.add_argument("--grid-field", help="grid field file")
    p.add_argument("--c1", default="A1", help="grid component for d(xi1)")
    p.add_argument("--c2", default="A2", help="grid component for d(xi2)")
    p.add_argument("--traj", help="trajectory CSV for the identity check")
    _add_common(p)
    p.set_defaults(fn=cmd_evolve)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as err:
        print(f"E_VALIDATION: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ex.EvalDomainError, ex.InconclusiveZeroTest, lg.DegeneracyError,
            ev.EvolutionError) as err:
        print(f"E_DOMAIN: {err}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
