"""``cmfib`` command line.

Exit status: 0 on success, 1 on domain errors (message on stderr), 2 on
usage errors (argparse).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import Optional, Sequence

from cmfib import cm_calculus as cm
from cmfib import fibration_lab as lab
from cmfib import ma_solver as ma
from cmfib.errors import DomainError
from cmfib.formal_poly import as_rational
from cmfib.serialize import format_real, write_json
from cmfib.tau_expr import __doc__ as _tau_doc
from cmfib.torus import TorusField, TorusGrid, read_field, write_field

_GRAMMAR = _tau_doc.split("Grammar (EBNF)::", 1)[1].split("``2i``", 1)[0].rstrip()

EPILOG = f"""\
tau expression grammar (variable b, imaginary unit i):
{_GRAMMAR}

  examples: "i", "i + 0.05*b", "2i + exp(0.1*b)", "(1+2i) / (1 - 0.1*b^2)"

FibrationData JSON (rationals as integers or "p/q" strings):
  {{
    "n": 1,                      complex fibre dimension, >= 1
    "v": "2",                    c1(L)|_Y^n, > 0
    "kl_fibre": "2",             c1(K_Y).c1(L)|_Y^(n-1); fixes s = -n kl_fibre / v
    "ell": "8",                  c1(L)^(n+1)[X]
    "k": "8",                    c1(K_X/B).c1(L)^n[X]
    "lower_order_h": null,       optional, coefficients of m^0..m^(n-2) in h(m)
    "lower_order_push": null,    optional, coefficients of m^0..m^(n-1) in deg pi_* L^m
    "s": "-1"                    optional, checked against kl_fibre
  }}

Torus fields are CSV files of N rows of N values (row j is y = j/N) with a
JSON sidecar {{"N": N, "field": name}} next to them.
"""


def _load_data(path: str) -> cm.FibrationData:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: invalid JSON ({exc})") from exc
    return cm.FibrationData.from_json(payload)


def _table(rows: Sequence[tuple[str, object]]) -> None:
    width = max(len(k) for k, _ in rows)
    for key, val in rows:
        if isinstance(val, float):
            val = format_real(val)
        print(f"{key:<{width}}  {val}")


def _maybe_write(path: Optional[str], obj) -> None:
    if path:
        write_json(path, obj)


def _grid_field(path: str, grid: Optional[int]) -> TorusField:
    fld = read_field(path)
    if grid is not None and fld.grid.N != grid:
        raise DomainError(f"{path} has N={fld.grid.N}, but --grid {grid} was requested")
    return fld


def cmd_cm_degree(args) -> int:
    data = _load_data(args.input)
    alpha = cm.alpha_degree(data)
    out = {
        "s": str(cm.compute_s(data)),
        "cm_degree": str(cm.cm_degree(data)),
        "alpha_degree": str(alpha),
        "nef_sign": "positive" if alpha > 0 else "negative" if alpha < 0 else "zero",
    }
    _table(list(out.items()))
    _maybe_write(args.out, out)
    return 0


def cmd_ch_expand(args) -> int:
    data = _load_data(args.input)
    rep = cm.ch_expand(data)
    _table([
        ("combination", str(rep.combination)),
        ("top_vanishes", str(rep.top_vanishes).lower()),
        (f"coeff m^{2 * data.n}", str(rep.m2n_coefficient)),
        ("alpha_degree", str(rep.alpha_degree)),
        ("nef_sign", rep.nef_sign),
    ])
    _maybe_write(args.out, rep.to_json())
    return 0


def cmd_twist_check(args) -> int:
    data = _load_data(args.input)
    if args.deg_a is not None:
        degs = [as_rational(args.deg_a)]
    else:
        rng = random.Random(args.seed)
        degs = [Fraction(rng.randint(-100, 100), rng.randint(1, 100)) for _ in range(args.samples)]
    cm0, a0 = cm.cm_degree(data), cm.alpha_degree(data)
    checks = []
    for d in degs:
        t = cm.twist(data, d)
        checks.append({
            "deg_a": str(d),
            "ell": str(t.ell),
            "k": str(t.k),
            "cm_degree": str(cm.cm_degree(t)),
            "alpha_degree": str(cm.alpha_degree(t)),
            "invariant": cm.cm_degree(t) == cm0 and cm.alpha_degree(t) == a0,
        })
    ok = all(c["invariant"] for c in checks)
    _table([
        ("cm_degree", str(cm0)),
        ("alpha_degree", str(a0)),
        ("twists checked", len(checks)),
        ("invariant", str(ok).lower()),
    ])
    if len(checks) == 1:
        _table([("twisted ell", checks[0]["ell"]), ("twisted k", checks[0]["k"])])
    _maybe_write(args.out, {"cm_degree": str(cm0), "alpha_degree": str(a0), "invariant": ok, "twists": checks})
    if not ok:
        print("error: twist changed the CM degree", file=sys.stderr)
        return 1
    return 0


def cmd_morita(args) -> int:
    print(cm.morita_genus(args.g, args.m))
    return 0


def cmd_ma_solve(args) -> int:
    f = _grid_field(args.f, args.grid)
    cfg = ma.SolveConfig(
        lam=args.lam,
        tol=args.tol,
        max_newton=args.max_newton,
        continuity_steps=args.continuity_steps,
        damping=args.damping,
    )
    phi0 = _grid_field(args.init, f.grid.N) if args.init else None
    rep = ma.solve_ma(f, cfg, phi0)
    _table([
        ("N", f.grid.N),
        ("lambda", cfg.lam),
        ("converged", str(rep.converged).lower()),
        ("newton iterations", max(len(rep.residual_history) - 1, 0)),
        ("final residual", rep.residual_history[-1]),
        ("min density", rep.min_density),
        ("max |phi|", rep.phi.max_abs()),
    ])
    _maybe_write(args.out, rep.to_json())
    if args.phi_out:
        write_field(args.phi_out, rep.phi, "phi")
    if not rep.converged:
        print(f"error: Newton did not reach tol={cfg.tol:g}", file=sys.stderr)
        return 1
    return 0


def cmd_ma_verify(args) -> int:
    phi = _grid_field(args.phi, None)
    f = _grid_field(args.f, phi.grid.N)
    out = {"N": phi.grid.N, "lambda": args.lam,
           "untraced_residual": ma.untraced_residual(phi, f, args.lam)}
    if args.a:
        a = _grid_field(args.a, phi.grid.N)
        out["traced_residual"] = ma.traced_residual(phi, a, args.lam)
    _table(list(out.items()))
    _maybe_write(args.out, out)
    if args.max_residual is not None and out["untraced_residual"] > args.max_residual:
        print(f"error: un-traced residual exceeds {args.max_residual:g}", file=sys.stderr)
        return 1
    return 0


def _family(args) -> lab.TauFamily:
    return lab.TauFamily(args.tau, TorusGrid(args.grid), getattr(args, "fibre_grid", 64))


def _emit_twist(args, tw: lab.TwistForm) -> int:
    write_field(args.out, tw.density, "a_density")
    _table([
        ("N", tw.density.grid.N),
        ("min density", float(tw.density.values.min())),
        ("max density", float(tw.density.values.max())),
        ("alpha (chart)", lab.alpha_from_twist(tw)),
    ])
    return 0


def cmd_lab_wp(args) -> int:
    return _emit_twist(args, lab.weil_petersson_form(_family(args)))


def cmd_lab_average(args) -> int:
    return _emit_twist(args, lab.fibre_average_a(_family(args)))


def cmd_lab_make_f(args) -> int:
    a = read_field(args.a)
    lam = ma.compute_lambda(a) if args.lam is None else args.lam
    f = ma.make_f(a, lam)
    write_field(args.out, f, "f")
    _table([("N", a.grid.N), ("lambda", lam), ("max |f|", f.max_abs())])
    _maybe_write(args.report, {"N": a.grid.N, "lambda": lam})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cmfib",
        description="CM-line-bundle calculus and twisted Monge-Ampere solver for fibrations.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_, epilog=EPILOG,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.set_defaults(func=fn)
        return sp

    sp = add("cm-degree", cmd_cm_degree, "s, CM degree, alpha degree and nef sign of FibrationData")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out")

    sp = add("ch-expand", cmd_ch_expand, "expand the Cornalba-Harris combination for E = L^m")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out")

    sp = add("twist-check", cmd_twist_check, "check CM/alpha invariance under L -> L + pi^*A")
    sp.add_argument("--input", required=True)
    sp.add_argument("--deg-a", help="degree of A; omit to draw random degrees")
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    sp = add("morita", cmd_morita, "fibre genus m^2 g - m(m+1)/2 + 1 of Morita's construction")
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)

    sp = add("ma-solve", cmd_ma_solve, "solve log(1 - Δphi/2) = lambda phi - f on the unit torus")
    sp.add_argument("--f", required=True, help="CSV field f")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--grid", type=int, help="expected N (checked against the CSV)")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-newton", type=int, default=50)
    sp.add_argument("--continuity-steps", type=int, default=1)
    sp.add_argument("--damping", type=float, default=1.0)
    sp.add_argument("--init", help="CSV initial guess for phi")
    sp.add_argument("--out", help="SolveReport JSON")
    sp.add_argument("--phi-out", help="CSV for the solution phi")

    sp = add("ma-verify", cmd_ma_verify, "un-traced (and traced) residuals of a potential")
    sp.add_argument("--phi", required=True)
    sp.add_argument("--f", required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--a", help="CSV twist density; enables the traced residual")
    sp.add_argument("--max-residual", type=float)
    sp.add_argument("--out")

    for name, fn, help_ in (
        ("lab-wp", cmd_lab_wp, "twist density -i d dbar log Im tau by finite differences"),
        ("lab-average", cmd_lab_average, "twist density as the fibrewise mean of i F_H"),
    ):
        sp = add(name, fn, help_)
        sp.add_argument("--tau", required=True, help="expression in b, see grammar below")
        sp.add_argument("--grid", type=int, default=64)
        if name == "lab-average":
            sp.add_argument("--fibre-grid", type=int, default=64)
        sp.add_argument("--out", required=True, help="CSV for the density")

    sp = add("lab-make-f", cmd_lab_make_f, "build f with (1/2) Δf = a + lambda from a twist density")
    sp.add_argument("--a", required=True)
    sp.add_argument("--lambda", dest="lam", type=float,
                    help="defaults to -mean(a), the only consistent value")
    sp.add_argument("--out", required=True)
    sp.add_argument("--report", help="JSON with N and lambda")
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
