"""Command-line front end.

Every command builds a JSON-compatible result dict; the ``text`` and
``latex`` formats are renderings of that dict.  Exit status: 0 on success,
1 when a verification fails (a JSON diagnostic is printed), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any

import sympy as sp
from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement

from . import fvh_core, gap_pipeline, genus0, reference
from .diff_poly import DiffPoly
from .exact_algebra import FIELD, as_fraction
from .shift_ops import LaxParams


class VerificationFailure(Exception):
    def __init__(self, diagnostic: dict):
        super().__init__(diagnostic.get("error", "verification failure"))
        self.diagnostic = diagnostic


# ---------------------------------------------------------------------------
# serialisation helpers

def q(c) -> dict:
    c = as_fraction(c)
    return {"num": str(c.numerator), "den": str(c.denominator)}


def expr_json(c) -> Any:
    """Rational numbers as {num, den}; symbolic values as {expr, latex}."""
    if isinstance(c, (int, Fraction)):
        return q(c)
    if isinstance(c, (PolyElement, FracElement)):
        f = FIELD(c) if isinstance(c, PolyElement) else c
        if f.numer.is_ground and f.denom.is_ground:
            return q(f)
        e = f.as_expr()
        return {"expr": sp.sstr(e, order="lex"), "latex": sp.latex(sp.factor(e))}
    return q(c)


def jet_terms_json(f: DiffPoly) -> list:
    out = []
    for (e, kap, J), c in sorted(f.terms.items(), key=lambda t: (t[0][0], str(t[0][1]), t[0][2])):
        out.append({"eps": e, "kappa": expr_json(kap), "J": list(J), "coeff": expr_json(c)})
    return out


def _params(args, G: int = 1) -> LaxParams:
    return LaxParams(args.m, args.n, max(G, 1))


# ---------------------------------------------------------------------------
# commands

def cmd_pg(args) -> dict:
    if args.symbolic:
        sol = gap_pipeline.solve_V(None, args.genus, "symbolic_mn")
        return {"command": "pg", "mode": "symbolic",
                "P": [dict(g=g, **expr_json(p)) for g, p in enumerate(sol.P, start=1)]}
    params = _params(args, args.genus)
    sol = gap_pipeline.solve_V(params, args.genus)
    return {"command": "pg", "m": args.m, "n": args.n,
            "P": [dict(g=g, **q(p)) for g, p in enumerate(sol.P, start=1)]}


def cmd_ck(args) -> dict:
    if args.symbolic:
        mn = (FIELD.gens[0], FIELD.gens[1])
        series = gap_pipeline.c_k_series(mn, args.order)
        closed = [gap_pipeline.c_k_closed(mn, k) for k in range(args.order + 1)]
        head = {"command": "ck", "mode": "symbolic"}
    else:
        params = _params(args)
        series = gap_pipeline.c_k_series(params, args.order)
        closed = [gap_pipeline.c_k_closed(params, k) for k in range(args.order + 1)]
        head = {"command": "ck", "m": args.m, "n": args.n}
    rows = [{"k": k, "series": expr_json(a), "closed": expr_json(b), "agree": bool(a == b)}
            for k, (a, b) in enumerate(zip(series, closed))]
    head["C"] = rows
    head["agree"] = all(r["agree"] for r in rows)
    if not head["agree"]:
        raise VerificationFailure({"error": "C_k routes disagree", **head})
    return head


def cmd_rg_value(args) -> dict:
    params = _params(args, args.genus)
    val = gap_pipeline.r_g_value(params, args.genus)
    s1, s3 = gap_pipeline.sigma_pair(args.m, args.n)
    return {"command": "rg-value", "m": args.m, "n": args.n, "g": args.genus,
            "sigma1": q(s1), "sigma3": q(s3), "R": q(val)}


def cmd_rg_poly(args) -> dict:
    try:
        poly = gap_pipeline.r_g_polynomial(args.genus, args.pair_budget)
    except gap_pipeline.InterpolationError as exc:
        raise VerificationFailure({"error": str(exc), "diagnostics": exc.diagnostics}) from exc
    out = {"command": "rg-poly"}
    out.update(poly.to_json())
    return out


def cmd_mcoef(args) -> dict:
    if args.symbolic:
        Ms = fvh_core.symbolic_M1(args.genus)
        return {"command": "mcoef", "mode": "symbolic", "lambda": q(1),
                "M": [{"g": g, "terms": _m_terms(M)} for g, M in enumerate(Ms, start=1)]}
    params = _params(args, args.genus)
    lam = fvh_core.as_lambda(params, args.lam)
    if args.route == "tau":
        nf = fvh_core.m_coeffs_via_tau_symmetry(params, lam, args.genus)
    else:
        nf = fvh_core.residue_normal_form(params, lam, args.genus)
    return {"command": "mcoef", "m": args.m, "n": args.n, "lambda": q(lam), "c": q(nf.c),
            "route": args.route,
            "M": [{"g": g, "terms": _m_terms(M)} for g, M in enumerate(nf.M, start=1)]}


def _m_terms(M: DiffPoly) -> list:
    return [{"J": list(J), "coeff": expr_json(c)}
            for (_, _, J), c in sorted(M.terms.items(), key=lambda t: t[0][2], reverse=True)]


def cmd_flow(args) -> dict:
    params = _params(args, args.genus)
    lam = fvh_core.as_lambda(params, args.lam)
    try:
        flow = fvh_core.check_flow_routes(params, lam, args.genus)
    except fvh_core.RouteMismatchError as exc:
        raise VerificationFailure({"error": str(exc), "lambda": q(lam)}) from exc
    table = fvh_core.flow_coeff_table(params, lam, args.genus, flow)
    return {"command": "flow", "m": args.m, "n": args.n, "lambda": q(lam),
            "rhs": jet_terms_json(flow.rhs),
            "C_bar": [{"J": list(J), "coeff": q(c)} for J, c in sorted(table.items(), key=lambda t: (sum(t[0]), [-j for j in t[0]]))]}


def cmd_omega(args) -> dict:
    params = _params(args, args.genus)
    lam = fvh_core.as_lambda(params, args.lam)
    mu = fvh_core.as_lambda(params, args.mu)
    om = fvh_core.omega(params, lam, mu, args.genus)
    lhs, rhs = fvh_core.orproperty_sides(params, lam, mu, args.genus)
    out = {"command": "omega", "m": args.m, "n": args.n, "lambda": q(lam), "mu": q(mu),
           "omega": jet_terms_json(om),
           "symmetric": om == fvh_core.omega(params, mu, lam, args.genus),
           "orproperty": lhs == rhs}
    if not (out["symmetric"] and out["orproperty"]):
        raise VerificationFailure({"error": "omega identity failed", **out})
    return out


# ---------------------------------------------------------------------------
# verification suites

SUITES = ("evenness", "two-route", "difference-equation", "genus0", "fixtures")
DEFAULT_PAIRS = ((1, 2), (2, 3))
LAMBDAS = ("1/m", "2/m", "1/n", "1")


def suite_evenness(pairs, G) -> list:
    out = []
    for m, n in pairs:
        params = LaxParams(m, n, G)
        for lam in LAMBDAS:
            try:
                fvh_core.residue_normal_form(params, lam, G)
                ok, detail = True, None
            except fvh_core.EvennessError as exc:
                ok, detail = False, str(exc)
            out.append(_entry(f"evenness (m,n)=({m},{n}) lambda={lam}", ok, detail))
    return out


def suite_two_route(pairs, G) -> list:
    out = []
    for m, n in pairs:
        params = LaxParams(m, n, G)
        for lam in LAMBDAS:
            a = fvh_core.residue_normal_form(params, lam, G)
            b = fvh_core.m_coeffs_via_tau_symmetry(params, lam, G)
            out.append(_entry(f"residue vs tau-symmetry (m,n)=({m},{n}) lambda={lam}",
                              all(x == y for x, y in zip(a.M, b.M))))
            fa = fvh_core.flow_rhs(params, lam, G, "tau_symmetric").rhs
            fb = fvh_core.flow_rhs(params, lam, G, "lax_commutator").rhs
            out.append(_entry(f"flow routes (m,n)=({m},{n}) lambda={lam}", fa == fb))
    return out


def suite_difference_equation(pairs, G) -> list:
    out = []
    for m, n in pairs:
        rep = gap_pipeline.verify_difference_equation(LaxParams(m, n), G)
        out.append(_entry(f"difference equation (m,n)=({m},{n}) G={G}", rep.ok,
                          None if rep.ok else {"first_failing_order": rep.first_failing_order}))
    return out


def suite_genus0(pairs, G) -> list:
    out = []
    for m, n in pairs:
        params = LaxParams(m, n)
        for r in genus0.genus0_suite(params, D=3):
            out.append(_entry(f"{r['identity']} (m,n)=({m},{n})", r["status"] == "pass",
                              r.get("first_failure")))
        for r in genus0.genus1_quasitrivial_check(params):
            out.append(_entry(f"{r['identity']} (m,n)=({m},{n})", r["status"] == "pass"))
        f1 = genus0.check_F1_relation(params).to_json()
        out.append({"check": f"F1 relation report (m,n)=({m},{n})", "status": "report", "detail": f1})
    return out


def suite_fixtures() -> list:
    out = []
    sol = gap_pipeline.solve_V(None, 4, "symbolic_mn")
    for g, expected in reference.p_closed_forms().items():
        got = sol.P[g - 1]
        out.append(_entry(f"P_{g} closed form", got == expected,
                          None if got == expected else {"computed_minus_reference": expr_json(got - expected)}))
    Ms = fvh_core.symbolic_M1(2)
    for g, table in reference.m1_closed_forms().items():
        for J, expected in table.items():
            got = Ms[g - 1].coeff(0, J)
            ok = FIELD(got) == expected
            out.append(_entry(f"M_1^[{g}] coefficient of u^{list(J)}", ok,
                              None if ok else {"computed": expr_json(got), "reference": expr_json(expected)}))
    mn = (FIELD.gens[0], FIELD.gens[1])
    cs = gap_pipeline.c_k_series(mn, 2)
    for k, expected in reference.c_closed_forms().items():
        ok = FIELD(cs[k]) == expected if not isinstance(cs[k], Fraction) else FIELD(cs[k].numerator) / cs[k].denominator == expected
        out.append(_entry(f"C_{k} closed form", ok,
                          None if ok else {"computed": expr_json(cs[k]), "reference": expr_json(expected)}))
    for g in (2, 3, 4):
        poly = gap_pipeline.r_g_polynomial(g)
        expected = gap_pipeline.rg_from_sigma_basis(reference.R_SIGMA_S[g])
        keys = sorted(set(expected) | set(poly.coefficients))
        bad = [{"k": k, "l": l, "computed": q(poly.coefficients.get((k, l), 0)), "reference": q(expected.get((k, l), 0))}
               for (k, l) in keys if poly.coefficients.get((k, l), 0) != expected.get((k, l), 0)]
        out.append(_entry(f"R_{g} polynomial", not bad, bad or None))
    for m, n in DEFAULT_PAIRS:
        params = LaxParams(m, n, 2)
        for lam in LAMBDAS:
            l = fvh_core.as_lambda(params, lam)
            flow = fvh_core.flow_rhs(params, l, 2)
            for J in reference.FLOW_J:
                got = fvh_core.flow_coeff_CJ(params, l, J, 2, flow)
                exp = reference.flow_coefficient_closed_form(J, Fraction(1, m), Fraction(1, n), l)
                out.append(_entry(f"C_bar_{''.join(map(str, J))} (m,n)=({m},{n}) lambda={lam}", got == exp,
                                  None if got == exp else {"computed": q(got), "reference": q(exp)}))
    return out


def _entry(name: str, ok: bool, detail=None) -> dict:
    e = {"check": name, "status": "pass" if ok else "fail"}
    if detail is not None:
        e["detail"] = detail
    return e


def cmd_check(args) -> dict:
    pairs = [(args.m, args.n)] if args.m is not None else list(DEFAULT_PAIRS)
    for m, n in pairs:
        LaxParams(m, n)
    if args.suite == "evenness":
        results = suite_evenness(pairs, args.genus)
    elif args.suite == "two-route":
        results = suite_two_route(pairs, args.genus)
    elif args.suite == "difference-equation":
        if args.m is None:
            pairs = [(1, 2), (1, 3), (2, 3)]
        results = suite_difference_equation(pairs, args.genus)
    elif args.suite == "genus0":
        results = suite_genus0(pairs, args.genus)
    else:
        results = suite_fixtures()
    failed = [r for r in results if r["status"] == "fail"]
    out = {"command": "check", "suite": args.suite, "results": results,
           "passed": sum(r["status"] == "pass" for r in results), "failed": len(failed)}
    if failed:
        raise VerificationFailure({"error": f"{len(failed)} check(s) failed", **out})
    return out


# ---------------------------------------------------------------------------
# rendering

def render_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _fmt(v) -> str:
    if isinstance(v, dict) and set(v) == {"num", "den"}:
        return v["num"] if v["den"] == "1" else f"{v['num']}/{v['den']}"
    if isinstance(v, dict) and "expr" in v:
        return v["expr"]
    if isinstance(v, dict) and "num" in v and "den" in v:
        rest = {k: x for k, x in v.items() if k not in ("num", "den")}
        return ", ".join(f"{k}={_fmt(x)}" for k, x in rest.items()) + f": {_fmt({'num': v['num'], 'den': v['den']})}"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}={_fmt(x)}" for k, x in v.items()) + "}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def render_text(obj: dict) -> str:
    lines = []
    for key, val in obj.items():
        if isinstance(val, list) and val and isinstance(val[0], dict):
            lines.append(f"{key}:")
            lines.extend(f"  {_fmt(item)}" for item in val)
        else:
            lines.append(f"{key}: {_fmt(val)}")
    return "\n".join(lines) + "\n"


def _latex_value(v) -> str:
    if isinstance(v, dict) and "latex" in v:
        return v["latex"]
    if isinstance(v, dict) and "num" in v and "den" in v:
        num, den = v["num"], v["den"]
        sign = "-" if num.startswith("-") else ""
        return num if den == "1" else rf"{sign}\frac{{{num.lstrip('-')}}}{{{den}}}"
    return _fmt(v)


def _latex_sum(terms: list) -> str:
    out = ""
    for t in terms:
        if not out:
            out = t
        elif t.startswith("-"):
            out += " - " + t[1:]
        else:
            out += " + " + t
    return out or "0"


def _jet_latex(J) -> str:
    primes = {1: "u'", 2: "u''", 3: "u'''"}
    parts = {}
    for j in J:
        parts[j] = parts.get(j, 0) + 1
    out = []
    for j in sorted(parts, reverse=True):
        base = primes.get(j, f"u^{{({j})}}")
        out.append(base if parts[j] == 1 else f"({base})^{{{parts[j]}}}")
    return " ".join(out) or "1"


def render_latex(obj: dict) -> str:
    cmd = obj.get("command")
    lines = []
    if cmd == "pg":
        for p in obj["P"]:
            lines.append(rf"P_{{{p['g']}}} = {_latex_value(p)}")
    elif cmd == "ck":
        for r in obj["C"]:
            lines.append(rf"C_{{{r['k']}}} = {_latex_value(r['series'])}")
    elif cmd == "rg-value":
        lines.append(rf"R_{{{obj['g']}}} = {_latex_value(obj['R'])}")
    elif cmd == "rg-poly":
        terms = []
        for t in obj["coefficients"]:
            mono = "".join(s for s in (rf"\sigma_3^{{{t['k']}}}" if t["k"] else "",
                                       rf"\sigma_1^{{{t['l']}}}" if t["l"] else ""))
            terms.append(f"{_latex_value(t['coeff'])}{mono}")
        lines.append(rf"R_{{{obj['g']}}} = " + _latex_sum(terms))
    elif cmd == "mcoef":
        for M in obj["M"]:
            body = " + ".join(rf"\left({_latex_value(t['coeff'])}\right){_jet_latex(t['J'])}" for t in M["terms"])
            lines.append(rf"M^{{[{M['g']}]}} = {body}")
    elif cmd == "flow":
        for t in obj["C_bar"]:
            lines.append(rf"\overline C_{{{','.join(map(str, t['J']))}}} = {_latex_value(t['coeff'])}")
    else:
        return render_text(obj)
    return "\n".join(lines) + "\n"


RENDERERS = {"json": render_json, "text": render_text, "latex": render_latex}


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fvhgap", description="Exact FVH / gap-phenomenon computations.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_, need_mn=True, genus=True):
        sp_.add_argument("--m", type=int, required=need_mn)
        sp_.add_argument("--n", type=int, required=need_mn)
        if genus:
            sp_.add_argument("--genus", "-G", type=int, default=2)
        sp_.add_argument("--format", choices=sorted(RENDERERS), default="text")
        sp_.add_argument("--output", "-o", default=None)

    s = sub.add_parser("pg", help="P_g from the difference equation")
    common(s, need_mn=False)
    s.add_argument("--symbolic", action="store_true", help="work in QQ(m, n)")
    s.set_defaults(func=cmd_pg)

    s = sub.add_parser("ck", help="C_k by series and by the Bernoulli sum")
    common(s, need_mn=False, genus=False)
    s.add_argument("--order", "-K", type=int, default=4)
    s.add_argument("--symbolic", action="store_true")
    s.set_defaults(func=cmd_ck)

    s = sub.add_parser("rg-value", help="R_g at one (m, n)")
    common(s)
    s.set_defaults(func=cmd_rg_value)

    s = sub.add_parser("rg-poly", help="interpolate R_g(sigma_1, sigma_3)")
    common(s, need_mn=False)
    s.add_argument("--pair-budget", type=int, default=200)
    s.set_defaults(func=cmd_rg_poly)

    s = sub.add_parser("mcoef", help="M_lambda^[g] coefficients")
    common(s, need_mn=False)
    s.add_argument("--lambda", dest="lam", default="1")
    s.add_argument("--route", choices=("residue", "tau"), default="residue")
    s.add_argument("--symbolic", action="store_true", help="M_1 with symbolic m, n")
    s.set_defaults(func=cmd_mcoef)

    s = sub.add_parser("flow", help="flow right-hand side and normalised coefficients")
    common(s)
    s.add_argument("--lambda", dest="lam", default="1")
    s.set_defaults(func=cmd_flow)

    s = sub.add_parser("omega", help="two-point function Omega_{lambda, mu}")
    common(s)
    s.add_argument("--lambda", dest="lam", default="1/m")
    s.add_argument("--mu", default="1/n")
    s.set_defaults(func=cmd_omega)

    s = sub.add_parser("check", help="run a verification suite")
    common(s, need_mn=False)
    s.add_argument("--suite", choices=SUITES, required=True)
    s.set_defaults(func=cmd_check)
    return p


def _validate(args, parser) -> None:
    needs = args.command in ("rg-value", "flow", "omega") or (
        args.command in ("pg", "ck", "mcoef") and not getattr(args, "symbolic", False))
    if needs and (args.m is None or args.n is None):
        parser.error("--m and --n are required")
    if (args.m is None) != (args.n is None):
        parser.error("--m and --n must be given together")
    if getattr(args, "genus", 0) < 0 or getattr(args, "order", 0) < 0:
        parser.error("bounds must be non-negative")
    if args.command in ("rg-value", "rg-poly") and args.genus < 2:
        parser.error("--genus must be at least 2")
    if args.m is not None:
        try:
            LaxParams(args.m, args.n)
        except ValueError as exc:
            parser.error(str(exc))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(args, parser)
    try:
        result = args.func(args)
        code = 0
    except VerificationFailure as exc:
        result = exc.diagnostic
        code = 1
    except (ArithmeticError, ValueError) as exc:
        result = {"error": f"{type(exc).__name__}: {exc}"}
        code = 1
    text = render_json(result) if code else RENDERERS[args.format](result)
    if args.output and code == 0:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
