"""Command-line front end for distance, horofunction, convergence, detour,
mapping-class, and digraph-demo computations.

Points are JSON objects {"x":..,"y":..,"z":..}, slopes are [p, q],
measured laminations on the torus are {"slope":[a,b],"weight":w}, and
formal laminations / test-curve models use the schemas of the lamination
module.  Output is JSON (default) or CSV; errors go to standard error as
single-line JSON, with exit status 2 for contract violations and 3 for
numerical degeneracies.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import horoboundary, laminations, torus
from .errors import ContractError, DegenerateError, EvaluationError

DEFAULTS = {"depth": 2000, "tol": 1e-8, "seed": 42, "format": "json",
            "base": "3,3,3"}


def _read_config(path: str) -> dict:
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ContractError(f"config line {lineno}: expected key=value")
            k, v = line.split("=", 1)
            cfg[k.strip()] = v.strip()
    return cfg


def _settings(args) -> dict:
    s = dict(DEFAULTS)
    if getattr(args, "config", None):
        s.update(_read_config(args.config))
    for k in ("depth", "tol", "seed", "format"):
        v = getattr(args, k, None)
        if v is not None:
            s[k] = v
    if getattr(args, "base", None) is not None:
        s["base"] = args.base
    s["depth"] = int(s["depth"])
    s["tol"] = float(s["tol"])
    s["seed"] = int(s["seed"])
    if s["depth"] < 1:
        raise ContractError("depth must be >= 1")
    if not s["tol"] > 0:
        raise ContractError("tolerance must be > 0")
    if s["format"] not in ("json", "csv"):
        raise ContractError("format must be json or csv")
    return s


def _parse_point(text: str) -> torus.TracePoint:
    try:
        d = json.loads(text)
        return torus.TracePoint(float(d["x"]), float(d["y"]), float(d["z"]))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ContractError(f"malformed point JSON {text!r}") from exc


def _parse_base(text: str) -> torus.TracePoint:
    if text.lstrip().startswith("{"):
        return _parse_point(text)
    parts = text.split(",")
    if len(parts) != 3:
        raise ContractError("base must be x,y,z or a point JSON object")
    return torus.TracePoint(*(float(p) for p in parts))


def _parse_slope(text: str) -> torus.CurveSlope:
    try:
        if "/" in text:
            p, q = text.split("/", 1)
        else:
            p, q = json.loads(text)
        return torus.CurveSlope.make(int(p), int(q))
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise ContractError(f"malformed slope {text!r}") from exc


def _parse_lam(text: str) -> torus.MeasuredLam:
    try:
        d = json.loads(text)
        a, b = d["slope"]
        w = float(d.get("weight", 1.0))
        return torus.MeasuredLam(torus.ProjectiveSlope.make(float(a), float(b)), w)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ContractError(f"malformed lamination JSON {text!r}") from exc


def _parse_matrix(text: str):
    try:
        m = json.loads(text)
        g = ((int(m[0][0]), int(m[0][1])), (int(m[1][0]), int(m[1][1])))
    except (json.JSONDecodeError, TypeError, ValueError, IndexError) as exc:
        raise ContractError(f"malformed matrix JSON {text!r}") from exc
    return g


def _emit(payload: dict, fmt: str, csv_rows=None, csv_header=None):
    if fmt == "csv" and csv_rows is not None:
        out = io.StringIO()
        w = csv.writer(out)
        if csv_header:
            w.writerow(csv_header)
        for row in csv_rows:
            w.writerow(row)
        sys.stdout.write(out.getvalue())
    else:
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def _num(v):
    if v is None or isinstance(v, (int, float)):
        if isinstance(v, float) and math.isinf(v):
            return "inf"
        return v
    return float(v)


def cmd_dist(args):
    s = _settings(args)
    x = _parse_point(args.x)
    y = _parse_point(args.y)
    r1 = torus.lipschitz_distance(x, y, s["depth"])
    r2 = torus.lipschitz_distance(y, x, s["depth"])
    payload = {
        "L_xy": r1.value, "witness_xy": [r1.witness.p, r1.witness.q],
        "err_xy": r1.err_estimate,
        "L_yx": r2.value, "witness_yx": [r2.witness.p, r2.witness.q],
        "err_yx": r2.err_estimate,
    }
    rows = [["L_xy", r1.value, r1.witness.p, r1.witness.q, r1.err_estimate],
            ["L_yx", r2.value, r2.witness.p, r2.witness.q, r2.err_estimate]]
    _emit(payload, s["format"], rows,
          ["direction", "value", "witness_p", "witness_q", "err_estimate"])


def cmd_horo(args):
    s = _settings(args)
    mu = _parse_lam(args.mu)
    x = _parse_point(args.x)
    base = _parse_base(s["base"])
    r = torus.horofunction(mu, x, s["depth"], base)
    payload = {"value": r.value, "err_estimate": r.err_estimate}
    _emit(payload, s["format"], [[r.value, r.err_estimate]],
          ["value", "err_estimate"])


def cmd_converge(args):
    s = _settings(args)
    base = _parse_base(s["base"])
    if args.kind == "twist":
        param = _parse_slope(args.parameter)
    else:
        param = _parse_matrix(args.parameter)
    rows = torus.convergence_report(args.kind, param, args.n_max,
                                    depth=s["depth"], base=base)
    payload = {"rows": [list(r) for r in rows],
               "columns": ["n", "d_b_xn", "residual", "witness_p", "witness_q"]}
    _emit(payload, "csv" if s["format"] == "csv" else "json",
          rows, ["n", "d_b_xn", "residual", "witness_p", "witness_q"])


def cmd_maxset(args):
    s = _settings(args)
    x = _parse_point(args.x)
    y = _parse_point(args.y)
    slopes = torus.maxset(x, y, s["depth"], rel_tol=s["tol"])
    payload = {"maxset": [[c.p, c.q] for c in slopes]}
    _emit(payload, s["format"], [[c.p, c.q] for c in slopes], ["p", "q"])


def cmd_mcg(args):
    s = _settings(args)
    g = _parse_matrix(args.g)
    x = _parse_point(args.x)
    y = _parse_point(args.y)
    gx = torus.mcg_apply(g, x)
    gy = torus.mcg_apply(g, y)
    l0 = torus.lipschitz_distance(x, y, s["depth"]).value
    l1 = torus.lipschitz_distance(gx, gy, s["depth"]).value
    payload = {"L_xy": l0, "L_gx_gy": l1, "residual": abs(l1 - l0),
               "gx": {"x": gx.x, "y": gx.y, "z": gx.z},
               "gy": {"x": gy.x, "y": gy.y, "z": gy.z}}
    _emit(payload, s["format"], [[l0, l1, abs(l1 - l0)]],
          ["L_xy", "L_gx_gy", "residual"])


def _load(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _parse_along(spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise ContractError("--along expects kind:parameter:n_max")
    kind, param, n = parts
    if kind == "twist":
        parameter = _parse_slope(param)
    elif kind == "pa":
        parameter = _parse_matrix(param)
    else:
        raise ContractError("--along kind must be twist or pa")
    return kind, parameter, int(n)


def cmd_detour(args):
    s = _settings(args)
    sigma = laminations.FormalLamination.from_json(_load(args.sigma))
    beta = laminations.FormalLamination.from_json(_load(args.beta),
                                                  basis=sigma.basis)
    if args.model:
        model = laminations.TestCurveModel.from_json(_load(args.model),
                                                     basis=sigma.basis)
    else:
        n = len(sigma.basis.ids)
        model = laminations.TestCurveModel.make(
            sigma.basis, tuple(f"c{j + 1}" for j in range(n)),
            [[1 if j == k else 0 for k in range(n)] for j in range(n)],
            [1] * n)
    h_bs = laminations.detour_cost_closed(beta, sigma, model)
    h_sb = laminations.detour_cost_closed(sigma, beta, model)
    delta = laminations.detour_metric_closed(sigma, beta, model)
    payload = {"H_beta_sigma": _num(h_bs), "H_sigma_beta": _num(h_sb),
               "delta": _num(delta),
               "infinite": not (math.isfinite(h_bs) and math.isfinite(h_sb)),
               "note": "closed forms; along-sequence values are upper bounds on H"}
    rows = [[_num(h_bs), _num(h_sb), _num(delta), payload["infinite"]]]
    header = ["H_beta_sigma", "H_sigma_beta", "delta", "infinite"]
    if args.along:
        kind, parameter, n_max = _parse_along(args.along)
        base = _parse_base(s["base"])
        rows_conv = []
        if kind == "twist":
            mu = torus.MeasuredLam.of_curve(parameter)
            seq = torus.twist_sequence(parameter, n_max, base)
        else:
            mu = torus.MeasuredLam(torus.attracting_slope(parameter), 1.0)
            seq = torus.pa_sequence(parameter, n_max, base)
        sig_t = torus.MeasuredLam(mu.slope, float(args.scale))
        for n, xn in enumerate(seq):
            d = torus.lipschitz_distance(base, xn, s["depth"]).value
            psi = torus.horofunction(sig_t, xn, s["depth"], base).value
            rows_conv.append([n, d + psi])
        payload["along"] = rows_conv
        payload["along_note"] = ("running d(b,x_n) + Psi_sigma(x_n); an upper "
                                 "bound on H(Psi_mu, Psi_sigma)")
    _emit(payload, s["format"], rows, header)


def cmd_graph_demo(args):
    s = _settings(args)
    g = horoboundary.DigraphSpace.from_edgelist(_load(args.file))
    dist, tables = horoboundary.digraph_brute_oracle(g)
    own = g.distance_table()
    space = g.as_space()
    probes = list(range(g.n))
    psis = [horoboundary.psi(space, z, probes) for z in range(g.n)]
    exact = own == dist
    seen = {t.values for t in tables}
    for t in psis:
        if t.values not in seen:
            exact = False
    payload = {
        "n": g.n, "base": g.base,
        "distance_table": own,
        "psi_tables": [list(t.values) for t in psis],
        "exact_match": exact,
    }
    rows = [[u] + list(row) for u, row in enumerate(own)]
    _emit(payload, s["format"], rows,
          ["from"] + [str(v) for v in range(g.n)])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="horolip",
        description="Lipschitz metric, horofunctions, and detour costs on "
                    "the once-punctured torus")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--base", default=None,
                        help="base point as x,y,z or point JSON")
    common.add_argument("--config", default=None,
                        help="key=value config file; flags override")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", parents=[common],
                       help="both directed distances with witnesses")
    p.add_argument("x")
    p.add_argument("y")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("horo", parents=[common],
                       help="limiting horofunction value at a point")
    p.add_argument("mu")
    p.add_argument("x")
    p.set_defaults(func=cmd_horo)

    p = sub.add_parser("converge", parents=[common],
                       help="coordinate-function convergence along an orbit")
    p.add_argument("kind", choices=("twist", "pa"))
    p.add_argument("parameter")
    p.add_argument("n_max", type=int)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("detour", parents=[common],
                       help="closed-form detour cost and metric")
    p.add_argument("--sigma", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--along", default=None,
                   help="kind:parameter:n_max running upper bound")
    p.add_argument("--scale", type=float, default=1.0)
    p.set_defaults(func=cmd_detour)

    p = sub.add_parser("mcg", parents=[common],
                       help="mapping-class action and isometry residual")
    p.add_argument("g")
    p.add_argument("x")
    p.add_argument("y")
    p.set_defaults(func=cmd_mcg)

    p = sub.add_parser("maxset", parents=[common],
                       help="slopes within tolerance of the maximal ratio")
    p.add_argument("x")
    p.add_argument("y")
    p.set_defaults(func=cmd_maxset)

    p = sub.add_parser("graph-demo", parents=[common],
                       help="digraph demo space against the brute oracle")
    p.add_argument("file")
    p.set_defaults(func=cmd_graph_demo)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.func(args)
    except ContractError as exc:
        sys.stderr.write(json.dumps({"error": "contract", "message": str(exc)})
                         + "\n")
        return 2
    except DegenerateError as exc:
        sys.stderr.write(json.dumps({"error": "degenerate", "message": str(exc)})
                         + "\n")
        return 3
    except EvaluationError as exc:
        sys.stderr.write(json.dumps({"error": "evaluation", "message": str(exc)})
                         + "\n")
        return 3
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "io", "message": str(exc)}) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
