"""Command-line entry point.

One binary, subcommand style: ``validate``, ``units``, ``twins``,
``spectrum``, ``contract``, ``simulate``, ``stability``.  Standard output
carries the primary report; files (``-o``) carry bulk data such as
trajectories and eigenvector matrices.  Every output embeds the tool
version, the input content hash, and the full parameter set, so identical
invocations are byte-identical.

Exit codes: 0 success, 2 input/structure error, 3 numeric failure,
4 hypotheses not met, 64 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import hypergraph as hg
from . import stability as st
from .dynamics import (
    PRESETS,
    SYNC_TOL,
    NodeDynamics,
    simulate_continuous,
    simulate_discrete,
    sync_report,
)
from .errors import HypersyncError, ParseError, UsageError
from .operator import build_operator, spectrum
from .units import find_twins, find_units, twin_classes, unit_of, contract

EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    """argparse that exits 64 on usage errors instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# -- shared plumbing ----------------------------------------------------------


def _sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load(path):
    try:
        return hg.load(path), _sha256(path)
    except FileNotFoundError as exc:
        raise ParseError(f"cannot read input: {exc}") from exc


def _meta(args, sha, params):
    return {
        "tool": "hypersync",
        "version": __version__,
        "input": os.path.basename(args.input),
        "input_sha256": sha,
        "parameters": params,
    }


def _emit_json(doc, path=None):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    print(text, end="")
    return 0


def _csv_header_lines(meta):
    lines = [f"# tool: hypersync {meta['version']}",
             f"# input: {meta['input']} sha256={meta['input_sha256']}"]
    params = meta["parameters"]
    for k in sorted(params):
        lines.append(f"# {k}: {params[k]}")
    return lines


def _fmt(x):
    # snap tiny magnitudes so -0.000000000 never appears
    v = round(float(x), 9) + 0.0
    return f"{v:.9f}"


def _parse_dynamics(spec):
    """``preset[:k=v,...]`` -> NodeDynamics.

    ``linear`` takes ``alpha`` (diffusion map slope) and optional ``beta``
    (self map slope, defaults to alpha); ``logistic`` takes ``a``.
    """
    name, _, tail = spec.partition(":")
    if name not in PRESETS:
        raise UsageError(f"unknown dynamics preset {name!r}",
                         choices=sorted(PRESETS))
    params = {}
    if tail:
        for item in tail.split(","):
            key, _, val = item.partition("=")
            if not val:
                raise UsageError(f"malformed dynamics parameter {item!r}")
            try:
                params[key] = float(val)
            except ValueError as exc:
                raise UsageError(f"non-numeric dynamics parameter {item!r}") from exc
    if name == "linear":
        alpha = params.pop("alpha", params.pop("a", 1.0))
        beta = params.pop("beta", None)
        if params:
            raise UsageError(f"unknown linear parameters {sorted(params)}")
        from .dynamics import linear_map
        f = linear_map(alpha)
        g = linear_map(beta) if beta is not None else f
        return NodeDynamics(f, g)
    if name == "logistic":
        a = params.pop("a", 4.0)
        if params:
            raise UsageError(f"unknown logistic parameters {sorted(params)}")
        from .dynamics import logistic_map
        m = logistic_map(a)
        return NodeDynamics(m, m)
    if params:
        raise UsageError(f"preset {name!r} takes no parameters")
    m = PRESETS[name]()
    return NodeDynamics(m, m)


def _resolve_cluster(hypergraph, spec):
    """``--cluster`` value -> member tuple: either comma-separated labels or a
    single label naming the unit that contains it."""
    labels = [t.strip() for t in spec.split(",") if t.strip()]
    if not labels:
        raise UsageError("empty --cluster")
    for v in labels:
        if v not in hypergraph.index:
            raise UsageError(f"unknown vertex {v!r} in --cluster")
    if len(labels) == 1:
        return tuple(sorted(unit_of(hypergraph, labels[0]).members))
    return tuple(sorted(labels))


def _resolve_seed(args):
    if args.seed is not None:
        return int(args.seed)
    return int.from_bytes(os.urandom(4), "big")


# -- subcommands --------------------------------------------------------------


def cmd_validate(args):
    H, sha = _load(args.input)
    rank, corank = H.rank_corank()
    doc = {
        "meta": _meta(args, sha, {}),
        "valid": True,
        "n_vertices": len(H.vertices),
        "n_edges": len(H.edges),
        "rank": rank,
        "corank": corank,
    }
    return _emit_json(doc, args.output)


def cmd_units(args):
    H, sha = _load(args.input)
    units = find_units(H)
    doc = {
        "meta": _meta(args, sha, {}),
        "units": [
            {"members": sorted(u.members), "generating_set": sorted(u.generating_set)}
            for u in units
        ],
    }
    return _emit_json(doc, args.output)


def cmd_twins(args):
    H, sha = _load(args.input)
    units = find_units(H)
    pairs = find_twins(H, units)
    classes = twin_classes(H, units)
    doc = {
        "meta": _meta(args, sha, {}),
        "twins": [
            {
                "first": sorted(p.first.members),
                "second": sorted(p.second.members),
                "bijection": dict(sorted(p.bijection.items())),
                "sigma_preserving": p.sigma_preserving,
            }
            for p in pairs
        ],
        "classes": [[sorted(u.members) for u in cls] for cls in classes],
    }
    return _emit_json(doc, args.output)


def cmd_spectrum(args):
    H, sha = _load(args.input)
    spec = spectrum(build_operator(H))
    meta = _meta(args, sha, {})
    buf = io.StringIO()
    for line in _csv_header_lines(meta):
        print(line, file=buf)
    print("index,eigenvalue", file=buf)
    for i, lam in enumerate(spec.eigenvalues):
        print(f"{i},{_fmt(lam)}", file=buf)
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        root, ext = os.path.splitext(args.output)
        vec_path = f"{root}.vectors{ext or '.csv'}"
        with open(vec_path, "w") as fh:
            for line in _csv_header_lines(meta):
                print(line, file=fh)
            print("vertex," + ",".join(f"z{i}" for i in range(H.n)), file=fh)
            for r, v in enumerate(H.vertices):
                row = ",".join(_fmt(x) for x in spec.eigenvectors[r])
                print(f"{v},{row}", file=fh)
    print(text, end="")
    return 0


def cmd_contract(args):
    H, sha = _load(args.input)
    con = contract(H, c_V=args.cv, c_E=args.ce)
    doc = {
        "meta": _meta(args, sha, {"cv": args.cv, "ce": args.ce}),
        "quotient": con.quotient.to_dict(),
        "vertex_map": dict(sorted(con.vertex_map.items())),
        "edge_map": dict(sorted(con.edge_map.items())),
        "lifted_edge_weight": dict(sorted(con.lifted_edge_weight.items())),
    }
    return _emit_json(doc, args.output)


def _initial_state(H, dyn, args, cluster, rng):
    lo, hi = dyn.interval
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = -1.0, 1.0
    if args.x0:
        with open(args.x0) as fh:
            raw = json.load(fh)
        if isinstance(raw, dict):
            missing = [v for v in H.vertices if v not in raw]
            if missing:
                raise ParseError("initial state misses vertices", missing=missing)
            return np.array([float(raw[v]) for v in H.vertices])
        if len(raw) != H.n:
            raise ParseError("initial state has the wrong length",
                             expected=H.n, got=len(raw))
        return np.array([float(x) for x in raw])
    x = rng.uniform(lo, hi, H.n)
    if cluster:
        value = args.x0_value if args.x0_value is not None else rng.uniform(lo, hi)
        idx = [H.index[v] for v in cluster]
        if args.x0_noise > 0:
            x = np.clip(value + rng.uniform(-args.x0_noise, args.x0_noise, H.n),
                        lo, hi)
        x[idx] = value
    return x


def cmd_simulate(args):
    H, sha = _load(args.input)
    dyn = _parse_dynamics(args.dynamics)
    seed = _resolve_seed(args)
    cluster = _resolve_cluster(H, args.cluster) if args.cluster else None
    rng = np.random.default_rng(seed)
    x0 = _initial_state(H, dyn, args, cluster, rng)
    params = {
        "mode": args.mode, "eps": args.eps, "seed": seed, "tol": args.tol,
        "dynamics": dyn.describe(), "stride": args.stride,
    }
    if args.mode == "discrete":
        params["steps"] = args.steps
        traj = simulate_discrete(H, dyn, args.eps, x0, args.steps,
                                 stride=args.stride)
    else:
        params["t_end"] = args.t_end
        params["dt"] = args.dt
        traj = simulate_continuous(H, dyn, args.eps, x0, args.t_end,
                                   dt=args.dt, stride=args.stride)
    meta = _meta(args, sha, params)

    if args.output:
        with open(args.output, "w") as fh:
            for line in _csv_header_lines(meta):
                print(line, file=fh)
            print("t," + ",".join(H.vertices), file=fh)
            for t, row in zip(traj.times, traj.states):
                t_txt = str(int(t)) if args.mode == "discrete" else f"{t:.6f}"
                print(t_txt + "," + ",".join(repr(float(x)) for x in row),
                      file=fh)

    report_cluster = cluster or tuple(H.vertices)
    rep = sync_report(traj, report_cluster, tol=args.tol)
    doc = {
        "meta": meta,
        "sync_report": {
            "cluster": list(rep.cluster),
            "asymptotic": rep.asymptotic,
            "final_spread": rep.final_spread,
            "max_spread": float(np.max(rep.spread)),
            "tol": rep.tol,
        },
    }
    return _emit_json(doc)


def _cluster_report(H, cluster, dyn, eps, mode):
    members = frozenset(cluster)
    units = find_units(H)
    for u in units:
        if u.members == members:
            fn = (st.discrete_unit_stability if mode == "discrete"
                  else st.continuous_unit_stability)
            check = fn(H, u, dyn, eps)
            return {"cluster": sorted(members), "kind": "unit",
                    "checks": [check.to_dict()], "pass": check.passed}
    for p in find_twins(H, units):
        if p.first.members | p.second.members == members:
            fn = (st.discrete_twin_stability if mode == "discrete"
                  else st.continuous_twin_stability)
            rep = fn(H, p, dyn, eps)
            return {"cluster": sorted(members), "kind": "twin-union",
                    "checks": [c.to_dict() for c in rep.checks],
                    "pass": rep.passed}
    raise UsageError("--cluster is neither a unit nor a twin-pair union",
                     cluster=sorted(members))


def _sweep(args, evaluate):
    try:
        lo_s, hi_s, n_s = args.sweep_eps.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
        if n < 2 or hi <= lo:
            raise ValueError
    except ValueError:
        raise UsageError("--sweep-eps expects lo:hi:n with n >= 2")
    rows = []
    for e in np.linspace(lo, hi, n):
        rows.append((float(e), evaluate(float(e))))
    return rows


def cmd_stability(args):
    H, sha = _load(args.input)
    dyn = _parse_dynamics(args.dynamics)
    params = {"eps": args.eps, "dynamics": dyn.describe(), "mode": args.mode,
              "cv": args.cv, "ce": args.ce}
    meta = _meta(args, sha, params)

    if args.sweep_eps:
        if args.certify_full:
            def margin(e):
                rep = st.contraction_stability_certificate(
                    H, dyn, e, c_V=args.cv, c_E=args.ce, model=args.mode)
                return min(c.margin for c in rep.checks)
        elif args.cluster:
            cluster = _resolve_cluster(H, args.cluster)

            def margin(e):
                rep = _cluster_report(H, cluster, dyn, e, args.mode)
                return min(c["rhs"] - c["lhs"] for c in rep["checks"])
        else:
            raise UsageError("--sweep-eps needs --cluster or --certify-full")
        rows = _sweep(args, margin)
        buf = io.StringIO()
        for line in _csv_header_lines(meta):
            print(line, file=buf)
        print("eps,min_margin,pass", file=buf)
        for e, m in rows:
            print(f"{e:.9f},{_fmt(m)},{str(m > 0).lower()}", file=buf)
        text = buf.getvalue()
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        print(text, end="")
        return 0

    if args.certify_full:
        rep = st.contraction_stability_certificate(
            H, dyn, args.eps, c_V=args.cv, c_E=args.ce, model=args.mode)
        return _emit_json({"meta": meta, "report": rep.to_dict()}, args.output)

    reports = []
    if args.all:
        units = find_units(H)
        for u in units:
            if len(u) >= 2:
                reports.append(_cluster_report(H, tuple(u.members), dyn,
                                               args.eps, args.mode))
        for p in find_twins(H, units):
            reports.append(_cluster_report(
                H, tuple(p.first.members | p.second.members), dyn,
                args.eps, args.mode))
    elif args.cluster:
        reports.append(_cluster_report(H, _resolve_cluster(H, args.cluster),
                                       dyn, args.eps, args.mode))
    else:
        raise UsageError("stability needs --cluster, --all, or --certify-full")
    return _emit_json({"meta": meta, "reports": reports}, args.output)


# -- wiring -------------------------------------------------------------------


def _build_parser():
    parser = _Parser(prog="hypersync",
                     description="spectral analysis of synchronization-"
                                 "preserving clusters on weighted hypergraphs")
    parser.add_argument("--version", action="version",
                        version=f"hypersync {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output=True):
        p.add_argument("-i", "--input", required=True,
                       help="hypergraph JSON file")
        if output:
            p.add_argument("-o", "--output", default=None,
                           help="write the report here as well as stdout")

    common(sub.add_parser("validate", help="structural validation"))
    common(sub.add_parser("units", help="list units"))
    common(sub.add_parser("twins", help="list twin pairs and classes"))
    common(sub.add_parser("spectrum",
                          help="eigenvalue CSV (+ eigenvector matrix with -o)"))

    p = sub.add_parser("contract", help="contract units to a quotient")
    common(p)
    p.add_argument("--cv", type=float, default=1.0, help="vertex weight scale")
    p.add_argument("--ce", type=float, default=1.0, help="edge weight scale")

    p = sub.add_parser("simulate", help="run coupled node dynamics")
    common(p)
    p.add_argument("--mode", choices=("discrete", "continuous"),
                   default="discrete")
    p.add_argument("--eps", type=float, default=0.1, help="coupling strength")
    p.add_argument("--steps", type=int, default=1000,
                   help="discrete step count")
    p.add_argument("--t-end", type=float, default=10.0,
                   help="continuous end time")
    p.add_argument("--dt", type=float, default=1e-3,
                   help="continuous step size")
    p.add_argument("--stride", type=int, default=1, help="recording stride")
    p.add_argument("--tol", type=float, default=SYNC_TOL,
                   help="sync spread tolerance")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dynamics", default="logistic:a=4",
                   help="preset[:k=v,...], e.g. linear:alpha=1,beta=0.2")
    p.add_argument("--cluster", default=None,
                   help="comma-separated members, or one label for its unit")
    p.add_argument("--x0", default=None,
                   help="JSON file with the initial state")
    p.add_argument("--x0-value", type=float, default=None,
                   help="exact common start value on --cluster")
    p.add_argument("--x0-noise", type=float, default=0.1,
                   help="amplitude of the off-cluster spread around the value")

    p = sub.add_parser("stability", help="bound checks and certificates")
    common(p)
    p.add_argument("--mode", choices=("discrete", "continuous"),
                   default="discrete")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--dynamics", default="logistic:a=4")
    p.add_argument("--cluster", default=None)
    p.add_argument("--all", action="store_true",
                   help="report every unit and twin union")
    p.add_argument("--certify-full", action="store_true",
                   help="contraction-based full-spectrum certificate")
    p.add_argument("--cv", type=float, default=1.0)
    p.add_argument("--ce", type=float, default=1.0)
    p.add_argument("--sweep-eps", default=None, metavar="LO:HI:N",
                   help="emit a CSV of bound margins over a coupling range")
    p.add_argument("--seed", type=int, default=None)

    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "units": cmd_units,
    "twins": cmd_twins,
    "spectrum": cmd_spectrum,
    "contract": cmd_contract,
    "simulate": cmd_simulate,
    "stability": cmd_stability,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "steps", None) is not None and args.command == "simulate":
        if args.mode == "discrete" and args.steps <= 0:
            parser.error("--steps must be positive")
        if args.mode == "continuous" and args.t_end <= 0:
            parser.error("--t-end must be positive")
        if getattr(args, "stride", 1) <= 0:
            parser.error("--stride must be positive")
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hypersync: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypersyncError as exc:
        diag = {"error": exc.code, "message": str(exc)}
        if exc.details:
            diag["details"] = {k: _jsonable(v) for k, v in exc.details.items()}
        print(json.dumps(diag, indent=2, sort_keys=True, default=str))
        return exc.exit_code


def _jsonable(v):
    if isinstance(v, (frozenset, set, tuple)):
        return sorted(v) if isinstance(v, (frozenset, set)) else list(v)
    if isinstance(v, np.generic):
        return v.item()
    return v


if __name__ == "__main__":
    raise SystemExit(main())
