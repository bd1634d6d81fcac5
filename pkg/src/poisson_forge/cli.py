"""Command-line front end: named verification campaigns, reports, CSV dumps.

Exit codes: 0 all requested checks PASS/PROVEN, 1 campaign failure (report
still written), 2 usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import __version__
from . import apath as ap
from . import groupoid as gp
from . import liealg as la
from . import resolution as rs
from . import symexpr as sx
from . import tensorfield as tf
from .report import FAIL, PASS, PROVEN, CheckRecord, Report, Stopwatch, Witness


@dataclass
class CampaignConfig:
    target: str
    checks: tuple = ("default",)
    samples: int = 200
    tol: float = 1e-8
    seed: int = 42
    threads: int = 1
    out_dir: str = "."

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")
        self.seed = int(self.seed) & ((1 << 64) - 1)


def _merge_config(args):
    """Config file values overridden by explicit flags (flags win)."""
    base = {}
    if getattr(args, "config", None):
        with open(args.config) as f:
            base = json.load(f)
    out = {}
    for key, default in (("samples", 200), ("tol", 1e-8), ("seed", 42),
                         ("threads", None), ("out", ".")):
        flag = getattr(args, key if key != "out" else "out", None)
        if flag is not None:
            out[key] = flag
        elif key in base:
            out[key] = base[key]
        else:
            out[key] = default
    if out["threads"] is None:
        out["threads"] = int(os.environ.get("POISSON_FORGE_THREADS", "1"))
    return out


def _run_checks(check_fns, threads):
    """Run independent named check callables, deterministic order."""
    if threads > 1 and len(check_fns) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda f: f(), check_fns))
    else:
        results = [f() for f in check_fns]
    return results


def _finish(report: Report, cfg, label):
    path = os.path.join(cfg["out"], f"{label}.report.json")
    report.write(path)
    status = "PASS" if report.passed else "FAIL"
    for r in report.records:
        res = "" if r.max_residual is None else f"  max_residual={r.max_residual:.3e}"
        print(f"[{r.status:>7}] {r.name}{res}")
    print(f"{status}: report written to {path}")
    return 0 if report.passed else 1


# -- campaign bodies -----------------------------------------------------------


def campaign_catalog_verify(key, cfg, checks=("axioms",)):
    entry = gp.catalog(key)
    rep = Report(campaign_id=f"catalog:{key}:seed{cfg['seed']}",
                 target=str(key), seed=cfg["seed"], version=__version__)
    rep.metadata["config"] = {k: cfg[k] for k in ("samples", "tol", "seed")}
    fns = []
    if "axioms" in checks or "all" in checks:
        fns.append(lambda: gp.verify_axioms(
            entry, samples=cfg["samples"], tol=cfg["tol"], seed=cfg["seed"]))
    if ("pushforward" in checks or "all" in checks) and (
            entry.omega is not None or entry.pi_total is not None):
        fns.append(lambda: gp.pushforward_check(
            entry, samples=max(1, cfg["samples"] // 2), tol=max(cfg["tol"], 1e-8),
            seed=cfg["seed"] ^ 0x11))
    if ("multiplicativity" in checks or "all" in checks) and (
            entry.omega is not None or entry.pi_total is not None):
        fns.append(lambda: gp.verify_multiplicativity(
            entry, samples=max(1, cfg["samples"] // 8), tol=max(cfg["tol"], 1e-8),
            seed=cfg["seed"] ^ 0x22))
    if ("symbolic" in checks or "all" in checks) and entry.omega is not None:
        def symbolic():
            r = Report(campaign_id="symbolic", target=str(key))
            dom = tf.exterior_derivative(entry.omega)
            ok = dom.is_zero_field()
            r.add(CheckRecord(
                name="omega_closed", status=PROVEN if ok else FAIL,
                max_residual=0.0,
                witnesses=[] if ok else [Witness((), 0.0, "d omega != 0")]))
            if isinstance(entry.pi_total, tf.MultiVectorField):
                s2 = tf.schouten(entry.pi_total, entry.pi_total)
                ok2 = s2.is_zero_field()
                r.add(CheckRecord(
                    name="jacobi_identity", status=PROVEN if ok2 else FAIL,
                    max_residual=0.0,
                    witnesses=[] if ok2 else [Witness((), 0.0, "[pi,pi] != 0")]))
            return r
        fns.append(symbolic)
    for sub in _run_checks(fns, cfg["threads"]):
        rep.extend(sub)
    rep.metadata.update(entry.metadata)
    return rep


def _build_atlas(family, params):
    if family == "r2":
        return rs.build_r2(int(params.get("k", 0)))
    if family == "springer":
        return rs.springer(int(params.get("n", 2)))
    if family == "grothendieck":
        return rs.grothendieck_sl2(float(params.get("tau", 1.5)))
    if family == "kleinian":
        return rs.kleinian(int(params.get("l", 2)))
    raise ValueError(f"unknown resolution family {family!r}")


def campaign_resolution_verify(family, params, cfg):
    atlas = _build_atlas(family, params)
    rep = rs.verify_resolution(atlas, samples=cfg["samples"], tol=cfg["tol"],
                               seed=cfg["seed"])
    rep.seed = cfg["seed"]
    rep.version = __version__
    rep.campaign_id = f"resolution:{atlas.name}:seed{cfg['seed']}"
    rep.metadata["config"] = {k: cfg[k] for k in ("samples", "tol", "seed")}
    if atlas.metadata.get("warning"):
        rep.metadata["warning"] = atlas.metadata["warning"]
    return rep


def campaign_springer(n, cfg):
    rep = Report(campaign_id=f"springer:sl{n}:seed{cfg['seed']}",
                 target=f"springer-sl{n}", seed=cfg["seed"], version=__version__)
    alg = la.LieAlgebraSL(n)
    par = la.ParabolicData(alg)
    x = la.regular_nilpotent(n) if n > 2 else la.elementary_nilpotent(2, 0, 1)
    rep.extend(la.richardson_certificate(par, x))
    rep.extend(la.lagrangian_pairing_certificate(par, x, trials=10,
                                                 seed=cfg["seed"]))
    rep.extend(campaign_resolution_verify("springer", {"n": n}, cfg))
    return rep


def campaign_kleinian(l, cfg):
    rep = Report(campaign_id=f"kleinian:l{l}:seed{cfg['seed']}",
                 target=f"kleinian-l{l}", seed=cfg["seed"], version=__version__)
    pi, chart = rs.kleinian_poisson(l)
    s2 = tf.schouten(pi, pi)
    ok = s2.is_zero_field()
    rep.add(CheckRecord(name="jacobi_identity", status=PROVEN if ok else FAIL,
                        max_residual=0.0,
                        witnesses=[] if ok else [Witness((), 0.0, "")]))
    chi = chart.parse(f"x*y - z^{l}")
    cas = all(sx.is_zero(tf.apply_field(pi, chi, chart.coordinate(i)))
              is sx.ZeroStatus.PROVEN_ZERO for i in range(3))
    rep.add(CheckRecord(name="casimir", status=PROVEN if cas else FAIL,
                        max_residual=0.0,
                        witnesses=[] if cas else [Witness((), 0.0, "")]))
    atlas = rs.kleinian(l)
    count_ok = len(atlas.curves) == l - 1
    rep.add(CheckRecord(name="exceptional_curve_count",
                        status=PASS if count_ok else FAIL,
                        max_residual=0.0,
                        note=f"{len(atlas.curves)} curve(s), expected {l - 1}",
                        witnesses=[] if count_ok else [Witness((), 0.0, "")]))
    rep.extend(campaign_resolution_verify("kleinian", {"l": l}, cfg))
    return rep


def campaign_apath(k, cfg):
    atlas = rs.build_r2(k)
    rep = ap.action_consistency(atlas, samples=min(cfg["samples"], 24),
                                tol=max(cfg["tol"], 1e-5), seed=cfg["seed"])
    rep.seed = cfg["seed"]
    rep.version = __version__
    rep.campaign_id = f"apath:r2-k{k}:seed{cfg['seed']}"
    return rep


# -- CSV emission ---------------------------------------------------------------


def emit_csv(kind, params, out_path):
    """phi-grid | fiber | path-trace, with fixed documented headers."""
    rows, header = _csv_payload(kind, params)
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    with open(out_path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(f"{v:.12g}" for v in row) + "\n")
    return out_path


def _csv_payload(kind, params):
    if kind == "phi-grid":
        n = int(params.get("grid", 10))
        lo, hi = -2.0, 2.0
        rows = []
        for i in range(n):
            for j in range(n):
                a = lo + (hi - lo) * i / max(1, n - 1)
                b = lo + (hi - lo) * j / max(1, n - 1)
                x, y = rs.r2_phi_point(a, b)
                rows.append([a, b, x, y])
        return rows, ["a", "b", "x", "y"]
    if kind == "fiber":
        atlas = rs.build_r2(0)
        target = (float(params.get("x", 1.0)), float(params.get("y", 0.0)))
        count = int(params.get("count", 5))
        rows = []
        for a, b in rs.fiber_enumerate(atlas, target, count):
            img = rs.r2_phi_point(a, b)
            res = math.hypot(img[0] - target[0], img[1] - target[1])
            rows.append([a, b, res])
        return rows, ["a", "b", "residual"]
    if kind == "path-trace":
        k = int(params.get("k", 0))
        atlas = rs.build_r2(k)
        arrow = complex(float(params.get("zre", 0.0)),
                        float(params.get("zim", 2 * math.pi)))
        path, _ = ap.dazord_arrow_path(arrow, complex(1.0, 0.0))
        rows = ap.path_trace_rows(atlas, path, (0.0, 1.0))
        return rows, ["u", "a", "b", "drift"]
    raise ValueError(f"unknown csv kind {kind!r}")


# -- atlas manifest -------------------------------------------------------------


def atlas_manifest(atlas) -> str:
    lines = [f"atlas {atlas.name}", f"flags {' '.join(atlas.flags)}",
             f"ambient {atlas.ambient.name}: "
             f"{' '.join(n for n, _ in atlas.ambient.vars)}"]
    for i, ac in enumerate(atlas.charts):
        lines.append(f"chart {i} {ac.chart.name}: "
                     f"{' '.join(n for n, _ in ac.chart.vars)}")
        for comp, (nm, _) in zip(ac.phi.components, atlas.ambient.vars):
            lines.append(f"  phi.{nm} = {sx.to_text(comp)}")
        if ac.pi is not None:
            lines.append(f"  pi = {ac.pi!r}")
        if ac.omega is not None:
            lines.append(f"  omega = {ac.omega!r}")
    for (i, j), t in sorted(atlas.transitions.items()):
        comps = "; ".join(sx.to_text(c) for c in t.components)
        lines.append(f"transition {i}->{j}: {comps}")
    for curve in atlas.curves:
        locs = "; ".join(f"chart{ci} {fix} param {par}"
                         for ci, fix, par in curve.loci)
        lines.append(f"curve {curve.name}: {locs}")
    return "\n".join(lines) + "\n"


# -- argument parsing -----------------------------------------------------------


def _add_common(p):
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)


def build_parser():
    p = argparse.ArgumentParser(
        prog="poisson-forge",
        description="Verification campaigns for explicit symplectic groupoids "
                    "and resolutions")
    sub = p.add_subparsers(dest="cmd")

    pc = sub.add_parser("catalog", help="groupoid catalog")
    csub = pc.add_subparsers(dest="sub")
    csub.add_parser("list")
    cv = csub.add_parser("verify")
    cv.add_argument("key", choices=list(gp.CATALOG_KEYS))
    cv.add_argument("--checks", default="axioms",
                    help="comma list: axioms,pushforward,multiplicativity,"
                         "symbolic,all")
    _add_common(cv)

    pr = sub.add_parser("resolution", help="resolution atlases")
    rsub = pr.add_subparsers(dest="sub")
    for name in ("build", "verify"):
        rp = rsub.add_parser(name)
        rp.add_argument("family",
                        choices=["r2", "springer", "grothendieck", "kleinian"])
        rp.add_argument("--k", type=int, default=0)
        rp.add_argument("--n", type=int, default=2)
        rp.add_argument("--l", type=int, default=2)
        rp.add_argument("--tau", type=float, default=1.5)
        if name == "build":
            rp.add_argument("--emit", choices=["phi-grid", "fiber"],
                            default=None)
            rp.add_argument("--grid", type=int, default=10)
            rp.add_argument("--count", type=int, default=5)
        _add_common(rp)

    ps = sub.add_parser("springer")
    ps.add_argument("--n", type=int, default=2)
    _add_common(ps)

    pk = sub.add_parser("kleinian")
    pk.add_argument("--l", type=int, default=2)
    _add_common(pk)

    pa = sub.add_parser("apath")
    pa.add_argument("--k", type=int, default=0)
    pa.add_argument("--emit", choices=["path-trace"], default=None)
    _add_common(pa)

    pr2 = sub.add_parser("report")
    r2sub = pr2.add_subparsers(dest="sub")
    shw = r2sub.add_parser("show")
    shw.add_argument("path")
    return p


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    if args.cmd is None:
        parser.print_usage()
        return 2
    try:
        return _dispatch(args)
    except (ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def _dispatch(args):
    if args.cmd == "catalog":
        if args.sub == "list":
            for k in gp.CATALOG_KEYS:
                print(k)
            return 0
        if args.sub == "verify":
            cfg = _merge_config(args)
            checks = tuple(args.checks.split(","))
            with Stopwatch() as sw:
                rep = campaign_catalog_verify(args.key, cfg, checks)
            rep.wall_time_s = sw.elapsed
            return _finish(rep, cfg, f"catalog-{args.key}")
        return 2
    if args.cmd == "resolution":
        if args.sub not in ("build", "verify"):
            return 2
        cfg = _merge_config(args)
        params = {"k": args.k, "n": args.n, "l": args.l, "tau": args.tau}
        if args.sub == "build":
            atlas = _build_atlas(args.family, params)
            path = os.path.join(cfg["out"], f"{atlas.name}.manifest.txt")
            os.makedirs(cfg["out"], exist_ok=True)
            with open(path, "w") as f:
                f.write(atlas_manifest(atlas))
            print(f"manifest written to {path}")
            if getattr(args, "emit", None):
                csvp = os.path.join(cfg["out"], f"{atlas.name}.{args.emit}.csv")
                emit_csv(args.emit, {"k": args.k, "grid": args.grid,
                                     "count": args.count}, csvp)
                print(f"csv written to {csvp}")
            return 0
        with Stopwatch() as sw:
            rep = campaign_resolution_verify(args.family, params, cfg)
        rep.wall_time_s = sw.elapsed
        return _finish(rep, cfg, f"resolution-{args.family}")
    if args.cmd == "springer":
        if args.n not in (2, 3):
            print("error: springer supports --n 2 or 3", file=sys.stderr)
            return 2
        cfg = _merge_config(args)
        with Stopwatch() as sw:
            rep = campaign_springer(args.n, cfg)
        rep.wall_time_s = sw.elapsed
        return _finish(rep, cfg, f"springer-sl{args.n}")
    if args.cmd == "kleinian":
        if args.l not in (2, 3):
            print("error: unsupported l (supported: 2, 3)", file=sys.stderr)
            return 2
        cfg = _merge_config(args)
        with Stopwatch() as sw:
            rep = campaign_kleinian(args.l, cfg)
        rep.wall_time_s = sw.elapsed
        return _finish(rep, cfg, f"kleinian-l{args.l}")
    if args.cmd == "apath":
        cfg = _merge_config(args)
        if args.emit == "path-trace":
            path = os.path.join(cfg["out"], "path-trace.csv")
            emit_csv("path-trace", {"k": args.k}, path)
            print(f"csv written to {path}")
            return 0
        with Stopwatch() as sw:
            rep = campaign_apath(args.k, cfg)
        rep.wall_time_s = sw.elapsed
        return _finish(rep, cfg, f"apath-r2-k{args.k}")
    if args.cmd == "report" and args.sub == "show":
        with open(args.path) as f:
            data = json.load(f)
        print(f"campaign {data['campaign_id']} target {data['target']} "
              f"seed {data['seed']}")
        for c in data["checks"]:
            res = ("" if c["max_residual"] is None
                   else f"  max_residual={c['max_residual']:.3e}")
            print(f"[{c['status']:>7}] {c['name']}{res}")
        print("passed" if data["passed"] else "FAILED")
        return 0 if data["passed"] else 1
    return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
