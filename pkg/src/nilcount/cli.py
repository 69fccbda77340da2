"""Command line interface.

Commands: count, shell, average-shell, sweep, predict, spectral, phase,
lattice-check, sharpness, poisson, volume, selftest.  Results print as JSON;
--out DIR additionally writes CSV/JSON artifacts, a gnuplot companion script
where a plot makes sense, and a manifest.json recording the config hash and
version.  Exit codes: 0 success, 1 usage/config error, 2 assertion failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, analysis, lattices, norms, spectral
from .config import Config, ConfigError, config_hash, parse_config, serialize_config
from .counting import (
    average_shell_count,
    brute_force_count,
    count_ball,
    count_ball_centered,
    count_lattice_ball,
    count_shell,
    delta_scale,
    sharpness_probe_alpha2,
)
from .groups import point
from .phases import van_der_corput_check, verify_phase_lemmas


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit2(message)


class SystemExit2(Exception):
    def __init__(self, message):
        super().__init__(message)
        self.message = message


def _radius_arg(text: str):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        return float(text)


def _parse_center(text: str):
    try:
        xs, ts = text.split(";")
        x = [Fraction(v) for v in xs.split(",") if v.strip()]
        t = [Fraction(v) for v in ts.split(",") if v.strip()]
        return point(x, t)
    except Exception as e:
        raise SystemExit2(f"--center must look like 'x1,x2;t1' with rational entries: {e}")


class OutputSink:
    """Stdout JSON plus optional --out artifacts with a manifest."""

    def __init__(self, out_dir, command, cfg: Config | None, argv):
        self.dir = Path(out_dir) if out_dir else None
        self.command = command
        self.cfg = cfg
        self.argv = argv
        self.files = []
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def emit(self, payload: dict):
        print(json.dumps(payload, indent=2, default=_json_default))
        if self.dir:
            path = self.dir / f"{self.command}.json"
            path.write_text(json.dumps(payload, indent=2, default=_json_default))
            self.files.append(path.name)

    def write_csv(self, name: str, header, rows):
        if not self.dir:
            return
        path = self.dir / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        self.files.append(name)

    def write_gnuplot(self, name: str, script: str):
        if not self.dir:
            return
        (self.dir / name).write_text(script)
        self.files.append(name)

    def finish(self):
        if not self.dir:
            return
        manifest = {
            "command": self.command,
            "argv": self.argv,
            "version": __version__,
            "config_sha256": config_hash(self.cfg) if self.cfg else None,
            "outputs": self.files,
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
        }
        (self.dir / "manifest.json").write_text(json.dumps(manifest, indent=2))


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if dataclasses.is_dataclass(o):
        return dataclasses.asdict(o)
    if isinstance(o, (np.floating, np.integer)):
        return float(o)
    raise TypeError(f"not JSON-serializable: {type(o)}")


def _workers(cfg: Config, override):
    if override is not None:
        return int(override)
    env = os.environ.get("NILCOUNT_WORKERS")
    if env:
        return int(env)
    return cfg.run.workers


def build_parser() -> _Parser:
    ap = _Parser(prog="nilcount", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", required=True, help="JSON config path or inline JSON")
        p.add_argument("--out", default=None, help="directory for CSV/JSON artifacts")
        p.add_argument("--workers", type=int, default=None)
        return p

    c = with_config(sub.add_parser("count", help="lattice points in a ball"))
    c.add_argument("--radius", required=True, type=_radius_arg)
    c.add_argument("--center", default=None, help="'x1,..;t1,..' group point")
    c.add_argument("--shell", type=_radius_arg, default=None, metavar="DELTA")
    c.add_argument("--backend", choices=("auto", "compiled", "pure"), default="auto")

    s = with_config(sub.add_parser("shell", help="points in a shell of width 2*delta"))
    s.add_argument("--radius", required=True, type=_radius_arg)
    s.add_argument("--delta", required=True, type=_radius_arg)

    a = with_config(sub.add_parser("average-shell", help="averaged pair shell count"))
    a.add_argument("--T", required=True, type=float)
    a.add_argument("--radius", required=True, type=float)
    a.add_argument("--delta", required=True, type=float)

    w = with_config(sub.add_parser("sweep", help="discrepancy sweep over radii"))
    w.add_argument("--rmin", type=float, default=10.0)
    w.add_argument("--rmax", type=float, default=200.0)
    w.add_argument("--points", type=int, default=40)
    w.add_argument("--fit", action="store_true", default=True)
    w.add_argument("--no-fit", dest="fit", action="store_false")

    pr = sub.add_parser("predict", help="predicted discrepancy exponents")
    pr.add_argument("--q", type=int, required=True)
    pr.add_argument("--m", type=int, required=True)
    pr.add_argument("--alpha", type=float, required=True)
    pr.add_argument("--out", default=None)

    sp = with_config(sub.add_parser("spectral", help="transform decay along a ray"))
    sp.add_argument("--ray", choices=("w-axis", "s-axis", "fixed-ratio"), required=True)
    sp.add_argument("--ratio", type=float, default=1.0)
    sp.add_argument("--lmin", type=float, default=10.0)
    sp.add_argument("--lmax", type=float, default=1000.0)
    sp.add_argument("--points", type=int, default=64)

    ph = sub.add_parser("phase", help="phase-function lemma verification")
    ph.add_argument("action", choices=("verify",))
    ph.add_argument("--alpha", type=float, required=True)
    ph.add_argument("--regime", choices=("case-i", "case-ii"), required=True)
    ph.add_argument("--samples", type=int, default=50)
    ph.add_argument("--grid", type=int, default=10_000)
    ph.add_argument("--seed", type=int, default=0)
    ph.add_argument("--out", default=None)

    lc = with_config(sub.add_parser("lattice-check", help="subgroup certificate"))

    sh = with_config(sub.add_parser("sharpness", help="alpha=2 count plateaux"))
    sh.add_argument("--nmax", type=int, default=100)

    po = with_config(sub.add_parser("poisson", help="dual-sum envelope estimate"))
    po.add_argument("--radius", type=float, required=True)
    po.add_argument("--eps", default="auto")
    po.add_argument("--cap1", type=int, default=None)
    po.add_argument("--cap2", type=int, default=None)

    v = with_config(sub.add_parser("volume", help="closed-form and MC ball volume"))
    v.add_argument("--radius", type=float, default=1.0)
    v.add_argument("--mc", type=int, default=0, help="Monte Carlo samples (0: skip)")

    st = sub.add_parser("selftest", help="brute-force oracle suite at small radius")
    st.add_argument("--fast", action="store_true")
    st.add_argument("--out", default=None)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit2 as e:
        print(f"error: {e.message}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --version / --help
        return 0 if e.code in (0, None) else 1
    try:
        return _dispatch(args, argv)
    except SystemExit2 as e:
        print(f"error: {e.message}", file=sys.stderr)
        return 1
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except AssertionError as e:
        print(f"assertion failed: {e}", file=sys.stderr)
        return 2


def _load_config(args) -> Config:
    return parse_config(args.config)


def _dispatch(args, argv) -> int:
    cmd = args.command
    cfg = _load_config(args) if hasattr(args, "config") else None
    sink = OutputSink(getattr(args, "out", None), cmd, cfg, argv)
    code = 0

    if cmd == "count":
        workers = _workers(cfg, args.workers)
        t0 = time.perf_counter()
        if args.shell is not None:
            reduced = lattices.reduce(cfg.norm, cfg.lattice)
            res = count_shell(reduced, cfg.norm.alpha, args.radius, args.shell,
                              workers=workers, backend=args.backend)
            payload = {
                "count": res.count, "outer": res.outer.count, "inner": res.inner.count,
                "boundary_hits": res.outer.boundary_hits + res.inner.boundary_hits,
                "wall_ms": (time.perf_counter() - t0) * 1e3,
            }
        elif args.center:
            center = _parse_center(args.center)
            res = count_ball_centered(cfg.group, cfg.norm, cfg.lattice,
                                      args.radius, center, workers=workers)
            payload = _count_payload(cfg, args.radius, res)
        else:
            res = count_lattice_ball(cfg.norm, cfg.lattice, radius=args.radius,
                                     workers=workers, backend=args.backend,
                                     tol=cfg.run.boundary_tol)
            payload = _count_payload(cfg, args.radius, res)
        sink.emit(payload)

    elif cmd == "shell":
        reduced = lattices.reduce(cfg.norm, cfg.lattice)
        res = count_shell(reduced, cfg.norm.alpha, args.radius, args.delta,
                          workers=_workers(cfg, args.workers))
        sink.emit({"count": res.count, "outer": res.outer.count, "inner": res.inner.count})

    elif cmd == "average-shell":
        val = average_shell_count(cfg.group, cfg.lattice, cfg.norm, args.T,
                                  args.radius, args.delta, budget=cfg.run.average_budget)
        sink.emit({"T": args.T, "radius": args.radius, "delta": args.delta,
                   "normalized_pairs": val})

    elif cmd == "sweep":
        radii = analysis.dyadic_radii(args.rmin, args.rmax, args.points)
        res = analysis.sweep(cfg.norm, cfg.lattice, radii,
                             workers=_workers(cfg, args.workers), fit=args.fit)
        rows = [(r.R, r.count, f"{r.volume!r}", f"{r.abs_error!r}", f"{r.rel_discrepancy!r}")
                for r in res.records]
        sink.write_csv("sweep.csv", ("R", "count", "volume", "abs_err", "rel_disc"), rows)
        sink.write_gnuplot("sweep.gp", _GP_SWEEP)
        payload = res.to_json()
        payload["records"] = payload["records"][:5] + (["..."] if len(res.records) > 5 else [])
        sink.emit(payload)

    elif cmd == "predict":
        t = analysis.predicted_exponents(args.q, args.m, args.alpha)
        sink.emit(t.to_json())

    elif cmd == "spectral":
        grid = np.geomspace(args.lmin, args.lmax, args.points)
        fit = spectral.decay_fit(cfg.norm.alpha_f, cfg.group.q, cfg.group.m,
                                 args.ray, grid, ratio=args.ratio)
        env_x = set(fit.fit.window_x)
        rows = [(lam, f"{val!r}", int(lam in env_x))
                for lam, val in zip(fit.lambdas, fit.values)]
        sink.write_csv("spectral.csv", ("lambda", "value", "envelope_flag"), rows)
        sink.write_gnuplot("spectral.gp", _GP_SPECTRAL)
        sink.emit(fit.to_json())

    elif cmd == "phase":
        rng = np.random.default_rng(args.seed)
        pairs = _phase_lambda_pairs(args.alpha, args.regime, args.samples, rng)
        reports = verify_phase_lemmas(args.alpha, pairs, args.grid)
        ok = all(r.all_passed for r in reports)
        sink.emit({
            "alpha": args.alpha, "regime": args.regime, "samples": len(pairs),
            "all_passed": ok,
            "d_alpha_min": min((r.d_alpha for r in reports if r.d_alpha is not None), default=None),
            "reports": [r.to_json() for r in reports[:3]] + (["..."] if len(reports) > 3 else []),
        })
        if not ok:
            code = 2

    elif cmd == "lattice-check":
        cert = lattices.is_subgroup(cfg.group, cfg.lattice)
        payload = cert.to_json()
        payload["covolume"] = cfg.lattice.covolume()
        sink.emit(payload)

    elif cmd == "sharpness":
        reduced = lattices.reduce(cfg.norm, cfg.lattice)
        c = lattices.delta_rational(reduced.Mt1, reduced.Mt2)
        if c is None:
            raise SystemExit2("sharpness needs delta-rational (rational) Mt = M L")
        rep = sharpness_probe_alpha2(delta_scale(reduced, c), args.nmax,
                                     workers=_workers(cfg, args.workers))
        sink.emit({
            "n_max": rep.n_max, "all_equal": rep.all_equal, "scaling_c": str(c),
            "failures": list(rep.failures[:10]),
            "max_volume_jump": rep.max_jump(),
            "verified_equalities": rep.n_max - len(rep.failures),
        })
        if not rep.all_equal:
            code = 2

    elif cmd == "poisson":
        eps = None if args.eps == "auto" else float(args.eps)
        rep = analysis.poisson_estimate(cfg.norm, cfg.lattice, args.radius, eps,
                                        cap1=args.cap1, cap2=args.cap2)
        payload = rep.to_json()
        res = count_lattice_ball(cfg.norm, cfg.lattice, radius=_radius_arg(str(args.radius)),
                                 workers=_workers(cfg, args.workers))
        vol = norms.ball_volume(cfg.norm, args.radius) / cfg.lattice.covolume()
        measured = abs(res.count - vol) / vol
        payload["measured_rel_discrepancy"] = measured
        payload["dominates"] = bool(rep.combined >= measured)
        sink.emit(payload)

    elif cmd == "volume":
        vol = norms.ball_volume(cfg.norm, args.radius)
        payload = {"radius": args.radius, "closed_form": vol}
        if args.mc:
            est, se = norms.ball_volume_mc(cfg.norm, args.radius, args.mc, cfg.run.seed)
            payload.update({"mc_estimate": est, "mc_stderr": se,
                            "within_3se": bool(abs(est - vol) <= 3 * se)})
        sink.emit(payload)

    elif cmd == "selftest":
        ok, lines = _selftest(fast=args.fast)
        for line in lines:
            print(line)
        sink.emit({"passed": ok, "checks": len(lines)})
        if not ok:
            code = 2

    sink.finish()
    return code


def _count_payload(cfg: Config, radius, res) -> dict:
    vol = norms.ball_volume(cfg.norm, float(radius)) / cfg.lattice.covolume()
    abs_err = abs(res.count - vol)
    return {
        "count": res.count,
        "volume": vol,
        "abs_error": abs_err,
        "rel_discrepancy": abs_err / vol,
        "boundary_hits": res.boundary_hits,
        "mode": res.mode,
        "backend": res.backend,
        "wall_ms": res.wall_ms,
    }


def _phase_lambda_pairs(alpha, regime, n, rng):
    from .spectral import c_alpha

    ca = c_alpha(alpha)
    pairs = []
    for _ in range(n):
        lam2 = 10.0 ** rng.uniform(0, 2)
        ratio = 10.0 ** rng.uniform(0, 2) if regime == "case-i" else 10.0 ** rng.uniform(-2, 0) * 0.999
        pairs.append((ca * lam2 * ratio, lam2))
    return pairs


def _selftest(fast: bool = False):
    """Brute-force oracle suite at R <= 4 plus spectral/phase smoke checks."""
    from .lattices import ReducedSpec
    from .ratlin import identity, mat

    lines = []
    ok = True

    def check(name, cond):
        nonlocal ok
        lines.append(f"{'PASS' if cond else 'FAIL'}  {name}")
        ok = ok and bool(cond)

    cases = [
        ("H1 a=2", ReducedSpec(identity(2), identity(1)), 2, [1, 2, 3, 4]),
        ("H1 a=1", ReducedSpec(identity(2), identity(1)), 1, [1, 2, 3]),
        ("H1 a=4", ReducedSpec(identity(2), identity(1)), 4, [1, 2, 3]),
        ("rational Mt a=2", ReducedSpec(mat([["3/2", "1/3"], [0, 1]]), mat([["2/3"]])), 2, [2, 3]),
        ("float a=1.5", ReducedSpec(identity(2), identity(1)), 1.5, [1.7, 2.9]),
    ]
    if fast:
        cases = cases[:2]
    for name, red, alpha, radii in cases:
        for R in radii:
            got = count_ball(red, alpha, R).count
            want = brute_force_count(red, alpha, R)
            check(f"count oracle {name} R={R}: {got} == {want}", got == want)

    a = spectral.fourier_ball(2, 2, 1, 7.0, 5.0, route="first_layer")
    b = spectral.fourier_ball(2, 2, 1, 7.0, 5.0, route="center")
    check(f"dual-route agreement at (7,5): diff={abs(a.value - b.value):.2e}",
          abs(a.value - b.value) < 1e-8)
    vol = spectral.fourier_ball(2, 2, 1, 0.0, 0.0).value
    check(f"zero-frequency volume = pi: {vol!r}", abs(vol - math.pi) < 1e-10)
    reports = verify_phase_lemmas(2.0, [(10.0, 1.0)])
    check("phase lemma clauses (a=2, case-i)", reports[0].all_passed)
    return ok, lines


_GP_SWEEP = """set logscale xy
set xlabel 'R'
set ylabel 'absolute error'
set datafile separator ','
plot 'sweep.csv' using 1:4 skip 1 with linespoints title 'abs err', \\
     'sweep.csv' using 1:($1**2) skip 1 with lines title 'R^2'
"""

_GP_SPECTRAL = """set logscale xy
set xlabel 'lambda'
set ylabel '|transform|'
set datafile separator ','
plot 'spectral.csv' using 1:(abs($2)) skip 1 with points title '|value|'
"""


if __name__ == "__main__":
    raise SystemExit(main())
