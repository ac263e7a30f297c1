"""
Command line entry point.

    zerotemp fixed-points --c=-2
    zerotemp pressure --c=-1.9999262330250573 --n=8 --t=4
    zerotemp series-verify --xi=1 --tau-grid=2,5,10,20,50

Reports go to stdout (or ``--output``) as JSON with sorted keys, or CSV.
Exit status: 0 success, 2 a verification came back negative, 1 error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np

from . import appendix, deformation, dynamics, pressure, puzzle, render, scheduler
from .errors import ZerotempError
from .logscalar import LogEnclosure, LogScalar

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2
REFERENCE_C = -1.9999262330250573


@dataclasses.dataclass
class RunConfig:
    command: str
    parameters: Dict[str, Any]
    precision_bits: int = 256
    distortion_margins: tuple = (pressure.DELTA1, 2.0, pressure.DELTA3)
    output_format: str = "json"
    output_path: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.precision_bits < 64:
            raise ZerotempError("precision_bits must be at least 64")
        if any(m <= 1 for m in self.distortion_margins):
            raise ZerotempError("distortion margins must exceed 1")
        if self.output_format not in ("json", "csv"):
            raise ZerotempError(f"unknown output format {self.output_format!r}")


# -- serialization -------------------------------------------------------------

def to_plain(x):
    """Recursively turn results into JSON-friendly values."""
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": to_plain(x.real), "im": to_plain(x.imag)}
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, LogScalar):
        return {"log2": to_plain(float(x.log2_value)), "rounding": x.rounding}
    if isinstance(x, LogEnclosure):
        lo, hi = x.as_floats()
        return {"log2_lo": to_plain(lo), "log2_hi": to_plain(hi)}
    if isinstance(x, np.ndarray):
        return [to_plain(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): to_plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_plain(v) for v in x]
    if dataclasses.is_dataclass(x):
        return {f.name: to_plain(getattr(x, f.name)) for f in dataclasses.fields(x)}
    if type(x).__name__ == "mpfr":
        return to_plain(float(x))
    return str(x)


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v, sort_keys=True)
        else:
            out[key] = v
    return out


def emit(report: dict, cfg: RunConfig, stream=None):
    plain = to_plain(report)
    if cfg.output_format == "json":
        text = json.dumps(plain, sort_keys=True, indent=2) + "\n"
    else:
        buf = io.StringIO()
        rows = plain.get("rows")
        if isinstance(rows, list) and rows and isinstance(rows[0], dict):
            rows = [_flatten(r) for r in rows]
        else:
            rows = [_flatten(plain)]
        cols = sorted({k for r in rows for k in r})
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\r\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    if cfg.output_path and cfg.command != "render":
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        (stream or sys.stdout).write(text)


# -- commands ------------------------------------------------------------------

def _c(p, key="c"):
    v = p.get(key)
    if v is None:
        raise ZerotempError(f"--{key} is required")
    return complex(str(v).replace(" ", "").replace("i", "j"))


def _real_c(p, key="c"):
    z = _c(p, key)
    if z.imag:
        raise ZerotempError(f"--{key} must be real for this command")
    return z.real


def _ints(s):
    return [int(x) for x in str(s).split(",") if x.strip()]


def _floats(s):
    return [float(Fraction(x)) for x in str(s).split(",") if x.strip()]


def cmd_fixed_points(cfg, p):
    fp = dynamics.fixed_points(dynamics.QuadraticMap.standard(_c(p)))
    return {"c": _c(p), "alpha": fp.alpha, "beta": fp.beta,
            "alpha_multiplier": fp.alpha_multiplier, "beta_multiplier": fp.beta_multiplier}, True


def cmd_ray(cfg, p):
    f = dynamics.QuadraticMap.standard(_c(p))
    ray = dynamics.trace_external_ray(f, Fraction(p.get("angle", "1/3")), v_min=float(p.get("v_min", 1e-9)))
    return {"c": _c(p), "angle": ray.angle, "landing_point": ray.landing_point,
            "landing_certified": ray.landing_certified, "diagnostic": ray.diagnostic,
            "vertices": ray.vertices, "potential_levels": ray.potential_levels}, True


def cmd_green(cfg, p):
    f = dynamics.QuadraticMap.standard(_c(p))
    z = _c(p, "z")
    g = dynamics.green_potential(f, z, tolerance=float(p.get("tolerance", 1e-12)))
    out = {"c": _c(p), "z": z, "green": g.value, "error_bound": g.error_bound,
           "iterations_used": g.iterations_used}
    if g.value > 0:
        try:
            out["boettcher"] = dynamics.boettcher(f, z)
        except ZerotempError as e:
            out["boettcher_error"] = str(e)
    return out, True


def cmd_cantor(cfg, p):
    cd = puzzle.cantor_data(_real_c(p), delta2=cfg.distortion_margins[1])
    out = dataclasses.asdict(cd)
    out["chi_crit"] = cd.chi_crit
    return out, True


def cmd_itinerary(cfg, p):
    c, n = _real_c(p), int(p.get("n", 8))
    k_max = int(p.get("k_max", 6))
    it = puzzle.critical_itinerary(c, n, k_max)
    mem = puzzle.kn_membership(c, n, k_max)
    return {"c": c, "n": n, "symbols": it.symbols, "certified_steps": it.certified_steps,
            "points": it.points, "membership": mem}, bool(mem["passed"])


def cmd_find_parameter(cfg, p):
    n = int(p.get("n", 8))
    prefix = _ints(p.get("prefix", "0,0,0,0,0,0"))
    br = puzzle.find_parameter_bracket(n, prefix, width_goal=float(p.get("width", 1e-13)))
    return {"n": n, "prefix": prefix, "lo": br.lo, "hi": br.hi, "c": br.mid, "width": br.width,
            "padded_prefix": br.padded_prefix}, True


def cmd_deform(cfg, p):
    lam = float(p.get("lam", -2.0))
    try:
        F = deformation.build_deformation(lam, delta2=cfg.distortion_margins[1])
        dd = deformation.deformation_data(lam, delta2=cfg.distortion_margins[1])
    except ZerotempError as e:
        # outside the admissible range the construction itself is undefined
        return {"lam": lam, "constructed": False, "reason": f"{type(e).__name__}: {e}"}, False
    rep = deformation.verify_interpolation_identities(F, delta2=cfg.distortion_margins[1])
    out = {"lam": lam, "constructed": True, "omega": dd.omega, "coefficients": [a.real for a in F.coefficients],
           "report": rep, "max_interpolation_residual": rep.max_interpolation_residual,
           "tolerance": 1e-8}
    try:
        out["quadratic_like"] = deformation.quadratic_like_check(F)
    except ZerotempError as e:
        out["quadratic_like"] = {"passed": False, "reason": str(e)}
    ok = rep.max_interpolation_residual <= 1e-8 and rep.equality_residual <= 1e-8
    return out, ok


def _inventory(cfg, p, kind, cap_default=20):
    c, n = _real_c(p), int(p.get("n", 8))
    cap = int(p.get("time_cap", cap_default))
    fn = pressure.enumerate_return_branches if kind == "first_return" else pressure.enumerate_landing_branches
    return fn(c, n, cap, delta3=cfg.distortion_margins[2])


def cmd_branches(cfg, p):
    kind = "first_landing" if p.get("kind", "return").startswith("land") else "first_return"
    inv = _inventory(cfg, p, kind)
    out = {"c": inv.c, "n": inv.n, "kind": inv.kind, "V_trace": inv.V_trace,
           "time_cap": inv.time_cap, "complete_up_to": inv.complete_up_to,
           "count": len(inv), "counts_by_time": inv.counts_by_time(),
           "flagged": inv.flagged_count, "notes": inv.notes}
    ok = True
    if kind == "first_return" and len(inv):
        out["diameters_by_time"] = inv.diameters_by_time()
        out["decay_rate"] = inv.decay_rate()
        slack = inv.times - (inv.n + 3 * inv.levels + 1)
        out["level_bound_min_slack"] = int(slack.min())
        ok = bool(slack.min() >= 0)
    limit = int(p.get("list", 0))
    if limit:
        out["rows"] = [dict(dataclasses.asdict(b), trace=[b.trace.left, b.trace.right], word="".join(b.word))
                       for b in (inv.branch(i) for i in range(min(limit, len(inv))))]
    return out, ok


def cmd_peierls(cfg, p):
    inv = _inventory(cfg, p, "first_landing", 18)
    cd = puzzle.cantor_data(inv.c, delta2=cfg.distortion_margins[1])
    ups = float(p.get("upsilon", pressure.UPSILON))
    m = pressure.peierls_margin(inv, cd.chi_crit, ups)
    return {"c": inv.c, "n": inv.n, "time_cap": inv.time_cap, "chi_crit": cd.chi_crit,
            "upsilon": ups, "log_kappa": m, "branches": len(inv)}, math.isfinite(m)


def cmd_pressure(cfg, p):
    inv = _inventory(cfg, p, "first_return")
    tol = float(p.get("tolerance", 1e-9))
    ts = _floats(p.get("t", "1"))
    rows = [pressure.bowen_pressure(inv, t, tol) for t in ts]
    out = {"c": inv.c, "n": inv.n, "time_cap": inv.time_cap, "tolerance": tol,
           "branches": len(inv), "rows": rows}
    if len(rows) == 1:
        out["bracket"] = rows[0]
    ok = all(abs(r.consistency) < 2 * tol or r.p_high - r.p_low < tol for r in rows)
    return out, ok


def cmd_postcritical(cfg, p):
    c, n = _real_c(p), int(p.get("n", 8))
    t, pp, k_max = float(p.get("t", 1)), float(p.get("p", 0)), int(p.get("k_max", 10))
    est = pressure.postcritical_series(c, n, t, pp, k_max)
    out = {"c": c, "n": n, "t": t, "p": pp, "k_max": k_max, "estimate": est}
    if "delta" in p:
        out["bracket"] = pressure.postcritical_bracket(
            c, n, t, float(p["delta"]), min(k_max, 6), cfg.distortion_margins[0], cfg.distortion_margins[1])
    return out, True


def cmd_gibbs(cfg, p):
    inv = _inventory(cfg, p, "first_return")
    t = float(p.get("t", 8))
    pp = float(p["p"]) if "p" in p else pressure.bowen_pressure(inv, t).mid
    rep = pressure.gibbs_mass_report(inv, t, pp, float(p.get("radius", 0.05)))
    rep.update(c=inv.c, n=inv.n, time_cap=inv.time_cap)
    return rep, True


def cmd_series_verify(cfg, p):
    xi = Fraction(str(p.get("xi", "1")))
    q = int(p["q"]) if "q" in p else None
    scheme = appendix.PartitionScheme.standard(xi, q)
    grid = [Fraction(x) for x in str(p.get("tau_grid", "2,5,10,20,50")).split(",")]
    rep = appendix.verify_appendix_lemmas(scheme, grid, precision_bits=cfg.precision_bits)
    rep["rows"] = rep["checks"]
    rep["min_log2_margin"] = min(c["log2_margin"] for c in rep["checks"])
    return rep, rep["all_passed"]


def cmd_series_oracle(cfg, p):
    scheme = appendix.PartitionScheme.oracle(int(p.get("q", 2)), Fraction(str(p.get("xi", "2/5"))))
    taus = [Fraction(x) for x in str(p.get("tau", "1/2,1,2")).split(",")]
    lams = [Fraction(x) for x in str(p.get("lam", "0,1/2,1")).split(",")]
    blocks = _ints(p.get("s", "0,1"))
    tol = float(p.get("tolerance", 1e-20))
    rows, worst = [], 0.0
    for tau in taus:
        for lam in lams:
            for s in blocks:
                closed = appendix.block_sums(scheme, s, tau, lam, cfg.precision_bits).intervals
                brute = appendix.brute_force_block(scheme, s, tau, lam, cfg.precision_bits)
                for key, iv in brute.items():
                    a, b = float(closed[key].mid), float(iv.mid)
                    rel = abs(a - b) / abs(b) if b else abs(a)
                    worst = max(worst, rel)
                    rows.append({"tau": tau, "lam": lam, "s": s, "series": key,
                                 "closed_form": a, "brute_force": b, "relative_error": rel})
    return {"q": scheme.q, "xi": scheme.xi, "Xi": scheme.Xi, "tolerance": tol,
            "worst_relative_error": worst, "rows": rows}, worst <= tol


def cmd_schedule(cfg, p):
    betas = _floats(p.get("betas", ",".join(str(4 * 4**l) for l in range(7))))
    A_sup, A_inf = float(p.get("A_sup", 4)), float(p.get("A_inf", 2))
    theta = float(p.get("theta", 2 ** (4 / A_sup)))
    sch = scheduler.schedule_from_temperatures(betas, A_sup, A_inf)
    scheme = scheduler.scheduler_scheme(Fraction(str(p.get("xi", "1"))))
    rows = []
    for l, b in enumerate(betas):
        try:
            r = scheduler.dominant_block_report(b, theta, scheme, sch.signs, evaluate_series=False)
            rows.append({"l": l, "beta": b, "m": sch.m[l], "tau": r.tau, "prediction": r.sign})
        except ZerotempError as e:
            rows.append({"l": l, "beta": b, "m": sch.m[l], "prediction": None, "error": str(e)})
    preds = [r["prediction"] for r in rows]
    alternates = all(a is not None and b is not None and a != b for a, b in zip(preds, preds[1:]))
    out = sch.as_dict()
    out.update(theta=theta, q=scheme.q, Xi=scheme.Xi, xi=scheme.xi, rows=rows, alternates=alternates)
    return out, sch.growth_holds and alternates


def cmd_render(cfg, p):
    view = render.View(complex(str(p.get("center", "0")).replace("i", "j")), float(p.get("half_width", 2.2)),
                       int(p.get("width", 400)), int(p.get("height", 400)))
    angles = [Fraction(a) for a in str(p.get("angles", "")).split(",") if a.strip()]
    img, meta = render.render_scene(p.get("scene", "julia"), _c(p), view, angles,
                                    int(p.get("max_iter", 400)))
    path = cfg.output_path or p.get("out") or "zerotemp.ppm"
    render.write_ppm(path, img)
    meta["path"] = path
    return meta, True


COMMANDS = {
    "ray": cmd_ray, "fixed-points": cmd_fixed_points, "green": cmd_green, "cantor": cmd_cantor,
    "itinerary": cmd_itinerary, "find-parameter": cmd_find_parameter, "deform": cmd_deform,
    "branches": cmd_branches, "peierls": cmd_peierls, "pressure": cmd_pressure,
    "postcritical": cmd_postcritical, "gibbs": cmd_gibbs, "series-verify": cmd_series_verify,
    "series-oracle": cmd_series_oracle, "schedule": cmd_schedule, "render": cmd_render,
}

# accepted --key=value options per command (dashes in keys become underscores)
OPTIONS = {
    "ray": ["c", "angle", "v-min"],
    "fixed-points": ["c"],
    "green": ["c", "z", "tolerance"],
    "cantor": ["c"],
    "itinerary": ["c", "n", "k-max"],
    "find-parameter": ["n", "prefix", "width"],
    "deform": ["lam"],
    "branches": ["c", "n", "time-cap", "kind", "list"],
    "peierls": ["c", "n", "time-cap", "upsilon"],
    "pressure": ["c", "n", "t", "time-cap", "tolerance"],
    "postcritical": ["c", "n", "t", "p", "k-max", "delta"],
    "gibbs": ["c", "n", "t", "p", "time-cap", "radius"],
    "series-verify": ["xi", "q", "tau-grid"],
    "series-oracle": ["q", "xi", "tau", "lam", "s", "tolerance"],
    "schedule": ["betas", "A-sup", "A-inf", "theta", "xi"],
    "render": ["scene", "c", "width", "height", "center", "half-width", "angles", "max-iter", "out"],
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="zerotemp", allow_abbrev=False, description="Quadratic dynamics and zero-temperature pressure workbench.")
    ap.add_argument("--precision", type=int, default=int(os.environ.get("ZEROTEMP_PRECISION", "256")))
    ap.add_argument("--delta1", type=float, default=pressure.DELTA1)
    ap.add_argument("--delta2", type=float, default=2.0)
    ap.add_argument("--delta3", type=float, default=pressure.DELTA3)
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--output")
    ap.add_argument("--seed", type=int, default=0)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, opts in OPTIONS.items():
        sp = sub.add_parser(name, allow_abbrev=False)
        for o in opts:
            sp.add_argument(f"--{o}", dest=o.replace("-", "_"))
        # common flags may also follow the subcommand
        sp.add_argument("--format", dest="sub_format", choices=("json", "csv"))
        sp.add_argument("--output", dest="sub_output")
        sp.add_argument("--precision", dest="sub_precision", type=int)
    return ap


def config_from_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    params = {k: v for k, v in vars(ns).items()
              if v is not None and k not in ("precision", "delta1", "delta2", "delta3", "format",
                                             "output", "seed", "command", "sub_format", "sub_output",
                                             "sub_precision")}
    return RunConfig(ns.command, params, ns.sub_precision or ns.precision,
                     (ns.delta1, ns.delta2, ns.delta3), ns.sub_format or ns.format,
                     ns.sub_output or ns.output, ns.seed)


def dispatch(cfg: RunConfig, stream=None) -> int:
    try:
        report, ok = COMMANDS[cfg.command](cfg, cfg.parameters)
    except (ZerotempError, ValueError, ArithmeticError, OSError) as e:
        sys.stderr.write(f"zerotemp {cfg.command}: {type(e).__name__}: {e}\n")
        return EXIT_ERROR
    report = dict(report)
    report["config"] = {"command": cfg.command, "parameters": cfg.parameters,
                        "precision_bits": cfg.precision_bits,
                        "distortion_margins": list(cfg.distortion_margins),
                        "upsilon_default": pressure.UPSILON, "seed": cfg.seed}
    report["passed"] = bool(ok)
    emit(report, cfg, stream)
    return EXIT_OK if ok else EXIT_FAILED


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except ZerotempError as e:
        sys.stderr.write(f"zerotemp: {e}\n")
        return EXIT_ERROR
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
