"""Command-line front end: form arithmetic, spectrum tables, eigenvalue
counts against the volume prediction, spacing statistics, the petal
figure with loop transport, geodesic runs, and eigenfunction slices.

Each subcommand prints a fixed-order summary of `key: value` lines with
floats at 12 significant digits, so identical configurations produce
byte-identical output, and optionally writes CSV/JSON/SVG files under
--out.  A --json-config file overrides flags of the same name.  Exit
codes: 0 on success, 2 for invalid input, 3 when a computation gives up.
"""

import argparse
import bisect
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import accumulate

import numpy as np

from .errors import ConvergenceError, ResourceError, ValidationError
from .qforms import (SolverInconsistency, automorph_generator, class_number,
                     form_from_matrix, mat_neg, mat_pow, mat_vec,
                     pell_fundamental, primitive_part, primitivity_index,
                     rep_count_bruteforce, rep_count_formula)
from .manifold import FibreMetric, GluingMap, eigencoords, geometry, q_dual
from . import spectrum as spec
from .semiclassics import f_integral, weyl_prediction, x_pm
from . import statistics as stats
from .statistics import ValueSequence
from . import dynamics as dyn
from . import svgout
from .util import fmt, write_csv

WEYL_HEADER = ("energy", "empirical", "predicted", "ratio")
FIELD_HEADER = ("w1", "w2", "z", "re", "im", "abs")


def _ints(text, n, name):
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != n:
        raise ValidationError(f"{name} needs {n} comma-separated integers")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ValidationError(f"{name} must contain integers, got {text!r}") from None


def _floats(text, n, name):
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != n:
        raise ValidationError(f"{name} needs {n} comma-separated numbers")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ValidationError(f"{name} must contain numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise ValidationError(f"{name} must be finite")
    return vals


def _matstr(M):
    return json.dumps([[int(M[0][0]), int(M[0][1])],
                       [int(M[1][0]), int(M[1][1])]], separators=(",", ":"))


def _liststr(vals):
    return "[" + ",".join(fmt(v) for v in vals) + "]"


def _emit(lines):
    sys.stdout.write("\n".join(lines) + "\n")


def _pmap(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _outpath(cfg, name):
    os.makedirs(cfg.out, exist_ok=True)
    return os.path.join(cfg.out, name)


@dataclass(frozen=True)
class RunConfig:
    command: str
    matrix: tuple
    metric: tuple
    out: str
    threads: int
    selftest: bool
    params: dict


# ---------------------------------------------------------------------------
# argument plumbing

def _build_parser():
    top = argparse.ArgumentParser(
        prog="solspec",
        description="Spectra, statistics, and geodesic diagnostics of "
                    "torus bundles with hyperbolic gluing.")
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--matrix", default="2,1,1,1",
                       help="gluing matrix, row-major a11,a12,a21,a22")
        p.add_argument("--metric", default="1,0,1",
                       help="fibre metric alpha,beta,gamma")
        p.add_argument("--json-config", default=None, metavar="FILE",
                       help="JSON object whose entries override flags")
        p.add_argument("--out", default=None, metavar="DIR",
                       help="directory for CSV/JSON/SVG output files")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--selftest", action="store_true",
                       help="run this module's invariants at reduced scale")
        return p

    p = add("forms", "discriminant, Pell solution, class number, "
                     "representation counts")
    p.add_argument("--n", type=int, default=None,
                   help="integer to count representations of")

    p = add("spectrum", "assemble the eigenvalue table, group degeneracies, "
                        "check multiplicities")
    p.add_argument("--energy-cut", type=float, default=250.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--grouping-tol", type=float, default=None)

    p = add("weyl", "empirical eigenvalue count against the volume term")
    p.add_argument("--energy", type=float, default=2000.0)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-8)

    p = add("spacing", "form-value spacings, zero fraction, growth of "
                       "distinct values")
    p.add_argument("--qmax", type=int, default=8100)
    p.add_argument("--mode", default="orbit-only",
                   choices=("orbit-only", "extra-involution"))
    p.add_argument("--checkpoints", default=None,
                   help="comma-separated value bounds; default qmax/9, "
                        "4 qmax/9, qmax")
    p.add_argument("--drop-degenerate", action="store_true",
                   help="drop zero gaps from the histogram")

    p = add("flower", "petal image of the dual lattice, with optional "
                      "loop transport")
    p.add_argument("--qmax", type=int, default=3600)
    p.add_argument("--box", type=int, default=None,
                   help="enumeration window; default ceil(sqrt(qmax))")
    p.add_argument("--transport", action="store_true",
                   help="carry a lattice frame around a loop and print the "
                        "resulting integer matrix")
    p.add_argument("--radius", type=float, default=None,
                   help="loop radius; default scales with the figure")
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--turns", type=int, default=1)

    p = add("geodesic", "integrate one geodesic and compare its vertical "
                        "extent with the turning points")
    p.add_argument("--point", default="0,0,0,1,1,1",
                   help="initial u,v,z,p_u,p_v,p_z")
    p.add_argument("--duration", type=float, default=100.0)
    p.add_argument("--step", type=float, default=1e-3)

    p = add("field", "sample an averaged eigenfunction on a horizontal grid")
    p.add_argument("--gamma", default="1,0", help="dual lattice point")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--grid", type=int, default=32)
    p.add_argument("--trunc-tol", type=float, default=1e-8)

    return top


def _apply_json_config(args):
    if getattr(args, "json_config", None) is None:
        return
    try:
        with open(args.json_config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {args.json_config}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ValidationError("config file must hold a JSON object")
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr in ("json_config", "command") or not hasattr(args, attr):
            raise ValidationError(f"unknown config entry {key!r}")
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        setattr(args, attr, value)


def _build_config(args):
    matrix_flat = _ints(args.matrix, 4, "matrix")
    matrix = ((matrix_flat[0], matrix_flat[1]),
              (matrix_flat[2], matrix_flat[3]))
    GluingMap.from_matrix(matrix)
    metric = _floats(args.metric, 3, "metric")
    FibreMetric(*metric)
    threads = int(args.threads)
    if threads < 1:
        raise ValidationError("threads must be a positive integer")

    p = {}
    cmd = args.command
    if cmd == "forms":
        p["n"] = None if args.n is None else int(args.n)
        if p["n"] == 0:
            raise ValidationError("n must be nonzero")
    elif cmd == "spectrum":
        p["energy_cut"] = float(args.energy_cut)
        p["tol"] = float(args.tol)
        p["grouping_tol"] = None if args.grouping_tol is None else float(args.grouping_tol)
        if not p["energy_cut"] > 0:
            raise ValidationError("energy cut must be positive")
        if not p["tol"] > 0:
            raise ValidationError("tolerance must be positive")
    elif cmd == "weyl":
        p["energy"] = float(args.energy)
        p["samples"] = int(args.samples)
        p["tol"] = float(args.tol)
        if not p["energy"] > 0:
            raise ValidationError("energy must be positive")
        if p["samples"] < 1:
            raise ValidationError("samples must be a positive integer")
        if not p["tol"] > 0:
            raise ValidationError("tolerance must be positive")
    elif cmd == "spacing":
        p["qmax"] = int(args.qmax)
        p["mode"] = str(args.mode)
        if p["qmax"] < 1:
            raise ValidationError("qmax must be a positive integer")
        if args.checkpoints is None:
            ks = {max(1, p["qmax"] // 9), max(1, 4 * p["qmax"] // 9), p["qmax"]}
        else:
            parts = [s.strip() for s in str(args.checkpoints).split(",") if s.strip()]
            if not parts:
                raise ValidationError("checkpoints must list at least one bound")
            try:
                ks = {int(s) for s in parts}
            except ValueError:
                raise ValidationError("checkpoints must be integers") from None
        if any(k < 1 or k > p["qmax"] for k in ks):
            raise ValidationError("checkpoints must lie in 1..qmax")
        p["checkpoints"] = tuple(sorted(ks))
        p["drop_degenerate"] = bool(args.drop_degenerate)
    elif cmd == "flower":
        p["qmax"] = int(args.qmax)
        if p["qmax"] < 1:
            raise ValidationError("qmax must be a positive integer")
        p["box"] = math.isqrt(p["qmax"] - 1) + 1 if args.box is None else int(args.box)
        if p["box"] < 1:
            raise ValidationError("box must be a positive integer")
        p["transport"] = bool(args.transport)
        p["radius"] = None if args.radius is None else float(args.radius)
        p["steps"] = int(args.steps)
        p["turns"] = int(args.turns)
    elif cmd == "geodesic":
        p["point"] = _floats(args.point, 6, "point")
        p["duration"] = float(args.duration)
        p["step"] = float(args.step)
        if not p["duration"] > 0:
            raise ValidationError("duration must be positive")
        if not p["step"] > 0:
            raise ValidationError("step must be positive")
    elif cmd == "field":
        p["gamma"] = _ints(args.gamma, 2, "gamma")
        if p["gamma"] == (0, 0):
            raise ValidationError("gamma must be a nonzero lattice point")
        p["level"] = int(args.level)
        p["z"] = float(args.z)
        p["grid"] = int(args.grid)
        p["trunc_tol"] = float(args.trunc_tol)
        if p["level"] < 0:
            raise ValidationError("level must be a non-negative integer")
        if p["grid"] < 2:
            raise ValidationError("grid must be at least 2")
        if not p["trunc_tol"] > 0:
            raise ValidationError("truncation tolerance must be positive")
        if not math.isfinite(p["z"]):
            raise ValidationError("z must be finite")

    return RunConfig(command=cmd, matrix=matrix, metric=metric,
                     out=args.out, threads=threads,
                     selftest=bool(args.selftest), params=p)


def _head(cfg):
    return [f"matrix: {_matstr(cfg.matrix)}", f"metric: {_liststr(cfg.metric)}"]


def _st(ok, what):
    if not ok:
        raise ConvergenceError(f"selftest failed: {what}")


# ---------------------------------------------------------------------------
# forms

def _cmd_forms(cfg):
    if cfg.selftest:
        return _selftest_forms(cfg)
    A = GluingMap.from_matrix(cfg.matrix)
    dual = q_dual(A)
    qhat, content = primitive_part(dual)
    d = qhat.discriminant
    h = class_number(d)
    sol = pell_fundamental(d)
    gen = automorph_generator(qhat)
    r, _ = primitivity_index(cfg.matrix)

    lines = [f"matrix: {_matstr(cfg.matrix)}",
             f"trace: {A.trace}",
             f"dual_form: {_liststr(dual.coeffs())}",
             f"primitive_form: {_liststr(qhat.coeffs())}",
             f"content: {content}",
             f"discriminant: {d}",
             f"class_number: {h}",
             f"pell_fundamental: X={sol.X0} Y={sol.Y0}",
             f"automorph: {_matstr(gen)}",
             f"primitivity_index: {r}"]
    payload = {"matrix": [list(row) for row in cfg.matrix], "trace": A.trace,
               "dual_form": list(dual.coeffs()),
               "primitive_form": list(qhat.coeffs()), "content": content,
               "discriminant": d, "class_number": h,
               "pell": [sol.X0, sol.Y0],
               "automorph": [list(row) for row in gen],
               "primitivity_index": r}
    if cfg.params["n"] is not None:
        n = cfg.params["n"]
        count = rep_count_bruteforce(qhat, n, gen)
        mult = 2 * r * count
        lines += [f"n: {n}", f"N={count}", f"m={mult}"]
        payload.update(n=n, N=count, m=mult)
    _emit(lines)
    if cfg.out:
        with open(_outpath(cfg, "forms.json"), "w", encoding="utf-8") as fh:
            fh.write(json.dumps(payload, sort_keys=True,
                                separators=(",", ":")) + "\n")
    return 0


def _selftest_forms(cfg):
    M = cfg.matrix
    Q = form_from_matrix(M)
    _st(Q.transform(M) == Q, "form is not preserved by its matrix")
    qhat, _ = primitive_part(q_dual(M))
    d = qhat.discriminant
    sol = pell_fundamental(d)
    _st(sol.X0 ** 2 - d * sol.Y0 ** 2 == 4, "Pell identity broken")
    gen = automorph_generator(qhat)
    _st(all(qhat(*mat_vec(gen, v)) == qhat(*v)
            for v in ((1, 0), (0, 1), (2, 3), (-1, 4))),
        "automorph does not preserve the primitive form")
    r, base = primitivity_index(M)
    P = mat_pow(base, r)
    _st(P == M or mat_neg(P) == M, "automorph power does not reach the matrix")
    lines = ["selftest form-invariance: ok", "selftest pell: ok",
             "selftest automorph: ok", f"selftest primitivity-index: ok (r={r})"]
    if class_number(d) == 1:
        checked = 0
        for n in range(1, 41):
            if math.gcd(n, d) != 1:
                continue
            _st(rep_count_formula(d, n) == rep_count_bruteforce(qhat, n, gen),
                f"representation count mismatch at n={n}")
            checked += 1
        lines.append(f"selftest representation-counts: ok ({checked} values)")
    else:
        lines.append("selftest representation-counts: skipped (class number > 1)")
    lines.append("selftest: pass")
    _emit(lines)
    return 0


# ---------------------------------------------------------------------------
# spectrum

def _expected_mult(A, line):
    # one prediction per distinct signed form value in the group
    seen = {}
    for m in (line.members or (line,)):
        q = m.orbit.qvalue
        if q not in seen:
            seen[q] = m.orbit.gamma
    return sum(spec.predicted_multiplicity(A, g) for _, g in sorted(seen.items()))


def _cmd_spectrum(cfg):
    if cfg.selftest:
        return _selftest_spectrum(cfg)
    geom = geometry(cfg.matrix, cfg.metric)
    A = GluingMap.from_matrix(cfg.matrix)
    t = spec.assemble(geom, A, cfg.params["energy_cut"], tol=cfg.params["tol"])
    g = spec.group_degenerate(t, grouping_tol=cfg.params["grouping_tol"])
    counts = {"predicted": 0, "predicted-nongeneric-pm": 0, "accidental": 0}
    mismatches = 0
    for line in g.lines:
        if not line.status:
            continue
        counts[line.status] += 1
        if line.status != "accidental" and \
                line.multiplicity != _expected_mult(A, line):
            mismatches += 1
    lines = _head(cfg) + [
        f"energy_cut: {fmt(cfg.params['energy_cut'])}",
        f"tol: {fmt(cfg.params['tol'])}",
        f"qmax: {t.meta['qmax']}",
        f"lmax: {t.meta['lmax']}",
        f"cos_theta: {fmt(t.meta['cos_theta'])}",
        f"lines: {len(t.lines)}",
        f"groups: {len(g.lines)}",
        f"predicted: {counts['predicted']}",
        f"predicted-nongeneric-pm: {counts['predicted-nongeneric-pm']}",
        f"accidental: {counts['accidental']}",
        "multiplicity_check: " + ("ok" if mismatches == 0
                                  else f"{mismatches} mismatches")]
    _emit(lines)
    if cfg.out:
        spec.write_table_csv(t, _outpath(cfg, "spectrum.csv"))
        spec.write_table_csv(g, _outpath(cfg, "spectrum_grouped.csv"))
        with open(_outpath(cfg, "spectrum.json"), "w", encoding="utf-8") as fh:
            fh.write(spec.to_json_text(g))
    return 0


def _selftest_spectrum(cfg):
    geom = geometry(cfg.matrix, cfg.metric)
    A = GluingMap.from_matrix(cfg.matrix)
    t = spec.assemble(geom, A, 120.0, tol=1e-8)
    es = [ln.energy for ln in t.lines]
    _st(all(es[i] <= es[i + 1] for i in range(len(es) - 1)), "lines not sorted")
    _st(all(ln.multiplicity >= 1 for ln in t.lines), "nonpositive multiplicity")
    for ln in t.lines:
        if ln.source_kind == "trivial":
            want = 4.0 * math.pi ** 2 * ln.k_or_l ** 2
            _st(abs(ln.energy - want) <= 1e-9 * max(1.0, want),
                "closed tower off its exact value")
    g = spec.group_degenerate(t)
    _st(all((ln.status or "accidental") in
            ("predicted", "predicted-nongeneric-pm", "accidental")
            for ln in g.lines), "unknown group status")
    bad = sum(1 for ln in g.lines
              if ln.status and ln.status != "accidental"
              and ln.multiplicity != _expected_mult(A, ln))
    _st(bad == 0, f"{bad} grouped multiplicities disagree with the prediction")
    _emit(["selftest ordering: ok", "selftest closed-tower: ok",
           "selftest grouping: ok", "selftest multiplicities: ok",
           "selftest: pass"])
    return 0


# ---------------------------------------------------------------------------
# weyl

def _count_table(t):
    es = [ln.energy for ln in t.lines]
    cum = list(accumulate(ln.multiplicity for ln in t.lines))

    def upto(lam):
        i = bisect.bisect_right(es, lam)
        return cum[i - 1] if i else 0

    return upto


def _cmd_weyl(cfg):
    if cfg.selftest:
        return _selftest_weyl(cfg)
    geom = geometry(cfg.matrix, cfg.metric)
    A = GluingMap.from_matrix(cfg.matrix)
    energy = cfg.params["energy"]
    samples = cfg.params["samples"]
    t = spec.assemble(geom, A, energy, tol=cfg.params["tol"])
    upto = _count_table(t)
    lams = [energy * (i / samples) for i in range(1, samples + 1)]
    emps = _pmap(upto, lams, cfg.threads)
    rows = []
    for lam, emp in zip(lams, emps):
        pred = weyl_prediction(lam, geom.area)
        rows.append((lam, emp, pred, emp / pred))
    lines = _head(cfg) + [
        f"energy: {fmt(energy)}",
        f"area: {fmt(geom.area)}",
        f"samples: {samples}",
        f"empirical: {rows[-1][1]}",
        f"predicted: {fmt(rows[-1][2])}",
        f"ratio: {fmt(rows[-1][3])}"]
    _emit(lines)
    if cfg.out:
        write_csv(_outpath(cfg, "weyl.csv"), WEYL_HEADER, rows)
    return 0


def _selftest_weyl(cfg):
    geom = geometry(cfg.matrix, cfg.metric)
    A = GluingMap.from_matrix(cfg.matrix)
    _st(abs(f_integral() - 2.0 * math.pi / 3.0) < 1e-8,
        "well-count integral misses 2 pi / 3")
    rng = np.random.default_rng(0)
    for theta in rng.uniform(0.05, math.pi - 0.05, size=20):
        xp, xm = x_pm(theta)
        _st(abs(math.sin(theta) * (xp + xm) - 4.0 * math.pi / 3.0) < 1e-12,
            "phase-space shares do not sum to 4 pi / 3")
    _st(abs(weyl_prediction(29.2, geom.area) * 8.0
            - weyl_prediction(4 * 29.2, geom.area)) < 1e-9,
        "prediction does not scale as energy^(3/2)")
    t = spec.assemble(geom, A, 150.0, tol=1e-8)
    upto = _count_table(t)
    counts = [upto(150.0 * i / 8) for i in range(1, 9)]
    _st(all(a <= b for a, b in zip(counts, counts[1:])),
        "empirical count is not monotone")
    _emit(["selftest well-integral: ok", "selftest phase-shares: ok",
           "selftest scaling: ok", "selftest monotone-count: ok",
           "selftest: pass"])
    return 0


# ---------------------------------------------------------------------------
# spacing

def _truncated(vs, bound):
    vals = tuple(v for v in vs.values if v <= bound)
    return ValueSequence(values=vals, qmax=int(bound),
                         symmetry_mode=vs.symmetry_mode)


def _cmd_spacing(cfg):
    if cfg.selftest:
        return _selftest_spacing(cfg)
    geom = geometry(cfg.matrix, cfg.metric)
    mode = cfg.params["mode"]
    inv = None
    inv_note = "none"
    if mode == "extra-involution":
        inv = stats.find_involution(cfg.matrix)
        inv_note = f"{_matstr(inv[0])} {_matstr(inv[1])}"
    vs = stats.value_sequence(cfg.matrix, geom, cfg.params["qmax"],
                              symmetry_mode=mode, involution=inv)
    hist = stats.spacing_histogram(vs, drop_degenerate=cfg.params["drop_degenerate"])
    growth = stats.represented_growth(vs, cfg.params["checkpoints"])

    def probe(bound):
        sub = _truncated(vs, bound)
        frac = stats.zero_spacing_fraction(sub) if len(sub) >= 2 else float("nan")
        return len(sub), frac

    probes = _pmap(probe, cfg.params["checkpoints"], cfg.threads)
    lines = _head(cfg) + [
        f"qmax: {cfg.params['qmax']}",
        f"mode: {mode}",
        f"involution: {inv_note}",
        f"drop_degenerate: {int(cfg.params['drop_degenerate'])}",
        f"values: {len(vs)}",
        f"count_ratio: {fmt(len(vs) / cfg.params['qmax'])}",
        f"zero_spacing_fraction: {fmt(stats.zero_spacing_fraction(vs))}"]
    for (bound, count, norm), (nvals, frac) in zip(growth, probes):
        lines.append(f"checkpoint {bound}: values={nvals} "
                     f"zero_fraction={fmt(frac)} distinct={count} "
                     f"normalized={fmt(norm)}")
    _emit(lines)
    if cfg.out:
        stats.write_spacing_csv(hist, _outpath(cfg, "spacing.csv"))
        stats.write_growth_csv(growth, _outpath(cfg, "growth.csv"))
        svgout.write_svg(svgout.bars_svg(hist, title="gap counts"),
                         _outpath(cfg, "spacing.svg"))
    return 0


def _selftest_spacing(cfg):
    geom = geometry(cfg.matrix, cfg.metric)
    vs = stats.value_sequence(cfg.matrix, geom, 400)
    _st(all(v >= 1 for v in vs.values), "values must be positive")
    _st(all(v <= 400 for v in vs.values), "values exceed the bound")
    _st(list(vs.values) == sorted(vs.values), "values not sorted")
    hist = stats.spacing_histogram(vs)
    _st(sum(hist.values()) == len(vs) - 1, "gap count must be n - 1")
    frac = stats.zero_spacing_fraction(vs)
    _st(0.0 <= frac <= 1.0, "zero fraction out of range")
    growth = stats.represented_growth(vs, (100, 200, 400))
    ns = [row[1] for row in growth]
    _st(all(a <= b for a, b in zip(ns, ns[1:])), "distinct count not monotone")
    lines = ["selftest values: ok", "selftest histogram: ok",
             "selftest growth: ok"]
    try:
        pair = stats.find_involution(cfg.matrix)
    except ValidationError:
        lines.append("selftest involution: skipped (no factorization found)")
    else:
        vr = stats.value_sequence(cfg.matrix, geom, 400,
                                  symmetry_mode="extra-involution",
                                  involution=pair)
        _st(set(vr.values) <= set(vs.values), "reduced values not a subset")
        _st(len(vr) <= len(vs), "reduction grew the sequence")
        lines.append("selftest involution: ok")
    lines.append("selftest: pass")
    _emit(lines)
    return 0


# ---------------------------------------------------------------------------
# flower

def _cmd_flower(cfg):
    if cfg.selftest:
        return _selftest_flower(cfg)
    geom = geometry(cfg.matrix, cfg.metric)
    pts = dyn.flower_points(geom, cfg.params["box"], qmax=cfg.params["qmax"])
    rp, rm, qp, qm = dyn.bifurcation_radii(geom)
    lines = _head(cfg) + [
        f"qmax: {cfg.params['qmax']}",
        f"box: {cfg.params['box']}",
        f"points: {len(pts)}",
        f"bifurcation_radius_plus: {fmt(rp)}",
        f"bifurcation_radius_minus: {fmt(rm)}",
        f"critical_q_plus: {fmt(qp)}",
        f"critical_q_minus: {fmt(qm)}"]
    if cfg.params["transport"]:
        radius = cfg.params["radius"]
        if radius is None:
            radius = 0.25 * math.sqrt(geom.c * cfg.params["qmax"])
        loop = dyn.LoopSpec(radius=radius, steps=cfg.params["steps"],
                            turns=cfg.params["turns"])
        M = dyn.monodromy_transport(pts, loop, geom)
        lines.append(f"loop: radius={fmt(radius)} steps={loop.steps} "
                     f"turns={loop.turns}")
        lines.append(f"transport: {_matstr(M)}")
    _emit(lines)
    if cfg.out:
        dyn.write_flower_csv(pts, geom, _outpath(cfg, "flower.csv"))
        svg = svgout.scatter_svg([(fp.F1, fp.F2) for fp in pts],
                                 circles=((0.0, 0.0, rp), (0.0, 0.0, rm)),
                                 title="petal image")
        svgout.write_svg(svg, _outpath(cfg, "flower.svg"))
    return 0


def _selftest_flower(cfg):
    geom = geometry(cfg.matrix, cfg.metric)
    pts = dyn.flower_points(geom, 30, qmax=900)
    _st(len(pts) > 0, "empty petal figure")
    step = max(1, len(pts) // 200)
    for fp in pts[::step]:
        q = geom.qform(*fp.gamma)
        r2 = fp.F1 ** 2 + fp.F2 ** 2
        _st(abs(r2 - geom.c * abs(q)) <= 1e-9 * max(1.0, abs(q)),
            "petal radius disagrees with the form value")
    for g in ((1, 0), (0, 1), (2, 3)):
        p, q = eigencoords(geom, g)
        a = dyn.flower_map(p, q, geom.mu)
        b = dyn.flower_map(p * geom.lam, q / geom.lam, geom.mu)
        _st(math.hypot(a[0] - b[0], a[1] - b[1]) < 1e-9,
            "petal map is not deck invariant")
    rng = np.random.default_rng(0)
    want = math.pi / geom.mu
    eps = 1e-6
    for _ in range(10):
        p = rng.uniform(0.5, 3.0)
        q = rng.uniform(0.5, 3.0)
        j00 = (dyn.flower_map(p + eps, q, geom.mu)[0]
               - dyn.flower_map(p - eps, q, geom.mu)[0]) / (2 * eps)
        j01 = (dyn.flower_map(p, q + eps, geom.mu)[0]
               - dyn.flower_map(p, q - eps, geom.mu)[0]) / (2 * eps)
        j10 = (dyn.flower_map(p + eps, q, geom.mu)[1]
               - dyn.flower_map(p - eps, q, geom.mu)[1]) / (2 * eps)
        j11 = (dyn.flower_map(p, q + eps, geom.mu)[1]
               - dyn.flower_map(p, q - eps, geom.mu)[1]) / (2 * eps)
        _st(abs(abs(j00 * j11 - j01 * j10) - want) < 1e-5,
            "petal area element is not pi / mu")
    loop = dyn.LoopSpec(radius=0.25 * math.sqrt(geom.c * 900), steps=1200)
    M = dyn.monodromy_transport(pts, loop, geom)
    _st(M == geom.a_star, "transport around the origin misses the gluing")
    _emit(["selftest radii: ok", "selftest deck-invariance: ok",
           "selftest area-element: ok", "selftest transport: ok",
           "selftest: pass"])
    return 0


# ---------------------------------------------------------------------------
# geodesic

def _cmd_geodesic(cfg):
    if cfg.selftest:
        return _selftest_geodesic(cfg)
    geom = geometry(cfg.matrix, cfg.metric)
    u, v, z, pu, pv, pz = cfg.params["point"]
    pt = dyn.PhasePoint(u=u, v=v, z=z, p_u=pu, p_v=pv, p_z=pz)
    h0 = dyn.hamiltonian(pt, geom)
    traj = dyn.integrate(pt, geom, cfg.params["duration"], cfg.params["step"])
    zmin = float(np.min(traj.z))
    zmax = float(np.max(traj.z))
    lines = _head(cfg) + [
        f"point: {_liststr(cfg.params['point'])}",
        f"energy: {fmt(h0)}",
        f"duration: {fmt(cfg.params['duration'])}",
        f"step: {fmt(cfg.params['step'])}",
        f"samples: {len(traj)}",
        f"status: {traj.status}",
        f"h_drift: {fmt(traj.h_drift)}",
        f"q_value: {fmt(pu * pv)}"]
    if pu * pv != 0.0:
        zlo, zhi = dyn.turning_points(pu, pv, h0, geom)
        resid = max(abs(zmin - zlo), abs(zmax - zhi))
        lines += [f"turning: z_minus={fmt(zlo)} z_plus={fmt(zhi)}",
                  f"observed_z: min={fmt(zmin)} max={fmt(zmax)}",
                  f"caustic_residual: {fmt(resid)}"]
    else:
        lines += ["turning: none (p_u p_v = 0)",
                  f"observed_z: min={fmt(zmin)} max={fmt(zmax)}"]
    _emit(lines)
    if cfg.out:
        traj.write_csv(_outpath(cfg, "trajectory.csv"))
    return 0


def _selftest_geodesic(cfg):
    geom = geometry(cfg.matrix, cfg.metric)
    pt = dyn.PhasePoint(u=0.0, v=0.0, z=0.25, p_u=0.0, p_v=0.0, p_z=1.0)
    traj = dyn.integrate(pt, geom, 5.0, 1e-3)
    _st(traj.h_drift < 1e-12, "vertical geodesic drifts")
    _st(float(np.max(np.abs(traj.z - (0.25 + traj.t)))) < 1e-9,
        "vertical geodesic is not linear in time")
    rng = np.random.default_rng(0)
    for _ in range(10):
        q = dyn.PhasePoint(u=float(rng.uniform(-1, 1)),
                           v=float(rng.uniform(-1, 1)),
                           z=float(rng.uniform(-1, 1)),
                           p_u=float(rng.uniform(-2, 2)),
                           p_v=float(rng.uniform(-2, 2)),
                           p_z=float(rng.uniform(-2, 2)))
        h = dyn.hamiltonian(q, geom)
        hd = dyn.hamiltonian(dyn.deck_transform(q, geom), geom)
        _st(abs(hd - h) <= 1e-10 * max(1.0, abs(h)),
            "deck transform changes the energy")
    pt = dyn.PhasePoint(u=0.0, v=0.0, z=0.0, p_u=1.0, p_v=1.0, p_z=1.0)
    h0 = dyn.hamiltonian(pt, geom)
    traj = dyn.integrate(pt, geom, 12.0, 5e-4, stride=1)
    _st(traj.h_drift < 1e-8, "energy drift exceeds 1e-8")
    zlo, zhi = dyn.turning_points(1.0, 1.0, h0, geom)
    _st(abs(float(np.min(traj.z)) - zlo) < 1e-5
        and abs(float(np.max(traj.z)) - zhi) < 1e-5,
        "observed extremes miss the turning points")
    _emit(["selftest vertical: ok", "selftest deck-energy: ok",
           "selftest drift: ok", "selftest turning: ok", "selftest: pass"])
    return 0


# ---------------------------------------------------------------------------
# field

def _field_values(geom, matrix, gamma, level, pts, tol):
    return spec.eigenfunction_field(geom, matrix, gamma, level,
                                    np.asarray(pts, dtype=float), tol)


def _gluing_residual(geom, matrix, gamma, level, tol, npts):
    rng = np.random.default_rng(0)
    w = rng.random((npts, 2))
    z = rng.random(npts) - 0.5
    right = np.column_stack([w, z])
    (a, b), (c, d) = matrix
    left = np.column_stack([a * w[:, 0] + b * w[:, 1],
                            c * w[:, 0] + d * w[:, 1], z + 1.0])
    lv = _field_values(geom, matrix, gamma, level, left, tol)
    rv = _field_values(geom, matrix, gamma, level, right, tol)
    return float(np.max(np.abs(lv - rv)))


def _cmd_field(cfg):
    if cfg.selftest:
        return _selftest_field(cfg)
    geom = geometry(cfg.matrix, cfg.metric)
    gamma = cfg.params["gamma"]
    level = cfg.params["level"]
    zslice = cfg.params["z"]
    grid = cfg.params["grid"]
    tol = cfg.params["trunc_tol"]
    pts = [(i / grid, j / grid, zslice)
           for i in range(grid) for j in range(grid)]
    vals = _field_values(geom, cfg.matrix, gamma, level, pts, tol)
    resid = _gluing_residual(geom, cfg.matrix, gamma, level, tol, 16)
    lines = _head(cfg) + [
        f"gamma: {_liststr(gamma)}",
        f"level: {level}",
        f"z: {fmt(zslice)}",
        f"grid: {grid}",
        f"trunc_tol: {fmt(tol)}",
        f"max_abs: {fmt(float(np.max(np.abs(vals))))}",
        f"gluing_residual: {fmt(resid)}"]
    _emit(lines)
    if cfg.out:
        rows = [(p[0], p[1], p[2], val.real, val.imag, abs(val))
                for p, val in zip(pts, vals)]
        write_csv(_outpath(cfg, "field.csv"), FIELD_HEADER, rows)
        re = np.real(vals).reshape(grid, grid)
        svg = svgout.field_slice_svg(re.T, (0.0, 1.0, 0.0, 1.0),
                                     title="eigenfunction slice")
        svgout.write_svg(svg, _outpath(cfg, "field.svg"))
    return 0


def _selftest_field(cfg):
    geom = geometry(cfg.matrix, cfg.metric)
    resid = _gluing_residual(geom, cfg.matrix, (1, 0), 0, 1e-8, 12)
    _st(resid < 1e-7, f"gluing residual {resid:.3e} exceeds 1e-7")
    pts = [(i / 5, j / 5, 0.1) for i in range(5) for j in range(5)]
    vals = _field_values(geom, cfg.matrix, (1, 0), 0, pts, 1e-8)
    _st(bool(np.all(np.isfinite(vals.view(float)))), "field values not finite")
    _st(float(np.max(np.abs(vals))) > 0.0, "field vanishes identically")
    _emit(["selftest gluing: ok", "selftest finite: ok", "selftest: pass"])
    return 0


# ---------------------------------------------------------------------------
# entry

_COMMANDS = {"forms": _cmd_forms, "spectrum": _cmd_spectrum,
             "weyl": _cmd_weyl, "spacing": _cmd_spacing,
             "flower": _cmd_flower, "geodesic": _cmd_geodesic,
             "field": _cmd_field}


def _fail(kind, exc):
    msg = " ".join(str(exc).split())
    sys.stderr.write(f"solspec: {kind}: {msg}\n")


def run(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _apply_json_config(args)
        cfg = _build_config(args)
        return _COMMANDS[cfg.command](cfg)
    except ValidationError as exc:
        _fail("validation", exc)
        return 2
    except ConvergenceError as exc:
        _fail("convergence", exc)
        return 3
    except ResourceError as exc:
        _fail("resource", exc)
        return 3
    except SolverInconsistency as exc:
        _fail("internal", exc)
        return 3
    except OSError as exc:
        _fail("validation", exc)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
