"""Analysis payloads, deterministic serialization and rendering.

Every number in a payload is tagged with how it was obtained: ``exact``
(a rational, written "p/q"), ``log-space`` (128-bit logs rounded to a
double) or ``monte-carlo`` (double-precision sampling), plus a tolerance
where one applies.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from . import __version__
from .arith import format_rational, log_int, parse_rational
from .assembly import (additional_property_witness, build_E, build_W, packing_separation,
                       sample_component_points)
from .cantor import CONSTANT, RANDOM, Address, CantorApprox, RatioSpec
from .capacity import endpoint_diameter_seq, series_capacity_bound
from .dimension import dim_estimate_seq, random_log_ratios
from .errors import Unsupported, WitnessNotFound
from .perfectness import canonical_ratio, hnup_witness, up_modulus_bound
from .porosity import (CircleFamily, IntervalUnion, circle_family_ratio, empty_ball_search,
                       line_porosity_constant)


def exact(q) -> dict:
    return {"value": format_rational(Fraction(q)), "mode": "exact"}


def approx(x, mode: str = "log-space", tol: float | None = None) -> dict:
    d = {"value": float(x), "mode": mode}
    if tol is not None:
        d["tol"] = tol
    return d


def _point(p) -> list[str]:
    return [format_rational(p[0]), format_rational(p[1])]


def _annulus(ann) -> dict:
    return {
        "center": _point(ann.center),
        "inner_sq": exact(ann.inner_sq),
        "outer_sq": exact(ann.outer_sq),
        "ratio_sq": exact(ann.ratio_sq),
        "ratio": approx(ann.ratio, "log-space", 1e-15),
        "modulus": approx(ann.modulus, "log-space", 1e-15),
    }


# ------------------------------------------------------------------ payloads

def build_payload(spec: RatioSpec, k: int, budget_bits: int, max_enumeration: int) -> dict:
    ap = CantorApprox(spec, budget_bits, max_enumeration)
    st = ap.state(k)
    rows = []
    if st.exact:
        A = st.A
        for i, left in enumerate(ap.lefts(k)):
            rows.append({"address": str(Address.from_index(i, k, spec.m)),
                         "left": format_rational(left), "length": format_rational(A)})
    else:
        ap._check_enumeration(k)
        for i in range(spec.m**k):
            rows.append({"address": str(Address.from_index(i, k, spec.m)),
                         "left": None, "length": None})
    return {
        "kind": "build",
        "depth": k,
        "exact": st.exact,
        "warning": None if st.exact else "exact lengths exceed the bit budget; only log lengths kept",
        "log_length": approx(st.log_A, "log-space", 1e-30),
        "intervals": rows,
    }


def build_csv(payload: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["address", "left_num", "left_den", "len_num", "len_den", "log_len"])
    log_len = format(payload["log_length"]["value"], ".17g")
    for row in payload["intervals"]:
        if row["left"] is None:
            w.writerow([row["address"], "", "", "", "", log_len])
            continue
        left, length = parse_rational(row["left"]), parse_rational(row["length"])
        w.writerow([row["address"], left.numerator, left.denominator,
                    length.numerator, length.denominator, log_len])
    return buf.getvalue()


def dim_payload(spec: RatioSpec, K: int, window=Fraction(1, 4)) -> dict:
    est = dim_estimate_seq(spec, K, window)
    mode = est.mode
    step = max(1, K // 512)
    samples = [[k, v] for k, v in est.samples if k % step == 0 or k == K]
    out = {
        "kind": "dim",
        "depth": K,
        "mode": mode,
        "window": list(est.window),
        "liminf_estimate": approx(est.liminf_estimate, mode, 1e-12 if mode == "log-space" else None),
        "samples": samples,
    }
    if est.closed_form:
        out["closed_form"] = {"expression": est.closed_form.expression,
                              "label": est.closed_form.label,
                              "value": approx(est.closed_form.value, "log-space", 1e-15)}
    if spec.variant == RANDOM:
        logs = random_log_ratios(spec, K)
        out["mean_log_ratio"] = approx(float(logs.mean()), "monte-carlo")
        out["expected_mean_log_ratio"] = approx(-float(log_int(spec.m + 1) + 1), "log-space")
    return out


def cap_payload(spec: RatioSpec, K: int, tol: float = 1e-9) -> dict:
    out = {"kind": "cap", "depth": K}
    seq = endpoint_diameter_seq(spec, K)
    out["endpoint_products"] = [{
        "k": e.k,
        "n": e.product.n,
        "logP_sq": approx(e.product.logP_sq, "log-space", 1e-9),
        "logD": approx(e.product.logD, "log-space", 1e-9),
        "rhs": None if e.rhs is None else approx(e.rhs, "log-space", 1e-9),
        "holds": e.holds,
        "certified": e.certified,
    } for e in seq]
    if spec.m == 2:
        sb = series_capacity_bound(spec, tol)
        out["series"] = {
            "partial_sums": [approx(s, "log-space", tol) for s in sb.partial_sums],
            "limit_estimate": approx(sb.limit_estimate, "log-space", tol),
            "closed_form": None if sb.closed_form is None else approx(sb.closed_form, "log-space", 1e-15),
            "cap_lower_bound": (exact(sb.cap_lower_bound_exact) if sb.cap_lower_bound_exact is not None
                                else approx(sb.cap_lower_bound, "log-space", tol)),
            "certified": sb.certified,
        }
    return out


def up_payload(spec: RatioSpec, M, K: int, point: str = "") -> dict:
    M = Fraction(M)
    ap = CantorApprox(spec)
    out = {"kind": "up", "depth": K, "target_ratio": exact(M), "point": point or "0"}
    out["canonical_ratios"] = [[k, format_rational(canonical_ratio(spec.m, ap.ratio(k)))]
                               for k in range(1, K + 1)]
    if spec.variant == CONSTANT:
        bound, log_bound = up_modulus_bound(spec.m, spec.a)
        out["up_bound"] = {"M": exact(bound), "log_M": approx(log_bound)}
    try:
        w = hnup_witness(ap, Address.parse(point, spec.m), M, K)
        out["witness"] = {"found": True, "depth": w.depth, "address": str(w.point),
                          "annulus": _annulus(w.annulus), "sound": w.verdict.sound}
    except WitnessNotFound as e:
        out["witness"] = {"found": False, "conclusive": e.conclusive, "reason": e.reason}
    return out


def porosity_payload(spec: RatioSpec, k: int, n_max: int = 12, grid: int = 65) -> dict:
    fam = CircleFamily(n_max)
    rows = []
    for n in range(1, n_max):
        p = empty_ball_search(fam, 0, Fraction(1, n), grid)
        rows.append({"n": n, "found": dict(exact(p.ratio), search_slack=p.slack),
                     "formula": exact(circle_family_ratio(n)),
                     "center": None if p.b is None else _point(p.b)})
    ap = CantorApprox(spec)
    shape = IntervalUnion.from_approx(ap, k)
    probes = []
    for j in range(1, k + 1):
        a = ap.A(j)  # right end of the leftmost depth-j interval
        r = ap.e(j) / 2
        p = empty_ball_search(shape, a, r, grid)
        probes.append({"level": j, "a": format_rational(a), "r": format_rational(r),
                       "ratio": dict(exact(p.ratio), search_slack=p.slack)})
    return {"kind": "porosity", "line_constant": exact(line_porosity_constant()),
            "circle_family": rows, "line_probes": probes}


def assembly_payload(M_max: int = 5, depth: int = 8, M=100, points: int = 10,
                     seed: int = 0, planar: bool = True) -> dict:
    M = Fraction(M)
    pset = build_E(M_max, depth) if planar else build_W(M_max, depth)
    comps = []
    for img in pset.images:
        lo, hi = img.dimension_bounds()
        comps.append({"m": img.m, "scale": exact(img.map.scale),
                      "bounding_rect": [format_rational(v) for v in img.bounding_rect()],
                      "ring": [format_rational(pset.rho(2 * img.m + 1)), format_rational(pset.rho(2 * img.m))],
                      "dim_lower": approx(lo), "dim_upper": approx(hi)})
    seps = [{"m": m, "ring": 2 * m + 1, "separates": v.separates} for m, v in packing_separation(pset)]
    witnesses = []
    for x in [(Fraction(0), Fraction(0))] + sample_component_points(pset, points, seed):
        try:
            w = additional_property_witness(pset, x, M)
            witnesses.append({"x": _point(x), "found": True, "component": w.component,
                              "depth": w.depth, "annulus": _annulus(w.annulus)})
        except WitnessNotFound as e:
            witnesses.append({"x": _point(x), "found": False, "reason": e.reason})
    return {"kind": "assembly", "set": pset.kind, "M_max": M_max, "target_ratio": exact(M),
            "components": comps, "packing_separation": seps, "witnesses": witnesses,
            "dimension_sup": approx(pset.dimension_sup())}


# -------------------------------------------------------------------- output

def envelope(config: dict, payload: dict) -> dict:
    return {"tool": "hnup", "version": __version__, "config": config, "result": payload}


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(d):
    return d["value"] if isinstance(d, dict) else d


def _fmt(x: float) -> str:
    return format(x, ".6f")


def render_svg(report: dict, width: int = 1000) -> str:
    """SVG of a build (intervals on a line) or assembly (rings plus
    component boxes, log-polar so every ring is visible) report."""
    res = report["result"]
    kind = res["kind"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{{h}}" '
             f'viewBox="0 0 {width} {{h}}">']
    if kind == "build":
        h = 60
        rows = [r for r in res["intervals"] if r["left"] is not None]
        for r in rows:
            x = float(parse_rational(r["left"])) * width
            w = float(parse_rational(r["length"])) * width
            parts.append(f'<rect x="{_fmt(x)}" y="20" width="{_fmt(w)}" height="20" fill="black"/>')
    elif kind == "assembly":
        h = width
        c = width / 2
        # radius rho -> pixels via log scale, keeping nested rings apart
        rings = sorted({parse_rational(v) for comp in res["components"] for v in comp["ring"]},
                       reverse=True)
        lo = math.log2(rings[-1])

        def scale(q):
            return c * (0.05 + 0.95 * (1 - math.log2(q) / lo))

        for q in rings:
            parts.append(f'<circle cx="{_fmt(c)}" cy="{_fmt(c)}" r="{_fmt(scale(q))}" '
                         'fill="none" stroke="gray"/>')
        for comp in res["components"]:
            inner, outer = (parse_rational(v) for v in comp["ring"])
            si, so = scale(inner), scale(outer)
            side = so - si
            parts.append(f'<rect x="{_fmt(c + si)}" y="{_fmt(c - side / 2)}" '
                         f'width="{_fmt(side)}" height="{_fmt(side)}" fill="none" stroke="black">'
                         f'<title>m={comp["m"]}</title></rect>')
        parts.append(f'<circle cx="{_fmt(c)}" cy="{_fmt(c)}" r="2" fill="black"/>')
    else:
        raise Unsupported(f"no SVG rendering for {kind!r} reports")
    parts.append("</svg>")
    return "\n".join(parts).replace("{h}", str(h)) + "\n"


def render_csv(report: dict) -> str:
    """Plot data: dimension samples, canonical ratios or capacity partial sums."""
    res = report["result"]
    kind = res["kind"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if kind == "dim":
        w.writerow(["k", "s_k"])
        for k, v in res["samples"]:
            w.writerow([k, format(v, ".17g")])
    elif kind == "up":
        w.writerow(["k", "canonical_ratio", "modulus"])
        for k, q in res["canonical_ratios"]:
            w.writerow([k, q, format(math.log(float(parse_rational(q))), ".17g")])
    elif kind == "cap":
        w.writerow(["l", "partial_sum"])
        for l, s in enumerate(res.get("series", {}).get("partial_sums", [])):
            w.writerow([l, format(_num(s), ".17g")])
    elif kind == "build":
        return build_csv(res)
    else:
        raise Unsupported(f"no CSV rendering for {kind!r} reports")
    return buf.getvalue()
