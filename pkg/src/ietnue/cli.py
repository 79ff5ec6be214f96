"""``ietnue`` command-line entry point.

Every command prints one JSON document on stdout (or CSV/SVG with
``--format``) that embeds the run configuration and its hash. Exit codes:
0 ok, 2 a check failed, 3 a resource budget ran out, 4 bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .fractal import (
    NO_DELETION,
    CubeFamily,
    DeletionRule,
    SkSource,
    ball_mass_exponent,
    build_family,
    dimension_bound,
    verify_conditions,
)
from .geometry import check_angle_decay, check_column_sums, decay_profile, span_separation_bound
from .iet import DEFAULT_BIT_BUDGET, BitBudgetExceeded, IntervalExchange
from .linalg import VisitationMatrix
from .nue import endpoint_divergence, limit_segment, replay, witness_iet
from .paths import build_chain, build_mk_cached, cache_dir, get_profile, n1, sample_mk
from .rauzy import RauzyUndefined, rauzy_class, rauzy_step
from .sl2 import SamplingFailure, count_balanced, growth_exponent

EXIT_OK, EXIT_CHECK, EXIT_BUDGET, EXIT_INPUT = 0, 2, 3, 4
ANGLE_LEAD = Fraction(-8, 3)
ANGLE_TOL = 0.15


@dataclass(frozen=True)
class RunConfig:
    command: str
    profile: str
    k: int
    seed: int
    D: str
    samples: int
    bit_budget: int
    cache_dir: str
    format: str

    def validate(self) -> None:
        get_profile(self.profile)
        if self.k < 1:
            raise ValueError("--k must be >= 1")
        if self.samples < 1:
            raise ValueError("--samples must be >= 1")
        if Fraction(self.D) < 1:
            raise ValueError("--D must be >= 1")
        if self.bit_budget < 64:
            raise ValueError("--bit-budget must be >= 64")
        if self.format not in ("json", "csv", "svg"):
            raise ValueError("--format must be json, csv or svg")

    def to_json(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _config(args, command: str, **defaults) -> RunConfig:
    def pick(name, fallback):
        v = getattr(args, name, None)
        return defaults.get(name, fallback) if v is None else v

    cfg = RunConfig(
        command=command,
        profile=pick("profile", "paper"),
        k=int(pick("k", 1)),
        seed=int(pick("seed", 0)),
        D=str(Fraction(pick("D", "10"))),
        samples=int(pick("samples", 1)),
        bit_budget=int(pick("bit_budget", DEFAULT_BIT_BUDGET)),
        cache_dir=str(cache_dir(getattr(args, "cache_dir", None))),
        format=pick("format", "json"),
    )
    cfg.validate()
    return cfg


def _envelope(cfg: RunConfig, body: dict, ok: bool) -> dict:
    return {"config": cfg.to_json(), "config_hash": cfg.digest(), "ok": ok, **body}


def _emit(cfg: RunConfig, doc: dict, args, name: str, csv_text: Optional[str] = None, svg_text: Optional[str] = None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
    out = getattr(args, "out", None)
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{name}.json").write_text(text)
        if csv_text is not None:
            (d / f"{name}.csv").write_text(f"# config_hash={cfg.digest()}\n" + csv_text)
        if svg_text is not None:
            (d / f"{name}.svg").write_text(svg_text)
    if cfg.format == "csv" and csv_text is not None:
        sys.stdout.write(f"# config_hash={cfg.digest()}\n" + csv_text)
    elif cfg.format == "svg" and svg_text is not None:
        sys.stdout.write(svg_text)
    else:
        sys.stdout.write(text)


def _svg_lines(series: dict, title: str, config_hash: str) -> str:
    """Minimal line plot of named ``(x, y)`` series."""
    W, H, pad = 480, 320, 40
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys) if math.isfinite(y)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    sx = lambda x: pad + (x - x0) / ((x1 - x0) or 1) * (W - 2 * pad)
    sy = lambda y: H - pad - (y - y0) / ((y1 - y0) or 1) * (H - 2 * pad)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
        f"<!-- config_hash={config_hash} -->",
        f'<text x="{pad}" y="20" font-size="13">{title}</text>',
    ]
    for (name, (xs, ys)), col in zip(series.items(), colors):
        path = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in zip(xs, ys) if math.isfinite(y))
        parts.append(f'<polyline fill="none" stroke="{col}" points="{path}"/>')
        parts.append(f'<text x="{W - pad - 60}" y="{30 + 14 * len(parts)}" font-size="11" fill="{col}">{name}</text>')
    parts.append("</svg>\n")
    return "\n".join(parts)


# --- commands ------------------------------------------------------------------


def cmd_rauzy(args) -> int:
    cfg = _config(args, f"rauzy {args.action}")
    if args.action == "class":
        g = rauzy_class(args.perm)
        doc = _envelope(cfg, {"graph": g.to_json()}, True)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "rauzy.dot").write_text(f"// config_hash={cfg.digest()}\n" + g.to_dot())
        _emit(cfg, doc, args, "rauzy-class")
        return EXIT_OK
    src = args.iet
    text = Path(src).read_text() if src and os.path.exists(src) else (src or sys.stdin.read())
    T = IntervalExchange.from_json(text)
    T2, move, M = rauzy_step(T)
    doc = _envelope(cfg, {"move": move.value, "matrix": M.to_json(), "iet": T2.to_json()}, True)
    _emit(cfg, doc, args, "rauzy-step")
    return EXIT_OK


def _verify_column_size(cfg, args):
    profile = get_profile(cfg.profile)
    reports = []
    for s in range(cfg.samples):
        spec = sample_mk(cfg.k, cfg.seed + s, profile, Fraction(cfg.D))
        for depth in range(1, cfg.k + 1):
            M = build_mk_cached(spec.truncate(depth), Path(cfg.cache_dir))
            rep = check_column_sums(M, depth, profile.base)
            reports.append({"sample": s, "spec_hash": spec.content_hash(), **rep.to_json()})
    passed = sum(r["ok"] for r in reports)
    body = {"check": "column-size", "passed": passed, "total": len(reports), "reports": reports}
    csv = "sample,k,ok," + ",".join(f"log10_margin_{j}" for j in range(1, 5)) + "\n"
    csv += "".join(f"{r['sample']},{r['k']},{r['ok']}," + ",".join(f"{m:.4f}" for m in r["log10_margin"]) + "\n" for r in reports)
    return body, passed == len(reports), csv, None


def _verify_line_seg(cfg, args):
    profile = get_profile(cfg.profile)
    reports = []
    for s in range(cfg.samples):
        spec = sample_mk(cfg.k, cfg.seed + s, profile, Fraction(cfg.D))
        chain = build_chain(spec)
        rep = span_separation_bound(chain, n1(spec.A[0], spec.r[0]))
        reports.append({"sample": s, "spec_hash": spec.content_hash(), **rep.to_json()})
    ok = all(r["ok"] for r in reports)
    csv = "sample,certified,base_sin2,final_sin2,ok\n" + "".join(
        f"{r['sample']},{r['certified_lower_bound']},{r['base_sin2']!r},{r['measured_sin2'][-1]!r},{r['ok']}\n" for r in reports)
    return {"check": "line-seg", "reports": reports}, ok, csv, None


def angle_decay_study(k: int, seed: int, profile_name: str, D) -> dict:
    profile = get_profile(profile_name)
    spec = sample_mk(k, seed, profile, Fraction(D))
    chain = build_chain(spec)
    prof = decay_profile(chain, with_between=False)
    blocks = spec.blocks()
    d_primes = []
    for j in range(k):
        before = chain[j - 1] if j else VisitationMatrix.identity(4)
        first, second = blocks[2 * j], blocks[2 * j + 1]
        d_primes.append(check_angle_decay(before, first, "C34").tightest_d_prime)
        d_primes.append(check_angle_decay(before @ first.matrix(), second, "C12").tightest_d_prime)
    leads = {w: float(prof.fit(w, 3, profile.base)[0]) for w in ("C12", "C34")}
    lo, hi = sorted((float(ANGLE_LEAD) * (1 - ANGLE_TOL), float(ANGLE_LEAD) * (1 + ANGLE_TOL)))
    return {
        "spec_hash": spec.content_hash(),
        "profile": profile.name,
        "log_base": profile.base,
        "profile_log10": prof.to_json(),
        "cubic_leading": leads,
        "target": [str(ANGLE_LEAD), ANGLE_TOL],
        "within_tolerance": {w: lo <= v <= hi for w, v in leads.items()},
        "block_tightest_d_prime": d_primes,
    }


def _verify_angle_decay(cfg, args):
    studies = [angle_decay_study(cfg.k, cfg.seed + s, cfg.profile, cfg.D) for s in range(cfg.samples)]
    ok = all(all(st["within_tolerance"].values()) for st in studies)
    st = studies[0]
    series = {w: (st["profile_log10"]["k"], st["profile_log10"][f"log10_{w.lower()}"]) for w in ("C12", "C34")}
    svg = _svg_lines(series, "log10 within-group angle vs k", cfg.digest())
    csv = "sample,k,log10_c12,log10_c34\n" + "".join(
        f"{s},{k},{a!r},{b!r}\n" for s, st in enumerate(studies)
        for k, a, b in zip(st["profile_log10"]["k"], st["profile_log10"]["log10_c12"], st["profile_log10"]["log10_c34"]))
    return {"check": "angle-decay", "studies": studies}, ok, csv, svg


def _family_from_cfg(cfg, args):
    profile = get_profile(cfg.profile)
    rule = NO_DELETION if getattr(args, "no_deletion", False) else DeletionRule(neighborhood_from_level=1 if profile.name != "paper" else 5)
    src = SkSource(profile, Fraction(cfg.D), seed=cfg.seed, enumerate_limit=16 if profile.scale == "exp" else 64)
    return build_family(cfg.k, src, rule)


def _verify_conditions(cfg, args):
    fam = _family_from_cfg(cfg, args)
    rep = verify_conditions(fam)
    body = {"check": "conditions", "level_sizes": [L.n for L in fam.levels], "deleted": len(fam.deletions), **rep.to_json()}
    ok = not any(rep.overlaps.values())
    return body, ok, None, None


VERIFY = {
    "column-size": _verify_column_size,
    "line-seg": _verify_line_seg,
    "angle-decay": _verify_angle_decay,
    "conditions": _verify_conditions,
}
VERIFY_DEFAULTS = {
    "column-size": {"profile": "paper", "k": 1, "samples": 20},
    "line-seg": {"profile": "paper", "k": 2, "samples": 1},
    "angle-decay": {"profile": "desk", "k": 4, "samples": 1},
    "conditions": {"profile": "micro", "k": 3, "samples": 1},
}


def cmd_verify(args) -> int:
    cfg = _config(args, f"verify {args.check}", **VERIFY_DEFAULTS[args.check])
    body, ok, csv, svg = VERIFY[args.check](cfg, args)
    _emit(cfg, _envelope(cfg, body, ok), args, f"verify-{args.check}", csv, svg)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_witness(args) -> int:
    cfg = _config(args, "witness", k=2)
    profile = get_profile(cfg.profile)
    spec = sample_mk(cfg.k, cfg.seed, profile, Fraction(cfg.D))
    chain = build_chain(spec)
    seg = limit_segment(chain, n1(spec.A[0], spec.r[0]))
    T = witness_iet(seg, Fraction(args.mix))
    rep = replay(T, spec.runs(), chain[-1])
    body = {
        "iet": T.to_json(),
        "certificate": {
            "spec": spec.to_json(),
            "chain_hash": spec.content_hash(),
            "segment": seg.to_json(),
            "replay": rep.to_json(),
        },
    }
    if args.orbit_steps:
        body["divergence"] = endpoint_divergence(seg, args.orbit_steps, bit_budget=cfg.bit_budget).to_json()
    ok = rep.matched and seg.separation.ok
    _emit(cfg, _envelope(cfg, body, ok), args, "witness")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_dimension(args) -> int:
    if args.action == "bound":
        cfg = _config(args, "dimension bound")
        val = dimension_bound(Fraction(args.a), Fraction(args.b))
        if cfg.format == "json" and not args.out:
            sys.stdout.write(f"{val}\n")
        else:
            _emit(cfg, _envelope(cfg, {"a": args.a, "b": args.b, "bound": str(val)}, True), args, "dimension-bound")
        return EXIT_OK
    cfg = _config(args, "dimension regress", profile="micro", k=3, samples=16)
    if args.family == "cube":
        fam, cond = CubeFamily(), None
    else:
        fam = _family_from_cfg(cfg, args)
        cond = verify_conditions(fam, check_overlaps=False)
    fit = ball_mass_exponent(fam, samples=cfg.samples, seed=cfg.seed)
    body = {"family": args.family, "fit": fit.to_json()}
    ok = True
    if cond is not None:
        body["conditions"] = cond.to_json()
        bound = cond.bound
        body["threshold"] = None if bound is None else bound - 0.3
        ok = bound is not None and fit.slope >= bound - 0.3
    _emit(cfg, _envelope(cfg, body, ok), args, "dimension-regress", fit.csv())
    return EXIT_OK if ok else EXIT_CHECK


def cmd_count(args) -> int:
    cfg = _config(args, "count", D="2")
    R = int(args.R)
    if R < 1:
        raise ValueError("--R must be >= 1")
    Rs = [2 ** e for e in range(4, R.bit_length()) if 2 ** e <= R] or [R]
    counts = [count_balanced(r, Fraction(cfg.D)) for r in Rs]
    expo = growth_exponent(Rs, counts) if len(Rs) >= 2 else float("nan")
    body = {"R": R, "count": counts[-1] if Rs[-1] == R else count_balanced(R, Fraction(cfg.D)),
            "series": [[r, c] for r, c in zip(Rs, counts)], "growth_exponent": expo}
    csv = "R,count\n" + "".join(f"{r},{c}\n" for r, c in zip(Rs, counts))
    _emit(cfg, _envelope(cfg, body, True), args, "count", csv)
    return EXIT_OK


# --- parser ---------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--profile", help="paper, desk, micro or custom:<file>")
    p.add_argument("--k", type=int, help="depth")
    p.add_argument("--seed", type=int)
    p.add_argument("--D", help="balance parameter (rational)")
    p.add_argument("--samples", type=int)
    p.add_argument("--out", help="directory for artifacts")
    p.add_argument("--format", choices=["json", "csv", "svg"])
    p.add_argument("--bit-budget", dest="bit_budget", type=int)
    p.add_argument("--cache-dir", dest="cache_dir")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ietnue", description="Exact Rauzy-induction and nested-cone toolkit for 4-interval exchanges.")
    ap.add_argument("--version", action="version", version=f"ietnue {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rauzy", help="Rauzy classes and single induction steps")
    rs = p.add_subparsers(dest="action", required=True)
    q = rs.add_parser("class")
    q.add_argument("perm")
    _common(q)
    q = rs.add_parser("step")
    q.add_argument("iet", nargs="?", help="IET JSON text or file; stdin when omitted")
    _common(q)
    p.set_defaults(func=cmd_rauzy)

    p = sub.add_parser("verify", help="run a structural check over sampled parameter sets")
    p.add_argument("check", choices=sorted(VERIFY))
    p.add_argument("--no-deletion", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("witness", help="emit a witness IET with its replay certificate")
    p.add_argument("--mix", default="1/2")
    p.add_argument("--orbit-steps", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("dimension", help="dimension bound and ball-mass regression")
    ds = p.add_subparsers(dest="action", required=True)
    q = ds.add_parser("bound")
    q.add_argument("--a", required=True)
    q.add_argument("--b", required=True)
    _common(q)
    q = ds.add_parser("regress")
    q.add_argument("--family", choices=["sk", "cube"], default="sk")
    q.add_argument("--no-deletion", action="store_true")
    _common(q)
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("count", help="count D-balanced SL2 matrices with norm in [R, 2R]")
    p.add_argument("--R", required=True)
    _common(p)
    p.set_defaults(func=cmd_count)
    return ap


def _error(kind: str, exc: BaseException, code: int) -> int:
    sys.stdout.write(json.dumps({"error": kind, "message": str(exc), "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (BitBudgetExceeded, SamplingFailure, MemoryError) as exc:
        return _error(type(exc).__name__, exc, EXIT_BUDGET)
    except RauzyUndefined as exc:
        return _error("RauzyUndefined", exc, EXIT_INPUT)
    except (ValueError, ZeroDivisionError, KeyError, OSError, json.JSONDecodeError) as exc:
        return _error(type(exc).__name__, exc, EXIT_INPUT)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
