"""Command-line entry point: ``qgeom <subcommand> ...``.

Every subcommand wraps one library call, prints a short human summary and,
with ``--json PATH`` (``-`` for stdout), writes a JSON document that embeds the
tool version and an echo of the configuration.  Exit codes: 0 pass, 1 check
failure, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import metadata

import numpy as np

from .bitangents import bitangents_through_point
from .chow import run_ledger
from .gauss_double import find_double_pairs, osculation_certificate, retrace, trace_C_dou
from .poly import DegenerateInput, MultiPoly, ProjPoint
from .surface import (
    PointKind,
    QuarticSurface,
    classify_point,
    fermat_fixture,
    hyperflex_fixture,
    parabolic_fixture,
    random_points_on_surface,
    random_quartic,
    swallowtail_fixture,
    tangent_section,
)

log = logging.getLogger("qgeom")

FIXTURES = {
    "fermat": fermat_fixture,
    "swallowtail": swallowtail_fixture,
    "parabolic": parabolic_fixture,
    "hyperflex": hyperflex_fixture,
}
DIGITS = 12


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.1.0"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    surface: str | None = None
    seed: int | None = None
    fixture: str | None = None
    tol: float = 1e-9
    rng: int = 0
    threads: int = 1
    json: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        sources = [s for s in (self.surface, self.seed, self.fixture) if s is not None]
        if self.command not in ("ledger",) and len(sources) != 1:
            raise UsageError("exactly one of --surface, --seed, --fixture is required")
        if self.tol <= 0:
            raise UsageError("--tol must be positive")
        if self.threads < 1:
            raise UsageError("--threads must be at least 1")

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("json")
        return d


def canonical(obj):
    """Round floats to a fixed number of significant digits so output bytes are stable."""
    if isinstance(obj, float):
        return float(f"{obj:.{DIGITS}g}") if np.isfinite(obj) else str(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.floating,)):
        return canonical(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [canonical(obj.real), canonical(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    return obj


def envelope(cfg: RunConfig, result, passed: bool) -> dict:
    return {"tool": "qgeom", "version": version(), "config": canonical(cfg.echo()),
            "pass": passed, "result": canonical(result)}


def parse_point(text: str) -> ProjPoint:
    try:
        coords = [complex(c.replace(" ", "")) for c in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse point {text!r}") from exc
    if len(coords) != 4:
        raise UsageError("a point in P^3 needs four coordinates")
    coords = [c.real if c.imag == 0 else c for c in coords]
    return ProjPoint(coords)


def load_surface(cfg: RunConfig) -> QuarticSurface:
    if cfg.seed is not None:
        return random_quartic(cfg.seed)
    if cfg.fixture is not None:
        return FIXTURES[cfg.fixture]()
    try:
        with open(cfg.surface) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {cfg.surface}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"schema error: {cfg.surface} is not valid JSON ({exc})") from exc
    if isinstance(data, dict) and isinstance(data.get("result"), dict):
        data = data["result"]
    try:
        return QuarticSurface.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"schema error: {cfg.surface}: {exc}") from exc


def _surface_point(X: QuarticSurface, cfg: RunConfig) -> ProjPoint:
    if cfg.extra.get("point"):
        return parse_point(cfg.extra["point"])
    return random_points_on_surface(X, np.random.default_rng(cfg.rng), 1)[0]


# -- subcommand bodies (library calls only) -------------------------------------------


def cmd_random_quartic(cfg: RunConfig) -> tuple[dict, bool, str]:
    X = random_quartic(cfg.seed if cfg.seed is not None else cfg.rng)
    return X.to_json(), bool(X.smooth), f"quartic with {len(X.F.terms)} terms, smooth={X.smooth}"


def cmd_ledger(cfg: RunConfig) -> tuple[dict, bool, str]:
    rep = run_ledger()
    return rep.to_json(), rep.all_pass, rep.table()


def cmd_bitangents(cfg: RunConfig) -> tuple[dict, bool, str]:
    X = load_surface(cfg)
    if cfg.extra.get("point"):
        p = parse_point(cfg.extra["point"])
    else:
        p = ProjPoint(np.random.default_rng(cfg.rng).standard_normal(4))
    rep = bitangents_through_point(X, p, seed=cfg.rng, tol=cfg.tol)
    want = 6 if rep.on_surface else 12
    ok = len(rep.bitangents) == want
    return rep.to_json(), ok, f"{len(rep.bitangents)} certified bitangents (expected {want})"


def cmd_classify(cfg: RunConfig) -> tuple[dict, bool, str]:
    X = load_surface(cfg)
    p = _surface_point(X, cfg)
    cls, profile = classify_point(X, p, seed=cfg.rng)
    out = {"point": p.to_json(), "class": cls.name, "reason": cls.reason,
           "profile": profile.to_json() if profile else None}
    return out, cls.kind is not PointKind.UNCLASSIFIED, str(cls)


def cmd_section(cfg: RunConfig) -> tuple[dict, bool, str]:
    from .singularities import DegenerateCurve, section_profile

    X = load_surface(cfg)
    p = _surface_point(X, cfg)
    sec, origin = tangent_section(X, p)
    out = {"point": p.to_json(), "section": sec.to_json(), "origin": origin.to_json()}
    try:
        prof = section_profile(sec, seed=cfg.rng, known=[origin])
    except DegenerateCurve as exc:
        out["error"] = str(exc)
        return out, False, f"degenerate section: {exc}"
    out["profile"] = prof.to_json()
    kinds = ", ".join(r.type.name for r in prof.reports)
    return out, True, f"genus {prof.geometric_genus}; singularities: {kinds}"


def cmd_gauss_double(cfg: RunConfig) -> tuple[dict, bool, str]:
    X = load_surface(cfg)
    search = find_double_pairs(X, cfg.extra.get("seeds", 200), rng_seed=cfg.rng)
    out = search.to_json()
    out["osculation"] = [osculation_certificate(X, pr).ok for pr in search.pairs]
    ok = bool(search.pairs) and all(out["osculation"])
    summary = f"{len(search.pairs)} certified pairs from {search.seeds} seeds"
    steps = cfg.extra.get("steps", 0)
    if steps and search.pairs:
        path = trace_C_dou(X, search.pairs[0], steps, seed=cfg.rng)
        dev = retrace(path)
        out["path"] = path.to_json()
        out["retrace_deviation"] = dev
        ok &= len(path.samples) > steps // 2 and dev < 1e-6
        summary += f"; path of {len(path.samples)} samples ({path.stop_reason}), retrace {dev:.1e}"
    return out, ok, summary


def _fiber_check(X: QuarticSurface, p, seed: int, want: int, tol: float) -> dict:
    try:
        rep = bitangents_through_point(X, p, seed=seed, tol=tol)
    except (DegenerateInput, ArithmeticError, RuntimeError, ValueError) as exc:
        return {"pass": False, "error": str(exc)}
    return {"pass": len(rep.bitangents) == want, "count": len(rep.bitangents), "expected": want,
            "max_residual": max((c.residual for c in rep.bitangents), default=0.0)}


def cmd_report(cfg: RunConfig) -> tuple[dict, bool, str]:
    X = load_surface(cfg)
    rng = np.random.default_rng(cfg.rng)
    checks: dict[str, dict] = {}

    rep = run_ledger()
    checks["ledger"] = {"pass": rep.all_pass, "passed": rep.passed, "total": len(rep.rows)}

    general = [ProjPoint(rng.standard_normal(4)) for _ in range(3)]
    on = random_points_on_surface(X, rng, 1)
    jobs = [(p, 12) for p in general] + [(p, 6) for p in on]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        fibers = list(pool.map(lambda j: _fiber_check(X, j[0], cfg.rng, j[1], cfg.tol), jobs))
    checks["fiber_12"] = {"pass": all(f["pass"] for f in fibers[:3]), "points": fibers[:3]}
    checks["fiber_6"] = {"pass": fibers[3]["pass"], "points": fibers[3:]}

    samples = random_points_on_surface(X, rng, cfg.extra.get("samples", 20))
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        classes = list(pool.map(lambda p: classify_point(X, p, seed=cfg.rng)[0], samples))
    counts: dict[str, int] = {}
    for c in classes:
        counts[c.name] = counts.get(c.name, 0) + 1
    checks["classify"] = {"pass": counts.get("Unclassified", 0) == 0, "counts": dict(sorted(counts.items()))}

    try:
        search = find_double_pairs(X, cfg.extra.get("seeds", 200), rng_seed=cfg.rng)
        checks["gauss_double"] = {"pass": bool(search.pairs), "certified": len(search.pairs),
                                  "rejected": dict(sorted(search.rejected.items()))}
    except (DegenerateInput, ArithmeticError, RuntimeError, ValueError) as exc:
        checks["gauss_double"] = {"pass": False, "error": str(exc)}

    ok = all(c["pass"] for c in checks.values())
    lines = [f"{name:<14} {'PASS' if c['pass'] else 'FAIL'}" for name, c in checks.items()]
    return {"surface": X.to_json(), "checks": checks}, ok, "\n".join(lines)


COMMANDS = {
    "random-quartic": cmd_random_quartic,
    "report": cmd_report,
    "ledger": cmd_ledger,
    "bitangents": cmd_bitangents,
    "classify": cmd_classify,
    "gauss-double": cmd_gauss_double,
    "section": cmd_section,
}


# -- argument handling -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--surface", metavar="PATH", help="quartic surface JSON file")
    src.add_argument("--seed", type=int, metavar="N", help="generate a random integer quartic")
    src.add_argument("--fixture", choices=sorted(FIXTURES), help="built-in special surface")
    common.add_argument("--tol", type=float, default=1e-9, help="certificate tolerance")
    common.add_argument("--rng", type=int, default=0, metavar="N", help="seed for sampling")
    common.add_argument("--threads", type=int, default=1, metavar="N")
    common.add_argument("--json", metavar="PATH", help="write the JSON result here ('-' for stdout)")

    parser = argparse.ArgumentParser(prog="qgeom", description="Bitangents and the Gauss map of quartic surfaces.")
    parser.add_argument("--version", action="version", version=f"qgeom {version()}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("random-quartic", parents=[common], help="write a random smooth quartic")
    sub.add_parser("ledger", parents=[common], help="intersection-number identities")
    for name, helptext in (("bitangents", "bitangent lines through a point"),
                           ("classify", "type of a surface point"),
                           ("section", "singularities of a tangent section")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--point", metavar="X0,X1,X2,X3")
    g = sub.add_parser("gauss-double", parents=[common], help="search and trace Gauss double pairs")
    g.add_argument("--seeds", type=int, default=200)
    g.add_argument("--steps", type=int, default=0, help="continuation steps from the first pair")
    r = sub.add_parser("report", parents=[common], help="run all checks on one surface")
    r.add_argument("--seeds", type=int, default=200)
    r.add_argument("--samples", type=int, default=20)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    extra = {k: getattr(args, k) for k in ("point", "seeds", "steps", "samples")
             if getattr(args, k, None) is not None}
    return RunConfig(args.command, args.surface, args.seed, args.fixture, args.tol, args.rng,
                     args.threads, args.json, extra)


def run(cfg: RunConfig) -> tuple[dict, bool, str]:
    result, ok, text = COMMANDS[cfg.command](cfg)
    return envelope(cfg, result, ok), ok, text


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("QG_LOG", "WARNING").upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        doc, ok, text = run(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"qgeom {version()} {cfg.command} config={json.dumps(canonical(cfg.echo()), sort_keys=True)}")
    print(text)
    print("PASS" if ok else "FAIL")
    if cfg.json:
        payload = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if cfg.json == "-":
            sys.stdout.write(payload)
        else:
            try:
                with open(cfg.json, "w") as fh:
                    fh.write(payload)
            except OSError as exc:
                print(f"error: cannot write {cfg.json}: {exc}", file=sys.stderr)
                return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
