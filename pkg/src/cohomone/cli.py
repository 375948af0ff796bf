"""Command-line entry point.

Exit codes: 0 no witness or success, 1 error, 2 witness found,
3 hypothesis failure (conditions (a)-(d) of the harmonic family do not hold).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .curvature import (
    HomogeneousCurvature,
    ambient_tensor,
    area2,
    metric_operator,
    plane_AB,
    radial_sectional,
)
from .diagram import brieskorn_diagram, theorem31_diagram
from .errors import CohomoneError
from .harmonic import check_theorem31_conditions, harmonic_rep
from .metricmodel import MetricProfile, load_profile, normalize, random_admissible, save_profile
from .obstruction import (
    CURV_TOL,
    GRID_POINTS,
    INEQ_TOL,
    SearchParams,
    bound_terms,
    default_eps,
    find_witness,
    random_block_profile,
    thm31_certify,
)
from .presets import preset_round, preset_stiefel
from .selfcheck import SUITES, run_suites

EXIT_OK, EXIT_ERROR, EXIT_WITNESS, EXIT_HYPOTHESIS = 0, 1, 2, 3
PRESETS = {"round": preset_round, "stiefel": preset_stiefel}


@dataclass
class RunConfig:
    subcommand: str
    n: int | None = None
    d: int | None = None
    l: int | None = None  # noqa: E741
    m: int | None = None
    profile: str | None = None
    preset: str | None = None
    random: bool = False
    seed: int = 0
    tol: float = INEQ_TOL
    curv_tol: float = CURV_TOL
    grid: int = GRID_POINTS
    eps: float | None = None
    exhaustive: bool = False
    output: str | None = None
    trace: str | None = None
    suites: list = field(default_factory=list)

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        keys = set(cls.__dataclass_fields__)
        vals = {k: v for k, v in vars(ns).items() if k in keys and v is not None}
        if getattr(ns, "N", None) is not None:
            vals["n"] = ns.N
        return cls(**vals)

    def to_dict(self) -> dict:
        return asdict(self)


class _Parser(argparse.ArgumentParser):
    # usage errors are errors (exit 1); exit 2 is reserved for witnesses
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cohomone", description="Curvature obstructions for cohomogeneity one metrics.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    ve = sub.add_parser("verify-engine", help="run the curvature engine self-checks")
    ve.add_argument("--suite", dest="suites", action="append", choices=SUITES,
                    help="run only this suite (repeatable)")
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("-o", dest="output", help="write a JSON report here")

    def profile_source(p, allow_random=True):
        p.add_argument("-n", type=int, help="size of SO(n)")
        p.add_argument("-d", type=int, help="degree d")
        p.add_argument("--profile", help="profile JSON file")
        p.add_argument("--preset", choices=sorted(PRESETS))
        if allow_random:
            p.add_argument("--random", action="store_true", help="random admissible profile (needs -n, -d)")
        p.add_argument("--seed", type=int, default=0)

    ce = sub.add_parser("certify", help="search a profile for a negative curvature witness")
    profile_source(ce)
    ce.add_argument("--tol", type=float, default=INEQ_TOL, help="inequality tolerance")
    ce.add_argument("--curv-tol", dest="curv_tol", type=float, default=CURV_TOL)
    ce.add_argument("--grid", type=int, default=GRID_POINTS)
    ce.add_argument("--eps", type=float)
    ce.add_argument("--exhaustive", action="store_true", help="run every check even after a witness")
    ce.add_argument("-o", dest="output", help="report JSON path (stdout when omitted)")
    ce.add_argument("--trace", help="also write a CSV trace here")

    co = sub.add_parser("class-one", help="harmonic-polynomial families: conditions and curvature bound")
    co.add_argument("-l", type=int, required=True)
    co.add_argument("-m", type=int, required=True)
    co.add_argument("-N", type=int, required=True, help="size of SO(N)")
    co.add_argument("--seed", type=int, default=0)
    co.add_argument("--tol", type=float, default=CURV_TOL)
    co.add_argument("-o", dest="output")

    pr = sub.add_parser("preset", help="write a reference profile as JSON")
    pr.add_argument("preset", choices=sorted(PRESETS))
    pr.add_argument("-n", type=int, required=True)
    pr.add_argument("-o", dest="output", required=True)

    tr = sub.add_parser("trace", help="CSV of delta, catalog curvatures and envelopes along the geodesic")
    profile_source(tr)
    tr.add_argument("--grid", type=int, default=200)
    tr.add_argument("--eps", type=float)
    tr.add_argument("-o", dest="output", required=True)
    return parser


# -- helpers --------------------------------------------------------------


def resolve_profile(cfg: RunConfig) -> MetricProfile:
    sources = [cfg.profile is not None, cfg.preset is not None, cfg.random]
    if sum(sources) != 1:
        raise CohomoneError("give exactly one of --profile, --preset, --random")
    if cfg.profile is not None:
        return load_profile(cfg.profile)
    if cfg.n is None:
        raise CohomoneError("-n is required")
    if cfg.preset is not None:
        return PRESETS[cfg.preset](cfg.n)
    if cfg.d is None:
        raise CohomoneError("--random needs -d")
    return random_admissible(cfg.n, cfg.d, cfg.seed)


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=True) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


TRACE_COLUMNS = ("t", "delta", "delta_prime", "sec_EF", "sec_XF1", "sec_YF1", "sec_radial_F1", "U", "V")


def trace_rows(p: MetricProfile, points: int, eps: float | None = None) -> list[tuple]:
    """One row per grid point; U and V only for reduced profiles where delta > 0.

    Curvatures are those of ``p`` itself. Delta, its derivative and the
    envelopes come from the normalized profile at the matching time ``a t``.
    """
    pn = p if p.is_normalized else normalize(p)
    scale = pn.L / p.L
    D = brieskorn_diagram(p.n, p.d)
    A, B = plane_AB(D)
    X, Y, F = D.unit("X"), D.unit("Y"), D.unit("F1")
    a = pn.jet(0.0).v["f2"] ** 2
    eps = default_eps(pn.L) if eps is None else eps
    rows = []
    for t in np.linspace(0.0, p.L, points):
        jet = p.jet(float(t))
        njet = pn.jet(float(scale * t))
        h2, h2p = njet.v["h2"], njet.d1["h2"]
        delta, ddelta = 1 - h2 * h2, -2 * h2 * h2p
        try:
            M = metric_operator(D, jet)
            hom = HomogeneousCurvature(D, M)
            secs = [ambient_tensor(D, M, u, v, v, u, hom) / area2(M, u, v) for u, v in ((A, B), (X, F), (Y, F))]
            secs.append(radial_sectional(D, M, F))
        except (CohomoneError, ZeroDivisionError):
            secs = [math.nan] * 4
        U = V = math.nan
        if pn.reduced and delta > 0 and 0 < scale * t <= eps:
            try:
                terms = bound_terms(D, njet, a)
                U, V = terms["U"], terms["V"]
            except (ArithmeticError, ValueError, CohomoneError):
                pass
        rows.append((float(t), delta, ddelta, *secs, U, V))
    return rows


def write_trace(rows, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for r in rows:
            w.writerow(["" if isinstance(x, float) and math.isnan(x) else repr(float(x)) for x in r])


# -- subcommands ------------------------------------------------------------


def cmd_verify_engine(cfg: RunConfig) -> int:
    results = run_suites(cfg.suites or None, seed=cfg.seed)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    if cfg.output:
        _emit(_dump({"config": cfg.to_dict(), "suites": [r.to_dict() for r in results], "passed": ok}), cfg.output)
    return EXIT_OK if ok else EXIT_ERROR


def cmd_certify(cfg: RunConfig) -> int:
    p = resolve_profile(cfg)
    params = SearchParams(tol=cfg.tol, curv_tol=cfg.curv_tol, grid=cfg.grid, eps=cfg.eps, exhaustive=cfg.exhaustive)
    report = find_witness(None, p, params)
    doc = report.to_dict()
    doc["config"] = cfg.to_dict()
    doc["profile"] = {"n": p.n, "d": p.d, "L": p.L, "reduced": p.reduced, "metadata": dict(p.metadata)}
    _emit(_dump(doc), cfg.output)
    if cfg.trace:
        write_trace(trace_rows(p, 200, cfg.eps), cfg.trace)
    if cfg.output:
        kind = report.certificate.kind if report.certificate else "-"
        print(f"{report.verdict} {kind}")
    if report.verdict == "NOT-APPLICABLE":
        print("profile fails the smoothness gate", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_WITNESS if report.verdict == "WITNESS" else EXIT_OK


def cmd_class_one(cfg: RunConfig) -> int:
    rep = harmonic_rep(cfg.l, cfg.m)
    cond = check_theorem31_conditions(rep, cfg.n)
    doc = {"config": cfg.to_dict(), "k": rep.k, "conditions": cond.to_dict()}
    print(f"k = {rep.k}")
    for name, entry in cond.to_dict().items():
        if name != "all_pass":
            print(f"({name}) {'pass' if entry['pass'] else 'FAIL'} " + ", ".join(f"{k}={v}" for k, v in entry.items() if k != "pass"))
    if not cond.all_pass:
        print(f"conditions {', '.join(cond.failed())} fail")
        doc["verdict"] = "HYPOTHESIS-FAILURE"
        if cfg.output:
            _emit(_dump(doc), cfg.output)
        return EXIT_HYPOTHESIS
    diagram = theorem31_diagram(rep, cfg.n, cond)
    result = thm31_certify(diagram, random_block_profile(cfg.seed), cfg.tol)
    doc.update(result.to_dict())
    print(f"{result.verdict} min sectional {result.details['min_sectional']:.6g} at t = {result.details['t_min']:.6g}")
    if cfg.output:
        _emit(_dump(doc), cfg.output)
    if result.witness is None:
        print("no certificate produced", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def cmd_preset(cfg: RunConfig) -> int:
    save_profile(PRESETS[cfg.preset](cfg.n), cfg.output)
    return EXIT_OK


def cmd_trace(cfg: RunConfig) -> int:
    p = resolve_profile(cfg)
    write_trace(trace_rows(p, cfg.grid, cfg.eps), cfg.output)
    return EXIT_OK


COMMANDS = {
    "verify-engine": cmd_verify_engine,
    "certify": cmd_certify,
    "class-one": cmd_class_one,
    "preset": cmd_preset,
    "trace": cmd_trace,
}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig.from_args(ns)
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except (CohomoneError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
