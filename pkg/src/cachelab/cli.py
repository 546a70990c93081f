"""Command-line front end.

    cachelab bound    --K 4 --alpha 3 --F 1 [--gamma 1/8] [--format csv|json]
    cachelab simulate --K 4 --alpha 3 --F 1 --scheme selfish --t 1
    cachelab verify   --K 4 --alpha 3 --F 1
    cachelab graph    --K 4 --alpha 3 --F 1 --perm 1,2,3,4 [--scheme selfish --t 1]

Defaults may come from a key = value config file (``--config`` or the
CACHELAB_CONFIG environment variable); flags override it.

Exit codes: 0 ok, 1 verification failure, 2 invalid input, 3 cap exceeded.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import converse, oracle
from .fds import FdsStructure, Permutation, SubfileId, FileId, make_class
from .index_coding import DEFAULT_MAIS_CAP, build_graph, is_acyclic, paper_acyclic_set
from .schemes import (
    DEFAULT_DEMAND_CAP,
    CapExceeded,
    DemandInstance,
    count_distinct_demands,
    make_placement,
    selfish_symmetric_placement,
    simulate,
)

log = logging.getLogger("cachelab")

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3
NA = "—"

FORMATS = {
    "bound": ("csv", "json"),
    "simulate": ("json",),
    "verify": ("json",),
    "graph": ("dot",),
}

# config-file key -> argparse dest
CONFIG_KEYS = {
    "k": "K", "alpha": "alpha", "f": "F", "t": "t", "gamma": "gamma",
    "scheme": "scheme", "profile": "profile", "jobs": "jobs",
    "cap_demands": "cap_demands", "cap-demands": "cap_demands",
    "cap_mais": "cap_mais", "cap-mais": "cap_mais",
    "output": "output", "format": "format", "perm": "perm",
    "files": "files", "demand": "demand", "decimals": "decimals",
}

DEFAULTS = {
    "F": 1, "jobs": 1, "cap_demands": DEFAULT_DEMAND_CAP, "cap_mais": DEFAULT_MAIS_CAP,
    "decimals": False,
}

INT_KEYS = {"K", "alpha", "F", "t", "jobs", "cap_demands", "cap_mais"}


class InputError(ValueError):
    pass


def rat(value) -> Fraction:
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational number: {value!r}") from exc


def parse_profile(text: str) -> list[Fraction]:
    return [rat(p) for p in text.split(",") if p.strip()]


def parse_ints(text: str) -> list[int]:
    try:
        return [int(p) for p in text.replace(" ", "").split(",") if p]
    except ValueError as exc:
        raise InputError(f"expected comma-separated integers, got {text!r}") from exc


def parse_demand(text: str, K: int) -> list[tuple[int, ...]]:
    """Classes separated by ';', members by ',' or packed digits ("123;234")."""
    classes = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            members = [int(c) for c in chunk.split(",")] if "," in chunk else [int(c) for c in chunk]
            classes.append(make_class(members, K))
        except ValueError as exc:
            raise InputError(f"malformed class {chunk!r} in demand spec") from exc
    return classes


def load_config(path: str | None) -> dict:
    path = path or os.environ.get("CACHELAB_CONFIG")
    if not path:
        return {}
    p = Path(path)
    if not p.is_file():
        raise InputError(f"config file not found: {path}")
    text = p.read_text()
    if not text.lstrip().startswith("["):
        text = "[cachelab]\n" + text
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise InputError(f"cannot parse config file {path}: {exc}") from exc
    out = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            dest = CONFIG_KEYS.get(key.lower())
            if dest is None:
                raise InputError(f"unknown config key {key!r} in {path}")
            out[dest] = value
    return out


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge defaults < config file < flags, then coerce types."""
    merged = dict(DEFAULTS)
    merged.update(load_config(args.config))
    merged.update({k: v for k, v in vars(args).items() if v is not None})
    for key in INT_KEYS:
        if key in merged and merged[key] is not None:
            try:
                merged[key] = int(merged[key])
            except (TypeError, ValueError) as exc:
                raise InputError(f"{key} must be an integer, got {merged[key]!r}") from exc
    if isinstance(merged.get("decimals"), str):
        merged["decimals"] = merged["decimals"].lower() in ("1", "true", "yes", "on")
    if merged.get("K") is None or merged.get("alpha") is None:
        raise InputError("--K and --alpha are required (flag or config file)")
    fmt = merged.get("format") or FORMATS[args.command][0]
    if fmt not in FORMATS[args.command]:
        raise InputError(f"{args.command} supports formats {FORMATS[args.command]}, got {fmt!r}")
    merged["format"] = fmt
    return argparse.Namespace(**merged)


def structure_of(cfg) -> FdsStructure:
    try:
        return FdsStructure(cfg.K, cfg.alpha, cfg.F)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def t_from_gamma(cfg, s: FdsStructure) -> int | None:
    if getattr(cfg, "t", None) is not None:
        return cfg.t
    if getattr(cfg, "gamma", None) is None:
        return None
    t = rat(cfg.gamma) * s.K
    if t.denominator != 1:
        raise InputError(f"gamma = {cfg.gamma} gives non-integer t = K gamma = {t}")
    return int(t)


def placement_of(cfg, s: FdsStructure):
    scheme = getattr(cfg, "scheme", None)
    if scheme is None:
        return None
    t = t_from_gamma(cfg, s)
    profile = parse_profile(cfg.profile) if getattr(cfg, "profile", None) else None
    if scheme in ("man", "selfish") and t is None:
        raise InputError(f"scheme {scheme} needs --t or --gamma")
    try:
        return make_placement(s, scheme, t, profile)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def emit(text: str, cfg) -> None:
    if getattr(cfg, "output", None):
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def dec(x: Fraction) -> str:
    return repr(float(x))


# -- subcommands ------------------------------------------------------------


def bound_rows(s: FdsStructure) -> list[dict]:
    curve = converse.bound_curve(s)
    rows = []
    for t, (M, r_lb) in enumerate(curve.corner_points):
        r_man = converse.man_load(s.K, t)
        ratio = r_lb / r_man if t <= s.alpha - 1 else None
        rows.append({"K": s.K, "alpha": s.alpha, "F": s.F, "t": t, "M": M,
                     "R_LB": r_lb, "R_MAN": r_man, "ratio": ratio})
    return rows


def cmd_bound(cfg) -> int:
    s = structure_of(cfg)
    rows = bound_rows(s)
    point = None
    if getattr(cfg, "gamma", None) is not None:
        gamma = rat(cfg.gamma)
        if not 0 <= gamma <= Fraction(s.alpha, s.K):
            raise InputError(f"gamma must lie in [0, alpha/K] = [0, {Fraction(s.alpha, s.K)}]")
        M = gamma * s.N
        point = {
            "gamma": str(gamma),
            "M": str(M),
            "R_LB": str(converse.bound_curve(s)(M)),
            "R_LB_closed_form": str(converse.closed_form_load(s.K, s.alpha, gamma)),
            "LP_value": str(converse.solve_lp(s.K, s.alpha, s.K * gamma).value),
        }
    if cfg.format == "json":
        doc = {
            "K": s.K, "alpha": s.alpha, "F": s.F, "N": s.N,
            "rows": [
                {k: (str(v) if isinstance(v, Fraction) else (NA if v is None else v))
                 for k, v in r.items() if k not in ("K", "alpha", "F")}
                for r in rows
            ],
        }
        if point:
            doc["point"] = point
        emit(json.dumps(doc, indent=2) + "\n", cfg)
        return EXIT_OK
    buf = io.StringIO()
    cols = ["K", "alpha", "F", "t", "M", "R_LB", "R_MAN", "ratio"]
    dcols = ["M_decimal", "R_LB_decimal", "R_MAN_decimal", "ratio_decimal"] if cfg.decimals else []
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols + dcols)
    for r in rows:
        line = [NA if r[c] is None else str(r[c]) for c in cols]
        if dcols:
            line += [NA if r[c] is None else dec(r[c]) for c in ("M", "R_LB", "R_MAN", "ratio")]
        w.writerow(line)
    emit(buf.getvalue(), cfg)
    return EXIT_OK


def cmd_simulate(cfg) -> int:
    s = structure_of(cfg)
    if getattr(cfg, "scheme", None) is None:
        raise InputError("simulate needs --scheme {man,selfish,profile}")
    placement = placement_of(cfg, s)
    report = simulate(placement, cap=cfg.cap_demands, jobs=cfg.jobs)
    doc = {
        "scheme": report.scheme,
        "K": s.K, "alpha": s.alpha, "F": s.F,
        "t": report.t,
        "M": str(report.M),
        "worst_case_load": str(report.worst_case_load),
        "decodable": report.decodable,
        "demands": report.demands,
    }
    emit(json.dumps(doc, indent=2) + "\n", cfg)
    return EXIT_OK if report.decodable else EXIT_VERIFY


def verification_reports(s: FdsStructure, cap_demands: int, cap_mais: int) -> tuple[list, list]:
    """Run every oracle and invariant check that fits within the caps."""
    K, a, F = s.K, s.alpha, s.F
    R = oracle.CountReport.compare
    reports, skipped = [], []

    if K >= 2:
        if K <= 7:
            reports += oracle.lemma2_reports(K)
        else:
            skipped.append(f"lemma2: K = {K} > 7")

    for t in range(a + 1):
        reports.append(R(f"f({t}) closed form vs raw sum", converse.f_coeff(K, a, t), converse.f_coeff_raw(K, a, F, t)))
        reports.append(R(f"corner t={t} vs closed-form load", converse.corner_load(K, a, t),
                         converse.closed_form_load(K, a, Fraction(t, K))))

    curve = converse.bound_curve(s)
    reports.append(R("bound curve convex", True, curve.is_convex()))
    reports.append(R("bound curve non-increasing", True, curve.is_nonincreasing()))

    for i in range(21):
        m = Fraction(a * i, 20)
        reports.append(R(f"LP m={m} analytic vs vertex enumeration",
                         converse.solve_lp_analytic(K, a, m).value, converse.solve_lp_vertices(K, a, m).value))

    if 2 <= a <= K - 1:
        for t, ratio in converse.ratio_report(K, a):
            rel_ok = ratio > 1 if 1 <= t <= a - 2 else ratio >= 1
            reports.append(R(f"ratio R_LB/R_MAN at t={t} is {ratio} ({'>' if 1 <= t <= a - 2 else '>='} 1)", True, rel_ok))

    try:
        counts = oracle.appearance_counter(s, cap_demands)
    except CapExceeded as exc:
        skipped.append(f"appearance counting: {exc}")
        counts = None
    if counts is not None:
        for tp in range(a + 1):
            cls = tuple(range(1, a + 1))
            T = cls[1:1 + tp] if tp < a else cls
            sub = SubfileId(FileId(1, cls), T)
            reports.append(R(f"appearances of W_{{1,{cls},{T}}}", converse.appearance_count(K, a, F, tp), counts[sub]))
            reports.append(R(f"all subfiles with t'={tp} appear equally often", True,
                             oracle.subfile_symmetry_check(s, tp, counts)))

    try:
        family = converse.demand_family(s, cap_demands)
    except CapExceeded as exc:
        skipped.append(f"demand family: {exc}")
        family = None
    if family is not None:
        bad = 0
        for demand, u in family.pairs():
            g = build_graph(s, demand)
            bad += not is_acyclic(g, paper_acyclic_set(demand, u))
        reports.append(R(f"constructed sets acyclic over {len(family) * K} (demand, shift) pairs", 0, bad))

        profiles = [[Fraction(int(i == tp)) for i in range(a + 1)] for tp in range(a + 1)]
        profiles.append([Fraction(1, a + 1)] * (a + 1))
        for x in profiles:
            lhs, rhs = converse.aggregate_check(s, x, cap_demands)
            reports.append(R(f"averaged bound vs sum f x at x={[str(v) for v in x]}", rhs, lhs))

        demand = family.entries[0]
        for t in range(a + 1):
            placement = selfish_symmetric_placement(s, t)
            if K * 2 ** (a - 1) > cap_mais:
                skipped.append(f"MAIS: {K * 2 ** (a - 1)} vertices > cap {cap_mais}")
                break
            reports.append(oracle.mais_vs_construction(s, placement, demand, cap_mais))

    n_demands = count_distinct_demands(s)
    if n_demands <= cap_demands:
        for t in range(K + 1):
            rep = simulate(make_placement(s, "man", t), cap=cap_demands)
            reports.append(R(f"MAN t={t} decodable", True, rep.decodable))
            reports.append(R(f"MAN t={t} worst-case load", converse.man_load(K, t), rep.worst_case_load))
        for t in range(a + 1):
            rep = simulate(selfish_symmetric_placement(s, t), cap=cap_demands)
            reports.append(R(f"greedy selfish t={t} decodable", True, rep.decodable))
            reports.append(R(f"greedy selfish t={t} load >= R_LB", converse.corner_load(K, a, t),
                             rep.worst_case_load, relation=">="))
    else:
        skipped.append(f"delivery simulation: {n_demands} demands > cap {cap_demands}")
    return reports, skipped


def cmd_verify(cfg) -> int:
    s = structure_of(cfg)
    reports, skipped = verification_reports(s, cfg.cap_demands, cfg.cap_mais)
    doc = json.loads(oracle.report_json(reports))
    doc["summary"]["skipped"] = skipped
    emit(json.dumps(doc, indent=2) + "\n", cfg)
    failed = doc["summary"]["failed"]
    if failed:
        print(f"verification failed: {failed} check(s)", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def demand_of(cfg, s: FdsStructure) -> DemandInstance:
    files = parse_ints(cfg.files) if getattr(cfg, "files", None) else [1] * s.K
    if getattr(cfg, "perm", None):
        try:
            pi = Permutation(tuple(parse_ints(cfg.perm)))
            return converse.demand_from_circular(s, pi, files)
        except ValueError as exc:
            raise InputError(f"bad demand: {exc}") from exc
    if getattr(cfg, "demand", None):
        demand = DemandInstance(tuple(parse_demand(cfg.demand, s.K)), tuple(files))
        try:
            demand.validate(s)
        except ValueError as exc:
            raise InputError(f"bad demand: {exc}") from exc
        return demand
    raise InputError("graph needs --perm or --demand")


def cmd_graph(cfg) -> int:
    s = structure_of(cfg)
    demand = demand_of(cfg, s)
    placement = placement_of(cfg, s)
    try:
        graph = build_graph(s, demand, placement)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    emit(graph.to_dot(), cfg)
    return EXIT_OK


COMMANDS = {"bound": cmd_bound, "simulate": cmd_simulate, "verify": cmd_verify, "graph": cmd_graph}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file (default: $CACHELAB_CONFIG)")
    common.add_argument("--K", type=int, help="number of users")
    common.add_argument("--alpha", type=int, help="users interested in each file class")
    common.add_argument("--F", type=int, help="files per class (default 1)")
    common.add_argument("--t", type=int, help="cache replication parameter")
    common.add_argument("--gamma", help="memory fraction M/N as p/q")
    common.add_argument("--scheme", choices=("man", "selfish", "profile"))
    common.add_argument("--profile", help="replication profile x_0,...,x_alpha as p/q values")
    common.add_argument("--jobs", type=int, help="worker processes for demand enumeration")
    common.add_argument("--cap-demands", dest="cap_demands", type=int, help="demand enumeration cap")
    common.add_argument("--cap-mais", dest="cap_mais", type=int, help="MAIS vertex cap")
    common.add_argument("--output", help="output path (default stdout)")
    common.add_argument("--format", help="csv | json | dot")
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    parser = argparse.ArgumentParser(prog="cachelab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    b = sub.add_parser("bound", parents=[common], help="converse curve with MAN comparison")
    b.add_argument("--decimals", action="store_true", default=None, help="append decimal columns")
    sub.add_parser("simulate", parents=[common], help="worst-case load of a placement/delivery scheme")
    sub.add_parser("verify", parents=[common], help="run the oracle and invariant checks")
    g = sub.add_parser("graph", parents=[common], help="side-information graph as DOT")
    g.add_argument("--perm", help="circular permutation generating the demand, e.g. 1,2,3,4")
    g.add_argument("--demand", help="explicit requested classes, e.g. 123;234;134;124")
    g.add_argument("--files", help="requested file index per user, e.g. 1,1,1,1")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
