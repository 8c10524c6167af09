"""Command-line entry point: ``shieldperc <command> [flags]``.

Every emitted number carries a provenance tag:

* ``closed_form``     evaluated formula (including rigorous series tails)
* ``dp_exact``        exact dynamic programming or exhaustive enumeration
* ``monte_carlo``     seeded simulation estimate
* ``golden_constant`` embedded or user-supplied reference constant

JSON output nests each number as ``{"value": ..., "provenance": ...}``; CSV
output adds one ``provenance`` column per row (a single tag, or
``field=tag`` pairs when a row mixes sources).  Identifier columns such as
``d`` and ``n`` echo the inputs and carry no tag.

Exit codes: 0 success, 1 violated precondition, 2 resource or convergence
limit, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Sequence

from . import bounds, oracle, simulation, walk_model
from .collision import DEFAULT_TOL, collision_bounds
from .errors import ConvergenceError, DomainError, ResourceLimitError

EXIT_OK, EXIT_DOMAIN, EXIT_RESOURCE, EXIT_USAGE = 0, 1, 2, 64

CF, DP, MC, GOLD = "closed_form", "dp_exact", "monte_carlo", "golden_constant"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# reports

class Report:
    """Rows of ``{field: value}`` plus a provenance tag for each numeric field."""

    def __init__(self, command: str, keys: Sequence[str] = ("d",)):
        self.command = command
        self.keys = tuple(keys)
        self.rows: list[tuple[dict, dict]] = []

    def add(self, values: dict, provenance: dict | str) -> None:
        if isinstance(provenance, str):
            provenance = {k: provenance for k in values if k not in self.keys}
        self.rows.append((values, provenance))

    def to_json(self) -> str:
        rows = []
        for values, prov in self.rows:
            out = {}
            for k, v in values.items():
                if k in self.keys or k not in prov:
                    out[k] = _json_scalar(v)
                else:
                    out[k] = {"value": _json_scalar(v), "provenance": prov[k]}
            rows.append(out)
        return json.dumps({"command": self.command, "rows": rows}, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        fields: list[str] = []
        for values, _ in self.rows:
            fields += [k for k in values if k not in fields]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields + ["provenance"])
        for values, prov in self.rows:
            w.writerow([_csv_scalar(values.get(k, "")) for k in fields] + [_prov_string(prov)])
        return buf.getvalue()

    def to_pretty(self) -> str:
        lines = []
        for values, prov in self.rows:
            head = " ".join(f"{k}={values[k]}" for k in self.keys if k in values)
            lines.append(f"[{self.command}] {head}".rstrip())
            for k, v in values.items():
                if k in self.keys:
                    continue
                tag = f"  ({prov[k]})" if k in prov else ""
                lines.append(f"  {k:<24} {_csv_scalar(v)}{tag}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return {"json": self.to_json, "csv": self.to_csv, "pretty": self.to_pretty}[fmt]()


def _json_scalar(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


def _csv_scalar(v) -> str:
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def _prov_string(prov: dict) -> str:
    tags = set(prov.values())
    if len(tags) <= 1:
        return next(iter(tags), "")
    return ";".join(f"{k}={t}" for k, t in prov.items())


# --------------------------------------------------------------------------
# commands

def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


def _read_pc_file(path: str) -> dict[int, float]:
    out = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("d", "") or row[0].startswith("#"):
                continue
            out[int(row[0])] = float(row[1])
    return out


def _pc_table(args) -> dict[int, float]:
    return _read_pc_file(args.pc_file) if args.pc_file else dict(bounds.PC_BOND)


def cmd_bounds(args) -> Report:
    _require(args.dim is not None and args.dim >= 4, "bounds needs --dim >= 4")
    pcs = _pc_table(args)
    r = bounds.bound_report(args.dim, args.margin, args.tol, p_c=pcs.get(args.dim))
    cb = collision_bounds(args.dim, args.tol)
    rep = Report("bounds")
    values = r.as_dict()
    values["series_terms_used"] = cb.series_terms_used
    values["tail_error"] = cb.tail_error
    prov = {k: CF for k in values if k != "d"}
    if r.p_c is not None:
        prov["p_c"] = GOLD
        prov["exceeds_pc"] = GOLD
    else:
        del values["p_c"], values["exceeds_pc"]
        prov.pop("p_c"), prov.pop("exceeds_pc")
    rep.add(values, prov)
    return rep


def cmd_table1(args) -> Report:
    rep = Report("table1")
    for row in bounds.table1(args.policy, tol=args.tol):
        rep.add({"d": row.d, "lhs1": row.lhs1, "lhs2": row.lhs2, "g": row.g,
                 "B": row.B, "p2_upper": row.p2_upper, "passed": row.passed}, CF)
    return rep


def cmd_table2(args) -> Report:
    rep = Report("table2")
    for r in bounds.table2(_pc_table(args), margin=args.margin, tol=args.tol):
        rep.add({"d": r.d, "p_c": r.p_c, "upper_bound": r.upper_bound, "p_lower": r.p_lower,
                 "max_lhs_at_p_lower": r.max_lhs_at_p_lower, "p_lower_7dp": r.p_lower_7dp,
                 "max_lhs_at_7dp": r.max_lhs_at_7dp, "exceeds_pc": r.exceeds_pc},
                {"p_c": GOLD, "upper_bound": CF, "p_lower": CF, "max_lhs_at_p_lower": CF,
                 "p_lower_7dp": CF, "max_lhs_at_7dp": CF, "exceeds_pc": GOLD})
    return rep


def cmd_simulate(args) -> Report:
    _require(args.dim is not None and args.dim >= 2, "simulate needs --dim >= 2")
    _require(args.n is not None and args.n >= 0, "simulate needs --n >= 0")
    _require(args.p is not None and 0 <= args.p <= 1, "simulate needs --p in [0, 1]")
    _require(args.trials >= 1, "--trials must be >= 1")
    if args.stream is not None:
        cfg = simulation.sample_configuration(args.dim, max(args.n, 1), args.p, args.seed, args.stream)
        comp = simulation.shielded_components(cfg)
        rep = Report("simulate", keys=("d", "n"))
        rep.add({"d": args.dim, "n": args.n,
                 "N_n": simulation.count_oriented_shielded_paths(cfg, args.n),
                 "shielded_vertices": int(cfg.shielded.sum()),
                 "components": comp.n_components, "largest_component": comp.largest,
                 "spanning": comp.spanning}, MC)
        return rep
    est = simulation.estimate_moments(args.dim, args.n, args.p, args.trials, args.seed)
    rep = Report("simulate", keys=("d", "n", "p", "trials", "seed"))
    rep.add({"d": args.dim, "n": args.n, "p": args.p, "seed": args.seed, "trials": args.trials,
             "mean": est.mean, "mean_se": est.mean_se,
             "second_moment": est.second_moment, "second_moment_se": est.second_moment_se,
             "survival": est.survival, "survival_se": est.survival_se,
             "expected_mean": est.expected_mean, "paley_zygmund": est.paley_zygmund,
             "mean_consistent": est.mean_consistent, "pz_holds": est.pz_holds},
            {"mean": MC, "mean_se": MC, "second_moment": MC,
             "second_moment_se": MC, "survival": MC, "survival_se": MC,
             "expected_mean": CF, "paley_zygmund": MC, "mean_consistent": MC, "pz_holds": MC})
    return rep


def cmd_oracle(args) -> Report:
    _require(args.dim is not None and args.dim >= 1, "oracle needs --dim >= 1")
    _require(args.n is not None and args.n >= 0, "oracle needs --n >= 0")
    rep = Report("oracle", keys=("d", "n"))
    if args.kind == "edge-bound":
        r = oracle.verify_edge_bound(args.dim, args.n, args.cap_pairs).as_dict()
        viol = r.pop("violations")
        r.update({f"violations_{k}": v for k, v in viol.items()})
        rep.add(r, DP)
    elif args.kind == "saw":
        rep.add({"d": args.dim, "n": args.n,
                 "saw_count": oracle.enumerate_saw(args.dim, args.n, args.cap_pairs)}, DP)
    elif args.kind == "xi":
        rep.add({"d": args.dim, "n": args.n,
                 "xi_count": oracle.enumerate_xi(args.dim, args.n, args.cap_pairs)}, DP)
    else:
        _require(args.p is not None and 0 <= args.p <= 1, "second-moment needs --p in [0, 1]")
        q = 1 - Fraction(str(args.p))
        a = oracle.second_moment_pair_sum(args.dim, args.n, q)
        b = oracle.second_moment_bruteforce(args.dim, args.n, q)
        rep.add({"d": args.dim, "n": args.n, "pair_sum": a, "bruteforce": b,
                 "pair_sum_float": float(a), "equal": a == b}, DP)
    return rep


def cmd_walks(args) -> Report:
    _require(args.dim is not None and args.dim >= 2, "walks needs --dim >= 2")
    _require(args.n is not None and args.n >= 1, "walks needs --n >= 1")
    rep = Report("walks", keys=("d", "k"))
    tau = walk_model.tau_distribution(args.dim, args.n, cap_states=args.cap_states)
    hat = walk_model.tau_hat_distribution(args.dim, args.n, cap_states=args.cap_states)
    for k in range(args.n + 1):
        rep.add({"d": args.dim, "k": k, "p_tau": tau.probs.get(k, 0.0),
                 "p_tau_hat": hat.probs.get(k, 0.0)}, DP)
    if args.trials > 1 and args.p is not None:
        _require(0 <= args.p < 1, "--p must lie in [0, 1)")
        s = simulation.paired_walk_sample(args.dim, args.n, args.trials, args.seed)
        mgf, se = s.mgf(1 - args.p)
        rep.add({"d": args.dim, "k": args.n, "p_d_hat": s.p_d_hat, "p_d_se": s.p_d_se,
                 "mgf_mean": mgf, "mgf_se": se}, MC)
    return rep


COMMANDS = {"bounds": cmd_bounds, "table1": cmd_table1, "table2": cmd_table2,
            "simulate": cmd_simulate, "oracle": cmd_oracle, "walks": cmd_walks}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int)
    common.add_argument("--p", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--trials", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--stream", type=int)
    common.add_argument("--margin", type=float, default=bounds.DEFAULT_MARGIN)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--format", choices=("json", "csv", "pretty"), default="json")
    common.add_argument("--pc-file")
    common.add_argument("--cap-states", type=int, default=walk_model.DEFAULT_STATE_CAP)
    common.add_argument("--cap-pairs", type=int, default=oracle.DEFAULT_PAIR_CAP)
    common.add_argument("--policy", choices=("published", "exact", "stirling"), default="published")
    common.add_argument("--kind", choices=("edge-bound", "saw", "xi", "second-moment"),
                        default="edge-bound")
    parser = _Parser(prog="shieldperc", description="Shielded-vertex percolation bounds and checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "bounds": "certified lower bound and diagnostics for one dimension",
        "table1": "both admissibility left sides at p = g(d), d = 9..18",
        "table2": "lower bounds against reference thresholds, d = 5..9",
        "simulate": "Monte Carlo moments of the shielded path count",
        "oracle": "exhaustive combinatorial checks",
        "walks": "exact return-time laws of the walk difference",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.tol <= 0:
            raise DomainError("--tol must be positive")
        if not 0 < args.margin < 1:
            raise DomainError("--margin must lie in (0, 1)")
        report = COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"shieldperc: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ResourceLimitError, ConvergenceError) as exc:
        print(f"shieldperc: limit reached: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    sys.stdout.write(report.render(args.format))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
