"""Command-line front end: verdicts, scans, witness tooling, simulation."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import baselines, net_tests, quantum_sim, witnesses
from .covariance import covariance_from_distribution, observable_covariance, reflect
from .distributions import (DistributionTable, load_distribution,
                            pq_distribution, save_distribution)
from .net_tests import TestVerdict, Verdict, bisect_threshold, verdict_to_dict
from .topology import (NetworkTopology, all_bipartite, all_k_partite, load_topology,
                       triangle)

EXIT_COMPATIBLE = 0
EXIT_INCOMPATIBLE = 1
EXIT_INCONCLUSIVE = 2


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INCONCLUSIVE


def _verdict_exit(verdict: TestVerdict) -> int:
    if verdict.kind is Verdict.COMPATIBLE:
        return EXIT_COMPATIBLE
    if verdict.kind is Verdict.INCOMPATIBLE:
        return EXIT_INCOMPATIBLE
    return EXIT_INCONCLUSIVE


def _load_topology_arg(path: str) -> tuple[NetworkTopology, list[int], list[int]]:
    try:
        return load_topology(path)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise SystemExit(_fail(f"topology file {path}: {exc}"))


def _load_distribution_arg(path: str) -> DistributionTable:
    try:
        return load_distribution(path)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise SystemExit(_fail(f"distribution file {path}: {exc}"))


# ---------------------------------------------------------------------------
# netcov test

def cmd_test(args) -> int:
    topo, _, _ = _load_topology_arg(args.topology)
    dist = _load_distribution_arg(args.distribution)
    try:
        if dist.is_joint:
            C = covariance_from_distribution(dist)
            verdict = net_tests.primal_feasibility(C, topo)
        else:
            C = observable_covariance(dist)
            verdict = net_tests.inputs_feasibility(C, topo)
    except ValueError as exc:
        return _fail(str(exc))
    print(json.dumps(verdict_to_dict(verdict)))
    return _verdict_exit(verdict)


# ---------------------------------------------------------------------------
# netcov scan

def _named_topology(name: str, parties: int) -> NetworkTopology:
    if name == "triangle":
        return triangle()
    if name == "all-bipartite":
        return all_bipartite(parties)
    if name.startswith("all-") and name.endswith("-partite"):
        return all_k_partite(parties, int(name.split("-")[1]))
    raise ValueError(f"unknown topology {name!r}")


def _scan_cell(test: str, parties: int, topo_name: str, p: float, q: float
               ) -> tuple[str, float]:
    """Evaluate one grid cell; returns (verdict string, value)."""
    topo = _named_topology(topo_name, parties)
    if test == "sdp":
        dist = pq_distribution(parties, p, q)
        C = covariance_from_distribution(dist)
        try:
            W, value = net_tests.dual_witness(C, topo)
        except net_tests.InconclusiveError:
            return Verdict.INCONCLUSIVE.value, float("nan")
        verdict = (Verdict.INCOMPATIBLE if value > net_tests.TAU
                   else Verdict.COMPATIBLE)
        return verdict.value, value
    if test == "witness-w2n":
        from .covariance import pq_covariance_closed_form
        value = witnesses.evaluate(witnesses.w_2n(parties),
                                   pq_covariance_closed_form(parties, p, q))
        verdict = Verdict.INCOMPATIBLE if value > 0 else Verdict.COMPATIBLE
        return verdict.value, value
    dist = pq_distribution(parties, p, q)
    if test == "finner":
        violated, margin = baselines.finner_indicator(dist)
    elif test == "finner-opt":
        margin, _ = baselines.finner_dichotomic_opt(dist)
        violated = margin > 1e-10
    elif test == "entropic":
        results = baselines.entropic_test(dist)
        violated = any(r[0] for r in results)
        margin = max(lhs - rhs for _, lhs, rhs in results)
    elif test == "inflation":
        try:
            violated, lhs, rhs = baselines.inflation_test(dist)
        except baselines.AsymmetricDistribution:
            return Verdict.INCONCLUSIVE.value, float("nan")
        margin = lhs - rhs
    else:
        raise ValueError(f"unknown test {test!r}")
    verdict = Verdict.INCOMPATIBLE if violated else Verdict.COMPATIBLE
    return verdict.value, margin


def _scan_cell_star(cell):
    return _scan_cell(*cell)


def _parse_range(spec: str) -> np.ndarray:
    try:
        lo, hi, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise ValueError(f"range must be lo:hi:step, got {spec!r}") from exc
    if step <= 0:
        raise ValueError("range step must be positive")
    return np.arange(lo, hi + step / 2, step)


def _threshold_at(test: str, parties: int, topo_name: str, p: float,
                  tol: float) -> float:
    def verdict_at(q: float) -> TestVerdict:
        verdict, value = _scan_cell(test, parties, topo_name, p, q)
        return TestVerdict(Verdict(verdict), value=value)

    # the q = 1 - p corner is deterministic and the detection margin fades
    # towards it, so anchor the bracket on an actually-detected point
    hi = 1.0 - p - 1e-6
    for q in np.linspace(hi, 0.0, 21):
        verdict, _ = _scan_cell(test, parties, topo_name, p, float(q))
        if verdict == Verdict.INCOMPATIBLE.value:
            return bisect_threshold(verdict_at, 0.0, float(q), tol=tol)
    return hi  # the whole row is compatible


def cmd_scan(args) -> int:
    try:
        topo_name = args.topology
        _named_topology(topo_name, args.parties)
        p_values = _parse_range(args.p)
        rows = []
        if args.mode == "grid":
            q_values = _parse_range(args.q)
            cells = [(args.test, args.parties, topo_name, float(p), float(q))
                     for p in p_values for q in q_values
                     if p + q <= 1 + 1e-12]
            if args.jobs > 1:
                with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                    results = list(pool.map(_scan_cell_star, cells))
            else:
                results = [_scan_cell_star(c) for c in cells]
            header = ["p", "q", "test", "verdict", "value"]
            for (test, _, _, p, q), (verdict, value) in zip(cells, results):
                rows.append([f"{p:.6g}", f"{q:.6g}", test, verdict, f"{value:.10g}"])
        else:
            header = ["p", "q_threshold", "test"]
            for p in p_values:
                thr = _threshold_at(args.test, args.parties, topo_name,
                                    float(p), args.tol)
                rows.append([f"{p:.6g}", f"{thr:.6g}", args.test])
    except (ValueError, net_tests.InconclusiveError) as exc:
        return _fail(str(exc))
    out = open(args.output, "w", newline="") if args.output != "-" else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# ---------------------------------------------------------------------------
# netcov witness

def _named_witness(name: str, parties: int) -> witnesses.Witness:
    if name == "ghz":
        return witnesses.w_ghz()
    if name == "2n":
        return witnesses.w_2n(parties)
    raise ValueError(f"unknown witness {name!r} (choose ghz or 2n)")


def cmd_witness(args) -> int:
    try:
        w = _named_witness(args.name, args.parties)
        if args.action == "emit":
            print(json.dumps(witnesses.witness_to_dict(w)))
            return 0
        if args.action == "validate":
            topo = (triangle() if args.name == "ghz"
                    else all_bipartite(args.parties))
            ok = witnesses.validate_witness(w, topo)
            print(json.dumps({"witness": w.name, "valid": bool(ok)}))
            return 0 if ok else 1
        # evaluate
        dist = _load_distribution_arg(args.distribution)
        C = covariance_from_distribution(dist)
        if w.convention == witnesses.REFLECTED:
            C = reflect(C)
        value = witnesses.evaluate(w, C)
        print(json.dumps({"witness": w.name, "value": value}))
        return EXIT_INCOMPATIBLE if value > net_tests.TAU else EXIT_COMPATIBLE
    except ValueError as exc:
        return _fail(str(exc))


# ---------------------------------------------------------------------------
# netcov simulate

def cmd_simulate(args) -> int:
    try:
        if args.scenario == "ghz":
            dist = quantum_sim.distribution(quantum_sim.ghz_state())
        elif args.scenario == "w-state":
            dist = quantum_sim.conditional_distribution(
                quantum_sim.w_state(args.param))
        elif args.scenario == "pr-mixture":
            dist = quantum_sim.pr_box_mixture(args.param)
        elif args.scenario == "random-realization":
            topo = _named_topology(args.topology, args.parties)
            rng = np.random.default_rng(args.seed)
            real = quantum_sim.random_realization(topo, rng,
                                                  settings=args.settings)
            dist = (quantum_sim.distribution(real) if args.settings == 1
                    else quantum_sim.conditional_distribution(real))
        else:
            return _fail(f"unknown scenario {args.scenario!r}")
        save_distribution(dist, args.output)
    except ValueError as exc:
        return _fail(str(exc))
    return 0


# ---------------------------------------------------------------------------
# netcov baseline

def cmd_baseline(args) -> int:
    dist = _load_distribution_arg(args.distribution)
    try:
        if args.test == "finner":
            violated, margin = baselines.finner_indicator(dist)
            report = {"test": "finner", "violated": violated, "margin": margin}
        elif args.test == "finner-opt":
            value, deltas = baselines.finner_dichotomic_opt(dist, seed=args.seed)
            violated = value > 1e-10
            report = {"test": "finner-opt", "violated": violated,
                      "value": value, "deltas": deltas.tolist()}
        elif args.test == "entropic":
            results = baselines.entropic_test(dist)
            violated = any(r[0] for r in results)
            report = {"test": "entropic", "violated": violated,
                      "inequalities": [{"violated": v, "lhs": l, "rhs": r}
                                       for v, l, r in results]}
        elif args.test == "inflation":
            violated, lhs, rhs = baselines.inflation_test(dist)
            report = {"test": "inflation", "violated": violated,
                      "lhs": lhs, "rhs": rhs}
        else:
            return _fail(f"unknown baseline {args.test!r}")
    except ValueError as exc:
        return _fail(str(exc))
    print(json.dumps(report))
    return EXIT_INCOMPATIBLE if violated else EXIT_COMPATIBLE


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netcov",
        description="Covariance-decomposition compatibility tests for networks "
                    "with independent sources.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="verdict for a distribution vs a topology")
    p_test.add_argument("--distribution", required=True)
    p_test.add_argument("--topology", required=True)
    p_test.set_defaults(func=cmd_test)

    p_scan = sub.add_parser("scan", help="grid or bisection scan of the p,q family")
    p_scan.add_argument("--parties", type=int, default=3)
    p_scan.add_argument("--topology", default="all-bipartite",
                        help="triangle | all-bipartite | all-K-partite")
    p_scan.add_argument("--test", default="sdp",
                        choices=["sdp", "witness-w2n", "finner", "finner-opt",
                                 "entropic", "inflation"])
    p_scan.add_argument("--mode", choices=["grid", "bisect"], default="grid")
    p_scan.add_argument("--p", required=True, help="lo:hi:step")
    p_scan.add_argument("--q", help="lo:hi:step (grid mode)")
    p_scan.add_argument("--tol", type=float, default=1e-3)
    p_scan.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_scan.add_argument("--output", "-o", default="-")
    p_scan.set_defaults(func=cmd_scan)

    p_wit = sub.add_parser("witness", help="emit, validate, or evaluate a witness")
    p_wit.add_argument("action", choices=["emit", "validate", "evaluate"])
    p_wit.add_argument("name", help="ghz | 2n")
    p_wit.add_argument("--parties", type=int, default=3)
    p_wit.add_argument("--distribution", help="needed for evaluate")
    p_wit.set_defaults(func=cmd_witness)

    p_sim = sub.add_parser("simulate", help="write a scenario distribution file")
    p_sim.add_argument("scenario",
                       choices=["ghz", "w-state", "pr-mixture", "random-realization"])
    p_sim.add_argument("param", type=float, nargs="?", default=1.0,
                       help="visibility / mixing weight")
    p_sim.add_argument("--topology", default="all-bipartite")
    p_sim.add_argument("--parties", type=int, default=3)
    p_sim.add_argument("--settings", type=int, default=1)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--output", "-o", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_base = sub.add_parser("baseline", help="Finner / entropic / inflation tests")
    p_base.add_argument("--distribution", required=True)
    p_base.add_argument("--test", required=True,
                        choices=["finner", "finner-opt", "entropic", "inflation"])
    p_base.add_argument("--seed", type=int, default=0)
    p_base.set_defaults(func=cmd_baseline)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "scan" and args.mode == "grid" and not args.q:
        return _fail("grid mode requires --q")
    if args.command == "witness" and args.action == "evaluate" \
            and not args.distribution:
        return _fail("evaluate requires --distribution")
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0


if __name__ == "__main__":
    sys.exit(main())
