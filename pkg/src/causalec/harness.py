"""Command-line harness: run scenarios under the checkers, report latency
tables, and emit the bundled scenario files.

``run`` executes one seeded simulation per requested seed, follows each with
probe reads, applies every checker, and exits nonzero if any verdict fails.
``latency`` prints the read-latency profile of the scenario's code on its
graph next to the best replication baseline.  ``scenarios`` writes the
bundled scenario documents out as JSON files.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import random
import sys
from typing import List, Optional, Tuple

from . import builtin
from .checker import Verdict, all_passed, check_all
from .coding import LinearCode
from .field import PrimeField
from .latency import LatencyGraph, analyze_latency, replication_baseline
from .scenarios import ClientSpec, RandomWorkload, Scenario, ScenarioError, scenario_from_json
from .server import CAUSAL, EVENTUAL
from .simnet import RunResult, run as run_scenario


# -- fuzzing -------------------------------------------------------------------


def random_code(rng: random.Random, n: int, k: int, p: int = 7) -> LinearCode:
    """A random n x k code over GF(p) with every object recoverable."""
    field = PrimeField(p)
    while True:
        if rng.random() < 0.15:
            # replication-style rows: each server stores one object plainly
            coeffs = [[1 if rng.randint(1, k) == obj else 0 for obj in range(1, k + 1)]
                      for _ in range(n)]
        else:
            coeffs = [[rng.randrange(p) for _ in range(k)] for _ in range(n)]
        code = LinearCode(field, coeffs, value_len=1)
        try:
            code.check_recoverable()
        except ValueError:
            continue
        return code


def fuzz_scenario(seed: int, halt_probability: float = 0.4) -> Scenario:
    """A small randomized system: dimensions, code, delays, workload, and an
    optional single-server halt all derive from the seed."""
    rng = random.Random(0xFC2 ^ (seed * 0x9E3779B1))
    n = rng.randint(2, 5)
    k = rng.randint(1, min(3, n))  # recoverability needs row rank >= k
    code = random_code(rng, n, k, p=rng.choice([7, 11]))
    edges = {(i, j): rng.randint(500, 5000) / 1000
             for i in range(1, n + 1) for j in range(i + 1, n + 1)}
    graph = LatencyGraph(n, edges)
    n_clients = rng.randint(1, 4)
    clients = [ClientSpec(cid, rng.randint(1, n)) for cid in range(1, n_clients + 1)]
    halts = {}
    if rng.random() < halt_probability:
        halts[rng.randint(1, n)] = rng.randint(0, 40_000)
    return Scenario(
        name=f"fuzz-{seed}",
        code=code,
        graph=graph,
        protocol=CAUSAL,
        clients=clients,
        random_workload=RandomWorkload(
            ops=rng.randint(10, 50),
            read_fraction=rng.uniform(0.3, 0.7),
            think_ms=(0, 3000)),
        delays={"kind": "jitter", "factor": 2},
        halts=halts,
        step_cap=300_000,
    )


def fuzz_run(seed: int, protocol: str = CAUSAL,
             collect_trace: bool = False) -> Tuple[RunResult, List[Verdict]]:
    scenario = fuzz_scenario(seed)
    result = run_scenario(scenario, seed, protocol=protocol,
                          collect_trace=collect_trace, probes=True)
    return result, check_all(result)


# -- report formatting -----------------------------------------------------------


def verdicts_to_json(result: RunResult, verdicts: List[Verdict]) -> dict:
    return {
        "scenario": result.scenario_name,
        "protocol": result.protocol,
        "seed": result.seed,
        "quiescent": result.quiescent,
        "transitions": result.transitions,
        "pending": [list(o) for o in result.pending_opids],
        "halted": result.halted,
        "checks": [
            {"name": v.name, "passed": v.passed, "inconclusive": v.inconclusive,
             "details": v.details}
            for v in verdicts],
        "ok": all_passed(verdicts),
    }


def latency_report_json(code: LinearCode, graph: LatencyGraph) -> dict:
    coded = analyze_latency(graph, code)
    repl = replication_baseline(graph, code.k, capacity=1)
    return {
        "per_pair": {f"s{s}/x{k}": v for (s, k), v in sorted(coded.per_pair.items())},
        "coded": {"worst": coded.worst,
                  "average": coded.average,
                  "average_2dp": round(coded.average, 2)},
        "replication": {"worst": repl.best_worst,
                        "average": repl.best_average,
                        "average_2dp": round(repl.best_average, 2)},
    }


def latency_report_table(code: LinearCode, graph: LatencyGraph) -> str:
    coded = analyze_latency(graph, code)
    repl = replication_baseline(graph, code.k, capacity=1)
    lines = ["read latency by (server, object):"]
    header = "server " + " ".join(f"   X{k}" for k in range(1, code.k + 1))
    lines.append(header)
    for s in range(1, code.n + 1):
        row = " ".join(f"{coded.per_pair[(s, k)]:5.2f}" for k in range(1, code.k + 1))
        lines.append(f"  s{s}   {row}")
    lines.append(f"coded store:          worst {coded.worst:.2f}  average {coded.average:.2f}")
    lines.append(f"replication baseline: worst {repl.best_worst:.2f}  average {repl.best_average:.2f}")
    return "\n".join(lines)


# -- CLI ------------------------------------------------------------------------


def parse_seeds(text: str) -> List[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def _run_one(doc: dict, seed: int, protocol: Optional[str], fairness: Optional[int],
             step_cap: Optional[int], collect_trace: bool) -> dict:
    scenario = scenario_from_json(doc)
    if fairness is not None:
        scenario.fairness = fairness
    if step_cap is not None:
        scenario.step_cap = step_cap
    result = run_scenario(scenario, seed, protocol=protocol,
                          collect_trace=collect_trace, probes=True)
    report = verdicts_to_json(result, check_all(result))
    if collect_trace:
        report["trace_sha256"] = result.trace_sha256()
        report["_trace_jsonl"] = result.trace_jsonl()
    return report


def cmd_run(args) -> int:
    try:
        with open(args.scenario) as fh:
            doc = json.load(fh)
        scenario_from_json(doc)  # validate before fanning out
    except (OSError, json.JSONDecodeError, ScenarioError) as e:
        print(f"error: {args.scenario}: {e}", file=sys.stderr)
        return 2
    seeds = args.seeds
    collect_trace = args.out is not None
    reports = []
    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
            futs = [pool.submit(_run_one, doc, s, args.protocol, args.fairness,
                                args.step_cap, collect_trace) for s in seeds]
            reports = [f.result() for f in futs]
    else:
        reports = [_run_one(doc, s, args.protocol, args.fairness,
                            args.step_cap, collect_trace) for s in seeds]
    ok = True
    for report in reports:
        ok &= report["ok"]
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            base = os.path.join(args.out, f"{report['scenario']}-seed{report['seed']}")
            with open(base + ".trace.jsonl", "w") as fh:
                fh.write(report.pop("_trace_jsonl"))
            with open(base + ".report.json", "w") as fh:
                json.dump(report, fh, indent=1)
        if args.format == "json":
            report.pop("_trace_jsonl", None)
            print(json.dumps(report, sort_keys=True))
        else:
            status = "ok" if report["ok"] else "FAIL"
            checks = " ".join(
                f"{c['name']}={'pass' if c['passed'] else ('n/a' if c['inconclusive'] else 'FAIL')}"
                for c in report["checks"])
            print(f"seed {report['seed']:>4} [{status}] "
                  f"transitions={report['transitions']} {checks}")
    return 0 if ok else 1


def cmd_latency(args) -> int:
    try:
        scenario = scenario_from_json(args.scenario)
    except (OSError, json.JSONDecodeError, ScenarioError) as e:
        print(f"error: {args.scenario}: {e}", file=sys.stderr)
        return 2
    if args.format == "json":
        print(json.dumps(latency_report_json(scenario.code, scenario.graph), sort_keys=True))
    else:
        print(latency_report_table(scenario.code, scenario.graph))
    return 0


def cmd_scenarios(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    docs = dict(builtin.SCRIPTED_SCENARIOS)
    docs["fig1"] = builtin.fig1_scenario_doc
    docs["appendix_a"] = builtin.appendix_a_scenario_doc
    docs["ev_differential"] = builtin.differential_scenario_doc
    for name, builder in sorted(docs.items()):
        path = os.path.join(args.out, f"{name}.json")
        with open(path, "w") as fh:
            json.dump(builder(), fh, indent=1)
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="causalec",
        description="simulate and check the erasure-coded causal store")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="run a scenario under all checkers")
    p_run.add_argument("scenario")
    p_run.add_argument("--seeds", type=parse_seeds, default=[0],
                       help="single seed N or inclusive range A..B")
    p_run.add_argument("--protocol", choices=[CAUSAL, EVENTUAL], default=None)
    p_run.add_argument("--fairness", type=int, default=None)
    p_run.add_argument("--step-cap", type=int, default=None)
    p_run.add_argument("--out", default=None, help="directory for traces and reports")
    p_run.add_argument("--format", choices=["table", "json"], default="table")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.set_defaults(fn=cmd_run)

    p_lat = sub.add_parser("latency", help="latency profile of a scenario's code+graph")
    p_lat.add_argument("scenario")
    p_lat.add_argument("--format", choices=["table", "json"], default="table")
    p_lat.set_defaults(fn=cmd_latency)

    p_scn = sub.add_parser("scenarios", help="emit the bundled scenario files")
    p_scn.add_argument("--out", default="scenarios")
    p_scn.set_defaults(fn=cmd_scenarios)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
