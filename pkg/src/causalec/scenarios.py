"""Scenario model: what to simulate, loaded from JSON.

A scenario bundles the code, the latency graph, the protocol variant, the
client population with their home servers, a workload (a fixed script or a
seeded random generator), message-delay behaviour, a halt schedule, and the
scheduler knobs.  Validation errors name the offending field path so the CLI
can report them usefully.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .coding import LinearCode
from .field import Value
from .latency import LatencyGraph, to_ms
from .server import CAUSAL, VARIANTS

DEFAULT_STEP_CAP = 500_000


class ScenarioError(ValueError):
    """Malformed scenario; the message starts with the field path."""


@dataclass
class ScriptOp:
    time_ms: int
    kind: str  # "read" | "write"
    obj: int
    value: Optional[Value] = None


@dataclass
class ClientSpec:
    id: int
    home: int


@dataclass
class RandomWorkload:
    ops: int
    read_fraction: float = 0.5
    think_ms: Tuple[int, int] = (0, 2000)


@dataclass
class Scenario:
    name: str
    code: LinearCode
    graph: LatencyGraph
    protocol: str = CAUSAL
    clients: List[ClientSpec] = field(default_factory=list)
    random_workload: Optional[RandomWorkload] = None
    scripts: Dict[int, List[ScriptOp]] = field(default_factory=dict)  # client -> ops
    delays: dict = field(default_factory=lambda: {"kind": "graph"})
    halts: Dict[int, int] = field(default_factory=dict)  # server -> halt time (ms)
    channel_extra_ms: Dict[Tuple[int, int], int] = field(default_factory=dict)
    fairness: Optional[int] = None
    step_cap: int = DEFAULT_STEP_CAP

    def __post_init__(self):
        if self.code.n != self.graph.n:
            raise ScenarioError(
                f"latency_graph.n: {self.graph.n} servers but the code has {self.code.n} rows")
        if self.protocol not in VARIANTS:
            raise ScenarioError(f"protocol: must be one of {VARIANTS}, got {self.protocol!r}")
        seen = set()
        for i, c in enumerate(self.clients):
            if c.id < 1:
                raise ScenarioError(f"clients[{i}].id: must be >= 1")
            if c.id in seen:
                raise ScenarioError(f"clients[{i}].id: duplicate client id {c.id}")
            seen.add(c.id)
            if not 1 <= c.home <= self.code.n:
                raise ScenarioError(
                    f"clients[{i}].home: {c.home} out of range 1..{self.code.n}")
        for cid in self.scripts:
            if cid not in seen:
                raise ScenarioError(f"workload.ops: script references unknown client {cid}")
        for srv in self.halts:
            if not 1 <= srv <= self.code.n:
                raise ScenarioError(f"halts: server {srv} out of range 1..{self.code.n}")
        if self.random_workload is not None and not self.clients:
            raise ScenarioError("clients: random workload needs at least one client")

    def fairness_window(self) -> int:
        return self.fairness if self.fairness is not None else 8 * self.code.n

    # -- workload materialisation -------------------------------------------

    def build_scripts(self, seed: int) -> Dict[int, List[ScriptOp]]:
        """Per-client operation scripts; random workloads draw from the seed."""
        if self.random_workload is None:
            return {c.id: list(self.scripts.get(c.id, [])) for c in self.clients}
        rw = self.random_workload
        rng = random.Random(0x5EED ^ (seed * 1_000_003))
        scripts: Dict[int, List[ScriptOp]] = {c.id: [] for c in self.clients}
        clock: Dict[int, int] = {c.id: 0 for c in self.clients}
        p = self.code.field.p
        length = self.code.value_len
        for _ in range(rw.ops):
            c = rng.choice(self.clients).id
            gap = rng.randint(rw.think_ms[0], rw.think_ms[1])
            clock[c] += gap
            obj = rng.randint(1, self.code.k)
            if rng.random() < rw.read_fraction:
                scripts[c].append(ScriptOp(clock[c], "read", obj))
            else:
                value = tuple(rng.randrange(p) for _ in range(length))
                scripts[c].append(ScriptOp(clock[c], "write", obj, value))
        return scripts


def _expect(doc: dict, key: str, path: str):
    if key not in doc:
        raise ScenarioError(f"{path}{key}: missing required field")
    return doc[key]


def scenario_from_json(doc) -> Scenario:
    """Parse a scenario document (dict, JSON text, or file path)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError:
            with open(doc) as fh:
                doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ScenarioError(": scenario must be a JSON object")

    code_doc = _expect(doc, "code", "")
    try:
        code = LinearCode.from_json(code_doc)
    except (ValueError, TypeError) as e:
        raise ScenarioError(f"code: {e}") from e

    graph_doc = _expect(doc, "latency_graph", "")
    try:
        graph = LatencyGraph.from_json(graph_doc)
    except (ValueError, TypeError) as e:
        raise ScenarioError(f"latency_graph: {e}") from e

    clients = []
    for i, c in enumerate(doc.get("clients", [])):
        if not isinstance(c, dict) or "id" not in c or "home" not in c:
            raise ScenarioError(f"clients[{i}]: needs fields 'id' and 'home'")
        clients.append(ClientSpec(int(c["id"]), int(c["home"])))

    random_workload = None
    scripts: Dict[int, List[ScriptOp]] = {}
    w = doc.get("workload")
    if w is not None:
        kind = _expect(w, "kind", "workload.")
        if kind == "random":
            ops = _expect(w, "ops", "workload.")
            if not isinstance(ops, int) or ops < 0:
                raise ScenarioError("workload.ops: must be a non-negative integer")
            think = w.get("think_ms", [0, 2000])
            random_workload = RandomWorkload(
                ops=ops,
                read_fraction=float(w.get("read_fraction", 0.5)),
                think_ms=(int(think[0]), int(think[1])),
            )
        elif kind == "script":
            for i, op in enumerate(_expect(w, "ops", "workload.")):
                path = f"workload.ops[{i}]"
                for fld in ("client", "op", "object"):
                    if fld not in op:
                        raise ScenarioError(f"{path}.{fld}: missing required field")
                kind_op = op["op"]
                if kind_op not in ("read", "write"):
                    raise ScenarioError(f"{path}.op: must be 'read' or 'write'")
                value = None
                if kind_op == "write":
                    raw = _expect(op, "value", path + ".")
                    if isinstance(raw, int):
                        raw = [raw]
                    value = code.field.value(raw)
                    if len(value) != code.value_len:
                        raise ScenarioError(
                            f"{path}.value: length {len(value)} != code value_len {code.value_len}")
                scripts.setdefault(int(op["client"]), []).append(
                    ScriptOp(to_ms(op.get("time", 0)), kind_op, int(op["object"]), value))
        else:
            raise ScenarioError(f"workload.kind: unknown kind {kind!r}")

    delays = doc.get("delays", {"kind": "graph"})
    if delays.get("kind") not in ("graph", "jitter", "uniform"):
        raise ScenarioError(f"delays.kind: unknown kind {delays.get('kind')!r}")
    if delays.get("kind") == "jitter" and float(delays.get("factor", 1)) < 1:
        raise ScenarioError("delays.factor: jitter factor must be >= 1")

    halts = {}
    for i, h in enumerate(doc.get("halts", [])):
        if "server" not in h or "time" not in h:
            raise ScenarioError(f"halts[{i}]: needs fields 'server' and 'time'")
        halts[int(h["server"])] = to_ms(h["time"])

    extra = {}
    for i, e in enumerate(doc.get("channel_extra", [])):
        for fld in ("from", "to", "extra"):
            if fld not in e:
                raise ScenarioError(f"channel_extra[{i}].{fld}: missing required field")
        extra[(int(e["from"]), int(e["to"]))] = to_ms(e["extra"])

    return Scenario(
        name=doc.get("name", "scenario"),
        code=code,
        graph=graph,
        protocol=doc.get("protocol", CAUSAL),
        clients=clients,
        random_workload=random_workload,
        scripts=scripts,
        delays=delays,
        halts=halts,
        channel_extra_ms=extra,
        fairness=doc.get("fairness"),
        step_cap=int(doc.get("step_cap", DEFAULT_STEP_CAP)),
    )
