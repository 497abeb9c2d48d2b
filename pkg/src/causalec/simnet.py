"""Deterministic discrete-event simulation of the full system.

Virtual time is an integer tick count (1/1000 of a latency unit), so delays
stay rational and runs with equal seeds replay bit-identically.  Channels are
reliable and FIFO: random per-message delays are clamped so a later send on
the same channel never arrives earlier.  A halted server processes nothing
further; messages addressed to it stay queued forever.

Internal actions fire under a fairness policy: a served delivery is followed
by an apply/encode/collect round at that server, servers that go unserved too
long get a round forced, and once the event heap drains every live server is
swept until no action changes state and nothing is in flight -- that fixed
point is quiescence, and it is detected by re-running the actions, not by
timeouts.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .client import Client
from .field import Value
from .latency import format_ms
from .messages import Message, OpId, ReadReturn, Write, WriteReturnAck
from .scenarios import Scenario, ScriptOp
from .server import Send, Server
from .tags import ProtocolInvariantViolation, Tag, tag_le, tag_max

PROBE_CLIENT_BASE = 1_000_000


@dataclass
class OperationRecord:
    opid: OpId
    client: int
    kind: str
    obj: int
    value: Optional[Value]  # written value, or the value a read returned
    t_invoke: int
    t_response: Optional[int] = None
    ts: Optional[Tuple[int, ...]] = None  # home server's clock when it answered
    write_tag: Optional[Tag] = None
    probe: bool = False

    @property
    def completed(self) -> bool:
        return self.t_response is not None


@dataclass
class TraceRecord:
    seq: int
    t: int
    node: str
    event: tuple
    digest: Optional[tuple]
    emitted: tuple
    notes: tuple = ()

    def to_json_dict(self) -> dict:
        return {
            "seq": self.seq,
            "t": format_ms(self.t),
            "node": self.node,
            "event": self.event,
            "digest": self.digest,
            "emitted": self.emitted,
            "notes": self.notes,
        }


@dataclass
class RunResult:
    scenario_name: str
    protocol: str
    seed: int
    quiescent: bool
    transitions: int
    ops: Dict[OpId, OperationRecord]
    trace: List[TraceRecord]
    violations: List[str]
    write_locality_breaks: int
    pending_opids: List[OpId]
    halted: List[int]
    probe_results: Dict[Tuple[int, int], Optional[Value]]
    servers: Dict[int, Server]
    write_registry: Dict[Tag, Tuple[int, Value]]
    client_homes: Dict[int, int]

    def trace_jsonl(self) -> str:
        return "\n".join(
            json.dumps(r.to_json_dict(), sort_keys=True, separators=(",", ":"))
            for r in self.trace)

    def trace_sha256(self) -> str:
        return hashlib.sha256(self.trace_jsonl().encode()).hexdigest()

    def operation_list(self) -> List[OperationRecord]:
        return sorted(self.ops.values(), key=lambda r: (r.t_invoke, r.opid))


class Simulation:
    def __init__(self, scenario: Scenario, seed: int, protocol: Optional[str] = None,
                 collect_trace: bool = True):
        self.scenario = scenario
        self.seed = seed
        self.protocol = protocol or scenario.protocol
        self.collect_trace = collect_trace
        self.code = scenario.code
        self.n = scenario.code.n
        self.rng = random.Random(0xD15C ^ (seed * 7919))
        self.write_registry: Dict[Tag, Tuple[int, Value]] = {}
        self.servers: Dict[int, Server] = {
            s: Server(s, self.code, self.protocol, write_registry=self.write_registry)
            for s in range(1, self.n + 1)}
        self.clients: Dict[int, Client] = {
            c.id: Client(c.id, c.home) for c in scenario.clients}
        self.scripts: Dict[int, List[ScriptOp]] = scenario.build_scripts(seed)
        self.heap: List[tuple] = []
        self.now = 0
        self.seq = 0
        self.steps = 0
        self.trace: List[TraceRecord] = []
        self.ops: Dict[OpId, OperationRecord] = {}
        self.violations: List[str] = []
        self.write_locality_breaks = 0
        self.probe_results: Dict[Tuple[int, int], Optional[Value]] = {}
        self._chan_last: Dict[tuple, int] = {}
        self._prev_vc: Dict[int, Tuple[int, ...]] = {}
        self._prev_tagvec: Dict[int, Tuple[Tag, ...]] = {}
        self._last_full_round: Dict[int, int] = {s: 0 for s in self.servers}
        self._next_fair_scan = 0
        self._fatal = False
        self.fairness = scenario.fairness_window()
        self.step_cap = scenario.step_cap
        for s, t in scenario.halts.items():
            self._push(t, "halt", s)
        for cid, script in self.scripts.items():
            if script:
                self._push(script[0].time_ms, "invoke", cid)
        for s in self.servers.values():
            self._prev_vc[s.id] = tuple(s.vc)
            self._prev_tagvec[s.id] = tuple(s.m_tagvec)

    # -- scheduling ----------------------------------------------------------

    def _push(self, t: int, kind: str, payload) -> None:
        self.seq += 1
        heapq.heappush(self.heap, (t, self.seq, kind, payload))

    def _link_delay_ms(self, src: int, dst: int) -> int:
        base = self.scenario.graph.delay_ms(src, dst)
        mode = self.scenario.delays
        kind = mode.get("kind", "graph")
        if kind == "graph":
            d = base
        elif kind == "jitter":
            hi = int(base * float(mode.get("factor", 1)))
            d = self.rng.randint(base, max(base, hi))
        else:  # uniform
            lo = int(float(mode.get("min", 0)) * 1000)
            hi = int(float(mode.get("max", 1)) * 1000)
            d = self.rng.randint(lo, hi)
        return d + self.scenario.channel_extra_ms.get((src, dst), 0)

    def _schedule_send(self, src_kind: str, src_id: int, send: Send) -> None:
        if send.kind == "server" and src_kind == "server":
            delay = self._link_delay_ms(src_id, send.dst)
        else:
            delay = 0  # clients talk to their co-located home server
        chan = (src_kind, src_id, send.kind, send.dst)
        t = max(self.now + delay, self._chan_last.get(chan, 0))
        self._chan_last[chan] = t
        self._push(t, "deliver", (send.kind, send.dst, src_kind, src_id, send.msg))

    # -- trace / probes --------------------------------------------------------

    def _record(self, node: str, event: tuple, digest: Optional[tuple],
                emitted: List[Send], notes: tuple = ()) -> None:
        self.steps += 1
        if not self.collect_trace:
            return
        self.trace.append(TraceRecord(
            seq=self.steps, t=self.now, node=node, event=event, digest=digest,
            emitted=tuple((s.kind, s.dst, s.msg.describe()) for s in emitted),
            notes=notes))

    def _probe_after(self, srv: Server) -> None:
        try:
            srv.check_invariants()
        except ProtocolInvariantViolation as e:
            self.violations.append(str(e))
            self._fatal = True
            return
        vc = tuple(srv.vc)
        if vc != self._prev_vc[srv.id]:
            if any(a < b for a, b in zip(vc, self._prev_vc[srv.id])):
                self.violations.append(f"server {srv.id}: vector clock went backwards")
                self._fatal = True
            self._prev_vc[srv.id] = vc
        tv = tuple(srv.m_tagvec)
        if tv != self._prev_tagvec[srv.id]:
            if any(not tag_le(old, new)
                   for old, new in zip(self._prev_tagvec[srv.id], tv)):
                self.violations.append(f"server {srv.id}: symbol tag vector decreased")
                self._fatal = True
            self._prev_tagvec[srv.id] = tv

    def _server_transition(self, sid: int, event: tuple, fn) -> bool:
        """Run one handler atomically; returns whether state changed/emitted."""
        srv = self.servers[sid]
        srv.notes.clear()
        try:
            out = fn()
        except ProtocolInvariantViolation as e:
            self.violations.append(str(e))
            self._fatal = True
            self._record(f"s{sid}", event, srv.digest() if self.collect_trace else None, [])
            return False
        changed = True
        if isinstance(out, tuple):
            changed, sends = out
        else:
            sends = out
        for s in sends:
            self._check_outgoing(srv, s)
            self._schedule_send("server", sid, s)
            if s.kind == "client" and isinstance(s.msg, (WriteReturnAck, ReadReturn)):
                rec = self.ops.get(s.msg.opid)
                if rec is not None and rec.ts is None:
                    rec.ts = tuple(srv.vc)
                    if rec.kind == "write":
                        rec.write_tag = Tag(rec.ts, rec.client)
        digest = srv.digest() if self.collect_trace else None
        self._record(f"s{sid}", event, digest, sends, tuple(srv.notes))
        self._probe_after(srv)
        return changed or bool(sends)

    def _check_outgoing(self, srv: Server, send: Send) -> None:
        from .messages import ValRespEncoded

        if isinstance(send.msg, ValRespEncoded):
            try:
                srv.check_symbol_legitimacy(send.msg.symbol, send.msg.tagvec)
            except ProtocolInvariantViolation as e:
                self.violations.append(f"outgoing response: {e}")
                self._fatal = True

    # -- event processing -------------------------------------------------------

    def _deliver_to_server(self, sid: int, src_kind: str, src: int, msg: Message) -> None:
        srv = self.servers[sid]
        event = ("recv", f"{'c' if src_kind == 'client' else 's'}{src}", msg.describe())
        self._server_transition(sid, event, lambda: srv.handle(src, msg))
        if isinstance(msg, Write):
            # write locality: the ack must come out of this very transition
            rec = self.ops.get(msg.opid)
            if rec is None or rec.ts is None:
                self.write_locality_breaks += 1
                self.violations.append(
                    f"write {msg.opid} delivered to server {sid} without same-transition ack")

    def _deliver_to_client(self, cid: int, src_kind: str, src: int, msg: Message) -> None:
        client = self.clients[cid]
        completion = client.on_server_message(msg)
        self._record(f"c{cid}", ("recv", f"s{src}", msg.describe()), None, [])
        if completion is None:
            return
        rec = self.ops[completion.opid]
        rec.t_response = self.now
        if completion.kind == "read":
            rec.value = completion.value
        if rec.probe:
            self.probe_results[(client.home, rec.obj)] = completion.value
        script = self.scripts.get(cid, [])
        if script:
            self._push(max(self.now, script[0].time_ms), "invoke", cid)

    def _try_invoke(self, cid: int) -> None:
        client = self.clients[cid]
        script = self.scripts.get(cid, [])
        if not script or client.pending is not None:
            return
        op = script.pop(0)
        if op.kind == "write":
            opid, send = client.invoke_write(op.obj, op.value)
        else:
            opid, send = client.invoke_read(op.obj)
        self.ops[opid] = OperationRecord(
            opid=opid, client=cid, kind=op.kind, obj=op.obj,
            value=op.value, t_invoke=self.now,
            probe=cid >= PROBE_CLIENT_BASE)
        self._record(f"c{cid}", ("invoke", op.kind, op.obj,
                                 op.value if op.kind == "write" else None), None, [send])
        self._schedule_send("client", cid, send)

    def _service_round(self, sid: int, force: bool = False) -> bool:
        """Apply-drain then encode and collect.  Unless forced, the encode
        and collect steps run only when some prior mutation could have
        enabled them; forced rounds certify quiescence and fairness."""
        srv = self.servers[sid]
        if srv.halted:
            return False
        any_change = False
        attempted = False
        while srv.inqueue:
            attempted = True
            changed = self._server_transition(sid, ("apply",), srv.apply_inqueue)
            any_change |= changed
            if not changed or self._fatal:
                break
        if self._fatal or not (force or srv.round_dirty):
            return any_change
        if not attempted:
            self._record(f"s{sid}", ("apply",),
                         srv.digest() if self.collect_trace else None, [])
        self._last_full_round[sid] = self.steps
        ch_e = self._server_transition(sid, ("encode",), srv.encoding)
        if self._fatal:
            return any_change or ch_e
        ch_g = self._server_transition(sid, ("gc",), srv.garbage_collection)
        if not ch_e and not ch_g:
            srv.round_dirty = False
        return any_change or ch_e or ch_g

    def _fairness_rounds(self) -> None:
        if self.steps < self._next_fair_scan:
            return
        self._next_fair_scan = self.steps + 4
        due = [s for s, last in self._last_full_round.items()
               if not self.servers[s].halted and self.steps - last >= self.fairness]
        for s in sorted(due):
            if self._fatal:
                return
            self._service_round(s, force=True)

    # -- main loop -----------------------------------------------------------------

    def _drain(self) -> None:
        while self.heap and not self._fatal and self.steps < self.step_cap:
            t, _, kind, payload = heapq.heappop(self.heap)
            self.now = max(self.now, t)
            if kind == "halt":
                self.servers[payload].halted = True
                self._record(f"s{payload}", ("halt",), None, [])
            elif kind == "invoke":
                self._try_invoke(payload)
            else:
                dst_kind, dst, src_kind, src, msg = payload
                if dst_kind == "server":
                    if self.servers[dst].halted:
                        continue
                    self._deliver_to_server(dst, src_kind, src, msg)
                    if not self._fatal:
                        self._service_round(dst)
                else:
                    self._deliver_to_client(dst, src_kind, src, msg)
            self._fairness_rounds()

    def run_to_quiescence(self) -> bool:
        while not self._fatal and self.steps < self.step_cap:
            self._drain()
            if self._fatal or self.steps >= self.step_cap:
                break
            swept = False
            for s in sorted(self.servers):
                if not self.servers[s].halted:
                    swept |= self._service_round(s, force=True)
            if not swept and not self.heap:
                return True
        return False

    def inject_probes(self) -> None:
        """One read per (live server, object), issued by fresh probe clients."""
        idx = 0
        for s in sorted(self.servers):
            if self.servers[s].halted:
                continue
            for obj in range(1, self.code.k + 1):
                idx += 1
                cid = PROBE_CLIENT_BASE + idx
                self.clients[cid] = Client(cid, s)
                self.scripts[cid] = [ScriptOp(self.now, "read", obj)]
                self.probe_results[(s, obj)] = None
                self._push(self.now, "invoke", cid)

    def result(self, quiescent: bool) -> RunResult:
        pending = [opid for opid, rec in self.ops.items() if not rec.completed]
        return RunResult(
            scenario_name=self.scenario.name,
            protocol=self.protocol,
            seed=self.seed,
            quiescent=quiescent,
            transitions=self.steps,
            ops=self.ops,
            trace=self.trace,
            violations=self.violations,
            write_locality_breaks=self.write_locality_breaks,
            pending_opids=sorted(pending),
            halted=sorted(s for s in self.servers if self.servers[s].halted),
            probe_results=self.probe_results,
            servers=self.servers,
            write_registry=self.write_registry,
            client_homes={cid: c.home for cid, c in self.clients.items()},
        )


def run(scenario: Scenario, seed: int, protocol: Optional[str] = None,
        collect_trace: bool = True, probes: bool = False) -> RunResult:
    """Execute a scenario to quiescence; optionally follow with probe reads.

    Probe reads (one per live server and object) run after the workload has
    quiesced, so their returns witness the converged value of each object.
    """
    sim = Simulation(scenario, seed, protocol=protocol, collect_trace=collect_trace)
    quiescent = sim.run_to_quiescence()
    any_halted = any(s.halted for s in sim.servers.values())
    if probes and quiescent and not sim._fatal and not any_halted:
        # convergence is only promised when every server keeps taking steps
        sim.inject_probes()
        quiescent = sim.run_to_quiescence()
    return sim.result(quiescent)


def max_tag_write_value(result: RunResult, obj: int, code_zero: Value) -> Value:
    """The value of the newest write to obj, or the zero value if none."""
    tags = [t for t, (o, _v) in result.write_registry.items() if o == obj]
    if not tags:
        return code_zero
    newest = tag_max(tags)
    return result.write_registry[newest][1]
