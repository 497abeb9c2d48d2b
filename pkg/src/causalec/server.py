"""Server state machine for the coded store, in both protocol variants.

One event (message receipt or internal action) executes a full handler body
atomically and returns the ordered batch of messages it emits.  The causal
variant ("causalec") applies remote writes only in causal order and serves
list reads only when the list is at least as new as the encoded symbol; the
eventually consistent variant ("eventualec") drops those guards and lets a
value response answer every pending read on its object.  All other lines are
shared, so the variants differ exactly by the guard flags below.

State per server (all tag vectors indexed by object-1):

* ``vc``            vector clock, one counter per server
* ``inqueue``       pending remote writes, smaller timestamps nearer the head
* ``L[X]``          version history list: tag -> value
* ``dell[X]``       delete notices seen: ordered set of (tag, server)
* ``m_val/m_tagvec``the stored codeword symbol and the versions it encodes
* ``readl``         pending reads: opid -> entry with per-server symbol slots
* ``error1/error2`` per-object flags that provably stay 0
* ``tmax[X]``       newest tag known to be deletable everywhere
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

from .coding import LinearCode
from .field import Value
from .messages import (
    App,
    Del,
    Message,
    OpId,
    ReadReturn,
    TagVec,
    ValInq,
    ValResp,
    ValRespEncoded,
    WriteReturnAck,
)
from .tags import (
    GT,
    LOCALHOST,
    LT,
    ProtocolInvariantViolation,
    Tag,
    vc_compare,
    zero_tag,
)

CAUSAL = "causalec"
EVENTUAL = "eventualec"
VARIANTS = (CAUSAL, EVENTUAL)


class Send(NamedTuple):
    kind: str  # "server" or "client"
    dst: int
    msg: Message


@dataclass
class ReadLEntry:
    clientid: int
    opid: OpId
    obj: int
    tagvec: TagVec
    symbols: List[Optional[Value]]


@dataclass
class InQueueItem:
    origin: int
    obj: int
    value: Value
    tag: Tag


class Server:
    def __init__(self, sid: int, code: LinearCode, variant: str = CAUSAL,
                 write_registry: Optional[Dict[Tag, Tuple[int, Value]]] = None):
        if variant not in VARIANTS:
            raise ValueError(f"unknown protocol variant {variant!r}")
        self.id = sid
        self.code = code
        self.variant = variant
        self.n = code.n
        self.k = code.k
        self.objects_here = code.objects_at(sid)
        zt = zero_tag(self.n)
        zv = code.zero_value()
        self.vc: List[int] = [0] * self.n
        self.inqueue: List[InQueueItem] = []
        self.L: List[Dict[Tag, Value]] = [{zt: zv} for _ in range(self.k)]
        self.dell: List[Dict[Tuple[Tag, int], None]] = [{} for _ in range(self.k)]
        self.m_val: Value = zv
        self.m_tagvec: List[Tag] = [zt] * self.k
        self.readl: Dict[OpId, ReadLEntry] = {}
        self.error1: List[int] = [0] * self.k
        self.error2: List[int] = [0] * self.k
        self.tmax: List[Tag] = [zt] * self.k
        self.halted = False
        self.notes: List[tuple] = []  # per-transition annotations, drained by the simulator
        self._opid_counter = 0
        self._gc_del_sent: List[Optional[Tag]] = [None] * self.k
        self._readl_opids_seen: set = set()
        self._holders = [
            [i for i in range(1, self.n + 1) if x in code.objects_at(i)]
            for x in range(1, self.k + 1)]
        # incremental views of dell: per-object per-server newest tag, and
        # which servers sent each exact tag
        self._del_max: List[Dict[int, Tag]] = [{} for _ in range(self.k)]
        self._del_exact: List[Dict[Tag, set]] = [{} for _ in range(self.k)]
        # when present, L insertions are checked against the known write values
        self.write_registry = write_registry
        self._m_verified: Optional[tuple] = None
        # encode/collect have pending work only after a relevant mutation
        self.round_dirty = True
        self._del_rev = [0] * self.k
        self._gc_cache: List[Optional[tuple]] = [None] * self.k

    # -- small helpers -----------------------------------------------------

    def _zero_tag(self) -> Tag:
        return zero_tag(self.n)

    def _highest(self, obj: int) -> Optional[Tuple[Tag, Value]]:
        lx = self.L[obj - 1]
        if not lx:
            return None
        t = max(lx)
        return t, lx[t]

    def _add_del(self, obj: int, tag: Tag, srv: int) -> None:
        self.dell[obj - 1][(tag, srv)] = None
        prev = self._del_max[obj - 1].get(srv)
        if prev is None or prev < tag:
            self._del_max[obj - 1][srv] = tag
        self._del_exact[obj - 1].setdefault(tag, set()).add(srv)
        self._del_rev[obj - 1] += 1
        self.round_dirty = True

    def _l_insert(self, obj: int, tag: Tag, value: Value) -> None:
        if self.write_registry is not None and tag != self._zero_tag():
            known = self.write_registry.get(tag)
            if known is None or known[0] != obj or known[1] != value:
                raise ProtocolInvariantViolation(
                    f"server {self.id}: list entry {tag.render()} on X{obj} does not "
                    f"match the write with that tag")
        self.L[obj - 1][tag] = value
        self.round_dirty = True

    def _readl_add(self, entry: ReadLEntry) -> None:
        if entry.opid in self._readl_opids_seen:
            raise ProtocolInvariantViolation(
                f"server {self.id}: second pending-read tuple for opid {entry.opid}")
        self._readl_opids_seen.add(entry.opid)
        self.readl[entry.opid] = entry
        self.round_dirty = True

    def _readl_remove(self, opid: OpId) -> None:
        del self.readl[opid]
        self.round_dirty = True

    def _other_servers(self) -> List[int]:
        return [j for j in range(1, self.n + 1) if j != self.id]

    def _servers_with(self, obj: int) -> List[int]:
        return self._holders[obj - 1]

    def _next_internal_opid(self) -> OpId:
        self._opid_counter += 1
        return (-self.id, self._opid_counter)

    def object_indices(self) -> range:
        return range(1, self.k + 1)

    # -- client messages ---------------------------------------------------

    def on_write(self, clientid: int, opid: OpId, obj: int, value: Value) -> List[Send]:
        self.vc[self.id - 1] += 1
        t = Tag(tuple(self.vc), clientid)
        if self.write_registry is not None:
            self.write_registry[t] = (obj, value)
        self._l_insert(obj, t, value)
        sends = [Send("client", clientid, WriteReturnAck(opid))]
        for j in self._other_servers():
            sends.append(Send("server", j, App(obj, value, t)))
        for entry in [e for e in self.readl.values()
                      if e.obj == obj and e.clientid != LOCALHOST]:
            sends.append(Send("client", entry.clientid, ReadReturn(entry.opid, value)))
            self._readl_remove(entry.opid)
        return sends

    def on_read(self, clientid: int, opid: OpId, obj: int) -> List[Send]:
        highest = self._highest(obj)
        if highest is not None:
            ht, hv = highest
            if self.variant == EVENTUAL or self.m_tagvec[obj - 1] <= ht:
                return [Send("client", clientid, ReadReturn(opid, hv))]
        rs = self.code.singleton_recovery(self.id, obj)
        if rs is not None:
            v = self.code.decode(obj, rs, {self.id: self.m_val})
            self.notes.append(("decoded", obj, (self.id,), opid))
            return [Send("client", clientid, ReadReturn(opid, v))]
        symbols: List[Optional[Value]] = [None] * self.n
        symbols[self.id - 1] = self.m_val
        self._readl_add(ReadLEntry(clientid, opid, obj, tuple(self.m_tagvec), symbols))
        msg = ValInq(clientid, opid, obj, tuple(self.m_tagvec))
        return [Send("server", j, msg) for j in self._other_servers()]

    # -- server messages ---------------------------------------------------

    def on_del(self, frm: int, obj: int, tag: Tag) -> List[Send]:
        self._add_del(obj, tag, frm)
        return []

    def on_app(self, frm: int, obj: int, value: Value, tag: Tag) -> List[Send]:
        item = InQueueItem(frm, obj, value, tag)
        # insert before the suffix of strictly larger timestamps: a new tuple
        # goes after every existing one with an equal or incomparable tag
        idx = len(self.inqueue)
        while idx > 0 and vc_compare(self.inqueue[idx - 1].tag.ts, tag.ts) == GT:
            idx -= 1
        self.inqueue.insert(idx, item)
        return []

    def on_val_inq(self, frm: int, clientid: int, opid: OpId, obj: int,
                   wantedtagvec: TagVec) -> List[Send]:
        wanted = wantedtagvec[obj - 1]
        if self.variant == CAUSAL:
            v = self.L[obj - 1].get(wanted)
            if v is not None:
                return [Send("server", frm,
                             ValResp(obj, v, clientid, opid, wantedtagvec))]
        else:
            if clientid != LOCALHOST and self.L[obj - 1]:
                ht, hv = self._highest(obj)
                return [Send("server", frm, ValResp(obj, hv))]
        resp_val = self.m_val
        resp_tagvec = list(self.m_tagvec)
        zt = self._zero_tag()
        zv = self.code.zero_value()
        for x in sorted(self.objects_here):
            mt = self.m_tagvec[x - 1]
            if mt == wantedtagvec[x - 1]:
                continue
            cur = self.L[x - 1].get(mt)
            if cur is not None:
                resp_val = self.code.reencode(self.id, x, resp_val, cur, zv)
                resp_tagvec[x - 1] = zt
                wv = self.L[x - 1].get(wantedtagvec[x - 1])
                if wv is not None:
                    resp_val = self.code.reencode(self.id, x, resp_val, zv, wv)
                    resp_tagvec[x - 1] = wantedtagvec[x - 1]
        msg = ValRespEncoded(resp_val, tuple(resp_tagvec), clientid, opid, obj, wantedtagvec)
        return [Send("server", frm, msg)]

    def on_val_resp(self, frm: int, msg: ValResp) -> List[Send]:
        sends: List[Send] = []
        if self.variant == CAUSAL:
            entry = self.readl.get(msg.opid)
            if (entry is None or entry.clientid != msg.clientid
                    or entry.obj != msg.obj or entry.tagvec != msg.requestedtags):
                return []
            if entry.clientid == LOCALHOST:
                self._l_insert(msg.obj, msg.requestedtags[msg.obj - 1], msg.value)
            else:
                sends.append(Send("client", entry.clientid, ReadReturn(entry.opid, msg.value)))
            self._readl_remove(entry.opid)
            return sends
        # eventual: the response names no operation, so it answers every
        # pending read on the object; localhost tuples are dropped unserved
        for entry in [e for e in self.readl.values() if e.obj == msg.obj]:
            if entry.clientid != LOCALHOST:
                sends.append(Send("client", entry.clientid, ReadReturn(entry.opid, msg.value)))
            self._readl_remove(entry.opid)
        return sends

    def on_val_resp_encoded(self, frm: int, msg: ValRespEncoded) -> List[Send]:
        for i in range(self.k):
            self.error1[i] = 0
            self.error2[i] = 0
        modified = msg.symbol
        entry = self.readl.get(msg.opid)
        if (entry is None or entry.clientid != msg.clientid
                or entry.obj != msg.obj or entry.tagvec != msg.requestedtags):
            return []
        zt = self._zero_tag()
        zv = self.code.zero_value()
        for x in sorted(self.code.objects_at(frm)):
            rt = msg.requestedtags[x - 1]
            mt = msg.tagvec[x - 1]
            if rt == mt:
                continue
            if mt != zt:
                w = self.L[x - 1].get(mt)
                if w is not None:
                    modified = self.code.reencode(frm, x, modified, w, zv)
                else:
                    self.error1[x - 1] = 1
            if self.error1[x - 1] != 1 and (v2 := self.L[x - 1].get(rt)) is not None:
                modified = self.code.reencode(frm, x, modified, zv, v2)
            else:
                self.error2[x - 1] = 1
        if any(self.error1) or any(self.error2):
            return []
        entry.symbols[frm - 1] = modified
        populated = {i + 1 for i, w in enumerate(entry.symbols) if w is not None}
        sends: List[Send] = []
        for rs in self.code.minimal_recovery_sets(entry.obj):
            if rs.members <= populated:
                symbols = {j: entry.symbols[j - 1] for j in rs.members}
                v = self.code.decode(entry.obj, rs, symbols)
                self.notes.append(("decoded", entry.obj, tuple(sorted(rs.members)), entry.opid))
                if entry.clientid == LOCALHOST:
                    self._l_insert(entry.obj, self.m_tagvec[entry.obj - 1], v)
                else:
                    sends.append(Send("client", entry.clientid, ReadReturn(entry.opid, v)))
                self._readl_remove(entry.opid)
                break
        return sends

    def handle(self, frm: int, msg: Message) -> List[Send]:
        """Dispatch one received message; frm is a client id for Write/Read,
        a server id otherwise."""
        from .messages import Read as ReadMsg, Write as WriteMsg

        if isinstance(msg, WriteMsg):
            return self.on_write(frm, msg.opid, msg.obj, msg.value)
        if isinstance(msg, ReadMsg):
            return self.on_read(frm, msg.opid, msg.obj)
        if isinstance(msg, App):
            return self.on_app(frm, msg.obj, msg.value, msg.tag)
        if isinstance(msg, Del):
            return self.on_del(frm, msg.obj, msg.tag)
        if isinstance(msg, ValInq):
            return self.on_val_inq(frm, msg.clientid, msg.opid, msg.obj, msg.wantedtagvec)
        if isinstance(msg, ValResp):
            return self.on_val_resp(frm, msg)
        if isinstance(msg, ValRespEncoded):
            return self.on_val_resp_encoded(frm, msg)
        raise TypeError(f"server cannot handle {type(msg).__name__}")

    # -- internal actions ----------------------------------------------------

    def _inqueue_head(self) -> InQueueItem:
        # a minimal-timestamp item; among incomparable minima, lowest origin
        best = None
        for item in self.inqueue:
            minimal = not any(
                vc_compare(other.tag.ts, item.tag.ts) == LT for other in self.inqueue)
            if minimal and (best is None or item.origin < best.origin):
                best = item
        return best if best is not None else self.inqueue[0]

    def apply_inqueue(self) -> Tuple[bool, List[Send]]:
        if not self.inqueue:
            return False, []
        item = self._inqueue_head()
        j, t = item.origin, item.tag
        if self.variant == CAUSAL:
            ready = (t.ts[j - 1] == self.vc[j - 1] + 1
                     and all(t.ts[p] <= self.vc[p]
                             for p in range(self.n) if p != j - 1))
            if not ready:
                return False, []
        self.inqueue.remove(item)
        self.vc[j - 1] = t.ts[j - 1]
        self._l_insert(item.obj, t, item.value)
        sends: List[Send] = []
        for entry in [e for e in self.readl.values()
                      if e.obj == item.obj and e.clientid != LOCALHOST]:
            if self.variant == CAUSAL and not entry.tagvec[item.obj - 1] <= t:
                continue
            sends.append(Send("client", entry.clientid, ReadReturn(entry.opid, item.value)))
            self._readl_remove(entry.opid)
        for entry in [e for e in self.readl.values()
                      if e.obj == item.obj and e.clientid == LOCALHOST
                      and e.tagvec[item.obj - 1] == t]:
            self._readl_remove(entry.opid)
        return True, sends

    def encoding(self) -> Tuple[bool, List[Send]]:
        changed = False
        sends: List[Send] = []
        for x in sorted(self.objects_here):
            highest = self._highest(x)
            if highest is None or not self.m_tagvec[x - 1] < highest[0]:
                continue
            ht, hv = highest
            old = self.L[x - 1].get(self.m_tagvec[x - 1])
            if old is not None:
                self.m_val = self.code.reencode(self.id, x, self.m_val, old, hv)
                self.m_tagvec[x - 1] = ht
                for j in self._servers_with(x):
                    if j != self.id:
                        sends.append(Send("server", j, Del(x, ht)))
                self._add_del(x, ht, self.id)
                changed = True
            else:
                pending = any(
                    e.clientid == LOCALHOST and e.obj == x
                    and e.tagvec[x - 1] == self.m_tagvec[x - 1]
                    for e in self.readl.values())
                if not pending:
                    opid = self._next_internal_opid()
                    symbols: List[Optional[Value]] = [None] * self.n
                    symbols[self.id - 1] = self.m_val
                    self._readl_add(
                        ReadLEntry(LOCALHOST, opid, x, tuple(self.m_tagvec), symbols))
                    msg = ValInq(LOCALHOST, opid, x, tuple(self.m_tagvec))
                    for j in self._other_servers():
                        sends.append(Send("server", j, msg))
                    changed = True
        for x in self.object_indices():
            if x in self.objects_here:
                continue
            highest = self._highest(x)
            if highest is None or not self.m_tagvec[x - 1] < highest[0]:
                continue
            threshold = self._per_server_del_max(x, self._servers_with(x))
            if threshold is None:
                continue
            mt = self.m_tagvec[x - 1]
            candidates = [t for t in self.L[x - 1] if mt < t <= threshold]
            if candidates:
                newtag = max(candidates)
                self.m_tagvec[x - 1] = newtag
                self._add_del(x, newtag, self.id)
                for j in self._other_servers():
                    sends.append(Send("server", j, Del(x, newtag)))
                changed = True
        return changed, sends

    def _per_server_del_max(self, obj: int, servers: List[int]) -> Optional[Tag]:
        """max(U): the largest tag every listed server has deleted past.

        None when some listed server has sent no delete notice yet (U empty).
        """
        dmax = self._del_max[obj - 1]
        best = None
        for i in servers:
            t = dmax.get(i)
            if t is None:
                return None
            if best is None or t < best:
                best = t
        return best

    def garbage_collection(self) -> Tuple[bool, List[Send]]:
        changed = False
        sends: List[Send] = []
        all_servers = list(range(1, self.n + 1))
        for x in self.object_indices():
            new_tmax = self._per_server_del_max(x, all_servers)
            if new_tmax is None:
                new_tmax = self._zero_tag()
            if new_tmax != self.tmax[x - 1]:
                self.tmax[x - 1] = new_tmax
                changed = True
            tmax = self.tmax[x - 1]
            mtag = self.m_tagvec[x - 1]
            lx = self.L[x - 1]
            if lx:
                in_sbar = len(self._del_exact[x - 1].get(mtag, ())) == self.n
                protected = {e.tagvec[x - 1] for e in self.readl.values()
                             if e.tagvec[x - 1] < mtag}
                if tmax == mtag and in_sbar and max(lx) <= mtag:
                    doomed = [t for t in lx if t <= tmax and t not in protected]
                elif tmax < mtag and x not in self.objects_here:
                    doomed = [t for t in lx if t <= tmax and t not in protected]
                else:
                    doomed = [t for t in lx if t < tmax and t not in protected]
                for t in doomed:
                    del lx[t]
                    changed = True
            if x in self.objects_here:
                max_u = self._per_server_del_max(x, self._servers_with(x))
                if max_u is not None and self._gc_del_sent[x - 1] != max_u:
                    # re-broadcasting the same notice forever would keep the
                    # run from quiescing; only a new max goes out
                    self._gc_del_sent[x - 1] = max_u
                    for j in self._other_servers():
                        sends.append(Send("server", j, Del(x, max_u)))
                    changed = True
        return changed, sends

    # -- probes ---------------------------------------------------------------

    def check_invariants(self) -> None:
        """Raise on any violation of the always-true state conditions."""
        for x in self.object_indices():
            if self.error1[x - 1] or self.error2[x - 1]:
                raise ProtocolInvariantViolation(
                    f"server {self.id}: error flag set for X{x}")
            if not self.tmax[x - 1] <= self.m_tagvec[x - 1]:
                raise ProtocolInvariantViolation(
                    f"server {self.id}: tmax {self.tmax[x - 1].render()} exceeds "
                    f"symbol tag {self.m_tagvec[x - 1].render()} for X{x}")
        if self.write_registry is not None:
            state = (self.m_val, tuple(self.m_tagvec))
            if state != self._m_verified:
                self.check_symbol_legitimacy(state[0], state[1])
                self._m_verified = state

    def check_symbol_legitimacy(self, symbol: Value, tagvec: TagVec) -> None:
        """Verify a symbol equals the encoding of the writes its tags name."""
        if self.write_registry is None:
            return
        zt = self._zero_tag()
        values = []
        for x in self.object_indices():
            t = tagvec[x - 1]
            if t == zt:
                values.append(self.code.zero_value())
            else:
                known = self.write_registry.get(t)
                if known is None or known[0] != x:
                    raise ProtocolInvariantViolation(
                        f"server {self.id}: symbol tag {t.render()} names no write on X{x}")
                values.append(known[1])
        expect = self.code.encode_one(self.id, values)
        if expect != symbol:
            raise ProtocolInvariantViolation(
                f"server {self.id}: stored symbol is not the encoding of its tag vector")

    def digest(self) -> tuple:
        """Compact per-transition snapshot used by traces and probes."""
        return (
            tuple(self.vc),
            tuple(t.render() for t in self.m_tagvec),
            tuple(len(self.L[x]) for x in range(self.k)),
            tuple(self.error1),
            tuple(self.error2),
            tuple(t.render() for t in self.tmax),
            len(self.inqueue),
            len(self.readl),
        )
