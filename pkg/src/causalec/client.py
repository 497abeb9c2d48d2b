"""Client automaton: one outstanding operation, messages only to its home server."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .field import Value
from .messages import Message, OpId, Read, ReadReturn, Write, WriteReturnAck
from .server import Send


class WellFormednessError(Exception):
    """A client invoked an operation while another was still pending."""


@dataclass
class Pending:
    opid: OpId
    kind: str  # "read" or "write"
    obj: int
    value: Optional[Value] = None


@dataclass
class Completion:
    opid: OpId
    kind: str
    obj: int
    value: Optional[Value]  # written value for writes, returned value for reads


@dataclass
class Client:
    id: int
    home: int
    opcounter: int = 0
    pending: Optional[Pending] = None
    stale_responses: List[OpId] = field(default_factory=list)

    def __post_init__(self):
        if self.id < 1:
            raise ValueError("client ids start at 1; 0 is reserved for internal reads")

    def _new_opid(self) -> OpId:
        self.opcounter += 1
        return (self.id, self.opcounter)

    def invoke_write(self, obj: int, value: Value) -> Tuple[OpId, Send]:
        if self.pending is not None:
            raise WellFormednessError(
                f"client {self.id} invoked a write while {self.pending.opid} is pending")
        opid = self._new_opid()
        self.pending = Pending(opid, "write", obj, value)
        return opid, Send("server", self.home, Write(opid, obj, value))

    def invoke_read(self, obj: int) -> Tuple[OpId, Send]:
        if self.pending is not None:
            raise WellFormednessError(
                f"client {self.id} invoked a read while {self.pending.opid} is pending")
        opid = self._new_opid()
        self.pending = Pending(opid, "read", obj)
        return opid, Send("server", self.home, Read(opid, obj))

    def on_server_message(self, msg: Message) -> Optional[Completion]:
        """Complete the pending operation, or drop a stale response."""
        if isinstance(msg, WriteReturnAck):
            opid, value = msg.opid, None
        elif isinstance(msg, ReadReturn):
            opid, value = msg.opid, msg.value
        else:
            raise TypeError(f"client cannot handle {type(msg).__name__}")
        if self.pending is None or self.pending.opid != opid:
            self.stale_responses.append(opid)
            return None
        done = self.pending
        self.pending = None
        if done.kind == "write":
            return Completion(opid, "write", done.obj, done.value)
        return Completion(opid, "read", done.obj, value)
