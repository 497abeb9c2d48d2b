"""Client automaton: one outstanding operation, opid bookkeeping."""

import pytest

from causalec.client import Client, WellFormednessError
from causalec.messages import ReadReturn, Write, WriteReturnAck


def test_write_invocation_targets_home():
    c = Client(7, home=1)
    opid, send = c.invoke_write(1, (5,))
    assert opid == (7, 1)
    assert send.kind == "server" and send.dst == 1
    assert send.msg == Write((7, 1), 1, (5,))


def test_double_invocation_rejected():
    c = Client(7, home=1)
    c.invoke_write(1, (5,))
    with pytest.raises(WellFormednessError):
        c.invoke_read(1)
    with pytest.raises(WellFormednessError):
        c.invoke_write(1, (6,))


def test_opid_counter_advances_after_completion():
    c = Client(7, home=1)
    opid, _ = c.invoke_write(1, (5,))
    done = c.on_server_message(WriteReturnAck(opid))
    assert done.kind == "write" and done.value == (5,)
    opid2, _ = c.invoke_write(1, (6,))
    assert opid2 == (7, 2)


def test_read_completion_carries_value():
    c = Client(7, home=2)
    opid, _ = c.invoke_read(3)
    done = c.on_server_message(ReadReturn(opid, (4,)))
    assert done.kind == "read" and done.obj == 3 and done.value == (4,)
    assert c.pending is None


def test_stale_response_dropped():
    c = Client(7, home=1)
    opid, _ = c.invoke_read(1)
    assert c.on_server_message(ReadReturn((7, 99), (1,))) is None
    assert c.pending is not None and c.stale_responses == [(7, 99)]
    assert c.on_server_message(ReadReturn(opid, (1,))) is not None


def test_client_id_zero_reserved():
    with pytest.raises(ValueError):
        Client(0, home=1)
