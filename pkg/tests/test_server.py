"""Single-server transition semantics, hand-executed.

Each test drives one handler on a directly constructed server and compares
the state delta and emitted batch against the expected step-by-step result.
"""

import pytest

from causalec.builtin import FIG1_COEFFS
from causalec.coding import LinearCode
from causalec.field import PrimeField
from causalec.messages import (
    App,
    Del,
    ReadReturn,
    ValInq,
    ValResp,
    ValRespEncoded,
    WriteReturnAck,
)
from causalec.server import CAUSAL, ReadLEntry, Server
from causalec.tags import LOCALHOST, Tag, zero_tag


def replicated(n=3, p=7):
    """n servers all storing the single object plainly."""
    return LinearCode(PrimeField(p), [[1]] * n)


def fig1():
    return LinearCode(PrimeField(7), FIG1_COEFFS)


def tag(ts, cid):
    return Tag(tuple(ts), cid)


def sends_of(kind, sends):
    return [s for s in sends if isinstance(s.msg, kind)]


class TestWrite:
    def test_fresh_write_acks_and_fans_out(self):
        srv = Server(1, replicated())
        sends = srv.on_write(7, (7, 1), 1, (5,))
        assert srv.vc == [1, 0, 0]
        assert srv.L[0][tag([1, 0, 0], 7)] == (5,)
        ack = sends[0]
        assert ack.kind == "client" and ack.dst == 7
        assert ack.msg == WriteReturnAck((7, 1))
        apps = sends_of(App, sends)
        assert [(s.dst, s.msg) for s in apps] == [
            (2, App(1, (5,), tag([1, 0, 0], 7))),
            (3, App(1, (5,), tag([1, 0, 0], 7))),
        ]

    def test_second_write_advances_own_slot(self):
        srv = Server(1, replicated())
        srv.on_write(7, (7, 1), 1, (5,))
        srv.on_write(7, (7, 2), 1, (6,))
        assert srv.vc == [2, 0, 0]
        assert tag([2, 0, 0], 7) in srv.L[0]

    def test_write_answers_pending_external_reads(self):
        srv = Server(1, replicated())
        entry = ReadLEntry(9, (9, 1), 1, (zero_tag(3),), [None, None, None])
        srv._readl_add(entry)
        sends = srv.on_write(7, (7, 1), 1, (5,))
        returns = sends_of(ReadReturn, sends)
        assert [(s.dst, s.msg) for s in returns] == [(9, ReadReturn((9, 1), (5,)))]
        assert not srv.readl

    def test_write_leaves_internal_reads_pending(self):
        srv = Server(1, replicated())
        entry = ReadLEntry(LOCALHOST, (-1, 1), 1, (zero_tag(3),), [None] * 3)
        srv._readl_add(entry)
        sends = srv.on_write(7, (7, 1), 1, (5,))
        assert not sends_of(ReadReturn, sends)
        assert (-1, 1) in srv.readl


class TestRead:
    def test_initial_read_returns_zero_from_the_sentinel(self):
        srv = Server(1, replicated())
        sends = srv.on_read(7, (7, 1), 1)
        assert sends == [type(sends[0])("client", 7, ReadReturn((7, 1), (0,)))]

    def test_list_hit_returns_highest_tagged(self):
        srv = Server(1, replicated())
        srv.on_write(7, (7, 1), 1, (5,))
        srv.on_write(7, (7, 2), 1, (6,))
        sends = srv.on_read(8, (8, 1), 1)
        assert sends[0].msg == ReadReturn((8, 1), (6,))

    def test_local_decode_when_list_is_empty(self):
        srv = Server(1, fig1())
        srv.L[0].clear()  # locally stored object, history already collected
        srv.m_val = (4,)
        sends = srv.on_read(7, (7, 1), 1)
        assert sends[0].msg == ReadReturn((7, 1), (4,))
        assert ("decoded", 1, (1,), (7, 1)) in srv.notes

    def test_remote_fanout_when_not_locally_decodable(self):
        srv = Server(1, fig1())
        srv.L[2].clear()  # X3 is not stored at server 1
        sends = srv.on_read(7, (7, 1), 3)
        inqs = sends_of(ValInq, sends)
        assert [s.dst for s in inqs] == [2, 3, 4, 5]
        assert inqs[0].msg == ValInq(7, (7, 1), 3, tuple(srv.m_tagvec))
        entry = srv.readl[(7, 1)]
        assert entry.symbols[0] == srv.m_val
        assert entry.symbols[1:] == [None] * 4

    def test_stale_list_goes_remote_under_causal_guard(self):
        srv = Server(3, fig1())
        t_old = tag([1, 0, 0, 0, 0], 1)
        t_new = tag([2, 0, 0, 0, 0], 1)
        srv.L[0] = {t_old: (5,)}
        srv.m_tagvec[0] = t_new
        sends = srv.on_read(7, (7, 1), 1)
        assert sends_of(ValInq, sends), "older history than the symbol must not serve the read"


class TestDeleteNotices:
    def test_set_semantics(self):
        srv = Server(1, replicated())
        t = tag([0, 1, 0], 2)
        srv.on_del(2, 1, t)
        srv.on_del(2, 1, t)
        assert list(srv.dell[0]) == [(t, 2)]

    def test_distinct_tags_retained(self):
        srv = Server(1, replicated())
        srv.on_del(2, 1, tag([0, 1, 0], 2))
        srv.on_del(2, 1, tag([0, 2, 0], 2))
        assert len(srv.dell[0]) == 2


class TestApplyQueue:
    def test_insert_orders_by_timestamp(self):
        srv = Server(1, replicated())
        srv.on_app(2, 1, (1,), tag([0, 2, 0], 2))
        srv.on_app(2, 1, (2,), tag([0, 1, 0], 2))
        assert [i.tag.ts for i in srv.inqueue] == [(0, 1, 0), (0, 2, 0)]

    def test_incomparable_goes_after(self):
        srv = Server(1, replicated())
        srv.on_app(2, 1, (1,), tag([0, 1, 0], 2))
        srv.on_app(3, 1, (2,), tag([0, 0, 1], 3))
        assert [i.origin for i in srv.inqueue] == [2, 3]

    def test_ready_head_applies(self):
        srv = Server(1, replicated())
        t = tag([0, 1, 0], 2)
        srv.on_app(2, 1, (4,), t)
        changed, sends = srv.apply_inqueue()
        assert changed and not sends
        assert srv.vc == [0, 1, 0]
        assert srv.L[0][t] == (4,)
        assert not srv.inqueue

    def test_gap_blocks(self):
        srv = Server(1, replicated())
        srv.on_app(2, 1, (4,), tag([0, 2, 0], 2))  # needs vc[2] == 1 first
        changed, sends = srv.apply_inqueue()
        assert not changed and not sends
        assert srv.vc == [0, 0, 0] and srv.inqueue

    def test_unseen_dependency_blocks(self):
        srv = Server(1, replicated())
        srv.on_app(2, 1, (4,), tag([0, 1, 1], 2))  # depends on a server-3 write
        changed, _ = srv.apply_inqueue()
        assert not changed

    def test_apply_answers_covered_reads(self):
        srv = Server(1, replicated())
        entry = ReadLEntry(9, (9, 1), 1, (zero_tag(3),), [None] * 3)
        srv._readl_add(entry)
        t = tag([0, 1, 0], 2)
        srv.on_app(2, 1, (4,), t)
        _, sends = srv.apply_inqueue()
        assert sends[0].msg == ReadReturn((9, 1), (4,))
        assert not srv.readl

    def test_apply_skips_reads_wanting_newer(self):
        srv = Server(1, replicated())
        wanted = tag([0, 5, 0], 2)
        entry = ReadLEntry(9, (9, 1), 1, (wanted,), [None] * 3)
        srv._readl_add(entry)
        srv.on_app(2, 1, (4,), tag([0, 1, 0], 2))
        _, sends = srv.apply_inqueue()
        assert not sends and (9, 1) in srv.readl


class TestValInq:
    def test_exact_version_answered_plainly(self):
        srv = Server(2, fig1())
        t = tag([1, 0, 0, 0, 0], 1)
        srv.L[1][t] = (6,)
        wanted = (zero_tag(5), t, zero_tag(5))
        sends = srv.on_val_inq(4, 9, (9, 1), 2, wanted)
        assert sends == [type(sends[0])(
            "server", 4, ValResp(2, (6,), 9, (9, 1), wanted))]

    def test_matching_tags_echo_symbol_verbatim(self):
        srv = Server(4, fig1())
        srv.m_val = (3,)
        srv.L[2].clear()  # otherwise the sentinel serves the zero-tag request
        sends = srv.on_val_inq(1, 9, (9, 1), 3, tuple(srv.m_tagvec))
        msg = sends[0].msg
        assert isinstance(msg, ValRespEncoded)
        assert msg.symbol == (3,) and msg.tagvec == tuple(srv.m_tagvec)

    def test_reencodes_out_version_the_requester_does_not_want(self):
        # server 4 mixes X1+X2 and has encoded an X2 version the requester
        # does not know; it removes that contribution before answering
        code = fig1()
        srv = Server(4, code)
        t2 = tag([0, 1, 0, 0, 0], 2)
        srv.L[1][t2] = (2,)
        srv.m_val = (2,)  # x1 = 0, x2 = 2 encoded
        srv.m_tagvec[1] = t2
        srv.L[2].clear()
        wanted = (zero_tag(5),) * 3  # requester knows no versions at all
        msg = srv.on_val_inq(5, 9, (9, 1), 3, wanted)[0].msg
        assert msg.symbol == (0,)
        assert msg.tagvec[1] == zero_tag(5)

    def test_reencodes_in_the_wanted_version_when_available(self):
        code = fig1()
        srv = Server(4, code)
        t_old = tag([0, 1, 0, 0, 0], 2)
        t_new = tag([0, 2, 0, 0, 0], 2)
        srv.L[1] = {t_old: (2,), t_new: (5,)}
        srv.m_val = (2,)
        srv.m_tagvec[1] = t_old
        srv.L[2].clear()
        wanted = (zero_tag(5), t_new, zero_tag(5))
        msg = srv.on_val_inq(5, 9, (9, 1), 3, wanted)[0].msg
        assert msg.symbol == (5,)
        assert msg.tagvec[1] == t_new


class TestValRespEncoded:
    def make_reader(self):
        # server 3 reading X3 remotely; its own symbol is already in slot 3
        code = fig1()
        srv = Server(3, code)
        srv.m_val = (6,)  # x1=1, x2=2, x3=3 encoded
        symbols = [None] * 5
        symbols[2] = (6,)
        entry = ReadLEntry(9, (9, 1), 3, tuple(srv.m_tagvec), symbols)
        srv._readl_add(entry)
        return srv, entry

    def test_absent_tuple_is_a_noop(self):
        srv, _ = self.make_reader()
        msg = ValRespEncoded((0,), (zero_tag(5),) * 3, 9, (9, 99), 3, (zero_tag(5),) * 3)
        assert srv.on_val_resp_encoded(4, msg) == []

    def test_pair_completion_decodes_and_answers(self):
        srv, entry = self.make_reader()
        msg = ValRespEncoded((3,), entry.tagvec, 9, (9, 1), 3, entry.tagvec)
        sends = srv.on_val_resp_encoded(4, msg)  # y3 - y4 = 6 - 3 = 3
        assert sends[0].msg == ReadReturn((9, 1), (3,))
        assert ("decoded", 3, (3, 4), (9, 1)) in srv.notes
        assert not srv.readl

    def test_localhost_completion_feeds_the_list(self):
        code = fig1()
        srv = Server(3, code)
        srv.m_val = (6,)
        t2 = tag([0, 1, 0, 0, 0], 2)
        srv.m_tagvec[1] = t2
        symbols = [None] * 5
        symbols[2] = (6,)
        entry = ReadLEntry(LOCALHOST, (-3, 1), 2, tuple(srv.m_tagvec), symbols)
        srv._readl_add(entry)
        # responses from servers 1 and 5 cover {1,3,5}, a recovery set for X2
        m1 = ValRespEncoded((1,), entry.tagvec, LOCALHOST, (-3, 1), 2, entry.tagvec)
        assert srv.on_val_resp_encoded(1, m1) == []
        m5 = ValRespEncoded((3,), entry.tagvec, LOCALHOST, (-3, 1), 2, entry.tagvec)
        sends = srv.on_val_resp_encoded(5, m5)
        assert sends == []  # internal reads answer no client
        assert srv.L[1][t2] == (2,)  # y3 - y1 - y5 = 6-1-3
        assert not srv.readl

    def test_receiver_side_correction_uses_local_history(self):
        # response still encodes an old X2; the receiver swaps it out using
        # its own copies of both versions
        srv, entry = self.make_reader()
        t_old = tag([0, 1, 0, 0, 0], 2)
        # the entry wants the zero tag for X2, so the receiver needs both the
        # response's version and the zero-tag sentinel in its own history
        srv.L[1] = {t_old: (2,), zero_tag(5): (0,)}
        resp_tagvec = (entry.tagvec[0], t_old, entry.tagvec[2])
        msg = ValRespEncoded((5,), resp_tagvec, 9, (9, 1), 3, entry.tagvec)
        sends = srv.on_val_resp_encoded(4, msg)
        # y4' = 5 - 2 (remove x2_old) + 0 (wanted zero tag -> sentinel zero)
        assert srv.error1 == [0, 0, 0] and srv.error2 == [0, 0, 0]
        assert sends and sends[0].msg == ReadReturn((9, 1), (3,))


class TestValResp:
    def test_external_completion(self):
        srv = Server(1, replicated())
        entry = ReadLEntry(9, (9, 1), 1, (zero_tag(3),), [None] * 3)
        srv._readl_add(entry)
        msg = ValResp(1, (4,), 9, (9, 1), (zero_tag(3),))
        sends = srv.on_val_resp(2, msg)
        assert sends[0].msg == ReadReturn((9, 1), (4,))
        assert not srv.readl

    def test_localhost_inserts_at_requested_tag(self):
        srv = Server(1, replicated())
        wanted = tag([0, 1, 0], 2)
        entry = ReadLEntry(LOCALHOST, (-1, 1), 1, (wanted,), [None] * 3)
        srv._readl_add(entry)
        msg = ValResp(1, (4,), LOCALHOST, (-1, 1), (wanted,))
        assert srv.on_val_resp(2, msg) == []
        assert srv.L[0][wanted] == (4,)

    def test_no_tuple_is_a_noop(self):
        srv = Server(1, replicated())
        msg = ValResp(1, (4,), 9, (9, 1), (zero_tag(3),))
        assert srv.on_val_resp(2, msg) == []


class TestEncoding:
    def test_reencode_in_place_when_old_version_present(self):
        srv = Server(2, fig1())  # stores X2 plainly
        t1 = tag([0, 1, 0, 0, 0], 2)
        t2 = tag([0, 2, 0, 0, 0], 2)
        srv.L[1] = {zero_tag(5): (0,), t1: (3,)}
        changed, sends = srv.encoding()
        assert changed
        assert srv.m_val == (3,) and srv.m_tagvec[1] == t1
        dels = sends_of(Del, sends)
        # X2 lives at servers 2, 3 and 4; notices go to the other holders
        assert [(s.dst, s.msg.tag) for s in dels] == [(3, t1), (4, t1)]
        assert (t1, 2) in srv.dell[1]
        # a yet newer version advances the symbol again
        srv.L[1][t2] = (5,)
        changed, _ = srv.encoding()
        assert changed and srv.m_val == (5,) and srv.m_tagvec[1] == t2

    def test_missing_old_version_triggers_internal_read(self):
        srv = Server(2, fig1())
        t1 = tag([0, 1, 0, 0, 0], 2)
        t2 = tag([0, 2, 0, 0, 0], 2)
        srv.m_tagvec[1] = t1  # encoded version no longer in the list
        srv.L[1] = {t2: (5,)}
        changed, sends = srv.encoding()
        assert changed
        inqs = sends_of(ValInq, sends)
        assert [s.dst for s in inqs] == [1, 3, 4, 5]
        assert inqs[0].msg.clientid == LOCALHOST
        (entry,) = srv.readl.values()
        assert entry.clientid == LOCALHOST and entry.tagvec[1] == t1
        # a second pass must not spawn a duplicate inquiry
        changed, sends = srv.encoding()
        assert not changed and not sends

    def test_bookkeeping_for_remote_objects(self):
        srv = Server(5, fig1())  # X2 not stored at server 5
        t1 = tag([0, 1, 0, 0, 0], 2)
        srv.L[1] = {t1: (3,)}
        changed, sends = srv.encoding()
        assert not changed, "no notices from the holders yet"
        for holder in (2, 3, 4):
            srv.on_del(holder, 2, t1)
        changed, sends = srv.encoding()
        assert changed
        assert srv.m_tagvec[1] == t1
        dels = sends_of(Del, sends)
        assert [s.dst for s in dels] == [1, 2, 3, 4]
        assert srv.m_val == (0,), "bookkeeping never touches the symbol"


class TestGarbageCollection:
    def test_full_acknowledgement_drains_history(self):
        srv = Server(2, fig1())
        t1 = tag([0, 1, 0, 0, 0], 2)
        srv.L[1] = {zero_tag(5): (0,), t1: (3,)}
        srv.encoding()
        for other in (1, 3, 4, 5):
            srv.on_del(other, 2, t1)
        changed, _ = srv.garbage_collection()
        assert changed
        assert srv.tmax[1] == t1
        assert srv.L[1] == {}

    def test_pending_read_protects_its_version(self):
        srv = Server(2, fig1())
        t1 = tag([0, 1, 0, 0, 0], 2)
        t2 = tag([0, 2, 0, 0, 0], 2)
        srv.L[1] = {t1: (3,), t2: (5,)}
        srv.m_tagvec[1] = t2
        entry = ReadLEntry(LOCALHOST, (-2, 1), 2,
                           (zero_tag(5), t1, zero_tag(5)), [None] * 5)
        srv._readl_add(entry)
        for other in (1, 3, 4, 5):
            srv.on_del(other, 2, t2)
        srv._add_del(2, t2, 2)
        srv.garbage_collection()
        assert t1 in srv.L[1], "a pending read still wants this version"

    def test_empty_notices_delete_nothing(self):
        srv = Server(2, fig1())
        t1 = tag([0, 1, 0, 0, 0], 2)
        srv.L[1][t1] = (3,)
        changed, sends = srv.garbage_collection()
        assert srv.tmax[1] == zero_tag(5)
        assert t1 in srv.L[1] and zero_tag(5) in srv.L[1]

    def test_fanout_once_per_threshold(self):
        srv = Server(2, fig1())
        t1 = tag([0, 1, 0, 0, 0], 2)
        for holder in (3, 4):
            srv.on_del(holder, 2, t1)
        srv._add_del(2, t1, 2)
        _, sends = srv.garbage_collection()
        assert [s.dst for s in sends_of(Del, sends)] == [1, 3, 4, 5]
        _, sends = srv.garbage_collection()
        assert not sends, "identical notice must not be re-broadcast"
