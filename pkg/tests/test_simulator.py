import numpy as np
import pytest

from distcolor.errors import DeadlockError
from distcolor.simulator import (
    EMPTY,
    PAIR_BYTES,
    Mailbox,
    Message,
    Poll,
    Recv,
    Send,
    Tick,
    run_deterministic,
    run_spmd,
    run_threaded,
)


def pairs(*vs):
    return np.array([[v, 1] for v in vs], dtype=np.int64).reshape(-1, 2)


def test_fifo_per_channel_and_counters():
    mb = Mailbox(2)
    mb.post(Message(0, 1, pairs(1, 2), tag=0))
    mb.post(Message(0, 1, EMPTY, tag=1))
    mb.post(Message(0, 1, EMPTY, kind="precomm"))
    assert [mb.take(0, 1).tag for _ in range(3)] == [0, 1, 0]
    assert mb.pending() == 0
    t = mb.traffic
    assert (t.messages, t.nonempty, t.empty, t.pairs, t.bytes, t.precomm) == (2, 1, 1, 2, 2 * PAIR_BYTES, 1)


def ping_pong(rank):
    other = 1 - rank
    got = []
    for k in range(3):
        yield Tick()
        yield Send(other, pairs(10 * rank + k), tag=k)
        msg = yield Recv(other)
        got.append(int(msg.payload[0, 0]))
    return got


@pytest.mark.parametrize("backend", ["deterministic", "threaded"])
def test_ping_pong_backends(backend):
    seen = {}

    def prog(r):
        seen[r] = yield from ping_pong(r)

    mb = Mailbox(2)
    ticks = run_spmd([prog(0), prog(1)], mb, backend)
    assert seen == {0: [10, 11, 12], 1: [0, 1, 2]}
    assert ticks == 3
    assert mb.traffic.messages == 6


@pytest.mark.parametrize("lag", [0, 1, 3])
def test_poll_visibility_follows_lag(lag):
    arrivals = []

    def sender():
        yield Send(1, pairs(7))
        for _ in range(6):
            yield Tick()

    def poller():
        for t in range(6):
            msgs = yield Poll()
            if msgs:
                arrivals.append(t)
            yield Tick()

    run_deterministic([sender(), poller()], Mailbox(2), lag)
    assert arrivals == [1 + lag]


def test_deadlock_detected():
    def waiter(r):
        yield Recv(1 - r)

    with pytest.raises(DeadlockError):
        run_deterministic([waiter(0), waiter(1)], Mailbox(2))
    with pytest.raises(DeadlockError):
        run_threaded([waiter(0), waiter(1)], Mailbox(2), timeout=0.5)


def test_undelivered_messages_are_an_error():
    def sender():
        yield Send(1, EMPTY)

    def idle():
        return
        yield

    with pytest.raises(RuntimeError):
        run_spmd([sender(), idle()], Mailbox(2))
    with pytest.raises(ValueError):
        run_spmd([idle()], Mailbox(1), backend="carrier-pigeon")


def test_rank_errors_propagate_from_threads():
    def boom():
        yield Tick()
        raise KeyError("boom")

    with pytest.raises(KeyError):
        run_threaded([boom()], Mailbox(1))
