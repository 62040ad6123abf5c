"""A small message-passing cluster for rank programs written as generators.

A rank program is a generator that yields operations and receives their
results::

    def program(rank):
        yield Send(dst=1, payload=pairs, tag=0)
        msg = yield Recv(src=1)        # blocks until a message from rank 1
        msgs = yield Poll()            # whatever is visible now, never blocks
        yield Tick()                   # superstep boundary

The same programs run on two backends. ``deterministic`` advances all ranks
in lockstep on one thread, releasing ``Tick`` only when no rank can make
other progress; it is reproducible bit for bit. ``threaded`` runs one
thread per rank over the same FIFO channels; ``Poll`` there returns
whatever happens to have arrived.

Under the deterministic backend a message sent during global tick ``t``
becomes visible to ``Poll`` from tick ``t + 1 + lag`` on. ``Recv`` ignores
visibility: it stands for a blocking wait on the channel.
"""
from __future__ import annotations

import threading
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Generator, Iterable

import numpy as np

from .errors import DeadlockError

# a transmitted (vertex, color) pair: two 32-bit ints
PAIR_BYTES = 8

EMPTY = np.zeros((0, 2), dtype=np.int64)


@dataclass
class Message:
    src: int
    dst: int
    payload: np.ndarray
    tag: int = 0
    kind: str = "data"
    last: bool = False
    stamp: int = 0


@dataclass
class Send:
    dst: int
    payload: np.ndarray = field(default_factory=lambda: EMPTY)
    tag: int = 0
    kind: str = "data"
    last: bool = False


@dataclass
class Recv:
    src: int


class Poll:
    pass


class Tick:
    pass


@dataclass
class Traffic:
    """Counters over ``data`` messages; pre-communication is kept apart."""

    messages: int = 0
    nonempty: int = 0
    pairs: int = 0
    bytes: int = 0
    precomm: int = 0

    @property
    def empty(self) -> int:
        return self.messages - self.nonempty


class Mailbox:
    """FIFO queue per ``(src, dst)`` channel plus traffic counters."""

    def __init__(self, nranks: int):
        self.nranks = nranks
        self._chan: dict[tuple[int, int], deque] = defaultdict(deque)
        self._cv = threading.Condition()
        self._aborted = False
        self.traffic = Traffic()
        self.log: list[tuple[int, int, int, int]] | None = None  # (src, dst, tag, pairs)

    def post(self, msg: Message) -> None:
        with self._cv:
            self._chan[msg.src, msg.dst].append(msg)
            t = self.traffic
            if msg.kind == "precomm":
                t.precomm += 1
            else:
                k = len(msg.payload)
                t.messages += 1
                t.nonempty += k > 0
                t.pairs += k
                t.bytes += k * PAIR_BYTES
                if self.log is not None:
                    self.log.append((msg.src, msg.dst, msg.tag, k))
            self._cv.notify_all()

    def has(self, src: int, dst: int) -> bool:
        return bool(self._chan.get((src, dst)))

    def take(self, src: int, dst: int) -> Message:
        return self._chan[src, dst].popleft()

    def wait_take(self, src: int, dst: int, timeout: float) -> Message:
        with self._cv:
            ok = self._cv.wait_for(lambda: self._aborted or self.has(src, dst), timeout)
            if self._aborted:
                raise DeadlockError("cluster aborted")
            if not ok:
                raise DeadlockError(f"rank {dst} timed out waiting on rank {src}")
            return self.take(src, dst)

    def take_visible(self, dst: int, now: int, lag: int) -> list[Message]:
        out = []
        for src in range(self.nranks):
            q = self._chan.get((src, dst))
            while q and q[0].stamp + 1 + lag <= now:
                out.append(q.popleft())
        return out

    def take_any(self, dst: int) -> list[Message]:
        with self._cv:
            out = []
            for src in range(self.nranks):
                q = self._chan.get((src, dst))
                while q:
                    out.append(q.popleft())
            return out

    def pending(self) -> int:
        return sum(len(q) for q in self._chan.values())

    def abort(self) -> None:
        with self._cv:
            self._aborted = True
            self._cv.notify_all()


Program = Generator[object, object, None]

_DONE = object()


def run_deterministic(programs: list[Program], mailbox: Mailbox, lag: int = 1) -> int:
    """Run rank programs to completion in lockstep; returns the global tick count."""
    n = len(programs)
    pending: list[object] = [None] * n
    now = 0

    def resume(r: int, value) -> None:
        try:
            pending[r] = programs[r].send(value)
        except StopIteration:
            pending[r] = _DONE

    for r in range(n):
        resume(r, None)

    while True:
        progress = True
        while progress:
            progress = False
            for r in range(n):
                while True:
                    op = pending[r]
                    if isinstance(op, Send):
                        mailbox.post(Message(r, op.dst, op.payload, op.tag, op.kind, op.last, now))
                        resume(r, None)
                    elif isinstance(op, Poll):
                        resume(r, mailbox.take_visible(r, now, lag))
                    elif isinstance(op, Recv):
                        if not mailbox.has(op.src, r):
                            break
                        resume(r, mailbox.take(op.src, r))
                    else:
                        break
                    progress = True
        waiting = [r for r in range(n) if isinstance(pending[r], Tick)]
        if waiting:
            now += 1
            for r in waiting:
                resume(r, None)
            continue
        if all(op is _DONE for op in pending):
            return now
        stuck = {r: pending[r] for r in range(n) if pending[r] is not _DONE}
        raise DeadlockError(f"no rank can progress: {stuck}")


def run_threaded(programs: list[Program], mailbox: Mailbox, timeout: float = 60.0) -> int:
    """One thread per rank; returns the largest per-rank tick count."""
    ticks = [0] * len(programs)
    errors: list[BaseException] = []

    def worker(r: int) -> None:
        gen, value = programs[r], None
        try:
            while True:
                op = gen.send(value)
                value = None
                if isinstance(op, Send):
                    mailbox.post(Message(r, op.dst, op.payload, op.tag, op.kind, op.last, ticks[r]))
                elif isinstance(op, Recv):
                    value = mailbox.wait_take(op.src, r, timeout)
                elif isinstance(op, Poll):
                    value = mailbox.take_any(r)
                elif isinstance(op, Tick):
                    ticks[r] += 1
                else:
                    raise TypeError(f"unknown operation {op!r}")
        except StopIteration:
            pass
        except BaseException as exc:  # surface in the caller
            errors.append(exc)
            mailbox.abort()

    threads = [threading.Thread(target=worker, args=(r,), daemon=True) for r in range(len(programs))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        first = next((e for e in errors if not isinstance(e, DeadlockError)), errors[0])
        raise first
    return max(ticks, default=0)


def run_spmd(programs: Iterable[Program], mailbox: Mailbox, backend: str = "deterministic",
             lag: int = 1) -> int:
    """Run one communication phase; every message must be consumed by its end."""
    programs = list(programs)
    if backend == "deterministic":
        ticks = run_deterministic(programs, mailbox, lag)
    elif backend == "threaded":
        ticks = run_threaded(programs, mailbox)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if mailbox.pending():
        raise RuntimeError(f"{mailbox.pending()} messages left undelivered")
    return ticks
