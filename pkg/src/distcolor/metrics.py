from __future__ import annotations

from dataclasses import dataclass, field

from .simulator import Traffic

CSV_FIELDS = ("graph", "config", "seed", "num_colors", "rounds", "conflicts", "msgs",
              "nonempty_msgs", "pairs", "bytes", "precomm_msgs", "ticks")
TRAJECTORY_FIELDS = ("graph", "config", "seed", "iteration", "num_colors")


@dataclass
class RunMetrics:
    """Machine-independent cost of a run.

    Message counters cover superstep/recoloring data messages. ``ticks`` is
    the simulated step count of the scheduler; ``wall_time`` is recorded
    for information only.
    """

    num_colors: int = 0
    rounds: int = 0
    conflicts: int = 0
    conflicts_per_round: list[int] = field(default_factory=list)
    supersteps: int = 0
    msgs: int = 0
    nonempty_msgs: int = 0
    pairs: int = 0
    bytes: int = 0
    precomm_msgs: int = 0
    reduction_msgs: int = 0
    ticks: int = 0
    trajectory: list[int] = field(default_factory=list)
    conflict_log: list[tuple[int, int, int, int, int]] = field(default_factory=list, repr=False)
    wall_time: float = 0.0

    @property
    def empty_msgs(self) -> int:
        return self.msgs - self.nonempty_msgs

    def add_traffic(self, t: Traffic) -> None:
        self.msgs += t.messages
        self.nonempty_msgs += t.nonempty
        self.pairs += t.pairs
        self.bytes += t.bytes
        self.precomm_msgs += t.precomm

    def merge(self, other: "RunMetrics") -> None:
        """Accumulate the counters of a later phase (num_colors is taken from it)."""
        self.num_colors = other.num_colors
        self.rounds += other.rounds
        self.conflicts += other.conflicts
        self.conflicts_per_round += other.conflicts_per_round
        self.supersteps += other.supersteps
        for name in ("msgs", "nonempty_msgs", "pairs", "bytes", "precomm_msgs",
                     "reduction_msgs", "ticks"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.wall_time += other.wall_time

    def row(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in CSV_FIELDS[3:]}
