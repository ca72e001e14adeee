"""Append-only event log shared by every component of the machine.

Each observable action in a run (privilege crossing, context switch, IPC,
page-table update, fault verdict) is recorded as one event with a strictly
increasing sequence number starting at zero.  The text rendering is stable
and line oriented, ``seq kind args...``, so two runs can be compared
byte-for-byte and traces can be kept as golden files.

Events may carry the index of the fault-handling cycle they belong to.
Per-cycle accounting counts only attributed events; switches produced by
scripted scheduling directives carry no attribution and are invisible to
the per-fault cost figures, mirroring cost models that charge a fault only
for the crossings its own handling protocol mandates.
"""

from dataclasses import dataclass
from enum import Enum


class EventKind(Enum):
    """Trace event kinds; the enum value is the on-wire spelling."""

    MODE_SWITCH_U2K = "MODE_SWITCH_U2K"
    MODE_SWITCH_K2U = "MODE_SWITCH_K2U"
    CONTEXT_SWITCH = "CONTEXT_SWITCH"
    IPC_SEND = "IPC_SEND"
    IPC_RECEIVE = "IPC_RECEIVE"
    SUSPEND = "SUSPEND"
    RESUME = "RESUME"
    MAP_PAGE = "MAP_PAGE"
    UNMAP_PAGE = "UNMAP_PAGE"
    VERDICT = "VERDICT"


MODE_SWITCH_KINDS = frozenset(
    {EventKind.MODE_SWITCH_U2K, EventKind.MODE_SWITCH_K2U}
)


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    kind: EventKind
    args: tuple
    cycle: int | None = None

    def render(self) -> str:
        parts = [str(self.seq), self.kind.value]
        parts.extend(str(a) for a in self.args)
        if self.cycle is not None:
            parts.append(f"cycle={self.cycle}")
        return " ".join(parts)


class Trace:
    """Gap-free, append-only list of :class:`TraceEvent`."""

    def __init__(self) -> None:
        self.events: list[TraceEvent] = []

    def append(self, kind: EventKind, *args, cycle: int | None = None) -> TraceEvent:
        ev = TraceEvent(len(self.events), kind, tuple(args), cycle)
        self.events.append(ev)
        return ev

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, idx):
        return self.events[idx]

    def of_cycle(self, cycle: int) -> list[TraceEvent]:
        """All events attributed to one fault cycle, in trace order."""
        return [ev for ev in self.events if ev.cycle == cycle]

    def count(self, kind: EventKind) -> int:
        return sum(1 for ev in self.events if ev.kind is kind)

    def to_text(self) -> str:
        return "".join(ev.render() + "\n" for ev in self.events)
