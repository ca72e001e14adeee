"""Single-CPU deterministic machine: threads, occupancy, messages.

The machine models exactly one CPU.  At any instant one thread occupies it
(the kernel pseudo-thread, tid 0, never does; kernel work is charged to the
thread it serves).  A ``CONTEXT_SWITCH`` event is emitted if and only if
the occupying thread id changes, so projecting the trace onto context
switches reconstructs the occupancy timeline.

Privilege crossings are accounted where the dispatch protocol mandates
them, not where a real CPU would incidentally cross for scheduling:

* a fault trap emits ``MODE_SWITCH_U2K``;
* a syscall entry (reply or reflection send) emits ``MODE_SWITCH_U2K``;
* delivering control to user code (message delivery, fault return, resume
  after a reply) emits ``MODE_SWITCH_K2U``.

Scripted scheduler switches emit only ``CONTEXT_SWITCH``.  This matches
cost comparisons that count a fault's protocol-mandated crossings and
treat scheduler overhead as out of scope.

Message passing is synchronous rendezvous: pagers sit in a receive loop
(``BLOCKED_ON_RECEIVE``), a send queues at the receiver, and delivery
hands the CPU to the receiver.  The fault-dispatch layer decides when a
queued message is actually delivered.
"""

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    DeadlockError,
    NotSchedulableError,
    UnknownReceiverError,
    UnknownThreadError,
)
from .trace import EventKind, Trace

KERNEL_TID = 0


class ThreadState(Enum):
    RUNNING = "running"
    READY = "ready"
    SUSPENDED = "suspended"
    BLOCKED_ON_RECEIVE = "blocked_on_receive"


class ThreadRole(Enum):
    APPLICANT = "applicant"
    PAGER = "pager"
    REGION_MAPPER = "region_mapper"
    KERNEL_INTERNAL = "kernel_internal"


class AccessType(Enum):
    READ = "R"
    WRITE = "W"


class MessageKind(Enum):
    PAGE_FAULT = "PAGE_FAULT"
    REFLECTION = "REFLECTION"
    REPLY = "REPLY"


@dataclass
class ThreadControlBlock:
    tid: int
    asid: int
    role: ThreadRole
    state: ThreadState
    name: str = ""


@dataclass(frozen=True)
class FaultPayload:
    """What a fault message carries to its handler: enough to resolve the
    fault without asking the kernel anything back."""

    faulter: int
    vaddr: int
    access: AccessType
    marker: int


@dataclass(frozen=True)
class Message:
    sender: int
    receiver: int
    kind: MessageKind
    payload: FaultPayload | None = None


@dataclass(frozen=True)
class DeterministicOrder:
    """Scheduler directive: walk a fixed cyclic preference order."""

    order: tuple[int, ...] = ()


@dataclass(frozen=True)
class SeededRoundRobin:
    """Scheduler directive: round-robin over a seed-shuffled thread order."""

    seed: int = 0


# States from which the scheduler may hand a thread the CPU.
_SCHEDULABLE = (ThreadState.RUNNING, ThreadState.READY)


@dataclass
class Machine:
    directive: DeterministicOrder | SeededRoundRobin = field(
        default_factory=DeterministicOrder
    )

    def __post_init__(self) -> None:
        self.trace = Trace()
        self.threads: dict[int, ThreadControlBlock] = {}
        self.warnings: list[str] = []
        self._occupant: int | None = None
        self._mailboxes: dict[int, deque[Message]] = {}
        self._sched_order: list[int] | None = None
        self._sched_pos = -1
        self.threads[KERNEL_TID] = ThreadControlBlock(
            tid=KERNEL_TID,
            asid=0,
            role=ThreadRole.KERNEL_INTERNAL,
            state=ThreadState.BLOCKED_ON_RECEIVE,
            name="kernel",
        )
        self._mailboxes[KERNEL_TID] = deque()

    # ---- thread registry -------------------------------------------------

    def register_thread(
        self,
        tid: int,
        asid: int,
        role: ThreadRole,
        name: str = "",
        state: ThreadState | None = None,
    ) -> ThreadControlBlock:
        if tid in self.threads:
            raise ValueError(f"thread id {tid} already registered")
        if tid <= 0:
            raise ValueError("thread ids must be positive (0 is the kernel)")
        if state is None:
            # Pagers and region mappers idle in their message loop.
            if role in (ThreadRole.PAGER, ThreadRole.REGION_MAPPER):
                state = ThreadState.BLOCKED_ON_RECEIVE
            else:
                state = ThreadState.READY
        tcb = ThreadControlBlock(tid=tid, asid=asid, role=role, state=state, name=name)
        self.threads[tid] = tcb
        self._mailboxes[tid] = deque()
        self._sched_order = None  # rebuilt lazily after registration changes
        return tcb

    def thread(self, tid: int) -> ThreadControlBlock:
        try:
            return self.threads[tid]
        except KeyError:
            raise UnknownThreadError(f"no thread with id {tid}") from None

    @property
    def occupant(self) -> int | None:
        """Tid currently charged with CPU occupancy (survives suspension
        until someone else is switched in)."""
        return self._occupant

    # ---- occupancy and privilege events ----------------------------------

    def switch_to(self, tid: int, cycle: int | None = None) -> None:
        """Make `tid` the running thread, emitting a context switch iff the
        occupant changes.  The first dispatch of a run emits none."""
        tcb = self.thread(tid)
        if tcb.state not in _SCHEDULABLE:
            raise NotSchedulableError(
                f"thread {tid} is {tcb.state.value}, cannot run"
            )
        prev = self._occupant
        if prev == tid:
            tcb.state = ThreadState.RUNNING
            return
        if prev is not None:
            prev_tcb = self.threads[prev]
            if prev_tcb.state is ThreadState.RUNNING:
                prev_tcb.state = ThreadState.READY
            self.trace.append(EventKind.CONTEXT_SWITCH, prev, tid, cycle=cycle)
        self._occupant = tid
        tcb.state = ThreadState.RUNNING
        # The scheduler's cyclic walk resumes after whoever held the CPU
        # last, so a yield never re-picks the thread that just yielded.
        if self._sched_order is not None and tid in self._sched_order:
            self._sched_pos = self._sched_order.index(tid)

    def enter_kernel(self, cycle: int | None = None) -> None:
        self.trace.append(EventKind.MODE_SWITCH_U2K, cycle=cycle)

    def leave_kernel(self, cycle: int | None = None) -> None:
        self.trace.append(EventKind.MODE_SWITCH_K2U, cycle=cycle)

    def suspend(self, tid: int, cycle: int | None = None) -> None:
        tcb = self.thread(tid)
        tcb.state = ThreadState.SUSPENDED
        self.trace.append(EventKind.SUSPEND, tid, cycle=cycle)

    def resume(self, tid: int, cycle: int | None = None) -> None:
        tcb = self.thread(tid)
        tcb.state = ThreadState.READY
        self.trace.append(EventKind.RESUME, tid, cycle=cycle)

    def block_on_receive(self, tid: int) -> None:
        # Occupancy is only reassigned by the next switch_to.
        self.thread(tid).state = ThreadState.BLOCKED_ON_RECEIVE

    # ---- messaging -------------------------------------------------------

    def send(self, msg: Message, cycle: int | None = None) -> None:
        """Queue a message at the receiver and record the send."""
        if msg.receiver not in self.threads:
            raise UnknownReceiverError(f"no receiver with id {msg.receiver}")
        args: list = [msg.sender, msg.receiver, msg.kind.value]
        if msg.payload is not None:
            p = msg.payload
            if msg.kind is MessageKind.REPLY:
                args.append(f"faulter={p.faulter}")
            else:
                args.extend(
                    (
                        f"faulter={p.faulter}",
                        f"vaddr={p.vaddr:#x}",
                        f"access={p.access.value}",
                        f"marker={p.marker}",
                    )
                )
        self.trace.append(EventKind.IPC_SEND, *args, cycle=cycle)
        if msg.receiver != KERNEL_TID:
            # The kernel consumes its messages synchronously; only real
            # threads have a mailbox worth filling.
            self._mailboxes[msg.receiver].append(msg)

    def receive(self, tid: int, cycle: int | None = None) -> Message:
        box = self._mailboxes[self.thread(tid).tid]
        if not box:
            raise SimulationHasNoMessage(tid)
        msg = box.popleft()
        self.trace.append(EventKind.IPC_RECEIVE, tid, msg.kind.value, cycle=cycle)
        return msg

    def pending_messages(self, tid: int) -> int:
        return len(self._mailboxes[self.thread(tid).tid])

    def peek_message(self, tid: int) -> Message | None:
        """Next queued message without consuming it, if any."""
        box = self._mailboxes[self.thread(tid).tid]
        return box[0] if box else None

    # ---- scheduling ------------------------------------------------------

    def _build_order(self) -> list[int]:
        tids = [t for t in self.threads if t != KERNEL_TID]
        if isinstance(self.directive, SeededRoundRobin):
            rng = random.Random(self.directive.seed)
            rng.shuffle(tids)
        elif self.directive.order:
            declared = [t for t in self.directive.order if t in self.threads]
            declared.extend(t for t in tids if t not in declared)
            tids = declared
        return tids

    def schedule_next(self) -> int:
        """Pick the next thread per the directive.  Walks the cyclic order
        starting after the last pick and returns the first schedulable
        thread; raises ``DeadlockError`` when nothing can run."""
        if self._sched_order is None:
            self._sched_order = self._build_order()
            self._sched_pos = -1
            if self._occupant is not None and self._occupant in self._sched_order:
                self._sched_pos = self._sched_order.index(self._occupant)
        order = self._sched_order
        n = len(order)
        for step in range(1, n + 1):
            idx = (self._sched_pos + step) % n if n else 0
            if not n:
                break
            tid = order[idx]
            if self.threads[tid].state in _SCHEDULABLE:
                self._sched_pos = idx
                return tid
        raise DeadlockError("no runnable thread")

    def yield_current(self, cycle: int | None = None) -> int:
        """Voluntary yield: demote the running thread to ready and dispatch
        the scheduler's next pick (which may be the same thread)."""
        if self._occupant is not None:
            occ = self.threads[self._occupant]
            if occ.state is ThreadState.RUNNING:
                occ.state = ThreadState.READY
        tid = self.schedule_next()
        self.switch_to(tid, cycle=cycle)
        return tid


class SimulationHasNoMessage(LookupError):
    """Internal: receive() called on an empty mailbox (a sequencing bug)."""

    def __init__(self, tid: int) -> None:
        super().__init__(f"thread {tid} has no pending message")
