"""Zero-level fault handling: classification, contracts, dispatch plumbing.

Every fault is classified by a pure decision procedure over the region
table, the management contracts, and the page table:

1. addresses outside the user part are a protection fault (KERNEL_RANGE);
2. a fault in an unassigned region is a protection fault (NO_PAGER);
3. a fault in a revoked region, or one whose manager refuses service, is
   a protection fault (NOT_ACCEPTED);
4. if the page turned present between the trap and this check the thread
   is sent straight back to user mode (RESUMED_PRESENT) with no pager
   message - the kernel re-reads the present flag precisely to absorb
   concurrent faults on the same page;
5. otherwise the fault is forwarded to the region's manager (DISPATCHED)
   together with the 31-bit marker stored in the entry.

Protection verdicts terminate the faulting thread; the simulator parks it
suspended for good since nothing ever resumes it.

The management contract is stored in the region table but its transitions
live here: consumer assignment makes a region ASSIGNED, the manager's
first map into it implies acceptance (ACCEPTED), and an unmap of the
region's last present page with the revoke flag set makes it REVOKED.
Revocation exists so a pager can walk away from a consumer it no longer
trusts; afterwards every fault in the region is a protection fault until
someone assigns the region again.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Collection

from .address_space import (
    AddressSpace,
    ContractState,
    KERNEL_RANGE,
    region_id_of,
)
from .engine import (
    AccessType,
    FaultPayload,
    KERNEL_TID,
    Machine,
    Message,
    MessageKind,
)
from .errors import (
    BadRegionError,
    NoOutstandingFaultError,
    NotRegionManagerError,
    RevokedRegionError,
    WrongPagerError,
)
from .mmu import FaultEvent
from .trace import EventKind


class VerdictCode(Enum):
    """Stable verdict spellings used in trace lines and expectations."""

    KERNEL_RANGE = "KERNEL_RANGE"
    NO_PAGER = "NO_PAGER"
    NOT_ACCEPTED = "NOT_ACCEPTED"
    RESUMED_PRESENT = "RESUMED_PRESENT"
    DISPATCHED = "DISPATCHED"


GP_CODES = frozenset(
    {VerdictCode.KERNEL_RANGE, VerdictCode.NO_PAGER, VerdictCode.NOT_ACCEPTED}
)


@dataclass(frozen=True)
class Classification:
    code: VerdictCode
    rid: int | None = None
    manager: int | None = None
    marker: int = 0


def classify(
    space: AddressSpace,
    vaddr: int,
    non_accepting: Collection[int] = (),
) -> Classification:
    """Pure fault classification; see the module docstring for the order.

    ``non_accepting`` lists manager tids that refuse service.  A manager
    that already accepted a region (it mapped into it) stays bound to it
    regardless of the flag.
    """
    rid = region_id_of(space.layout, vaddr)
    if rid is KERNEL_RANGE:
        return Classification(VerdictCode.KERNEL_RANGE)
    slot = space.regions.lookup(rid)
    if slot.manager is None or slot.contract is ContractState.UNASSIGNED:
        return Classification(VerdictCode.NO_PAGER, rid=rid)
    if slot.contract is ContractState.REVOKED:
        return Classification(VerdictCode.NOT_ACCEPTED, rid=rid, manager=slot.manager)
    if slot.contract is ContractState.ASSIGNED and slot.manager in non_accepting:
        return Classification(VerdictCode.NOT_ACCEPTED, rid=rid, manager=slot.manager)
    ent = space.pages.entry(vaddr // space.layout.page_size)
    if ent.present:
        return Classification(
            VerdictCode.RESUMED_PRESENT, rid=rid, manager=slot.manager, marker=ent.marker
        )
    return Classification(
        VerdictCode.DISPATCHED, rid=rid, manager=slot.manager, marker=ent.marker
    )


class KernelMemory:
    """Kernel-side map/unmap service.

    All page-table mutation funnels through here so that manager checks,
    contract transitions, and trace events are identical no matter which
    scheme (or which privilege level) asked for the change.  The cost of a
    map rides on the reply that carries it, so no mode switches are
    emitted here.
    """

    def __init__(self, machine: Machine, spaces: dict[int, AddressSpace]) -> None:
        self.machine = machine
        self.spaces = spaces

    def _region_slot(self, space: AddressSpace, vaddr: int, caller: int):
        rid = region_id_of(space.layout, vaddr)
        if rid is KERNEL_RANGE:
            raise BadRegionError(f"address {vaddr:#x} is in the kernel range")
        slot = space.regions.lookup(rid)
        if slot.manager != caller:
            raise NotRegionManagerError(
                f"thread {caller} does not manage region {rid} of space {space.asid}"
            )
        return rid, slot

    def map_page(
        self,
        caller: int,
        asid: int,
        vaddr: int,
        frame: int,
        marker: int,
        cycle: int | None = None,
    ) -> None:
        space = self.spaces[asid]
        rid, slot = self._region_slot(space, vaddr, caller)
        if slot.contract is ContractState.REVOKED:
            raise RevokedRegionError(
                f"region {rid} of space {asid} was revoked; reassign before mapping"
            )
        page = vaddr // space.layout.page_size
        space.pages.set_mapping(page, frame, marker)
        if slot.contract is ContractState.ASSIGNED:
            # First map into the region doubles as acceptance.
            space.regions.set_contract(rid, ContractState.ACCEPTED)
        self.machine.trace.append(
            EventKind.MAP_PAGE,
            f"asid={asid}",
            f"vaddr={page * space.layout.page_size:#x}",
            f"frame={frame}",
            f"marker={marker}",
            cycle=cycle,
        )

    def unmap_page(
        self,
        caller: int,
        asid: int,
        vaddr: int,
        revoke: bool = False,
        cycle: int | None = None,
    ) -> None:
        space = self.spaces[asid]
        rid, slot = self._region_slot(space, vaddr, caller)
        page = vaddr // space.layout.page_size
        space.pages.clear_mapping(page)
        self.machine.trace.append(
            EventKind.UNMAP_PAGE,
            f"asid={asid}",
            f"vaddr={page * space.layout.page_size:#x}",
            f"revoke={int(revoke)}",
            cycle=cycle,
        )
        if not revoke:
            return
        remaining = space.present_pages_in_region(rid)
        if remaining:
            # The flag only means something on the region's last page.
            self.machine.warnings.append(
                f"revoke ineffective: region {rid} of space {asid} still has "
                f"{len(remaining)} present page(s)"
            )
        elif slot.contract is ContractState.ACCEPTED:
            space.regions.set_contract(rid, ContractState.REVOKED)
        else:
            self.machine.warnings.append(
                f"revoke on region {rid} of space {asid} ignored: contract is "
                f"{slot.contract.value}"
            )


@dataclass
class FaultCycle:
    """Bookkeeping for one fault from trap to settlement."""

    index: int
    faulter: int
    asid: int
    vaddr: int
    access: AccessType
    verdict: VerdictCode | None = None
    rid: int | None = None
    manager: int | None = None
    trap_seq: int = -1
    closed: bool = False
    dispatched_to: int | None = None


@dataclass
class _Outstanding:
    handler: int
    cycle: FaultCycle


class FaultDispatcher:
    """Sequencing of trap, verdict, dispatch, and reply events.

    One instance per simulation run.  The scheme layer decides where a
    DISPATCHED fault is routed; everything else (event order, suspension,
    reply validation, cycle accounting) is identical across schemes and
    lives here.
    """

    def __init__(self, machine: Machine, spaces: dict[int, AddressSpace]) -> None:
        self.machine = machine
        self.spaces = spaces
        self.memory = KernelMemory(machine, spaces)
        self.cycles: list[FaultCycle] = []
        self._outstanding: dict[int, _Outstanding] = {}

    # ---- trap and verdicts ----------------------------------------------

    def begin_fault(self, fault: FaultEvent) -> FaultCycle:
        """Phase one of fault handling: the trap into the kernel."""
        asid = self.machine.thread(fault.tid).asid
        cycle = FaultCycle(
            index=len(self.cycles),
            faulter=fault.tid,
            asid=asid,
            vaddr=fault.vaddr,
            access=fault.access,
        )
        self.cycles.append(cycle)
        ev = self.machine.trace.append(
            EventKind.MODE_SWITCH_U2K, cycle=cycle.index
        )
        cycle.trap_seq = ev.seq
        return cycle

    def record_verdict(self, cycle: FaultCycle, cls: Classification) -> None:
        cycle.verdict = cls.code
        cycle.rid = cls.rid
        cycle.manager = cls.manager
        args = [cls.code.value, f"tid={cycle.faulter}", f"vaddr={cycle.vaddr:#x}"]
        if cls.manager is not None:
            args.append(f"manager={cls.manager}")
        self.machine.trace.append(EventKind.VERDICT, *args, cycle=cycle.index)

    def general_protection(self, cycle: FaultCycle, cls: Classification) -> None:
        """Record the verdict and terminate the faulter.  The thread state
        enum has no terminal member, so termination is modeled as a
        suspension nothing will ever pair with a resume."""
        self.record_verdict(cycle, cls)
        self.machine.suspend(cycle.faulter, cycle=cycle.index)

    def resume_present(self, cycle: FaultCycle, cls: Classification) -> None:
        """The page became present between trap and dispatch: go straight
        back to user mode.  The thread was never suspended, so no suspend
        or resume events appear and no pager hears about the fault."""
        self.record_verdict(cycle, cls)
        self.machine.leave_kernel(cycle=cycle.index)
        self.machine.switch_to(cycle.faulter, cycle=cycle.index)
        cycle.closed = True

    # ---- dispatch to a pager --------------------------------------------

    def suspend_and_send(
        self, cycle: FaultCycle, cls: Classification, target: int
    ) -> Message:
        """Phase two for a dispatched fault: record the verdict, suspend
        the faulter, and queue the fault message at ``target``.  Delivery
        switching is the caller's business."""
        self.record_verdict(cycle, cls)
        self.machine.suspend(cycle.faulter, cycle=cycle.index)
        msg = Message(
            sender=KERNEL_TID,
            receiver=target,
            kind=MessageKind.PAGE_FAULT,
            payload=FaultPayload(
                faulter=cycle.faulter,
                vaddr=cycle.vaddr,
                access=cycle.access,
                marker=cls.marker,
            ),
        )
        self.machine.send(msg, cycle=cycle.index)
        self._outstanding[cycle.faulter] = _Outstanding(handler=target, cycle=cycle)
        cycle.dispatched_to = target
        return msg

    def reroute(self, faulter: int, new_handler: int) -> None:
        """A reflection moved responsibility for an in-flight fault."""
        out = self._outstanding.get(faulter)
        if out is None:
            raise NoOutstandingFaultError(f"thread {faulter} has no fault in flight")
        out.handler = new_handler

    def outstanding_cycle(self, faulter: int) -> FaultCycle | None:
        out = self._outstanding.get(faulter)
        return out.cycle if out else None

    def pager_reply(self, pager: int, faulter: int) -> FaultCycle:
        """A pager's reply syscall: validate it, wake the faulter, and hand
        the CPU back.  Emits U2K (the syscall), the reply send, the
        resume, K2U, and the context switch back to the faulter."""
        out = self._outstanding.get(faulter)
        if out is None:
            raise NoOutstandingFaultError(f"thread {faulter} has no fault in flight")
        if out.handler != pager:
            raise WrongPagerError(
                f"fault of thread {faulter} is handled by {out.handler}, "
                f"not {pager}"
            )
        cycle = out.cycle
        del self._outstanding[faulter]
        self.machine.enter_kernel(cycle=cycle.index)
        self.machine.send(
            Message(
                sender=pager,
                receiver=KERNEL_TID,
                kind=MessageKind.REPLY,
                payload=FaultPayload(
                    faulter=faulter,
                    vaddr=cycle.vaddr,
                    access=cycle.access,
                    marker=0,
                ),
            ),
            cycle=cycle.index,
        )
        self.machine.resume(faulter, cycle=cycle.index)
        self.machine.block_on_receive(pager)
        self.machine.leave_kernel(cycle=cycle.index)
        self.machine.switch_to(faulter, cycle=cycle.index)
        cycle.closed = True
        return cycle
