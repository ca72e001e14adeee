import pytest

from pagersim import (
    AccessType,
    AddressSpace,
    ContractState,
    EventKind,
    FaultDispatcher,
    KernelMemory,
    LayoutConfig,
    Machine,
    ThreadRole,
    ThreadState,
    VerdictCode,
    classify,
)
from pagersim.fault_dispatch import Classification
from pagersim.errors import (
    BadRegionError,
    NoOutstandingFaultError,
    NotRegionManagerError,
    RevokedRegionError,
    WrongPagerError,
)
from pagersim.mmu import FaultEvent

SMALL = LayoutConfig(region_count=8, pages_per_region=4, page_size=4096)
PAGER = 9
OTHER = 8


def space_with(contract=None, present=False, marker=0):
    sp = AddressSpace(asid=1, layout=SMALL)
    if contract is not None:
        sp.regions.assign(0, manager=PAGER)
        sp.regions.set_contract(0, contract)
    if present or marker:
        sp.pages.set_mapping(page=1, frame=4, marker=marker)
        if not present:
            sp.pages.clear_mapping(page=1)
    return sp


def test_classification_truth_table():
    # The six canonical situations, in classification order.
    cases = [
        (space_with(), SMALL.user_limit, (), VerdictCode.KERNEL_RANGE),
        (space_with(), 0x1000, (), VerdictCode.NO_PAGER),
        (space_with(ContractState.REVOKED), 0x1000, (), VerdictCode.NOT_ACCEPTED),
        (space_with(ContractState.ASSIGNED), 0x1000, (PAGER,), VerdictCode.NOT_ACCEPTED),
        (space_with(ContractState.ASSIGNED), 0x1000, (), VerdictCode.DISPATCHED),
        (space_with(ContractState.ACCEPTED, present=True), 0x1000, (), VerdictCode.RESUMED_PRESENT),
    ]
    got = [classify(sp, vaddr, flags).code for sp, vaddr, flags, _ in cases]
    assert got == [want for _, _, _, want in cases]


def test_accepted_contract_overrides_refusal_flag():
    # Once a manager mapped into its region it is bound to it; flipping
    # its accept flag afterwards must not strand the region.
    sp = space_with(ContractState.ACCEPTED)
    assert classify(sp, 0x1000, (PAGER,)).code is VerdictCode.DISPATCHED


def test_classification_carries_manager_and_marker():
    sp = space_with(ContractState.ACCEPTED, marker=321)
    cls = classify(sp, 0x1000, ())
    assert (cls.code, cls.rid, cls.manager, cls.marker) == (
        VerdictCode.DISPATCHED, 0, PAGER, 321,
    )
    never_touched = classify(sp, 0x2000, ())
    assert never_touched.marker == 0


def machine_with_memory():
    m = Machine()
    m.register_thread(1, 1, role=ThreadRole.APPLICANT, name="t")
    m.register_thread(PAGER, 2, role=ThreadRole.PAGER, name="p")
    m.register_thread(OTHER, 2, role=ThreadRole.PAGER, name="q")
    spaces = {1: AddressSpace(asid=1, layout=SMALL)}
    spaces[1].regions.assign(0, manager=PAGER)
    return m, spaces, KernelMemory(m, spaces)


def test_map_requires_region_manager():
    m, spaces, mem = machine_with_memory()
    with pytest.raises(NotRegionManagerError):
        mem.map_page(OTHER, 1, 0x1000, frame=0, marker=0)
    with pytest.raises(BadRegionError):
        mem.map_page(PAGER, 1, SMALL.user_limit, frame=0, marker=0)


def test_first_map_accepts_the_contract():
    m, spaces, mem = machine_with_memory()
    assert spaces[1].regions.lookup(0).contract is ContractState.ASSIGNED
    mem.map_page(PAGER, 1, 0x1A20, frame=3, marker=2, cycle=0)
    assert spaces[1].regions.lookup(0).contract is ContractState.ACCEPTED
    ev = m.trace[0]
    assert ev.kind is EventKind.MAP_PAGE
    # The recorded address is page aligned even if the fault was not.
    assert ev.args == ("asid=1", "vaddr=0x1000", "frame=3", "marker=2")


def test_unmap_last_page_with_revoke_flag_revokes():
    m, spaces, mem = machine_with_memory()
    mem.map_page(PAGER, 1, 0x0, frame=0, marker=0)
    mem.map_page(PAGER, 1, 0x1000, frame=1, marker=0)
    mem.unmap_page(PAGER, 1, 0x0, revoke=True)  # not the last present page
    assert spaces[1].regions.lookup(0).contract is ContractState.ACCEPTED
    assert any("revoke ineffective" in w for w in m.warnings)
    mem.unmap_page(PAGER, 1, 0x1000, revoke=True)
    assert spaces[1].regions.lookup(0).contract is ContractState.REVOKED


def test_plain_unmap_keeps_contract():
    m, spaces, mem = machine_with_memory()
    mem.map_page(PAGER, 1, 0x0, frame=0, marker=0)
    mem.unmap_page(PAGER, 1, 0x0, revoke=False)
    assert spaces[1].regions.lookup(0).contract is ContractState.ACCEPTED
    assert m.warnings == []


def test_revoke_before_acceptance_warns():
    m, spaces, mem = machine_with_memory()
    mem.map_page(PAGER, 1, 0x0, frame=0, marker=0)
    spaces[1].regions.set_contract(0, ContractState.ASSIGNED)
    mem.unmap_page(PAGER, 1, 0x0, revoke=True)
    assert any("ignored" in w for w in m.warnings)


def test_map_into_revoked_region_denied():
    m, spaces, mem = machine_with_memory()
    mem.map_page(PAGER, 1, 0x0, frame=0, marker=0)
    mem.unmap_page(PAGER, 1, 0x0, revoke=True)
    with pytest.raises(RevokedRegionError):
        mem.map_page(PAGER, 1, 0x2000, frame=1, marker=0)


def dispatcher_setup():
    m = Machine()
    m.register_thread(1, 1, role=ThreadRole.APPLICANT, name="t")
    m.register_thread(PAGER, 2, role=ThreadRole.PAGER, name="p")
    m.register_thread(OTHER, 2, role=ThreadRole.PAGER, name="q")
    spaces = {1: AddressSpace(asid=1, layout=SMALL)}
    spaces[1].regions.assign(0, manager=PAGER)
    disp = FaultDispatcher(m, spaces)
    m.switch_to(1)
    return m, spaces, disp


def test_dispatch_event_order():
    m, spaces, disp = dispatcher_setup()
    cycle = disp.begin_fault(FaultEvent(tid=1, vaddr=0x1000, access=AccessType.READ))
    cls = classify(spaces[1], 0x1000)
    disp.suspend_and_send(cycle, cls, target=PAGER)
    kinds = [ev.kind for ev in m.trace]
    assert kinds == [
        EventKind.MODE_SWITCH_U2K,
        EventKind.VERDICT,
        EventKind.SUSPEND,
        EventKind.IPC_SEND,
    ]
    assert all(ev.cycle == 0 for ev in m.trace)
    assert cycle.trap_seq == 0
    assert cycle.dispatched_to == PAGER
    assert not cycle.closed


def test_reply_validation_happens_before_any_event():
    m, spaces, disp = dispatcher_setup()
    cycle = disp.begin_fault(FaultEvent(tid=1, vaddr=0x1000, access=AccessType.READ))
    disp.suspend_and_send(cycle, classify(spaces[1], 0x1000), target=PAGER)
    length = len(m.trace)
    with pytest.raises(WrongPagerError):
        disp.pager_reply(OTHER, faulter=1)
    with pytest.raises(NoOutstandingFaultError):
        disp.pager_reply(PAGER, faulter=5)
    assert len(m.trace) == length  # failed syscalls leave no trace


def test_reply_closes_cycle_and_returns_cpu():
    m, spaces, disp = dispatcher_setup()
    cycle = disp.begin_fault(FaultEvent(tid=1, vaddr=0x1000, access=AccessType.READ))
    disp.suspend_and_send(cycle, classify(spaces[1], 0x1000), target=PAGER)
    m.thread(PAGER).state = ThreadState.READY
    m.receive(PAGER, cycle=0)
    m.leave_kernel(cycle=0)
    m.switch_to(PAGER, cycle=0)
    disp.pager_reply(PAGER, faulter=1)
    assert cycle.closed
    assert m.occupant == 1
    tail = [ev.kind for ev in m.trace[-5:]]
    assert tail == [
        EventKind.MODE_SWITCH_U2K,
        EventKind.IPC_SEND,
        EventKind.RESUME,
        EventKind.MODE_SWITCH_K2U,
        EventKind.CONTEXT_SWITCH,
    ]
    with pytest.raises(NoOutstandingFaultError):
        disp.pager_reply(PAGER, faulter=1)  # one reply per fault


def test_reroute_moves_responsibility():
    m, spaces, disp = dispatcher_setup()
    cycle = disp.begin_fault(FaultEvent(tid=1, vaddr=0x1000, access=AccessType.READ))
    disp.suspend_and_send(cycle, classify(spaces[1], 0x1000), target=OTHER)
    disp.reroute(1, PAGER)
    with pytest.raises(WrongPagerError):
        disp.pager_reply(OTHER, faulter=1)
    with pytest.raises(NoOutstandingFaultError):
        disp.reroute(5, PAGER)


def test_general_protection_is_permanent_suspension():
    m, spaces, disp = dispatcher_setup()
    cycle = disp.begin_fault(
        FaultEvent(tid=1, vaddr=SMALL.user_limit, access=AccessType.READ)
    )
    disp.general_protection(cycle, classify(spaces[1], SMALL.user_limit))
    assert m.trace[-1].kind is EventKind.SUSPEND
    assert not cycle.closed
    assert cycle.verdict is VerdictCode.KERNEL_RANGE


def test_resume_present_never_suspends():
    m, spaces, disp = dispatcher_setup()
    spaces[1].pages.set_mapping(page=1, frame=0, marker=0)
    spaces[1].regions.set_contract(0, ContractState.ACCEPTED)
    cycle = disp.begin_fault(FaultEvent(tid=1, vaddr=0x1000, access=AccessType.READ))
    disp.resume_present(cycle, classify(spaces[1], 0x1000))
    kinds = {ev.kind for ev in m.trace}
    assert EventKind.SUSPEND not in kinds
    assert EventKind.RESUME not in kinds
    assert cycle.closed
    assert cycle.verdict is VerdictCode.RESUMED_PRESENT


def test_verdict_line_rendering():
    m, spaces, disp = dispatcher_setup()
    cycle = disp.begin_fault(FaultEvent(tid=1, vaddr=0x1000, access=AccessType.READ))
    disp.record_verdict(
        cycle, Classification(VerdictCode.DISPATCHED, rid=0, manager=PAGER)
    )
    assert m.trace[-1].render() == (
        f"1 VERDICT DISPATCHED tid=1 vaddr=0x1000 manager={PAGER} cycle=0"
    )
