import random

import pytest

from pagersim import (
    AccessType,
    FrameAllocator,
    KERNEL_TID,
    MappingDatabase,
    MarkerKind,
    MarkerRule,
    Message,
    MessageKind,
    PagerBehavior,
    PagerPolicy,
)
from pagersim.engine import FaultPayload
from pagersim.errors import (
    NoDatabaseEntryError,
    OutOfFramesError,
    OverlappingRangeError,
)
from pagersim.pagers import (
    MapAction,
    ReflectAction,
    ReplyAction,
    RevokeRegionAction,
)


def test_marker_rules():
    assert MarkerRule(MarkerKind.ZERO).marker_for(17) == 0
    assert MarkerRule(MarkerKind.PAGE).marker_for(17) == 17
    assert MarkerRule(MarkerKind.FIXED, 99).marker_for(17) == 99


def test_frame_allocator_is_sequential_and_bounded():
    alloc = FrameAllocator(limit=3)
    assert [alloc.allocate() for _ in range(3)] == [0, 1, 2]
    with pytest.raises(OutOfFramesError):
        alloc.allocate()


def test_mapping_database_lookup_and_boundaries():
    db = MappingDatabase()
    db.insert(0x0, 0x4000, target=2)
    db.insert(0x8000, 0xC000, target=3)
    assert db.lookup(0x0) == 2
    assert db.lookup(0x3FFF) == 2
    assert db.lookup(0x8000) == 3
    with pytest.raises(NoDatabaseEntryError):
        db.lookup(0x4000)  # end is exclusive
    with pytest.raises(NoDatabaseEntryError):
        db.lookup(0x7FFF)  # gap between ranges
    assert len(db) == 2


def test_mapping_database_rejects_bad_ranges():
    db = MappingDatabase()
    db.insert(0x0, 0x4000, target=2)
    with pytest.raises(OverlappingRangeError):
        db.insert(0x3000, 0x5000, target=3)
    with pytest.raises(OverlappingRangeError):
        db.insert(0x0, 0x4000, target=3)
    with pytest.raises(ValueError):
        db.insert(0x5000, 0x5000, target=3)


def test_mapping_database_agrees_with_linear_scan():
    rng = random.Random(303)
    ranges = []
    cursor = 0
    for _ in range(20):
        cursor += rng.randrange(1, 5) * 0x1000
        size = rng.randrange(1, 4) * 0x1000
        ranges.append((cursor, cursor + size, rng.randrange(2, 9)))
        cursor += size
    db = MappingDatabase()
    shuffled = ranges[:]
    rng.shuffle(shuffled)
    for start, end, target in shuffled:
        db.insert(start, end, target)

    def linear(vaddr):
        for start, end, target in ranges:
            if start <= vaddr < end:
                return target
        return None

    for _ in range(500):
        vaddr = rng.randrange(cursor + 0x4000)
        want = linear(vaddr)
        if want is None:
            with pytest.raises(NoDatabaseEntryError):
                db.lookup(vaddr)
        else:
            assert db.lookup(vaddr) == want


def fault(vaddr=0x1000, faulter=1, marker=0):
    return Message(
        sender=KERNEL_TID,
        receiver=2,
        kind=MessageKind.PAGE_FAULT,
        payload=FaultPayload(
            faulter=faulter, vaddr=vaddr, access=AccessType.READ, marker=marker
        ),
    )


def serve(behavior, msg, allocator=None, warnings=None, rid=0):
    return behavior.on_page_fault(
        msg,
        asid=1,
        page_size=4096,
        rid=rid,
        allocator=allocator if allocator is not None else FrameAllocator(),
        warnings=warnings if warnings is not None else [],
    )


def test_anonymous_pager_maps_and_replies():
    behavior = PagerBehavior(policy=PagerPolicy.ANONYMOUS,
                             marker_rule=MarkerRule(MarkerKind.PAGE))
    actions = serve(behavior, fault(vaddr=0x2A10))
    assert actions == [
        MapAction(asid=1, vaddr=0x2A10, frame=0, marker=2),
        ReplyAction(faulter=1),
    ]


def test_fixed_pager_uses_backing_store():
    behavior = PagerBehavior(policy=PagerPolicy.FIXED, backing={2: 55})
    actions = serve(behavior, fault(vaddr=0x2000))
    assert actions[0] == MapAction(asid=1, vaddr=0x2000, frame=55, marker=0)


def test_fixed_pager_without_backing_warns_and_does_nothing():
    behavior = PagerBehavior(policy=PagerPolicy.FIXED, backing={})
    warnings = []
    assert serve(behavior, fault(), warnings=warnings) == []
    assert len(warnings) == 1 and "no frame" in warnings[0]


def test_rejecting_pager_stays_silent():
    assert serve(PagerBehavior(policy=PagerPolicy.REJECTING), fault()) == []


def test_reflecting_pager_forwards_the_message():
    msg = fault()
    actions = serve(PagerBehavior(policy=PagerPolicy.REFLECTING), msg)
    assert actions == [ReflectAction(msg)]


def test_revoke_after_counts_per_region_and_resets():
    behavior = PagerBehavior(policy=PagerPolicy.ANONYMOUS, revoke_after=2)
    first = serve(behavior, fault(vaddr=0x0), rid=0)
    assert not any(isinstance(a, RevokeRegionAction) for a in first)
    second = serve(behavior, fault(vaddr=0x1000), rid=0)
    assert second[-1] == RevokeRegionAction(asid=1, rid=0)
    # Counter reset: the next fault in the region starts a fresh pair.
    third = serve(behavior, fault(vaddr=0x2000), rid=0)
    assert not any(isinstance(a, RevokeRegionAction) for a in third)
    # Other regions count independently.
    other = serve(behavior, fault(vaddr=0x4000), rid=1)
    assert not any(isinstance(a, RevokeRegionAction) for a in other)
