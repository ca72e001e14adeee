import pytest

from pagersim import AccessType, MemoryAccess, PageTable, translate
from pagersim.errors import MarkerOverflowError, NotMappedError
from pagersim.mmu import FaultEvent


def test_translate_miss_returns_fault_event():
    table = PageTable()
    out = translate(table, 4096, MemoryAccess(tid=1, vaddr=0x1234, access=AccessType.READ))
    assert isinstance(out, FaultEvent)
    assert (out.tid, out.vaddr, out.access) == (1, 0x1234, AccessType.READ)


def test_translate_hit_returns_frame():
    table = PageTable()
    table.set_mapping(page=1, frame=77, marker=9)
    out = translate(table, 4096, MemoryAccess(tid=1, vaddr=0x1FFF, access=AccessType.WRITE))
    assert out == 77


def test_mapping_roundtrip_and_present_pages():
    table = PageTable()
    table.set_mapping(page=3, frame=5, marker=1)
    table.set_mapping(page=8, frame=6, marker=2)
    assert table.present_pages() == [3, 8]
    ent = table.entry(3)
    assert (ent.present, ent.frame, ent.marker) == (True, 5, 1)


def test_marker_survives_unmap():
    # The stored word is the pager's breadcrumb: it must still be there
    # when the next fault on the page is classified.
    table = PageTable()
    table.set_mapping(page=4, frame=1, marker=1234)
    table.clear_mapping(page=4)
    ent = table.entry(4)
    assert not ent.present
    assert ent.marker == 1234
    assert table.present_pages() == []
    assert table.touched_pages() == [4]


def test_clear_unmapped_page_raises():
    with pytest.raises(NotMappedError):
        PageTable().clear_mapping(page=0)


def test_marker_width_boundary():
    table = PageTable()
    table.set_mapping(page=0, frame=0, marker=(1 << 31) - 1)  # widest legal
    with pytest.raises(MarkerOverflowError):
        table.set_mapping(page=1, frame=0, marker=1 << 31)
    with pytest.raises(MarkerOverflowError):
        table.set_mapping(page=2, frame=0, marker=-1)


def test_snapshot_shows_present_and_ghost_entries():
    table = PageTable()
    table.set_mapping(page=0, frame=3, marker=7)
    table.set_mapping(page=1, frame=4, marker=8)
    table.clear_mapping(page=1)
    assert table.snapshot() == {0: (True, 3, 7), 1: (False, 0, 8)}
