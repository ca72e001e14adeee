"""One-level page tables with a pager-owned marker in each entry.

An entry holds a present flag, a frame number, and a 31-bit marker.  The
marker is opaque to the kernel: a pager stores whatever bookkeeping it
likes there (swap slot, generation counter) and reads it back from the
fault message the next time the page faults.  Unmapping clears only the
present flag; the marker survives, which is the whole point of keeping
pager data inside the entry.  Never-mapped pages read back marker 0.

``translate`` treats an absent page as an ordinary outcome, not an error:
it returns a ``FaultEvent`` that the dispatch layer classifies.
"""

from dataclasses import dataclass

from .engine import AccessType
from .errors import MarkerOverflowError, NotMappedError

# Marker width: the entry bit that would hold it is spent on the present
# flag, leaving 31 usable bits.
MARKER_BITS = 31
MARKER_LIMIT = 1 << MARKER_BITS


@dataclass
class PageTableEntry:
    present: bool = False
    frame: int = 0
    marker: int = 0


@dataclass(frozen=True)
class MemoryAccess:
    tid: int
    vaddr: int
    access: AccessType


@dataclass(frozen=True)
class FaultEvent:
    tid: int
    vaddr: int
    access: AccessType


class PageTable:
    """Flat mapping from page index to entry; absent indexes read as an
    all-zero, non-present entry."""

    def __init__(self) -> None:
        self._entries: dict[int, PageTableEntry] = {}

    def entry(self, page: int) -> PageTableEntry:
        ent = self._entries.get(page)
        return ent if ent is not None else PageTableEntry()

    def set_mapping(self, page: int, frame: int, marker: int) -> None:
        if not 0 <= marker < MARKER_LIMIT:
            raise MarkerOverflowError(
                f"marker {marker} does not fit in {MARKER_BITS} bits"
            )
        self._entries[page] = PageTableEntry(present=True, frame=frame, marker=marker)

    def clear_mapping(self, page: int) -> None:
        """Drop the present flag but keep the marker readable."""
        ent = self._entries.get(page)
        if ent is None or not ent.present:
            raise NotMappedError(f"page {page} has no present mapping")
        ent.present = False

    def present_pages(self) -> list[int]:
        return sorted(p for p, e in self._entries.items() if e.present)

    def touched_pages(self) -> list[int]:
        """Pages with any state at all (present, or a surviving marker)."""
        return sorted(self._entries)

    def snapshot(self) -> dict[int, tuple[bool, int, int]]:
        """Canonical content view used for cross-scheme comparison."""
        return {
            p: (e.present, e.frame if e.present else 0, e.marker)
            for p, e in sorted(self._entries.items())
        }


def translate(table: PageTable, page_size: int, access: MemoryAccess):
    """Resolve a virtual address to a frame number.

    Returns the frame on a present page, otherwise a ``FaultEvent``.  No
    region or permission logic lives here; classification of the fault is
    the dispatch layer's job.
    """
    ent = table.entry(access.vaddr // page_size)
    if ent.present:
        return ent.frame
    return FaultEvent(tid=access.tid, vaddr=access.vaddr, access=access.access)
