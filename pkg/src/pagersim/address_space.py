"""Address-space layout, region ids, and the in-kernel region table.

The user part of each 32-bit address space is carved into equally sized,
power-of-two regions.  A region id is a plain index:

    rid = (vaddr - user_base) // region_size

and because the region size is a power of two this is the same as a right
shift.  Both forms are implemented and cross-checked on every call; the
equivalence is what makes the lookup cheap enough to sit on the fault
path.

The region table is one slot per region: the manager thread id plus the
state of the management contract.  With the default layout of 1020
regions and 4-byte thread ids the serialized table is 4080 bytes, under a
single 4 KiB page.
"""

import struct
from dataclasses import dataclass
from enum import Enum

from .errors import BadRegionError
from .mmu import PageTable

ADDRESS_BITS = 32
ADDRESS_SPACE_SIZE = 1 << ADDRESS_BITS

DEFAULT_REGION_COUNT = 1020
DEFAULT_PAGES_PER_REGION = 1024
DEFAULT_PAGE_SIZE = 4096

MANAGER_ID_BYTES = 4


class KernelRange:
    """Singleton result of region lookup for addresses outside the user part."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "KERNEL_RANGE"


KERNEL_RANGE = KernelRange()


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class LayoutConfig:
    region_count: int = DEFAULT_REGION_COUNT
    pages_per_region: int = DEFAULT_PAGES_PER_REGION
    page_size: int = DEFAULT_PAGE_SIZE
    user_base: int = 0

    def __post_init__(self) -> None:
        if self.region_count <= 0:
            raise ValueError("region_count must be positive")
        if not _is_pow2(self.page_size):
            raise ValueError("page_size must be a power of two")
        if not _is_pow2(self.pages_per_region):
            raise ValueError("pages_per_region must be a power of two")
        if self.user_base % self.region_size != 0:
            raise ValueError("user_base must be region aligned")
        if self.user_limit > ADDRESS_SPACE_SIZE:
            raise ValueError("user part exceeds the 32-bit address space")

    @property
    def region_size(self) -> int:
        return self.pages_per_region * self.page_size

    @property
    def region_shift(self) -> int:
        return self.region_size.bit_length() - 1

    @property
    def user_limit(self) -> int:
        """First address above the user part."""
        return self.user_base + self.region_count * self.region_size

    def region_page_range(self, rid: int) -> range:
        """Page indexes covered by a region."""
        start = (self.user_base + rid * self.region_size) // self.page_size
        return range(start, start + self.pages_per_region)


def region_id_div(layout: LayoutConfig, vaddr: int):
    """Division form of the region lookup."""
    if not 0 <= vaddr < ADDRESS_SPACE_SIZE:
        raise ValueError(f"address {vaddr:#x} outside the 32-bit space")
    if vaddr < layout.user_base or vaddr >= layout.user_limit:
        return KERNEL_RANGE
    return (vaddr - layout.user_base) // layout.region_size


def region_id_shift(layout: LayoutConfig, vaddr: int):
    """Shift form; valid because region_size is a power of two."""
    if not 0 <= vaddr < ADDRESS_SPACE_SIZE:
        raise ValueError(f"address {vaddr:#x} outside the 32-bit space")
    if vaddr < layout.user_base or vaddr >= layout.user_limit:
        return KERNEL_RANGE
    return (vaddr - layout.user_base) >> layout.region_shift


def region_id_of(layout: LayoutConfig, vaddr: int):
    """Region id of an address, or ``KERNEL_RANGE`` outside the user part.

    Computes both arithmetic forms and insists they agree; the redundancy
    is cheap and keeps the equivalence continuously checked.
    """
    rid = region_id_shift(layout, vaddr)
    assert rid == region_id_div(layout, vaddr)
    return rid


class ContractState(Enum):
    """Lifecycle of the kernel/pager agreement over one region."""

    UNASSIGNED = "unassigned"
    ASSIGNED = "assigned"
    ACCEPTED = "accepted"
    REVOKED = "revoked"


@dataclass
class RegionSlot:
    manager: int | None = None
    contract: ContractState = ContractState.UNASSIGNED


class RegionTable:
    """One slot per region.  Assignment is consumer-driven and last-writer
    wins; acceptance and revocation are driven by the pager through the
    fault-dispatch layer."""

    def __init__(self, region_count: int) -> None:
        self.region_count = region_count
        self._slots = [RegionSlot() for _ in range(region_count)]

    def _check(self, rid: int) -> None:
        if not 0 <= rid < self.region_count:
            raise BadRegionError(
                f"region {rid} outside table of {self.region_count}"
            )

    def assign(self, rid: int, manager: int) -> None:
        """(Re)assign a region manager; any prior contract state resets to
        ASSIGNED, which is how a revoked region comes back to life."""
        self._check(rid)
        self._slots[rid] = RegionSlot(manager=manager, contract=ContractState.ASSIGNED)

    def lookup(self, rid: int) -> RegionSlot:
        self._check(rid)
        return self._slots[rid]

    def set_contract(self, rid: int, state: ContractState) -> None:
        self._check(rid)
        self._slots[rid].contract = state

    def serialize_manager_ids(self) -> bytes:
        """Pack the manager column as little-endian 4-byte ids (0 for an
        unassigned slot).  This is the structure whose footprint must stay
        within one page."""
        ids = [slot.manager or 0 for slot in self._slots]
        return struct.pack(f"<{self.region_count}I", *ids)


class AddressSpace:
    def __init__(self, asid: int, layout: LayoutConfig) -> None:
        self.asid = asid
        self.layout = layout
        self.pages = PageTable()
        self.regions = RegionTable(layout.region_count)

    def present_pages_in_region(self, rid: int) -> list[int]:
        r = self.layout.region_page_range(rid)
        return [p for p in self.pages.present_pages() if r.start <= p < r.stop]
