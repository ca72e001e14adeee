#!/usr/bin/env python3
"""The management contract of a region, from assignment to revocation.

A region's slot in the kernel table carries who manages it and how far
the agreement has progressed:

  unassigned -> assigned    a consumer names a manager for the region
  assigned   -> accepted    the manager's first map into the region
  accepted   -> revoked     the manager unmaps the last page with the
                            revoke flag: it walks away from the consumer
  revoked    -> assigned    only a fresh assignment revives the region

While revoked, every fault in the region is refused (a protection
fault); mapping into it is denied outright.
"""

from pagersim import (
    AddressSpace,
    KernelMemory,
    LayoutConfig,
    Machine,
    ThreadRole,
    classify,
)
from pagersim.errors import RevokedRegionError

PAGER = 7
LAYOUT = LayoutConfig(region_count=8, pages_per_region=4, page_size=4096)


def show(space: AddressSpace, label: str) -> None:
    slot = space.regions.lookup(0)
    verdict = classify(space, 0x0).code.value
    print(f"{label:<40} contract={slot.contract.value:<10} fault(0x0) -> {verdict}")


def main() -> None:
    machine = Machine()
    machine.register_thread(PAGER, 2, role=ThreadRole.PAGER, name="pager")
    space = AddressSpace(asid=1, layout=LAYOUT)
    memory = KernelMemory(machine, {1: space})

    show(space, "initial state")

    space.regions.assign(0, manager=PAGER)
    show(space, "consumer assigns region 0 to the pager")

    memory.map_page(PAGER, 1, 0x0, frame=3, marker=0)
    show(space, "pager maps its first page (acceptance)")

    memory.unmap_page(PAGER, 1, 0x0, revoke=True)
    show(space, "pager unmaps the last page with revoke")

    try:
        memory.map_page(PAGER, 1, 0x1000, frame=4, marker=0)
    except RevokedRegionError as exc:
        print(f"{'pager tries to map anyway':<40} denied: {exc}")

    space.regions.assign(0, manager=PAGER)
    show(space, "consumer assigns the region again")


if __name__ == "__main__":
    main()
