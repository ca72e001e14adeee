#!/usr/bin/env python3
"""Walk through one page fault from trap to resume.

A single applicant touches an unmapped page.  The kernel classifies the
fault, suspends the applicant, and hands the fault message to the pager
that manages the region; the pager maps a frame and replies.  Every
privilege crossing, context switch, and message lands in the trace, and
the per-cycle metrics summarize what the fault cost.
"""

from pagersim import Scheme, cycle_metrics, parse_scenario, simulate

SCENARIO = """\
layout regions=8 pages_per_region=4 page_size=4096
thread worker tid=1 asid=1 role=applicant
thread disk_pager tid=2 asid=2 role=pager
pager disk_pager policy=anonymous marker=page
assign asid=1 rid=0 pager=disk_pager
assign asid=1 rid=1 pager=disk_pager
access worker 0x1000 read
access worker 0x1000 write
"""

NOTES = {
    "MODE_SWITCH_U2K": "privilege crossing into the kernel",
    "MODE_SWITCH_K2U": "privilege crossing back to user mode",
    "CONTEXT_SWITCH": "the CPU moves to another thread",
    "VERDICT": "outcome of the pure fault classification",
    "SUSPEND": "faulter parked while its fault is in flight",
    "RESUME": "faulter made runnable again by the reply",
    "IPC_SEND": "a message leaves a thread (or the kernel)",
    "IPC_RECEIVE": "a blocked receiver picks a message up",
    "MAP_PAGE": "kernel installs a page-table entry",
}


def main() -> None:
    sf = parse_scenario(SCENARIO)
    result = simulate(Scheme.REGION_DISPATCH, sf)

    print("trace of two accesses to the same page:")
    for event in result.trace:
        line = event.render()
        note = NOTES.get(event.kind.value, "")
        print(f"  {line:<58} {note}")

    print()
    print("the first access faults and is dispatched to the pager;")
    print("the second finds the page present and never faults at all.")
    print()
    for cycle in result.cycles:
        metrics = cycle_metrics(result.trace, cycle.index)
        print(
            f"fault {cycle.index} ({cycle.verdict.value}): "
            f"{metrics.mode_switches} mode switches, "
            f"{metrics.context_switches} context switches, "
            f"{metrics.ipc_messages} messages"
        )


if __name__ == "__main__":
    main()
