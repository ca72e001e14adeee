#!/usr/bin/env python3
"""Two threads fault on the same page; only one pays full price.

Thread A faults first and its fault goes out to the pager.  Before the
pager answers, the scheduler runs thread B, which faults on the very
same page.  B's trap is held until after the pager has mapped the page;
when the kernel then classifies B's fault it finds the page present and
sends B straight back to user mode: no suspension, no message, no pager
involvement.  The kernel re-reads the present bit precisely to absorb
such races.

The scenario drives the interleaving explicitly: `hold` keeps B's trap
pending, `pager-step` runs one queued pager action, and `dispatch`
releases the held trap.
"""

from pagersim import Scheme, cycle_metrics, parse_scenario, simulate
from pagersim.reproduce import fixture_path


def main() -> None:
    sf = parse_scenario(fixture_path("fig6").read_text())
    result = simulate(Scheme.REGION_DISPATCH, sf)

    print("interleaved trace (events without cycle= are scripted switches):")
    for event in result.trace:
        print(f"  {event.render()}")
    print()

    for cycle in result.cycles:
        metrics = cycle_metrics(result.trace, cycle.index)
        faulter = "A" if cycle.index == 0 else "B"
        print(
            f"thread {faulter}: verdict {cycle.verdict.value}, "
            f"{metrics.mode_switches} mode switches, "
            f"{metrics.context_switches} context switches, "
            f"{metrics.pager_invocations} pager invocation(s)"
        )
    print()
    print("B's entire share of the work is its own trap and return;")
    print("everything in between is attributed to A's outstanding fault.")


if __name__ == "__main__":
    main()
