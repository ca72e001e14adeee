#!/usr/bin/env python3
"""Compare the cost of one dispatched fault under all four schemes.

The same single-fault scenario runs under:

  monolithic  fault handled entirely inside the kernel
  l4-single   one user-level pager per thread, kernel forwards blindly
  proposed    kernel routes by region table to the right pager directly
  l4re        a user-level region mapper reflects the fault to the pager

Handling the fault in user space costs IPC and context switches; the
point of routing inside the kernel is to keep multiple pagers per space
without paying the extra reflection hop.
"""

from pagersim.reproduce import fixture_path
from pagersim.scenario import parse_scenario
from pagersim.schemes import overhead_report


def main() -> None:
    sf = parse_scenario(fixture_path("table1").read_text())
    report = overhead_report(sf)
    print(report.as_table())
    print()
    print("the proposed scheme keeps user-level pagers (unlike monolithic)")
    print("but drops the reflection hop (unlike l4re): one third of the")
    print("crossings and one third of the switches of the reflective route.")


if __name__ == "__main__":
    main()
