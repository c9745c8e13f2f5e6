#!/usr/bin/env python3
"""Entropy flux through a two-step measurement.

For a GHZ state measured A then B in the computational basis, prints every
conditional entropy and mutual information before the measurement, after the
first step, and after the second, plus the deltas that move between them.
"""

from mdiscord import MeasParams, flux_report, states, tree_from_params

ghz = states.ghz_state()
z_tree = tree_from_params(ghz.dims, (0, 1), MeasParams(((0.0, 0.0),) * 3))

reports = flux_report(ghz, z_tree)

print("GHZ state, computational-basis tree, stage by stage:\n")
keys = list(reports[0].ledger)
print(f"{'quantity':10s}" + "".join(f"{r.stage:>14s}" for r in reports))
for key in keys:
    row = "".join(f"{r.ledger[key]:14.4f}" for r in reports)
    print(f"{key:10s}{row}")

print("\ndeltas attributed to each step:")
for report in reports[1:]:
    print(f"  {report.stage}:")
    for name, value in report.deltas.items():
        print(f"    {name:14s} {value:+.4f}")

print("\nThe first measurement moves one bit out of every mutual information")
print("into the conditional entropies; the second changes nothing because the")
print("once-measured GHZ state is already classical in this basis.")
