#!/usr/bin/env python3
"""Discord across the mu-parameterized state families.

Re-creates the data behind the standard curves: discord and its
decomposition as a function of the mixing parameter for Werner-GHZ,
Werner-W, Bell-mixture, and the non-convexity witness family.  Writes one
CSV per family into demos/out/ (same format as `mdiscord sweep`).

Uses a lighter optimizer grid than the CLI default so the whole script runs
in about a minute; pass --full for default settings.
"""

import sys
from pathlib import Path

from mdiscord import OptimizerConfig, discord, states

POINTS = 11
OUT_DIR = Path(__file__).parent / "out"

config = OptimizerConfig() if "--full" in sys.argv else OptimizerConfig(grid_points_per_angle=4)
OUT_DIR.mkdir(exist_ok=True)

for family in states.MU_FAMILIES:
    rows = ["mu,D,Delta_AB_C,Delta_AC_B,Delta_BC_PiA,Delta_ABC"]
    print(f"{family}:")
    for i in range(POINTS):
        mu = i / (POINTS - 1)
        result = discord(states.build(states.StateSpec(family, mu=mu)),
                         level=3, config=config)
        d = result.decomposition
        rows.append(
            f"{mu:.3f},{result.value:.9f},{d['Delta_AB_C']:.9f},"
            f"{d['Delta_AC_B']:.9f},{d['Delta_BC_PiA']:.9f},{d['Delta_ABC']:.9f}"
        )
        bar = "#" * int(round(40 * result.value / 1.5))
        print(f"  mu={mu:.2f}  D={result.value:7.4f}  {bar}")
    path = OUT_DIR / f"{family}.csv"
    path.write_text("\n".join(rows) + "\n")
    print(f"  -> {path}\n")

print("Notable features: Werner-GHZ discord vanishes only at mu=0; the")
print("Werner-W monogamy column swaps sign near mu=0.92; the Bell mixture")
print("stays pinned at the bipartite value 1 at both endpoints; and the")
print("witness family is nonzero strictly inside (0,1) although both of its")
print("endpoints are zero-discord product states (non-convexity).")
