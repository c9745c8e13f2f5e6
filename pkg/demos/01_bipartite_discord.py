#!/usr/bin/env python3
"""Bipartite discord from first principles.

Walks through the pieces behind a single discord number: conditional
entropies with and without a measurement, what a measurement in the wrong
basis costs, and the minimization over bases.
"""

import numpy as np

from mdiscord import (
    MeasParams,
    QState,
    cond_entropy,
    cond_entropy_measured,
    discord,
    mutual_info,
    tree_from_params,
)

bell = QState((2, 2), np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2)
classical = QState((2, 2), np.diag([0.5, 0.0, 0.0, 0.5]))

print("Two correlated states:")
print(f"  Bell pair        I(A:B) = {mutual_info(bell, [0], [1]):.4f} bits")
print(f"  classical 00/11  I(A:B) = {mutual_info(classical, [0], [1]):.4f} bits")

z_tree = tree_from_params((2, 2), [0], MeasParams(((0.0, 0.0),)))
x_tree = tree_from_params((2, 2), [0], MeasParams(((np.pi / 4, 0.0),)))

print("\nConditional entropy of B, before and after measuring A:")
for name, state in (("Bell", bell), ("classical", classical)):
    before = cond_entropy(state, [1], [0])
    after_z = cond_entropy_measured(state, z_tree, 1)
    after_x = cond_entropy_measured(state, x_tree, 1)
    print(f"  {name:9s}  S(B|A) = {before:+.4f}   Z-measured = {after_z:.4f}"
          f"   X-measured = {after_x:.4f}")

print("\nThe discord minimizes that gap over all measurement bases:")
for name, state in (("Bell", bell), ("classical", classical)):
    result = discord(state)
    theta, phi = result.optimal_params.angles[0]
    print(f"  D(A;B) {name:9s} = {result.value:.6f}"
          f"   (best basis theta={theta:.3f}, phi={phi:.3f})")

print("\nThe Bell pair keeps one full bit of quantum correlation;")
print("the classical mixture loses nothing when measured in its own basis.")
