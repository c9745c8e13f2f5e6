"""Independent verification path: raw-definition objective evaluation, dense
grid minimization, invariance residuals, and the algebraic identity suite.

Everything here recomputes entropic quantities from first principles on
plain arrays (textbook projector sandwiches, reshape-and-trace partial
traces, eigenvalue sums) and never touches :mod:`mdiscord.entropy_flux` or
the batched evaluator in :mod:`mdiscord.discord`.  Agreement between this
module and the production path is itself one of the checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .measure import MeasParams, MeasurementTree, apply_tree, tree_from_params
from .qstate import QState, random_state

_CLAMP = 1e-12
_ZERO_PROB = 1e-12
IDENTITY_TOL = 1e-9


def _reduce_matrix(matrix: np.ndarray, dims, keep) -> np.ndarray:
    """Partial trace by reshaping and tracing out one subsystem at a time."""
    dims = list(dims)
    out = matrix
    for pos in sorted(set(range(len(dims))) - set(keep), reverse=True):
        shape = dims + dims
        out = out.reshape(shape)
        out = np.trace(out, axis1=pos, axis2=pos + len(dims))
        del dims[pos]
        side = int(np.prod(dims))
        out = out.reshape(side, side)
    return out


def _entropy_bits(matrix: np.ndarray) -> float:
    vals = np.linalg.eigvalsh(matrix)
    total = 0.0
    for v in vals:
        if v > _CLAMP:
            total -= v * np.log2(v)
    return total


def _weighted_entropy(unnormalized: np.ndarray) -> float:
    """p * S(sigma / p) for an unnormalized branch sigma with trace p."""
    p = float(unnormalized.trace().real)
    if p < _ZERO_PROB:
        return 0.0
    return p * _entropy_bits(unnormalized / p)


def _basis_vectors(theta: float, phi: float):
    phase = np.exp(1j * phi)
    return (
        np.array([np.cos(theta), phase * np.sin(theta)]),
        np.array([np.sin(theta), -phase * np.cos(theta)]),
    )


def _project(matrix: np.ndarray, dims, position: int, vector: np.ndarray) -> np.ndarray:
    factors = [
        np.outer(vector, vector.conj()) if pos == position else np.eye(d)
        for pos, d in enumerate(dims)
    ]
    proj = reduce(np.kron, factors)
    return proj @ matrix @ proj


def reference_objective(state: QState, tree: MeasurementTree, level: int | None = None) -> float:
    """Discord integrand computed branch by branch from the definitions.

    Separate code path from :func:`mdiscord.discord.objective_npartite`;
    the two must agree to 1e-10 on any (state, tree) pair.
    """
    n = state.n_subsystems
    level = n if level is None else int(level)
    measured = tree.measured[: level - 1]
    dims = state.dims
    value = -(_entropy_bits(state.matrix) - _entropy_bits(_reduce_matrix(state.matrix, dims, [0])))
    branches = [((), np.asarray(state.matrix))]
    for depth, position in enumerate(measured, start=1):
        new_branches = []
        for path, sigma in branches:
            basis = tree.basis_at(path)
            for outcome in range(basis.dim):
                proj_factors = [
                    basis.projectors[outcome] if pos == position else np.eye(d)
                    for pos, d in enumerate(dims)
                ]
                proj = reduce(np.kron, proj_factors)
                new_branches.append((path + (outcome,), proj @ sigma @ proj))
        branches = new_branches
        for _, sigma in branches:
            if depth < level - 1:
                value += _weighted_entropy(
                    _reduce_matrix(sigma, dims, [depth])
                )
            else:
                value += _weighted_entropy(sigma)
        if depth == level - 1:
            break
    return value


def dense_grid_min(state: QState, level: int | None = None, points_per_angle: int = 12) -> float:
    """Exact minimum of the discord integrand over all trees whose node
    angles lie on the product grid.

    The child bases of different outcome branches enter the objective through
    disjoint, non-negatively weighted terms, so the product-grid minimum
    factorizes into a per-branch recursion; the value equals full grid
    enumeration at a tiny fraction of the cost.
    """
    n = state.n_subsystems
    level = n if level is None else int(level)
    dims = state.dims
    thetas = np.linspace(0.0, np.pi / 2, points_per_angle)
    phis = np.linspace(0.0, 2 * np.pi, points_per_angle, endpoint=False)
    base = -(_entropy_bits(state.matrix) - _entropy_bits(_reduce_matrix(state.matrix, dims, [0])))

    def tail_min(sigma: np.ndarray, depth: int) -> float:
        """Minimum over this node's grid of the terms its subtree controls;
        sigma is the unnormalized branch about to be measured at ``depth``."""
        if float(sigma.trace().real) < _ZERO_PROB:
            return 0.0
        position = depth - 1
        best = np.inf
        for theta in thetas:
            for phi in phis:
                contribution = 0.0
                for vector in _basis_vectors(theta, phi):
                    branch = _project(sigma, dims, position, vector)
                    if depth < level - 1:
                        contribution += _weighted_entropy(
                            _reduce_matrix(branch, dims, [depth])
                        )
                        contribution += tail_min(branch, depth + 1)
                    else:
                        contribution += _weighted_entropy(branch)
                if contribution < best:
                    best = contribution
        return best

    return base + tail_min(np.asarray(state.matrix), 1)


def invariance_residual(state: QState, tree: MeasurementTree) -> float:
    """Max-entry norm of rho minus its full-depth tree measurement."""
    post, _ = apply_tree(state, tree, tree.depth)
    return float(np.max(np.abs(post.matrix - state.matrix)))


@dataclass(frozen=True)
class VerifyReport:
    name: str
    samples: int
    max_violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation < self.tolerance


def _random_tree(rng, depth: int) -> tuple[MeasurementTree, MeasParams]:
    count = 2 ** depth - 1
    flat = np.stack(
        [rng.uniform(0.0, np.pi / 2, count), rng.uniform(0.0, 2 * np.pi, count)], 1
    ).ravel()
    params = MeasParams.from_flat(flat)
    return tree_from_params((2,) * (depth + 1), tuple(range(depth)), params), params


def _sample_identities(rng, sample_index: int) -> dict[str, float]:
    """Max identity violations for one random 3-qubit state and tree, with
    every side computed from raw definitions."""
    dims = (2, 2, 2)
    rank = 1 + sample_index % 8
    state = random_state(dims, rank, int(rng.integers(0, 2 ** 31)))
    tree, _ = _random_tree(rng, 2)
    rho = np.asarray(state.matrix)

    def project_with(matrix, position, projector):
        factors = [projector if pos == position else np.eye(d)
                   for pos, d in enumerate(dims)]
        proj = reduce(np.kron, factors)
        return proj @ matrix @ proj

    def branches_at(matrix, depth):
        out = [((), matrix)]
        for level in range(depth):
            position = tree.measured[level]
            nxt = []
            for path, sigma in out:
                basis = tree.basis_at(path)
                for outcome in range(basis.dim):
                    nxt.append(
                        (path + (outcome,),
                         project_with(sigma, position, basis.projectors[outcome]))
                    )
            out = nxt
        return [sigma for _, sigma in out]

    def s(matrix, keep):
        return _entropy_bits(_reduce_matrix(matrix, dims, keep))

    def cmi(matrix, a, b, given):
        return (
            s(matrix, sorted(a + given)) + s(matrix, sorted(b + given))
            - s(matrix, sorted(a + b + given)) - s(matrix, given)
        )

    def tri(matrix):
        return (
            s(matrix, [0]) + s(matrix, [2]) - s(matrix, [0, 2])
            - cmi(matrix, [0], [2], [1])
        )

    rho1 = sum(branches_at(rho, 1))
    rho2 = sum(branches_at(rho, 2))

    # average branch entropies
    s_rest_m1 = sum(_weighted_entropy(b) for b in branches_at(rho, 1))
    s_b_m1 = sum(_weighted_entropy(_reduce_matrix(b, dims, [1]))
                 for b in branches_at(rho, 1))
    s_c_m2 = sum(_weighted_entropy(b) for b in branches_at(rho, 2))
    s_b_m1_of_rho2 = sum(_weighted_entropy(_reduce_matrix(b, dims, [1]))
                         for b in branches_at(rho2, 1))

    violations = {}
    # Measured conditional entropy equals the conditional entropy of the
    # measured state.
    violations["measured_state_conditional_entropy"] = abs(
        s_rest_m1 - (_entropy_bits(rho1) - s(rho1, [0]))
    )
    # Entropy decomposition of the twice-measured state.
    violations["second_measurement_entropy_decomposition"] = abs(
        _entropy_bits(rho2) - s(rho2, [0]) - s_b_m1_of_rho2 - s_c_m2
    )
    # The unminimized A;BC discord splits into the two conditional discords
    # plus the monogamy term.
    d_a_bc = s_rest_m1 - (_entropy_bits(rho) - s(rho, [0]))
    delta_ab_c = cmi(rho, [0], [1], [2]) - cmi(rho1, [0], [1], [2])
    delta_ac_b = cmi(rho, [0], [2], [1]) - cmi(rho1, [0], [2], [1])
    delta_abc = tri(rho) - tri(rho1)
    violations["conditional_discord_decomposition"] = abs(
        d_a_bc - (delta_ab_c + delta_ac_b + delta_abc)
    )
    # The discord integrand equals the sum of all four delta terms.
    objective = (
        -(_entropy_bits(rho) - s(rho, [0])) + s_b_m1 + s_c_m2
    )
    delta_bc_pia = cmi(rho1, [1], [2], [0]) - cmi(rho2, [1], [2], [0])
    violations["discord_delta_decomposition"] = abs(
        objective - (delta_ab_c + delta_ac_b + delta_bc_pia + delta_abc)
    )
    # The post-measurement conditional discord as a conditional entropy
    # change of subsystem C.
    violations["post_discord_conditional_entropy_form"] = abs(
        delta_bc_pia - ((_entropy_bits(rho2) - s(rho2, [0, 1]))
                        - (_entropy_bits(rho1) - s(rho1, [0, 1])))
    )
    # Bookkeeping identities worth pinning while we are here.
    violations["probability_normalization"] = abs(
        sum(float(b.trace().real) for b in branches_at(rho, 2)) - 1.0
    )
    return violations


_IDENTITY_CHECKS = (
    "conditional_discord_decomposition",
    "discord_delta_decomposition",
    "measured_state_conditional_entropy",
    "post_discord_conditional_entropy_form",
    "probability_normalization",
    "second_measurement_entropy_decomposition",
)


def identity_suite(seed: int = 0, samples: int = 100) -> tuple[VerifyReport, ...]:
    """Run every entropy identity on ``samples`` random 3-qubit states with
    random trees; reports the worst violation per identity."""
    rng = np.random.default_rng(seed)
    worst = {name: 0.0 for name in _IDENTITY_CHECKS}
    for index in range(samples):
        for name, violation in _sample_identities(rng, index).items():
            worst[name] = max(worst[name], violation)
    return tuple(
        VerifyReport(name=name, samples=samples, max_violation=worst[name],
                     tolerance=IDENTITY_TOL)
        for name in _IDENTITY_CHECKS
    )


def _nonnegativity_checks(rng, samples: int) -> list[VerifyReport]:
    dims = (2, 2, 2)
    worst_objective = 0.0
    worst_delta = 0.0
    worst_product_monogamy = 0.0
    for index in range(samples):
        state = random_state(dims, 1 + index % 8, int(rng.integers(0, 2 ** 31)))
        tree, _ = _random_tree(rng, 2)
        rho = np.asarray(state.matrix)
        rho1 = _measure_once(rho, dims, tree)
        rho2 = _measure_twice(rho, dims, tree)

        def s(matrix, keep):
            return _entropy_bits(_reduce_matrix(matrix, dims, keep))

        def cmi(matrix, a, b, given):
            return (
                s(matrix, sorted(a + given)) + s(matrix, sorted(b + given))
                - s(matrix, sorted(a + b + given)) - s(matrix, given)
            )

        worst_objective = max(worst_objective, -reference_objective(state, tree))
        deltas = (
            cmi(rho, [0], [1], [2]) - cmi(rho1, [0], [1], [2]),
            cmi(rho, [0], [2], [1]) - cmi(rho1, [0], [2], [1]),
            cmi(rho1, [1], [2], [0]) - cmi(rho2, [1], [2], [0]),
        )
        worst_delta = max(worst_delta, -min(deltas))

        # product of a correlated pair with a third system: the tripartite
        # mutual information change vanishes for every tree
        pair = random_state((2, 2), 1 + index % 4, int(rng.integers(0, 2 ** 31)))
        third = random_state((2,), 1 + index % 2, int(rng.integers(0, 2 ** 31)))
        product = np.kron(pair.matrix, third.matrix)
        product1 = _measure_once(product, dims, tree)
        tri_rho = (s(product, [0]) + s(product, [2]) - s(product, [0, 2])
                   - cmi(product, [0], [2], [1]))
        tri_rho1 = (s(product1, [0]) + s(product1, [2]) - s(product1, [0, 2])
                    - cmi(product1, [0], [2], [1]))
        worst_product_monogamy = max(worst_product_monogamy, abs(tri_rho - tri_rho1))

    return [
        VerifyReport("objective_non_negativity", samples, worst_objective,
                     IDENTITY_TOL),
        VerifyReport("conditional_discord_non_negativity", samples, worst_delta,
                     IDENTITY_TOL),
        VerifyReport("product_pair_monogamy_zero", samples,
                     worst_product_monogamy, IDENTITY_TOL),
    ]


def _measure_once(matrix, dims, tree):
    total = np.zeros_like(matrix)
    basis = tree.root
    for projector in basis.projectors:
        factors = [projector if pos == tree.measured[0] else np.eye(d)
                   for pos, d in enumerate(dims)]
        proj = reduce(np.kron, factors)
        total = total + proj @ matrix @ proj
    return total


def _measure_twice(matrix, dims, tree):
    total = np.zeros_like(matrix)
    for j, projector in enumerate(tree.root.projectors):
        factors = [projector if pos == tree.measured[0] else np.eye(d)
                   for pos, d in enumerate(dims)]
        proj = reduce(np.kron, factors)
        branch = proj @ matrix @ proj
        child = tree.basis_at((j,))
        for child_projector in child.projectors:
            child_factors = [child_projector if pos == tree.measured[1] else np.eye(d)
                             for pos, d in enumerate(dims)]
            child_proj = reduce(np.kron, child_factors)
            total = total + child_proj @ branch @ child_proj
    return total


def _invariance_check(rng, samples: int) -> VerifyReport:
    from .measure import optimal_tree_for_measured_state

    dims = (2, 2, 2)
    worst = 0.0
    for index in range(samples):
        state = random_state(dims, 1 + index % 8, int(rng.integers(0, 2 ** 31)))
        depth = 1 + index % 2
        tree, _ = _random_tree(rng, 2)
        measured_state, _ = apply_tree(state, tree, depth)
        rebuilt = optimal_tree_for_measured_state(measured_state, tuple(range(depth)))
        post, _ = apply_tree(measured_state, rebuilt, depth)
        worst = max(worst, float(np.max(np.abs(post.matrix - measured_state.matrix))))
    return VerifyReport("eigenbasis_tree_invariance", samples, worst, 1e-10)


def _cross_implementation_check(rng, samples: int) -> VerifyReport:
    from .discord import _MeasuredEntropyObjective

    dims = (2, 2, 2)
    worst = 0.0
    for index in range(samples):
        state = random_state(dims, 1 + index % 8, int(rng.integers(0, 2 ** 31)))
        tree, params = _random_tree(rng, 2)
        fast = _MeasuredEntropyObjective(state, 3)(params.to_flat())
        worst = max(worst, abs(fast - reference_objective(state, tree)))
    return VerifyReport("cross_implementation_objective", samples, worst, 1e-10)


def verification_suite(seed: int = 0, samples: int = 100) -> tuple[VerifyReport, ...]:
    """Identity suite plus invariance, non-negativity, and
    cross-implementation checks; report order is fixed by check name."""
    rng = np.random.default_rng(seed)
    reports = list(identity_suite(seed, samples))
    reports.extend(_nonnegativity_checks(rng, samples))
    reports.append(_invariance_check(rng, samples))
    reports.append(_cross_implementation_check(rng, samples))
    return tuple(sorted(reports, key=lambda report: report.name))
