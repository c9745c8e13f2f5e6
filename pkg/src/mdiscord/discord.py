"""Optimized multipartite discord and its decomposition.

The discord of an N-party state for the measurement ordering A_1 -> A_2 ->
... -> A_{N-1} is the minimum over conditional measurement trees of

    - S_{A_2..A_N | A_1}(rho) + sum_k S_{A_k | measured prefix}(rho),

which is non-negative for every tree and zero exactly on measured states.
``objective_*`` evaluate that quantity for a given tree through the readable
:mod:`mdiscord.entropy_flux` path; :func:`discord` minimizes it with a
dedicated batched evaluator that contracts branch states directly (the
optimizer calls it millions of times on the larger grids).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import entropy_flux as flux
from .measure import (
    MeasParams,
    MeasurementTree,
    node_count,
    params_from_json,
    params_to_json,
    tree_from_params,
)
from .optimizer import OptimizerConfig, optimize, simplex_refine
from .qstate import (
    ENTROPY_EIGENVALUE_CLAMP,
    QState,
    StructuralError,
    entropy,
    permute_subsystems,
    subsystem_entropy,
)

_POLISH_PASSES = 2
_EVAL_CHUNK = 4096


@dataclass(frozen=True)
class DiscordResult:
    value: float
    optimal_params: MeasParams
    decomposition: dict[str, float] | None
    diagnostics: dict

    @property
    def converged(self) -> bool:
        return bool(self.diagnostics.get("converged", False))


def objective_npartite(state: QState, tree: MeasurementTree) -> float:
    """Discord integrand for the tree's measurement chain; the unmeasured
    tail of the state counts as the final party."""
    n = state.n_subsystems
    measured = tree.measured
    if measured != tuple(range(len(measured))):
        raise StructuralError("tree must measure the leading subsystems in order")
    if len(measured) >= n:
        raise StructuralError("at least one subsystem must stay unmeasured")
    rest_of_first = tuple(range(1, n))
    value = -flux.cond_entropy(state, rest_of_first, (0,))
    for depth in range(1, len(measured) + 1):
        if depth < len(measured):
            value += flux.cond_entropy_measured(state, tree, depth, target=(depth,))
        else:
            value += flux.cond_entropy_measured(state, tree, depth)
    return value


def objective_bipartite(state: QState, tree: MeasurementTree) -> float:
    """S_{B|measured A} - S_{B|A} where B is everything except subsystem 0."""
    if tree.measured[0] != 0:
        raise StructuralError("bipartite objective measures subsystem 0")
    rest = tuple(range(1, state.n_subsystems))
    return flux.cond_entropy_measured(state, tree, 1) - flux.cond_entropy(
        state, rest, (0,)
    )


def objective_tripartite(state: QState, tree: MeasurementTree) -> float:
    """- S_{BC|A} + S_{B|measured A} + S_{C|measured AB} for a 3-subsystem
    state measured A then B."""
    if state.n_subsystems != 3:
        raise StructuralError("tripartite objective needs exactly 3 subsystems")
    if tree.measured[:2] != (0, 1):
        raise StructuralError("tripartite objective measures subsystems 0 then 1")
    return objective_npartite(state, tree)


def objective_bipartite_two_meas(state: QState, tree: MeasurementTree) -> float:
    """Two-measurement bipartite form S_{B|A}(rho_m2) - S_{B|A}(rho);
    its minimum over trees equals the minimized single-measurement form."""
    if state.n_subsystems != 2:
        raise StructuralError("two-measurement objective is bipartite only")
    if tree.measured != (0, 1):
        raise StructuralError("two-measurement objective measures both qubits")
    from .measure import apply_tree

    rho2, _ = apply_tree(state, tree, 2)
    return flux.cond_entropy(rho2, (1,), (0,)) - flux.cond_entropy(state, (1,), (0,))


def _x_log2_x(values: np.ndarray) -> np.ndarray:
    safe = np.where(values > ENTROPY_EIGENVALUE_CLAMP, values, 1.0)
    return np.where(values > ENTROPY_EIGENVALUE_CLAMP, values * np.log2(safe), 0.0)


def _avg_entropy_qubit(blocks: np.ndarray) -> np.ndarray:
    """sum over branches of p * S(block / p) for unnormalized 2x2 blocks,
    via closed-form eigenvalues."""
    a = blocks[..., 0, 0].real
    d = blocks[..., 1, 1].real
    off = blocks[..., 0, 1]
    trace = a + d
    det = a * d - (off.real ** 2 + off.imag ** 2)
    disc = np.sqrt(np.maximum(trace * trace - 4.0 * det, 0.0))
    hi = (trace + disc) / 2.0
    lo = (trace - disc) / 2.0
    per_branch = _x_log2_x(trace) - _x_log2_x(hi) - _x_log2_x(lo)
    return per_branch.sum(axis=-1)


def _avg_entropy_block(blocks: np.ndarray) -> np.ndarray:
    """Same as :func:`_avg_entropy_qubit` for unnormalized blocks of any size."""
    vals = np.linalg.eigvalsh(blocks)
    trace = vals.sum(axis=-1)
    return (_x_log2_x(trace) - _x_log2_x(vals).sum(axis=-1)).sum(axis=-1)


def _node_vectors(chunk: np.ndarray, depth: int) -> np.ndarray:
    """Basis vectors (outcome x component) for every depth-``depth`` node,
    batched over the parameter rows of ``chunk``."""
    n_paths = 2 ** depth
    idx = (n_paths - 1) + np.arange(n_paths)
    theta = chunk[:, 2 * idx]
    phi = chunk[:, 2 * idx + 1]
    phase = np.exp(1j * phi)
    vectors = np.empty(theta.shape + (2, 2), dtype=complex)
    vectors[..., 0, 0] = np.cos(theta)
    vectors[..., 0, 1] = phase * np.sin(theta)
    vectors[..., 1, 0] = np.sin(theta)
    vectors[..., 1, 1] = -phase * np.cos(theta)
    return vectors


def _measure_step(branches: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Project the leading qubit of every unnormalized branch onto both basis
    vectors; branch count doubles, qubit dimension drops out."""
    nb = branches.shape[0]
    half = branches.shape[-1] // 2
    blocks = branches.reshape(nb, -1, 2, half, 2, half)
    return np.einsum(
        "npjm,npmrls,npjl->npjrs", vectors.conj(), blocks, vectors, optimize=True
    ).reshape(nb, -1, half, half)


class _MeasuredEntropyObjective:
    """Batched discord integrand over flat angle vectors.

    Walks the measurement chain once per evaluation, keeping every outcome
    branch unnormalized (trace = path probability) so that entropy averages
    reduce to x log2 x sums; all branch contractions are batched numpy ops.
    Agrees with :func:`objective_npartite` on the corresponding tree.
    """

    def __init__(self, state: QState, level: int):
        n = state.n_subsystems
        if not 2 <= level <= n:
            raise StructuralError(f"level must lie in [2, {n}], got {level}")
        for pos in range(level - 1):
            if state.dims[pos] != 2:
                raise StructuralError(f"measured subsystem {pos} is not a qubit")
        self.level = level
        self.n_nodes = node_count(level - 1)
        self.rho = np.asarray(state.matrix)
        self.base = -(entropy(state) - subsystem_entropy(state, (0,)))

    def __call__(self, x) -> float:
        return float(self.evaluate_many(np.asarray(x, dtype=float)[None, :])[0])

    def evaluate_many(self, params_matrix: np.ndarray) -> np.ndarray:
        params_matrix = np.asarray(params_matrix, dtype=float)
        out = np.empty(len(params_matrix))
        for start in range(0, len(params_matrix), _EVAL_CHUNK):
            stop = min(start + _EVAL_CHUNK, len(params_matrix))
            out[start:stop] = self._chunk(params_matrix[start:stop])
        return out

    def _chunk(self, chunk: np.ndarray) -> np.ndarray:
        nb = len(chunk)
        if chunk.shape[1] != 2 * self.n_nodes:
            raise StructuralError(
                f"expected {2 * self.n_nodes} angles per row, got {chunk.shape[1]}"
            )
        value = np.full(nb, self.base)
        branches = np.broadcast_to(self.rho, (nb, 1) + self.rho.shape)
        for step in range(1, self.level):
            branches = _measure_step(branches, _node_vectors(chunk, step - 1))
            half = branches.shape[-1]
            if step < self.level - 1:
                quarter = half // 2
                six = branches.reshape(nb, -1, 2, quarter, 2, quarter)
                marginals = np.einsum("npacbc->npab", six)
                value += _avg_entropy_qubit(marginals)
            elif half == 2:
                value += _avg_entropy_qubit(branches)
            else:
                value += _avg_entropy_block(branches)
        return value


class _TwoMeasurementObjective:
    """Batched two-measurement bipartite integrand S_{B|A}(rho_m2) - S_{B|A}(rho).

    On the fully measured (hence classical) state the conditional entropy is
    the Shannon conditional entropy of the joint outcome distribution.
    """

    def __init__(self, state: QState):
        if state.n_subsystems != 2 or state.dims != (2, 2):
            raise StructuralError("two-measurement objective needs a 2-qubit state")
        self.n_nodes = node_count(2)
        self.rho = np.asarray(state.matrix)
        self.base = -(entropy(state) - subsystem_entropy(state, (0,)))

    def __call__(self, x) -> float:
        return float(self.evaluate_many(np.asarray(x, dtype=float)[None, :])[0])

    def evaluate_many(self, params_matrix: np.ndarray) -> np.ndarray:
        chunk = np.asarray(params_matrix, dtype=float)
        branches = np.broadcast_to(self.rho, (len(chunk), 1, 4, 4))
        probs = []
        for step in (1, 2):
            branches = _measure_step(branches, _node_vectors(chunk, step - 1))
            probs.append(np.trace(branches, axis1=-2, axis2=-1).real)
        shannon_joint = -_x_log2_x(probs[1]).sum(axis=-1)
        shannon_first = -_x_log2_x(probs[0]).sum(axis=-1)
        return shannon_joint - shannon_first + self.base


class _ScaledObjective:
    """Multiply an objective by a constant so refinement near a shallow
    minimum sees values well above the simplex spread tolerance."""

    def __init__(self, objective, scale: float):
        self._objective = objective
        self.scale = scale

    def __call__(self, x) -> float:
        return self.scale * self._objective(x)

    def evaluate_many(self, params_matrix):
        return self.scale * self._objective.evaluate_many(params_matrix)


def _normalize_order(measured_order, n: int) -> tuple[int, ...]:
    if measured_order is None:
        return tuple(range(n))
    order = [int(i) for i in measured_order]
    if len(set(order)) != len(order) or any(not 0 <= i < n for i in order):
        raise StructuralError(f"measurement order {order} is not a valid selection")
    order += [i for i in range(n) if i not in order]
    return tuple(order)


def _minimize(objective, n_nodes: int, cfg: OptimizerConfig):
    """Grid-plus-simplex minimization followed by rescaled polish passes.

    Returns the best value and params plus bookkeeping for diagnostics."""
    outcome = optimize(objective, n_nodes, cfg)
    evaluations = outcome.evaluations
    trace = [outcome.best_value]
    best_value = outcome.best_value
    best_params = outcome.best_params
    converged = outcome.converged
    restarts = 0
    for _ in range(_POLISH_PASSES):
        # Rescale so a near-zero optimum is resolved far below the simplex
        # spread tolerance; the reported value is always the true objective.
        scale = 1.0 / max(abs(best_value), 1e-4)
        polished = simplex_refine(_ScaledObjective(objective, scale), best_params, cfg)
        evaluations += polished.evaluations
        restarts += 1
        polished_value = polished.best_value / scale
        trace.append(polished_value)
        if polished_value < best_value:
            best_value = polished_value
            best_params = polished.best_params
            converged = polished.converged
        else:
            break
    diagnostics = {
        "evaluations": evaluations,
        "restarts": restarts,
        "converged": converged,
        "grid_best": outcome.grid_best,
        "best_objective_trace": trace,
    }
    return best_value, best_params, diagnostics


def discord(
    state: QState,
    measured_order=None,
    level: int | None = None,
    config: OptimizerConfig | None = None,
) -> DiscordResult:
    """Minimize the level-N discord objective over measurement trees.

    ``measured_order`` lists subsystems in measurement order (a prefix is
    enough; remaining subsystems follow in ascending position).  The first
    ``level - 1`` of them are measured; everything else forms the final
    unmeasured party.  Returns the best value found even when the simplex
    did not converge, flagged through ``diagnostics['converged']``.
    """
    n = state.n_subsystems
    level = n if level is None else int(level)
    order = _normalize_order(measured_order, n)
    if order != tuple(range(n)):
        state = permute_subsystems(state, order)
    objective = _MeasuredEntropyObjective(state, level)
    cfg = config or OptimizerConfig()
    best_value, best_params, diagnostics = _minimize(objective, objective.n_nodes, cfg)

    decomposition = None
    if level == 3 and n == 3:
        tree = tree_from_params(state.dims, tuple(range(level - 1)), best_params)
        delta_ab_c, delta_ac_b = flux.delta_cond_discord(state, tree)
        decomposition = {
            "Delta_AB_C": delta_ab_c,
            "Delta_AC_B": delta_ac_b,
            "Delta_BC_PiA": flux.delta_post_discord(state, tree),
            "Delta_ABC": flux.delta_monogamy(state, tree),
        }

    diagnostics.update({"level": level, "measured_order": list(order)})
    return DiscordResult(
        value=best_value,
        optimal_params=best_params,
        decomposition=decomposition,
        diagnostics=diagnostics,
    )


def discord_two_measurement(
    state: QState, config: OptimizerConfig | None = None
) -> DiscordResult:
    """Minimize the two-measurement bipartite form over full-depth trees.

    Equivalent after minimization to :func:`discord` at level 2 on the same
    two-qubit state; kept as an executable equivalence check.
    """
    objective = _TwoMeasurementObjective(state)
    best_value, best_params, diagnostics = _minimize(
        objective, objective.n_nodes, config or OptimizerConfig()
    )
    diagnostics.update({"level": 2, "measured_order": [0, 1]})
    return DiscordResult(
        value=best_value,
        optimal_params=best_params,
        decomposition=None,
        diagnostics=diagnostics,
    )


def result_to_json(result: DiscordResult) -> str:
    payload = {
        "value": result.value,
        "params": json.loads(params_to_json(result.optimal_params)),
        "decomposition": result.decomposition,
        "diagnostics": result.diagnostics,
    }
    return json.dumps(payload, indent=2)


def result_from_json(text: str) -> DiscordResult:
    payload = json.loads(text)
    return DiscordResult(
        value=payload["value"],
        optimal_params=params_from_json(json.dumps(payload["params"])),
        decomposition=payload["decomposition"],
        diagnostics=payload["diagnostics"],
    )
