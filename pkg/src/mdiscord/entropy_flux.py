"""Conditional entropies, mutual informations, and measurement-induced
entropy changes.

Naming follows the canonical ledger keys used in CSV output: subsystems of a
tripartite state are A, B, C at positions 0, 1, 2, the tree measures A then
B, and quantities evaluated on the once- and twice-measured states carry the
stage suffixes m1 and m2.

Every "delta" is computed two independent ways, as a difference of mutual
informations across a measurement and as a combination of unminimized
discords; :func:`flux_report` cross-checks the two routes on every call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .measure import PROB_EPS, MeasurementTree, apply_tree
from .qstate import (
    QState,
    StructuralError,
    SubsetSpec,
    as_subset,
    entropy,
    subsystem_entropy,
)

IDENTITY_TOL = 1e-9

STAGES = ("pre", "after_first", "after_second")
STAGE_SUFFIX = {"pre": "pre", "after_first": "m1", "after_second": "m2"}

LEDGER_KEYS_TRIPARTITE = (
    "S_A_BC", "S_B_AC", "S_C_AB", "I_AB_C", "I_AC_B", "I_BC_A", "I_ABC",
)
DELTA_KEYS_TRIPARTITE = (
    "d_A_BC", "Delta_AB_C", "Delta_AC_B", "Delta_BC_PiA", "Delta_ABC",
    "Delta_BPiAC", "dS_PiA", "dS_B_PiA",
)
LEDGER_KEYS_BIPARTITE = ("S_A_B", "S_B_A", "I_AB")
DELTA_KEYS_BIPARTITE = ("d_A_B", "dS_PiA", "dS_PiA_B")


class FluxConsistencyError(RuntimeError):
    """The two defining routes for a delta disagreed beyond IDENTITY_TOL."""


@dataclass(frozen=True)
class FluxReport:
    """Ledger of entropies at one stage plus the deltas incurred reaching it."""

    stage: str
    ledger: dict[str, float]
    deltas: dict[str, float]


def _complement(n: int, subset: SubsetSpec) -> tuple[int, ...]:
    return tuple(i for i in range(n) if i not in subset.indices)


def cond_entropy(
    state: QState,
    target: SubsetSpec | Iterable[int],
    given: SubsetSpec | Iterable[int],
) -> float:
    """S_{target|given} = S_{target u given} - S_{given}; can be negative."""
    target = as_subset(target, state.n_subsystems)
    given = as_subset(given, state.n_subsystems)
    if set(target.indices) & set(given.indices):
        raise StructuralError("target and given subsets overlap")
    joint = tuple(sorted(target.indices + given.indices))
    return subsystem_entropy(state, joint) - subsystem_entropy(state, given)


def cond_entropy_measured(
    state: QState,
    tree: MeasurementTree,
    depth: int,
    target: SubsetSpec | Iterable[int] | None = None,
) -> float:
    """Probability-weighted entropy of the depth-length branch states.

    With ``target=None`` each branch contributes its full entropy, which is
    the conditional entropy of everything left unmeasured (measured factors
    in a branch are pure).  A ``target`` subset restricts each branch to the
    named subsystems before taking its entropy.  Branches below PROB_EPS
    contribute exactly zero.
    """
    if target is not None:
        target = as_subset(target, state.n_subsystems)
    _, branches = apply_tree(state, tree, depth)
    total = 0.0
    for branch in branches:
        if branch.probability < PROB_EPS or branch.post_state is None:
            continue
        if target is None:
            total += branch.probability * entropy(branch.post_state)
        else:
            total += branch.probability * subsystem_entropy(branch.post_state, target)
    return total


def mutual_info(
    state: QState,
    a: SubsetSpec | Iterable[int],
    b: SubsetSpec | Iterable[int],
) -> float:
    """I_{a:b} = S_a + S_b - S_{ab}."""
    a = as_subset(a, state.n_subsystems)
    b = as_subset(b, state.n_subsystems)
    if set(a.indices) & set(b.indices):
        raise StructuralError("mutual information subsets overlap")
    joint = tuple(sorted(a.indices + b.indices))
    return (
        subsystem_entropy(state, a)
        + subsystem_entropy(state, b)
        - subsystem_entropy(state, joint)
    )


def cond_mutual_info(
    state: QState,
    a: SubsetSpec | Iterable[int],
    b: SubsetSpec | Iterable[int],
    given: SubsetSpec | Iterable[int],
) -> float:
    """I_{a:b|given} = S_{a|given} - S_{a|b u given}; non-negative by strong
    subadditivity."""
    a = as_subset(a, state.n_subsystems)
    b = as_subset(b, state.n_subsystems)
    given = as_subset(given, state.n_subsystems)
    if set(a.indices) & set(b.indices) or set(a.indices) & set(given.indices) \
            or set(b.indices) & set(given.indices):
        raise StructuralError("conditional mutual information subsets overlap")
    b_given = tuple(sorted(b.indices + given.indices))
    return cond_entropy(state, a, given) - cond_entropy(state, a, b_given)


def tripartite_mutual_info(state: QState) -> float:
    """I_{A:B:C} = I_{A:C} - I_{A:C|B} for a three-subsystem state; its sign
    is unconstrained."""
    _require_tripartite(state)
    return mutual_info(state, (0,), (2,)) - cond_mutual_info(state, (0,), (2,), (1,))


def _require_tripartite(state: QState):
    if state.n_subsystems != 3:
        raise StructuralError(
            f"operation needs exactly 3 subsystems, state has {state.n_subsystems}"
        )


def _require_two_level_tree(tree: MeasurementTree):
    if tree.measured[:2] != (0, 1):
        raise StructuralError(
            "tripartite flux quantities need a tree measuring subsystems 0 then 1"
        )


def _measured_states(state, tree):
    rho1, _ = apply_tree(state, tree, 1)
    rho2, _ = apply_tree(state, tree, 2)
    return rho1, rho2


def _cmi_family(state: QState) -> dict[str, float]:
    return {
        "I_AB_C": cond_mutual_info(state, (0,), (1,), (2,)),
        "I_AC_B": cond_mutual_info(state, (0,), (2,), (1,)),
        "I_BC_A": cond_mutual_info(state, (1,), (2,), (0,)),
        "I_ABC": tripartite_mutual_info(state),
    }


@dataclass(frozen=True)
class MeasuredMutualInfo:
    """Conditional and tripartite mutual informations of the once-measured
    (after_first) and twice-measured (after_second) states."""

    after_first: dict[str, float]
    after_second: dict[str, float]


def measured_mutual_infos(state: QState, tree: MeasurementTree) -> MeasuredMutualInfo:
    _require_tripartite(state)
    _require_two_level_tree(tree)
    rho1, rho2 = _measured_states(state, tree)
    return MeasuredMutualInfo(
        after_first=_cmi_family(rho1),
        after_second=_cmi_family(rho2),
    )


def d_unminimized(
    state: QState,
    tree: MeasurementTree,
    measured_block: SubsetSpec | Iterable[int],
    rest: SubsetSpec | Iterable[int],
) -> float:
    """Unminimized discord d = S_{rest|measured-with-measurement} -
    S_{rest|measured}; non-negative for every tree."""
    measured_block = as_subset(measured_block, state.n_subsystems)
    rest = as_subset(rest, state.n_subsystems)
    if measured_block.indices != tree.measured[: len(measured_block)]:
        raise StructuralError(
            "measured_block must be the leading measured subsystems of the tree"
        )
    if set(measured_block.indices) & set(rest.indices):
        raise StructuralError("measured_block and rest overlap")
    depth = len(measured_block)
    return (
        cond_entropy_measured(state, tree, depth, target=rest)
        - cond_entropy(state, rest, measured_block)
    )


def delta_cond_discord(state: QState, tree: MeasurementTree) -> tuple[float, float]:
    """Conditional discords (Delta_{A;B|C}, Delta_{A;C|B}): the drop each
    conditional mutual information suffers under the first measurement."""
    _require_tripartite(state)
    _require_two_level_tree(tree)
    rho1, _ = apply_tree(state, tree, 1)
    delta_ab_c = cond_mutual_info(state, (0,), (1,), (2,)) - cond_mutual_info(
        rho1, (0,), (1,), (2,)
    )
    delta_ac_b = cond_mutual_info(state, (0,), (2,), (1,)) - cond_mutual_info(
        rho1, (0,), (2,), (1,)
    )
    return delta_ab_c, delta_ac_b


def delta_post_discord(state: QState, tree: MeasurementTree) -> float:
    """Delta_{B;C|PiA}: the B:C conditional discord remaining after the first
    measurement, i.e. the drop of I_{B:C|A} under the second one."""
    _require_tripartite(state)
    _require_two_level_tree(tree)
    rho1, rho2 = _measured_states(state, tree)
    return cond_mutual_info(rho1, (1,), (2,), (0,)) - cond_mutual_info(
        rho2, (1,), (2,), (0,)
    )


def delta_monogamy(state: QState, tree: MeasurementTree) -> float:
    """Delta_{A:B:C}: change of the tripartite mutual information under the
    first measurement; negative for monogamous correlations, positive for
    polygamous ones."""
    _require_tripartite(state)
    _require_two_level_tree(tree)
    rho1, _ = apply_tree(state, tree, 1)
    return tripartite_mutual_info(state) - tripartite_mutual_info(rho1)


def _check(label: str, first: float, second: float):
    if abs(first - second) > IDENTITY_TOL:
        raise FluxConsistencyError(
            f"{label}: routes disagree by {abs(first - second):.3e}"
        )


def _tripartite_reports(state, tree) -> tuple[FluxReport, ...]:
    rho1, rho2 = _measured_states(state, tree)

    def ledger(rho):
        entries = {
            "S_A_BC": cond_entropy(rho, (0,), (1, 2)),
            "S_B_AC": cond_entropy(rho, (1,), (0, 2)),
            "S_C_AB": cond_entropy(rho, (2,), (0, 1)),
        }
        entries.update(_cmi_family(rho))
        return entries

    pre, m1, m2 = ledger(state), ledger(rho1), ledger(rho2)

    d_a_b = d_unminimized(state, tree, (0,), (1,))
    d_a_c = d_unminimized(state, tree, (0,), (2,))
    d_a_bc = d_unminimized(state, tree, (0,), (1, 2))
    delta_ab_c, delta_ac_b = delta_cond_discord(state, tree)
    delta_abc = delta_monogamy(state, tree)
    delta_bc_pia = delta_post_discord(state, tree)
    delta_bpiac = m1["I_ABC"] - m2["I_ABC"]
    ds_pia = subsystem_entropy(rho1, (0,)) - subsystem_entropy(state, (0,))
    ds_b_pia = cond_entropy(rho2, (1,), (0,)) - cond_entropy(rho1, (1,), (0,))

    # Each delta from its discord decomposition; must match the mutual
    # information route used above.
    _check("Delta_AB_C", delta_ab_c, d_a_bc - d_a_c)
    _check("Delta_AC_B", delta_ac_b, d_a_bc - d_a_b)
    _check("Delta_ABC", delta_abc, d_a_b + d_a_c - d_a_bc)
    d_b_piac = cond_entropy(rho2, (0, 2), (1,)) - cond_entropy(rho1, (0, 2), (1,))
    d_b_pia = cond_entropy(rho2, (0,), (1,)) - cond_entropy(rho1, (0,), (1,))
    d_bc_after = cond_entropy(rho2, (2,), (1,)) - cond_entropy(rho1, (2,), (1,))
    _check("Delta_BC_PiA", delta_bc_pia, d_b_piac - d_b_pia)
    _check("Delta_BPiAC", delta_bpiac, d_b_pia + d_bc_after - d_b_piac)
    _check("d_A_BC decomposition", d_a_bc, delta_ab_c + delta_ac_b + delta_abc)
    _check(
        "Delta_BC_PiA conditional entropy form",
        delta_bc_pia,
        cond_entropy(rho2, (2,), (0, 1)) - cond_entropy(rho1, (2,), (0, 1)),
    )

    m1_deltas = {
        "d_A_BC": d_a_bc,
        "Delta_AB_C": delta_ab_c,
        "Delta_AC_B": delta_ac_b,
        "Delta_ABC": delta_abc,
        "dS_PiA": ds_pia,
    }
    m2_deltas = {
        "Delta_BC_PiA": delta_bc_pia,
        "Delta_BPiAC": delta_bpiac,
        "dS_B_PiA": ds_b_pia,
    }
    return (
        FluxReport("pre", pre, {}),
        FluxReport("after_first", m1, m1_deltas),
        FluxReport("after_second", m2, m2_deltas),
    )


def _bipartite_reports(state, tree) -> tuple[FluxReport, ...]:
    rho1, _ = apply_tree(state, tree, 1)

    def ledger(rho):
        return {
            "S_A_B": cond_entropy(rho, (0,), (1,)),
            "S_B_A": cond_entropy(rho, (1,), (0,)),
            "I_AB": mutual_info(rho, (0,), (1,)),
        }

    pre, m1 = ledger(state), ledger(rho1)
    d_a_b = d_unminimized(state, tree, (0,), (1,))
    ds_pia = subsystem_entropy(rho1, (0,)) - subsystem_entropy(state, (0,))
    ds_pia_b = m1["S_A_B"] - pre["S_A_B"]
    _check("dS_PiA_B", ds_pia_b, d_a_b + ds_pia)
    _check("d_A_B mutual information form", d_a_b, pre["I_AB"] - m1["I_AB"])
    return (
        FluxReport("pre", pre, {}),
        FluxReport("after_first", m1, {"d_A_B": d_a_b, "dS_PiA": ds_pia,
                                       "dS_PiA_B": ds_pia_b}),
    )


def flux_report(state: QState, tree: MeasurementTree) -> tuple[FluxReport, ...]:
    """Full entropy-flux ledger across the measurement stages.

    Tripartite states (tree measuring subsystems 0 then 1) get three stages:
    pre, after_first, after_second.  Bipartite states get pre and
    after_first.  Raises FluxConsistencyError if any delta's two defining
    routes disagree beyond 1e-9.
    """
    if state.n_subsystems == 3:
        _require_two_level_tree(tree)
        return _tripartite_reports(state, tree)
    if state.n_subsystems == 2:
        if tree.measured[0] != 0:
            raise StructuralError("bipartite flux needs a tree measuring subsystem 0")
        return _bipartite_reports(state, tree)
    raise StructuralError("flux reports cover bipartite and tripartite states only")


def _format_value(x: float) -> str:
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return f"{x:.12g}"


def flux_csv(reports: tuple[FluxReport, ...]) -> tuple[list[str], list[str]]:
    """Flatten reports into one CSV header/row pair with stage-suffixed
    canonical columns.  Delta columns at stages whose transition has not
    happened hold 0."""
    tripartite = "S_A_BC" in reports[0].ledger
    ledger_keys = LEDGER_KEYS_TRIPARTITE if tripartite else LEDGER_KEYS_BIPARTITE
    delta_keys = DELTA_KEYS_TRIPARTITE if tripartite else DELTA_KEYS_BIPARTITE
    by_stage = {report.stage: report for report in reports}
    header, row = [], []
    for name in ledger_keys + delta_keys:
        for stage in STAGES if tripartite else STAGES[:2]:
            header.append(f"{name}_{STAGE_SUFFIX[stage]}")
            report = by_stage.get(stage)
            if report is None:
                row.append(_format_value(0.0))
            elif name in report.ledger:
                row.append(_format_value(report.ledger[name]))
            else:
                row.append(_format_value(report.deltas.get(name, 0.0)))
    return header, row
