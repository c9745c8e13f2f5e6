"""Canonical state catalog for sweeps, demos, and tests.

All mu-parameterized families are affine in mu:
build(mu) = mu * build(1) + (1 - mu) * build(0) entrywise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .qstate import QState, from_json as qstate_from_json, to_json as qstate_to_json

MU_FAMILIES = ("werner_ghz", "werner_w", "bell_mixture", "classical_quantum_mix")
FIXED_FAMILIES = ("cc_example", "ghz", "w_state", "product")
FAMILIES = MU_FAMILIES + FIXED_FAMILIES + ("explicit",)

_KET0 = np.array([1.0, 0.0])
_KET1 = np.array([0.0, 1.0])
_PLUS = np.array([1.0, 1.0]) / np.sqrt(2)
_MINUS = np.array([1.0, -1.0]) / np.sqrt(2)


def _dm(ket: np.ndarray) -> np.ndarray:
    return np.outer(ket, ket.conj())


def _kets(*labels: str) -> np.ndarray:
    """Equal superposition of computational-basis kets, e.g. _kets('000','111')."""
    digit_maps = {"0": _KET0, "1": _KET1, "+": _PLUS}
    total = 0.0
    for label in labels:
        term = np.array([1.0])
        for ch in label:
            term = np.kron(term, digit_maps[ch])
        total = total + term
    return total / np.linalg.norm(total)


def ghz_state(n_qubits: int = 3) -> QState:
    """(|0...0> + |1...1>)/sqrt(2) as a density matrix."""
    ket = _kets("0" * n_qubits, "1" * n_qubits)
    return QState((2,) * n_qubits, _dm(ket))


def w_state() -> QState:
    """(|001> + |010> + |100>)/sqrt(3)."""
    return QState((2, 2, 2), _dm(_kets("001", "010", "100")))


def bell_state() -> QState:
    """(|00> + |11>)/sqrt(2)."""
    return QState((2, 2), _dm(_kets("00", "11")))


def cc_example_state() -> QState:
    """(|00><00| + |1+><1+|)/2 tensored with |0><0|: a classically
    correlated pair plus an uncorrelated third qubit; zero discord."""
    pair = (_dm(_kets("00")) + _dm(_kets("1+"))) / 2.0
    return QState((2, 2, 2), np.kron(pair, _dm(_KET0)))


def product_state() -> QState:
    """A fixed three-qubit product state with mixed, differently oriented
    factors; zero discord for every measurement ordering."""
    factor_a = 0.8 * _dm(_KET0) + 0.2 * _dm(_KET1)
    factor_b = 0.7 * _dm(_PLUS) + 0.3 * _dm(_MINUS)
    factor_c = 0.65 * _dm(_KET0) + 0.35 * _dm(_KET1)
    return QState((2, 2, 2), np.kron(np.kron(factor_a, factor_b), factor_c))


def werner_ghz(mu: float) -> QState:
    """mu |GHZ><GHZ| + (1 - mu) I/8."""
    _check_mu(mu)
    return QState((2, 2, 2), mu * ghz_state().matrix + (1 - mu) * np.eye(8) / 8.0)


def werner_w(mu: float) -> QState:
    """mu |W><W| + (1 - mu) I/8."""
    _check_mu(mu)
    return QState((2, 2, 2), mu * w_state().matrix + (1 - mu) * np.eye(8) / 8.0)


def bell_mixture(mu: float) -> QState:
    """mu |Phi+_AB><Phi+_AB| + (1 - mu) |Phi+_AC><Phi+_AC| with the Bell pair
    on AB (third qubit |0>) resp. AC (second qubit |0>)."""
    _check_mu(mu)
    phi_ab = _dm(_kets("000", "110"))
    phi_ac = _dm(_kets("000", "101"))
    return QState((2, 2, 2), mu * phi_ab + (1 - mu) * phi_ac)


def classical_quantum_mix(mu: float) -> QState:
    """mu |000><000| + (1 - mu) |+++><+++|: a mixture of two product states
    whose discord is nonzero strictly inside (0, 1)."""
    _check_mu(mu)
    return QState((2, 2, 2), mu * _dm(_kets("000")) + (1 - mu) * _dm(_kets("+++")))


def _check_mu(mu: float):
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")


_BUILDERS = {
    "werner_ghz": werner_ghz,
    "werner_w": werner_w,
    "bell_mixture": bell_mixture,
    "classical_quantum_mix": classical_quantum_mix,
    "cc_example": cc_example_state,
    "ghz": ghz_state,
    "w_state": w_state,
    "product": product_state,
}


@dataclass(frozen=True)
class StateSpec:
    """Names a state: a catalog family (with mu where applicable) or an
    explicit density matrix."""

    family: str
    mu: float | None = None
    explicit: QState | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if (self.mu is not None) != (self.family in MU_FAMILIES):
            raise ValueError(f"family {self.family!r} takes mu iff mu-parameterized")
        if (self.explicit is not None) != (self.family == "explicit"):
            raise ValueError("explicit matrix goes with family='explicit' only")


def build(spec: StateSpec) -> QState:
    if spec.family == "explicit":
        return spec.explicit
    if spec.family in MU_FAMILIES:
        return _BUILDERS[spec.family](spec.mu)
    return _BUILDERS[spec.family]()


def spec_to_json(spec: StateSpec) -> str:
    payload: dict = {"family": spec.family}
    if spec.mu is not None:
        payload["mu"] = spec.mu
    if spec.explicit is not None:
        payload["explicit_matrix"] = json.loads(qstate_to_json(spec.explicit))
    return json.dumps(payload)


def spec_from_json(text: str) -> StateSpec:
    payload = json.loads(text)
    explicit = None
    if "explicit_matrix" in payload:
        explicit = qstate_from_json(json.dumps(payload["explicit_matrix"]))
    return StateSpec(
        family=payload["family"], mu=payload.get("mu"), explicit=explicit
    )
