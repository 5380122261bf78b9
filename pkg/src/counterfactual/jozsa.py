"""Two-qubit counterfactual protocol with an expandable computer.

Qubit 1 is the computer switch, qubit 2 receives the output.  Vectors are
indexed ``2*q1 + q2``.  The computer flips qubit 2 when qubit 1 is on and the
output is 1; internally it can be expanded into a controlled Hadamard, a
sign change on output 1, and a second controlled Hadamard.  Terms created
with qubit 2 set to 1 by the first Hadamard carry a tilde.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qstate import Label, PureState

SQ2 = np.sqrt(2.0)

# gate sequence of the expanded x = 1 protocol; placements sit between gates
PLACEMENTS = {
    "start": 0,
    "before-computer": 1,
    "mid-internal": 2,
    "after-pi": 3,
    "after-computer": 4,
    "end": 5,
}


def u_gate() -> np.ndarray:
    u = np.zeros((4, 4))
    u[:, 0] = [1 / SQ2, 0, 1 / SQ2, 0]    # |00> -> |0+1>|0>/sqrt2
    u[:, 2] = [-1 / SQ2, 0, 1 / SQ2, 0]   # |10> -> |1-0>|0>/sqrt2
    u[1, 1] = u[3, 3] = 1.0
    return u


def computer(x: int) -> np.ndarray:
    """Reversible computer: ``q2 ^= x`` on the ``q1 = 1`` labels."""
    if x not in (0, 1):
        raise ValueError("computer output must be 0 or 1")
    c = np.eye(4)
    if x == 1:
        c[[2, 3]] = c[[3, 2]]
    return c


def controlled_hadamard() -> np.ndarray:
    h = np.eye(4)
    h[2:, 2:] = np.array([[1, 1], [1, -1]]) / SQ2
    return h


def output_sign() -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, -1.0])


def expanded_gates() -> list[np.ndarray]:
    return [u_gate(), controlled_hadamard(), output_sign(), controlled_hadamard(), u_gate()]


def _to_state(vec) -> PureState:
    return PureState({Label(i >> 1, i & 1, 0): vec[i] for i in range(4) if vec[i] != 0})


def run_protocol_vector(x: int) -> np.ndarray:
    v = np.zeros(4)
    v[0] = 1.0
    return u_gate() @ computer(x) @ u_gate() @ v


def run_protocol(x: int) -> PureState:
    """``U``, computer, ``U`` applied to ``|00>``; labels use ``(q1, q2)`` with ``q3 = 0``."""
    return _to_state(run_protocol_vector(x))


@dataclass(frozen=True)
class TaggedTerm:
    lineage: str
    q1: int
    q2: int
    tilde: bool


class TaggedState(dict):
    """``TaggedTerm -> amplitude``; terms of different lineage are never merged."""

    def add(self, term: TaggedTerm, amp: float) -> None:
        self[term] = self.get(term, 0.0) + amp

    def by_tag(self) -> dict[tuple[int, int, bool], list[tuple[str, float]]]:
        out: dict = {}
        for t, a in self.items():
            out.setdefault((t.q1, t.q2, t.tilde), []).append((t.lineage, a))
        return out

    def amplitude(self, q1: int, q2: int, tilde: bool) -> float:
        return sum(a for t, a in self.items() if (t.q1, t.q2, t.tilde) == (q1, q2, tilde))

    def erase_tags(self) -> np.ndarray:
        v = np.zeros(4)
        for t, a in self.items():
            v[2 * t.q1 + t.q2] += a
        return v


def _apply(state: TaggedState, gate: np.ndarray, birth: bool = False) -> TaggedState:
    out = TaggedState()
    for t, a in state.items():
        col = gate[:, 2 * t.q1 + t.q2]
        for j in np.nonzero(col)[0]:
            q1, q2 = int(j >> 1), int(j & 1)
            tilde, lineage = t.tilde, t.lineage
            if birth and t.q1 == 1 and t.q2 == 0:
                tilde = q2 == 1
                lineage = t.lineage + ("~" if tilde else "0")
            out.add(TaggedTerm(lineage, q1, q2, tilde), a * col[j])
    return TaggedState({k: v for k, v in out.items() if v != 0})


def run_internal_expansion(x: int = 1) -> TaggedState:
    """Final tagged state of the expanded protocol.

    Lineages: ``"s"`` is the switch-off branch, ``"s0"``/``"s~"`` the
    switch-on branch after the first Hadamard leaves qubit 2 at 0 or sets it
    to 1 (tilded).
    """
    if x != 1:
        raise ValueError("the internal expansion is only defined for computer output 1")
    u, h, pi = u_gate(), controlled_hadamard(), output_sign()
    state = TaggedState({TaggedTerm("s", 0, 0, False): 1.0})
    state = _apply(state, u)
    state = _apply(state, h, birth=True)
    state = _apply(state, pi)
    state = _apply(state, h)
    return _apply(state, u)


@dataclass(frozen=True)
class WeakValue:
    value: complex
    overlap: complex
    placement: str

    def as_dict(self) -> dict:
        return {"value_re": self.value.real, "value_im": self.value.imag,
                "overlap_abs": abs(self.overlap), "placement": self.placement}


PROJECTORS = {
    "switch-on": np.diag([0.0, 0.0, 1.0, 1.0]),
    "switch-off": np.diag([1.0, 1.0, 0.0, 0.0]),
    "output-on": np.diag([0.0, 1.0, 0.0, 1.0]),
    "output-off": np.diag([1.0, 0.0, 1.0, 0.0]),
    "identity": np.eye(4),
}


def two_state_vectors(placement: str) -> tuple[np.ndarray, np.ndarray]:
    """Forward-evolved ``|00>`` and backward-evolved ``<00|`` at ``placement``."""
    if placement not in PLACEMENTS:
        raise ValueError(f"placement must be one of {sorted(PLACEMENTS)}")
    k = PLACEMENTS[placement]
    gates = expanded_gates()
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0
    for g in gates[:k]:
        psi = g @ psi
    phi = np.zeros(4, dtype=complex)
    phi[0] = 1.0
    for g in reversed(gates[k:]):
        phi = g.conj().T @ phi
    return psi, phi


def weak_value_at_computer(projector="switch-on", placement: str = "before-computer",
                           atol: float = 1e-14) -> WeakValue:
    """``<phi|P|psi> / <phi|psi>`` for the ``x = 1`` protocol post-selected on ``|00>``."""
    proj = PROJECTORS[projector] if isinstance(projector, str) else np.asarray(projector)
    psi, phi = two_state_vectors(placement)
    overlap = np.vdot(phi, psi)
    if abs(overlap) <= atol:
        raise ZeroDivisionError("post-selection overlap vanishes")
    return WeakValue(complex(np.vdot(phi, proj @ psi) / overlap), complex(overlap), placement)
