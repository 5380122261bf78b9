"""Sparse multi-register pure states and the primitive operations on them.

A basis label carries three qubits (subroutine switch ``q1``, computer switch
``q2``, computer output ``q3``) plus two unbounded integer registers: a tally
counter and an environment mode index.  States map labels to complex
amplitudes and may be sub-normalised after post-selection.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Mapping
from typing import NamedTuple

import numpy as np

QUBITS = ("q1", "q2", "q3")
UNITARY_ATOL = 1e-12


class Label(NamedTuple):
    q1: int
    q2: int
    q3: int
    tally: int = 0
    env: int = 0

    def with_bit(self, register: str, bit: int) -> "Label":
        return self._replace(**{register: bit})

    def __str__(self) -> str:
        bits = f"{self.q1}{self.q2}{self.q3}"
        if self.tally:
            bits += f",t={self.tally}"
        if self.env:
            bits += f",e={self.env}"
        return f"|{bits}>"


class PureState(Mapping):
    """Immutable mapping ``Label -> complex``.

    Entries are stored as given; exact zeros survive unless :meth:`pruned`
    is called.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        store: dict[Label, complex] = {}
        for label, amp in items:
            label = Label(*label)
            amp = complex(amp)
            if not (np.isfinite(amp.real) and np.isfinite(amp.imag)):
                raise ValueError(f"non-finite amplitude on {label}")
            store[label] = store.get(label, 0j) + amp
        self._terms = store

    @classmethod
    def basis(cls, q1: int = 0, q2: int = 0, q3: int = 0, tally: int = 0, env: int = 0) -> "PureState":
        return cls({Label(q1, q2, q3, tally, env): 1.0})

    @classmethod
    def from_dense(cls, vec) -> "PureState":
        """Build from a length-8 vector indexed ``4*q1 + 2*q2 + q3``."""
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (8,):
            raise ValueError("dense vector must have length 8")
        return cls({Label(i >> 2 & 1, i >> 1 & 1, i & 1): vec[i] for i in range(8) if vec[i] != 0})

    def to_dense(self) -> np.ndarray:
        out = np.zeros(8, dtype=complex)
        for label, amp in self._terms.items():
            if label.tally or label.env:
                raise ValueError("state has tally/env content; no dense 8-vector form")
            out[4 * label.q1 + 2 * label.q2 + label.q3] += amp
        return out

    def __getitem__(self, label) -> complex:
        return self._terms[Label(*label)]

    def __iter__(self) -> Iterator[Label]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def amplitude(self, *label) -> complex:
        """Amplitude of a label, zero if absent."""
        if len(label) == 1 and isinstance(label[0], tuple):
            label = label[0]
        return self._terms.get(Label(*label), 0j)

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._terms.values()))

    def scaled(self, factor: complex) -> "PureState":
        return PureState({k: factor * v for k, v in self._terms.items()})

    def map_labels(self, fn: Callable[[Label], Label]) -> "PureState":
        """Relabel every term; colliding labels have their amplitudes added."""
        return PureState((fn(k), v) for k, v in self._terms.items())

    def filter(self, keep: Callable[[Label], bool]) -> "PureState":
        return PureState({k: v for k, v in self._terms.items() if keep(k)})

    def pruned(self, threshold: float = 0.0) -> "PureState":
        """Drop labels with ``|amplitude| <= threshold``."""
        return PureState({k: v for k, v in self._terms.items() if abs(v) > threshold})

    def __add__(self, other: "PureState") -> "PureState":
        return PureState(list(self._terms.items()) + list(other.items()))

    def __sub__(self, other: "PureState") -> "PureState":
        return self + other.scaled(-1)

    def max_abs_diff(self, other: Mapping) -> float:
        keys = set(self._terms) | set(other)
        if not keys:
            return 0.0
        return max(abs(self.amplitude(k) - other.get(k, 0j)) for k in keys)

    def allclose(self, other: Mapping, atol: float = 1e-12) -> bool:
        return self.max_abs_diff(other) <= atol

    def __repr__(self) -> str:
        if not self._terms:
            return "PureState(0)"
        parts = [f"({v.real:+.6g}{v.imag:+.6g}j){k}" for k, v in sorted(self._terms.items())]
        return "PureState(" + " ".join(parts) + ")"


def rotation(theta: float) -> np.ndarray:
    """Real rotation ``[[cos, -sin], [sin, cos]]`` in the computational basis."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def check_unitary(u, atol: float = UNITARY_ATOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=atol):
        raise ValueError("matrix is not unitary")
    return u


def _check_target(target: str) -> None:
    if target not in QUBITS:
        raise ValueError(f"target must be one of {QUBITS}, got {target!r}")


def apply_one_qubit(
    state: PureState,
    target: str,
    u,
    control: Callable[[Label], bool] | None = None,
) -> PureState:
    """Apply ``u`` to one qubit on the labels selected by ``control``.

    ``control`` must not depend on the target bit, otherwise the map would not
    be unitary on the controlled subspace; this is checked per label.
    """
    _check_target(target)
    u = check_unitary(u)
    out: dict[Label, complex] = {}
    for label, amp in state.items():
        if control is not None:
            on = control(label)
            if on != control(label.with_bit(target, 1 - getattr(label, target))):
                raise ValueError("control predicate reads the target bit")
        else:
            on = True
        if not on:
            out[label] = out.get(label, 0j) + amp
            continue
        bit = getattr(label, target)
        for new_bit in (0, 1):
            coeff = u[new_bit, bit]
            if coeff != 0:
                new = label.with_bit(target, new_bit)
                out[new] = out.get(new, 0j) + coeff * amp
    return PureState(out)


def measure(state: PureState, target: str, outcome: int) -> tuple[PureState, float]:
    """Project ``target`` onto ``outcome`` without renormalising.

    Returns the projected state and the conditional probability
    ``|P psi|^2 / |psi|^2``.
    """
    _check_target(target)
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    total = state.norm2()
    if total == 0.0:
        raise ValueError("cannot measure a zero-norm state")
    projected = state.filter(lambda lab: getattr(lab, target) == outcome)
    return projected, projected.norm2() / total


def project(state: PureState, target: str, outcome: int) -> PureState:
    """Projector only; zero-norm inputs are allowed (used for history vectors)."""
    _check_target(target)
    return state.filter(lambda lab: getattr(lab, target) == outcome)


def inner(a: Mapping, b: Mapping) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    if len(a) > len(b):
        return sum((np.conj(a.get(k, 0j)) * v for k, v in b.items()), 0j)
    return sum((np.conj(v) * b.get(k, 0j) for k, v in a.items()), 0j)
