"""Path-amplitude model of a nested Mach-Zehnder interferometer.

A network is an ordered list of optical elements acting on named paths.  A
beam splitter consumes two input paths and emits two output paths through a
2x2 unitary; a phase element multiplies one path in place.  The live paths
between two consecutive elements form a cross-section.  Weak values of path
projectors are evaluated at the cross-section where the path is live, from
the forward-propagated input and the backward-propagated detector state.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field, replace

import numpy as np

from .qstate import check_unitary


@dataclass(frozen=True)
class BeamSplitter:
    inputs: tuple[str, str]
    outputs: tuple[str, str]
    matrix: np.ndarray = field(compare=False)

    def __post_init__(self):
        check_unitary(self.matrix)


@dataclass(frozen=True)
class Phase:
    path: str
    phase: float


@dataclass(frozen=True)
class PathNetwork:
    source: str
    detector: str
    elements: tuple = ()

    def cross_sections(self) -> list[tuple[str, ...]]:
        """Live paths before element 0, between elements, and after the last."""
        live = [self.source]
        out = [tuple(live)]
        for el in self.elements:
            if isinstance(el, BeamSplitter):
                # an input port that is not live is an empty (vacuum) port
                live = [p for p in live if p not in el.inputs] + list(el.outputs)
            elif el.path not in live:
                raise ValueError(f"phase element on dead path {el.path!r}")
            out.append(tuple(live))
        return out

    def paths(self) -> set[str]:
        return {p for cs in self.cross_sections() for p in cs}

    def section_of(self, path: str) -> int:
        """First cross-section containing ``path``."""
        for i, cs in enumerate(self.cross_sections()):
            if path in cs:
                return i
        raise KeyError(f"unknown path {path!r}")

    def terminals(self) -> tuple[str, ...]:
        return self.cross_sections()[-1]

    def with_phase(self, path: str, delta: float) -> "PathNetwork":
        """Insert a phase element on ``path`` right at its first cross-section."""
        k = self.section_of(path)
        els = list(self.elements)
        els.insert(k, Phase(path, delta))
        return replace(self, elements=tuple(els))


def _apply(el, state: dict[str, complex]) -> dict[str, complex]:
    out = dict(state)
    if isinstance(el, BeamSplitter):
        a = np.array([out.pop(p, 0j) for p in el.inputs])
        b = el.matrix @ a
        for p, amp in zip(el.outputs, b):
            out[p] = complex(amp)
    else:
        out[el.path] = out.get(el.path, 0j) * cmath.exp(1j * el.phase)
    return out


def _apply_adjoint(el, state: dict[str, complex]) -> dict[str, complex]:
    out = dict(state)
    if isinstance(el, BeamSplitter):
        b = np.array([out.pop(p, 0j) for p in el.outputs])
        a = el.matrix.conj().T @ b
        for p, amp in zip(el.inputs, a):
            out[p] = complex(amp)
    else:
        out[el.path] = out.get(el.path, 0j) * cmath.exp(-1j * el.phase)
    return out


def forward_state(network: PathNetwork, section: int | None = None) -> dict[str, complex]:
    """Amplitudes on the live paths of ``section`` (default: terminals)."""
    k = len(network.elements) if section is None else section
    state = {network.source: 1.0 + 0j}
    for el in network.elements[:k]:
        state = _apply(el, state)
    return state


def backward_state(network: PathNetwork, section: int) -> dict[str, complex]:
    """The detector state evolved back to ``section``."""
    state = {p: 0j for p in network.terminals()}
    state[network.detector] = 1.0 + 0j
    for el in reversed(network.elements[section:]):
        state = _apply_adjoint(el, state)
    return state


def detector_amplitude(network: PathNetwork) -> complex:
    return forward_state(network).get(network.detector, 0j)


def build_nested_interferometer(computer_output: int = 0) -> PathNetwork:
    """Nested interferometer with the computer on path C.

    The outer splitters transmit 2/3 and reflect 1/3, the inner ones are
    balanced.  Output 0 puts a pi phase on C; output 1 diverts C into an
    absorbing path ``X``.  The photon is detected at ``D``; ``Dp`` and ``G``
    are the other exits.
    """
    if computer_output not in (0, 1):
        raise ValueError("computer output must be 0 or 1")
    third = 1.0 / 3.0
    els = [
        BeamSplitter(("In", "Vac1"), ("A", "E"),
                     np.array([[np.sqrt(third), -np.sqrt(1 - third)],
                               [np.sqrt(1 - third), np.sqrt(third)]], dtype=complex)),
        BeamSplitter(("E", "Vac2"), ("B", "C"),
                     np.array([[1, -1], [1, 1]], dtype=complex) / np.sqrt(2)),
    ]
    if computer_output == 0:
        els.append(Phase("C", np.pi))
    else:
        els.append(BeamSplitter(("C", "Vac3"), ("X", "C"),
                                np.array([[1, 0], [0, 1]], dtype=complex)))
    els += [
        BeamSplitter(("B", "C"), ("F", "G"),
                     np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)),
        BeamSplitter(("A", "F"), ("D", "Dp"),
                     np.array([[np.sqrt(third), np.sqrt(1 - third)],
                               [np.sqrt(1 - third), -np.sqrt(third)]], dtype=complex)),
    ]
    return PathNetwork("In", "D", tuple(els))


@dataclass(frozen=True)
class WeakValueResult:
    value: complex
    overlap: complex
    path: str
    section: int

    def as_dict(self) -> dict:
        return {"path": self.path, "value_re": self.value.real, "value_im": self.value.imag,
                "overlap_re": self.overlap.real, "overlap_im": self.overlap.imag}


def weak_value(network: PathNetwork, path: str, atol: float = 1e-14) -> WeakValueResult:
    k = network.section_of(path)
    pre = forward_state(network, k)
    post = backward_state(network, k)
    overlap = sum(np.conj(post.get(p, 0j)) * a for p, a in pre.items())
    if abs(overlap) <= atol:
        raise ZeroDivisionError("post-selection overlap vanishes")
    num = np.conj(post.get(path, 0j)) * pre.get(path, 0j)
    return WeakValueResult(complex(num / overlap), complex(overlap), path, k)


def section_states(network: PathNetwork, paths) -> tuple[dict, dict]:
    """Pre- and post-selected amplitudes on a cross-section containing ``paths``."""
    paths = tuple(paths)
    for k, cs in enumerate(network.cross_sections()):
        if all(p in cs for p in paths):
            pre, post = forward_state(network, k), backward_state(network, k)
            return ({p: pre.get(p, 0j) for p in paths},
                    {p: post.get(p, 0j) for p in paths})
    raise KeyError(f"no cross-section contains all of {paths}")


@dataclass(frozen=True)
class PerturbationResponse:
    path: str
    delta: float
    amplitude: complex
    amplitude0: complex
    weak: complex

    @property
    def predicted(self) -> complex:
        """Exact response of a linear network to one phase element."""
        return self.amplitude0 * (1 + (cmath.exp(1j * self.delta) - 1) * self.weak)

    @property
    def derivative(self) -> complex:
        """dA_D/d(delta) at zero."""
        return 1j * self.weak * self.amplitude0


def perturb_path(network: PathNetwork, path: str, delta: float) -> PerturbationResponse:
    if path not in network.paths():
        raise KeyError(f"unknown path {path!r}")
    if abs(delta) > 0.2:
        raise ValueError("phase perturbation must satisfy |delta| <= 0.2")
    a0 = detector_amplitude(network)
    a = detector_amplitude(network.with_phase(path, delta))
    return PerturbationResponse(path, delta, a, a0, weak_value(network, path).value)
