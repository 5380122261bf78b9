"""Decoherent computer runs.

Every computer run entangles the computer-switch-on component with the
environment: the output bit survives with amplitude ``1 - eps`` and is
flipped, into a fresh orthogonal environment mode, with amplitude
``sqrt(2 eps - eps**2)``.  The noise acts after the ideal computation.

Two interchangeable representations are provided: an ensemble of pure
branches labelled by environment mode, and an 8x8 density operator evolved
with the environment-traced Kraus pair.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field

import numpy as np

from .qstate import PureState, inner, project
from .zeno import Op, ProtocolParams, TallyMode, _dense_matrix, apply_op, schedule

SCOPES = ("sector", "target")


def _check_eps(epsilon: float) -> None:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon!r}")


def flip_amplitude(epsilon: float) -> float:
    _check_eps(epsilon)
    return math.sqrt(max(2 * epsilon - epsilon ** 2, 0.0))


@dataclass(frozen=True)
class Branch:
    env: int
    state: PureState
    born: int = -1  # insertion index that created the mode, -1 for the initial one

    @property
    def weight(self) -> float:
        return self.state.norm2()


def env_allocator(start: int = 1) -> Callable[[], int]:
    counter = itertools.count(start)
    return lambda: next(counter)


def _noisy(label, x: int, scope: str) -> bool:
    if label.q2 != 1:
        return False
    return scope == "sector" or (label.q1, label.q3) == (1, x)


def decohere_insertion(branch: Branch, x: int, epsilon: float, fresh_env: Callable[[], int],
                       scope: str = "sector", born: int = -1) -> list[Branch]:
    """Split the computer-on part of ``branch`` into stay and flip branches.

    With ``scope="sector"`` every label with ``q2 = 1`` is affected; with
    ``scope="target"`` only ``|11x>``.  Zero-norm branches are dropped.
    """
    _check_eps(epsilon)
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}")
    if epsilon == 0.0:
        return [branch]
    stay, flip = {}, {}
    amp_f = flip_amplitude(epsilon)
    for lab, amp in branch.state.items():
        if _noisy(lab, x, scope):
            stay[lab] = stay.get(lab, 0j) + (1 - epsilon) * amp
            flipped = lab._replace(q3=1 - lab.q3)
            flip[flipped] = flip.get(flipped, 0j) + amp_f * amp
        else:
            stay[lab] = stay.get(lab, 0j) + amp
    out = []
    kept = PureState(stay)
    if kept.norm2() > 0.0:
        out.append(Branch(branch.env, kept, branch.born))
    new = PureState(flip)
    if new.norm2() > 0.0:
        out.append(Branch(fresh_env(), new, born))
    return out


def kraus_pair(x: int, epsilon: float, scope: str = "sector") -> tuple[np.ndarray, np.ndarray]:
    """Environment-traced form of one noisy run on the 8-dim ``(q1, q2, q3)`` space."""
    _check_eps(epsilon)
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}")
    k0 = np.eye(8, dtype=complex)
    k1 = np.zeros((8, 8), dtype=complex)
    amp_f = flip_amplitude(epsilon)
    for i in range(8):
        q1, q2, q3 = i >> 2 & 1, i >> 1 & 1, i & 1
        if q2 == 1 and (scope == "sector" or (q1, q3) == (1, x)):
            k0[i, i] = 1 - epsilon
            k1[i ^ 1, i] = amp_f
    return k0, k1


def _superop(kraus) -> np.ndarray:
    """Matrix acting on row-major ``vec(rho)``."""
    return sum(np.kron(k, k.conj()) for k in kraus)


@dataclass
class NoisyResult:
    p_m_given_x: float
    p_mi_given_m_x: dict[int, float]
    p_final: dict[int, float]
    failure_profile: list[float] = field(default_factory=list)
    representation: str = "density"
    branches: int = 0

    def as_dict(self) -> dict:
        return {
            "p_m_given_x": self.p_m_given_x,
            "p_m0_given_m_x": self.p_mi_given_m_x[0],
            "p_m1_given_m_x": self.p_mi_given_m_x[1],
            "representation": self.representation,
        }


def _result(p_final, profile, representation, branches=0) -> NoisyResult:
    pm = p_final[0] + p_final[1]
    cond = {i: (p_final[i] / pm if pm > 0 else float("nan")) for i in (0, 1)}
    return NoisyResult(pm, cond, dict(p_final), profile, representation, branches)


def _density_ops(params: ProtocolParams, scope: str):
    p = params.replace(tally=TallyMode.NONE, epsilon=0.0)
    k0, k1 = kraus_pair(params.x, params.epsilon, scope)

    def unitary(op):
        return _dense_matrix(lambda s: apply_op(s, op, p))

    def run(op):
        m = unitary(op)
        return [k0 @ m, k1 @ m] if params.epsilon > 0 else [m]

    rp = unitary(Op("rprime"))
    kraus = [unitary(Op("r"))]
    ops = [run(Op("insert"))]
    if p.variant.value == "modified":
        ops += [[unitary(Op("sign"))], run(Op("insert", inverse=True))]
    for group in ops:
        kraus = [g @ k for g in group for k in kraus]
    p3 = np.diag([1.0 if (i & 1) == 0 else 0.0 for i in range(8)])
    p2 = np.diag([1.0 if (i >> 1 & 1) == 0 else 0.0 for i in range(8)])
    return rp, kraus, p3, p2


def density_steps(params: ProtocolParams, scope: str = "sector") -> Iterator[tuple[str, np.ndarray]]:
    """Yield ``(tag, rho)`` after every rotation, noisy step and measurement.

    Tags are ``"rprime"``, ``"step"`` (channel applied, before the ``q3``
    projection), ``"out"`` and ``"switch"``.  ``rho`` is the sub-normalised
    post-selected operator.
    """
    rp, kraus, p3, p2 = _density_ops(params, scope)
    rho = np.zeros((8, 8), dtype=complex)
    rho[0, 0] = 1.0
    for _ in range(params.nprime):
        rho = rp @ rho @ rp.conj().T
        yield "rprime", rho
        for _ in range(params.n):
            rho = sum(k @ rho @ k.conj().T for k in kraus)
            yield "step", rho
            rho = p3 @ rho @ p3
            yield "out", rho
        rho = p2 @ rho @ p2
        yield "switch", rho


def _run_density(params: ProtocolParams, scope: str) -> NoisyResult:
    rp, kraus, p3, p2 = _density_ops(params, scope)
    sub = _superop([p3 @ k for k in kraus])
    rot = _superop([rp])
    proj2 = _superop([p2])
    v = np.zeros(64, dtype=complex)
    v[0] = 1.0
    diag = np.arange(8) * 9
    profile = []
    tr = 1.0
    for _ in range(params.nprime):
        v = rot @ v
        for _ in range(params.n):
            v = sub @ v
            t = float(v[diag].real.sum())
            profile.append(tr - t)
            tr = t
        v = proj2 @ v
        t = float(v[diag].real.sum())
        profile.append(tr - t)
        tr = t
    d = v[diag].real
    return _result({0: float(d[:4].sum()), 1: float(d[4:].sum())}, profile, "density")


def _merge_flips(branches: list[Branch], born: int, tol: float = 1e-12) -> list[Branch]:
    """Merge fresh-mode branches from one insertion whose states are proportional."""
    kept: list[Branch] = []
    fresh: list[Branch] = []
    for b in branches:
        (fresh if b.born == born else kept).append(b)
    merged: list[Branch] = []
    for b in fresh:
        for i, m in enumerate(merged):
            na, nb = m.weight, b.weight
            if abs(abs(inner(m.state, b.state)) ** 2 - na * nb) <= tol * na * nb:
                merged[i] = Branch(m.env, m.state.scaled(math.sqrt((na + nb) / na)), born)
                break
        else:
            merged.append(b)
    return kept + merged


def _run_ensemble(params: ProtocolParams, scope: str) -> NoisyResult:
    p = params.replace(tally=TallyMode.NONE, epsilon=0.0)
    fresh = env_allocator()
    branches = [Branch(0, PureState.basis())]
    profile = []
    tr = 1.0
    peak = 1
    for op in schedule(p, final=False):
        if op.name == "measure":
            reg = "q3" if op.kind == "out" else "q2"
            branches = [Branch(b.env, project(b.state, reg, 0), b.born) for b in branches]
            branches = [b for b in branches if b.weight > 0.0]
            t = sum(b.weight for b in branches)
            profile.append(tr - t)
            tr = t
            continue
        branches = [Branch(b.env, apply_op(b.state, op, p), b.born) for b in branches]
        if op.name == "insert" and params.epsilon > 0:
            split: list[Branch] = []
            for b in branches:
                split.extend(decohere_insertion(b, params.x, params.epsilon, fresh, scope,
                                                born=op.stage))
            branches = _merge_flips(split, op.stage)
            peak = max(peak, len(branches))
    finals = {i: sum(project(b.state, "q1", i).norm2() for b in branches) for i in (0, 1)}
    return _result(finals, profile, "ensemble", peak)


def run_noisy(params: ProtocolParams, representation: str = "density",
              scope: str = "sector") -> NoisyResult:
    """Post-selected success and final-outcome probabilities under decoherence."""
    if params.tally is not TallyMode.NONE:
        raise ValueError("decoherent runs do not support a tally register")
    if representation == "density":
        return _run_density(params, scope)
    if representation == "ensemble":
        return _run_ensemble(params, scope)
    raise ValueError("representation must be 'density' or 'ensemble'")


def crosscheck_representations(params: ProtocolParams, scope: str = "sector",
                               floor: float = 1e-12) -> float:
    """Largest absolute difference between the two representations' results.

    Conditional probabilities are compared only when ``p(m|x)`` exceeds
    ``floor``; below it they are ratios of rounding noise.
    """
    if params.n > 10 or params.nprime > 10:
        raise ValueError("branch ensemble cross-check is limited to N, N' <= 10")
    a = run_noisy(params, "density", scope)
    b = run_noisy(params, "ensemble", scope)
    diffs = [abs(a.p_m_given_x - b.p_m_given_x)]
    diffs += [abs(a.p_final[i] - b.p_final[i]) for i in (0, 1)]
    if a.p_m_given_x > floor:
        diffs += [abs(a.p_mi_given_m_x[i] - b.p_mi_given_m_x[i]) for i in (0, 1)]
    diffs += [abs(u - v) for u, v in zip(a.failure_profile, b.failure_profile)]
    return max(diffs)
