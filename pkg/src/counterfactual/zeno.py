"""Chained-Zeno protocol engine.

The routine rotates the subroutine switch ``q1`` by ``theta_prime`` and runs
the subroutine; each subroutine step rotates the computer switch ``q2`` by
``theta`` (only where ``q1 = 1``), inserts the computer and measures the
output qubit ``q3``.  Each routine step ends with a measurement of ``q2``.
Intermediate measurements are handled by exact post-selection on the success
record; everything else is accumulated as failure probability.

Two variants are supported.  ``STANDARD`` inserts the computer once per
subroutine step.  ``MODIFIED`` inserts it twice with a sign change on
``|111>`` in between; the second insertion runs the inverse computation.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from .qstate import Label, PureState, apply_one_qubit, measure, project, rotation


class Variant(str, enum.Enum):
    STANDARD = "standard"
    MODIFIED = "modified"


class TallyMode(str, enum.Enum):
    NONE = "none"
    ALL_RUNS = "all"
    ONLY_OUTPUT1 = "output1"
    STAGED = "staged"


@dataclass(frozen=True)
class ProtocolParams:
    n: int
    nprime: int
    x: int = 0
    variant: Variant = Variant.STANDARD
    epsilon: float = 0.0
    tally: TallyMode = TallyMode.NONE

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if int(self.nprime) != self.nprime or self.nprime < 1:
            raise ValueError(f"nprime must be a positive integer, got {self.nprime!r}")
        if self.x not in (0, 1):
            raise ValueError(f"computer output must be 0 or 1, got {self.x!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon!r}")
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "tally", TallyMode(self.tally))

    @property
    def theta(self) -> float:
        return math.pi / (2 * self.n)

    @property
    def theta_prime(self) -> float:
        return math.pi / (2 * self.nprime)

    @property
    def insertions_per_step(self) -> int:
        return 2 if self.variant is Variant.MODIFIED else 1

    @property
    def total_insertions(self) -> int:
        return self.n * self.nprime * self.insertions_per_step

    def replace(self, **changes) -> "ProtocolParams":
        fields = dict(n=self.n, nprime=self.nprime, x=self.x, variant=self.variant,
                      epsilon=self.epsilon, tally=self.tally)
        fields.update(changes)
        return ProtocolParams(**fields)


# --------------------------------------------------------------------------
# measurement records

_REGISTER_OF = {"out": "q3", "switch": "q2", "final": "q1"}
_SUFFIX = {"out": 3, "switch": 2, "final": 1}


@dataclass(frozen=True)
class Event:
    """One entry of a history: hypothetical ``f``/``n`` or a real outcome."""

    kind: str
    bit: int = 0

    def __post_init__(self):
        if self.kind not in ("f", "n", "out", "switch", "final"):
            raise ValueError(f"unknown event kind {self.kind!r}")

    @property
    def is_real(self) -> bool:
        return self.kind in _REGISTER_OF

    @property
    def register(self) -> str:
        return _REGISTER_OF[self.kind]

    def __str__(self) -> str:
        if self.kind in ("f", "n"):
            return self.kind
        return f"{self.bit}_{_SUFFIX[self.kind]}"


F = Event("f")
NRUN = Event("n")


def Out(bit: int) -> Event:
    return Event("out", bit)


def Switch(bit: int) -> Event:
    return Event("switch", bit)


def Final(bit: int) -> Event:
    return Event("final", bit)


def format_events(events) -> str:
    return "".join(str(e) for e in events)


def parse_events(text: str) -> tuple[Event, ...]:
    """Parse ``"f0_3n1_31_2"``-style strings (whitespace is ignored)."""
    kinds = {"3": "out", "2": "switch", "1": "final"}
    text = "".join(text.split())
    out, i = [], 0
    while i < len(text):
        ch = text[i]
        if ch in "fn":
            out.append(Event(ch))
            i += 1
        elif ch in "01" and text[i + 1:i + 2] == "_" and text[i + 2:i + 3] in kinds:
            out.append(Event(kinds[text[i + 2]], int(ch)))
            i += 3
        else:
            raise ValueError(f"cannot parse event record at {text[i:]!r}")
    return tuple(out)


def success_record(params: ProtocolParams, routine_steps: int | None = None) -> tuple[Event, ...]:
    """N ``0_3`` outcomes followed by ``0_2`` for every routine step."""
    steps = params.nprime if routine_steps is None else routine_steps
    return tuple(([Out(0)] * params.n + [Switch(0)]) * steps)


# --------------------------------------------------------------------------
# schedule of protocol operations

@dataclass(frozen=True)
class Op:
    name: str  # rprime | r | insert | sign | measure
    stage: int = 0
    inverse: bool = False
    kind: str = ""


def schedule(params: ProtocolParams, routine_steps: int | None = None,
             final: bool = True) -> Iterator[Op]:
    """Yield the protocol's operations in order.

    ``routine_steps`` truncates the routine (the final ``q1`` measurement is
    then omitted unless ``final`` is forced on a full run).
    """
    steps = params.nprime if routine_steps is None else routine_steps
    if not 0 <= steps <= params.nprime:
        raise ValueError("routine_steps out of range")
    stage = 0
    for _ in range(steps):
        yield Op("rprime")
        for _ in range(params.n):
            yield Op("r")
            yield Op("insert", stage=stage)
            stage += 1
            if params.variant is Variant.MODIFIED:
                yield Op("sign")
                yield Op("insert", stage=stage, inverse=True)
                stage += 1
            yield Op("measure", kind="out")
        yield Op("measure", kind="switch")
    if final and steps == params.nprime:
        yield Op("measure", kind="final")


def _tally_increment(tally: TallyMode, x: int, stage: int) -> int:
    if tally is TallyMode.ALL_RUNS:
        return 1
    if tally is TallyMode.ONLY_OUTPUT1:
        return 1 if x == 1 else 0
    if tally is TallyMode.STAGED:
        return stage + 1
    return 0


def insert_computer(state: PureState, x: int, tally: TallyMode | str = TallyMode.NONE,
                    stage: int = 0, inverse: bool = False) -> PureState:
    """Ideal computer run on every label whose computer switch is on.

    The forward computation writes ``q3 := x``.  The inverse computation is
    the reversible ``q3 ^= x``; on the ``q3 = 0`` inputs the forward run sees
    during the protocol the two agree.  Tally increments follow ``tally``.
    """
    tally = TallyMode(tally)
    inc = _tally_increment(tally, x, stage)

    def act(lab: Label) -> Label:
        if lab.q2 != 1:
            return lab
        q3 = lab.q3 ^ x if inverse else x
        return lab._replace(q3=q3, tally=lab.tally + inc)

    return state.map_labels(act)


def sign_change(state: PureState) -> PureState:
    """Multiply every ``(q1, q2, q3) = (1, 1, 1)`` amplitude by -1."""
    return PureState({lab: (-amp if (lab.q1, lab.q2, lab.q3) == (1, 1, 1) else amp)
                      for lab, amp in state.items()})


def _on_q1(lab: Label) -> bool:
    return lab.q1 == 1


def apply_op(state: PureState, op: Op, params: ProtocolParams) -> PureState:
    """Apply a unitary/computer op of the schedule (not measurements)."""
    if op.name == "rprime":
        return apply_one_qubit(state, "q1", rotation(params.theta_prime))
    if op.name == "r":
        return apply_one_qubit(state, "q2", rotation(params.theta), control=_on_q1)
    if op.name == "insert":
        return insert_computer(state, params.x, params.tally, op.stage, op.inverse)
    if op.name == "sign":
        return sign_change(state)
    raise ValueError(f"op {op.name!r} is not a state transformation")


def subroutine_step(state: PureState, params: ProtocolParams, step: int = 0
                    ) -> dict[int, tuple[PureState, float]]:
    """One subroutine step; returns ``{q3 outcome: (branch, probability)}``.

    ``step`` is the global insertion index of the step's first insertion and
    only matters for the staged tally.
    """
    state = apply_op(state, Op("r"), params)
    state = insert_computer(state, params.x, params.tally, step)
    if params.variant is Variant.MODIFIED:
        state = sign_change(state)
        state = insert_computer(state, params.x, params.tally, step + 1, inverse=True)
    return {bit: measure(state, "q3", bit) for bit in (0, 1)}


# --------------------------------------------------------------------------
# results

@dataclass
class ProtocolResult:
    params: ProtocolParams
    p_success_0: float
    p_success_1: float
    p_fail: float
    final_states: dict[int, PureState]
    tally_distribution: dict[int, dict[int, float]] | None = None
    dropped_norm2: float = 0.0
    engine: str = "dense"

    @property
    def p_correct(self) -> float:
        """P(m m_x | x): success with the final outcome matching the output."""
        return self.p_success_1 if self.params.x == 1 else self.p_success_0

    def as_dict(self) -> dict:
        out = {
            "p_success_0": self.p_success_0,
            "p_success_1": self.p_success_1,
            "p_fail": self.p_fail,
            "p_correct": self.p_correct,
            "engine": self.engine,
        }
        if self.tally_distribution is not None:
            out["tally_distribution"] = {
                str(i): {str(t): p for t, p in sorted(d.items())}
                for i, d in self.tally_distribution.items()
            }
            out["dropped_norm2"] = self.dropped_norm2
        return out


def _finish(params, final_state: PureState, engine: str, **extra) -> ProtocolResult:
    finals = {i: project(final_state, "q1", i) for i in (0, 1)}
    p0, p1 = finals[0].norm2(), finals[1].norm2()
    return ProtocolResult(params, p0, p1, 1.0 - p0 - p1, finals, engine=engine, **extra)


# --------------------------------------------------------------------------
# engines

def run_sparse(params: ProtocolParams, record=None) -> PureState:
    """Reference engine: interpret the schedule on sparse states.

    Real measurements are post-selected on ``record`` (default: the success
    record) and the un-normalised state before the final measurement is
    returned.  Cost is linear in the number of steps times label count.
    """
    record = success_record(params) if record is None else tuple(record)
    state = PureState.basis()
    it = iter(record)
    for op in schedule(params, final=False):
        if op.name == "measure":
            ev = next(it)
            if ev.kind != op.kind:
                raise ValueError(f"record has {ev} where a {op.kind} outcome is expected")
            state = project(state, ev.register, ev.bit)
        else:
            state = apply_op(state, op, params)
    return state


def _dense_matrix(fn) -> np.ndarray:
    cols = [fn(PureState.from_dense(np.eye(8)[k])).to_dense() for k in range(8)]
    return np.array(cols).T


def step_matrices(params: ProtocolParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense 8x8 maps: routine rotation, post-selected subroutine step, q2 projector."""
    if params.tally is not TallyMode.NONE:
        raise ValueError("dense 8-dimensional path requires tally=none")
    rp = _dense_matrix(lambda s: apply_op(s, Op("rprime"), params))
    sub = np.eye(8, dtype=complex)
    ops = [Op("r"), Op("insert")]
    if params.variant is Variant.MODIFIED:
        ops += [Op("sign"), Op("insert", inverse=True)]
    for op in ops:
        sub = _dense_matrix(lambda s, op=op: apply_op(s, op, params)) @ sub
    p3 = np.diag([1.0 if (i & 1) == 0 else 0.0 for i in range(8)])
    p2 = np.diag([1.0 if (i >> 1 & 1) == 0 else 0.0 for i in range(8)])
    return rp, p3 @ sub, p2


def _run_dense(params: ProtocolParams) -> PureState:
    rp, sub, p2 = step_matrices(params)
    v = np.zeros(8, dtype=complex)
    v[0] = 1.0
    for _ in range(params.nprime):
        v = rp @ v
        for _ in range(params.n):
            v = sub @ v
        v = p2 @ v
    return PureState.from_dense(v)


def run_ideal(params: ProtocolParams) -> ProtocolResult:
    """Exact success probabilities of the noiseless protocol."""
    if params.epsilon != 0.0:
        raise ValueError("run_ideal needs epsilon = 0; use noise.run_noisy")
    if params.tally is not TallyMode.NONE:
        return run_with_tally(params)
    return _finish(params, _run_dense(params), "dense")


MAX_TALLY_WIDTH = 2 ** 20


class _TallyArray:
    """Real amplitudes indexed ``[q1, q2, q3, tally]`` with a moving high-water mark.

    Every gate of the protocol is real, so a real array suffices.
    """

    def __init__(self, width: int):
        self.a = np.zeros((2, 2, 2, width))
        self.a[0, 0, 0, 0] = 1.0
        self.hi = 1
        self.dropped = 0.0

    @staticmethod
    def _real(u) -> np.ndarray:
        u = np.asarray(u)
        if np.iscomplexobj(u):
            if np.any(u.imag != 0):
                raise ValueError("tally engine needs real gates")
            u = u.real
        return u

    def rotate_q1(self, u):
        h = self.hi
        b = self.a[..., :h]
        self.a[..., :h] = np.tensordot(self._real(u), b, axes=(1, 0))

    def rotate_q2(self, u):
        h = self.hi
        b = self.a[1, :, :, :h]
        self.a[1, :, :, :h] = np.tensordot(self._real(u), b, axes=(1, 0))

    def insert(self, x: int, inc: int, inverse: bool):
        a, h = self.a, self.hi
        if h + inc > a.shape[-1]:
            raise RuntimeError("tally width exhausted")
        if inverse:
            new = a[:, 1, ::-1, :h] if x == 1 else a[:, 1, :, :h]
            new = new.copy()
            a[:, 1, :, :h + inc] = 0.0
            a[:, 1, :, inc:h + inc] = new
        else:
            summed = a[:, 1, :, :h].sum(axis=1)
            a[:, 1, :, :h + inc] = 0.0
            a[:, 1, x, inc:h + inc] = summed
        self.hi = h + inc

    def sign(self):
        self.a[1, 1, 1, :self.hi] *= -1

    def project(self, axis: int, bit: int):
        idx = [slice(None)] * 3
        idx[axis] = 1 - bit
        self.a[tuple(idx) + (slice(0, self.hi),)] = 0

    def trim(self, tail: float):
        """Drop the high-tally tail whose total weight is below ``tail``."""
        if tail <= 0.0:
            return
        w = (np.abs(self.a[..., :self.hi]) ** 2).sum(axis=(0, 1, 2))
        cum = np.cumsum(w[::-1])[::-1]
        keep = np.nonzero(cum >= tail)[0]
        cut = int(keep.max()) + 1 if keep.size else 1
        if cut < self.hi:
            self.dropped += float(cum[cut])
            self.a[..., cut:self.hi] = 0
            self.hi = cut

    def to_state(self) -> PureState:
        nz = np.nonzero(self.a[..., :self.hi])
        return PureState({Label(int(i), int(j), int(k), int(t)): self.a[i, j, k, t]
                          for i, j, k, t in zip(*nz)})


def run_with_tally(params: ProtocolParams, tail: float = 1e-16) -> ProtocolResult:
    """Noiseless protocol with the tally register participating.

    ``tail`` bounds the weight of the high-tally tail dropped after each
    routine step; the accumulated loss is reported as ``dropped_norm2``.
    """
    if params.tally is TallyMode.NONE:
        raise ValueError("run_with_tally needs a tally mode other than none")
    if params.epsilon != 0.0:
        raise ValueError("tally runs are noiseless")
    width = 1 + sum(_tally_increment(params.tally, params.x, s)
                    for s in range(params.total_insertions))
    if width > MAX_TALLY_WIDTH:
        raise ValueError(f"tally register would need {width} levels (limit {MAX_TALLY_WIDTH}); "
                         "use a smaller protocol")
    arr = _TallyArray(width)
    rp, r = rotation(params.theta_prime), rotation(params.theta)
    for op in schedule(params, final=False):
        if op.name == "rprime":
            arr.rotate_q1(rp)
        elif op.name == "r":
            arr.rotate_q2(r)
        elif op.name == "insert":
            arr.insert(params.x, _tally_increment(params.tally, params.x, op.stage), op.inverse)
        elif op.name == "sign":
            arr.sign()
        elif op.kind == "out":
            arr.project(2, 0)
        else:
            arr.project(1, 0)
            arr.trim(tail)
    final = arr.to_state()
    dist: dict[int, dict[int, float]] = {0: {}, 1: {}}
    for lab, amp in final.items():
        d = dist[lab.q1]
        d[lab.tally] = d.get(lab.tally, 0.0) + abs(amp) ** 2
    return _finish(params, final, "tally-array", tally_distribution=dist, dropped_norm2=arr.dropped)


def outcome_tree(params: ProtocolParams) -> dict[tuple[Event, ...], float]:
    """Probability of every complete real-measurement record (small sizes only)."""
    if params.total_insertions > 24:
        raise ValueError("outcome tree is exponential; keep N*N' small")
    out: dict[tuple[Event, ...], float] = {}
    ops = list(schedule(params))

    def walk(i: int, state: PureState, rec: tuple[Event, ...]):
        if state.norm2() == 0.0:
            return
        if i == len(ops):
            out[rec] = state.norm2()
            return
        op = ops[i]
        if op.name == "measure":
            for bit in (0, 1):
                walk(i + 1, project(state, _REGISTER_OF[op.kind], bit), rec + (Event(op.kind, bit),))
        else:
            walk(i + 1, apply_op(state, op, params), rec)

    walk(0, PureState.basis(), ())
    return out
