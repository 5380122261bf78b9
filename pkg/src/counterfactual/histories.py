"""Histories with hypothetical computer-switch measurements.

A history lists every real measurement outcome of the protocol together with
a hypothetical ``f`` (off) / ``n`` (on) reading of the computer switch taken
right after each computer insertion.  Its vector is the product of the
corresponding projectors applied to ``|000>``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .qstate import Label, PureState, project
from .zeno import (
    F, NRUN, Event, Final, Op, ProtocolParams, TallyMode, Variant, _dense_matrix, apply_op,
    format_events, run_ideal, schedule, step_matrices, success_record,
)

DEFAULT_CAP = 2 ** 20
ZERO_TOL = 1e-12


class CapExceeded(ValueError):
    """Raised when an enumeration would produce more histories than allowed."""

    def __init__(self, required: int, cap: int):
        self.required = required
        self.cap = cap
        need = str(required) if required < 10 ** 12 else f"2^{required.bit_length() - 1}"
        super().__init__(f"enumeration needs {need} histories, cap is {cap}; "
                         f"pass cap >= {need}")


@dataclass(frozen=True)
class History:
    events: tuple[Event, ...]
    vector: PureState

    @property
    def real_events(self) -> tuple[Event, ...]:
        return tuple(e for e in self.events if e.is_real)

    @property
    def is_all_f(self) -> bool:
        return all(e.kind != "n" for e in self.events)

    @property
    def norm2(self) -> float:
        return self.vector.norm2()

    def contains(self, record: Sequence[Event]) -> bool:
        record = tuple(record)
        return self.real_events[:len(record)] == record

    def __str__(self) -> str:
        return format_events(self.events)


def _routine_steps_of(record: Sequence[Event]) -> int:
    return sum(1 for e in record if e.kind == "switch")


def _count(params, ops, record) -> int:
    inserts = sum(1 for op in ops if op.name == "insert")
    free = sum(1 for op in ops if op.name == "measure") - len(record)
    return 2 ** (inserts + max(free, 0))


def enumerate_histories(params: ProtocolParams, record: Sequence[Event] = (),
                        cap: int = DEFAULT_CAP, routine_steps: int | None = None,
                        final: bool = True) -> list[History]:
    """All histories whose real outcomes start with ``record``.

    Real measurements beyond the record branch on both outcomes.  Histories
    with zero vectors are kept.  ``routine_steps`` truncates the protocol.
    """
    if params.epsilon != 0.0:
        raise ValueError("history enumeration is defined for the noiseless protocol")
    record = tuple(record)
    ops = list(schedule(params, routine_steps=routine_steps, final=final))
    n_meas = sum(1 for op in ops if op.name == "measure")
    if len(record) > n_meas:
        raise ValueError("record is longer than the protocol's measurement sequence")
    required = _count(params, ops, record)
    if required > cap:
        raise CapExceeded(required, cap)

    out: list[History] = []

    def walk(i: int, state: PureState, events: tuple[Event, ...], k: int):
        if i == len(ops):
            out.append(History(events, state))
            return
        op = ops[i]
        if op.name == "measure":
            if k < len(record):
                ev = record[k]
                if ev.kind != op.kind:
                    raise ValueError(f"record has {ev} where a {op.kind} outcome is expected")
                walk(i + 1, project(state, ev.register, ev.bit), events + (ev,), k + 1)
            else:
                for bit in (0, 1):
                    ev = Event(op.kind, bit)
                    walk(i + 1, project(state, ev.register, bit), events + (ev,), k + 1)
            return
        state = apply_op(state, op, params)
        if op.name == "insert":
            walk(i + 1, project(state, "q2", 0), events + (F,), k)
            walk(i + 1, project(state, "q2", 1), events + (NRUN,), k)
        else:
            walk(i + 1, state, events, k)

    walk(0, PureState.basis(), (), 0)
    return out


def coherent_sum(histories: Sequence[History], record: Sequence[Event] = ()) -> PureState:
    """Sum of ``v_h`` over the histories containing ``record``."""
    total = PureState()
    for h in histories:
        if h.contains(record):
            total = total + h.vector
    return total


def projective_state(params: ProtocolParams, record: Sequence[Event],
                     routine_steps: int | None = None, final: bool = True) -> PureState:
    """Direct simulation projected onto ``record`` (no hypothetical readings)."""
    record = tuple(record)
    state = PureState.basis()
    k = 0
    for op in schedule(params, routine_steps=routine_steps, final=final):
        if op.name == "measure":
            if k == len(record):
                continue
            ev = record[k]
            state = project(state, ev.register, ev.bit)
            k += 1
        else:
            state = apply_op(state, op, params)
    return state


def all_f_history(params: ProtocolParams, final: int | None,
                  routine_steps: int | None = None) -> History:
    """The history with ``f`` at every insertion and the success record.

    Runs one projected trajectory in ``O(N N')`` with dense 8x8 steps.
    ``final=None`` stops before the final measurement.
    """
    p = params.replace(tally=TallyMode.NONE, epsilon=0.0)
    steps = p.nprime if routine_steps is None else routine_steps
    rp, _, p2 = step_matrices(p)
    pf = p2  # f reading: computer switch off
    sub = np.eye(8, dtype=complex)
    blocks = [[Op("r"), Op("insert")]]
    if p.variant is Variant.MODIFIED:
        blocks.append([Op("sign"), Op("insert", inverse=True)])
    for block in blocks:
        for op in block:
            sub = _dense_matrix(lambda s, op=op: apply_op(s, op, p)) @ sub
        sub = pf @ sub
    p3 = np.diag([1.0 if (i & 1) == 0 else 0.0 for i in range(8)])
    sub = p3 @ sub
    v = np.zeros(8, dtype=complex)
    v[0] = 1.0
    for _ in range(steps):
        v = rp @ v
        for _ in range(p.n):
            v = sub @ v
        v = p2 @ v
    state = PureState.from_dense(v)
    per_step = [F] * p.insertions_per_step + [Event("out", 0)]
    events = ((per_step * p.n) + [Event("switch", 0)]) * steps
    if final is not None:
        state = project(state, "q1", final)
        events.append(Final(final))
    return History(tuple(events), state)


@dataclass
class Witness:
    condition1: bool
    condition2: bool
    offending: list[History] = field(default_factory=list)
    other_output_probability: float = 0.0
    note: str = ""


def is_counterfactual_outcome(params: ProtocolParams, record: Sequence[Event],
                              cap: int = DEFAULT_CAP, tol: float = ZERO_TOL
                              ) -> tuple[bool, Witness]:
    """Test both conditions for ``record`` under the computer output ``params.x``.

    (1) exactly one history with a non-zero vector carries ``record`` and it
    contains only ``f`` readings; (2) the other computer output gives
    ``record`` zero probability (within ``tol``).
    """
    record = tuple(record)
    steps = _routine_steps_of(record)
    has_final = any(e.kind == "final" for e in record)
    if has_final and steps != params.nprime:
        raise ValueError("a final outcome needs every routine step in the record")
    ops = list(schedule(params, routine_steps=steps, final=has_final))
    if not any(op.name == "insert" for op in ops):
        return True, Witness(True, True, note="no computer insertion in this record")

    hs = [h for h in enumerate_histories(params, record, cap=cap, routine_steps=steps,
                                         final=has_final)
          if h.real_events == record]
    live = [h for h in hs if h.norm2 > tol ** 2]
    cond1 = len(live) == 1 and live[0].is_all_f
    offending = [h for h in live if not h.is_all_f]
    if len(live) > 1 and not offending:
        offending = live[1:]

    other = params.replace(x=1 - params.x)
    p_other = projective_state(other, record, routine_steps=steps, final=has_final).norm2()
    cond2 = p_other <= tol
    return cond1 and cond2, Witness(cond1, cond2, offending, p_other)


def interference_report(histories: Sequence[History], record: Sequence[Event] = (),
                        tol: float = 1e-14) -> dict[Label, list[tuple[History, complex]]]:
    """Labels where non-zero history amplitudes cancel in the coherent sum.

    Diagnostic only: these are the histories a cancellation-discounting
    criterion would drop.
    """
    total = coherent_sum(histories, record)
    out: dict[Label, list[tuple[History, complex]]] = {}
    for h in histories:
        if not h.contains(record):
            continue
        for lab, amp in h.vector.items():
            if abs(amp) > tol and abs(total.amplitude(lab)) <= tol:
                out.setdefault(lab, []).append((h, amp))
    return out


@dataclass(frozen=True)
class CounterfactualityReport:
    c0: float
    c1: float
    p_mm0_given_0: float
    p_mm1_given_1: float

    def as_dict(self) -> dict:
        return {"c0": self.c0, "c1": self.c1,
                "p_mm0_given_0": self.p_mm0_given_0, "p_mm1_given_1": self.p_mm1_given_1}


def counterfactuality_report(params: ProtocolParams) -> CounterfactualityReport:
    """Counterfactualities ``c_i`` and success probabilities for both outputs."""
    base = params.replace(epsilon=0.0, tally=TallyMode.NONE)
    c = [all_f_history(base.replace(x=i), final=i).norm2 for i in (0, 1)]
    p0 = run_ideal(base.replace(x=0)).p_success_0
    p1 = run_ideal(base.replace(x=1)).p_success_1
    return CounterfactualityReport(c[0], c[1], p0, p1)


__all__ = [
    "CapExceeded", "History", "Witness", "CounterfactualityReport", "DEFAULT_CAP",
    "enumerate_histories", "coherent_sum", "projective_state", "all_f_history",
    "is_counterfactual_outcome", "interference_report", "counterfactuality_report",
    "success_record",
]
