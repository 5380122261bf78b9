"""Reference tables: recomputed values next to the published ones.

Every builder returns a :class:`Table` whose rows carry the recomputed value
at full precision, the same value rounded to the number of decimals printed
in the reference, and the reference itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .histories import counterfactuality_report, enumerate_histories, success_record
from .info import PARTITIONS, best_partition, mutual_information_repeat, zeno_params
from .noise import run_noisy
from .zeno import ProtocolParams, TallyMode

# theta' = pi/140 corresponds to N' = 70
HISTORY_NPRIME = 70
EPS_HALF = 1 - math.sqrt(2) / 2

# history -> list of (label, coefficient of sin/cos theta', "sin" | "cos")
HISTORIES_X0 = {
    "f0_3f0_30_2": [((0, 0, 0), 1.0, "cos"), ((1, 0, 0), 0.5, "sin")],
    "f0_3n0_31_2": [((1, 1, 0), 0.5, "sin")],
    "n0_3f0_30_2": [((1, 0, 0), -0.5, "sin")],
    "n0_3n0_31_2": [((1, 1, 0), 0.5, "sin")],
}
HISTORIES_X1 = {
    "f0_3f0_30_2": [((0, 0, 0), 1.0, "cos"), ((1, 0, 0), 0.5, "sin")],
    "f0_3n1_31_2": [((1, 1, 1), 0.5, "sin")],
    "n1_3f1_30_2": [((1, 0, 1), -0.5, "sin")],
    "n1_3n1_31_2": [((1, 1, 1), 0.5, "sin")],
}
# tally histories: key is (q1 reading at each step, history), label includes the tally
TALLY_HISTORIES = {
    "n(1)n(2)0_3n(1)f(2)0_30_2": [((1, 0, 0, 1), -0.5, "sin")],
    "n(1)f(2)0_3n(1)f(2)0_30_2": [((1, 0, 0, 0), 0.5, "sin")],
    "f(1)f(2)0_3f(1)f(2)0_30_2": [((0, 0, 0, 0), 1.0, "cos")],
}

COUNTERFACTUALITY = [("700", "70", "0.0015", "0.884", "0.965", "0.884")]
DECOHERENCE = [
    ("700", "70", "0.0015", "0.884", "0.609", "0.040", "0.973", "0.9999"),
    ("40", "70", "0.188", "0.175", "0.625", "0.975", "0.630", "0.969"),
    ("40", "700", "0.803", "0.0042", "0.948", "0.9998", "0.469", "0.107"),
]
DECOHERENCE_EPS = 0.2
MUTUAL_INFO = [
    (10, 10, 0.2, "0.2", "0.46", "0.9999"),
    (2, 2, 0.2, "0.2", "0.324", "0.360"),
    (10, 10, EPS_HALF, "1-sqrt(2)/2", "0.297", "0"),
]
MI_TOL = 0.01


def decimals(text: str) -> int:
    return len(text.split(".")[1]) if "." in text else 0


@dataclass(frozen=True)
class Cell:
    """A recomputed value, rounded like ``reference``."""

    value: float
    reference: str

    @property
    def display(self) -> str:
        return f"{self.value:.{decimals(self.reference)}f}"

    @property
    def error(self) -> float:
        return abs(self.value - float(self.reference))

    def matches_display(self) -> bool:
        return self.display == self.reference


@dataclass
class Table:
    which: int
    title: str
    columns: list[str]
    rows: list[dict]
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"which": self.which, "title": self.title, "columns": self.columns,
                "rows": self.rows, "notes": self.notes}


def _reference_amp(coef: float, trig: str, theta_p: float) -> float:
    return coef * (math.sin(theta_p) if trig == "sin" else math.cos(theta_p))


def _ket(label) -> str:
    return "|" + "".join(str(b) for b in label) + ">"


def history_vectors(x: int, nprime: int = HISTORY_NPRIME) -> dict[str, dict[tuple, complex]]:
    """Non-zero history vectors for ``N = 2`` after one routine step."""
    p = ProtocolParams(2, nprime, x=x)
    out = {}
    for h in enumerate_histories(p, routine_steps=1, final=False):
        if h.norm2 > 0.0:
            out[str(h)] = {(l.q1, l.q2, l.q3): a for l, a in h.vector.items()}
    return out


def tally_history_vectors(nprime: int = HISTORY_NPRIME) -> dict[str, dict[tuple, complex]]:
    """Success-record histories with the tally, split by a hypothetical ``q1`` reading.

    ``q1`` is untouched during the subroutine, so reading it at every
    insertion just splits a history vector by its ``q1`` value.  Names use
    ``a(1)b(2)`` for the readings of the subroutine and computer switches.
    """
    p = ProtocolParams(2, nprime, tally=TallyMode.ALL_RUNS)
    out = {}
    for h in enumerate_histories(p, success_record(p, 1), routine_steps=1, final=False):
        for q1 in (0, 1):
            part = {(l.q1, l.q2, l.q3, l.tally): a for l, a in h.vector.items() if l.q1 == q1}
            if not part:
                continue
            s1 = "n" if q1 else "f"
            name = "".join(f"{s1}(1){e}(2)" if e.kind in "fn" else str(e) for e in h.events)
            out[name] = part
    return out


def _history_table(which: int, title: str, computed: dict, reference: dict) -> Table:
    theta_p = math.pi / (2 * HISTORY_NPRIME)
    rows = []
    for name, terms in reference.items():
        got = computed.get(name, {})
        for label, coef, trig in terms:
            amp = complex(got.get(label, 0.0))
            ref = _reference_amp(coef, trig, theta_p)
            frac = "" if coef == 1.0 else "/2"
            sign = "-" if coef < 0 else ""
            rows.append({
                "history": name, "ket": _ket(label),
                "expression": f"{sign}{trig}(theta'){frac}",
                "display": f"{amp.real:.6f}", "value": amp.real, "imag": amp.imag,
                "reference": ref, "error": abs(amp - ref),
            })
    extra = sorted(set(computed) - set(reference))
    notes = [f"theta' = pi/{2 * HISTORY_NPRIME}"]
    if extra:
        notes.append("unlisted non-zero histories: " + ", ".join(extra))
    return Table(which, title, ["history", "ket", "expression", "display", "value", "reference",
                                "error"], rows, notes)


def table1() -> Table:
    return _history_table(1, "histories after one routine step, N=2, output 0",
                          history_vectors(0), HISTORIES_X0)


def table2() -> Table:
    return _history_table(2, "histories after one routine step, N=2, output 1",
                          history_vectors(1), HISTORIES_X1)


def table6() -> Table:
    return _history_table(6, "success-record histories with an all-runs tally, N=2, output 0",
                          tally_history_vectors(), TALLY_HISTORIES)


def _cells_row(keys, values, refs) -> dict:
    """Rounded values first, then full precision, then the references."""
    cells = [Cell(v, r) for v, r in zip(values, refs)]
    row = {k: c.display for k, c in zip(keys, cells)}
    row.update({k + "_full": c.value for k, c in zip(keys, cells)})
    row.update({k + "_ref": c.reference for k, c in zip(keys, cells)})
    return row


def table3() -> Table:
    keys = ["c0", "c1", "p_mm0_given_0", "p_mm1_given_1"]
    rows = []
    for n, npr, *refs in COUNTERFACTUALITY:
        rep = counterfactuality_report(ProtocolParams(int(n), int(npr)))
        vals = [rep.c0, rep.c1, rep.p_mm0_given_0, rep.p_mm1_given_1]
        rows.append({"N": int(n), "Nprime": int(npr), **_cells_row(keys, vals, refs)})
    return Table(3, "counterfactuality", ["N", "Nprime", *keys], rows)


def table4() -> Table:
    keys = ["c0", "c1", "p_m_given_0", "p_m0_given_m_0", "p_m_given_1", "p_m1_given_m_1"]
    rows = []
    for n, npr, *refs in DECOHERENCE:
        n, npr = int(n), int(npr)
        rep = counterfactuality_report(ProtocolParams(n, npr))
        r0 = run_noisy(zeno_params(n, npr, DECOHERENCE_EPS).replace(x=0))
        r1 = run_noisy(zeno_params(n, npr, DECOHERENCE_EPS).replace(x=1))
        vals = [rep.c0, rep.c1, r0.p_m_given_x, r0.p_mi_given_m_x[0],
                r1.p_m_given_x, r1.p_mi_given_m_x[1]]
        rows.append({"N": n, "Nprime": npr, **_cells_row(keys, vals, refs)})
    return Table(4, f"modified protocol with eps={DECOHERENCE_EPS}", ["N", "Nprime", *keys], rows,
                 ["representation: density"])


def table5() -> Table:
    rows, notes = [], []
    for n, npr, eps, eps_text, ref_zeno, ref_rep in MUTUAL_INFO:
        params = zeno_params(n, npr, eps)
        best, values = best_partition(params, float(ref_zeno))
        default = values[PARTITIONS[0]]
        rep = mutual_information_repeat(2 * n * npr, eps).mi_bits
        flagged = abs(default - float(ref_zeno)) > MI_TOL
        row = {"N": n, "Nprime": npr, "epsilon": eps_text,
               **_cells_row(["mi_zeno", "mi_repeat"], [default, rep], [ref_zeno, ref_rep]),
               "partition": PARTITIONS[0], "runs": 2 * n * npr,
               "best_partition": best, "best_mi": values[best], "discrepancy": flagged}
        for name in PARTITIONS:
            row["mi_" + name] = values[name]
        rows.append(row)
        if flagged:
            notes.append(f"N={n} N'={npr}: default partition gives {default:.4f} vs {ref_zeno}; "
                         f"closest partition is {best} ({values[best]:.4f})")
    return Table(5, "mutual information", ["N", "Nprime", "epsilon", "mi_zeno", "mi_repeat",
                                           "partition", "runs", "best_partition", "discrepancy"],
                 rows, notes)


BUILDERS = {1: table1, 2: table2, 3: table3, 4: table4, 5: table5, 6: table6}


def build(which: int) -> Table:
    try:
        return BUILDERS[int(which)]()
    except KeyError:
        raise ValueError(f"unknown table {which!r}; choose from {sorted(BUILDERS)}") from None


__all__ = ["Cell", "Table", "build", "table1", "table2", "table3", "table4", "table5", "table6",
           "history_vectors", "tally_history_vectors", "decimals"]
