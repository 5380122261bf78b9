"""Mutual information between the computer output and what a protocol reveals.

The input bit ``x`` is uniformly distributed.  For the chained-Zeno protocol
the observed variable is built from the decoherent run; for the comparison
protocol the computer is simply run ``runs`` times and the number of 1s read
out is recorded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .noise import flip_amplitude, run_noisy
from .zeno import ProtocolParams, Variant

PARTITIONS = ("three_way", "success_only", "full_record")


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    return float(sum(-q * np.log2(q) for q in (p, 1.0 - p) if q > 0.0))


def entropy(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def mutual_information(conditional) -> float:
    """I(X;Y) in bits for rows ``P(y | x)`` and a uniform prior over rows."""
    cond = np.asarray(conditional, dtype=float)
    prior = np.full(cond.shape[0], 1.0 / cond.shape[0])
    joint = prior[:, None] * cond
    mi = entropy(joint.sum(axis=0)) + entropy(prior) - entropy(joint.ravel())
    return float(min(max(mi, 0.0), 1.0))


@dataclass
class MIResult:
    mi_bits: float
    partition: str
    runs: int = 0
    conditional: list[list[float]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"mi_bits": self.mi_bits, "partition": self.partition, "runs": self.runs}


def mutual_information_repeat(runs: int, epsilon: float) -> MIResult:
    """Information from ``runs`` independent noisy runs, read out as a count of 1s.

    Each run reports the wrong bit with probability ``2 eps - eps**2``.  The
    binomial sums are carried out in the log domain.
    """
    if int(runs) != runs or runs <= 0:
        raise ValueError(f"runs must be a positive integer, got {runs!r}")
    q = flip_amplitude(epsilon) ** 2
    k = np.arange(runs + 1)
    log_rows = np.vstack([binom.logpmf(k, runs, q), binom.logpmf(k, runs, 1.0 - q)])
    log_mix = logsumexp(log_rows, axis=0) - np.log(2.0)

    def h(logp):
        p = np.exp(logp)
        return float(-(p * np.where(np.isfinite(logp), logp, 0.0)).sum() / np.log(2.0))

    mi = h(log_mix) - 0.5 * (h(log_rows[0]) + h(log_rows[1]))
    mi = min(max(mi, 0.0), 1.0)
    return MIResult(mi, "count_of_ones", int(runs), np.exp(log_rows).tolist())


def zeno_conditional(params: ProtocolParams, partition: str = "three_way") -> np.ndarray:
    """Rows ``P(y | x)`` for ``x = 0, 1`` under the chosen outcome partition.

    ``three_way``: succeed-and-read-0, succeed-and-read-1, fail.
    ``success_only``: final reading given success.
    ``full_record``: final reading on success, otherwise the measurement at
    which the run first failed.
    """
    if partition not in PARTITIONS:
        raise ValueError(f"partition must be one of {PARTITIONS}")
    rows = []
    for x in (0, 1):
        res = run_noisy(params.replace(x=x))
        if partition == "three_way":
            rows.append([res.p_final[0], res.p_final[1], 1.0 - res.p_m_given_x])
        elif partition == "success_only":
            rows.append([res.p_mi_given_m_x[0], res.p_mi_given_m_x[1]])
        else:
            rows.append([res.p_final[0], res.p_final[1], *res.failure_profile])
    return np.clip(np.array(rows), 0.0, None)


def mutual_information_zeno(params: ProtocolParams, partition: str = "three_way") -> MIResult:
    cond = zeno_conditional(params, partition)
    return MIResult(mutual_information(cond), partition, params.total_insertions, cond.tolist())


def best_partition(params: ProtocolParams, target: float) -> tuple[str, dict[str, float]]:
    """Partition whose MI lies closest to ``target``, with all candidates."""
    values = {p: mutual_information_zeno(params, p).mi_bits for p in PARTITIONS}
    name = min(values, key=lambda p: abs(values[p] - target))
    return name, values


def zeno_params(n: int, nprime: int, epsilon: float) -> ProtocolParams:
    """Modified-variant parameters as used for the protocol comparison."""
    return ProtocolParams(n, nprime, variant=Variant.MODIFIED, epsilon=epsilon)
