"""Exact simulation of chained-Zeno counterfactual computation.

Modules: ``qstate`` (sparse three-qubit states), ``zeno`` (protocol engine),
``histories`` (history vectors and counterfactuality), ``noise`` (decoherent
computer), ``info`` (mutual information), ``jozsa`` (two-qubit protocol and
weak values), ``interfero`` (nested interferometer) and ``tables``.
"""

from .histories import CapExceeded, counterfactuality_report, enumerate_histories
from .noise import run_noisy
from .qstate import Label, PureState
from .zeno import ProtocolParams, TallyMode, Variant, run_ideal, run_with_tally

__all__ = [
    "CapExceeded", "Label", "ProtocolParams", "PureState", "TallyMode", "Variant",
    "counterfactuality_report", "enumerate_histories", "run_ideal", "run_noisy",
    "run_with_tally",
]
