"""Choose the number of topics by minimizing the negative-skew count W_k.

The scan trains at each k in ascending order and stops early when W_k hits
zero or when the relative improvement (W_prev - W_k) / max(W_prev, 1) stays
below epsilon for `patience` consecutive steps. The chosen k is the one with
minimal W_k among the informative visited values, ties to the smallest k.

k = 2 is scanned and reported but never eligible: Pearson's second skewness
coefficient is identically zero on two-element vectors, so W_2 = 0 for every
corpus and would trivially win all ties.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ModelingError
from .gibbs import LdaModel, gibbs_train
from .skew import SkewReport
from .tokenize import TokenizedCorpus

log = logging.getLogger(__name__)

DEGENERATE_K = 2


def default_alpha(k: int) -> float:
    """Common symmetric-prior default for LDA."""
    return 50.0 / k


def chain_seed(root_seed: int, k: int) -> int:
    """Deterministic per-k chain seed derived from the root seed."""
    ss = np.random.SeedSequence([root_seed, k])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(slots=True)
class SelectionResult:
    chosen_k: int
    visited: list[int]
    w_by_k: dict[int, int]
    reports: dict[int, SkewReport]
    stop_reason: str
    models: dict[int, LdaModel] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "chosen_k": self.chosen_k,
            "visited": self.visited,
            "w_by_k": {str(k): w for k, w in self.w_by_k.items()},
            "stop_reason": self.stop_reason,
        }


def run_selection_scan(
    w_for_k: Callable[[int], int],
    k_min: int,
    k_max: int,
    epsilon: float = 0.01,
    patience: int = 2,
) -> tuple[int, list[int], dict[int, int], str]:
    """Stopping/selection logic over a W_k source; see module docstring.

    Returns (chosen_k, visited, w_by_k, stop_reason).
    """
    if not (2 <= k_min < k_max):
        raise ModelingError(f"need 2 <= k_min < k_max, got [{k_min}, {k_max}]")
    if epsilon < 0 or patience < 1:
        raise ModelingError(f"invalid stopping parameters (epsilon={epsilon}, patience={patience})")

    visited: list[int] = []
    w_by_k: dict[int, int] = {}
    stop_reason = "k_max"
    prev_w: int | None = None
    flat_steps = 0

    for k in range(k_min, k_max + 1):
        w = int(w_for_k(k))
        visited.append(k)
        w_by_k[k] = w
        if k <= DEGENERATE_K:
            continue
        if w == 0:
            stop_reason = "w_zero"
            break
        if prev_w is not None:
            improvement = (prev_w - w) / max(prev_w, 1)
            flat_steps = flat_steps + 1 if improvement < epsilon else 0
            if flat_steps >= patience:
                stop_reason = "patience"
                break
        prev_w = w

    informative = [k for k in visited if k > DEGENERATE_K]
    pool = informative if informative else visited
    best_w = min(w_by_k[k] for k in pool)
    chosen = min(k for k in pool if w_by_k[k] == best_w)
    return chosen, visited, w_by_k, stop_reason


def select_k(
    corpus: TokenizedCorpus,
    k_min: int,
    k_max: int,
    *,
    alpha: float | None = None,
    beta: float = 0.01,
    iterations: int = 200,
    seed: int = 0,
    epsilon: float = 0.01,
    patience: int = 2,
    average_last: int = 0,
    keep_models: bool = False,
) -> SelectionResult:
    """Train across [k_min, k_max] and pick k; alpha=None uses 50/k per k."""
    reports: dict[int, SkewReport] = {}
    models: dict[int, LdaModel] = {}

    def w_for_k(k: int) -> int:
        model = gibbs_train(
            corpus,
            k=k,
            alpha=alpha if alpha is not None else default_alpha(k),
            beta=beta,
            iterations=iterations,
            seed=chain_seed(seed, k),
            average_last=average_last,
        )
        report = SkewReport.from_model(model)
        reports[k] = report
        if keep_models:
            models[k] = model
        log.debug("k=%d -> W_k=%d", k, report.w_k)
        return report.w_k

    chosen, visited, w_by_k, reason = run_selection_scan(w_for_k, k_min, k_max, epsilon, patience)
    return SelectionResult(
        chosen_k=chosen,
        visited=visited,
        w_by_k=w_by_k,
        reports=reports,
        stop_reason=reason,
        models=models,
    )
