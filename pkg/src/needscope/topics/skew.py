"""Skewness of per-need topic distributions and the W_k statistic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gibbs import LdaModel, infer_distributions


def skewness(probs) -> float:
    """Pearson's second skewness coefficient, 3*(mean - median)/std.

    Uses the population standard deviation; the median of an even-length
    vector is the mean of the two middle order statistics. A zero-spread
    vector returns exactly 0 by convention, so degenerate uniform
    distributions never count as negatively skewed. All-equal input is
    detected via max == min, which is exact even where the float mean of
    identical values drifts by an ulp.
    """
    arr = np.asarray(probs, dtype=np.float64)
    if arr.size == 0 or arr.max() == arr.min():
        return 0.0
    sigma = float(arr.std())
    if sigma == 0.0:
        return 0.0
    return float(3.0 * (arr.mean() - np.median(arr)) / sigma)


@dataclass(slots=True)
class SkewReport:
    """Per-need skewness under one k, plus the negative-skew count W_k.

    ``degenerate`` marks k = 2, where the statistic is identically zero for
    every probability vector (the median of two values equals their mean), so
    W_2 = 0 carries no information about fit.
    """

    k: int
    per_need: dict[str, float]
    w_k: int
    degenerate: bool

    @classmethod
    def from_model(cls, model: LdaModel) -> "SkewReport":
        per_need = {
            dist.need_id: skewness(dist.probs) for dist in infer_distributions(model)
        }
        w_k = sum(1 for value in per_need.values() if value < 0.0)
        return cls(k=model.k, per_need=per_need, w_k=w_k, degenerate=model.k == 2)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "w_k": self.w_k,
            "degenerate": self.degenerate,
            "per_need": dict(sorted(self.per_need.items())),
        }
