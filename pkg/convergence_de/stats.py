"""
Rank-based comparison of final fitness samples: Kruskal-Wallis omnibus,
pairwise Mann-Whitney U, Holm step-down adjustment and the significance
symbols used in the reports.
"""

from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy import stats as scipy_stats

STRONG_LEVEL = 0.01
WEAK_LEVEL = 0.05

SYMBOLS = {"strong": "≫", "weak": ">", "none": "≈"}
ASCII_SYMBOLS = {"≫": ">>", ">": ">", "≈": "~"}


class SampleGroup(BaseModel):
    label: str
    values: List[float]

    @field_validator("values")
    @classmethod
    def _check_values(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("a sample group needs at least one value")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values must be finite")
        return values

    @property
    def median(self) -> float:
        return float(np.median(self.values))

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))


class TestResult(BaseModel):
    statistic: float
    p_value: float = Field(ge=0, le=1)
    adjusted_p: Optional[float] = None


class SignificanceSymbol(BaseModel):
    symbol: Literal["≫", ">", "≈"]
    better: Optional[str] = None

    @property
    def ascii(self) -> str:
        return ASCII_SYMBOLS[self.symbol]


def rank_with_ties(values: Sequence[float]) -> np.ndarray:
    """Ranks 1..N, tied values sharing the average of their span."""
    return scipy_stats.rankdata(np.asarray(values, dtype=float), method="average")


def kruskal_wallis(groups: List[SampleGroup]) -> TestResult:
    """
    Tie-corrected H with a chi-square(g - 1) p-value. All-identical pooled
    values give H = 0, p = 1.
    """
    if len(groups) < 2:
        raise ValueError(f"Kruskal-Wallis needs at least 2 groups, got {len(groups)}")
    pooled = np.concatenate([g.values for g in groups])
    if np.all(pooled == pooled[0]):
        return TestResult(statistic=0.0, p_value=1.0)
    statistic, p_value = scipy_stats.kruskal(*[g.values for g in groups])
    return TestResult(statistic=float(statistic), p_value=float(min(1.0, p_value)))


def mann_whitney_u(a: SampleGroup, b: SampleGroup) -> TestResult:
    """
    U of ``a`` (pairs where a exceeds b, ties half) with a two-sided normal
    approximation, tie correction and continuity correction.
    """
    pooled = np.concatenate([a.values, b.values])
    if np.all(pooled == pooled[0]):
        return TestResult(statistic=len(a.values) * len(b.values) / 2.0, p_value=1.0)
    result = scipy_stats.mannwhitneyu(
        a.values, b.values, alternative="two-sided", use_continuity=True, method="asymptotic"
    )
    return TestResult(statistic=float(result.statistic), p_value=float(min(1.0, result.pvalue)))


def holm_adjust(p_values: Sequence[float]) -> List[float]:
    """
    Holm step-down: adjusted_(i) = max_{j <= i} min(1, (m - j + 1) p_(j)), in the input order.
    """
    p = np.asarray(p_values, dtype=float)
    if p.size == 0:
        return []
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = len(p)
    order = np.argsort(p, kind="stable")
    scaled = np.minimum(1.0, (m - np.arange(m)) * p[order])
    adjusted = np.empty(m)
    adjusted[order] = np.maximum.accumulate(scaled)
    return adjusted.tolist()


def better_group(a: SampleGroup, b: SampleGroup) -> Optional[str]:
    """Lower median wins, then lower mean; None when both agree."""
    if a.median != b.median:
        return a.label if a.median < b.median else b.label
    if a.mean != b.mean:
        return a.label if a.mean < b.mean else b.label
    return None


def render_significance(adjusted_p: float, better: Optional[str]) -> SignificanceSymbol:
    if adjusted_p < STRONG_LEVEL:
        symbol = SYMBOLS["strong"]
    elif adjusted_p < WEAK_LEVEL:
        symbol = SYMBOLS["weak"]
    else:
        symbol = SYMBOLS["none"]
    return SignificanceSymbol(symbol=symbol, better=better)
