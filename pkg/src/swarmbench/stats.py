"""Descriptive statistics, one-way and balanced two-way ANOVA, Fisher's LSD.

Tail probabilities come from the regularized incomplete beta function,
evaluated by a modified Lentz continued fraction to ~1e-12 accuracy:
    P(F > f; d1, d2)   = I_x(d2/2, d1/2),  x = d2 / (d2 + d1 f)
    P(|T| > t; df)     = I_x(df/2, 1/2),   x = df / (df + t^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class SampleGroup:
    """Labeled measurements for one factor level."""

    label: str
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) == 0:
            raise ValueError(f"group {self.label!r} is empty")


@dataclass(frozen=True)
class AnovaResult:
    F: float
    df_between: int
    df_within: int
    p: float
    group_means: dict[str, float]
    mse: float


@dataclass(frozen=True)
class EffectResult:
    name: str
    F: float
    df_effect: int
    df_error: int
    p: float


@dataclass(frozen=True)
class TwoWayAnovaResult:
    factor_a: EffectResult
    factor_b: EffectResult
    interaction: EffectResult
    mse: float


@dataclass(frozen=True)
class PairwiseComparison:
    label_a: str
    label_b: str
    mean_diff: float
    t: float
    p: float
    significant: bool


_BETACF_MAX_ITER = 400
_BETACF_EPS = 1e-14
_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not (a > 0 and b > 0):
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(f: float, df1: int, df2: int) -> float:
    """Upper tail P(F > f) of the F distribution."""
    if f <= 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    x = df2 / (df2 + df1 * f)
    return regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, x)


def t_sf_two_sided(t: float, df: int) -> float:
    """Two-sided tail P(|T| > t) of Student's t distribution."""
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def describe(group: SampleGroup) -> tuple[float, Optional[float]]:
    """Mean and sample standard deviation (n-1); sd is None for n < 2."""
    n = len(group.values)
    mean = math.fsum(group.values) / n
    if n < 2:
        return mean, None
    ss = math.fsum((v - mean) ** 2 for v in group.values)
    return mean, math.sqrt(ss / (n - 1))


def anova_oneway(groups: Sequence[SampleGroup]) -> AnovaResult:
    """Standard between/within decomposition over two or more groups."""
    groups = list(groups)
    if len(groups) < 2:
        raise ValueError("one-way ANOVA needs at least two groups")
    for g in groups:
        if len(g.values) < 2:
            raise ValueError(f"group {g.label!r} needs at least two values")
    n_total = sum(len(g.values) for g in groups)
    grand = math.fsum(v for g in groups for v in g.values) / n_total
    means = {g.label: math.fsum(g.values) / len(g.values) for g in groups}
    ss_between = math.fsum(len(g.values) * (means[g.label] - grand) ** 2
                           for g in groups)
    ss_within = math.fsum((v - means[g.label]) ** 2
                          for g in groups for v in g.values)
    df_between = len(groups) - 1
    df_within = n_total - len(groups)
    mse = ss_within / df_within
    if ss_within == 0.0:
        if ss_between == 0.0:
            return AnovaResult(0.0, df_between, df_within, 1.0, means, 0.0)
        return AnovaResult(math.inf, df_between, df_within, 0.0, means, 0.0)
    f = (ss_between / df_between) / mse
    return AnovaResult(f, df_between, df_within, f_sf(f, df_between, df_within),
                       means, mse)


def anova_twoway_balanced(table) -> TwoWayAnovaResult:
    """Balanced two-way ANOVA with interaction.

    ``table[i][j]`` holds the replicate values for level i of factor A and
    level j of factor B; every cell must have the same replicate count >= 2.
    """
    cells = [[tuple(float(v) for v in cell) for cell in row] for row in table]
    a = len(cells)
    if a < 2 or len(cells[0]) < 2:
        raise ValueError("two-way ANOVA needs at least two levels per factor")
    b = len(cells[0])
    if any(len(row) != b for row in cells):
        raise ValueError("ragged factor-B levels")
    r = len(cells[0][0])
    if any(len(cell) != r for row in cells for cell in row):
        raise ValueError("unbalanced design: unequal cell replicate counts")
    if r < 2:
        raise ValueError("two-way ANOVA needs at least two replicates per cell")

    n = a * b * r
    grand = math.fsum(v for row in cells for cell in row for v in cell) / n
    cell_means = [[math.fsum(cell) / r for cell in row] for row in cells]
    a_means = [math.fsum(cell_means[i][j] for j in range(b)) / b for i in range(a)]
    b_means = [math.fsum(cell_means[i][j] for i in range(a)) / a for j in range(b)]

    ss_a = r * b * math.fsum((m - grand) ** 2 for m in a_means)
    ss_b = r * a * math.fsum((m - grand) ** 2 for m in b_means)
    ss_ab = r * math.fsum(
        (cell_means[i][j] - a_means[i] - b_means[j] + grand) ** 2
        for i in range(a) for j in range(b))
    ss_err = math.fsum((v - cell_means[i][j]) ** 2
                       for i in range(a) for j in range(b) for v in cells[i][j])
    df_a, df_b, df_ab = a - 1, b - 1, (a - 1) * (b - 1)
    df_err = a * b * (r - 1)
    mse = ss_err / df_err

    def effect(name: str, ss: float, df: int) -> EffectResult:
        if ss_err == 0.0:
            if ss == 0.0:
                return EffectResult(name, 0.0, df, df_err, 1.0)
            return EffectResult(name, math.inf, df, df_err, 0.0)
        f = (ss / df) / mse
        return EffectResult(name, f, df, df_err, f_sf(f, df, df_err))

    return TwoWayAnovaResult(effect("A", ss_a, df_a), effect("B", ss_b, df_b),
                             effect("AxB", ss_ab, df_ab), mse)


def fisher_lsd(result: AnovaResult, groups: Sequence[SampleGroup],
               alpha: float = 0.05) -> list[PairwiseComparison]:
    """Unprotected pairwise t tests pooling the ANOVA's error variance."""
    groups = list(groups)
    out = []
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            ga, gb = groups[i], groups[j]
            mean_a = result.group_means[ga.label]
            mean_b = result.group_means[gb.label]
            diff = mean_a - mean_b
            if result.mse == 0.0:
                equal = diff == 0.0
                out.append(PairwiseComparison(
                    ga.label, gb.label, diff,
                    0.0 if equal else math.inf,
                    1.0 if equal else 0.0, not equal))
                continue
            se = math.sqrt(result.mse * (1.0 / len(ga.values) + 1.0 / len(gb.values)))
            t = abs(diff) / se
            p = t_sf_two_sided(t, result.df_within)
            out.append(PairwiseComparison(ga.label, gb.label, diff, t, p, p < alpha))
    return out
