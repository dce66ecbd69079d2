"""Agreement and comparison statistics for the measurement protocol.

Implements interval-level chance-corrected agreement over incomplete
rating designs (with a percentile bootstrap over units), rank correlation,
mean absolute difference, two-way random-effects intraclass correlation,
and the two nonparametric tests.  Exact small-sample null distributions
are computed by dynamic programming; the test suite checks them against
full enumeration oracles.  All p-values are two-sided.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import betainc

from .errors import UndefinedStatisticError
from .kernels import alpha_from_stats, bootstrap_alphas

logger = logging.getLogger(__name__)

# Largest sample sizes handled by exact null distributions; larger samples
# use the normal approximation with tie correction and continuity correction.
WILCOXON_EXACT_MAX_N = 25
MANN_WHITNEY_EXACT_MAX_N = 12


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _t_sf(t: float, df: float) -> float:
    # P(T > t) for Student's t via the regularized incomplete beta function.
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    p = 0.5 * float(betainc(df / 2.0, 0.5, x))
    return p if t >= 0 else 1.0 - p


def rankdata_average(values: Sequence[float]) -> np.ndarray:
    """1-based ranks with ties assigned the average of their positions."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr), dtype=np.float64)
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


# ---------------------------------------------------------------------------
# Rating matrices and interval-level agreement
# ---------------------------------------------------------------------------


@dataclass
class RatingMatrix:
    """Units x raters score matrix; NaN marks missing cells.

    Units with fewer than two present cells cannot contribute paired
    observations and are excluded from agreement computations (with a
    notice); ``pairable()`` returns the retained view.
    """

    units: list[str]
    raters: list[str]
    cells: np.ndarray

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.float64)
        if self.cells.shape != (len(self.units), len(self.raters)):
            raise ValueError("cells shape must be (len(units), len(raters))")
        if len(self.raters) < 2:
            raise ValueError("agreement requires at least two raters")

    @classmethod
    def from_records(cls, records: Iterable[tuple[str, str, float]]) -> "RatingMatrix":
        """Build from (unit_id, rater_id, score) triples."""
        units: list[str] = []
        raters: list[str] = []
        scores: dict[tuple[str, str], float] = {}
        for unit, rater, score in records:
            if unit not in units:
                units.append(unit)
            if rater not in raters:
                raters.append(rater)
            scores[(unit, rater)] = float(score)
        cells = np.full((len(units), len(raters)), np.nan)
        for (unit, rater), score in scores.items():
            cells[units.index(unit), raters.index(rater)] = score
        return cls(units=units, raters=raters, cells=cells)

    @classmethod
    def from_csv(cls, path: Path) -> "RatingMatrix":
        """Read a ratings CSV with columns unit_id, rater_id, score (blank = missing)."""
        records = []
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                score = (row.get("score") or "").strip()
                if not score:
                    continue
                records.append((row["unit_id"].strip(), row["rater_id"].strip(), float(score)))
        return cls.from_records(records)

    def pairable(self) -> tuple["RatingMatrix", list[str]]:
        """The sub-matrix of units with >= 2 present cells, plus the excluded unit ids."""
        present = np.sum(~np.isnan(self.cells), axis=1)
        keep = present >= 2
        excluded = [u for u, k in zip(self.units, keep) if not k]
        if excluded:
            logger.info("excluding %d unit(s) with fewer than two ratings: %s", len(excluded), excluded)
        kept = RatingMatrix(
            units=[u for u, k in zip(self.units, keep) if k],
            raters=list(self.raters),
            cells=self.cells[keep],
        )
        return kept, excluded


def _unit_stats(cells: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-unit sufficient statistics (m, sum, sum of squares, observed-pair term)."""
    mask = ~np.isnan(cells)
    m = mask.sum(axis=1).astype(np.float64)
    filled = np.where(mask, cells, 0.0)
    s1 = filled.sum(axis=1)
    s2 = (filled * filled).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        do = 2.0 * (m * s2 - s1 * s1) / (m - 1.0)
    return m, s1, s2, do


def krippendorff_alpha_interval(matrix: RatingMatrix) -> float:
    """Interval-level chance-corrected agreement over pairable values.

    Uses the coincidence formulation with squared-difference distance:
    alpha = 1 - D_o / D_e where D_o averages within-unit ordered-pair
    squared differences weighted by 1/(m_u - 1) and D_e averages squared
    differences over all cross-unit ordered pairs of pairable values.
    """
    kept, _excluded = matrix.pairable()
    if not kept.units:
        raise UndefinedStatisticError("undefined-alpha: no unit has two or more ratings")
    m, s1, s2, do = _unit_stats(kept.cells)
    total = m.sum()
    if total < 2:
        raise UndefinedStatisticError("undefined-alpha: fewer than two pairable values")
    alpha = alpha_from_stats(m, s1, s2, do)
    if math.isnan(alpha):
        raise UndefinedStatisticError("undefined-alpha: expected disagreement is zero")
    return float(alpha)


class BootstrapCI(NamedTuple):
    low: float
    high: float
    skipped: int


def bootstrap_alpha_ci(
    matrix: RatingMatrix, iterations: int = 10000, seed: int = 0
) -> BootstrapCI:
    """Percentile bootstrap CI for alpha, resampling units with replacement.

    Deterministic for a given seed.  Resamples whose alpha is undefined
    (zero expected disagreement) are skipped and counted.
    """
    kept, _excluded = matrix.pairable()
    if not kept.units:
        raise UndefinedStatisticError("undefined-alpha: no unit has two or more ratings")
    m, s1, s2, do = _unit_stats(kept.cells)
    n_units = len(kept.units)
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, n_units, size=(iterations, n_units), dtype=np.int64)
    alphas = bootstrap_alphas(draws, m, s1, s2, do)
    valid = alphas[~np.isnan(alphas)]
    skipped = int(iterations - valid.size)
    if skipped:
        logger.info("bootstrap: skipped %d resample(s) with undefined alpha", skipped)
    if valid.size == 0:
        raise UndefinedStatisticError("undefined-alpha: every bootstrap resample was degenerate")
    low, high = np.percentile(valid, [2.5, 97.5])
    return BootstrapCI(low=float(low), high=float(high), skipped=skipped)


# ---------------------------------------------------------------------------
# Correlation and deviation
# ---------------------------------------------------------------------------


class SpearmanResult(NamedTuple):
    rho: float
    p_value: float


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> SpearmanResult:
    """Rank correlation with average ranks for ties; p from the t approximation."""
    if len(x) != len(y):
        raise ValueError("inputs must have equal length")
    n = len(x)
    if n < 3:
        raise ValueError("need at least three pairs")
    rx = rankdata_average(x)
    ry = rankdata_average(y)
    sx = rx.std()
    sy = ry.std()
    if sx == 0.0 or sy == 0.0:
        raise UndefinedStatisticError("undefined-correlation: constant input vector")
    rho = float(((rx - rx.mean()) * (ry - ry.mean())).mean() / (sx * sy))
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        return SpearmanResult(rho=rho, p_value=0.0)
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = 2.0 * _t_sf(abs(t), n - 2)
    return SpearmanResult(rho=rho, p_value=min(1.0, p))


def mad_pairs(pairs: Sequence[tuple[float, float]]) -> float:
    """Mean absolute difference over paired scores."""
    if not pairs:
        raise ValueError("need at least one pair")
    return float(np.mean([abs(a - b) for a, b in pairs]))


# ---------------------------------------------------------------------------
# Intraclass correlation (two-way random effects, absolute agreement)
# ---------------------------------------------------------------------------


def icc(matrix: np.ndarray, form: str = "single") -> float:
    """ICC for a complete units x raters matrix.

    ``form="single"`` rates one judge, ``form="average"`` the mean of all
    judges.  Mean squares come from the standard two-way ANOVA
    decomposition without replication.
    """
    if form not in ("single", "average"):
        raise ValueError("form must be 'single' or 'average'")
    cells = np.asarray(matrix, dtype=np.float64)
    if cells.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    if np.isnan(cells).any():
        raise ValueError("ICC requires a complete matrix (no missing cells)")
    n, k = cells.shape
    if n < 2 or k < 2:
        raise ValueError("need at least two units and two raters")

    grand = cells.mean()
    row_means = cells.mean(axis=1)
    col_means = cells.mean(axis=0)
    msr = k * np.sum((row_means - grand) ** 2) / (n - 1)
    msc = n * np.sum((col_means - grand) ** 2) / (k - 1)
    residual = cells - row_means[:, None] - col_means[None, :] + grand
    mse = np.sum(residual**2) / ((n - 1) * (k - 1))

    if form == "single":
        denom = msr + (k - 1) * mse + (k / n) * (msc - mse)
    else:
        denom = msr + (msc - mse) / n
    if denom == 0.0:
        raise UndefinedStatisticError("undefined-icc: degenerate variance decomposition")
    return float((msr - mse) / denom)


# ---------------------------------------------------------------------------
# Nonparametric tests
# ---------------------------------------------------------------------------


class WilcoxonResult(NamedTuple):
    w_statistic: float  # sum of ranks of positive differences (W+)
    p_value: float
    rank_biserial: float


def _doubled_rank_counts(doubled: list[int]) -> np.ndarray:
    """Null distribution counts of doubled W+ over all sign assignments."""
    total = sum(doubled)
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: counts.size - r]
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(
    pairs: Sequence[tuple[float, float]], exact_max_n: int = WILCOXON_EXACT_MAX_N
) -> WilcoxonResult:
    """Signed-rank test on paired values (differences a - b; zeros dropped).

    Exact two-sided p for n <= ``exact_max_n`` (ties handled through
    average ranks in the enumerated distribution); the normal approximation
    with tie correction and continuity correction above that.  The effect
    size is the matched-pairs rank-biserial correlation (W+ - W-)/(W+ + W-).
    """
    diffs = [a - b for a, b in pairs if a != b]
    n = len(diffs)
    if n == 0:
        raise UndefinedStatisticError("undefined-test: all differences are zero")
    ranks = rankdata_average([abs(d) for d in diffs])
    w_plus = float(sum(r for d, r in zip(diffs, ranks) if d > 0))
    w_minus = float(sum(r for d, r in zip(diffs, ranks) if d < 0))
    rank_biserial = (w_plus - w_minus) / (w_plus + w_minus)

    if n <= exact_max_n:
        doubled = [int(round(2 * r)) for r in ranks]
        counts = _doubled_rank_counts(doubled)
        total = counts.sum()
        w_small = min(w_plus, w_minus)
        threshold = int(round(2 * w_small))
        p = min(1.0, 2.0 * float(counts[: threshold + 1].sum()) / float(total))
    else:
        mean = n * (n + 1) / 4.0
        tie_sizes = _tie_sizes([abs(d) for d in diffs])
        var = n * (n + 1) * (2 * n + 1) / 24.0 - sum(t**3 - t for t in tie_sizes) / 48.0
        z = max(0.0, abs(w_plus - mean) - 0.5) / math.sqrt(var)
        p = min(1.0, 2.0 * _normal_sf(z))
    return WilcoxonResult(w_statistic=w_plus, p_value=p, rank_biserial=rank_biserial)


def _tie_sizes(values: Sequence[float]) -> list[int]:
    sizes: dict[float, int] = {}
    for v in values:
        sizes[v] = sizes.get(v, 0) + 1
    return [c for c in sizes.values() if c > 1]


class MannWhitneyResult(NamedTuple):
    u_statistic: float  # U of the first sample
    p_value: float


def _doubled_subset_rank_counts(doubled: list[int], size: int) -> np.ndarray:
    """Counts of doubled rank sums over all ``size``-element subsets of positions."""
    total = sum(doubled)
    table = np.zeros((size + 1, total + 1), dtype=np.float64)
    table[0, 0] = 1.0
    for r in doubled:
        for chosen in range(min(size, len(doubled)), 0, -1):
            table[chosen, r:] += table[chosen - 1, : total + 1 - r]
    return table[size]


def mann_whitney_u(
    a: Sequence[float], b: Sequence[float], exact_max_n: int = MANN_WHITNEY_EXACT_MAX_N
) -> MannWhitneyResult:
    """Rank-sum test; exact two-sided p when len(a)+len(b) <= ``exact_max_n``.

    Returns U of the first sample: U_a = R_a - n_a(n_a+1)/2, so a sample
    entirely above ``b`` scores n_a * n_b.
    """
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    n_a, n_b = len(a), len(b)
    combined = list(a) + list(b)
    ranks = rankdata_average(combined)
    r_a = float(ranks[:n_a].sum())
    u_a = r_a - n_a * (n_a + 1) / 2.0
    nn = n_a * n_b

    if n_a + n_b <= exact_max_n:
        doubled = [int(round(2 * r)) for r in ranks]
        counts = _doubled_subset_rank_counts(doubled, n_a)
        total = counts.sum()
        u_small = min(u_a, nn - u_a)
        # doubled rank sum corresponding to U' <= u_small
        threshold = int(round(2 * u_small + n_a * (n_a + 1)))
        p = min(1.0, 2.0 * float(counts[: threshold + 1].sum()) / float(total))
    else:
        n = n_a + n_b
        tie_sizes = _tie_sizes(combined)
        tie_term = sum(t**3 - t for t in tie_sizes) / (n * (n - 1))
        var = nn / 12.0 * ((n + 1) - tie_term)
        if var <= 0:
            return MannWhitneyResult(u_statistic=u_a, p_value=1.0)
        z = max(0.0, abs(u_a - nn / 2.0) - 0.5) / math.sqrt(var)
        p = min(1.0, 2.0 * _normal_sf(z))
    return MannWhitneyResult(u_statistic=u_a, p_value=p)
