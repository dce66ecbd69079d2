"""Independent brute-force oracles used by the test suite.

Everything here is written as literal loops / full enumeration and must
stay independent of the package implementations it checks.
"""

from __future__ import annotations

import itertools
import math


def levenshtein_oracle(a: str, b: str) -> int:
    dp = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        prev = dp[:]
        dp[0] = i
        for j, cb in enumerate(b, 1):
            dp[j] = min(prev[j] + 1, dp[j - 1] + 1, prev[j - 1] + (ca != cb))
    return dp[len(b)]


def alpha_interval_oracle(rows: list[list[float | None]]) -> float:
    """Literal double loop over all pairable value pairs (interval distance)."""
    units = [[v for v in row if v is not None] for row in rows]
    units = [u for u in units if len(u) >= 2]
    n = sum(len(u) for u in units)
    d_o = 0.0
    for unit in units:
        m = len(unit)
        s = 0.0
        for i in range(m):
            for j in range(m):
                if i != j:
                    s += (unit[i] - unit[j]) ** 2
        d_o += s / (m - 1)
    d_o /= n
    pooled = [v for unit in units for v in unit]
    d_e = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                d_e += (pooled[i] - pooled[j]) ** 2
    d_e /= n * (n - 1)
    if d_e == 0.0:
        raise ZeroDivisionError("expected disagreement is zero")
    return 1.0 - d_o / d_e


def ranks_with_ties(values: list[float]) -> list[float]:
    out = []
    for v in values:
        below = sum(1 for w in values if w < v)
        equal = sum(1 for w in values if w == v)
        out.append(below + (equal + 1) / 2.0)
    return out


def spearman_rho_oracle(x: list[float], y: list[float]) -> float:
    rx, ry = ranks_with_ties(list(x)), ranks_with_ties(list(y))
    n = len(rx)
    mx, my = sum(rx) / n, sum(ry) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    return cov / math.sqrt(vx * vy)


def t_sf_quadrature(t: float, df: int) -> float:
    """P(T > t) for Student's t by numerical quadrature of the density.

    Integrates the finite interval [0, |t|] and uses symmetry, which avoids
    truncating the heavy tail.
    """
    from scipy.integrate import quad

    const = math.gamma((df + 1) / 2.0) / (math.sqrt(df * math.pi) * math.gamma(df / 2.0))

    def pdf(u):
        return const * (1.0 + u * u / df) ** (-(df + 1) / 2.0)

    body, _err = quad(pdf, 0.0, abs(t), limit=200)
    tail = 0.5 - body
    return tail if t >= 0 else 1.0 - tail


def icc_oracle(matrix: list[list[float]], form: str) -> float:
    """Explicit mean-squares computation for two-way random effects, absolute agreement."""
    n = len(matrix)
    k = len(matrix[0])
    total = sum(sum(row) for row in matrix)
    grand = total / (n * k)
    row_means = [sum(row) / k for row in matrix]
    col_means = [sum(matrix[i][j] for i in range(n)) / n for j in range(k)]
    msr = k * sum((rm - grand) ** 2 for rm in row_means) / (n - 1)
    msc = n * sum((cm - grand) ** 2 for cm in col_means) / (k - 1)
    sse = 0.0
    for i in range(n):
        for j in range(k):
            sse += (matrix[i][j] - row_means[i] - col_means[j] + grand) ** 2
    mse = sse / ((n - 1) * (k - 1))
    if form == "single":
        return (msr - mse) / (msr + (k - 1) * mse + (k / n) * (msc - mse))
    return (msr - mse) / (msr + (msc - mse) / n)


def wilcoxon_oracle(pairs: list[tuple[float, float]]) -> tuple[float, float, float]:
    """(W+, exact two-sided p, rank-biserial) via full sign enumeration."""
    diffs = [a - b for a, b in pairs if a != b]
    n = len(diffs)
    ranks = ranks_with_ties([abs(d) for d in diffs])
    w_plus = sum(r for d, r in zip(diffs, ranks) if d > 0)
    w_minus = sum(r for d, r in zip(diffs, ranks) if d < 0)
    w_small = min(w_plus, w_minus)
    count = 0
    for signs in itertools.product((1, -1), repeat=n):
        w = sum(r for s, r in zip(signs, ranks) if s > 0)
        if w <= w_small + 1e-12:
            count += 1
    p = min(1.0, 2.0 * count / 2**n)
    return w_plus, p, (w_plus - w_minus) / (w_plus + w_minus)


def mann_whitney_oracle(a: list[float], b: list[float]) -> tuple[float, float]:
    """(U_a, exact two-sided p) via enumeration of all group-a position subsets."""
    n_a, n_b = len(a), len(b)
    combined = list(a) + list(b)
    ranks = ranks_with_ties(combined)
    r_a = sum(ranks[:n_a])
    u_a = r_a - n_a * (n_a + 1) / 2.0
    u_small = min(u_a, n_a * n_b - u_a)
    count = total = 0
    for subset in itertools.combinations(range(n_a + n_b), n_a):
        u = sum(ranks[i] for i in subset) - n_a * (n_a + 1) / 2.0
        total += 1
        if u <= u_small + 1e-12:
            count += 1
    return u_a, min(1.0, 2.0 * count / total)


def cosine_oracle(u: list[float], v: list[float]) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def cosine_pairwise_exact(u: list[float], v: list[float]) -> float:
    """Cosine for the exact-equivalence pipeline oracle.

    np.dot on one vector pair is the shared arithmetic primitive; with
    serial Python summation, mathematically tied similarities can round to
    different last bits than the implementation sees, which makes exact
    tie-break comparison ill-defined.  Ranking, fusion, truncation and
    tie-breaks below remain fully independent re-implementations.
    """
    import numpy as np

    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b)) / (norm_a * norm_b)


def search_pipeline_oracle(
    docs_by_kind: dict[str, dict[str, list[float]]],
    query_vec: list[float],
    allowed_kinds: list[str],
    rrf_k: float,
    top_n: int,
) -> list[tuple[str, float]]:
    """Full cosine matrix + direct RRF formula over every document (no shortcuts)."""
    ranked_lists = []
    for kind in allowed_kinds:
        docs = docs_by_kind.get(kind, {})
        if not docs:
            continue
        sims = [(doc_id, cosine_pairwise_exact(query_vec, vec)) for doc_id, vec in docs.items()]
        sims.sort(key=lambda item: (-item[1], item[0]))
        ranked_lists.append([doc_id for doc_id, _sim in sims[:top_n]])
    scores: dict[str, list[int]] = {}
    for ranked in ranked_lists:
        for position, doc_id in enumerate(ranked, start=1):
            scores.setdefault(doc_id, []).append(position)
    fused = [
        (doc_id, sum(1.0 / (rrf_k + r) for r in sorted(positions)))
        for doc_id, positions in scores.items()
    ]
    fused.sort(key=lambda item: (-item[1], item[0]))
    return fused[:top_n]
