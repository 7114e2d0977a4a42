"""Wetting/layering phase structure: Chalker's criteria, the layering
windows, and grid scans combining them with the series dominant level."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .clusters import dominant_level
from .errors import EpsilonRange, ParamsInvalid, ParamsOutOfRange
from .params import ModelParams, t1

PARTIAL = "partial_wetting_chalker"
COMPLETE = "complete_wetting_chalker"
UNRESOLVED = "unresolved"


def chalker_thresholds(J: float, beta: float) -> tuple[float, float]:
    """(partial threshold, complete threshold) for u = 2 beta (J - K).

    Above the first the interface is pinned (rho_0 > 0); below the second it
    departs (rho_0 = 0); in between the theorem is silent.
    """
    if J <= 0 or beta <= 0:
        raise ParamsInvalid("need J > 0 and beta > 0")
    x = math.exp(-2.0 * beta * J)
    partial = -math.log((1.0 - x) / (16.0 * (1.0 + x)))
    complete = -math.log1p(-math.exp(-8.0 * beta * J))
    return partial, complete


def chalker_classify(J: float, K: float, beta: float) -> str:
    partial, complete = chalker_thresholds(J, beta)
    u = 2.0 * beta * (J - K)
    if u > partial:
        return PARTIAL
    if u < complete:
        return COMPLETE
    return UNRESOLVED


def partial_boundary_K(J: float, beta: float) -> float:
    """K on the partial-wetting boundary at this beta; slope in the
    (K, 1/beta) plane tends to -2 ln 2 as beta grows."""
    partial, _ = chalker_thresholds(J, beta)
    return J - partial / (2.0 * beta)


def layering_windows(t: float, epsilon: float, n_max: int) -> list[tuple[int, float, float]]:
    """(n, u_lo, u_hi) for n = 0..n_max; level n is selected inside its window."""
    if not (0.0 < epsilon < 2.0):
        raise EpsilonRange(f"epsilon must lie in (0,2), got {epsilon}")
    if not (0.0 < t < 1.0):
        raise ParamsInvalid(f"t must lie in (0,1), got {t}")
    base = -math.log1p(-t * t)
    out = []
    for n in range(n_max + 1):
        lo = base + (2.0 + epsilon) * t ** (n + 3)
        hi = math.sqrt(t) if n == 0 else base + (2.0 - epsilon) * t ** (n + 2)
        out.append((n, lo, hi))
    return out


def window_of(t: float, u: float, epsilon: float, n_max: int) -> int | None:
    for n, lo, hi in layering_windows(t, epsilon, n_max):
        if lo < u < hi:
            return n
    return None


@dataclass
class PhasePoint:
    K: float
    beta_inv: float
    t: float
    u: float
    J: float
    chalker: str
    window_n: int | None
    dominant: int | None
    margin: float | None
    series_trusted: bool | None


SCAN_COLUMNS = [
    "K",
    "beta_inv",
    "t",
    "u",
    "J",
    "chalker",
    "window_n",
    "dominant",
    "margin",
    "series_trusted",
]


def classify_point(
    t: float,
    u: float,
    J: float,
    epsilon: float,
    k: int,
    order: int,
    h_max: int,
    n_max: int,
) -> PhasePoint:
    p = ModelParams(t=t, u=u, J=J)
    chalker = chalker_classify(J, p.K, p.beta)
    window_n = window_of(t, u, epsilon, n_max)
    dominant = margin = trusted = None
    try:
        rep = dominant_level(p, k, order, h_max)
        dominant = rep.level
        others = [v for h, v in rep.margins.items() if h != rep.level]
        margin = min(others) if others else 0.0
        trusted = rep.series_trusted
    except ParamsOutOfRange:
        pass
    return PhasePoint(
        K=p.K,
        beta_inv=1.0 / p.beta,
        t=t,
        u=u,
        J=J,
        chalker=chalker,
        window_n=window_n,
        dominant=dominant,
        margin=margin,
        series_trusted=trusted,
    )


def scan_grid(
    t_values,
    u_values,
    J: float = 1.0,
    epsilon: float = 0.5,
    k: int = 8,
    order: int = 6,
    h_max: int = 3,
    n_max: int = 4,
) -> list[PhasePoint]:
    pts = [
        classify_point(t, u, J, epsilon, k, order, h_max, n_max)
        for t in t_values
        for u in u_values
    ]
    pts.sort(key=lambda p: (p.t, p.u))
    return pts


def points_to_csv(points: list[PhasePoint]) -> str:
    lines = [",".join(SCAN_COLUMNS)]
    for p in points:
        row = [
            f"{p.K:.12g}",
            f"{p.beta_inv:.12g}",
            f"{p.t:.12g}",
            f"{p.u:.12g}",
            f"{p.J:.12g}",
            p.chalker,
            "" if p.window_n is None else str(p.window_n),
            "" if p.dominant is None else str(p.dominant),
            "" if p.margin is None else f"{p.margin:.6g}",
            "" if p.series_trusted is None else str(p.series_trusted).lower(),
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def fit_partial_slope(J: float = 1.0, betas=(40.0, 80.0, 160.0)) -> float:
    """Least-squares slope of the partial-wetting boundary in (K, 1/beta)."""
    pts = [(1.0 / b, partial_boundary_K(J, b)) for b in betas]
    xbar = sum(x for x, _ in pts) / len(pts)
    ybar = sum(y for _, y in pts) / len(pts)
    num = sum((x - xbar) * (y - ybar) for x, y in pts)
    den = sum((x - xbar) ** 2 for x, _ in pts)
    return num / den
