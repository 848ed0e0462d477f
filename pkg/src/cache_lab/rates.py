"""Exact rate-memory formulas: achievable schemes, lower bounds, gap checks.

All values are ``fractions.Fraction``; M is the cache size normalized by F.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Union

Number = Union[int, Fraction]

__all__ = [
    "Scheme",
    "RatePoint",
    "MemorySharingCoefficients",
    "rate_proposed_point",
    "memory_sharing_coeffs",
    "t_star",
    "rate_mnc",
    "rate_chen_point",
    "rate_mn",
    "rate_tradeoff",
    "sengupta_term",
    "lower_bound_sengupta",
    "lower_bound_cutset",
    "lower_bound",
    "gap_ratio",
    "g_func",
    "h_func",
    "f_odd",
    "f_even",
    "p_func",
    "check_alpha_lower",
    "check_gap_functions",
    "m_breakpoints",
    "m_grid",
    "GapReport",
    "max_gap",
    "render",
]


class Scheme(str, Enum):
    proposed = "proposed"
    mnc_baseline = "mnc_baseline"
    mn_scheme = "mn_scheme"
    chen_point = "chen_point"
    lower_cutset = "lower_cutset"
    lower_sengupta = "lower_sengupta"


@dataclass(frozen=True)
class RatePoint:
    m: Fraction
    rate: Fraction
    scheme: Scheme


@dataclass(frozen=True)
class MemorySharingCoefficients:
    t: int
    alpha_t: Fraction
    beta_t: Fraction

    def rate(self, m: Number) -> Fraction:
        return self.alpha_t * m + self.beta_t


def _frac(x: Number) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _pos(x: Fraction) -> Fraction:
    return x if x > 0 else Fraction(0)


def rate_proposed_point(n: int, k: int) -> Fraction:
    """Worst-case rate of the coded scheme at M = (N-1)/K."""
    if n >= k:
        return Fraction(k, 2)
    return n * (1 - Fraction(n, 2 * k))


def memory_sharing_coeffs(n: int, k: int, t: int) -> MemorySharingCoefficients:
    """Line through the M=1/K point and the uncoded-placement point at t."""
    if not 1 <= t <= k:
        raise ValueError(f"t={t} outside [1, {k}]")
    if t * n == 1:
        raise ValueError("tN == 1 makes the coefficients undefined")
    d = t * n - 1
    alpha = Fraction(k * (k - t), (t + 1) * d) - Fraction(n * (k - 1), d)
    beta = n - Fraction(n, k) - Fraction(k - t, (t + 1) * d) + Fraction(n * (k - 1), k * d)
    return MemorySharingCoefficients(t, alpha, beta)


@lru_cache(maxsize=4096)
def t_star(n: int, k: int) -> int:
    """Smallest t in [K] with the steepest memory-sharing slope."""
    # alpha_t = (K(K-t) - N(K-1)(t+1)) / ((t+1)(tN-1)); compare by cross-multiplying
    best_t, best_num, best_den = 0, 0, 1
    for t in range(1, k + 1):
        den = (t + 1) * (t * n - 1)
        if den == 0:
            raise ValueError("tN == 1 makes the coefficients undefined")
        num = k * (k - t) - n * (k - 1) * (t + 1)
        if best_t == 0 or num * best_den < best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def rate_mnc(n: int, k: int, m: Number) -> Fraction:
    m = _frac(m)
    ts = t_star(n, k)
    if not Fraction(1, k) <= m <= Fraction(ts * n, k):
        raise ValueError(f"M={m} outside [1/K, t*N/K] = [1/{k}, {ts * n}/{k}]")
    return memory_sharing_coeffs(n, k, ts).rate(m)


def rate_chen_point(n: int, k: int) -> RatePoint:
    if n > k:
        raise ValueError("the M=1/K point needs N <= K")
    return RatePoint(Fraction(1, k), n - Fraction(n, k), Scheme.chen_point)


def rate_mn(n: int, k: int, m: Number) -> Fraction:
    """Uncoded-placement scheme, linearly interpolated between M = tN/K points."""
    m = _frac(m)
    if not 0 <= m <= n:
        raise ValueError(f"M={m} outside [0, {n}]")
    def point(t: int) -> tuple[Fraction, Fraction]:
        if t == 0:
            return Fraction(0), Fraction(min(n, k))
        return Fraction(t * n, k), Fraction(k - t, t + 1)

    t = min(math.floor(m * k / n), k - 1)
    (m0, r0), (m1, r1) = point(t), point(t + 1)
    return r0 + (r1 - r0) * (m - m0) / (m1 - m0)


def rate_tradeoff(n: int, k: int, m: Number) -> Fraction:
    """Two-segment curve through (1/K, N-N/K), ((N-1)/K, N-N^2/2K), (t*N/K, MN)."""
    m = _frac(m)
    if k <= n:
        raise ValueError("the trade-off curve needs K > N")
    ts = t_star(n, k)
    lo, mid, hi = Fraction(1, k), Fraction(n - 1, k), Fraction(ts * n, k)
    if not lo <= m <= hi:
        raise ValueError(f"M={m} outside [1/K, t*N/K]")
    if m <= mid:
        return -n * (m / 2 - 1 + Fraction(1, 2 * k))
    slope = (Fraction(k * (k - ts), ts + 1) - n * (k - Fraction(n, 2))) / ((ts - 1) * n + 1)
    return slope * (m - mid) + n - Fraction(n * n, 2 * k)


def sengupta_term(n: int, k: int, m: Number, s: int, l: int) -> Fraction:
    """Bracketed bound for one (s, l) pair, before the max."""
    m = _frac(m)
    rest = n - l * s
    mu = min(-(-rest // l), k - s)
    coupling = Fraction(mu * rest, s + mu) if rest > 0 else Fraction(0)
    return (n - s * m - coupling - _pos(Fraction(n - k * l))) / l


def lower_bound_sengupta(n: int, k: int, m: Number) -> Fraction:
    """Max of ``sengupta_term`` over the whole (s, l) grid, floored at 0."""
    m = _frac(m)
    a, b = m.numerator, m.denominator
    best_num, best_den = 0, 1
    # same arithmetic as sengupta_term, kept in integers over a common denominator
    for s in range(1, k + 1):
        for l in range(1, -(-n // s) + 1):
            rest = n - l * s
            base = n - max(n - k * l, 0)
            if rest > 0:
                mu = min(-(-rest // l), k - s)
                q = s + mu
                num = base * b * q - s * a * q - mu * rest * b
                den = b * q * l
            else:
                num = base * b - s * a
                den = b * l
            if num * best_den > best_num * den:
                best_num, best_den = num, den
    return Fraction(best_num, best_den)


def lower_bound_cutset(n: int, k: int, m: Number) -> Fraction:
    m = _frac(m)
    best = Fraction(0)
    for s in range(1, min(n, k) + 1):
        best = max(best, s - s * m / (n // s))
    return best


def lower_bound(n: int, k: int, m: Number) -> Fraction:
    return max(lower_bound_sengupta(n, k, m), lower_bound_cutset(n, k, m))


def gap_ratio(n: int, k: int, m: Number) -> Fraction:
    m = _frac(m)
    if not k > n >= 3:
        raise ValueError("gap ratio is defined for K > N >= 3")
    if not Fraction(1, k) <= m <= Fraction(n - 1, k):
        raise ValueError(f"M={m} outside [1/K, (N-1)/K]")
    lb = lower_bound(n, k, m)
    if lb <= 0:
        raise ArithmeticError(f"zero lower bound at N={n}, K={k}, M={m}")
    return rate_tradeoff(n, k, m) / lb


def g_func(n: int, k: int, t: int) -> Fraction:
    return memory_sharing_coeffs(n, k, t).alpha_t + Fraction(n, 2)


def h_func(n: int, k: int, t: int) -> Fraction:
    """Completed-square form; same sign as ``g_func`` for tN > 1."""
    a = Fraction(t + n * (t + 1), 2)
    return (k - a) ** 2 + Fraction((t * t - 1) * n * (n - 2), 4) - Fraction(t * t, 4)


def f_odd(n: int, k: int, m: Number) -> Fraction:
    m = _frac(m)
    num = 2 - m - Fraction(1, k)
    den = 2 - (1 - Fraction(1, n)) * m - (1 + Fraction(1, n)) ** 2 / 2
    return num / den


def f_even(n: int, k: int, m: Number) -> Fraction:
    m = _frac(m)
    return 2 * (2 - m - Fraction(1, k)) / (3 - 2 * m)


def p_func(n: int, k: int) -> Fraction:
    return 1 - Fraction(n - 4, k) - Fraction(2, k * n) - Fraction(1, n * n) - Fraction(2, n)


def check_alpha_lower(n: int, k: int) -> tuple[bool, int | None]:
    """True when every slope is at least -N/2; otherwise the first bad t."""
    for t in range(1, k + 1):
        if g_func(n, k, t) < 0:
            return False, t
    return True, None


def _uniform(lo: Fraction, hi: Fraction, count: int) -> list[Fraction]:
    if count < 2:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def m_breakpoints(n: int, k: int) -> list[Fraction]:
    pts = {Fraction(1, k), Fraction(n - 1, k)}
    if k > n:
        pts.add(Fraction(t_star(n, k) * n, k))
    return sorted(pts)


def m_grid(n: int, k: int, fill: int = 20, upper: str = "gap") -> list[Fraction]:
    """Breakpoints plus ``fill`` uniform points.

    ``upper="gap"`` stops at (N-1)/K, ``upper="tradeoff"`` at t*N/K.
    """
    lo = Fraction(1, k)
    hi = Fraction(n - 1, k) if upper == "gap" else Fraction(t_star(n, k) * n, k)
    pts = {p for p in m_breakpoints(n, k) if lo <= p <= hi}
    pts.update(_uniform(lo, hi, fill))
    return sorted(pts)


@dataclass(frozen=True)
class GapReport:
    n: int
    k: int
    h_ok: bool
    f_monotone_ok: bool
    p_ok: bool
    endpoint_bound: Fraction
    p_value: Fraction | None

    @property
    def ok(self) -> bool:
        return self.h_ok and self.f_monotone_ok and self.p_ok


def check_gap_functions(n: int, k: int, samples: int = 100) -> GapReport:
    """Numerical pass over the helper functions behind the factor-2 gap.

    odd N: f nondecreasing on the grid and p(N, K) >= 0.
    even N: the ratio bound nondecreasing and its endpoint value <= 2.
    """
    if not k > n >= 3:
        raise ValueError("needs K > N >= 3")
    h_ok = all(h_func(n, k, t) >= 0 for t in range(1, k + 1))
    grid = m_grid(n, k, samples, upper="gap")
    f = f_odd if n % 2 else f_even
    vals = [f(n, k, m) for m in grid]
    monotone = all(a <= b for a, b in zip(vals, vals[1:]))
    endpoint = f(n, k, Fraction(n - 1, k))
    if n % 2:
        p = p_func(n, k)
        p_ok = p >= 0 and (endpoint <= 2) == (p >= 0)
    else:
        p = None
        p_ok = endpoint == Fraction(2 * (2 * k - n), 3 * k - 2 * n + 2) and endpoint <= 2
    return GapReport(n, k, h_ok, monotone, p_ok, endpoint, p)


def max_gap(n: int, k: int, grid: Iterable[Fraction] | None = None) -> Fraction:
    grid = m_grid(n, k) if grid is None else grid
    return max(gap_ratio(n, k, m) for m in grid)


def render(x: Fraction, digits: int = 12) -> str:
    """Decimal rendering at ``digits`` significant digits."""
    if x == 0:
        return "0"
    return f"{float(x):.{digits}g}" if math.isfinite(float(x)) else str(x)
