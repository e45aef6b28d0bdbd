"""Log-domain probability primitives shared by every other module.

Probabilities cross module boundaries as natural logarithms: floats <= 0,
with ``-inf`` standing for probability zero (:data:`LOG_ZERO`).  The failure
probabilities handled downstream range from below 1e-300 to 1 - 1e-16, so
linear-space values are produced only at presentation time.

Rates (probability parameters) are floats in [0, 1].  Exact rationals
(:class:`fractions.Fraction`) are accepted wherever a threshold fraction
enters a floor computation, because floor((1/3) * 3) must evaluate to 1
and not to floor(0.999...) = 0.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

import numpy as np
from scipy.special import gammaln

__all__ = [
    "LOG_ZERO",
    "RateLike",
    "binomial_tail_and_cdf",
    "floor_rate_multiple",
    "kl_divergence",
    "log1mexp",
    "log_binomial_coefficient",
    "log_binomial_coefficients",
    "log_sum_exp",
    "rate_as_float",
    "stable_complement_product",
]

#: Log-domain representation of probability zero.
LOG_ZERO = float("-inf")

#: A probability parameter, either a float or an exact rational in [0, 1].
RateLike = Union[float, Fraction]

_LN2 = math.log(2.0)


def rate_as_float(value: RateLike, name: str = "rate") -> float:
    """Validate a rate and return it as a float in [0, 1]."""
    x = float(value)
    if math.isnan(x) or x < 0.0 or x > 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return x


def floor_rate_multiple(rate: RateLike, n: int) -> int:
    """floor(rate * n), exact when ``rate`` is a Fraction.

    Float rates go through ordinary floating-point flooring; callers that
    care about boundary cases such as rate = 1/3, n = 3 should pass a
    Fraction.
    """
    if isinstance(rate, Fraction):
        return (rate.numerator * n) // rate.denominator
    return math.floor(float(rate) * n)


def log1mexp(x: float) -> float:
    """log(1 - exp(x)) for x <= 0, without catastrophic cancellation."""
    if x > 0.0:
        raise ValueError(f"log1mexp requires x <= 0, got {x!r}")
    if x == 0.0:
        return LOG_ZERO
    if x == LOG_ZERO:
        return 0.0
    if x > -_LN2:
        return math.log(-math.expm1(x))
    return math.log1p(-math.exp(x))


def log_sum_exp(terms: np.ndarray) -> float:
    """Stable log(sum(exp(terms))) with a fixed (ascending-index) sum order.

    Uses ``math.fsum`` after the max shift, so the result is deterministic
    and exact to within one rounding of the shifted sum.
    """
    arr = np.asarray(terms, dtype=np.float64)
    if arr.size == 0:
        return LOG_ZERO
    m = float(arr.max())
    if m == LOG_ZERO:
        return LOG_ZERO
    if math.isnan(m):
        raise ValueError("log_sum_exp received NaN")
    return m + math.log(math.fsum(np.exp(arr - m)))


def _check_count(value: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < 0:
        raise ValueError(f"{name} must be non-negative, got {value!r}")
    return int(value)


def log_binomial_coefficient(n: int, k: int) -> float:
    """ln C(n, k) via log-gamma; accurate to ~1e-13 relative for n <= 1e6."""
    n = _check_count(n, "n")
    k = _check_count(k, "k")
    if k > n:
        raise ValueError(f"k must not exceed n, got k={k}, n={n}")
    if k == 0 or k == n:
        return 0.0
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


@lru_cache(maxsize=512)
def log_binomial_coefficients(n: int) -> np.ndarray:
    """Read-only vector of ln C(n, j) for j = 0..n."""
    n = _check_count(n, "n")
    j = np.arange(n + 1, dtype=np.float64)
    row = gammaln(n + 1.0) - gammaln(j + 1.0) - gammaln(n - j + 1.0)
    row[0] = 0.0
    row[-1] = 0.0
    row.setflags(write=False)
    return row


def binomial_tail_and_cdf(n: int, p: RateLike, k: int) -> tuple[float, float]:
    """Log CDF and log upper tail of Binomial(n, p) split at k.

    Returns ``(log P(X <= k), log P(X >= k + 1))``.  Both halves are
    direct log-sum-exp accumulations of pmf terms in ascending k order;
    neither is obtained by subtracting the other in linear space, so each
    is accurate in its own domain and the two linear values sum to one.
    """
    n = _check_count(n, "n")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    k = _check_count(k, "k")
    if k > n:
        raise ValueError(f"k must not exceed n, got k={k}, n={n}")
    p = rate_as_float(p, "p")
    if p == 0.0:
        return 0.0, LOG_ZERO
    if p == 1.0:
        if k == n:
            return 0.0, LOG_ZERO
        return LOG_ZERO, 0.0
    j = np.arange(n + 1, dtype=np.float64)
    log_pmf = log_binomial_coefficients(n) + j * math.log(p) + (n - j) * math.log1p(-p)
    log_cdf = min(log_sum_exp(log_pmf[: k + 1]), 0.0)
    log_tail = min(log_sum_exp(log_pmf[k + 1 :]), 0.0)
    return log_cdf, log_tail


def kl_divergence(q: RateLike, p: RateLike) -> float:
    """Kullback-Leibler divergence D(q || p) between Bernoulli rates.

    Conventions: 0 log 0 = 0, so q in {0, 1} is fine; p in {0, 1} gives
    +inf unless q equals p exactly.
    """
    q = rate_as_float(q, "q")
    p = rate_as_float(p, "p")
    if p <= 0.0 or p >= 1.0:
        return 0.0 if q == p else float("inf")
    d = 0.0
    if q > 0.0:
        d += q * math.log(q / p)
    if q < 1.0:
        d += (1.0 - q) * math.log((1.0 - q) / (1.0 - p))
    # rounding can leave a tiny negative residue when q ~ p
    return d if d > 0.0 else 0.0


def stable_complement_product(log_terms: Iterable[float]) -> float:
    """log(1 - prod(1 - p_i)) from the log p_i, via log1p-grade primitives.

    Accepts an iterable of log-probabilities (each <= 0 or -inf).  Remains
    accurate when every p_i is below 1e-12 and when the product is within
    1e-15 of 1.  The empty product is 1, so an empty input yields LOG_ZERO.
    """
    log_survival = 0.0
    for term in log_terms:
        t = float(term)
        if t > 0.0:
            if t < 1e-12:
                t = 0.0  # tolerate rounding residue from upstream clamps
            else:
                raise ValueError(f"log-probability must be <= 0, got {t!r}")
        log_survival += log1mexp(t)
    if log_survival >= 0.0:
        return LOG_ZERO
    return log1mexp(log_survival)
