"""Factorial-ratio helpers that stay stable for large particle numbers.

Small products are done in exact integer arithmetic and rounded once at the
end, so every desk-scale value is correct to 1 ulp; genuinely huge orders
fall back to float products or log-Gamma with documented error growth.
"""

import math

# Largest number of factors evaluated in exact integer arithmetic. Integer
# products of this size cost microseconds; beyond it the float fallbacks
# keep the cost linear at ~k*eps relative error.
_EXACT_TERM_LIMIT = 2048


def falling_factorial(n: int, k: int) -> float:
    """n (n-1) ... (n-k+1), exactly 0.0 when k exceeds n.

    Exact-integer path for k <= 2048 (single rounding); log-Gamma beyond,
    with relative error growing like k * eps. Values above float range
    return inf.
    """
    if k < 0:
        raise ValueError("order must be nonnegative")
    if k == 0:
        return 1.0
    if n < k:
        return 0.0
    if k <= _EXACT_TERM_LIMIT:
        try:
            return float(math.prod(range(n - k + 1, n + 1)))
        except OverflowError:
            return math.inf
    try:
        return math.exp(math.lgamma(n + 1) - math.lgamma(n - k + 1))
    except OverflowError:
        return math.inf


def balanced_factorial_ratio(n: int, m: int) -> float:
    """n! (n-2m)! / ((n-m)!)^2 for integers n >= 2m >= 0.

    Evaluated as prod_{k=1..m} (n-m+k)/(n-2m+k): exact integers for
    m <= 2048 (correctly rounded quotient), float ratio product beyond
    (relative error ~ 2m * eps).
    """
    if m < 0:
        raise ValueError("order must be nonnegative")
    if n < 2 * m:
        raise ValueError(f"need n >= 2m, got n={n}, m={m}")
    if m == 0:
        return 1.0
    if m <= _EXACT_TERM_LIMIT:
        num = math.prod(range(n - m + 1, n + 1))
        den = math.prod(range(n - 2 * m + 1, n - m + 1))
        return num / den
    value = 1.0
    for k in range(1, m + 1):
        value *= (n - m + k) / (n - 2 * m + k)
    return value


def log_binomial(n: int, k: int) -> float:
    """log of the binomial coefficient C(n, k) via lgamma."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
