"""Shared numeric primitives: totient, lcm(2,q), li(x), twin prime constant.

Everything else in the package leans on these; keep the module free of
intra-package imports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# li(2): the logarithmic integral carries its principal-value singularity at
# t = 1 inside this constant, so quadrature never has to straddle it.
LI_AT_2 = 1.0451637801174927848

EULER_GAMMA = 0.5772156649015329

# prod over odd primes p of p(p-2)/(p-1)^2
TWIN_PRIME_CONSTANT = 0.6601618158468696

UINT64_MAX = (1 << 64) - 1


@dataclass(frozen=True)
class NumConstants:
    pi2: float = TWIN_PRIME_CONSTANT
    pi2_inv: float = 1.0 / TWIN_PRIME_CONSTANT
    euler_gamma: float = EULER_GAMMA
    li_offset: float = LI_AT_2


CONSTANTS = NumConstants()


def totient(q: int) -> int:
    """Euler's phi by trial-division factorization."""
    if q < 1:
        raise ValueError("totient needs a positive integer")
    if q > UINT64_MAX:
        raise OverflowError("totient argument exceeds 64-bit range")
    result = q
    n = q
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if n > 1:
        result -= result // n
    return result


def lcm2(q: int) -> int:
    """lcm(2, q): the common step of gap sizes in a residue class mod q."""
    if q < 1:
        raise ValueError("lcm2 needs a positive integer")
    out = q if q % 2 == 0 else 2 * q
    if out > UINT64_MAX:
        raise OverflowError("lcm(2, q) exceeds 64-bit range")
    return out


# 32-point Gauss-Legendre rule on [-1, 1]; composite panels below.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _panel_quad_inv_log(edges: np.ndarray) -> float:
    """Composite Gauss-Legendre for integral of dt/log t over given panel edges."""
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = mid[:, None] + half[:, None] * _GL_NODES
    return float(np.sum(half[:, None] * (_GL_WEIGHTS / np.log(t))))


def _adaptive_inv_log(a: float, b: float, geometric: bool) -> float:
    """Integral of dt/log t on [a, b], panel count doubled until stable."""
    panels = 8
    prev = math.inf
    for _ in range(12):
        if geometric:
            edges = np.geomspace(a, b, panels + 1)
        else:
            edges = np.linspace(a, b, panels + 1)
        val = _panel_quad_inv_log(edges)
        if abs(val - prev) <= 1e-13 * max(1.0, abs(val)):
            return val
        prev = val
        panels *= 2
    return prev


@lru_cache(maxsize=1 << 15)
def log_integral(x: float) -> float:
    """li(x) = PV integral of dt/log t from 0 to x.

    Computed as li(2) + quadrature over [2, x] (geometric panels), which keeps
    the t = 1 singularity out of the integration range entirely. Defined for
    x >= 0, x != 1; li(0) = 0 and li(x) < 0 on (0, 1).
    """
    x = float(x)
    if math.isnan(x) or x < 0.0:
        raise ValueError("log_integral needs x >= 0")
    if x == 1.0:
        raise ValueError("log_integral diverges at x = 1")
    if x == 0.0:
        return 0.0
    if x == 2.0:
        return LI_AT_2
    if x < 1.0:
        return _adaptive_inv_log(0.0, x, geometric=False)
    if x < 2.0:
        return LI_AT_2 - _adaptive_inv_log(x, 2.0, geometric=True)
    return LI_AT_2 + _adaptive_inv_log(2.0, x, geometric=True)


def _primes_upto(n: int) -> np.ndarray:
    # local monolithic sieve; the sieve module has its own (keeps this module
    # dependency-free)
    if n < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask).astype(np.int64)


def twin_prime_constant(prime_cutoff: int) -> float:
    """Truncated product of p(p-2)/(p-1)^2 over odd primes p <= prime_cutoff.

    Strictly decreasing in the cutoff; approaches 0.66016... from above.
    """
    if prime_cutoff < 3:
        raise ValueError("cutoff must admit at least the prime 3")
    p = _primes_upto(prime_cutoff)[1:].astype(np.float64)  # drop p = 2
    return float(np.prod(p * (p - 2.0) / (p - 1.0) ** 2))
