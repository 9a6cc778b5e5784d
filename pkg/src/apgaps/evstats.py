"""Histograms, Gumbel and GEV maximum-likelihood fits, exact KS distances."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize


class FitConvergenceError(RuntimeError):
    """Fit iteration failed to settle; carries the last iterate."""

    def __init__(self, message: str, scale: float | None = None, mode: float | None = None):
        super().__init__(message)
        self.scale = scale
        self.mode = mode


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray  # length bins + 1
    counts: np.ndarray  # int64, length bins
    total: int


@dataclass(frozen=True)
class GumbelFit:
    scale: float  # alpha > 0
    mode: float  # mu
    ks: float
    sample_size: int


@dataclass(frozen=True)
class GevFit:
    scale: float
    location: float
    shape: float  # reported to 3 decimals
    ks: float


def gumbel_cdf(x, scale: float, mode: float):
    """exp(-exp(-(x - mode)/scale)); accepts scalars or arrays."""
    z = (np.asarray(x, dtype=np.float64) - mode) / scale
    out = np.exp(-np.exp(-z))
    return out if out.ndim else float(out)


def gumbel_pdf(x, scale: float, mode: float):
    z = (np.asarray(x, dtype=np.float64) - mode) / scale
    out = np.exp(-z - np.exp(-z)) / scale
    return out if out.ndim else float(out)


def gumbel_ppf(p, scale: float = 1.0, mode: float = 0.0):
    """Inverse cdf; handy for seeded synthetic sampling."""
    arr = np.asarray(p, dtype=np.float64)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("p must be in (0, 1)")
    out = mode - scale * np.log(-np.log(arr))
    return out if out.ndim else float(out)


def gev_cdf(x, scale: float, location: float, shape: float):
    z = (np.asarray(x, dtype=np.float64) - location) / scale
    if abs(shape) < 1e-12:
        out = np.exp(-np.exp(-z))
        return out if out.ndim else float(out)
    w = np.atleast_1d(1.0 + shape * z)
    inside = w > 0.0
    out = np.empty_like(w)
    # off-support: below the lower endpoint (shape > 0) cdf is 0,
    # above the upper endpoint (shape < 0) cdf is 1
    out[~inside] = 0.0 if shape > 0 else 1.0
    out[inside] = np.exp(-(w[inside] ** (-1.0 / shape)))
    return out.reshape(z.shape) if z.ndim else float(out[0])


def build_histogram(samples: Sequence[float], bin_count: int) -> Histogram:
    """Equal-width histogram over [min, max].

    Interior boundary values fall into the lower bin; the maximum joins the
    last bin. A degenerate (single-value) range is widened symmetrically by
    1e-9 * max(1, |value|).
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot histogram an empty sample")
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    lo = float(arr.min())
    hi = float(arr.max())
    if lo == hi:
        pad = 1e-9 * max(1.0, abs(lo))
        lo -= pad
        hi += pad
    edges = np.linspace(lo, hi, bin_count + 1)
    idx = np.searchsorted(edges, arr, side="left") - 1
    idx = np.clip(idx, 0, bin_count - 1)
    counts = np.bincount(idx, minlength=bin_count).astype(np.int64)
    return Histogram(bin_edges=edges, counts=counts, total=int(arr.size))


def ks_statistic(samples: Sequence[float], cdf: Callable[[float], float]) -> float:
    """Exact Kolmogorov-Smirnov distance between the sample and a model cdf.

    D = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n) over the sorted sample;
    no binning.
    """
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    n = xs.size
    if n == 0:
        raise ValueError("empty sample")
    try:
        f = np.asarray(cdf(xs), dtype=np.float64)
        if f.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        f = np.array([float(cdf(x)) for x in xs])  # scalar-only cdf
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(np.max(np.maximum(i / n - f, f - (i - 1.0) / n)))


def _gumbel_mle(u: np.ndarray, max_iter: int, rel_tol: float) -> tuple[float, float]:
    mean = float(u.mean())
    alpha = float(u.std()) * math.sqrt(6.0) / math.pi  # moment seed
    if not alpha > 0.0:
        raise FitConvergenceError("degenerate sample: zero spread", scale=alpha)
    shift = float(u.min())
    converged = False
    for _ in range(max_iter):
        w = np.exp(-(u - shift) / alpha)  # shift cancels in the weighted mean
        g = mean - float((u * w).sum() / w.sum())
        new = 0.5 * (alpha + g) if g > 0.0 else 0.5 * alpha
        done = abs(new - alpha) <= rel_tol * abs(new)
        alpha = new
        if done:
            converged = True
            break
    mode = _gumbel_mode(u, alpha)
    if not converged:
        raise FitConvergenceError(
            f"Gumbel scale iteration did not converge in {max_iter} steps",
            scale=alpha, mode=mode,
        )
    return alpha, mode


def _gumbel_mode(u: np.ndarray, alpha: float) -> float:
    # mu = -alpha log mean(exp(-u/alpha)), evaluated via a shifted log-sum-exp
    z = -u / alpha
    m = float(z.max())
    return -alpha * (m + math.log(float(np.exp(z - m).mean())))


def fit_gumbel(samples: Sequence[float], *, max_iter: int = 200,
               rel_tol: float = 1e-12) -> GumbelFit:
    """Maximum-likelihood Gumbel fit.

    The scale solves alpha = mean(u) - sum(u_i e^{-u_i/alpha}) / sum(e^{-u_i/alpha})
    by damped fixed-point iteration seeded at the moment estimate
    stdev * sqrt(6) / pi; the mode follows in closed form.
    """
    u = np.asarray(samples, dtype=np.float64)
    if u.size < 10:
        raise ValueError("Gumbel fit needs at least 10 samples")
    alpha, mode = _gumbel_mle(u, max_iter, rel_tol)
    ks = ks_statistic(u, lambda x: gumbel_cdf(x, alpha, mode))
    return GumbelFit(scale=alpha, mode=mode, ks=ks, sample_size=int(u.size))


def _gev_nll(params: np.ndarray, u: np.ndarray) -> float:
    sigma, mu, xi = params
    n = u.size
    if sigma <= 0.0:
        return 1e30 * (1.0 + abs(sigma))
    z = (u - mu) / sigma
    if abs(xi) < 1e-9:
        t = np.exp(-z)
        return n * math.log(sigma) + float(z.sum() + t.sum())
    w = 1.0 + xi * z
    wmin = float(w.min())
    if wmin <= 0.0:
        return 1e30 * (1.0 + abs(wmin))  # support violation, graded to guide the simplex
    logw = np.log(w)
    return n * math.log(sigma) + float((1.0 + 1.0 / xi) * logw.sum()
                                       + np.exp(-logw / xi).sum())


def fit_gev(samples: Sequence[float], *, max_iter: int = 2000) -> GevFit:
    """Maximum-likelihood GEV fit, started from the Gumbel fit with shape 0."""
    u = np.asarray(samples, dtype=np.float64)
    if u.size < 50:
        raise ValueError("GEV fit needs at least 50 samples")
    alpha, mode = _gumbel_mle(u, 200, 1e-12)
    res = minimize(
        _gev_nll,
        x0=np.array([alpha, mode, 0.0]),
        args=(u,),
        method="Nelder-Mead",
        options={"maxiter": max_iter, "xatol": 1e-9, "fatol": 1e-9},
    )
    if not res.success:
        raise FitConvergenceError(f"GEV optimization failed: {res.message}",
                                  scale=float(res.x[0]), mode=float(res.x[1]))
    sigma, mu, xi = (float(v) for v in res.x)
    shape = round(xi, 3)
    ks = ks_statistic(u, lambda x: gev_cdf(x, sigma, mu, shape))
    return GevFit(scale=sigma, location=mu, shape=shape, ks=ks)


def write_histogram_csv(hist: Histogram, path: str) -> None:
    """Columns bin_lo, bin_hi, count, density (10 significant digits)."""
    widths = np.diff(hist.bin_edges)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_lo", "bin_hi", "count", "density"])
        for lo, hi, c, w in zip(hist.bin_edges[:-1], hist.bin_edges[1:],
                                hist.counts, widths):
            density = c / (hist.total * w) if hist.total else 0.0
            writer.writerow([format(lo, ".10g"), format(hi, ".10g"),
                             int(c), format(density, ".10g")])


def write_pdf_csv(path: str, xs: Sequence[float], pdf: Callable[[float], float]) -> None:
    """Columns x, pdf on a caller-chosen grid (fitted-density overlay)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "pdf"])
        for x in xs:
            writer.writerow([format(x, ".10g"), format(pdf(x), ".10g")])
