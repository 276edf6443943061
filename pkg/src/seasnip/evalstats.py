"""Extreme-value evaluation statistics for per-record response maxima.

Correlation and R-squared score each method's per-record maxima against
truth; the maxima distribution itself is summarized by a Gaussian kernel
density estimate, its mode (the most probable maximum) and an empirical
percentile.
"""

import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import DegenerateSampleError, UndefinedCorrelationError


def correlation(x, y) -> float:
    """Pearson correlation coefficient cov(x, y) / (sigma_x * sigma_y)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("x and y must have equal length >= 2")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(np.mean(xc * xc)))
    sy = math.sqrt(float(np.mean(yc * yc)))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("zero variance in correlation input")
    return float(np.mean(xc * yc) / (sx * sy))


def r_squared(truth, estimate) -> float:
    """R^2 = 1 - SS_res / SS_tot; may be negative, equals 1 iff exact."""
    truth = np.asarray(truth, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if truth.shape != estimate.shape or truth.size < 2:
        raise ValueError("truth and estimate must have equal length >= 2")
    ss_tot = float(np.sum((truth - truth.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("truth sample has zero variance")
    ss_res = float(np.sum((truth - estimate) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass
class PdfCurve:
    support: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=np.float64)
        self.density = np.asarray(self.density, dtype=np.float64)
        if self.support.shape != self.density.shape:
            raise ValueError("support and density must align")
        if np.any(self.density < 0):
            raise ValueError("density must be nonnegative")
        area = float(np.trapezoid(self.density, self.support))
        if not (0.99 <= area <= 1.01):
            raise ValueError(f"density integrates to {area:.4f}, not ~1")


def silverman_bandwidth(samples: np.ndarray) -> float:
    """Gaussian-reference rule 1.06 * sigma * n^(-1/5)."""
    sigma = float(np.std(samples, ddof=1))
    return 1.06 * sigma * samples.size ** (-0.2)


def kde(maxima, bandwidth: float | None = None, grid_size: int = 512) -> PdfCurve:
    """Gaussian kernel density estimate on a uniform support grid.

    The grid spans [min - 3 bw, max + 3 bw]. Raises DegenerateSampleError
    for an all-identical sample: the density would be a point mass that a
    finite-bandwidth KDE cannot represent.
    """
    x = np.asarray(maxima, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    if float(np.ptp(x)) == 0.0:
        raise DegenerateSampleError(
            "all samples identical; report a point mass instead of a KDE"
        )
    bw = bandwidth if bandwidth is not None else silverman_bandwidth(x)
    if bw <= 0:
        raise ValueError("bandwidth must be > 0")
    grid = np.linspace(x.min() - 3.0 * bw, x.max() + 3.0 * bw, grid_size)
    z = (grid[:, None] - x[None, :]) / bw
    dens = np.exp(-0.5 * z * z).mean(axis=1) / (bw * math.sqrt(2.0 * math.pi))
    return PdfCurve(grid, dens)


def most_probable_maximum(pdf: PdfCurve) -> float:
    """Mode of the maxima PDF; ties resolve to the lowest support value."""
    return float(pdf.support[int(np.argmax(pdf.density))])


def percentile(maxima, p: float) -> float:
    """Empirical quantile with linear interpolation between order stats."""
    x = np.asarray(maxima, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty sample")
    if not (0.0 < p < 1.0):
        raise ValueError("p must be in (0, 1)")
    return float(np.quantile(x, p))


@dataclass
class MetricsReport:
    """Method-vs-truth summary of per-record maxima."""

    correlation: float
    r_squared: float
    mpm_method: float
    mpm_truth: float
    mpm_relative_error: float
    p95_method: float
    p95_truth: float
    p95_relative_error: float
    n_pairs: int

    def to_dict(self) -> dict:
        return asdict(self)


def build_report(method_max, truth_max,
                 tail_percentile: float = 0.95) -> tuple[MetricsReport, PdfCurve, PdfCurve]:
    """Assemble all metrics for one method; also returns both PDF curves."""
    method_max = np.asarray(method_max, dtype=np.float64)
    truth_max = np.asarray(truth_max, dtype=np.float64)
    if method_max.shape != truth_max.shape:
        raise ValueError("method and truth maxima must be paired")
    if method_max.size < 10:
        raise ValueError("need at least 10 pairs")
    pdf_method = kde(method_max)
    pdf_truth = kde(truth_max)
    mpm_m = most_probable_maximum(pdf_method)
    mpm_t = most_probable_maximum(pdf_truth)
    p_m = percentile(method_max, tail_percentile)
    p_t = percentile(truth_max, tail_percentile)
    report = MetricsReport(
        correlation=correlation(method_max, truth_max),
        r_squared=r_squared(truth_max, method_max),
        mpm_method=mpm_m,
        mpm_truth=mpm_t,
        mpm_relative_error=abs(mpm_m - mpm_t) / mpm_t,
        p95_method=p_m,
        p95_truth=p_t,
        p95_relative_error=abs(p_m - p_t) / p_t,
        n_pairs=int(method_max.size),
    )
    return report, pdf_method, pdf_truth
