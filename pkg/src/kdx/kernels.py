"""Mode-centred kernel families and bandwidth rules.

Every family is parameterised by its centre (the location of the kernel's
mode) and a bandwidth ``h``.  For the Normal, knotted Normal, Gumbel and
Weibull families ``h`` is the kernel's standard deviation in $/tC; for
Johnson S_U it is the standard deviation of the arcsinh-transformed variable.

The vectorised entry points (:func:`prepare`, :meth:`PreparedKernels.pdf`,
:meth:`PreparedKernels.cdf`) evaluate many kernels against many points at
once and are what the density code uses.  :func:`kernel_pdf` and
:func:`kernel_cdf` are thin single-spec wrappers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .special import log_gamma

logger = logging.getLogger(__name__)

__all__ = [
    "FAMILIES",
    "REAL_LINE_FAMILIES",
    "KernelSpec",
    "GumbelParams",
    "WeibullParams",
    "PreparedKernels",
    "silverman_bandwidth",
    "gumbel_params",
    "weibull_params",
    "weibull_ratio",
    "weibull_shape",
    "prepare",
    "kernel_pdf",
    "kernel_cdf",
]

FAMILIES = ("normal", "knotted_normal", "gumbel", "weibull", "johnson_su")
REAL_LINE_FAMILIES = ("normal", "gumbel", "johnson_su")

KAPPA_MIN = 1.0 + 1e-6
KAPPA_MAX = 500.0
_KAPPA_CEILING = 1e5
_BISECT_STEPS = 200
_SQRT6_OVER_PI = math.sqrt(6.0) / math.pi
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family, bandwidth and centring convention.

    ``centering`` is ``"mode"`` for every family.  Johnson S_U additionally
    accepts ``"transformed"``, which puts the observation at the mean of the
    arcsinh-transformed normal (the kernel's median) instead of at its mode.
    """

    family: str
    h: float
    centering: str = "mode"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"bandwidth must be positive and finite, got {self.h}")
        if self.centering not in ("mode", "transformed"):
            raise ValueError(f"unknown centering {self.centering!r}")
        if self.centering == "transformed" and self.family != "johnson_su":
            raise ValueError("only johnson_su supports centering='transformed'")


@dataclass(frozen=True)
class GumbelParams:
    mu: float
    beta: float


@dataclass(frozen=True)
class WeibullParams:
    kappa: float
    lam: float
    clamped: bool = False

    @property
    def mode(self):
        return self.lam * ((self.kappa - 1.0) / self.kappa) ** (1.0 / self.kappa)

    @property
    def sd(self):
        return self.lam * float(_weibull_unit_sd(np.asarray(self.kappa)))


def silverman_bandwidth(sd, n_eff):
    """Rule-of-thumb bandwidth ``1.06 * sd * n ** (-1/5)``."""
    if not sd > 0:
        raise ValueError(f"standard deviation must be positive, got {sd}")
    if not n_eff >= 1:
        raise ValueError(f"sample size must be at least 1, got {n_eff}")
    return 1.06 * sd * n_eff ** (-0.2)


def gumbel_params(x_center, h):
    """Gumbel location/scale with mode ``x_center`` and standard deviation ``h``."""
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    return GumbelParams(mu=float(x_center), beta=h * _SQRT6_OVER_PI)


# -- Weibull ---------------------------------------------------------------

def _weibull_unit_mode(kappa):
    return ((kappa - 1.0) / kappa) ** (1.0 / kappa)


def _weibull_unit_sd(kappa):
    # Gamma(1+2/k) - Gamma(1+1/k)^2 written to avoid cancellation at large k
    lg1 = log_gamma(1.0 + 1.0 / kappa)
    lg2 = log_gamma(1.0 + 2.0 / kappa)
    return np.exp(lg1) * np.sqrt(np.expm1(lg2 - 2.0 * lg1))


def weibull_ratio(kappa):
    """Scale-free mode/sd ratio of a Weibull with shape ``kappa`` (> 1)."""
    kappa = np.asarray(kappa, dtype=float)
    out = _weibull_unit_mode(kappa) / _weibull_unit_sd(kappa)
    return float(out) if out.ndim == 0 else out


def weibull_shape(ratio):
    """Solve ``weibull_ratio(kappa) == ratio`` elementwise by bisection.

    Bisection runs on ``log(kappa - 1)`` so that the relative precision is
    uniform near ``kappa = 1``.  Returns ``(kappa, clamped)`` where
    ``clamped`` marks ratios outside the attainable range; those are pinned
    to the nearest bracket end.
    """
    ratio = np.asarray(ratio, dtype=float)
    flat = np.atleast_1d(ratio).ravel()
    lo_r = weibull_ratio(KAPPA_MIN)
    hi_kappa = KAPPA_MAX
    if flat.size and flat.max() > weibull_ratio(hi_kappa):
        while hi_kappa < _KAPPA_CEILING and flat.max() > weibull_ratio(hi_kappa):
            hi_kappa = min(2.0 * hi_kappa, _KAPPA_CEILING)
    hi_r = weibull_ratio(hi_kappa)

    lo = np.full(flat.shape, math.log(KAPPA_MIN - 1.0))
    hi = np.full(flat.shape, math.log(hi_kappa - 1.0))
    target = np.clip(flat, lo_r, hi_r)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        below = weibull_ratio(1.0 + np.exp(mid)) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(1.0, np.abs(lo))):
            break
    # pick the bracket end with the smaller residual
    k_lo = 1.0 + np.exp(lo)
    k_hi = 1.0 + np.exp(hi)
    use_hi = np.abs(weibull_ratio(k_hi) - target) < np.abs(weibull_ratio(k_lo) - target)
    kappa = np.where(use_hi, k_hi, k_lo)
    clamped = (flat < lo_r) | (flat > hi_r)
    kappa = np.where(flat <= lo_r, KAPPA_MIN, kappa)
    if ratio.ndim == 0:
        return float(kappa[0]), bool(clamped[0])
    return kappa.reshape(ratio.shape), clamped.reshape(ratio.shape)


def weibull_params(x_center, h):
    """Weibull shape/scale with mode ``x_center`` and standard deviation ``h``.

    When ``x_center / h`` lies below what any shape > 1 can reach, the shape
    is clamped to ``1 + 1e-6``, only the standard deviation is matched, and a
    warning is logged.
    """
    if not x_center > 0:
        raise ValueError(f"Weibull kernel needs a positive centre, got {x_center}")
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    kappa, clamped = weibull_shape(x_center / h)
    if clamped:
        logger.warning("Weibull mode/sd ratio %.3g unattainable; shape clamped to %.6g",
                       x_center / h, kappa)
    lam = h / float(_weibull_unit_sd(np.asarray(kappa)))
    return WeibullParams(kappa=kappa, lam=lam, clamped=clamped)


# -- vectorised evaluation ---------------------------------------------------

@dataclass(frozen=True)
class PreparedKernels:
    """A batch of same-family kernels with solved parameters.

    Parameter arrays have shape ``(n, 1)`` so that evaluating against an
    ``(m,)`` array of points yields an ``(n, m)`` matrix.
    """

    family: str
    centers: np.ndarray
    h: float
    loc: np.ndarray
    scale: np.ndarray
    shape: np.ndarray | None = None
    norm: np.ndarray | None = None

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            return _PDF[self.family](self, x)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            return _CDF[self.family](self, x)


def prepare(family, centers, h, centering="mode"):
    """Solve kernel parameters for every centre in ``centers``."""
    KernelSpec(family, h, centering)
    c = np.asarray(centers, dtype=float).reshape(-1, 1)
    if family == "normal":
        return PreparedKernels(family, c, h, loc=c, scale=np.full_like(c, h))
    if family == "knotted_normal":
        if np.any(c < 0):
            raise ValueError("knotted Normal kernel needs nonnegative centres")
        # mass of the untruncated normal on [0, inf)
        return PreparedKernels(family, c, h, loc=c, scale=np.full_like(c, h), norm=ndtr(c / h))
    if family == "gumbel":
        return PreparedKernels(family, c, h, loc=c, scale=np.full_like(c, h * _SQRT6_OVER_PI))
    if family == "weibull":
        if np.any(c <= 0):
            raise ValueError("Weibull kernel needs positive centres")
        with np.errstate(over="ignore"):
            ratio = c / h
        kappa, clamped = weibull_shape(ratio)
        if np.any(clamped):
            logger.warning("%d Weibull kernels with unattainable mode/sd ratio were clamped",
                           int(np.sum(clamped)))
        lam = h / _weibull_unit_sd(kappa)
        return PreparedKernels(family, c, h, loc=np.zeros_like(c), scale=lam, shape=kappa)
    # johnson_su
    z = np.arcsinh(c)
    if centering == "mode":
        # shift so that the x-space density peaks at the centre
        z = z + h * h * c / np.sqrt(1.0 + c * c)
    return PreparedKernels(family, c, h, loc=z, scale=np.full_like(c, h))


def _normal_pdf(k, x):
    u = (x - k.loc) / k.scale
    return _INV_SQRT_2PI * np.exp(-0.5 * u * u) / k.scale


def _normal_cdf(k, x):
    return ndtr((x - k.loc) / k.scale)


def _knotted_pdf(k, x):
    return np.where(x >= 0, _normal_pdf(k, x) / k.norm, 0.0)


def _knotted_cdf(k, x):
    inner = (ndtr((x - k.loc) / k.scale) - ndtr(-k.loc / k.scale)) / k.norm
    return np.where(x >= 0, np.clip(inner, 0.0, 1.0), 0.0)


def _gumbel_pdf(k, x):
    z = (x - k.loc) / k.scale
    return np.exp(-z - np.exp(-z)) / k.scale


def _gumbel_cdf(k, x):
    return np.exp(-np.exp(-(x - k.loc) / k.scale))


def _weibull_pdf(k, x):
    pos = x > 0
    xs = np.where(pos, x, 1.0)
    logu = np.log(xs) - np.log(k.scale)
    logpdf = np.log(k.shape) - np.log(k.scale) + (k.shape - 1.0) * logu - np.exp(k.shape * logu)
    return np.where(pos, np.exp(logpdf), 0.0)


def _weibull_cdf(k, x):
    pos = x > 0
    xs = np.where(pos, x, 1.0)
    return np.where(pos, -np.expm1(-np.exp(k.shape * (np.log(xs) - np.log(k.scale)))), 0.0)


def _johnson_pdf(k, x):
    u = (np.arcsinh(x) - k.loc) / k.scale
    return _INV_SQRT_2PI * np.exp(-0.5 * u * u) / (k.scale * np.sqrt(1.0 + x * x))


def _johnson_cdf(k, x):
    return ndtr((np.arcsinh(x) - k.loc) / k.scale)


_PDF = {
    "normal": _normal_pdf,
    "knotted_normal": _knotted_pdf,
    "gumbel": _gumbel_pdf,
    "weibull": _weibull_pdf,
    "johnson_su": _johnson_pdf,
}
_CDF = {
    "normal": _normal_cdf,
    "knotted_normal": _knotted_cdf,
    "gumbel": _gumbel_cdf,
    "weibull": _weibull_cdf,
    "johnson_su": _johnson_cdf,
}


def _single(spec, x_center, x, table):
    prepared = prepare(spec.family, [x_center], spec.h, spec.centering)
    arr = np.asarray(x, dtype=float)
    out = table[spec.family](prepared, arr.reshape(1, -1))[0]
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def kernel_pdf(spec, x_center, x):
    """Density of a single kernel centred (at its mode) on ``x_center``."""
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        return _single(spec, x_center, x, _PDF)


def kernel_cdf(spec, x_center, x):
    """Distribution function of a single kernel centred on ``x_center``."""
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        return _single(spec, x_center, x, _CDF)


def kernel_sd(spec, x_center):
    """Analytic standard deviation of the kernel in $/tC where available."""
    if spec.family in ("normal", "gumbel"):
        return spec.h
    if spec.family == "weibull":
        return weibull_params(x_center, spec.h).sd
    if spec.family == "knotted_normal":
        a = -x_center / spec.h
        z = 1.0 - ndtr(a)
        phi = _INV_SQRT_2PI * math.exp(-0.5 * a * a)
        return spec.h * math.sqrt(1.0 + a * phi / z - (phi / z) ** 2)
    raise ValueError("no closed-form sd for johnson_su")
