"""
Line-singularity image model, strip masks and the known/missing projections.

The model at scale j has spectrum ``f_j_hat(xi) = w_hat(xi1) W_j(xi)``:
a weighted line along the x1 axis, seen through the scale-j corona.
"""

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .atoms import corona
from .transform import DigitalSystem, FrequencyGrid, spectrum_image


class ScaleTooFine(ValueError):
    def __init__(self, j, N):
        super().__init__(f"ScaleTooFine(j={j}, N={N}): corona {j} exceeds the Nyquist square")


class EmptyMask(UserWarning):
    pass


@dataclass(frozen=True)
class WeightSpec:
    """Weight ``w`` on ``[-rho, rho]``; ``profile='bump'`` is ``exp(1 - 1/(1 - (x/rho)^2))``."""

    rho: float = 0.125
    profile: str = "bump"
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown weight profile {self.profile!r}")
        if not 0 < self.amplitude <= 1:
            raise ValueError("amplitude must lie in (0, 1]")


def _bump_profile(t):
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


def _cosine_profile(t):
    # smooth but only C^1 at the edge; kept as an alternative
    return np.where(np.abs(t) < 1, np.cos(0.5 * np.pi * t) ** 2, 0.0)


PROFILES = {"bump": _bump_profile, "cos2": _cosine_profile}


def weight(x, spec: WeightSpec):
    """Evaluate ``w(x)``; values in [0, 1], zero outside ``[-rho, rho]``."""
    t = np.asarray(x, dtype=float) / spec.rho
    return spec.amplitude * PROFILES[spec.profile](np.atleast_1d(t)).reshape(t.shape)


def weight_ft(xi1, spec: WeightSpec, pixel=None, oversample=16):
    """Fourier transform ``w_hat(xi1) = int w(x) e^{-2 pi i x xi1} dx``.

    Evaluated by a trapezoid sum on nodes ``m * step`` with
    ``step = pixel / oversample``.  The weight and all its derivatives
    vanish at ``+-rho``, so the sum is spectrally accurate for frequencies
    well below ``1 / step``.

    Parameters
    ----------
    xi1 : float or ndarray
    spec : WeightSpec
    pixel : float, optional
        Model grid spacing; default ``rho / 128``.
    oversample : int
        Nodes per model pixel, at least 16.
    """
    if oversample < 16:
        raise ValueError("oversample must be >= 16")
    pixel = spec.rho / 128.0 if pixel is None else pixel
    step = pixel / oversample
    K = int(np.ceil(spec.rho / step))
    x = np.arange(-K, K + 1) * step
    w = weight(x, spec)
    keep = w > 0
    x, w = x[keep], w[keep]
    xi = np.atleast_1d(np.asarray(xi1, dtype=float))
    out = np.empty(xi.shape, dtype=complex)
    flat = xi.ravel()
    res = out.ravel()
    for start in range(0, flat.size, 256):
        blk = flat[start:start + 256]
        res[start:start + 256] = step * (np.exp(-2j * np.pi * np.outer(blk, x)) @ w)
    out = res.reshape(xi.shape)
    return out if np.ndim(xi1) else out[0]


def weight_ft_quadrature(xi1, spec: WeightSpec):
    """Slow adaptive-quadrature reference for ``weight_ft``."""
    from scipy.integrate import quad

    f = lambda x: float(weight(np.array([x]), spec)[0])
    re = quad(lambda x: f(x) * np.cos(2 * np.pi * x * xi1), -spec.rho, spec.rho, limit=400, epsabs=1e-14)[0]
    im = quad(lambda x: -f(x) * np.sin(2 * np.pi * x * xi1), -spec.rho, spec.rho, limit=400, epsabs=1e-14)[0]
    return complex(re, im)


@dataclass
class ModelInstance:
    j: int
    image: np.ndarray
    T: float
    weight: WeightSpec
    N: int
    spacing: Fraction

    def header(self, h=0.0):
        return {"N": self.N, "j": self.j, "T": self.T, "rho": self.weight.rho, "h": h}


def _grid_of(g):
    return g.grid if isinstance(g, DigitalSystem) else g


def default_weight(grid) -> WeightSpec:
    """Bump weight with ``rho = T / 4``."""
    return WeightSpec(rho=_grid_of(grid).T / 4)


def model_spectrum(j, grid: FrequencyGrid, spec: WeightSpec) -> np.ndarray:
    """Normalized FFT-order spectrum ``fft2(f_j) / N^2`` of the scale-j model."""
    grid = _grid_of(grid)
    s = grid.spacing
    if Fraction(2) ** (2 * j - 1) > s * grid.N / 2:
        raise ScaleTooFine(j, grid.N)
    X1, X2 = grid.frequencies()
    n = grid.indices() * float(s)
    wh = weight_ft(n, spec, pixel=grid.pixel).real
    # continuum amplitude: f(x) = sum_n s^2 f_hat(s n) e^{2 pi i s n x}
    return (float(s) ** 2) * wh[:, None] * corona(X1, X2, j)


def filtered_model(j, grid, spec: WeightSpec = None) -> ModelInstance:
    """Scale-j line model sampled on the grid.

    Raises
    ------
    ScaleTooFine
        If the corona of scale j does not fit the grid.
    """
    grid = _grid_of(grid)
    spec = default_weight(grid) if spec is None else spec
    F = model_spectrum(j, grid, spec)
    img = spectrum_image(F * (grid.N * grid.N))
    return ModelInstance(j, img, grid.T, spec, grid.N, grid.spacing)


@dataclass(frozen=True)
class MaskSpec:
    h: float
    columns: tuple  # (first, last) pixel index along x1, inclusive; empty if first > last
    count: int


def make_mask(h, grid):
    """Strip ``|x1| <= h``; returns ``(MaskSpec, bool indicator)``.

    A pixel column is missing when its whole cell ``[x - p/2, x + p/2]``
    lies inside the strip, so a gap of width ``2h`` removes the largest odd
    number of columns not exceeding ``2h / p`` and ``h < p/2`` removes
    nothing.  Cell edges within ``1e-9`` pixel of the strip edge count as
    inside, so gap laws evaluated in floating point land on the intended
    column.

    Raises
    ------
    ValueError
        If ``h`` is outside ``(0, T]``.
    """
    grid = _grid_of(grid)
    if not 0 < h <= grid.T:
        raise ValueError(f"h = {h} outside (0, {grid.T}]")
    x1 = grid.coordinates()
    col = np.abs(x1) + 0.5 * grid.pixel <= h + 1e-9 * grid.pixel
    if h >= grid.T:
        col[:] = True  # the strip covers the whole period
    ind = np.repeat(col[:, None], grid.N, axis=1)
    hits = np.flatnonzero(col)
    if hits.size == 0:
        warnings.warn(f"EmptyMask: gap 2h = {2 * h} is narrower than one pixel", EmptyMask)
        cols = (0, -1)
    else:
        cols = (int(hits[0]), int(hits[-1]))
    return MaskSpec(float(h), cols, int(hits.size)), ind


def project_known(f, mask):
    """``P_K f``: zero inside the mask."""
    f = np.asarray(f)
    if f.shape != np.shape(mask):
        raise ValueError("shape mismatch")
    return np.where(mask, 0.0, f)


def project_missing(f, mask):
    """``P_M f``: zero outside the mask."""
    f = np.asarray(f)
    if f.shape != np.shape(mask):
        raise ValueError("shape mismatch")
    return np.where(mask, f, 0.0)


def filter_recovery_check(spec: WeightSpec, sys: DigitalSystem, skip=(), w_hat=None) -> float:
    """Max of ``|w_hat(xi1)| |lowpass^2 + sum B^2 + completion^2 - 1|``.

    ``skip`` leaves out coefficient bands; ``w_hat`` overrides the weight
    transform on the grid's xi1 axis.
    """
    grid = sys.grid
    if w_hat is None:
        n = grid.indices() * float(grid.spacing)
        w_hat = weight_ft(n, spec, pixel=grid.pixel)
    cov = sys.squared_coverage(skip)
    return float(np.max(np.abs(np.asarray(w_hat)[:, None]) * np.abs(cov - 1.0)))
