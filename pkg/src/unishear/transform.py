"""
Digital universal shearlet transform on an N x N periodic grid.

Conventions
-----------
Images are real ``N x N`` arrays indexed ``f[i1, i2]`` with axis 0 along
x1 and axis 1 along x2.  Pixel ``i`` sits at the centered continuum
coordinate ``x = (i - N/2) / (s N)`` where ``s`` is the grid's frequency
spacing, so the grid covers ``[-T, T)^2`` with ``T = 1 / (2 s)``.  Grid
frequency ``n`` (integer, ``-N/2 <= n < N/2``) is the continuum frequency
``s n``.  The forward DFT uses the ``e^{-2 pi i}`` kernel and the inverse
carries ``1/N^2``.

Two analysis operators share the same band weights:

* full-grid (``analyze`` / ``synthesize``): every band is sampled at every
  pixel with unnormalized weights; this frame is Parseval for the plain
  pixel inner product.
* lattice (``LatticeTransform``): band b is sampled on its own translation
  lattice with the continuum normalization.  The lattice frame is Parseval
  for the mean inner product ``<f, g> = mean(f g)`` and gives the
  l1-analysis norm.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import numpy as np

from .atoms import scaling_ft
from .system import (
    BandDescriptor,
    ScalingSequence,
    band_weight,
    enumerate_bands,
    shear_factor,
)
from .atoms import corona


class GridTooSmall(ValueError):
    def __init__(self, J, N):
        super().__init__(f"GridTooSmall(J={J}, N={N}): scale {J - 1} corona does not fit the Nyquist square")


class TilingFailure(RuntimeError):
    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"TilingFailure(residual={residual:.3e})")


TILING_TOLERANCE = 1e-8


@dataclass(frozen=True)
class FrequencyGrid:
    """Grid geometry.

    ``spacing`` is the continuum frequency per grid step; equivalently the
    oversampling factor is ``eta = spacing * N`` pixels per unit length and
    ``T = N / (2 eta)``.  The default puts the Nyquist frequency at twice
    the outer edge of corona J-1, i.e. ``eta = 2^{2J-1}``.
    """

    N: int
    J: int
    spacing: Optional[Fraction] = None

    def __post_init__(self):
        N = self.N
        if N < 2 or N & (N - 1):
            raise ValueError(f"N must be a power of 2, got {N}")
        if self.J < 1:
            raise ValueError("J must be >= 1")
        s = default_spacing(N, self.J) if self.spacing is None else Fraction(self.spacing)
        if s <= 0 or s.numerator & (s.numerator - 1) or s.denominator & (s.denominator - 1):
            raise ValueError(f"spacing must be a power of 2, got {s}")
        object.__setattr__(self, "spacing", s)
        # outer edge of corona J-1 is 2^{2J-3}
        if Fraction(2) ** (2 * self.J - 3) > s * N / 2:
            raise GridTooSmall(self.J, N)

    @property
    def T(self) -> float:
        """Continuum half-width of the spatial domain."""
        return float(1 / (2 * self.spacing))

    @property
    def pixel(self) -> float:
        return float(1 / (self.spacing * self.N))

    @property
    def eta(self) -> Fraction:
        """Pixels per unit continuum length."""
        return self.spacing * self.N

    def header(self) -> str:
        """One-line description of the grid-to-continuum mapping."""
        return f"N={self.N} J={self.J} eta={self.eta} T={self.T!r} pixel={self.pixel!r}"

    def indices(self):
        """Integer frequencies in FFT order."""
        return np.fft.fftfreq(self.N, 1.0 / self.N).round().astype(np.int64)

    def frequencies(self):
        """Continuum frequency mesh ``(xi1, xi2)`` in FFT order."""
        n = self.indices() * float(self.spacing)
        return np.meshgrid(n, n, indexing="ij")

    def coordinates(self):
        """Centered continuum pixel coordinates along one axis."""
        return (np.arange(self.N) - self.N // 2) * self.pixel


def default_spacing(N: int, J: int) -> Fraction:
    """Spacing with Nyquist at twice the outer edge ``2^{2J-3}`` of corona J-1."""
    return Fraction(2) ** (2 * J - 1) / N


def spacing_from_eta(N: int, eta) -> Fraction:
    return Fraction(eta) / N


def default_J(N: int) -> int:
    """Largest J whose Nyquist sits at twice the outer edge of corona J-1 or beyond."""
    return max(1, (int(np.log2(N)) + 1) // 2)


@dataclass
class BandData:
    """Sparse frequency weight of one band plus its translation lattice."""

    band: BandDescriptor
    idx: np.ndarray  # flat FFT-order indices of nonzero weights
    weight: np.ndarray
    P: tuple  # lattice periods in grid-index units
    bins: np.ndarray  # flat bins into the P1 x P2 folded spectrum
    lattice_norm: float

    @property
    def size(self):
        return self.P[0] * self.P[1]


@dataclass
class DigitalSystem:
    grid: FrequencyGrid
    seq: ScalingSequence
    bands: List[BandDescriptor]
    data: List[BandData]
    completion: BandData
    lowpass_index: int = 0

    @property
    def N(self):
        return self.grid.N

    @property
    def J(self):
        return self.grid.J

    @property
    def all_data(self) -> List[BandData]:
        """Band data in coefficient order: coarse, shearlet bands, completion."""
        return self.data + [self.completion]

    @property
    def n_coeff_bands(self):
        return len(self.data) + 1

    def dense_weight(self, i: int) -> np.ndarray:
        """Dense N x N weight (FFT order) of coefficient band i."""
        d = self.all_data[i]
        out = np.zeros(self.N * self.N)
        out[d.idx] = d.weight
        return out.reshape(self.N, self.N)

    def squared_coverage(self, skip=()) -> np.ndarray:
        acc = np.zeros(self.N * self.N)
        for i, d in enumerate(self.all_data):
            if i in skip:
                continue
            acc[d.idx] += d.weight**2
        return acc.reshape(self.N, self.N)

    def scale_of(self, i: int) -> int:
        """Scale of coefficient band i; the completion counts as scale J."""
        if i == len(self.data):
            return self.J
        return self.bands[i].j


def _lattice_periods(band: BandDescriptor, seq: ScalingSequence, s: Fraction):
    """Index periods (P1, P2) of the band's translation lattice."""
    if band.iota == "coarse":
        c1 = c2 = Fraction(1)
    else:
        j = band.j
        a = seq.alpha_exp(j)
        if band.iota == "h":
            c1, c2 = Fraction(2) ** (2 * j), Fraction(2) ** a
        elif band.iota == "v":
            c1, c2 = Fraction(2) ** a, Fraction(2) ** (2 * j)
        elif j == 0:
            c1 = c2 = Fraction(1)
        else:
            # half lattice e^{-pi i xi^T A^{-j} S^{-l} k}
            c1, c2 = Fraction(2) ** (2 * j + 1), Fraction(2) ** (a + 1)
    return tuple(max(1, int(c / s)) for c in (c1, c2))


def _bins(n1, n2, P):
    return (np.mod(n1, P[0]) * P[1] + np.mod(n2, P[1])).astype(np.int64)


def _make_band_data(band, idx, weight, n1, n2, seq, s):
    P = _lattice_periods(band, seq, s)
    bins = _bins(n1[idx], n2[idx], P)
    if np.unique(bins).size != bins.size:
        raise RuntimeError(f"lattice aliasing in band {band.key}")
    return BandData(band, idx, weight, P, bins, 1.0 / np.sqrt(P[0] * P[1]))


def build_digital_system(seq: ScalingSequence, N: int, J: Optional[int] = None, spacing=None) -> DigitalSystem:
    """Sample every band weight on the N x N grid.

    Parameters
    ----------
    seq : ScalingSequence
        Must have at least J scales; extra scales are ignored.
    N : int
        Grid size, a power of 2.
    J : int, optional
        Number of scales, default ``seq.J``.
    spacing : rational, optional
        Continuum frequency per grid step; default from ``default_spacing``.

    Raises
    ------
    GridTooSmall
        If corona J-1 does not fit inside the Nyquist square.
    TilingFailure
        If the squared weights fail to sum to one within 1e-8.
    """
    J = seq.J if J is None else J
    if J > seq.J:
        raise ValueError(f"sequence has {seq.J} scales, J = {J}")
    seq = ScalingSequence(seq.values[:J])
    grid = FrequencyGrid(N, J, None if spacing is None else Fraction(spacing))
    s = grid.spacing
    X1, X2 = grid.frequencies()
    xi1, xi2 = X1.ravel(), X2.ravel()
    n = grid.indices()
    N1, N2 = np.meshgrid(n, n, indexing="ij")
    n1, n2 = N1.ravel(), N2.ravel()

    bands = enumerate_bands(seq)
    data = []
    coarse = bands[0]
    low = scaling_ft(xi1, xi2)
    idx = np.flatnonzero(low > 0)
    data.append(_make_band_data(coarse, idx, low[idx], n1, n2, seq, s))

    by_scale = {}
    for b in bands[1:]:
        by_scale.setdefault(b.j, []).append(b)
    for j in range(J):
        W = corona(xi1, xi2, j)
        sup = np.flatnonzero(W > 0)
        for b in by_scale[j]:
            w = W[sup] * shear_factor(b, xi1[sup], xi2[sup])
            keep = w > 0
            data.append(_make_band_data(b, sup[keep], w[keep], n1, n2, seq, s))

    acc = np.zeros(N * N)
    for d in data:
        acc[d.idx] += d.weight**2
    covered = scaling_ft(xi1 * 2.0 ** (-2 * J), xi2 * 2.0 ** (-2 * J)) == 1.0
    comp = np.where(covered, 0.0, np.sqrt(np.maximum(0.0, 1.0 - acc)))
    cidx = np.flatnonzero(comp > 0)
    cband = BandDescriptor(J, 0, "completion", Fraction(0), 1.0 / N, 1)
    completion = BandData(cband, cidx, comp[cidx], (N, N), _bins(n1[cidx], n2[cidx], (N, N)), 1.0 / N)

    system = DigitalSystem(grid, seq, bands, data, completion)
    res = tiling_residual(system)
    if res > TILING_TOLERANCE:
        raise TilingFailure(res)
    return system


def tiling_residual(sys: DigitalSystem, skip=()) -> float:
    """``max |lowpass^2 + sum B^2 + completion^2 - 1|`` over the grid.

    ``skip`` lists coefficient-band positions to leave out.
    """
    return float(np.max(np.abs(sys.squared_coverage(skip) - 1.0)))


# --------------------------------------------------------------------------
# full-grid transform


@dataclass
class CoefficientSet:
    """Full-grid coefficients, shape ``(n_bands, N, N)``, centered layout."""

    data: np.ndarray
    bands: list = field(default_factory=list)

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.data) ** 2)))

    def l1(self) -> float:
        return float(np.sum(np.abs(self.data)))

    def restrict(self, keep) -> "CoefficientSet":
        """Zero every band not listed in ``keep`` (band positions)."""
        out = np.zeros_like(self.data)
        keep = list(keep)
        out[keep] = self.data[keep]
        return CoefficientSet(out, self.bands)

    def __len__(self):
        return self.data.shape[0]


def _check_image(f, N):
    f = np.asarray(f)
    if f.shape != (N, N):
        raise ValueError(f"image shape {f.shape} does not match grid {N}x{N}")
    return f


def image_spectrum(f) -> np.ndarray:
    """Unnormalized DFT of a centered image (FFT order)."""
    return np.fft.fft2(np.fft.ifftshift(f))


def spectrum_image(F) -> np.ndarray:
    """Inverse of ``image_spectrum``; returns the real part."""
    return np.fft.fftshift(np.fft.ifft2(F)).real


def analyze(f, sys: DigitalSystem) -> CoefficientSet:
    """Full-grid analysis: band b is ``ifft2(fft2(f) * B_b)``."""
    f = _check_image(f, sys.N)
    F = image_spectrum(f).ravel()
    N = sys.N
    out = np.empty((sys.n_coeff_bands, N, N), dtype=complex)
    for i, d in enumerate(sys.all_data):
        G = np.zeros(N * N, dtype=complex)
        G[d.idx] = F[d.idx] * d.weight
        out[i] = np.fft.fftshift(np.fft.ifft2(G.reshape(N, N)))
    return CoefficientSet(out, [d.band for d in sys.all_data])


def synthesize(coeffs, sys: DigitalSystem) -> np.ndarray:
    """Adjoint of ``analyze``: ``sum_b ifft2(fft2(c_b) * B_b)``, real part."""
    data = coeffs.data if isinstance(coeffs, CoefficientSet) else np.asarray(coeffs)
    N = sys.N
    if data.shape != (sys.n_coeff_bands, N, N):
        raise ValueError(f"coefficient shape {data.shape} does not match system")
    acc = np.zeros(N * N, dtype=complex)
    for i, d in enumerate(sys.all_data):
        C = np.fft.fft2(np.fft.ifftshift(data[i])).ravel()
        acc[d.idx] += C[d.idx] * d.weight
    return np.fft.fftshift(np.fft.ifft2(acc.reshape(N, N))).real


# --------------------------------------------------------------------------
# lattice transform


class LatticeTransform:
    """Lattice-sampled analysis/synthesis pair (a Parseval frame).

    Coefficients of band b are the band-filtered image evaluated at the
    translations of b's lattice, times ``1/sqrt(P1 P2)``.  All bands are
    concatenated into one real vector in coefficient-band order; within a
    band the layout is the ``P1 x P2`` FFT order.
    """

    def __init__(self, sys: DigitalSystem):
        self.sys = sys
        self.N = sys.N
        self.data = sys.all_data
        sizes = [d.size for d in self.data]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.size = int(self.offsets[-1])
        self._scale = np.sqrt(np.array(sizes, dtype=float))

    def band_slice(self, i: int) -> slice:
        return slice(int(self.offsets[i]), int(self.offsets[i + 1]))

    def analyze(self, f) -> np.ndarray:
        f = _check_image(f, self.N)
        F = (image_spectrum(f) / (self.N * self.N)).ravel()
        return self.analyze_spectrum(F)

    def analyze_spectrum(self, F) -> np.ndarray:
        """Coefficients from a normalized FFT-order spectrum ``fft2(f) / N^2``."""
        out = np.empty(self.size)
        for i, d in enumerate(self.data):
            sl = self.band_slice(i)
            if d.idx.size == 0:
                out[sl] = 0.0
                continue
            G = np.zeros(d.size, dtype=complex)
            G[d.bins] = F[d.idx] * d.weight
            out[sl] = (np.fft.ifft2(G.reshape(d.P)) * self._scale[i]).real.ravel()
        return out

    def synthesize_spectrum(self, a) -> np.ndarray:
        acc = np.zeros(self.N * self.N, dtype=complex)
        for i, d in enumerate(self.data):
            if d.idx.size == 0:
                continue
            H = np.fft.fft2(a[self.band_slice(i)].reshape(d.P)).ravel()
            acc[d.idx] += H[d.bins] * (d.weight / self._scale[i])
        return acc

    def synthesize(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if a.shape != (self.size,):
            raise ValueError(f"coefficient vector has shape {a.shape}, expected ({self.size},)")
        acc = self.synthesize_spectrum(a)
        return spectrum_image(acc.reshape(self.N, self.N) * (self.N * self.N))

    def positions(self, i: int):
        """Signed lattice indices ``(m1, m2)`` and continuum translations of band i."""
        d = self.data[i]
        P1, P2 = d.P
        m1 = (np.arange(P1) + P1 // 2) % P1 - P1 // 2
        m2 = (np.arange(P2) + P2 // 2) % P2 - P2 // 2
        M1, M2 = np.meshgrid(m1, m2, indexing="ij")
        period = float(1 / self.sys.grid.spacing)
        return M1, M2, M1 * (period / P1), M2 * (period / P2)

    def band_of(self) -> np.ndarray:
        """Coefficient-band position for every coefficient."""
        return np.repeat(np.arange(len(self.data)), np.diff(self.offsets))


def lattice_transform(sys: DigitalSystem) -> LatticeTransform:
    """Lattice transform of a system, built once and kept on the system."""
    lt = getattr(sys, "_lattice", None)
    if lt is None:
        lt = LatticeTransform(sys)
        sys._lattice = lt
    return lt


def l1_analysis_norm(f, sys: DigitalSystem) -> float:
    """``||T f||_1`` with T the lattice-sampled, continuum-normalized transform."""
    return float(np.sum(np.abs(lattice_transform(sys).analyze(f))))
