"""
Index bookkeeping for universal shearlet systems.

A scaling sequence fixes one anisotropy parameter ``alpha_j`` per scale.
At scale j the shear bound is ``L_j = 2^{(2 - alpha_j) j}``; interior
bands carry ``|l| < L_j`` in each cone and two boundary bands carry
``l = +-L_j``.  Band weights are evaluated in frequency and returned
without the ``2^{-(2 + alpha_j) j / 2}`` factor, which is kept on the
descriptor.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

import numpy as np

from .atoms import bump, corona, scaling_ft


class NotAdmissible(ValueError):
    """alpha_j * j is not an integer or exceeds 2j - 1."""

    def __init__(self, j, value=None):
        self.j = j
        super().__init__(f"NotAdmissible({j}): alpha_{j} = {value} is not of the form m/{j} with m <= {2 * j - 1}")


class WrongAnchor(ValueError):
    """alpha_0 must be 0."""

    def __init__(self, value=None):
        super().__init__(f"WrongAnchor: alpha_0 must be 0, got {value}")


def as_fraction(x) -> Fraction:
    """Exact rational from int, Fraction, decimal string or float.

    Floats go through their shortest decimal repr, so ``0.3`` becomes
    ``3/10`` rather than the nearest binary fraction.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(repr(float(x)))


@dataclass(frozen=True)
class ScalingSequence:
    values: tuple

    @property
    def J(self) -> int:
        return len(self.values)

    def alpha(self, j: int) -> Fraction:
        return self.values[j]

    def shear_bound(self, j: int) -> int:
        """``L_j = 2^{(2 - alpha_j) j}`` as an exact integer."""
        e = 2 * j - int(self.values[j] * j)
        return 2**e

    def alpha_exp(self, j: int) -> int:
        """The integer ``alpha_j * j``."""
        return int(self.values[j] * j)

    def __str__(self):
        return "(" + ", ".join(str(v) for v in self.values) + ")"


def validate_scaling_sequence(values: Sequence) -> ScalingSequence:
    """Check admissibility and return an exact-rational sequence.

    Raises
    ------
    WrongAnchor
        If ``alpha_0 != 0``.
    NotAdmissible
        At the first j with ``alpha_j * j`` non-integer or ``> 2j - 1``.
    """
    vals = [as_fraction(v) for v in values]
    if not vals:
        raise ValueError("empty scaling sequence")
    if vals[0] != 0:
        raise WrongAnchor(vals[0])
    for j in range(1, len(vals)):
        m = vals[j] * j
        if m.denominator != 1 or m > 2 * j - 1:
            raise NotAdmissible(j, vals[j])
    return ScalingSequence(tuple(vals))


def nearest_admissible(alpha, j: int) -> Fraction:
    """Nearest ``m/j`` with ``m <= 2j - 1``; ties go to the larger value."""
    if j == 0:
        return Fraction(0)
    a = as_fraction(alpha)
    m = (a * j + Fraction(1, 2)).__floor__()
    m = min(m, 2 * j - 1)
    return Fraction(m, j)


def preset_alpha(alpha, J: int) -> ScalingSequence:
    """Best rational approximation of a fixed alpha < 2 at every scale."""
    if as_fraction(alpha) >= 2:
        raise ValueError("alpha must be < 2")
    return validate_scaling_sequence([nearest_admissible(alpha, j) for j in range(J)])


def preset_wavelet(J: int) -> ScalingSequence:
    """Isotropic preset ``alpha_j = 2 - 1/j`` (two shears per half-cone)."""
    if J < 1:
        raise ValueError("J must be >= 1")
    return validate_scaling_sequence([Fraction(0)] + [2 - Fraction(1, j) for j in range(1, J)])


def preset_parabolic(J: int) -> ScalingSequence:
    return preset_alpha(1, J)


def preset_from_name(name: str, J: int) -> ScalingSequence:
    """Parse ``parabolic``, ``wavelet``, ``alpha=<x>`` or an explicit list.

    An explicit list is comma separated, e.g. ``0,1,3/2``.
    """
    name = name.strip()
    if name == "parabolic":
        return preset_parabolic(J)
    if name == "wavelet":
        return preset_wavelet(J)
    if name.startswith("alpha="):
        return preset_alpha(name[len("alpha="):], J)
    if "," in name or name == "0":
        seq = validate_scaling_sequence(name.split(","))
        if seq.J != J:
            raise ValueError(f"explicit sequence has {seq.J} scales, J = {J}")
        return seq
    raise ValueError(f"unknown preset {name!r}")


@dataclass(frozen=True)
class ShearletIndex:
    j: int
    l: int
    k: tuple
    iota: str
    alpha: Fraction


@dataclass(frozen=True)
class BandDescriptor:
    """One (j, l, iota) band; ``iota`` in {coarse, h, v, boundary}."""

    j: int
    l: int
    iota: str
    alpha: Fraction
    normalization: float
    shear_bound: int = 1

    @property
    def key(self):
        return (self.j, self.l, self.iota)


def _normalization(j, alpha, boundary):
    e = -float((2 + alpha) * j) / 2.0
    if boundary and j >= 1:
        e -= 0.5
    return 2.0**e


def enumerate_bands(seq: ScalingSequence) -> List[BandDescriptor]:
    """All bands: coarse first, then per j the h, v, boundary families."""
    bands = [BandDescriptor(-1, 0, "coarse", Fraction(0), 1.0, 1)]
    for j in range(seq.J):
        a = seq.alpha(j)
        L = seq.shear_bound(j)
        for iota in ("h", "v"):
            for l in range(-L + 1, L):
                bands.append(BandDescriptor(j, l, iota, a, _normalization(j, a, False), L))
        for l in (-L, L):
            bands.append(BandDescriptor(j, l, "boundary", a, _normalization(j, a, True), L))
    return bands


def band_count(seq: ScalingSequence) -> int:
    return 1 + sum(2 * (2 * seq.shear_bound(j) - 1) + 2 for j in range(seq.J))


def _ratio(num, den):
    den_safe = np.where(den == 0, 1.0, den)
    return num / den_safe, den == 0


def shear_factor(band: BandDescriptor, xi1, xi2):
    """Directional factor of a band weight (everything except ``W_j``)."""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    L = band.shear_bound
    rh, zh = _ratio(xi2, xi1)
    rv, zv = _ratio(xi1, xi2)
    if band.iota == "h":
        return np.where(zh, 0.0, bump(L * rh - band.l))
    if band.iota == "v":
        return np.where(zv, 0.0, bump(L * rv - band.l))
    if band.iota == "boundary":
        s = 1 if band.l > 0 else -1
        in_h = np.abs(xi2) <= np.abs(xi1)
        vh = np.where(zh, 0.0, bump(L * (rh - s)))
        vv = np.where(zv, 0.0, bump(L * (rv - s)))
        return np.where(in_h, vh, vv)
    raise ValueError(f"unknown orientation {band.iota!r}")


def band_weight(band: BandDescriptor, xi1, xi2):
    """Unnormalized band weight ``atom_ft / normalization``.

    Interior: ``W_j(xi) v(L xi2/xi1 - l)`` (h) or ``W_j(xi) v(L xi1/xi2 - l)``
    (v).  Boundary: the h formula ``v(L (xi2/xi1 - sgn l))`` on
    ``|xi2| <= |xi1|`` and the v formula elsewhere.  Coarse: ``Phi(xi)``.
    """
    if band.iota == "coarse":
        return scaling_ft(xi1, xi2)
    return corona(xi1, xi2, band.j) * shear_factor(band, xi1, xi2)


def atom_ft(band: BandDescriptor, xi1, xi2):
    """Modulus of the atom's Fourier transform at zero translation."""
    return band.normalization * band_weight(band, xi1, xi2)


def band_listing(bands: Sequence[BandDescriptor]) -> str:
    """Text export ``j,l,iota,alpha_num,alpha_den,normalization``."""
    lines = ["j,l,iota,alpha_num,alpha_den,normalization"]
    for b in bands:
        lines.append(f"{b.j},{b.l},{b.iota},{b.alpha.numerator},{b.alpha.denominator},{b.normalization!r}")
    return "\n".join(lines) + "\n"
