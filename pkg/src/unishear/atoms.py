"""
Scalar frequency windows used to build the shearlet bands.

All functions accept scalars or numpy arrays and are evaluated pointwise.

* ``meyer_scaling_ft``: 1D Meyer-type window, 1 on ``|u| <= 1/16``, 0 on
  ``|u| >= 1/8``.
* ``scaling_ft``: tensor product window ``Phi(xi) = phi(xi1) * phi(xi2)``.
* ``corona``: ``W_j(xi) = sqrt(Phi^2(2^{-2j-2} xi) - Phi^2(2^{-2j} xi))``.
* ``bump``: the shear bump ``v`` with ``sum_l v(u - l)^2 = 1``.
* ``cone_ft``: ``v(xi2/xi1)`` (horizontal) or ``v(xi1/xi2)`` (vertical).
"""

from dataclasses import dataclass

import numpy as np

PLATEAU = 1.0 / 16.0
SUPPORT = 1.0 / 8.0
RADICAND_CLAMP = 1e-14


@dataclass(frozen=True)
class WindowProfile:
    transition_ramp: str = "meyer7"
    support_radius: float = SUPPORT
    plateau_radius: float = PLATEAU


@dataclass(frozen=True)
class BumpProfile:
    step: str = "meyer7"


def ramp(t):
    """Polynomial smooth step ``t^4 (35 - 84 t + 70 t^2 - 20 t^3)``.

    Clipped to [0, 1] outside the unit interval. Satisfies
    ``ramp(t) + ramp(1 - t) = 1`` and has three vanishing derivatives at
    both ends.
    """
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t**4 * (35.0 - 84.0 * t + 70.0 * t**2 - 20.0 * t**3)


def meyer_scaling_ft(u):
    """Even 1D window phi_hat with plateau 1/16 and support 1/8.

    Parameters
    ----------
    u : float or ndarray
        Frequency.

    Returns
    -------
    ndarray or float
        Values in [0, 1].
    """
    a = np.abs(np.asarray(u, dtype=float))
    t = (a - PLATEAU) / (SUPPORT - PLATEAU)
    out = np.cos(0.5 * np.pi * ramp(t))
    out = np.where(a <= PLATEAU, 1.0, out)
    out = np.where(a >= SUPPORT, 0.0, out)
    return out[()] if out.ndim == 0 else out


def scaling_ft(xi1, xi2):
    """Tensor window ``Phi(xi) = phi(xi1) phi(xi2)``."""
    return meyer_scaling_ft(xi1) * meyer_scaling_ft(xi2)


def corona_base(xi1, xi2):
    """Unscaled corona ``W(xi) = sqrt(Phi^2(xi/4) - Phi^2(xi))``."""
    r = scaling_ft(np.asarray(xi1) / 4.0, np.asarray(xi2) / 4.0) ** 2 - scaling_ft(xi1, xi2) ** 2
    r = np.where((r < 0) & (r > -RADICAND_CLAMP), 0.0, r)
    return np.sqrt(r)


def corona(xi1, xi2, j):
    """Scale-j corona ``W_j(xi) = W(2^{-2j} xi)``.

    Supported in ``[-2^{2j-1}, 2^{2j-1}]^2`` minus the open square of
    half-width ``2^{2j-4}``.
    """
    s = 2.0 ** (-2 * j)
    return corona_base(np.asarray(xi1, dtype=float) * s, np.asarray(xi2, dtype=float) * s)


def bump(u):
    """Shear bump v, supported in [-1, 1], with v(0) = 1.

    ``v(u) = cos(pi/2 * ramp(|u|))`` so that ``v(u)^2 + v(u - 1)^2 = 1`` on
    [0, 1] and v is flat to order seven at the origin.
    """
    a = np.abs(np.asarray(u, dtype=float))
    out = np.cos(0.5 * np.pi * ramp(a))
    out = np.where(a >= 1.0, 0.0, out)
    return out[()] if out.ndim == 0 else out


def _safe_ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    zero = den == 0
    return np.divide(num, np.where(zero, 1.0, den)), zero


def cone_ft(xi1, xi2, iota):
    """Cone function ``V_h = v(xi2/xi1)`` or ``V_v = v(xi1/xi2)``.

    Returns 0 where the denominator vanishes.
    """
    if iota == "h":
        r, zero = _safe_ratio(xi2, xi1)
    elif iota == "v":
        r, zero = _safe_ratio(xi1, xi2)
    else:
        raise ValueError(f"orientation must be 'h' or 'v', got {iota!r}")
    out = np.where(zero, 0.0, bump(r))
    return out[()] if out.ndim == 0 else out
