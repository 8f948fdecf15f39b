"""
l1-analysis inpainting and one-step thresholding.

Both iterative solvers address

    minimize ||T x||_1  subject to  P_K x = P_K x0,

with T the lattice transform (a Parseval frame, so ``T* T = I``).  The
constraint is enforced exactly at every iterate by overwriting the known
pixels, so feasibility holds bit for bit.

``shrinkage_path``
    Projected soft thresholding ``x <- P_K x0 + P_M T* soft(T x, lam)``
    with ``lam`` decaying geometrically from ``lambda_max`` to
    ``lambda_min``.  For fixed ``lam`` this is projected gradient descent
    on the Huber smoothing of ``||T x||_1``.
``splitting``
    ADMM on the split ``z = T x``.  Because ``T* T = I`` the x-update is
    the closed form ``P_K x0 + P_M T*(z - u)``.  The penalty is adapted by
    residual balancing.
"""

import time
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .model import project_known
from .transform import DigitalSystem, lattice_transform


class ZeroReference(ValueError):
    pass


class NonConvergence(UserWarning):
    """Iteration budget exhausted; the best iterate is still returned."""

    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"NonConvergence(iterations={iterations}, residual={residual:.3e})")


@dataclass
class SolverConfig:
    method: str = "shrinkage_path"
    max_iters: int = 300
    lambda_max: Optional[float] = None
    lambda_min: Optional[float] = None
    lambda_min_ratio: float = 1e-4
    decay: float = 0.9
    rho: Optional[float] = None
    dual_tol: float = 1e-7
    tol: float = 1e-6

    def __post_init__(self):
        if self.method not in ("shrinkage_path", "splitting"):
            raise ValueError(f"unknown solver {self.method!r}")
        if not 0 < self.decay < 1:
            raise ValueError("decay must lie in (0, 1)")
        if self.tol <= 0 or self.dual_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.lambda_max is not None and self.lambda_min is not None:
            if not self.lambda_max >= self.lambda_min > 0:
                raise ValueError("need lambda_max >= lambda_min > 0")
        if not 0 < self.lambda_min_ratio <= 1:
            raise ValueError("lambda_min_ratio must lie in (0, 1]")


@dataclass
class RecoveryReport:
    image: np.ndarray
    iterations: int
    objective: float
    feasibility: float
    seconds: float
    converged: bool = True
    method: str = ""
    history: List[float] = field(default_factory=list)
    residual: float = 0.0

    @property
    def status(self):
        return "ok" if self.converged else "NonConvergence"

    def as_text(self) -> str:
        """Flat ``key=value`` block."""
        items = [
            ("method", self.method),
            ("status", self.status),
            ("iterations", self.iterations),
            ("objective", repr(self.objective)),
            ("feasibility", repr(self.feasibility)),
            ("residual", repr(self.residual)),
            ("seconds", f"{self.seconds:.3f}"),
        ]
        return "\n".join(f"{k}={v}" for k, v in items) + "\n"


def soft(a, lam):
    """Soft thresholding; ``lam`` may be a scalar or an array."""
    return np.sign(a) * np.maximum(np.abs(a) - lam, 0.0)


def _feasibility(x, known, mask):
    return float(np.max(np.abs(np.where(mask, 0.0, x - known)), initial=0.0))


def inpaint_l1(corrupted, mask, sys: DigitalSystem, config: SolverConfig = None) -> RecoveryReport:
    """l1-analysis inpainting of the masked pixels.

    Parameters
    ----------
    corrupted : ndarray
        ``P_K x0``; values inside the mask are ignored.
    mask : ndarray of bool
        True on missing pixels.
    sys : DigitalSystem
    config : SolverConfig

    Returns
    -------
    RecoveryReport
        ``converged`` is False when the iteration budget ran out; the best
        iterate found is returned in that case.
    """
    config = SolverConfig() if config is None else config
    t0 = time.perf_counter()
    mask = np.asarray(mask, dtype=bool)
    y = project_known(corrupted, mask)
    lt = lattice_transform(sys)
    if not mask.any():
        x = np.array(corrupted, dtype=float, copy=True)
        obj = float(np.sum(np.abs(lt.analyze(x))))
        return RecoveryReport(x, 0, obj, _feasibility(x, y, mask), time.perf_counter() - t0, True, config.method, [obj])
    if config.method == "splitting":
        x, it, conv, hist, res = _admm(y, mask, lt, config)
    else:
        x, it, conv, hist, res = _shrinkage_path(y, mask, lt, config)
    obj = float(np.sum(np.abs(lt.analyze(x))))
    if not conv:
        warnings.warn(NonConvergence(it, res), stacklevel=2)
    return RecoveryReport(x, it, obj, _feasibility(x, y, mask), time.perf_counter() - t0, conv, config.method, hist, res)


def _shrinkage_path(y, mask, lt, cfg):
    a0 = lt.analyze(y)
    lam_max = cfg.lambda_max if cfg.lambda_max is not None else float(np.max(np.abs(a0)))
    lam_min = cfg.lambda_min if cfg.lambda_min is not None else cfg.lambda_min_ratio * lam_max
    if lam_max <= 0:
        return y.copy(), 0, True, [0.0], 0.0
    x = y.copy()
    lam = lam_max
    hist = []
    best, best_obj = x, np.inf
    change = np.inf
    for it in range(1, cfg.max_iters + 1):
        a = lt.analyze(x)
        obj = float(np.sum(np.abs(a)))
        hist.append(obj)
        if lam <= lam_min and obj < best_obj:
            best, best_obj = x, obj
        x_new = np.where(mask, lt.synthesize(soft(a, lam)), y)
        change = np.linalg.norm(x_new - x) / max(np.linalg.norm(x_new), 1e-300)
        x = x_new
        if lam <= lam_min and change < cfg.tol:
            return x, it, True, hist, float(change)
        lam = max(lam * cfg.decay, lam_min)
    obj = float(np.sum(np.abs(lt.analyze(x))))
    if obj <= best_obj:
        best = x
    return best, cfg.max_iters, False, hist, float(change)


def _admm(y, mask, lt, cfg):
    x = y.copy()
    Tx = lt.analyze(x)
    rho = cfg.rho if cfg.rho is not None else 1.0 / max(0.1 * float(np.max(np.abs(Tx))), 1e-300)
    z = Tx.copy()
    u = np.zeros_like(z)
    hist = []
    n = np.sqrt(z.size)
    best, best_obj = x, np.inf
    r = s = np.inf
    for it in range(1, cfg.max_iters + 1):
        x = np.where(mask, lt.synthesize(z - u), y)
        Tx = lt.analyze(x)
        obj = float(np.sum(np.abs(Tx)))
        hist.append(obj)
        if obj < best_obj:
            best, best_obj = x, obj
        z_old = z
        z = soft(Tx + u, 1.0 / rho)
        u = u + Tx - z
        r = float(np.linalg.norm(Tx - z))
        s = rho * float(np.linalg.norm(np.where(mask, lt.synthesize(z - z_old), 0.0)))
        eps_pri = cfg.dual_tol * n + cfg.tol * max(np.linalg.norm(Tx), np.linalg.norm(z))
        eps_dual = cfg.dual_tol * n + cfg.tol * rho * float(np.linalg.norm(np.where(mask, lt.synthesize(u), 0.0)))
        if r <= eps_pri and s <= eps_dual:
            return x, it, True, hist, max(r, s)
        if r > 10 * s:
            rho *= 2.0
            u /= 2.0
        elif s > 10 * r:
            rho /= 2.0
            u *= 2.0
    return best, cfg.max_iters, False, hist, max(r, s)


def inpaint_threshold_onestep(corrupted, mask, sys: DigitalSystem, beta: float, cone: Optional[str] = None) -> RecoveryReport:
    """One-step thresholding ``T*(1_{|c| >= beta} T(P_K f))``.

    ``cone='v'`` additionally restricts the kept set to vertical-cone bands.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    t0 = time.perf_counter()
    mask = np.asarray(mask, dtype=bool)
    y = project_known(corrupted, mask)
    lt = lattice_transform(sys)
    a = lt.analyze(y)
    keep = np.abs(a) >= beta
    if cone is not None:
        iotas = np.array([d.band.iota for d in lt.data])
        keep &= iotas[lt.band_of()] == cone
    x = lt.synthesize(np.where(keep, a, 0.0))
    obj = float(np.sum(np.abs(lt.analyze(x))))
    rep = RecoveryReport(x, 1, obj, _feasibility(x, y, mask), time.perf_counter() - t0, True, "onestep", [obj])
    rep.kept = int(np.count_nonzero(keep))
    return rep


def beta_quantile(known, sys: DigitalSystem, q: float) -> float:
    """Threshold at quantile ``q`` of the coefficient moduli of ``known``."""
    a = np.abs(lattice_transform(sys).analyze(known))
    return float(np.quantile(a, q))


def relative_error(recovered, reference, sys: DigitalSystem) -> float:
    """``||T(recovered - reference)||_1 / ||T reference||_1``."""
    lt = lattice_transform(sys)
    den = float(np.sum(np.abs(lt.analyze(reference))))
    if den == 0:
        raise ZeroReference("reference has zero l1-analysis norm")
    return float(np.sum(np.abs(lt.analyze(np.asarray(recovered) - reference)))) / den
