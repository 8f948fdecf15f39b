"""
Gap-versus-scale sweeps on the line model.

At every scale j the sweep builds the filtered model ``f_j``, removes the
strip ``|x1| <= h_j`` with ``h_j = c 2^{-(alpha_j + eps') j}``, inpaints it
and records the relative l1-analysis error together with the cluster
diagnostics ``delta_j`` and ``mu_c``.
"""

import csv
import io as _stdio
import time
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .diagnostics import build_cluster, cluster_coherence, delta_sparsity, verify_error_bound
from .model import EmptyMask, WeightSpec, default_weight, filtered_model, make_mask, project_known
from .recover import SolverConfig, inpaint_l1, relative_error
from .system import preset_from_name
from .transform import build_digital_system, lattice_transform

CSV_COLUMNS = [
    "preset", "j", "alpha_num", "alpha_den", "h_continuum", "h_pixels",
    "rel_err_l1a", "rel_err_l2", "delta_j", "mu_c", "bound", "bound_ok", "iters", "ms",
]
TIMING_COLUMNS = ("ms",)


class DegenerateInput(ValueError):
    pass


class MismatchedGrids(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    """One sweep.

    ``eta`` is the oversampling factor (pixels per unit length).  The
    default ``2^{2 j_max}`` puts the Nyquist frequency on the outer edge of
    the finest swept corona, so every swept scale is resolved by as many
    grid frequencies as the grid allows.  ``c = None`` calibrates the gap
    law so that ``h_1`` is ``h1_pixels`` pixels.
    """

    preset: str = "parabolic"
    j_min: int = 1
    j_max: int = 4
    epsilon: float = 0.1
    eps_prime: float = 0.2
    c: Optional[float] = None
    h1_pixels: float = 8.0
    N: int = 512
    J: Optional[int] = None
    eta: Optional[int] = None
    weight: Optional[WeightSpec] = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    diagnostics: bool = True
    gaps: Optional[tuple] = None  # explicit h_j overrides the gap law

    def __post_init__(self):
        if not 0 <= self.j_min <= self.j_max:
            raise ValueError("need 0 <= j_min <= j_max")
        if self.epsilon <= 0 or self.eps_prime <= 0:
            raise ValueError("epsilon and eps_prime must be positive")
        if self.c is not None and self.c <= 0:
            raise ValueError("c must be positive")
        if self.h1_pixels <= 0:
            raise ValueError("h1_pixels must be positive")
        if self.gaps is not None and len(self.gaps) != self.j_max - self.j_min + 1:
            raise ValueError("one explicit gap per swept scale is required")

    @property
    def n_scales(self) -> int:
        return self.J if self.J is not None else self.j_max + 1

    @property
    def spacing(self) -> Fraction:
        eta = self.eta if self.eta is not None else 2 ** (2 * self.j_max)
        return Fraction(eta) / self.N


@dataclass
class ExperimentRecord:
    preset: str
    j: int
    alpha: Fraction
    h_continuum: float
    h_pixels: int
    rel_err_l1a: float = float("nan")
    rel_err_l2: float = float("nan")
    delta_j: float = float("nan")
    mu_c: float = float("nan")
    bound: float = float("nan")
    bound_ok: str = ""
    iters: int = 0
    ms: float = 0.0
    status: str = "ok"
    report: str = ""

    def row(self):
        return [
            self.preset, self.j, self.alpha.numerator, self.alpha.denominator,
            _num(self.h_continuum), self.h_pixels, _num(self.rel_err_l1a), _num(self.rel_err_l2),
            _num(self.delta_j), _num(self.mu_c), _num(self.bound), self.bound_ok,
            self.iters, f"{self.ms:.1f}",
        ]


def _num(v):
    return repr(float(v))


def build_system(config: SweepConfig):
    seq = preset_from_name(config.preset, config.n_scales)
    sys = build_digital_system(seq, config.N, config.n_scales, config.spacing)
    if config.j_max >= sys.J:
        raise ValueError(f"j_max = {config.j_max} needs J > {config.j_max}")
    return sys


def gap_law(config: SweepConfig, sys=None) -> List[float]:
    """Continuum half-widths ``h_j`` for ``j = j_min..j_max``."""
    if config.gaps is not None:
        return [float(h) for h in config.gaps]
    seq = preset_from_name(config.preset, config.n_scales)
    pixel = float(1 / (config.spacing * config.N))
    c = config.c
    if c is None:
        a1 = float(seq.alpha(1)) if seq.J > 1 else 0.0
        c = config.h1_pixels * pixel * 2.0 ** (a1 + config.eps_prime)
    return [c * 2.0 ** (-(float(seq.alpha(j)) + config.eps_prime) * j) for j in range(config.j_min, config.j_max + 1)]


def run_record(config: SweepConfig, sys, j: int, h: float) -> ExperimentRecord:
    """Model, mask, inpaint and diagnose one scale."""
    alpha = sys.seq.alpha(j)
    t0 = time.perf_counter()
    spec = config.weight if config.weight is not None else default_weight(sys)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyMask)
        mspec, mask = make_mask(min(h, sys.grid.T), sys)
    rec = ExperimentRecord(config.preset, j, alpha, h, mspec.count)
    model = filtered_model(j, sys, spec)
    x0 = model.image
    y = project_known(x0, mask)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = inpaint_l1(y, mask, sys, config.solver)
    rec.iters = rep.iterations
    rec.report = rep.as_text()
    if not rep.converged:
        rec.status = "NonConvergence"
    rec.rel_err_l1a = relative_error(rep.image, x0, sys)
    rec.rel_err_l2 = float(np.linalg.norm(rep.image - x0) / np.linalg.norm(x0))
    if config.diagnostics:
        lt = lattice_transform(sys)
        cl = build_cluster(j, config.epsilon, sys, neighbor_extension=True)
        rec.delta_j = delta_sparsity(x0, cl, sys).delta
        rec.mu_c = cluster_coherence(cl, mask, sys)
        observed = float(np.sum(np.abs(lt.analyze(rep.image - x0))))
        cert = verify_error_bound(rec.delta_j, rec.mu_c, observed)
        rec.bound = cert.bound if cert.bound is not None else float("nan")
        rec.bound_ok = cert.label
    else:
        rec.bound_ok = "skipped"
    rec.ms = 1000.0 * (time.perf_counter() - t0)
    return rec


def run_sweep(config: SweepConfig, sys=None) -> List[ExperimentRecord]:
    """One record per swept scale; a failing scale is marked and skipped over."""
    sys = build_system(config) if sys is None else sys
    hs = gap_law(config, sys)
    if all(h < sys.grid.pixel / 2 for h in hs):
        warnings.warn("gap law masks no pixel at any swept scale", EmptyMask)
    out = []
    for j, h in zip(range(config.j_min, config.j_max + 1), hs):
        try:
            out.append(run_record(config, sys, j, h))
        except Exception as exc:  # recorded, the sweep goes on
            rec = ExperimentRecord(config.preset, j, sys.seq.alpha(j), h, 0, status=f"failed: {exc}")
            rec.bound_ok = "failed"
            out.append(rec)
    return out


@dataclass
class DecayFit:
    slope: float
    intercept: float
    residual: float


def fit_decay_rate(records, floor: float = 1e-13) -> DecayFit:
    """Least-squares slope of ``log2(error)`` against j.

    Accepts ExperimentRecords or ``(j, error)`` pairs.  The residual is the
    root-mean-square misfit in log2 units.

    Raises
    ------
    DegenerateInput
        Fewer than 3 points, or an error at or below ``floor``.
    """
    pts = [(r.j, r.rel_err_l1a) if isinstance(r, ExperimentRecord) else tuple(r) for r in records]
    if len(pts) < 3:
        raise DegenerateInput("need at least 3 records")
    j = np.array([p[0] for p in pts], dtype=float)
    e = np.array([p[1] for p in pts], dtype=float)
    if not np.all(np.isfinite(e)) or np.any(e <= floor):
        raise DegenerateInput("errors at the numerical floor")
    y = np.log2(e)
    A = np.stack([j, np.ones_like(j)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return DecayFit(float(coef[0]), float(coef[1]), res)


def records_csv(records: Sequence[ExperimentRecord]) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def write_records(path, records):
    with open(path, "w", newline="") as fh:
        fh.write(records_csv(records))


def write_reports(path, records):
    """Solver reports as ``key=value`` blocks, one per record."""
    with open(path, "w") as fh:
        for r in records:
            fh.write(f"[{r.preset} j={r.j}]\nrecord_status={r.status}\n{r.report}\n")


def strip_timing(csv_text: str) -> str:
    """Drop the timing columns (for determinism checks)."""
    rows = list(csv.reader(_stdio.StringIO(csv_text)))
    if not rows:
        return ""
    drop = {rows[0].index(c) for c in TIMING_COLUMNS if c in rows[0]}
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([v for i, v in enumerate(row) if i not in drop])
    return buf.getvalue()


# --------------------------------------------------------------------------
# preset comparison


@dataclass
class ComparisonTable:
    presets: List[str]
    records: dict  # preset -> list of ExperimentRecord

    def by_j(self):
        """``{j: {preset: record}}``."""
        out = {}
        for p in self.presets:
            for r in self.records[p]:
                out.setdefault(r.j, {})[p] = r
        return out

    def csv(self) -> str:
        return records_csv([r for p in self.presets for r in self.records[p]])


def _shared(c: SweepConfig):
    return (c.N, c.n_scales, c.spacing, c.weight, c.j_min, c.j_max, c.epsilon)


def compare_presets(configs: Sequence[SweepConfig], shared_gaps: bool = True) -> ComparisonTable:
    """Run several presets under one grid, model and gap sequence.

    With ``shared_gaps`` every preset uses the absolute gaps ``h_j`` of the
    first configuration.

    Raises
    ------
    MismatchedGrids
        If the configurations differ in grid, model or swept scales.
    """
    configs = list(configs)
    if not configs:
        return ComparisonTable([], {})
    ref = _shared(configs[0])
    for c in configs[1:]:
        if _shared(c) != ref:
            raise MismatchedGrids("configurations must share grid, model and scales")
    gaps = tuple(gap_law(configs[0])) if shared_gaps else None
    names, recs = [], {}
    for c in configs:
        name = c.preset
        while name in recs:
            name += "'"
        cfg = replace(c, gaps=gaps) if gaps is not None else c
        rs = run_sweep(cfg)
        for r in rs:
            r.preset = name
        names.append(name)
        recs[name] = rs
    return ComparisonTable(names, recs)


def plot_errors(table: ComparisonTable, height: int = 240, width: int = 360) -> np.ndarray:
    """Grayscale raster of ``log2`` error against j, one polyline per preset.

    Presets are drawn in decreasing gray levels with square markers of
    increasing size; the background is white and the frame black.
    """
    img = np.full((height, width), 255, dtype=np.uint8)
    pad = 20
    img[pad, pad:width - pad] = 0
    img[height - pad, pad:width - pad] = 0
    img[pad:height - pad, pad] = 0
    img[pad:height - pad, width - pad] = 0
    pts = {p: [(r.j, r.rel_err_l1a) for r in table.records[p] if np.isfinite(r.rel_err_l1a) and r.rel_err_l1a > 0] for p in table.presets}
    allp = [q for v in pts.values() for q in v]
    if not allp:
        return img
    js = [q[0] for q in allp]
    ys = [np.log2(q[1]) for q in allp]
    j0, j1 = min(js), max(js) if max(js) > min(js) else min(js) + 1
    y0, y1 = min(ys), max(ys) if max(ys) > min(ys) else min(ys) + 1

    def to_px(j, e):
        c = pad + 4 + (j - j0) / (j1 - j0) * (width - 2 * pad - 8)
        r = height - pad - 4 - (np.log2(e) - y0) / (y1 - y0) * (height - 2 * pad - 8)
        return int(round(r)), int(round(c))

    for k, p in enumerate(table.presets):
        gray = int(160 * k / max(1, len(table.presets) - 1)) if len(table.presets) > 1 else 0
        px = [to_px(j, e) for j, e in pts[p]]
        for (ra, ca), (rb, cb) in zip(px, px[1:]):
            n = max(abs(rb - ra), abs(cb - ca), 1)
            for t in np.linspace(0.0, 1.0, n + 1):
                img[int(round(ra + t * (rb - ra))), int(round(ca + t * (cb - ca)))] = gray
        size = 2 + k
        for r, c in px:
            img[max(0, r - size):r + size + 1, max(0, c - size):c + size + 1] = gray
    return img
