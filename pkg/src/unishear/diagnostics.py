"""
Cluster sparsity, cluster coherence and the l1 error certificate.

All quantities refer to the lattice frame of ``transform.LatticeTransform``.
It is Parseval for the mean inner product ``<f, g> = mean(f * g)``, so

    ||x* - x0||_{1,Psi} <= 2 delta / (1 - 2 mu_c)

holds exactly for the lattice frame on the periodic grid.  The lattice is
finite on the torus, so no translation truncation takes place and the
reported tail is zero.
"""

import csv
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .system import ShearletIndex
from .transform import DigitalSystem, lattice_transform, spectrum_image


@dataclass(frozen=True)
class LatticeCoefficient:
    index: ShearletIndex
    value: complex


def _lattice_k(band, m1, m2):
    if band.iota in ("h", "boundary"):
        return m1 + band.l * m2, m2
    if band.iota == "v":
        return m1, m2 + band.l * m1
    return m1, m2


def band_position(sys: DigitalSystem, band) -> int:
    """Coefficient-band position of a descriptor or (j, l, iota) key."""
    key = band.key if hasattr(band, "key") else tuple(band)
    for i, d in enumerate(sys.all_data):
        if d.band.key == key:
            return i
    raise KeyError(f"band {key} not in system")


def lattice_values(f, i: int, sys: DigitalSystem):
    """``(m1, m2, t1, t2, values)`` arrays of coefficient band i."""
    lt = lattice_transform(sys)
    a = lt.analyze(f)[lt.band_slice(i)].reshape(lt.data[i].P)
    m1, m2, t1, t2 = lt.positions(i)
    return m1, m2, t1, t2, a


def lattice_coefficients(f, band, sys: DigitalSystem) -> List[LatticeCoefficient]:
    """Continuum-normalized coefficients ``<f, psi_gamma>`` of one band.

    Evaluated at every lattice translation of the band on the torus.
    """
    i = band if isinstance(band, (int, np.integer)) else band_position(sys, band)
    b = sys.all_data[i].band
    m1, m2, _, _, a = lattice_values(f, i, sys)
    k1, k2 = _lattice_k(b, m1, m2)
    out = []
    for p, q, v in zip(k1.ravel(), k2.ravel(), a.ravel()):
        out.append(LatticeCoefficient(ShearletIndex(b.j, b.l, (int(p), int(q)), b.iota, b.alpha), complex(v)))
    return out


def lattice_direct(f, i: int, sys: DigitalSystem) -> np.ndarray:
    """Direct summation ``norm * sum_xi F(xi) B(xi) e^{2 pi i xi t}`` (oracle path)."""
    N = sys.N
    d = sys.all_data[i]
    F = (np.fft.fft2(np.fft.ifftshift(f)) / (N * N)).ravel()
    lt = lattice_transform(sys)
    _, _, t1, t2 = lt.positions(i)
    X1, X2 = sys.grid.frequencies()
    x1, x2 = X1.ravel()[d.idx], X2.ravel()[d.idx]
    ph = np.exp(2j * np.pi * (np.outer(t1.ravel(), x1) + np.outer(t2.ravel(), x2)))
    return (d.lattice_norm * ph @ (F[d.idx] * d.weight)).reshape(d.P)


# --------------------------------------------------------------------------
# clusters


@dataclass
class ClusterSpec:
    j: int
    epsilon: float
    members: List[ShearletIndex]
    neighbor_extension: bool
    indices: np.ndarray = field(repr=False, default=None)  # positions in the lattice vector
    scales: tuple = ()

    def __len__(self):
        return len(self.members)


def in_cluster(index: ShearletIndex, epsilon: float) -> bool:
    """Defining predicate ``iota = v, |l| <= 1, |k2 - l k1| <= 2^{eps j}``."""
    k1, k2 = index.k
    return index.iota == "v" and abs(index.l) <= 1 and abs(k2 - index.l * k1) <= 2.0 ** (epsilon * index.j)


def build_cluster(j: int, epsilon: float, sys: DigitalSystem, neighbor_extension: bool = False) -> ClusterSpec:
    """Cluster ``Lambda_j`` (or ``Lambda_{j-1} u Lambda_j u Lambda_{j+1}``)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 <= j < sys.J:
        raise ValueError(f"scale {j} outside 0..{sys.J - 1}")
    lt = lattice_transform(sys)
    scales = (j - 1, j, j + 1) if neighbor_extension else (j,)
    members, idx = [], []
    for i, d in enumerate(lt.data):
        b = d.band
        if b.iota != "v" or abs(b.l) > 1 or b.j not in scales:
            continue
        m1, m2, _, _ = lt.positions(i)
        k1, k2 = _lattice_k(b, m1, m2)
        sel = np.abs(k2 - b.l * k1) <= 2.0 ** (epsilon * b.j)
        flat = np.flatnonzero(sel.ravel())
        for p in flat:
            members.append(ShearletIndex(b.j, b.l, (int(k1.ravel()[p]), int(k2.ravel()[p])), "v", b.alpha))
        idx.append(lt.offsets[i] + flat)
    indices = np.concatenate(idx) if idx else np.zeros(0, dtype=np.int64)
    return ClusterSpec(j, epsilon, members, neighbor_extension, indices.astype(np.int64), scales)


@dataclass
class DeltaResult:
    delta: float
    in_cluster: float
    total: float
    outside_scales: float
    tail: float = 0.0

    def __float__(self):
        return self.delta


def delta_sparsity(f, cluster: ClusterSpec, sys: DigitalSystem, coeffs=None) -> DeltaResult:
    """l1 mass of the coefficients at the cluster's scales that lie outside it.

    ``outside_scales`` reports the mass at all other scales; it vanishes for
    models band-limited to the corona of scale ``cluster.j``.
    """
    lt = lattice_transform(sys)
    a = np.abs(lt.analyze(f) if coeffs is None else coeffs)
    scales = np.array([sys.scale_of(i) for i in range(len(lt.data))])[lt.band_of()]
    lo, hi = min(cluster.scales), max(cluster.scales)
    if not cluster.neighbor_extension:
        lo, hi = cluster.j - 1, cluster.j + 1
    at = (scales >= lo) & (scales <= hi)
    inside = np.zeros(a.size, dtype=bool)
    inside[cluster.indices] = True
    total = float(np.sum(a[at]))
    inc = float(np.sum(a[inside]))
    delta = float(np.sum(a[at & ~inside]))
    return DeltaResult(delta, inc, total, float(np.sum(a[~at])))


# --------------------------------------------------------------------------
# coherence


def atom_image(sys: DigitalSystem, pos: int) -> np.ndarray:
    """Spatial atom ``T* e_pos`` of the lattice frame."""
    lt = lattice_transform(sys)
    i = int(np.searchsorted(lt.offsets, pos, side="right") - 1)
    d = lt.data[i]
    N = sys.N
    e = np.zeros(d.size)
    e[pos - lt.offsets[i]] = 1.0
    H = np.fft.fft2(e.reshape(d.P)).ravel()
    X = np.zeros(N * N, dtype=complex)
    X[d.idx] = H[d.bins] * d.weight * d.lattice_norm
    return spectrum_image(X.reshape(N, N) * (N * N))


def coherence_rows(cluster: ClusterSpec, mask, sys: DigitalSystem) -> np.ndarray:
    """``S(g2) = sum_{g1 in cluster} |<P_M psi_g1, P_M psi_g2>|`` for every g2."""
    lt = lattice_transform(sys)
    mask = np.asarray(mask, dtype=bool)
    acc = np.zeros(lt.size)
    if not mask.any():
        return acc
    for pos in cluster.indices:
        g = np.where(mask, atom_image(sys, int(pos)), 0.0)
        acc += np.abs(lt.analyze(g))
    return acc


def cluster_coherence(cluster: ClusterSpec, mask, sys: DigitalSystem, probe_scales=None) -> float:
    """``mu_c = max_{g2} sum_{g1 in cluster} |<P_M psi_g1, P_M psi_g2>|``.

    ``probe_scales`` restricts the candidates ``g2`` to the listed scales
    (the completion band is scale J, the coarse band -1); default is every
    index of the frame.
    """
    rows = coherence_rows(cluster, mask, sys)
    if probe_scales is not None:
        lt = lattice_transform(sys)
        scales = np.array([sys.scale_of(i) for i in range(len(lt.data))])[lt.band_of()]
        rows = rows[np.isin(scales, list(probe_scales))]
    return float(np.max(rows, initial=0.0))


def cluster_coherence_bruteforce(cluster: ClusterSpec, mask, sys: DigitalSystem) -> float:
    """Exhaustive double loop over explicit spatial atoms (small grids only)."""
    lt = lattice_transform(sys)
    mask = np.asarray(mask, dtype=bool)
    left = [np.where(mask, atom_image(sys, int(p)), 0.0) for p in cluster.indices]
    best = 0.0
    for pos in range(lt.size):
        right = np.where(mask, atom_image(sys, pos), 0.0)
        row = 0.0
        for g in left:
            row += abs(float(np.mean(g * right)))
        best = max(best, row)
    return best


# --------------------------------------------------------------------------
# certificate


@dataclass
class Certificate:
    applicable: bool
    bound: Optional[float]
    holds: Optional[bool]
    violated_by: float = 0.0

    @property
    def label(self):
        if not self.applicable:
            return "NotApplicable"
        return "ok" if self.holds else "violated"


def verify_error_bound(delta: float, mu_c: float, observed_error: float, tol: float = 0.0) -> Certificate:
    """Check ``observed <= 2 delta / (1 - 2 mu_c) + tol`` when ``mu_c < 1/2``."""
    if not mu_c < 0.5:
        return Certificate(False, None, None)
    bound = 2.0 * delta / (1.0 - 2.0 * mu_c)
    excess = observed_error - (bound + tol)
    return Certificate(True, bound, excess <= 0, max(0.0, excess))


# --------------------------------------------------------------------------
# decay profiles


def _envelope(values, width=8):
    out = np.empty_like(values)
    for i in range(values.size):
        out[i] = np.max(values[i:i + width])
    return out


def coefficient_decay_profile(f, sys: DigitalSystem, width: int = 8):
    """Per-band maxima of ``|coefficient|`` against shear and tube distance.

    Returns a list of dicts with keys ``j, l, iota, tube_distance, max_abs,
    envelope``.  The tube distance is the lattice index along x2
    (``|k2 - l k1|`` for vertical-cone bands).  ``envelope`` is the running
    maximum over ``width`` consecutive distances.
    """
    lt = lattice_transform(sys)
    a = np.abs(lt.analyze(f))
    rows = []
    for i, d in enumerate(lt.data):
        b = d.band
        m1, m2, _, _ = lt.positions(i)
        vals = a[lt.band_slice(i)].reshape(d.P)
        dist = np.abs(m2)
        dmax = int(dist.max())
        prof = np.array([vals[dist == t].max() if np.any(dist == t) else 0.0 for t in range(dmax + 1)])
        env = _envelope(prof, width)
        for t in range(dmax + 1):
            rows.append({"j": b.j, "l": b.l, "iota": b.iota, "tube_distance": t, "max_abs": float(prof[t]), "envelope": float(env[t])})
    return rows


def shear_profile(f, sys: DigitalSystem, iota="v"):
    """``{(j, |l|): max |coefficient|}`` over bands of one orientation."""
    lt = lattice_transform(sys)
    a = np.abs(lt.analyze(f))
    out = {}
    for i, d in enumerate(lt.data):
        b = d.band
        if b.iota != iota:
            continue
        key = (b.j, abs(b.l))
        out[key] = max(out.get(key, 0.0), float(np.max(a[lt.band_slice(i)], initial=0.0)))
    return out


DIAG_COLUMNS = ["j", "epsilon", "h", "delta_j", "mu_c", "bound", "observed_error", "truncation_flags"]


def write_diagnostics_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAG_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in DIAG_COLUMNS])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)
