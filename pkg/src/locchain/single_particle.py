"""One excitation on an open chain section: assembly, spectra and IPR studies.

Energies are in units of the hopping integral ``J``; the tight-binding
matrix has diagonal ``(h/J) eps_n/h`` and off-diagonal ``1/2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.optimize import brentq, minimize_scalar

from . import kernels
from .sequences import SequenceError, SequenceSpec, Variant, section

NORM_TOL = 1e-8
DEGENERACY_RTOL = 1e-10
DOMINANCE = 0.5


class LocalizationError(RuntimeError):
    """Eigenvectors have no dominant site; not in the strong-localization regime."""


@dataclass(frozen=True)
class ChainConfig:
    spec: SequenceSpec
    n0: int = 1
    length_l: int = 12
    h_over_j: float = 20.0
    delta: float = 0.0

    def __post_init__(self):
        if self.length_l < 2:
            raise SequenceError("chain needs at least 2 sites")
        if self.n0 < 1:
            raise SequenceError("first site n0 must be >= 1")
        if self.h_over_j <= 0:
            raise SequenceError("h/J must be > 0")

    @property
    def sites(self):
        return np.arange(self.n0, self.n0 + self.length_l)

    def onsite(self):
        """On-site energies in units of J."""
        eps = section(self.spec, self.n0, self.length_l)
        if self.spec.units == "J":
            return eps
        return self.h_over_j * eps

    def with_alpha(self, alpha):
        return replace(self, spec=self.spec.with_alpha(alpha))

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "n0": self.n0,
            "L": self.length_l,
            "h_over_j": self.h_over_j,
            "delta": self.delta,
        }


@dataclass
class SpectrumResult:
    """Ascending eigenvalues (units of J) with orthonormal eigenvector columns."""

    energies: np.ndarray
    vectors: np.ndarray
    config: Optional[ChainConfig] = None
    degenerate: np.ndarray = field(default=None)
    basis: object = None

    def __post_init__(self):
        if self.degenerate is None:
            self.degenerate = degeneracy_flags(self.energies)

    @property
    def iprs(self):
        return kernels.ipr_columns(self.vectors)


def degeneracy_flags(energies, rtol=DEGENERACY_RTOL):
    """True for eigenvalues within ``rtol * max|E|`` of a neighbour."""
    e = np.asarray(energies)
    flags = np.zeros(e.size, dtype=bool)
    if e.size < 2:
        return flags
    scale = max(np.max(np.abs(e)), 1.0)
    close = np.diff(e) < rtol * scale
    flags[:-1] |= close
    flags[1:] |= close
    return flags


def build_h0(config):
    """Dense symmetric tridiagonal single-particle Hamiltonian, units of J."""
    d = config.onsite()
    return np.diag(d) + np.diag(np.full(d.size - 1, 0.5), 1) + np.diag(np.full(d.size - 1, 0.5), -1)


def diagonalize(config):
    d = config.onsite()
    e = np.full(d.size - 1, 0.5)
    try:
        energies, vectors = scipy.linalg.eigh_tridiagonal(d, e)
    except np.linalg.LinAlgError:
        # stemr can fail on near-degenerate pairs at tiny alpha; QL/QR does not
        energies, vectors = scipy.linalg.eigh_tridiagonal(d, e, lapack_driver="stev")
    return SpectrumResult(energies, vectors, config)


def ipr(amplitudes):
    """Inverse participation ratio ``1 / sum |c|^4`` of a normalised vector."""
    c = np.asarray(amplitudes)
    p = np.abs(c) ** 2
    if abs(p.sum() - 1.0) > NORM_TOL:
        raise ValueError(f"vector not normalised (norm^2 = {p.sum():.3e})")
    return float(1.0 / np.sum(p * p))


def dominant_sites(vectors):
    """Index of the largest-weight component of each column."""
    return np.argmax(np.abs(vectors), axis=0)


def ipr_stats(spectrum, exclude_degenerate=False):
    """Mean and max IPR over eigenstates plus the maximiser.

    Returns a dict with ``mean``, ``max``, ``argmax`` (eigen-index) and
    ``argmax_site`` (absolute site carrying the largest weight in that state).
    """
    iprs = spectrum.iprs
    mask = ~spectrum.degenerate if exclude_degenerate else np.ones(iprs.size, dtype=bool)
    vals = iprs[mask]
    idx = np.flatnonzero(mask)[int(np.argmax(vals))]
    n0 = spectrum.config.n0 if spectrum.config is not None else 1
    site = int(dominant_sites(spectrum.vectors[:, [idx]])[0]) + n0
    return {"mean": float(vals.mean()), "max": float(vals.max()), "argmax": int(idx), "argmax_site": site}


def ipr_curve(config, alphas):
    """``<I_1>`` and ``I_1max`` over an alpha grid; rows are (mean, max, argmax_site)."""
    out = np.empty((len(alphas), 3))
    for i, a in enumerate(alphas):
        st = ipr_stats(diagonalize(config.with_alpha(float(a))))
        out[i] = st["mean"], st["max"], st["argmax_site"]
    return out


def mean_ipr(config, alpha):
    return float(np.mean(diagonalize(config.with_alpha(alpha)).iprs))


# ---------------------------------------------------------------------------
# renormalised energies
# ---------------------------------------------------------------------------

def site_ordered(spectrum):
    """Eigen-data reordered so that column ``j`` is the state dominated by site ``j``.

    Each column is sign-fixed so its dominant component is positive.
    Raises :class:`LocalizationError` unless every state has one site with
    weight above one half.
    """
    v = spectrum.vectors
    dom = dominant_sites(v)
    weight = np.abs(v[dom, np.arange(v.shape[1])]) ** 2
    if np.any(weight <= DOMINANCE) or np.unique(dom).size != dom.size:
        raise LocalizationError("not in strong-localization regime: no dominant site for some eigenvector")
    order = np.argsort(dom)
    u = v[:, order] * np.sign(v[dom[order], order])
    return spectrum.energies[order], u


def renormalized_energies(spectrum):
    """Exact single-particle energies ``eps'_n`` indexed by chain site (units of J)."""
    energies, _ = site_ordered(spectrum)
    return energies


def renormalization_leading_order(config):
    """Second-order hopping shift ``eps'_n - eps_n`` in units of J.

    Bulk sites use ``(J^2/2h)[(-1)^n + (1/2)(-1)^floor(n/2) alpha]``; the two
    end sites have a single neighbour and get half the ``(-1)^n`` term.
    """
    n = config.sites
    alpha = config.spec.param_alpha or 0.0
    j_over_h = 1.0 / config.h_over_j
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    shift = 0.5 * j_over_h * (sign + 0.5 * np.where((n // 2) % 2 == 0, 1.0, -1.0) * alpha)
    shift[0] = 0.25 * j_over_h * sign[0]
    shift[-1] = 0.25 * j_over_h * sign[-1]
    return shift


# ---------------------------------------------------------------------------
# boundary resonance
# ---------------------------------------------------------------------------

@dataclass
class BoundaryResonance:
    alpha: float
    peak: float
    sites: tuple
    width: float
    grid: np.ndarray
    max_ipr: np.ndarray


def _max_ipr(config, alpha):
    return float(np.max(diagonalize(config.with_alpha(alpha)).iprs))


def boundary_resonance_scan(config, alphas, threshold=1.5, refine=True):
    """Locate the peak of ``I_1max(alpha)`` and the site pair it hybridises.

    The grid is refined around the best point by bounded scalar maximisation.
    Returns ``None`` when nothing exceeds ``threshold`` (no resonance in grid).
    The width is the full width at half height of ``I_1max - 1`` measured on
    a local grid.
    """
    alphas = np.asarray(alphas, dtype=float)
    curve = np.array([_max_ipr(config, a) for a in alphas])
    i = int(np.argmax(curve))
    a_best, peak = float(alphas[i]), float(curve[i])
    if refine and alphas.size > 1:
        step = float(np.min(np.diff(alphas)))
        lo, hi = max(a_best - step, alphas[0]), min(a_best + step, alphas[-1])
        res = minimize_scalar(lambda a: -_max_ipr(config, a), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-9})
        if -res.fun > peak:
            a_best, peak = float(res.x), float(-res.fun)
    if peak <= threshold:
        return None
    spec = diagonalize(config.with_alpha(a_best))
    k = int(np.argmax(spec.iprs))
    top = np.argsort(np.abs(spec.vectors[:, k]))[::-1][:2]
    sites = tuple(sorted(int(s) + config.n0 for s in top))
    width = _peak_width(config, a_best, peak)
    return BoundaryResonance(a_best, peak, sites, width, alphas, curve)


def _peak_width(config, a0, peak, span=None, points=81):
    half = 1.0 + 0.5 * (peak - 1.0)
    span = span or max(1e-6, 1e-2 * a0)
    for _ in range(8):
        grid = np.linspace(a0 - span, a0 + span, points)
        vals = np.array([_max_ipr(config, a) for a in grid])
        above = grid[vals >= half]
        if above.size and above[0] > grid[0] and above[-1] < grid[-1]:
            if above.size >= 5:
                return float(above[-1] - above[0])
            span /= 4
            continue
        span *= 2
    return float("nan")


# ---------------------------------------------------------------------------
# alpha at fixed mean IPR
# ---------------------------------------------------------------------------

def alpha_at_fixed_ipr(target, h_over_j, length_l, alpha_max=0.4, alpha_min=1e-7,
                       points=400, spec=None, n0=1):
    """All roots of ``<I_1>(alpha) = target`` on ``(alpha_min, alpha_max)``.

    The mean IPR is scanned on a log-spaced grid; every sign change is then
    polished with Brent's method.  Several close roots can come back when
    ``<I_1>`` oscillates (returned sorted ascending).
    """
    if spec is None:
        spec = SequenceSpec(Variant.BASE, alpha=0.1)
    cfg = ChainConfig(spec, n0=n0, length_l=length_l, h_over_j=h_over_j)
    if not 1.0 <= target <= (length_l + 2) / 3.0 + 1e-9:
        raise ValueError(f"target {target} outside attainable range [1, (L+2)/3]")
    grid = np.geomspace(alpha_min, alpha_max, points)
    vals = np.array([mean_ipr(cfg, a) for a in grid]) - target
    roots = []
    for i in np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:])):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
            continue
        roots.append(brentq(lambda a: mean_ipr(cfg, a) - target, grid[i], grid[i + 1], xtol=1e-12, rtol=1e-10))
    if not roots:
        raise ValueError(f"target {target} not attained for h/J={h_over_j}, L={length_l}")
    return sorted(roots)
