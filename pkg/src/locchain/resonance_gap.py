"""Two-particle transition families and the zero-energy gap in their detuning.

Each family pairs an initial register ``(a, b)`` with a final register
``(c, d)``, given as offsets from a label site ``n``.  The lists mirror the
second-order block and the two fourth-order blocks (interaction change up to
``J Delta`` and up to ``2 J Delta``); :func:`locchain.many_particle.kappa`
is kept as an independent audit of each entry.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .many_particle import kappa
from .sequences import SequenceSpec, Variant, energy, perturb

DEFAULT_N_RANGE = (3, 842)
# sites 1 and 2 carry truncated polynomials and are left out of gap statistics
DEFAULT_MIN_SITE = 3

# (name, initial offsets, final offsets, interaction class M: |dE_int| <= M J Delta)
FAMILIES = (
    ("k2_move+2", (0, 1), (0, 3), 1),
    ("k2_move-2", (0, 1), (-1, 0), 1),
    ("k2_left-2", (0, 1), (-2, 1), 1),
    ("k2_split", (0, 1), (-1, 2), 1),
    ("k4_split3", (0, 1), (-2, 3), 1),
    ("k4_shift2", (0, 1), (2, 3), 1),
    ("k4_close_in", (0, 3), (-1, 2), 1),
    ("k4_shift_left", (0, 3), (-2, 1), 1),
    ("k4_split_right", (0, 1), (-1, 4), 2),
    ("k4_split_left", (0, 1), (-3, 2), 2),
    ("k4_move+4", (0, 1), (0, 5), 2),
    ("k4_move-4", (0, 1), (-3, 0), 2),
    ("k4_left+4", (0, 1), (1, 4), 2),
    ("k4_left-4", (0, 1), (-4, 1), 2),
)


@dataclass(frozen=True)
class TransitionRecord:
    """``(k4, k3) <-> (k1, k2)`` with ``k4 < k3`` initial and ``k1 < k2`` final."""

    n: int
    family: str
    k1: int
    k2: int
    k3: int
    k4: int
    kappa: int
    energy_class: int
    delta_eps_over_h: Optional[float] = None

    @property
    def sites(self):
        return (self.k1, self.k2, self.k3, self.k4)


def enumerate_families(n_min, n_max, min_site=DEFAULT_MIN_SITE):
    """All family instances with label ``n`` in ``[n_min, n_max]``.

    Instances touching a site below ``min_site`` are skipped; returns
    ``(records, n_skipped)``.
    """
    records = []
    skipped = 0
    for n in range(n_min, n_max + 1):
        for name, ini, fin, cls in FAMILIES:
            i_lo, i_hi = n + ini[0], n + ini[1]
            f_lo, f_hi = n + fin[0], n + fin[1]
            if min(i_lo, f_lo) < min_site:
                skipped += 1
                continue
            k = kappa(f_lo, f_hi, i_hi, i_lo)
            records.append(TransitionRecord(n, name, f_lo, f_hi, i_hi, i_lo, k, cls))
    return records, skipped


def _site_array(records):
    return np.array([r.sites for r in records], dtype=np.int64).reshape(-1, 4)


def delta_eps_array(eps_lookup, sites):
    """``|eps_k1 + eps_k2 - eps_k3 - eps_k4|`` for rows of ``sites`` (any units)."""
    e = eps_lookup[sites]
    return np.abs(e[:, 0] + e[:, 1] - e[:, 2] - e[:, 3])


def _lookup(spec, top):
    eps = np.zeros(top + 1)
    eps[1:] = energy(spec, np.arange(1, top + 1))
    return eps


def delta_eps(spec, record):
    """Bare on-site detuning ``|delta eps| / h`` of one transition."""
    e = energy(spec, np.array(record.sites))
    return float(abs(e[0] + e[1] - e[2] - e[3]))


@dataclass
class GapReport:
    spec: SequenceSpec
    n_range: tuple
    records: list
    min_gap_over_h: float
    argmin: TransitionRecord
    min_by_class: dict = field(default_factory=dict)
    skipped: int = 0


def min_gap(spec, n_range=DEFAULT_N_RANGE, min_site=DEFAULT_MIN_SITE, records=None):
    """Smallest detuning over every family instance in range (ties go to smallest ``n``)."""
    if records is None:
        records, skipped = enumerate_families(n_range[0], n_range[1], min_site)
    else:
        skipped = 0
    sites = _site_array(records)
    d = delta_eps_array(_lookup(spec, int(sites.max())), sites)
    records = [
        TransitionRecord(r.n, r.family, r.k1, r.k2, r.k3, r.k4, r.kappa, r.energy_class, float(v))
        for r, v in zip(records, d)
    ]
    i = int(np.argmin(d))  # first minimum = smallest n by construction order
    classes = np.array([r.energy_class for r in records])
    by_class = {int(c): float(d[classes == c].min()) for c in np.unique(classes)}
    return GapReport(spec, tuple(n_range), records, float(d[i]), records[i], by_class, skipped)


def gap_ratio(spec_md, D, seeds, n_range=DEFAULT_N_RANGE, min_site=DEFAULT_MIN_SITE):
    """Noisy-to-clean ratio ``R`` of the minimal gap, one value per seed."""
    records, _ = enumerate_families(n_range[0], n_range[1], min_site)
    sites = _site_array(records)
    top = int(sites.max())
    clean = delta_eps_array(_lookup(spec_md, top), sites).min()
    ratios = []
    for s in seeds:
        noisy = delta_eps_array(_lookup(perturb(spec_md, D, s), top), sites).min()
        ratios.append(noisy / clean)
    ratios = np.array(ratios)
    return {"R": ratios, "mean": float(ratios.mean()), "std": float(ratios.std(ddof=1)) if ratios.size > 1 else 0.0}


def broadband_scan(spec, n_max, threshold, n_min=2):
    """Sites where ``(n, n+1) <-> (n-1, n+2)`` is detuned by less than ``threshold``.

    Returns a list of ``(n, delta_eps/h, n % 6 == 5)``.
    """
    if n_max < 12:
        raise ValueError("n_max must be >= 12")
    n = np.arange(max(n_min, 2), n_max + 1)
    eps = _lookup(spec, n_max + 2)
    d = np.abs(eps[n] + eps[n + 1] - eps[n - 1] - eps[n + 2])
    hit = np.flatnonzero(d < threshold)
    return [(int(n[i]), float(d[i]), bool(n[i] % 6 == 5)) for i in hit]


def new_resonance_audit(spec_md, floor=None, warn=True):
    """Leading-order coincidences between alpha-terms and the site shifts.

    Compares ``alpha, 2 alpha, alpha^2, 2 alpha^2`` with each shift the
    modification introduces (``alpha'/2`` for mod-6; ``beta/2`` and ``beta``
    for mod-3) against ``floor`` (default ``alpha^3``).  Returns a list of
    ``(label, value, ok)``; offenders also raise a ``UserWarning``.
    """
    a = spec_md.param_alpha
    floor = a**3 if floor is None else floor
    terms = {"alpha": a, "2alpha": 2 * a, "alpha^2": a * a, "2alpha^2": 2 * a * a}
    v = spec_md.variant if spec_md.variant is not Variant.PERTURBED else spec_md.base.variant
    inner = spec_md.base if spec_md.variant is Variant.PERTURBED else spec_md
    if v is Variant.MOD6:
        shifts = {"alpha'/2": inner.alpha_prime / 2}
    elif v is Variant.MOD3:
        shifts = {"beta/2": inner.beta / 2, "beta": inner.beta}
    else:
        raise ValueError("audit needs a mod6 or mod3 sequence")
    rows = []
    for tname, tv in terms.items():
        for sname, sv in shifts.items():
            val = abs(tv - sv)
            rows.append((f"|{tname} - {sname}|", val, val > floor))
    bad = [r for r in rows if not r[2]]
    if bad and warn:
        listing = ", ".join(f"{lab}={val:.4g}" for lab, val, _ in bad)
        warnings.warn(f"combinations below floor {floor:.4g}: {listing}", UserWarning, stacklevel=2)
    return rows
