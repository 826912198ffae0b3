"""Exact orders in alpha of base-sequence energy differences.

``lowdeg`` of ``eps_{n+s} - eps_n`` is the first power of alpha whose
coefficients differ.  Summed over ``s = 1..m`` it gives the order of the
hopping product ``Q_n(m)``, from which the decay exponent ``nu`` and the
counting function ``h(i)`` follow.  Everything here is integer arithmetic;
only :func:`transition_amplitude_log` touches floats.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .sequences import AlphaPolynomial, SequenceError, base_coefficient

DEFAULT_I_MAX = 16


class DegenerateDifference(ArithmeticError):
    """Two on-site energies coincide identically as polynomials in alpha."""


def lowdeg(p: AlphaPolynomial) -> int:
    """Multiplicity of the root alpha = 0 (index of the first nonzero coefficient)."""
    for k, c in enumerate(p.coeffs):
        if c:
            return k
    raise DegenerateDifference("degenerate difference: polynomial is identically zero")


def _offsets(m):
    if m == 0:
        raise SequenceError("distance m must be nonzero")
    return np.arange(1, m + 1) if m > 0 else -np.arange(1, -m + 1)


def difference_orders(n, m):
    """``lowdeg(eps_{n+s} - eps_n)`` for ``s = 1..m`` (``s = -1..m`` when ``m < 0``)."""
    if n < 1:
        raise SequenceError("n must be >= 1")
    s = _offsets(m)
    if n + s.min() < 1:
        raise SequenceError(f"sites must stay >= 1 (n + m = {n + m})")
    orders = kernels.lowdeg_pairs(n + s, np.full(s.shape, n))
    if np.any(orders < 0):
        raise DegenerateDifference(f"degenerate difference for n={n}")
    return orders


def q_lowdeg(n: int, m: int) -> int:
    """``lowdeg Q_n(m) = sum_s lowdeg(eps_{n+s} - eps_n)``."""
    if m < 1:
        raise SequenceError("m must be >= 1")
    return int(difference_orders(n, m).sum())


def nu(n: int, m: int) -> Fraction:
    """Decay exponent ``lowdeg Q_n(m) / m`` as an exact fraction."""
    return Fraction(q_lowdeg(n, m), m)


def h_counts(n: int, m: int, i_max: int = DEFAULT_I_MAX) -> np.ndarray:
    """``h(i) = #{s in 1..m : lowdeg(eps_{n+s} - eps_n) > i}`` for ``i = 0..i_max``.

    Orders never exceed ``n + 1``, so ``h(i) = 0`` for ``i > n``.
    """
    if i_max < 0:
        raise SequenceError("i_max must be >= 0")
    orders = difference_orders(n, m)
    counts = np.bincount(orders, minlength=i_max + 2)
    # h(i) = number of orders strictly above i
    above = counts[::-1].cumsum()[::-1]
    return above[1:i_max + 2].astype(np.int64)


@dataclass(frozen=True)
class LowdegProfile:
    n: int
    m: int
    lowdeg_q: int
    nu: Fraction
    h_counts: np.ndarray

    @property
    def nu_float(self):
        return float(self.nu)

    def reconstructs(self):
        """Whether ``sum_i h(i)`` equals ``lowdeg_q`` (needs ``i_max >= n``)."""
        return int(self.h_counts.sum()) == self.lowdeg_q


def profile(n, m, i_max=None):
    if i_max is None:
        i_max = max(DEFAULT_I_MAX, n)
    q = q_lowdeg(n, m)
    return LowdegProfile(n=n, m=m, lowdeg_q=q, nu=Fraction(q, m), h_counts=h_counts(n, m, i_max))


def difference_value(a, b, alpha, orders=None):
    """``(eps_a - eps_b) / h`` for the base sequence without cancellation.

    Summation starts at the first differing power, so tiny differences keep
    full relative precision.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
    if orders is None:
        orders = kernels.lowdeg_pairs(a, b)
    if np.any(orders < 0):
        raise DegenerateDifference("degenerate difference")
    # terms beyond this relative depth are below double round-off
    depth = int(np.ceil(np.log(1e-18) / np.log(alpha))) + 1
    top = int(min(orders.max() + depth, max(a.max(), b.max())))
    total = np.zeros(a.shape)
    for q in range(int(orders.min()), top + 1):
        d = base_coefficient(a, q) - base_coefficient(b, q)
        live = (q >= orders) & (q <= orders + depth)
        total += np.where(live, d, 0) * alpha**q
    return 0.5 * total


def transition_amplitude_log(n, m, j_over_h, alpha, mode="exact"):
    """Natural log of ``K_n(m) = prod_k J / (2 |eps_n - eps_{n+k}|)``.

    ``mode="leading_term"`` replaces each ``|eps_n - eps_{n+k}| / h`` by its
    leading power ``alpha**lowdeg`` (difference coefficients are +-2, halved
    by the ``h/2`` prefactor).  Negative ``m`` walks toward smaller sites.
    """
    if j_over_h <= 0:
        raise SequenceError("J/h must be > 0")
    if not 0.0 < alpha < 1.0:
        raise SequenceError("alpha must lie in (0, 1)")
    orders = difference_orders(n, m)
    steps = abs(m)
    if mode == "leading_term":
        log_gap = orders * np.log(alpha)
    elif mode == "exact":
        s = _offsets(m)
        gap = np.abs(difference_value(n + s, n, alpha, orders))
        log_gap = np.log(gap)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return steps * np.log(0.5 * j_over_h) - float(np.sum(log_gap))
