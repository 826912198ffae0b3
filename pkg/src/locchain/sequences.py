"""On-site energy sequences.

Deterministic variants (base, mod-6, mod-3, period-doubling) are returned as
dimensionless ``eps_n / h``.  The random variant is returned in units of the
hopping integral ``J`` because its bandwidth ``W`` is quoted against ``J``;
:attr:`SequenceSpec.units` tells the two apart.

Random draws come from a counter-based Philox stream keyed by ``(seed,
stream)``: the value at site ``n`` is the ``n``-th draw of that stream, so it
does not depend on which other sites are evaluated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Optional

import numpy as np


class SequenceError(ValueError):
    """Invalid sequence parameters or site indices."""


class ConsistencyError(RuntimeError):
    """An internal identity that must hold for the base sequence failed."""


class Variant(str, Enum):
    BASE = "base"
    MOD6 = "mod6"
    MOD3 = "mod3"
    PDC = "pdc"
    RANDOM = "random"
    PERTURBED = "perturbed"


# Philox stream tags, one per consumer of random numbers
_STREAM_RANDOM = 1
_STREAM_PERTURB = 2

# terms alpha**(k-1) below this are under double round-off of an O(1) sum
_TAIL_EPS = 1e-18


@dataclass(frozen=True)
class SequenceSpec:
    """Declarative description of an on-site energy sequence."""

    variant: Variant
    alpha: Optional[float] = None
    alpha_prime: Optional[float] = None
    beta: Optional[float] = None
    bandwidth_w: Optional[float] = None
    noise_d: Optional[float] = None
    seed: Optional[int] = None
    base: Optional["SequenceSpec"] = None
    max_order: Optional[int] = None  # drop alpha**q terms with q > max_order

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        v = self.variant
        if v in (Variant.BASE, Variant.MOD6, Variant.MOD3, Variant.PDC):
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise SequenceError(f"{v.value}: alpha must lie in (0, 1), got {self.alpha}")
        if v is Variant.MOD6 and (self.alpha_prime is None or self.alpha_prime <= 0):
            raise SequenceError("mod6: alpha_prime must be > 0")
        if v is Variant.MOD3 and (self.beta is None or self.beta <= 0):
            raise SequenceError("mod3: beta must be > 0")
        if v is Variant.RANDOM:
            if self.bandwidth_w is None or self.bandwidth_w <= 0:
                raise SequenceError("random: bandwidth W must be > 0")
            if self.seed is None:
                raise SequenceError("random: seed is required")
        if v is Variant.PERTURBED:
            if self.base is None or self.base.variant in (Variant.RANDOM, Variant.PERTURBED):
                raise SequenceError("perturbed: base must be a deterministic sequence")
            if self.noise_d is None or self.noise_d < 0:
                raise SequenceError("perturbed: D must be >= 0")
            if self.seed is None:
                raise SequenceError("perturbed: seed is required")
        if self.max_order is not None and self.max_order < 0:
            raise SequenceError("max_order must be >= 0")

    @property
    def units(self):
        return "J" if self.variant is Variant.RANDOM else "h"

    @property
    def param_alpha(self):
        return self.base.alpha if self.variant is Variant.PERTURBED else self.alpha

    def with_alpha(self, alpha):
        """Copy with a new alpha (propagated into a perturbed base)."""
        from dataclasses import replace

        if self.variant is Variant.PERTURBED:
            return replace(self, base=replace(self.base, alpha=alpha))
        return replace(self, alpha=alpha)

    def energies(self, n):
        return energy(self, n)

    def to_dict(self):
        d = {"variant": self.variant.value}
        for key in ("alpha", "alpha_prime", "beta", "bandwidth_w", "noise_d", "seed", "max_order"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        if self.base is not None:
            d["base"] = self.base.to_dict()
        return d


def base(alpha, **kw):
    return SequenceSpec(Variant.BASE, alpha=alpha, **kw)


def mod6(alpha, alpha_prime, **kw):
    return SequenceSpec(Variant.MOD6, alpha=alpha, alpha_prime=alpha_prime, **kw)


def mod3(alpha, beta, **kw):
    return SequenceSpec(Variant.MOD3, alpha=alpha, beta=beta, **kw)


def pdc(alpha):
    return SequenceSpec(Variant.PDC, alpha=alpha)


def random_sequence(W, seed):
    """Uniform random energies ``W * r`` with ``r`` in (0, 1), units of J."""
    return SequenceSpec(Variant.RANDOM, bandwidth_w=W, seed=int(seed))


def perturb(spec, D, seed):
    """Add ``(D/2) * r_n`` (``r_n`` uniform on (-1, 1)) to every ``eps_n / h``."""
    return SequenceSpec(Variant.PERTURBED, base=spec, noise_d=D, seed=int(seed))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _sites(n):
    arr = np.asarray(n)
    if arr.dtype.kind not in "iu":
        if not np.all(np.mod(arr, 1) == 0):
            raise SequenceError("site indices must be integers")
        arr = arr.astype(np.int64)
    if np.any(arr < 1):
        raise SequenceError("site index must be >= 1")
    return arr.astype(np.int64)


def uniform_stream(seed, stream, n):
    """Uniform (0, 1) numbers for sites ``n`` from the ``(seed, stream)`` Philox stream."""
    n = _sites(n)
    if n.size == 0:
        return np.zeros(n.shape)
    key = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF, stream], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    draws = gen.random(int(n.max()))
    u = draws[n - 1]
    # Generator.random is [0, 1); map an exact 0 inside the open interval
    return np.where(u == 0.0, 0.5 / 2**53, u)


def _base_poly_sum(n, alpha, max_order):
    """``(-1)^n - sum_{k=2}^{n+1} (-1)^floor(n/k) alpha^(k-1)``, i.e. ``2 eps_n / h``."""
    n = n.ravel()
    out = np.where(n % 2 == 0, 1.0, -1.0)
    kmax = int(n.max()) + 1
    if alpha > 0:
        kmax = min(kmax, 2 + int(math.ceil(math.log(_TAIL_EPS) / math.log(alpha))))
    if max_order is not None:
        kmax = min(kmax, max_order + 1)
    for k in range(2, kmax + 1):
        sign = np.where((n // k) % 2 == 0, 1.0, -1.0)
        out = out - np.where(k <= n + 1, sign, 0.0) * alpha ** (k - 1)
    return out


def _pdc_sum(n, alpha, max_order):
    n = n.ravel()
    out = np.where(n % 2 == 0, 1.0, -1.0)
    nbits = int(n.max()).bit_length()
    top = nbits - 1 if max_order is None else min(nbits - 1, max_order)
    for k in range(1, top + 1):
        digit = (n >> k) & 1
        present = (n >> k) > 0  # k <= M(n) - 1
        out = out + np.where(present, np.where(digit == 0, 1.0, -1.0), 0.0) * alpha**k
    return out


def energy(spec, n):
    """Site energy for site(s) ``n >= 1``: ``eps_n / h`` (or ``eps_n / J`` for random)."""
    sites = _sites(n)
    shape = sites.shape
    flat = sites.ravel()
    if flat.size == 0:
        return np.zeros(shape)
    v = spec.variant
    if v is Variant.PERTURBED:
        clean = energy(spec.base, flat)
        r = 2.0 * uniform_stream(spec.seed, _STREAM_PERTURB, flat) - 1.0
        out = clean + 0.5 * spec.noise_d * r
    elif v is Variant.RANDOM:
        out = spec.bandwidth_w * uniform_stream(spec.seed, _STREAM_RANDOM, flat)
    elif v is Variant.PDC:
        out = 0.5 * _pdc_sum(flat, spec.alpha, spec.max_order)
    else:
        out = 0.5 * _base_poly_sum(flat, spec.alpha, spec.max_order)
        if v is Variant.MOD6:
            out = out + np.where(flat % 6 == 0, 0.5 * spec.alpha_prime, 0.0)
        elif v is Variant.MOD3:
            k = flat // 3
            shift = -(spec.beta / 4.0) * (1.0 + 3.0 * np.where(k % 2 == 0, 1.0, -1.0))
            out = out + np.where(flat % 3 == 0, shift, 0.0)
    out = out.reshape(shape)
    return out if shape else float(out)


def section(spec, n0, length):
    """Energies of the chain section ``n0 .. n0 + length - 1``."""
    if n0 < 1 or length < 1:
        raise SequenceError("section needs n0 >= 1 and length >= 1")
    return energy(spec, np.arange(n0, n0 + length))


# ---------------------------------------------------------------------------
# exact polynomial form of the base sequence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlphaPolynomial:
    """Integer polynomial in alpha; ``coeffs[k]`` multiplies ``alpha**k``."""

    coeffs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    @property
    def degree(self):
        for k in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[k]:
                return k
        return -1

    def __sub__(self, other):
        size = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (size - len(self.coeffs))
        b = other.coeffs + (0,) * (size - len(other.coeffs))
        return AlphaPolynomial(tuple(x - y for x, y in zip(a, b)))

    def __call__(self, alpha):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * alpha + c
        return acc

    def to_list(self):
        return list(self.coeffs)


def base_coefficient(n, q):
    """``[2 eps_n / h]_q`` for the base sequence (vectorised over ``n``)."""
    n = np.asarray(n, dtype=np.int64)
    if q == 0:
        return np.where(n % 2 == 0, 1, -1)
    val = np.where((n // (q + 1)) % 2 == 0, -1, 1)
    return np.where(q <= n, val, 0)


def alpha_polynomial(n):
    """Exact coefficients of ``2 eps_n / h`` for the base sequence."""
    if n < 1:
        raise SequenceError("site index must be >= 1")
    coeffs = [1 if n % 2 == 0 else -1]
    coeffs += [-1 if (n // k) % 2 == 0 else 1 for k in range(2, n + 2)]
    return AlphaPolynomial(tuple(coeffs))


def coefficient_period(q, n_max):
    """Period ``2(q+1)`` of ``[eps_n]_q`` in ``n``, confirmed by scanning ``n <= n_max``.

    Only sites with ``n >= q`` are compared; below that the coefficient has
    not switched on yet.
    """
    if q < 0:
        raise SequenceError("q must be >= 0")
    period = 2 * (q + 1)
    if n_max < 4 * (q + 1):
        raise SequenceError(f"n_max must be >= {4 * (q + 1)} to see two periods")
    n = np.arange(max(q, 1), n_max + 1)
    bad = np.flatnonzero(base_coefficient(n, q) != base_coefficient(n + period, q))
    if bad.size:
        raise ConsistencyError(f"period {period} of alpha^{q} breaks at n={int(n[bad[0]])}")
    return period


def joint_period(q_max):
    """Period of the whole coefficient set up to ``alpha**q_max``: ``2 LCM(2..q_max+1)``."""
    return 2 * reduce(math.lcm, range(1, q_max + 2), 1)
