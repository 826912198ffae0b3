"""Return amplitude of an on-site register under the sector Hamiltonian.

``A(t) = sum_l |<Phi|psi_l>|^2 exp(-i E_l t)`` is evaluated from the full
eigendecomposition, so arbitrary times cost the same and carry no
step-size error.  Time is in units of ``1/J``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .many_particle import build_basis, diagonalize, register_to_mask
from .sequences import SequenceError
from .single_particle import ChainConfig

POINTS_PER_DECADE = 400


@dataclass
class EvolutionTrace:
    times: np.ndarray
    amp_sq: np.ndarray
    state: tuple
    config: ChainConfig
    n_particles: int

    def min_before(self, t_max):
        sel = self.times <= t_max
        return float(self.amp_sq[sel].min())


def log_times(t_max, t_min=1e-2, points_per_decade=POINTS_PER_DECADE, include_zero=True):
    decades = np.log10(t_max) - np.log10(t_min)
    t = np.logspace(np.log10(t_min), np.log10(t_max), max(2, int(round(decades * points_per_decade)) + 1))
    return np.concatenate(([0.0], t)) if include_zero else t


def register_weights(config, register, spectrum=None):
    """Overlaps ``|<Phi|psi_l>|^2`` and energies for a register."""
    register = tuple(sorted(int(s) for s in register))
    lo, hi = config.n0, config.n0 + config.length_l - 1
    if not register or register[0] < lo or register[-1] > hi or len(set(register)) != len(register):
        raise SequenceError(f"register {register} must be distinct sites inside [{lo}, {hi}]")
    if spectrum is None:
        basis = build_basis(config.length_l, len(register))
        spectrum = diagonalize(config, basis)
    idx = spectrum.basis.index(register_to_mask(register, config.n0))
    return np.abs(spectrum.vectors[idx]) ** 2, spectrum.energies


def evolve_amplitude(config, register, times, spectrum=None):
    """``|A(t)|^2`` on ``times`` for the register (absolute site labels)."""
    weights, energies = register_weights(config, register, spectrum)
    times = np.asarray(times, dtype=float)
    amp = kernels.survival_probability(weights, energies, times)
    return EvolutionTrace(times, np.minimum(amp, 1.0), tuple(sorted(register)), config, len(register))


def lifetime_estimate(config, register, threshold=0.9, t_max=1e6, points_per_decade=POINTS_PER_DECADE,
                      spectrum=None) -> Optional[float]:
    """First sampled time with ``|A|^2 < threshold``; ``None`` if it never drops before ``t_max``."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    trace = evolve_amplitude(config, register, log_times(t_max, points_per_decade=points_per_decade), spectrum)
    below = np.flatnonzero(trace.amp_sq < threshold)
    return float(trace.times[below[0]]) if below.size else None


def lifetime_reference(j_over_h, alpha, delta, order=6):
    """Order-of-magnitude lifetime ``(J Delta)^-1 K^-order / alpha`` with ``K = J / 2 alpha h``.

    Reference overlay only; not a prediction for any particular register.
    """
    k = j_over_h / (2.0 * alpha)
    return 1.0 / (delta * k**order * alpha)
