"""Fixed-particle-number sectors of the interacting fermion chain.

Occupation masks use bit ``j`` for chain site ``n0 + j``.  Nearest-neighbour
hops never pass another fermion, so every hopping element is ``+1/2`` in
units of J.  Registers in the public API are lists of absolute site labels,
as in ``|Phi(k1, ..., kN)>``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from . import kernels
from .sequences import SequenceError
from .single_particle import ChainConfig, SpectrumResult, ipr

MAX_SITES = 28
MAX_DENSE_DIM = 6000


class SectorTooLarge(MemoryError):
    pass


@dataclass
class FockBasis:
    length_l: int
    n_particles: int
    states: np.ndarray
    index_of: dict = field(repr=False)

    def __len__(self):
        return self.states.size

    def index(self, mask):
        return self.index_of[int(mask)]


def build_basis(length_l, n_particles, max_dim=MAX_DENSE_DIM):
    """All masks with ``n_particles`` bits set among ``length_l``, ascending."""
    if not 0 <= n_particles <= length_l <= MAX_SITES:
        raise SequenceError(f"need 0 <= N <= L <= {MAX_SITES}, got L={length_l}, N={n_particles}")
    dim = math.comb(length_l, n_particles)
    if dim > max_dim:
        gib = 8.0 * dim * dim / 2**30
        raise SectorTooLarge(f"sector dimension {dim} exceeds {max_dim}; dense work needs ~{gib:.1f} GiB")
    masks = [sum(1 << j for j in occ) for occ in itertools.combinations(range(length_l), n_particles)]
    states = np.array(sorted(masks), dtype=np.int64)
    return FockBasis(length_l, n_particles, states, {int(s): i for i, s in enumerate(states)})


def register_to_mask(sites, n0=1):
    mask = 0
    for s in sites:
        mask |= 1 << (int(s) - n0)
    return mask


def mask_to_register(mask, n0=1):
    mask = int(mask)
    return tuple(j + n0 for j in range(mask.bit_length()) if (mask >> j) & 1)


def build_hamiltonian(config, basis):
    """Sparse CSR Hamiltonian of the sector, units of J."""
    if basis.length_l != config.length_l:
        raise SequenceError("basis and chain lengths differ")
    rows, cols, vals = kernels.fock_hamiltonian_coo(
        basis.states, config.length_l, config.onsite(), config.delta
    )
    dim = len(basis)
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def diagonalize(config, basis):
    h = build_hamiltonian(config, basis).toarray()
    energies, vectors = np.linalg.eigh(h)
    return SpectrumResult(energies, vectors, config, basis=basis)


def ipr_many(amplitudes):
    """Many-particle IPR over the ordered-occupation register basis."""
    return ipr(amplitudes)


def sector_ipr_scan(config, alphas, delta=None, n_particles=None, basis=None):
    """Mean and max ``I_N`` over the full sector for each alpha.

    Returns an array with columns ``(mean, max, n_degenerate)``.
    """
    if basis is None:
        basis = build_basis(config.length_l, config.length_l // 2 if n_particles is None else n_particles)
    if delta is not None:
        config = ChainConfig(config.spec, config.n0, config.length_l, config.h_over_j, delta)
    out = np.empty((len(alphas), 3))
    for i, a in enumerate(alphas):
        spec = diagonalize(config.with_alpha(float(a)), basis)
        iprs = spec.iprs
        out[i] = iprs.mean(), iprs.max(), spec.degenerate.sum()
    return out


# ---------------------------------------------------------------------------
# interaction in the single-particle eigenbasis
# ---------------------------------------------------------------------------

def kappa(k1, k2, k3, k4):
    """Minimal number of nearest-neighbour steps through an adjacent pair ``(p, p+1)``."""
    ks = (k1, k2, k3, k4)
    best = None
    for p in range(min(ks) - 2, max(ks) + 3):
        v = abs(k1 - p) + abs(k2 - p - 1) + abs(k3 - p - 1) + abs(k4 - p)
        best = v if best is None else min(best, v)
    return best


def v_element(u, k1, k2, k3, k4, n0=1):
    """``sum_p U_{p,k1} U_{p+1,k2} U_{p+1,k3} U_{p,k4}`` over the chain bonds.

    ``u`` is the real site-ordered eigenvector matrix (column ``k`` is the
    state dominated by site ``k``); indices are absolute site labels.
    """
    c = [k - n0 for k in (k1, k2, k3, k4)]
    lo, hi = u[:-1], u[1:]
    return float(np.sum(lo[:, c[0]] * hi[:, c[1]] * hi[:, c[2]] * lo[:, c[3]]))


# ---------------------------------------------------------------------------
# forensics and ensembles
# ---------------------------------------------------------------------------

def hybridization_report(spectrum, ipr_threshold=1.5, min_weight=0.05):
    """Eigenstates with IPR above threshold and the registers that carry them."""
    basis = spectrum.basis
    n0 = spectrum.config.n0 if spectrum.config is not None else 1
    iprs = spectrum.iprs
    report = []
    for k in np.flatnonzero(iprs > ipr_threshold):
        w = np.abs(spectrum.vectors[:, k]) ** 2
        top = np.flatnonzero(w >= min_weight)
        top = top[np.argsort(w[top])[::-1]]
        report.append({
            "eigenindex": int(k),
            "energy": float(spectrum.energies[k]),
            "ipr": float(iprs[k]),
            "registers": [(mask_to_register(basis.states[i], n0), float(w[i])) for i in top],
        })
    return report


def ipr_histogram(specs, config, n_particles, bins=50, value_range=None):
    """Normalised distribution of ``I`` over all eigenstates of all realisations.

    Returns ``{"bin_edges", "density", "iprs"}``; ``density`` integrates to one.
    """
    basis = build_basis(config.length_l, n_particles)
    values = []
    for spec in specs:
        cfg = ChainConfig(spec, config.n0, config.length_l, config.h_over_j, config.delta)
        values.append(diagonalize(cfg, basis).iprs)
    iprs = np.concatenate(values)
    if value_range is None:
        value_range = (1.0, max(float(iprs.max()), 1.0 + 1e-9))
    density, edges = np.histogram(iprs, bins=bins, range=value_range, density=True)
    return {"bin_edges": edges, "density": density, "iprs": iprs}


def log_tail(hist):
    """``(bin_centre, log P)`` for bins with nonzero density."""
    edges, dens = hist["bin_edges"], hist["density"]
    centres = 0.5 * (edges[1:] + edges[:-1])
    keep = dens > 0
    return centres[keep], np.log(dens[keep])
