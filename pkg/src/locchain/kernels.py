"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``lowdeg_pairs``, ``fock_hamiltonian_coo``, ``ipr_columns``,
``survival_probability``) dispatch on :func:`locchain._accel.backend`.  The
``*_numpy`` variants are always importable; the ``*_numba`` variants are the
same functions compiled with ``@njit`` (plain Python when numba is off).
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit

__all__ = [
    "lowdeg_pairs",
    "fock_hamiltonian_coo",
    "ipr_columns",
    "survival_probability",
]


# ---------------------------------------------------------------------------
# lowdeg of base-sequence differences
# ---------------------------------------------------------------------------

def lowdeg_pairs_numpy(a, b):
    """Order in alpha of ``eps_a(alpha) - eps_b(alpha)`` for the base sequence.

    Returns -1 where ``a == b`` (identically zero difference).
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    a, b = np.broadcast_arrays(a, b)
    out = np.zeros(a.shape, dtype=np.int64)
    lo = np.minimum(a, b)
    out[a == b] = -1
    active = np.flatnonzero(((a - b) % 2 == 0) & (a != b))
    if active.size == 0:
        return out
    # every surviving pair has identical (-1)^n terms; default is lo + 1
    out.flat[active] = lo.flat[active] + 1
    aa = a.flat[active]
    bb = b.flat[active]
    ll = lo.flat[active]
    q = 1
    while active.size:
        live = q <= ll
        differ = live & (((aa // (q + 1)) & 1) != ((bb // (q + 1)) & 1))
        out.flat[active[differ]] = q
        keep = live & ~differ
        active, aa, bb, ll = active[keep], aa[keep], bb[keep], ll[keep]
        q += 1
    return out


@njit(cache=True)
def _lowdeg_pairs_loop(a, b, out):
    for i in range(a.size):
        x = a[i]
        y = b[i]
        if x == y:
            out[i] = -1
            continue
        if (x - y) % 2 != 0:
            out[i] = 0
            continue
        lo = min(x, y)
        res = lo + 1
        for q in range(1, lo + 1):
            if ((x // (q + 1)) & 1) != ((y // (q + 1)) & 1):
                res = q
                break
        out[i] = res
    return out


def lowdeg_pairs_numba(a, b):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
    shape = a.shape
    out = np.empty(a.size, dtype=np.int64)
    _lowdeg_pairs_loop(np.ascontiguousarray(a).ravel(), np.ascontiguousarray(b).ravel(), out)
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Fock-sector Hamiltonian assembly
# ---------------------------------------------------------------------------

def fock_hamiltonian_coo_numpy(states, length, onsite, delta, hop=0.5):
    """COO triplets of the nearest-neighbour fermion Hamiltonian in a sector.

    ``states`` must be sorted ascending.  Bit ``j`` of a mask is chain site
    ``j`` (0-based).  Each off-diagonal pair is emitted once per direction.
    """
    states = np.asarray(states, dtype=np.int64)
    onsite = np.asarray(onsite, dtype=np.float64)
    dim = states.size
    idx = np.arange(dim)
    diag = np.zeros(dim)
    for j in range(length):
        diag += onsite[j] * ((states >> j) & 1)
    pairs = states & (states >> 1)
    npairs = np.zeros(dim, dtype=np.int64)
    for j in range(length - 1):
        npairs += (pairs >> j) & 1
    diag += delta * npairs
    rows = [idx]
    cols = [idx]
    vals = [diag]
    for j in range(length - 1):
        occ = ((states >> j) & 1) ^ ((states >> (j + 1)) & 1)
        src = np.flatnonzero(occ)
        flipped = states[src] ^ ((1 << j) | (1 << (j + 1)))
        dst = np.searchsorted(states, flipped)
        rows.append(dst)
        cols.append(src)
        vals.append(np.full(src.size, hop))
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


@njit(cache=True)
def _fock_coo_loop(states, length, onsite, delta, hop):
    dim = states.size
    nnz = dim
    for i in range(dim):
        s = states[i]
        for j in range(length - 1):
            if ((s >> j) & 1) != ((s >> (j + 1)) & 1):
                nnz += 1
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    k = 0
    for i in range(dim):
        s = states[i]
        e = 0.0
        for j in range(length):
            if (s >> j) & 1:
                e += onsite[j]
                if j + 1 < length and (s >> (j + 1)) & 1:
                    e += delta
        rows[k] = i
        cols[k] = i
        vals[k] = e
        k += 1
        for j in range(length - 1):
            if ((s >> j) & 1) != ((s >> (j + 1)) & 1):
                t = s ^ ((1 << j) | (1 << (j + 1)))
                rows[k] = np.searchsorted(states, t)
                cols[k] = i
                vals[k] = hop
                k += 1
    return rows, cols, vals


def fock_hamiltonian_coo_numba(states, length, onsite, delta, hop=0.5):
    return _fock_coo_loop(
        np.ascontiguousarray(states, dtype=np.int64),
        int(length),
        np.ascontiguousarray(onsite, dtype=np.float64),
        float(delta),
        float(hop),
    )


# ---------------------------------------------------------------------------
# IPR of eigenvector columns
# ---------------------------------------------------------------------------

def ipr_columns_numpy(vectors):
    v2 = np.abs(vectors) ** 2
    return 1.0 / np.sum(v2 * v2, axis=0)


@njit(cache=True)
def _ipr_columns_loop(vectors):
    n, m = vectors.shape
    out = np.empty(m)
    for k in range(m):
        acc = 0.0
        for i in range(n):
            c = vectors[i, k]
            c2 = c * c
            acc += c2 * c2
        out[k] = 1.0 / acc
    return out


def ipr_columns_numba(vectors):
    vectors = np.asarray(vectors)
    if np.iscomplexobj(vectors):
        return ipr_columns_numpy(vectors)
    return _ipr_columns_loop(np.ascontiguousarray(vectors, dtype=np.float64))


# ---------------------------------------------------------------------------
# survival probability |sum_l w_l exp(-i E_l t)|^2
# ---------------------------------------------------------------------------

def survival_probability_numpy(weights, energies, times, chunk=256):
    weights = np.asarray(weights, dtype=np.float64)
    energies = np.asarray(energies, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    keep = weights > 0.0
    w, e = weights[keep], energies[keep]
    out = np.empty(times.size)
    for start in range(0, times.size, chunk):
        t = times[start:start + chunk]
        phase = np.outer(t, e)
        re = np.cos(phase) @ w
        im = np.sin(phase) @ w
        out[start:start + chunk] = re * re + im * im
    return out


@njit(cache=True)
def _survival_loop(w, e, times, out):
    for k in range(times.size):
        t = times[k]
        re = 0.0
        im = 0.0
        for i in range(w.size):
            re += w[i] * np.cos(e[i] * t)
            im += w[i] * np.sin(e[i] * t)
        out[k] = re * re + im * im
    return out


def survival_probability_numba(weights, energies, times):
    weights = np.asarray(weights, dtype=np.float64)
    energies = np.asarray(energies, dtype=np.float64)
    keep = weights > 0.0
    times = np.ascontiguousarray(times, dtype=np.float64)
    out = np.empty(times.size)
    return _survival_loop(
        np.ascontiguousarray(weights[keep]), np.ascontiguousarray(energies[keep]), times, out
    )


if HAVE_NUMBA:
    lowdeg_pairs = lowdeg_pairs_numba
    fock_hamiltonian_coo = fock_hamiltonian_coo_numba
    ipr_columns = ipr_columns_numba
    survival_probability = survival_probability_numba
else:
    lowdeg_pairs = lowdeg_pairs_numpy
    fock_hamiltonian_coo = fock_hamiltonian_coo_numpy
    ipr_columns = ipr_columns_numpy
    survival_probability = survival_probability_numpy
