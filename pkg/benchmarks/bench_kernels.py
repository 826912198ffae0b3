#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy twins.

Usage:
    python3 benchmarks/bench_kernels.py [--repeat 5] [--out bench.csv]

Each kernel is checked for agreement before timing; the numba call is
warmed up once so compilation is excluded.
"""
import argparse
import csv
import sys
import timeit

import numpy as np

from locchain import kernels
from locchain._accel import HAVE_NUMBA
from locchain.many_particle import build_basis
from locchain.sequences import base, section


def cases():
    rng = np.random.default_rng(7)
    a = rng.integers(1, 5000, 200_000)
    b = rng.integers(1, 5000, 200_000)
    yield "lowdeg_pairs", (a, b)

    basis = build_basis(14, 7, max_dim=4000)
    onsite = 20.0 * section(base(0.25), 1, 14)
    yield "fock_hamiltonian_coo", (basis.states, 14, onsite, 1.0)

    vecs = np.linalg.qr(rng.standard_normal((924, 924)))[0]
    yield "ipr_columns", (vecs,)

    w = rng.random(924)
    w /= w.sum()
    e = rng.standard_normal(924) * 20
    t = np.logspace(-2, 6, 3200)
    yield "survival_probability", (w, e, t)


def _same(x, y):
    if isinstance(x, tuple) and len(x) == 3:
        # COO triplets: entry order is backend specific
        dim = int(max(x[0].max(), y[0].max())) + 1
        a, b = np.zeros((dim, dim)), np.zeros((dim, dim))
        np.add.at(a, (x[0], x[1]), x[2])
        np.add.at(b, (y[0], y[1]), y[2])
        return np.allclose(a, b)
    if isinstance(x, tuple):
        return all(_same(p, q) for p, q in zip(x, y))
    return np.allclose(x, y, rtol=1e-10, atol=1e-12)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba unavailable or disabled; timing numpy only", file=sys.stderr)

    rows = []
    for name, inputs in cases():
        f_np = getattr(kernels, name + "_numpy")
        f_nb = getattr(kernels, name + "_numba")
        ref = f_np(*inputs)
        got = f_nb(*inputs)  # warm-up / compile
        if not _same(ref, got):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        t_np = min(timeit.repeat(lambda: f_np(*inputs), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: f_nb(*inputs), number=1, repeat=args.repeat))
        rows.append((name, t_np, t_nb, t_np / t_nb))
        print(f"{name:24s} numpy {t_np * 1e3:9.2f} ms   numba {t_nb * 1e3:9.2f} ms   speedup {t_np / t_nb:6.2f}x")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kernel", "numpy_s", "numba_s", "speedup"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
