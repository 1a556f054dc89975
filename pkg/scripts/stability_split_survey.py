#!/usr/bin/env python3
"""Survey of asymptotic projections and unitary splitting on random
contractions.

For a contraction T the limits P = lim (T^dag)^n T^n and
Q = lim T^n (T^dag)^n exist; in finite dimension both equal the orthogonal
projector onto the maximal unitary subspace H_1, because the completely
non-unitary complement of a matrix contraction always has spectral radius
strictly below one.  The survey draws random contractions (strict ones,
and strict blocks padded with hidden unitary parts), computes P and Q by
iterated squaring and by the spectral method, and tallies

  * the worst disagreement between the two computations,
  * the distribution of dim H_1,
  * the criterion "P = Q is a projection with range H_1" against joint
    strong stability of the complement restriction (the two sides must
    agree on every instance),
  * the worst splitting reassembly residual.
"""

import argparse
from collections import Counter

import numpy as np

from qrecur import linalg, stability


def random_contraction(rng, n, unitary_block):
    strict = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    strict /= (1.0 + 1e-6) * linalg.operator_norm(strict)
    if unitary_block == 0:
        return strict
    z = rng.standard_normal((unitary_block, unitary_block)) + 1j * rng.standard_normal(
        (unitary_block, unitary_block)
    )
    q, r = np.linalg.qr(z)
    q *= np.diagonal(r) / np.abs(np.diagonal(r))
    total = n + unitary_block
    block = np.zeros((total, total), dtype=complex)
    block[:unitary_block, :unitary_block] = q
    block[unitary_block:, unitary_block:] = strict
    zw = rng.standard_normal((total, total)) + 1j * rng.standard_normal((total, total))
    w, rw = np.linalg.qr(zw)
    w *= np.diagonal(rw) / np.abs(np.diagonal(rw))
    return w @ block @ w.conj().T


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-dim", type=int, default=9)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)

    worst_mismatch = 0.0
    worst_reassembly = 0.0
    h1_dims = Counter()
    biconditional_failures = 0

    for i in range(args.count):
        n = int(rng.integers(2, args.max_dim))
        k = int(rng.integers(0, 3)) if i % 2 else 0
        t = random_contraction(rng, n, k)
        proj = stability.asymptotic_projections(t)
        split = stability.unitary_subspace(t)
        report = stability.pq_criterion(proj, split)

        worst_mismatch = max(worst_mismatch, proj.spectral_mismatch)
        h1_dims[split.h1_basis.shape[1]] += 1
        if not report.biconditional_ok:
            biconditional_failures += 1
        z = np.hstack([split.h1_basis, split.complement_basis])
        resid = linalg.max_abs(z @ (z.conj().T @ np.asarray(t) @ z) @ z.conj().T - t)
        worst_reassembly = max(worst_reassembly, resid)

    print("Stability splitting survey")
    print(f"instances: {args.count}, seed: {args.seed}")
    print(f"dim H_1 histogram: {dict(sorted(h1_dims.items()))}")
    print(f"worst iterated-vs-spectral projection mismatch: {worst_mismatch:.3e} (tol 1e-7)")
    print(f"worst splitting reassembly residual:            {worst_reassembly:.3e} (tol 1e-9)")
    print(f"criterion/stability biconditional failures:     {biconditional_failures}")
    ok = (
        worst_mismatch <= 1e-7
        and worst_reassembly <= 1e-9
        and biconditional_failures == 0
    )
    print("SUMMARY:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
