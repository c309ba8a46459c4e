"""Compiled hot loop for the jet tensor contractions.

One fused kernel covers every contraction pattern after canonicalization:
out[z,m,n,:] accumulates the truncated Taylor products of a[z,m,k,:] and
b[z,k,n,:] over k, steered by the precomputed convolution pair tables.
Coefficient rows are small (<= 792 doubles) so all three rows stay cache
resident while the pair loop runs.

Parallelism is over the batch (sample point) axis only; the per-element
accumulation order is fixed, so results are bit-reproducible regardless of
thread count.
"""

from __future__ import annotations

import numba
import numpy as np

# the workqueue layer is always available; picking it explicitly avoids the
# noisy probe of optional TBB/OpenMP backends at first parallel execution
numba.config.THREADING_LAYER = "workqueue"


@numba.njit(
    "void(float64[:,:,:,::1], float64[:,:,:,::1], intp[::1], intp[::1], intp[::1], float64[:,:,:,::1])",
    parallel=True,
    cache=True,
)
def pair_matmul(a, b, ia, ib, ig, out):
    nz, m_dim, k_dim, _ = a.shape
    n_dim = b.shape[2]
    npairs = ia.shape[0]
    for z in numba.prange(nz):
        for m in range(m_dim):
            for n in range(n_dim):
                acc = out[z, m, n]
                for k in range(k_dim):
                    av = a[z, m, k]
                    bv = b[z, k, n]
                    for p in range(npairs):
                        acc[ig[p]] += av[ia[p]] * bv[ib[p]]
