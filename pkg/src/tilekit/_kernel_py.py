"""Pure numpy substitution step (fallback for the compiled kernel).

Works for int64 and for object (Python int) arrays alike.
"""

from __future__ import annotations

import numpy as np


def expand_step(labels, refl, A, T, nchild, clabel, crefl, MB, MS, MZ):
    """One inflation step on columnar tile data.

    ``A``/``T`` hold integer numerators of the rotation/translation.
    ``MB[r, i, c]``/``MS[r, i, c]`` are the multiplication matrices of the
    twisted child data and ``MZ`` that of zeta, all pre-scaled to integers.
    Children are emitted parent by parent in child order.
    Returns (labels, refl, A, T, parent, child_index).
    """
    n = len(labels)
    counts = nchild[labels].astype(np.int64)
    offs = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offs[1:])
    total = int(offs[-1])
    d = A.shape[1]
    out_l = np.empty(total, dtype=np.int32)
    out_r = np.empty(total, dtype=np.uint8)
    out_a = np.empty((total, d), dtype=A.dtype)
    out_t = np.empty((total, d), dtype=A.dtype)
    cidx = np.empty(total, dtype=np.uint16)
    zt = T @ MZ
    for lab in range(len(nchild)):
        sel_l = labels == lab
        for r in (0, 1):
            idx = np.nonzero(sel_l & (refl == r))[0]
            if not idx.size:
                continue
            ap = A[idx]
            zp = zt[idx]
            base = offs[idx]
            for c in range(int(nchild[lab])):
                pos = base + c
                out_l[pos] = clabel[lab, c]
                out_r[pos] = r ^ crefl[lab, c]
                out_a[pos] = ap @ MB[r, lab, c]
                out_t[pos] = ap @ MS[r, lab, c] + zp
                cidx[pos] = c
    parent = np.repeat(np.arange(n, dtype=np.int64), counts)
    return out_l, out_r, out_a, out_t, parent, cidx
