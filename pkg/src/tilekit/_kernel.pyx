# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled substitution step for int64 tile data.

Same contract as ``_kernel_py.expand_step``; the caller guarantees (via an
a-priori magnitude bound) that no intermediate overflows int64.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, int32_t, uint8_t, uint16_t

cnp.import_array()


def expand_step(labels, refl, A, T, nchild, clabel, crefl, MB, MS, MZ):
    if A.dtype != np.int64:
        raise TypeError("compiled kernel handles int64 data only")
    cdef const int32_t[::1] lab = np.ascontiguousarray(labels, dtype=np.int32)
    cdef const uint8_t[::1] rf = np.ascontiguousarray(refl, dtype=np.uint8)
    cdef const int64_t[:, ::1] a = np.ascontiguousarray(A)
    cdef const int64_t[:, ::1] t = np.ascontiguousarray(T)
    cdef const int32_t[::1] nch = np.ascontiguousarray(nchild, dtype=np.int32)
    cdef const int32_t[:, ::1] cl = np.ascontiguousarray(clabel, dtype=np.int32)
    cdef const uint8_t[:, ::1] cr = np.ascontiguousarray(crefl, dtype=np.uint8)
    cdef const int64_t[:, :, :, :, ::1] mb = np.ascontiguousarray(MB, dtype=np.int64)
    cdef const int64_t[:, :, :, :, ::1] ms = np.ascontiguousarray(MS, dtype=np.int64)
    cdef const int64_t[:, ::1] mz = np.ascontiguousarray(MZ, dtype=np.int64)
    cdef Py_ssize_t n = lab.shape[0], d = a.shape[1]
    cdef Py_ssize_t i, c, j, k, pos = 0, total = 0
    for i in range(n):
        total += nch[lab[i]]
    out_l_arr = np.empty(total, dtype=np.int32)
    out_r_arr = np.empty(total, dtype=np.uint8)
    out_a_arr = np.empty((total, d), dtype=np.int64)
    out_t_arr = np.empty((total, d), dtype=np.int64)
    parent_arr = np.empty(total, dtype=np.int64)
    cidx_arr = np.empty(total, dtype=np.uint16)
    cdef int32_t[::1] ol = out_l_arr
    cdef uint8_t[::1] orf = out_r_arr
    cdef int64_t[:, ::1] oa = out_a_arr
    cdef int64_t[:, ::1] ot = out_t_arr
    cdef int64_t[::1] par = parent_arr
    cdef uint16_t[::1] ci = cidx_arr
    cdef int64_t zt[64]
    cdef int64_t s, u
    cdef int L, r
    if d > 64:
        raise ValueError("field degree too large for the compiled kernel")
    with nogil:
        for i in range(n):
            L = lab[i]
            r = rf[i]
            for k in range(d):
                s = 0
                for j in range(d):
                    s = s + t[i, j] * mz[j, k]
                zt[k] = s
            for c in range(nch[L]):
                ol[pos] = cl[L, c]
                orf[pos] = r ^ cr[L, c]
                par[pos] = i
                ci[pos] = <uint16_t>c
                for k in range(d):
                    s = 0
                    u = zt[k]
                    for j in range(d):
                        s = s + a[i, j] * mb[r, L, c, j, k]
                        u = u + a[i, j] * ms[r, L, c, j, k]
                    oa[pos, k] = s
                    ot[pos, k] = u
                pos += 1
    return out_l_arr, out_r_arr, out_a_arr, out_t_arr, parent_arr, cidx_arr
