# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels: complex Jacobi eigensolver and the
symmetrized-product table. Same signatures and semantics as
``qclass._pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from libc.string cimport memset

cnp.import_array()

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double creal(double complex)
    double complex conj(double complex)

cdef double OFF_TOL = 1e-15


cdef double _off_norm(double complex[:, ::1] a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc = 0.0, x
    for i in range(n):
        for j in range(n):
            if i != j:
                x = cabs(a[i, j])
                acc += x * x
    return sqrt(acc)


def jacobi_eigh(a_in, int max_sweeps):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] a_arr = np.array(a_in, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = a_arr.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] v_arr = np.eye(n, dtype=np.complex128)
    cdef double complex[:, ::1] a = a_arr
    cdef double complex[:, ::1] v = v_arr
    cdef double scale = np.linalg.norm(a_arr)
    cdef int sweep, sweeps = -1
    cdef bint rotated
    cdef Py_ssize_t p, q, k
    cdef double r, app, aqq, theta, t, c, s
    cdef double complex apq, phase, phase_c, sc, xp, xq
    with nogil:
        for sweep in range(max_sweeps + 1):
            if _off_norm(a, n) <= OFF_TOL * scale:
                sweeps = sweep
                break
            if sweep == max_sweeps:
                break
            rotated = False
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    r = cabs(apq)
                    if r == 0.0:
                        continue
                    app = creal(a[p, p])
                    aqq = creal(a[q, q])
                    if fabs(app) + 100.0 * r == fabs(app) and fabs(aqq) + 100.0 * r == fabs(aqq):
                        a[p, q] = 0.0
                        a[q, p] = 0.0
                        continue
                    rotated = True
                    phase = apq / r
                    phase_c = conj(phase)
                    theta = (aqq - app) / (2.0 * r)
                    if fabs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                        if theta < 0.0:
                            t = -t
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    sc = s * phase_c
                    for k in range(n):
                        xp = a[k, p]
                        xq = a[k, q]
                        a[k, p] = c * xp - sc * xq
                        a[k, q] = s * xp + c * phase_c * xq
                    for k in range(n):
                        xp = a[p, k]
                        xq = a[q, k]
                        a[p, k] = c * xp - s * phase * xq
                        a[q, k] = s * xp + c * phase * xq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    a[p, p] = app - t * r
                    a[q, q] = aqq + t * r
                    for k in range(n):
                        xp = v[k, p]
                        xq = v[k, q]
                        v[k, p] = c * xp - sc * xq
                        v[k, q] = s * xp + c * phase_c * xq
            if not rotated:
                sweeps = sweep + 1
                break
    w = np.diag(a_arr).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v_arr[:, order], sweeps


cdef void _matmul_acc(double complex* x, double complex* y, double complex* out, Py_ssize_t d) noexcept nogil:
    # out += x @ y for row-major d x d blocks
    cdef Py_ssize_t i, j, k
    cdef double complex xik
    for i in range(d):
        for k in range(d):
            xik = x[i * d + k]
            if xik == 0.0:
                continue
            for j in range(d):
                out[i * d + j] += xik * y[k * d + j]


def sym_product_table(stacks):
    cdef list arrs = [np.ascontiguousarray(s, dtype=np.complex128) for s in stacks]
    cdef Py_ssize_t n = len(arrs)
    cdef Py_ssize_t d = arrs[0].shape[1]
    cdef Py_ssize_t dd = d * d
    shape = tuple(arr.shape[0] for arr in arrs)
    cdef Py_ssize_t n_atoms = int(np.prod(shape))
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] out = np.empty((n_atoms, d, d), dtype=np.complex128)
    if n == 1:
        out[...] = arrs[0]
        return out
    # flattened projector stacks, one block per (observable, spectral index)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] flat = np.concatenate([arr.ravel() for arr in arrs])
    cdef cnp.ndarray[cnp.intp_t, ndim=1] offsets = np.zeros(n, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] sizes = np.array(shape, dtype=np.intp)
    cdef Py_ssize_t i
    for i in range(1, n):
        offsets[i] = offsets[i - 1] + sizes[i - 1] * dd
    cdef Py_ssize_t n_subsets = 1 << n
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] work = np.zeros((n_subsets, dd), dtype=np.complex128)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] idx = np.zeros(n, dtype=np.intp)
    cdef double complex* flat_p = <double complex*> flat.data
    cdef double complex* work_p = <double complex*> work.data
    cdef double complex* out_p = <double complex*> out.data
    cdef Py_ssize_t* off_p = <Py_ssize_t*> offsets.data
    cdef Py_ssize_t* size_p = <Py_ssize_t*> sizes.data
    cdef Py_ssize_t* idx_p = <Py_ssize_t*> idx.data
    cdef Py_ssize_t atom, subset, bit, j
    cdef double inv_fact = 1.0
    for i in range(2, n + 1):
        inv_fact /= i
    with nogil:
        for atom in range(n_atoms):
            memset(work_p, 0, dd * sizeof(double complex))
            for j in range(d):
                work_p[j * d + j] = 1.0
            for subset in range(1, n_subsets):
                memset(work_p + subset * dd, 0, dd * sizeof(double complex))
                for i in range(n):
                    bit = 1 << i
                    if subset & bit:
                        _matmul_acc(work_p + (subset ^ bit) * dd,
                                    flat_p + off_p[i] + idx_p[i] * dd,
                                    work_p + subset * dd, d)
            for j in range(dd):
                out_p[atom * dd + j] = work_p[(n_subsets - 1) * dd + j] * inv_fact
            # advance the multi-index in C order
            i = n - 1
            while i >= 0:
                idx_p[i] += 1
                if idx_p[i] < size_p[i]:
                    break
                idx_p[i] = 0
                i -= 1
    return out
