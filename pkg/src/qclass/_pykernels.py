"""Pure numpy implementations of the numerical kernels.

These mirror ``qclass._kernels`` (Cython) call for call and are used when
the compiled extension is unavailable or ``QCLASS_PURE_PYTHON`` is set.
"""
import math

import numpy as np

# off-diagonal Frobenius norm, relative to the full norm, at which a sweep stops
OFF_TOL = 1e-15


def jacobi_eigh(a, max_sweeps):
    """Diagonalize a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(w, v, sweeps)`` with eigenvalues ``w`` in ascending order,
    eigenvectors as the columns of ``v`` and the number of sweeps used.
    ``sweeps == -1`` signals that ``max_sweeps`` was exhausted.
    """
    a = np.array(a, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = np.linalg.norm(a)
    offdiag = ~np.eye(n, dtype=bool)
    sweeps = -1
    for sweep in range(max_sweeps + 1):
        off = math.sqrt(float(np.sum(np.abs(a[offdiag]) ** 2)))
        if off <= OFF_TOL * scale:
            sweeps = sweep
            break
        if sweep == max_sweeps:
            break
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                if abs(app) + 100.0 * r == abs(app) and abs(aqq) + 100.0 * r == abs(aqq):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                rotated = True
                phase = apq / r
                theta = (aqq - app) / (2.0 * r)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                sc = s * phase.conjugate()
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - sc * col_q
                a[:, q] = s * col_p + c * phase.conjugate() * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * row_p + c * phase * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = app - t * r
                a[q, q] = aqq + t * r
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - sc * vq
                v[:, q] = s * vp + c * phase.conjugate() * vq
        if not rotated:
            sweeps = sweep + 1
            break
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order], sweeps


def _subset_sum(mats, dim):
    # total[S] = sum over orderings of S of the ordered product; the last
    # factor is peeled off, so each subset costs |S| matrix products.
    n = len(mats)
    total = [None] * (1 << n)
    total[0] = np.eye(dim, dtype=np.complex128)
    for subset in range(1, 1 << n):
        acc = np.zeros((dim, dim), dtype=np.complex128)
        for i in range(n):
            bit = 1 << i
            if subset & bit:
                acc += total[subset ^ bit] @ mats[i]
        total[subset] = acc
    return total[-1]


def symmetrized_product(mats):
    """Return ``(1/n!) * sum over all orderings of the product of mats``."""
    mats = [np.asarray(m, dtype=np.complex128) for m in mats]
    if len(mats) == 1:
        return mats[0].copy()
    return _subset_sum(mats, mats[0].shape[0]) / math.factorial(len(mats))


def sym_product_table(stacks):
    """Symmetrized product at every atom of the product of projector stacks.

    ``stacks[i]`` has shape ``(K_i, d, d)``. The result has shape
    ``(K_1 * ... * K_n, d, d)`` with atoms in C (lexicographic) order.
    """
    stacks = [np.asarray(s, dtype=np.complex128) for s in stacks]
    dim = stacks[0].shape[1]
    shape = tuple(s.shape[0] for s in stacks)
    out = np.empty((int(np.prod(shape)), dim, dim), dtype=np.complex128)
    for flat, atom in enumerate(np.ndindex(*shape)):
        out[flat] = symmetrized_product([stacks[i][k] for i, k in enumerate(atom)])
    return out
