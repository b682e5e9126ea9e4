# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled damped-Newton solver for the inner EL dual problem.

Semantic twin of ``relestim._solver_py.solve_dual``; see that module for
the algorithm description.  The whole iteration runs without the GIL, so
concurrent solves from a thread pool genuinely overlap.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log, sqrt

cnp.import_array()

STATUS_CONVERGED = 0
STATUS_MAXITER = 1
STATUS_STALLED = 2

cdef extern from "<float.h>":
    const double DBL_EPSILON

cdef double _IMPROVE = 1e-3
cdef int _STALL_LIMIT = 10
cdef int _MAX_HALVINGS = 60
cdef double[6] _REGS = [0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4]

cdef int _C_CONVERGED = 0
cdef int _C_MAXITER = 1
cdef int _C_STALLED = 2


cdef int _cholesky(double* H, double* L, Py_ssize_t m, double reg) noexcept nogil:
    """Factor H + reg*I = L L' (lower L); nonzero on a non-positive pivot."""
    cdef Py_ssize_t i, j, p
    cdef double s
    for i in range(m * m):
        L[i] = H[i]
    for i in range(m):
        L[i * m + i] += reg
    for j in range(m):
        s = L[j * m + j]
        for p in range(j):
            s -= L[j * m + p] * L[j * m + p]
        if s <= 0.0:
            return 1
        L[j * m + j] = sqrt(s)
        for i in range(j + 1, m):
            s = L[i * m + j]
            for p in range(j):
                s -= L[i * m + p] * L[j * m + p]
            L[i * m + j] = s / L[j * m + j]
    return 0


cdef void _chol_solve(double* L, double* b, double* x, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, p
    cdef double s
    for i in range(m):
        s = b[i]
        for p in range(i):
            s -= L[i * m + p] * x[p]
        x[i] = s / L[i * m + i]
    for i in range(m - 1, -1, -1):
        s = x[i]
        for p in range(i + 1, m):
            s -= L[p * m + i] * x[p]
        x[i] = s / L[i * m + i]


cdef int _direction(double* H, double* L, double* g, double* d,
                    Py_ssize_t m) noexcept nogil:
    """Solve H d = -g, escalating a tiny ridge while the system is singular."""
    cdef Py_ssize_t j
    cdef int r
    cdef double[16] neg  # m is small; guarded by the caller
    for r in range(6):
        if _cholesky(H, L, m, _REGS[r]) == 0:
            for j in range(m):
                neg[j] = -g[j]
            _chol_solve(L, &neg[0], d, m)
            return 0
    return 1


def solve_dual(double[:, ::1] z not None, double gtol=1e-9, int max_iter=100):
    """Minimize -sum(log(1 + z @ lam)) over the feasible region.

    Returns ``(lam, iterations, status)``; see ``relestim._solver_py``.
    """
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t m = z.shape[1]
    if m > 16:
        # The stack buffers in _direction cap the moment dimension.
        raise ValueError("compiled solver supports at most 16 moment columns")

    lam_arr = np.zeros(m)
    cdef double[::1] lam = lam_arr
    cdef double[::1] t = np.ones(n)
    cdef double[::1] t_c = np.empty(n)
    cdef double[::1] g = np.empty(m)
    cdef double[::1] absum = np.empty(m)
    cdef double[::1] d = np.empty(m)
    cdef double[::1] lam_c = np.empty(m)
    cdef double[:, ::1] H = np.empty((m, m))
    cdef double[:, ::1] L = np.empty((m, m))

    cdef double f = 0.0, best_gnorm = np.inf
    cdef double gnorm, floor, s, alpha, tmin, f_c, hmax, eps_f, gnorm_c, zij
    cdef Py_ssize_t i, j, p
    cdef int it = 0, iterations = 0, status = _C_MAXITER
    cdef int no_improve = 0, halve, broke = 0, accepted, polish

    with nogil:
        for it in range(max_iter):
            iterations = it
            # Gradient and the per-column absolute sums (noise floor).
            for j in range(m):
                g[j] = 0.0
                absum[j] = 0.0
            for i in range(n):
                for j in range(m):
                    zij = z[i, j] / t[i]
                    g[j] -= zij
                    absum[j] += fabs(zij)
            gnorm = 0.0
            floor = 0.0
            for j in range(m):
                if fabs(g[j]) > gnorm:
                    gnorm = fabs(g[j])
                if absum[j] > floor:
                    floor = absum[j]
            floor *= 8.0 * DBL_EPSILON
            if gnorm <= gtol or gnorm <= floor:
                status = _C_CONVERGED
                broke = 1
                break

            if gnorm < best_gnorm * (1.0 - _IMPROVE):
                best_gnorm = gnorm
                no_improve = 0
            else:
                no_improve += 1
                if no_improve >= _STALL_LIMIT:
                    # Stalled at the curvature-scaled noise floor of the
                    # objective means numerical convergence, not a hull
                    # failure.
                    hmax = 0.0
                    for j in range(m):
                        s = 0.0
                        for i in range(n):
                            zij = z[i, j] / t[i]
                            s += zij * zij
                        if s > hmax:
                            hmax = s
                    eps_f = 8.0 * DBL_EPSILON * (1.0 + fabs(f))
                    if gnorm <= sqrt(2.0 * eps_f * hmax):
                        status = _C_CONVERGED
                    else:
                        status = _C_STALLED
                    broke = 1
                    break

            # Newton system H = z' diag(1/t^2) z.
            for j in range(m):
                for p in range(j, m):
                    H[j, p] = 0.0
            for i in range(n):
                for j in range(m):
                    zij = z[i, j] / (t[i] * t[i])
                    for p in range(j, m):
                        H[j, p] += zij * z[i, p]
            for j in range(m):
                for p in range(j):
                    H[j, p] = H[p, j]

            if _direction(&H[0, 0], &L[0, 0], &g[0], &d[0], m) != 0:
                status = _C_STALLED
                broke = 1
                break

            # Step-halving line search: feasible and non-increasing.
            alpha = 1.0
            accepted = 0
            for halve in range(_MAX_HALVINGS):
                for j in range(m):
                    lam_c[j] = lam[j] + alpha * d[j]
                tmin = 1.0
                for i in range(n):
                    s = 1.0
                    for j in range(m):
                        s += z[i, j] * lam_c[j]
                    t_c[i] = s
                    if s < tmin:
                        tmin = s
                if tmin > 0.0:
                    f_c = 0.0
                    for i in range(n):
                        f_c -= log(t_c[i])
                    if f_c <= f:
                        for j in range(m):
                            lam[j] = lam_c[j]
                        for i in range(n):
                            t[i] = t_c[i]
                        f = f_c
                        accepted = 1
                        break
                alpha *= 0.5
            # On a failed search lam is unchanged; the stall counter trips.

        if broke == 0:
            iterations = max_iter

        if status == _C_CONVERGED:
            for polish in range(2):
                gnorm = 0.0
                for j in range(m):
                    g[j] = 0.0
                for i in range(n):
                    for j in range(m):
                        g[j] -= z[i, j] / t[i]
                for j in range(m):
                    if fabs(g[j]) > gnorm:
                        gnorm = fabs(g[j])
                if gnorm == 0.0:
                    break
                for j in range(m):
                    for p in range(j, m):
                        H[j, p] = 0.0
                for i in range(n):
                    for j in range(m):
                        zij = z[i, j] / (t[i] * t[i])
                        for p in range(j, m):
                            H[j, p] += zij * z[i, p]
                for j in range(m):
                    for p in range(j):
                        H[j, p] = H[p, j]
                if _direction(&H[0, 0], &L[0, 0], &g[0], &d[0], m) != 0:
                    break
                for j in range(m):
                    lam_c[j] = lam[j] + d[j]
                tmin = 1.0
                for i in range(n):
                    s = 1.0
                    for j in range(m):
                        s += z[i, j] * lam_c[j]
                    t_c[i] = s
                    if s < tmin:
                        tmin = s
                if tmin <= 0.0:
                    break
                f_c = 0.0
                for i in range(n):
                    f_c -= log(t_c[i])
                gnorm_c = 0.0
                for j in range(m):
                    s = 0.0
                    for i in range(n):
                        s -= z[i, j] / t_c[i]
                    if fabs(s) > gnorm_c:
                        gnorm_c = fabs(s)
                if f_c > 0.0 or gnorm_c >= gnorm:
                    break
                for j in range(m):
                    lam[j] = lam_c[j]
                for i in range(n):
                    t[i] = t_c[i]
                f = f_c

    return lam_arr, iterations, status
