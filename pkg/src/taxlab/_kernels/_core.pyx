# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Keep in lockstep with `_pure.py`."""

import numpy as np

from libc.math cimport INFINITY, fmax, fmin, pow, sqrt

BACKEND_NAME = "compiled"

cdef double _INVPHI = (sqrt(5.0) - 1.0) / 2.0
cdef double _INVPHI2 = (3.0 - sqrt(5.0)) / 2.0
cdef int _GSS_ITERS = 60
cdef double _CONSUMPTION_FLOOR = 1e-6


cdef inline double _tax_scalar(double[::1] thresholds, double[::1] rates,
                               double z) noexcept nogil:
    cdef Py_ssize_t j, nb = thresholds.shape[0]
    cdef double tax = 0.0, slab, width
    for j in range(nb):
        if j + 1 < nb:
            width = thresholds[j + 1] - thresholds[j]
            slab = z - thresholds[j]
            if slab < 0.0:
                slab = 0.0
            elif slab > width:
                slab = width
        else:
            slab = fmax(z - thresholds[j], 0.0)
        tax += rates[j] * slab
    return tax


cdef inline double _consumption(double c, double eta) noexcept nogil:
    c = fmax(c, _CONSUMPTION_FLOOR)
    # sqrt/square fast paths: the default eta 0.5 and delta 2.0 dominate
    # real runs, and these forms round identically to the pow forms.
    if eta == 0.5:
        return (sqrt(c) - 1.0) * 2.0
    return (pow(c, 1.0 - eta) - 1.0) / (1.0 - eta)


cdef inline double _labor_cost(double labor, double psi,
                               double delta) noexcept nogil:
    if delta == 2.0:
        return psi * labor * labor
    return psi * pow(labor, delta)


cdef inline double _seg_util(double labor, double c0, double c1, double eta,
                             double psi, double delta) noexcept nogil:
    return _consumption(c0 + c1 * labor, eta) - _labor_cost(labor, psi, delta)


def tax_due_many(thresholds, rates, incomes):
    """Piecewise-linear tax owed on each income; marginal rates are
    right-continuous at thresholds and the top bracket is unbounded."""
    th = np.ascontiguousarray(np.asarray(thresholds, dtype=np.float64))
    ra = np.ascontiguousarray(np.asarray(rates, dtype=np.float64))
    z_in = np.asarray(incomes, dtype=np.float64)
    flat = np.ascontiguousarray(z_in.reshape(-1))
    out = np.empty_like(flat)
    cdef double[::1] t = th
    cdef double[::1] r = ra
    cdef double[::1] z = flat
    cdef double[::1] o = out
    cdef Py_ssize_t i, n = z.shape[0]
    with nogil:
        for i in range(n):
            o[i] = _tax_scalar(t, r, z[i])
    return out.reshape(z_in.shape)


def best_response_many(skills, thresholds, rates, rebate, eta, psi, delta,
                       labor_lo, labor_hi):
    """Utility-maximizing labor per worker for a shared schedule and rebate.

    Golden section per bracket segment plus the segment endpoints; exact ties
    resolve to the smallest labor. Same candidate order as the pure backend.
    """
    sk = np.ascontiguousarray(np.atleast_1d(np.asarray(skills, dtype=np.float64)))
    th = np.ascontiguousarray(np.asarray(thresholds, dtype=np.float64))
    ra = np.ascontiguousarray(np.asarray(rates, dtype=np.float64))
    cdef double[::1] s = sk
    cdef double[::1] t = th
    cdef double[::1] r = ra
    cdef Py_ssize_t n = s.shape[0], nb = t.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    base_arr = np.zeros(nb, dtype=np.float64)
    knots_arr = np.empty(nb + 1, dtype=np.float64)
    interior_arr = np.empty(nb, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] base = base_arr
    cdef double[::1] knots = knots_arr
    cdef double[::1] interior = interior_arr
    cdef double R = rebate, c_eta = eta, c_psi = psi, c_delta = delta
    cdef double lo = labor_lo, hi = labor_hi
    cdef Py_ssize_t i, j, k, it, idx
    cdef double cut, a, b, c, d, fc, fd, c0, c1, labor, z, u, best_u, best_l

    for j in range(1, nb):
        base[j] = base[j - 1] + r[j - 1] * (t[j] - t[j - 1])

    with nogil:
        for i in range(n):
            knots[0] = lo
            for j in range(1, nb):
                cut = INFINITY if s[i] <= 0.0 else t[j] / s[i]
                knots[j] = fmin(fmax(cut, lo), hi)
            knots[nb] = hi

            for k in range(nb):
                a = knots[k]
                b = knots[k + 1]
                c0 = r[k] * t[k] - base[k] + R
                c1 = s[i] * (1.0 - r[k])
                for it in range(_GSS_ITERS):
                    c = a + _INVPHI2 * (b - a)
                    d = a + _INVPHI * (b - a)
                    fc = _seg_util(c, c0, c1, c_eta, c_psi, c_delta)
                    fd = _seg_util(d, c0, c1, c_eta, c_psi, c_delta)
                    if fc >= fd:
                        b = d
                    else:
                        a = c
                interior[k] = 0.5 * (a + b)

            best_u = -INFINITY
            best_l = lo
            for idx in range(2 * nb + 1):
                labor = knots[idx // 2] if idx % 2 == 0 else interior[idx // 2]
                z = s[i] * labor
                u = (_consumption(z - _tax_scalar(t, r, z) + R, c_eta)
                     - _labor_cost(labor, c_psi, c_delta))
                if u > best_u:
                    best_u = u
                    best_l = labor
            out[i] = best_l
    return out_arr


def best_response(skill, thresholds, rates, rebate, eta, psi, delta,
                  labor_lo, labor_hi):
    out = best_response_many(
        np.array([skill], dtype=np.float64), thresholds, rates, rebate,
        eta, psi, delta, labor_lo, labor_hi)
    return float(out[0])
