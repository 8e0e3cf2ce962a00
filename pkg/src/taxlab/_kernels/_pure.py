"""Numpy fallback for the hot kernels.

Mirrors `_core.pyx` operation for operation: the compiled and pure paths must
agree to float precision so results do not depend on which backend loaded.
Keep the two files in sync when touching the golden-section loop.
"""

import numpy as np

BACKEND_NAME = "pure"

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - np.sqrt(5.0)) / 2.0
_GSS_ITERS = 60
_CONSUMPTION_FLOOR = 1e-6


def tax_due_many(thresholds, rates, incomes):
    """Piecewise-linear tax owed on each income; marginal rates are
    right-continuous at thresholds and the top bracket is unbounded."""
    thresholds = np.asarray(thresholds, dtype=np.float64)
    rates = np.asarray(rates, dtype=np.float64)
    z = np.asarray(incomes, dtype=np.float64)
    taxes = np.zeros_like(z)
    n_brackets = thresholds.shape[0]
    for j in range(n_brackets):
        if j + 1 < n_brackets:
            width = thresholds[j + 1] - thresholds[j]
            taxes += rates[j] * np.clip(z - thresholds[j], 0.0, width)
        else:
            taxes += rates[j] * np.maximum(z - thresholds[j], 0.0)
    return taxes


def _consumption_term(c, eta):
    c = np.maximum(c, _CONSUMPTION_FLOOR)
    return (np.power(c, 1.0 - eta) - 1.0) / (1.0 - eta)


def _segment_utility(labor, c0, c1, eta, psi, delta):
    return _consumption_term(c0 + c1 * labor, eta) - psi * np.power(labor, delta)


def best_response_many(skills, thresholds, rates, rebate, eta, psi, delta,
                       labor_lo, labor_hi):
    """Utility-maximizing labor per worker for a shared schedule and rebate.

    The objective is concave on each bracket segment (affine take-home pay
    composed with a concave consumption term, minus convex labor disutility),
    so a golden-section pass per segment plus the segment endpoints covers
    every candidate optimum. Exact ties resolve to the smallest labor.
    """
    skills = np.atleast_1d(np.asarray(skills, dtype=np.float64))
    thresholds = np.asarray(thresholds, dtype=np.float64)
    rates = np.asarray(rates, dtype=np.float64)
    n = skills.shape[0]
    n_brackets = thresholds.shape[0]

    # T(z) at each lower threshold, for the per-segment affine form.
    base = np.zeros(n_brackets)
    for j in range(1, n_brackets):
        base[j] = base[j - 1] + rates[j - 1] * (thresholds[j] - thresholds[j - 1])

    # Labor knots: segment k spans incomes inside bracket k. Zero-skill
    # workers collapse every interior knot to the top of the labor range.
    knots = np.empty((n, n_brackets + 1))
    knots[:, 0] = labor_lo
    safe_skills = np.where(skills > 0.0, skills, 1.0)
    for j in range(1, n_brackets):
        cut = np.where(skills > 0.0, thresholds[j] / safe_skills, np.inf)
        knots[:, j] = np.clip(cut, labor_lo, labor_hi)
    knots[:, n_brackets] = labor_hi

    seg_c1 = skills[:, None] * (1.0 - rates[None, :])
    seg_c0 = (rates[None, :] * thresholds[None, :] - base[None, :]) + rebate

    # Golden section over all (worker, segment) lanes at once; ties send the
    # search left, biasing flat objectives toward smaller labor.
    a = knots[:, :-1].copy()
    b = knots[:, 1:].copy()
    for _ in range(_GSS_ITERS):
        c = a + _INVPHI2 * (b - a)
        d = a + _INVPHI * (b - a)
        fc = _segment_utility(c, seg_c0, seg_c1, eta, psi, delta)
        fd = _segment_utility(d, seg_c0, seg_c1, eta, psi, delta)
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    interior = 0.5 * (a + b)

    # Candidates ascend: knot_0, gss_0, knot_1, gss_1, ..., knot_B. First
    # argmax hit wins, so exact ties already favor smaller labor.
    cand = np.empty((n, 2 * n_brackets + 1))
    cand[:, 0::2] = knots
    cand[:, 1::2] = interior
    z = skills[:, None] * cand
    util = (_consumption_term(z - tax_due_many(thresholds, rates, z) + rebate, eta)
            - psi * np.power(cand, delta))
    pick = np.argmax(util, axis=1)
    return cand[np.arange(n), pick]


def best_response(skill, thresholds, rates, rebate, eta, psi, delta,
                  labor_lo, labor_hi):
    out = best_response_many(
        np.array([skill], dtype=np.float64), thresholds, rates, rebate,
        eta, psi, delta, labor_lo, labor_hi)
    return float(out[0])
