"""Empirical income distribution: step CDF, log-space kernel density, and
the local Pareto parameter built from both."""

import numpy as np
from scipy import stats as sps


class EmpiricalIncomeDist:
    """Sample-backed income distribution.

    The CDF is the empirical step function. The density smooths a Gaussian
    kernel (Silverman bandwidth) over log income and maps back by the
    change of variables h(z) = g(log z) / z, which keeps all mass on z > 0.
    """

    def __init__(self, incomes):
        z = np.asarray(incomes, dtype=np.float64).ravel()
        if z.size < 2:
            raise ValueError("need at least 2 incomes, got %d" % (z.size,))
        if not np.all(np.isfinite(z)) or np.any(z <= 0):
            raise ValueError("incomes must be positive and finite")
        if np.all(z == z[0]):
            raise ValueError("incomes are all identical; density is degenerate")
        self.sorted_incomes = np.sort(z)
        self._n = z.size
        log_z = np.log(self.sorted_incomes)
        self._kde = sps.gaussian_kde(log_z, bw_method="silverman")
        self.bandwidth = float(np.sqrt(self._kde.covariance[0, 0]))

    @property
    def n(self):
        return self._n

    def cdf(self, z):
        """Fraction of the sample at or below z."""
        z = np.asarray(z, dtype=np.float64)
        out = np.searchsorted(self.sorted_incomes, z, side="right") / self._n
        return float(out) if out.ndim == 0 else out

    def pdf(self, z):
        """Kernel density estimate; zero off the positive axis."""
        z = np.asarray(z, dtype=np.float64)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        out = np.zeros_like(z)
        pos = z > 0
        if np.any(pos):
            out[pos] = self._kde(np.log(z[pos])) / z[pos]
        return float(out[0]) if scalar else out

    def count_above(self, z_star):
        """Number of incomes at or above z_star."""
        idx = np.searchsorted(self.sorted_incomes, z_star, side="left")
        return int(self._n - idx)

    def mean_above(self, z_star):
        """Average income among those at or above z_star."""
        idx = np.searchsorted(self.sorted_incomes, z_star, side="left")
        if idx >= self._n:
            raise ValueError("no incomes at or above %r" % (z_star,))
        return float(self.sorted_incomes[idx:].mean())


def pareto_parameter(z, dist):
    """Local Pareto parameter a(z) = z h(z) / (1 - H(z)).

    Undefined at or above the top sample income, where 1 - H(z) = 0.
    """
    z = float(z)
    if z <= 0:
        raise ValueError("z must be positive, got %r" % (z,))
    tail = 1.0 - dist.cdf(z)
    if tail <= 0.0:
        raise ValueError("z=%r is at or above the sample support" % (z,))
    return z * dist.pdf(z) / tail
