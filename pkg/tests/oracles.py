"""Independent reference computations used only by the tests."""

import itertools
import math

import numpy as np


def cusum_chain_expectation(p_up: float, levels: int) -> float:
    """Expected CUSUM stopping time for +/-1 increments, exact.

    Increments are +1 with probability ``p_up`` and -1 otherwise; the
    statistic stops once it reaches ``levels``.  States are the floored
    statistic ``max(S, 0)`` in ``0..levels-1``; solves ``(I - Q) E = 1``.
    """
    n = levels
    A = np.eye(n)
    for s in range(n):
        if s + 1 < levels:
            A[s, s + 1] -= p_up
        A[s, max(s - 1, 0)] -= 1.0 - p_up
    return float(np.linalg.solve(A, np.ones(n))[0])


def max_suffix_sums(zs):
    """S_k for every k by enumerating all start points."""
    out = []
    for k in range(1, len(zs) + 1):
        out.append(max(math.fsum(zs[n:k]) for n in range(k)))
    return out


def grid_extremes(f, lower, upper, step=0.01):
    """Min and max of ``f`` over a dense grid of a bounded 2-d box."""
    xs = np.arange(lower[0], upper[0] + step / 2, step)
    ys = np.arange(lower[1], upper[1] + step / 2, step)
    vals = [f(np.array([x, y])) for x, y in itertools.product(xs, ys)]
    return min(vals), max(vals)


def gaussian_kl_quadrature(m_p, m_q, half_width=9.0):
    """D(N(m_p, I) || N(m_q, I)) in 2-d by numerical integration."""
    from scipy import integrate

    m_p, m_q = np.asarray(m_p, float), np.asarray(m_q, float)

    def integrand(y, x):
        v = np.array([x, y])
        lp = -math.log(2 * math.pi) - 0.5 * np.sum((v - m_p) ** 2)
        lq = -math.log(2 * math.pi) - 0.5 * np.sum((v - m_q) ** 2)
        return math.exp(lp) * (lp - lq)

    val, _ = integrate.dblquad(
        integrand, m_p[0] - half_width, m_p[0] + half_width, m_p[1] - half_width, m_p[1] + half_width,
        epsabs=1e-11, epsrel=1e-11,
    )
    return val
