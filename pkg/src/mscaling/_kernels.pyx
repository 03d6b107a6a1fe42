# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Must stay numerically equivalent to ``_kernels_py``."""
import numpy as np

from libc.math cimport exp, fabs, log


def structure_function(const double[::1] log_prices, const long[::1] taus,
                       const double[::1] qs, bint overlapping=True,
                       double q_step=0.0):
    """Sample mean of ``|p[t+tau] - p[t]|**q`` for every (tau, q).

    When ``q_step > 0`` the moment grid is assumed uniform with that step and
    successive powers are built by repeated multiplication (one ``exp`` pair
    per sample instead of one per moment).
    """
    cdef Py_ssize_t n = log_prices.shape[0]
    cdef Py_ssize_t n_tau = taus.shape[0]
    cdef Py_ssize_t n_q = qs.shape[0]
    cdef Py_ssize_t i, j, t, tau, stride, count
    cdef double a, la, v, mult
    cdef double q0 = qs[0]

    out_arr = np.zeros((n_tau, n_q), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    acc_arr = np.zeros(n_q, dtype=np.float64)
    cdef double[::1] acc = acc_arr

    for i in range(n_tau):
        tau = taus[i]
        stride = 1 if overlapping else tau
        for j in range(n_q):
            acc[j] = 0.0
        count = 0
        t = 0
        while t + tau < n:
            a = fabs(log_prices[t + tau] - log_prices[t])
            count += 1
            t += stride
            if a == 0.0:
                continue
            la = log(a)
            if q_step > 0.0:
                v = exp(q0 * la)
                mult = exp(q_step * la)
                for j in range(n_q):
                    acc[j] += v
                    v *= mult
            else:
                for j in range(n_q):
                    acc[j] += exp(qs[j] * la)
        for j in range(n_q):
            out[i, j] = acc[j] / count if count > 0 else np.nan
    return out_arr
