# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled CTDS kernels. Mirrors ``_pykernels`` function for function."""

import numpy as np
from libc.math cimport fabs, sqrt, ldexp, isfinite
from libc.stdlib cimport malloc, calloc, free

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil

DEF NSTAGE = 6

CONSTANT = 0
EXPONENTIAL = 1
SATURATING = 2
DELAYED = 3

cdef double[6][5] _A = [
    [0, 0, 0, 0, 0],
    [1.0 / 5, 0, 0, 0, 0],
    [3.0 / 40, 9.0 / 40, 0, 0, 0],
    [3.0 / 10, -9.0 / 10, 6.0 / 5, 0, 0],
    [-11.0 / 54, 5.0 / 2, -70.0 / 27, 35.0 / 27, 0],
    [1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592, 253.0 / 4096],
]
cdef double[6] _B5 = [37.0 / 378, 0, 250.0 / 621, 125.0 / 594, 0, 512.0 / 1771]
cdef double[6] _B4 = [2825.0 / 27648, 0, 18575.0 / 48384, 13525.0 / 55296,
                      277.0 / 14336, 1.0 / 4]


cdef class FieldKernel:
    """CTDS vector field over a packed formula (see ``_pykernels.FieldKernel``)."""

    cdef readonly int n, m, kmax
    cdef const int[::1] start
    cdef const int[::1] var
    cdef const double[::1] sign
    cdef double[::1] sufbuf
    cdef double[:, ::1] stages
    cdef double[::1] ytmp

    def __init__(self, start, var, sign, n):
        self.start = np.ascontiguousarray(start, dtype=np.int32)
        self.var = np.ascontiguousarray(var, dtype=np.int32)
        self.sign = np.ascontiguousarray(sign, dtype=np.float64)
        self.n = n
        self.m = len(start) - 1
        lengths = np.diff(np.asarray(start))
        self.kmax = int(lengths.max()) if self.m else 0
        self.sufbuf = np.empty(self.kmax + 1)
        self.stages = np.empty((NSTAGE, self.n + self.m))
        self.ytmp = np.empty(self.n + self.m)

    cdef void _field(self, const double* y, double* dy, int mode, double a_max, double q,
                     const double* klag, double w, bint freeze_s) noexcept nogil:
        cdef int n = self.n, c, j, b, e, k, jj
        cdef double prod, K, am, coef, da, scale
        cdef double* suf = &self.sufbuf[0]
        for j in range(n):
            dy[j] = 0.0
        for c in range(self.m):
            b = self.start[c]
            e = self.start[c + 1]
            k = e - b
            suf[k] = 1.0
            for jj in range(k - 1, -1, -1):
                suf[jj] = suf[jj + 1] * (1.0 - self.sign[b + jj] * y[self.var[b + jj]])
            scale = ldexp(1.0, -k)
            K = scale * suf[0]
            am = y[n + c]
            if not freeze_s:
                coef = 2.0 * am * K * scale
                prod = 1.0
                for jj in range(k):
                    dy[self.var[b + jj]] += coef * self.sign[b + jj] * prod * suf[jj + 1]
                    prod *= 1.0 - self.sign[b + jj] * y[self.var[b + jj]]
            if mode == 1:
                da = am * K
            elif mode == 2:
                da = q * K * (a_max - am)
            elif mode == 3:
                if klag == NULL or w == 0.0:
                    da = am * K
                else:
                    da = am * (K - w * klag[c])
            else:
                da = 0.0
            if da > 0.0 and am >= a_max:
                da = 0.0
            dy[n + c] = da

    def field(self, const double[::1] y, int mode=1, double a_max=np.inf, double q=1.0,
              klag=None, double w=0.0, bint freeze_s=False):
        out = np.empty(self.n + self.m)
        cdef double[::1] o = out
        cdef const double[::1] kl
        cdef const double* klp = NULL
        if klag is not None:
            kl = np.ascontiguousarray(klag, dtype=np.float64)
            klp = &kl[0] if self.m else NULL
        if self.n + self.m:
            with nogil:
                self._field(&y[0], &o[0], mode, a_max, q, klp, w, freeze_s)
        return out

    def cash_karp(self, const double[::1] y, const double[::1] f0, double h, int mode=1,
                  double a_max=np.inf, double q=1.0, klag=None, w=None,
                  double atol=1e-6, double rtol=1e-6, bint freeze_s=False):
        cdef int d = self.n + self.m, i, j, l
        cdef const double[:, ::1] kl
        cdef double[6] wv
        cdef const double* klp
        cdef bint has_lag = klag is not None
        cdef double acc, err, sc, ynew, tot = 0.0
        y5 = np.empty(d)
        cdef double[::1] out = y5
        if has_lag:
            kl = np.ascontiguousarray(klag, dtype=np.float64)
        for i in range(NSTAGE):
            wv[i] = 0.0 if w is None else float(w[i])
        if d == 0:
            return y5, 0.0
        with nogil:
            for j in range(d):
                self.stages[0, j] = f0[j]
            for i in range(1, NSTAGE):
                for j in range(d):
                    acc = 0.0
                    for l in range(i):
                        acc = acc + _A[i][l] * self.stages[l, j]
                    self.ytmp[j] = y[j] + h * acc
                klp = &kl[i, 0] if (has_lag and self.m) else NULL
                self._field(&self.ytmp[0], &self.stages[i, 0], mode, a_max, q, klp,
                            wv[i], freeze_s)
            for j in range(d):
                acc = 0.0
                err = 0.0
                for l in range(NSTAGE):
                    acc = acc + _B5[l] * self.stages[l, j]
                    err = err + (_B5[l] - _B4[l]) * self.stages[l, j]
                ynew = y[j] + h * acc
                out[j] = ynew
                sc = atol + rtol * (fabs(y[j]) if fabs(y[j]) > fabs(ynew) else fabs(ynew))
                err = h * err / sc
                tot += err * err
        return y5, sqrt(tot / d)

    def clause_values(self, s):
        cdef const double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
        out = np.empty(self.m)
        cdef double[::1] o = out
        cdef int c, j
        cdef double prod
        with nogil:
            for c in range(self.m):
                prod = 1.0
                for j in range(self.start[c], self.start[c + 1]):
                    prod *= 1.0 - self.sign[j] * sv[self.var[j]]
                o[c] = ldexp(prod, -(self.start[c + 1] - self.start[c]))
        return out

    def satisfied(self, s):
        cdef const double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
        out = np.zeros(self.m, dtype=bool)
        cdef unsigned char[::1] o = out.view(np.uint8)
        cdef int c, j
        with nogil:
            for c in range(self.m):
                for j in range(self.start[c], self.start[c + 1]):
                    if (self.sign[j] > 0) == (sv[self.var[j]] > 0.0):
                        o[c] = 1
                        break
        return out

    def accept(self, double[::1] y, double a_max=np.inf):
        cdef int n = self.n, c, j, unsat = 0
        cdef double peak = 0.0, V = 0.0, prod, K
        cdef bint sat, clamp_a = isfinite(a_max)
        with nogil:
            for j in range(n):
                if fabs(y[j]) > peak:
                    peak = fabs(y[j])
                if y[j] > 1.0:
                    y[j] = 1.0
                elif y[j] < -1.0:
                    y[j] = -1.0
            for c in range(self.m):
                if clamp_a and y[n + c] > a_max:
                    y[n + c] = a_max
                prod = 1.0
                sat = False
                for j in range(self.start[c], self.start[c + 1]):
                    prod *= 1.0 - self.sign[j] * y[self.var[j]]
                    if (self.sign[j] > 0) == (y[self.var[j]] > 0.0):
                        sat = True
                K = ldexp(prod, -(self.start[c + 1] - self.start[c]))
                V += y[n + c] * K * K
                if not sat:
                    unsat += 1
        return peak, V, unsat


def maxsat_enumerate(int n, occ_start, occ_clause, occ_sign, int m):
    """Gray-code exhaustive MaxSAT scan; returns ``(min_unsat, witness_as_int)``."""
    cdef const int[::1] ostart = np.ascontiguousarray(occ_start, dtype=np.int32)
    cdef const int[::1] oclause = np.ascontiguousarray(occ_clause, dtype=np.int32)
    cdef const int[::1] osign = np.ascontiguousarray(occ_sign, dtype=np.int32)
    if m == 0:
        return 0, 0
    cdef int* nsat = <int*> calloc(m, sizeof(int))
    if nsat == NULL:
        raise MemoryError()
    cdef unsigned long long g, x = 0, witness = 0, total = 1ULL << n
    cdef int v, j, cl, unsat = 0, best
    cdef bint bit
    with nogil:
        for v in range(n):
            for j in range(ostart[v], ostart[v + 1]):
                if osign[j] < 0:
                    nsat[oclause[j]] += 1
        for cl in range(m):
            if nsat[cl] == 0:
                unsat += 1
        best = unsat
        g = 1
        while g < total and best > 0:
            v = __builtin_ctzll(g)
            x ^= 1ULL << v
            bit = (x >> v) & 1
            for j in range(ostart[v], ostart[v + 1]):
                cl = oclause[j]
                if (osign[j] > 0) == bit:
                    if nsat[cl] == 0:
                        unsat -= 1
                    nsat[cl] += 1
                else:
                    nsat[cl] -= 1
                    if nsat[cl] == 0:
                        unsat += 1
            if unsat < best:
                best = unsat
                witness = x
            g += 1
    free(nsat)
    return best, witness
