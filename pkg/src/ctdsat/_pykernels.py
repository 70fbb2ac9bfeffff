"""Pure numpy kernels; API-compatible with the compiled ``_ckernels`` module."""

import numpy as np

CONSTANT, EXPONENTIAL, SATURATING, DELAYED = 0, 1, 2, 3

# Cash-Karp 5(4) tableau
C = np.array([0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8])
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
B5 = np.array([37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771])
B4 = np.array([2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4])
E = B5 - B4


class FieldKernel:
    """CTDS vector field over a packed formula.

    ``y`` is the concatenated state ``(s_0..s_{N-1}, a_0..a_{M-1})``.
    """

    def __init__(self, start, var, sign, n):
        start = np.asarray(start, dtype=np.int64)
        self.n = int(n)
        self.m = len(start) - 1
        lengths = np.diff(start)
        kmax = int(lengths.max()) if self.m else 0
        self.idx = np.zeros((self.m, kmax), dtype=np.int64)
        self.c = np.zeros((self.m, kmax))
        for j in range(kmax):
            rows = np.nonzero(lengths > j)[0]
            self.idx[rows, j] = np.asarray(var)[start[rows] + j]
            self.c[rows, j] = np.asarray(sign)[start[rows] + j]
        self.scale = np.ldexp(1.0, -lengths.astype(np.int64)) if self.m else np.zeros(0)
        self._flat_idx = self.idx.ravel()

    def clause_values(self, s):
        s = np.asarray(s, dtype=np.float64)
        return self.scale * np.prod(1.0 - self.c * s[self.idx], axis=1)

    def field(self, y, mode=EXPONENTIAL, a_max=np.inf, q=1.0, klag=None, w=0.0,
              freeze_s=False):
        n = self.n
        s, a = y[:n], y[n:]
        out = np.empty_like(y)
        if self.m == 0:
            out[:] = 0.0
            return out
        fac = 1.0 - self.c * s[self.idx]
        pre = np.ones_like(fac)
        suf = np.ones_like(fac)
        if fac.shape[1] > 1:
            pre[:, 1:] = np.cumprod(fac[:, :-1], axis=1)
            suf[:, :-1] = np.cumprod(fac[:, :0:-1], axis=1)[:, ::-1]
        K = self.scale * (fac[:, 0] * suf[:, 0])
        if freeze_s:
            out[:n] = 0.0
        else:
            contrib = (2.0 * a * K * self.scale)[:, None] * self.c * pre * suf
            out[:n] = np.bincount(self._flat_idx, weights=contrib.ravel(), minlength=n)
        if mode == CONSTANT:
            da = np.zeros(self.m)
        elif mode == EXPONENTIAL:
            da = a * K
        elif mode == SATURATING:
            da = q * K * (a_max - a)
        elif mode == DELAYED:
            da = a * K if klag is None or w == 0.0 else a * (K - w * klag)
        else:
            raise ValueError(f"unknown mode {mode}")
        da[(da > 0.0) & (a >= a_max)] = 0.0
        out[n:] = da
        return out

    def cash_karp(self, y, f0, h, mode=EXPONENTIAL, a_max=np.inf, q=1.0, klag=None,
                  w=None, atol=1e-6, rtol=1e-6, freeze_s=False):
        """One Cash-Karp trial step; returns ``(y5, scaled_rms_error)``.

        ``klag`` is an optional (6, M) array of lagged clause values, one row
        per stage, weighted by ``w[stage]``.
        """
        ks = [f0]
        for i in range(1, 6):
            yi = y + h * sum(aij * kj for aij, kj in zip(A[i], ks))
            kl = None if klag is None else klag[i]
            wi = 0.0 if w is None else w[i]
            ks.append(self.field(yi, mode, a_max, q, kl, wi, freeze_s))
        y5 = y + h * sum(b * k for b, k in zip(B5, ks) if b != 0.0)
        err = h * sum(e * k for e, k in zip(E, ks) if e != 0.0)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        return y5, float(np.sqrt(np.mean((err / scale) ** 2)))

    def accept(self, y, a_max=np.inf):
        """Clamp ``y`` in place; returns ``(peak |s| before clamp, V, unsat)``."""
        n = self.n
        s = y[:n]
        peak = float(np.max(np.abs(s))) if n else 0.0
        np.clip(s, -1.0, 1.0, out=s)
        if np.isfinite(a_max):
            np.minimum(y[n:], a_max, out=y[n:])
        if self.m == 0:
            return peak, 0.0, 0
        K = self.clause_values(s)
        V = float(np.dot(y[n:], K * K))
        return peak, V, int(np.count_nonzero(~self.satisfied(s)))

    def satisfied(self, s):
        """Per-clause digital satisfaction of the thresholded assignment ``s > 0``."""
        bits = np.asarray(s)[self.idx] > 0.0
        return np.any(((self.c > 0) & bits) | ((self.c < 0) & ~bits), axis=1)


def maxsat_enumerate(n, occ_start, occ_clause, occ_sign, m):
    """Exhaustive MaxSAT scan; returns ``(min_unsat, witness_as_int)``."""
    occ_start = np.asarray(occ_start)
    occ_clause = np.asarray(occ_clause)
    occ_sign = np.asarray(occ_sign)
    if m == 0:
        return 0, 0
    # clause-major literal lists rebuilt from the occurrence lists
    lits: list[list[tuple[int, int]]] = [[] for _ in range(m)]
    for v in range(n):
        for j in range(occ_start[v], occ_start[v + 1]):
            lits[occ_clause[j]].append((v, occ_sign[j]))
    best, witness = m + 1, 0
    chunk_bits = min(n, 16)
    low = np.arange(1 << chunk_bits, dtype=np.int64)
    for high in range(1 << (n - chunk_bits)):
        x = low | (high << chunk_bits)
        unsat = np.zeros(x.shape, dtype=np.int32)
        for clause in lits:
            sat = np.zeros(x.shape, dtype=bool)
            for v, p in clause:
                bit = (x >> v) & 1
                sat |= bit == (1 if p > 0 else 0)
            unsat += ~sat
        j = int(np.argmin(unsat))
        if unsat[j] < best:
            best, witness = int(unsat[j]), int(x[j])
            if best == 0:
                break
    return best, witness
