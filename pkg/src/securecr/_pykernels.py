"""Pure-Python rate kernel; reference twin of ``_ckernels.pyx``.

Both backends expose :class:`RateKernel` with identical semantics. Keep the
arithmetic in the same order in both files so results agree to rounding.
"""

import math

INV_LN2 = 1.0 / math.log(2.0)
SILENT_TOL = 1e-12
NEG_INF = float("-inf")


def cap(x):
    return math.log1p(x) * INV_LN2


class RateKernel:
    """Scalar evaluation of the AWGN rate and constraint expressions.

    ``a`` and ``b`` are the T2->U1 and T2->U2 gains already multiplied by the
    relay phase rotation; ``g21``/``g22`` are their squared magnitudes.
    """

    def __init__(self, c11, c12, a, b, p1, rel_rhs, sec_rhs, rs1_rhs,
                 n_scan=200, tol=1e-8, rel_tol=1e-6):
        self.c11r, self.c11i = c11.real, c11.imag
        self.c12r, self.c12i = c12.real, c12.imag
        self.ar, self.ai = a.real, a.imag
        self.br, self.bi = b.real, b.imag
        self.g21 = a.real * a.real + a.imag * a.imag
        self.g22 = b.real * b.real + b.imag * b.imag
        self.p1 = p1
        self.rel_rhs = rel_rhs
        self.sec_rhs = sec_rhs
        self.rs1_rhs = rs1_rhs
        self.n_scan = n_scan
        self.tol = tol
        self.rel_tol = rel_tol

    def _boost(self, relay_power):
        k = math.sqrt(relay_power / self.p1)
        d_r = self.c11r + self.ar * k
        d_i = self.c11i + self.ai * k
        e_r = self.c12r + self.br * k
        e_i = self.c12i + self.bi * k
        return d_r * d_r + d_i * d_i, e_r * e_r + e_i * e_i

    # DPC ---------------------------------------------------------------

    def _dpc_sec(self, eta2, eta3, rho2, rho3, gamma, p22, p23):
        _, e2 = self._boost((1.0 - rho2) * gamma * p22)
        _, e3 = self._boost((1.0 - rho3) * p23)
        pu2 = (1.0 - rho2) * (1.0 - gamma) * p22
        lhs = (eta2 * cap(e2 * self.p1 / (1.0 + self.g22 * (rho2 * p22 + pu2)))
               + eta3 * cap(e3 * self.p1 / (1.0 + self.g22 * rho3 * p23)))
        return lhs - self.sec_rhs

    def _dpc_rel(self, eta2, eta3, rho2, rho3, gamma, p22, p23):
        d2, _ = self._boost((1.0 - rho2) * gamma * p22)
        d3, _ = self._boost((1.0 - rho3) * p23)
        pu2 = (1.0 - rho2) * (1.0 - gamma) * p22
        lhs = (eta2 * cap(d2 * self.p1 / (1.0 + self.g21 * (rho2 * p22 + pu2)))
               + eta3 * cap(d3 * self.p1 / (1.0 + self.g21 * rho3 * p23)))
        return lhs - self.rel_rhs

    def dpc_r2(self, eta2, rho2, gamma, p22):
        pu2 = (1.0 - rho2) * (1.0 - gamma) * p22
        return eta2 * cap(self.g22 * pu2 / (1.0 + self.g22 * rho2 * p22))

    def dpc_eval(self, eta2, eta3, rho2, rho3, gamma, p22, p23):
        """Return ``(r2, reliability residual, secrecy residual)``."""
        return (self.dpc_r2(eta2, rho2, gamma, p22),
                self._dpc_rel(eta2, eta3, rho2, rho3, gamma, p22, p23),
                self._dpc_sec(eta2, eta3, rho2, rho3, gamma, p22, p23))

    def _bisect_sec(self, lo, f_lo, hi, eta2, eta3, rho2, rho3, p22, p23):
        mid = 0.5 * (lo + hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = self._dpc_sec(eta2, eta3, rho2, rho3, mid, p22, p23)
            if abs(fm) <= self.tol:
                return mid
            if (fm < 0.0) == (f_lo < 0.0):
                lo, f_lo = mid, fm
            else:
                hi = mid
            if hi - lo <= 1e-16:
                break
        fm = self._dpc_sec(eta2, eta3, rho2, rho3, mid, p22, p23)
        return mid if abs(fm) <= self.tol else -1.0

    def dpc_resolve(self, eta2, eta3, rho2, rho3, p22, p23):
        """Smallest gamma in [0, 1] zeroing the secrecy residual with the
        reliability slack satisfied; -1 when none exists."""
        n = self.n_scan
        step = 1.0 / (n - 1)
        prev = self._dpc_sec(eta2, eta3, rho2, rho3, 0.0, p22, p23)
        flat = abs(prev) <= SILENT_TOL
        i = 1
        while flat and i < n:
            if abs(self._dpc_sec(eta2, eta3, rho2, rho3, i * step, p22, p23)) > SILENT_TOL:
                flat = False
            i += 1
        if flat:
            if self._dpc_rel(eta2, eta3, rho2, rho3, 0.0, p22, p23) >= -self.rel_tol:
                return 0.0
            return -1.0
        g_prev = 0.0
        for i in range(n):
            g = i * step if i < n - 1 else 1.0
            v = prev if i == 0 else self._dpc_sec(eta2, eta3, rho2, rho3, g, p22, p23)
            if abs(v) <= self.tol:
                if self._dpc_rel(eta2, eta3, rho2, rho3, g, p22, p23) >= -self.rel_tol:
                    return g
            elif i > 0 and abs(prev) > self.tol and (v < 0.0) != (prev < 0.0):
                root = self._bisect_sec(g_prev, prev, g, eta2, eta3, rho2, rho3, p22, p23)
                if root >= 0.0 and self._dpc_rel(eta2, eta3, rho2, rho3, root, p22, p23) >= -self.rel_tol:
                    return root
            prev, g_prev = v, g
        return -1.0

    def dpc_violation(self, eta2, eta3, rho2, rho3, p22, p23):
        """Distance from feasibility used to steer searches back into the
        feasible set: smallest ``|sec| + max(0, -rel)`` over the gamma scan."""
        n = self.n_scan
        step = 1.0 / (n - 1)
        best = float("inf")
        for i in range(n):
            g = i * step if i < n - 1 else 1.0
            rel = self._dpc_rel(eta2, eta3, rho2, rho3, g, p22, p23)
            v = abs(self._dpc_sec(eta2, eta3, rho2, rho3, g, p22, p23))
            if rel < 0.0:
                v -= rel
            if v < best:
                best = v
        return best

    def dpc_point(self, eta2, eta3, rho2, rho3, p22, p23):
        """Resolve gamma and return ``(r2, gamma)``; ``(-inf, -1)`` when infeasible."""
        gamma = self.dpc_resolve(eta2, eta3, rho2, rho3, p22, p23)
        if gamma < 0.0:
            return NEG_INF, -1.0
        return self.dpc_r2(eta2, rho2, gamma, p22), gamma

    # no DPC ------------------------------------------------------------

    def nodpc_eval(self, eta2, eta3, rho2, rho3, gamma, p22, p23):
        """Return ``(r2, secrecy slack)``; the slack must be >= 0."""
        d2, e2 = self._boost((1.0 - rho2) * gamma * p22)
        d3, e3 = self._boost((1.0 - rho3) * p23)
        p1 = self.p1
        r2 = eta2 * cap(self.g22 * (1.0 - rho2) * (1.0 - gamma) * p22
                        / (1.0 + self.g22 * rho2 * p22 + e2 * p1))
        lhs = (eta2 * (cap(d2 * p1 / (1.0 + self.g21 * (1.0 - gamma + gamma * rho2) * p22))
                       - cap(e2 * p1 / (1.0 + self.g22 * rho2 * p22)))
               + eta3 * (cap(d3 * p1 / (1.0 + self.g21 * rho3 * p23))
                         - cap(e3 * p1 / (1.0 + self.g22 * rho3 * p23))))
        if lhs < 0.0:
            lhs = 0.0
        return r2, lhs - self.rs1_rhs

    def _nodpc_slack(self, eta2, eta3, rho2, rho3, gamma, p22, p23):
        return self.nodpc_eval(eta2, eta3, rho2, rho3, gamma, p22, p23)[1]

    def nodpc_resolve(self, eta2, eta3, rho2, rho3, p22, p23):
        """Smallest gamma in [0, 1] with nonnegative secrecy slack; -1 when none."""
        n = self.n_scan
        step = 1.0 / (n - 1)
        if self._nodpc_slack(eta2, eta3, rho2, rho3, 0.0, p22, p23) >= -SILENT_TOL:
            return 0.0
        g_prev = 0.0
        for i in range(1, n):
            g = i * step if i < n - 1 else 1.0
            if self._nodpc_slack(eta2, eta3, rho2, rho3, g, p22, p23) >= 0.0:
                lo, hi = g_prev, g
                for _ in range(200):
                    if hi - lo <= 1e-12:
                        break
                    mid = 0.5 * (lo + hi)
                    if self._nodpc_slack(eta2, eta3, rho2, rho3, mid, p22, p23) >= 0.0:
                        hi = mid
                    else:
                        lo = mid
                return hi
            g_prev = g
        return -1.0

    def nodpc_violation(self, eta2, eta3, rho2, rho3, p22, p23):
        """Shortfall of the best secrecy slack over the gamma scan (0 when feasible)."""
        n = self.n_scan
        step = 1.0 / (n - 1)
        best = float("-inf")
        for i in range(n):
            g = i * step if i < n - 1 else 1.0
            v = self._nodpc_slack(eta2, eta3, rho2, rho3, g, p22, p23)
            if v > best:
                best = v
        return -best if best < 0.0 else 0.0

    def nodpc_point(self, eta2, eta3, rho2, rho3, p22, p23):
        gamma = self.nodpc_resolve(eta2, eta3, rho2, rho3, p22, p23)
        if gamma < 0.0:
            return NEG_INF, -1.0
        return self.nodpc_eval(eta2, eta3, rho2, rho3, gamma, p22, p23)[0], gamma
