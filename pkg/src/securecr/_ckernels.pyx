# cython: language_level=3
"""Compiled rate kernel; see ``_pykernels.py`` for the reference semantics."""

from libc.math cimport log1p, sqrt, fabs, INFINITY

cdef double INV_LN2 = 1.4426950408889634
cdef double SILENT_TOL = 1e-12


cdef inline double cap(double x) nogil:
    return log1p(x) * INV_LN2


cdef class RateKernel:
    cdef public double c11r, c11i, c12r, c12i, ar, ai, br, bi, g21, g22
    cdef public double p1, rel_rhs, sec_rhs, rs1_rhs, tol, rel_tol
    cdef public int n_scan

    def __init__(self, c11, c12, a, b, double p1, double rel_rhs, double sec_rhs,
                 double rs1_rhs, int n_scan=200, double tol=1e-8, double rel_tol=1e-6):
        self.c11r = c11.real
        self.c11i = c11.imag
        self.c12r = c12.real
        self.c12i = c12.imag
        self.ar = a.real
        self.ai = a.imag
        self.br = b.real
        self.bi = b.imag
        self.g21 = self.ar * self.ar + self.ai * self.ai
        self.g22 = self.br * self.br + self.bi * self.bi
        self.p1 = p1
        self.rel_rhs = rel_rhs
        self.sec_rhs = sec_rhs
        self.rs1_rhs = rs1_rhs
        self.n_scan = n_scan
        self.tol = tol
        self.rel_tol = rel_tol

    cdef inline double _direct(self, double relay_power) nogil:
        cdef double k = sqrt(relay_power / self.p1)
        cdef double d_r = self.c11r + self.ar * k
        cdef double d_i = self.c11i + self.ai * k
        return d_r * d_r + d_i * d_i

    cdef inline double _eaves(self, double relay_power) nogil:
        cdef double k = sqrt(relay_power / self.p1)
        cdef double e_r = self.c12r + self.br * k
        cdef double e_i = self.c12i + self.bi * k
        return e_r * e_r + e_i * e_i

    # DPC ---------------------------------------------------------------

    cdef double _dpc_sec(self, double eta2, double eta3, double rho2, double rho3,
                         double gamma, double p22, double p23) nogil:
        cdef double e2 = self._eaves((1.0 - rho2) * gamma * p22)
        cdef double e3 = self._eaves((1.0 - rho3) * p23)
        cdef double pu2 = (1.0 - rho2) * (1.0 - gamma) * p22
        cdef double lhs = (eta2 * cap(e2 * self.p1 / (1.0 + self.g22 * (rho2 * p22 + pu2)))
                           + eta3 * cap(e3 * self.p1 / (1.0 + self.g22 * rho3 * p23)))
        return lhs - self.sec_rhs

    cdef double _dpc_rel(self, double eta2, double eta3, double rho2, double rho3,
                         double gamma, double p22, double p23) nogil:
        cdef double d2 = self._direct((1.0 - rho2) * gamma * p22)
        cdef double d3 = self._direct((1.0 - rho3) * p23)
        cdef double pu2 = (1.0 - rho2) * (1.0 - gamma) * p22
        cdef double lhs = (eta2 * cap(d2 * self.p1 / (1.0 + self.g21 * (rho2 * p22 + pu2)))
                           + eta3 * cap(d3 * self.p1 / (1.0 + self.g21 * rho3 * p23)))
        return lhs - self.rel_rhs

    cpdef double dpc_r2(self, double eta2, double rho2, double gamma, double p22):
        cdef double pu2 = (1.0 - rho2) * (1.0 - gamma) * p22
        return eta2 * cap(self.g22 * pu2 / (1.0 + self.g22 * rho2 * p22))

    def dpc_eval(self, double eta2, double eta3, double rho2, double rho3,
                 double gamma, double p22, double p23):
        return (self.dpc_r2(eta2, rho2, gamma, p22),
                self._dpc_rel(eta2, eta3, rho2, rho3, gamma, p22, p23),
                self._dpc_sec(eta2, eta3, rho2, rho3, gamma, p22, p23))

    cdef double _bisect_sec(self, double lo, double f_lo, double hi, double eta2, double eta3,
                            double rho2, double rho3, double p22, double p23) nogil:
        cdef double mid = 0.5 * (lo + hi)
        cdef double fm
        cdef int it
        for it in range(200):
            mid = 0.5 * (lo + hi)
            fm = self._dpc_sec(eta2, eta3, rho2, rho3, mid, p22, p23)
            if fabs(fm) <= self.tol:
                return mid
            if (fm < 0.0) == (f_lo < 0.0):
                lo = mid
                f_lo = fm
            else:
                hi = mid
            if hi - lo <= 1e-16:
                break
        fm = self._dpc_sec(eta2, eta3, rho2, rho3, mid, p22, p23)
        if fabs(fm) <= self.tol:
            return mid
        return -1.0

    cpdef double dpc_resolve(self, double eta2, double eta3, double rho2, double rho3,
                             double p22, double p23):
        cdef int n = self.n_scan
        cdef double step = 1.0 / (n - 1)
        cdef double prev = self._dpc_sec(eta2, eta3, rho2, rho3, 0.0, p22, p23)
        cdef bint flat = fabs(prev) <= SILENT_TOL
        cdef int i = 1
        cdef double g, v, g_prev, root
        while flat and i < n:
            if fabs(self._dpc_sec(eta2, eta3, rho2, rho3, i * step, p22, p23)) > SILENT_TOL:
                flat = False
            i += 1
        if flat:
            if self._dpc_rel(eta2, eta3, rho2, rho3, 0.0, p22, p23) >= -self.rel_tol:
                return 0.0
            return -1.0
        g_prev = 0.0
        for i in range(n):
            g = i * step if i < n - 1 else 1.0
            if i == 0:
                v = prev
            else:
                v = self._dpc_sec(eta2, eta3, rho2, rho3, g, p22, p23)
            if fabs(v) <= self.tol:
                if self._dpc_rel(eta2, eta3, rho2, rho3, g, p22, p23) >= -self.rel_tol:
                    return g
            elif i > 0 and fabs(prev) > self.tol and (v < 0.0) != (prev < 0.0):
                root = self._bisect_sec(g_prev, prev, g, eta2, eta3, rho2, rho3, p22, p23)
                if root >= 0.0 and self._dpc_rel(eta2, eta3, rho2, rho3, root, p22, p23) >= -self.rel_tol:
                    return root
            prev = v
            g_prev = g
        return -1.0

    cpdef double dpc_violation(self, double eta2, double eta3, double rho2, double rho3,
                               double p22, double p23):
        cdef int n = self.n_scan
        cdef double step = 1.0 / (n - 1)
        cdef double best = INFINITY
        cdef double g, rel, v
        cdef int i
        for i in range(n):
            g = i * step if i < n - 1 else 1.0
            rel = self._dpc_rel(eta2, eta3, rho2, rho3, g, p22, p23)
            v = fabs(self._dpc_sec(eta2, eta3, rho2, rho3, g, p22, p23))
            if rel < 0.0:
                v -= rel
            if v < best:
                best = v
        return best

    def dpc_point(self, double eta2, double eta3, double rho2, double rho3,
                  double p22, double p23):
        cdef double gamma = self.dpc_resolve(eta2, eta3, rho2, rho3, p22, p23)
        if gamma < 0.0:
            return -INFINITY, -1.0
        return self.dpc_r2(eta2, rho2, gamma, p22), gamma

    # no DPC ------------------------------------------------------------

    cdef double _nodpc_r2(self, double eta2, double rho2, double gamma, double p22) nogil:
        cdef double e2 = self._eaves((1.0 - rho2) * gamma * p22)
        return eta2 * cap(self.g22 * (1.0 - rho2) * (1.0 - gamma) * p22
                          / (1.0 + self.g22 * rho2 * p22 + e2 * self.p1))

    cdef double _nodpc_slack(self, double eta2, double eta3, double rho2, double rho3,
                             double gamma, double p22, double p23) nogil:
        cdef double relay2 = (1.0 - rho2) * gamma * p22
        cdef double relay3 = (1.0 - rho3) * p23
        cdef double d2 = self._direct(relay2)
        cdef double e2 = self._eaves(relay2)
        cdef double d3 = self._direct(relay3)
        cdef double e3 = self._eaves(relay3)
        cdef double p1 = self.p1
        cdef double lhs = (eta2 * (cap(d2 * p1 / (1.0 + self.g21 * (1.0 - gamma + gamma * rho2) * p22))
                                   - cap(e2 * p1 / (1.0 + self.g22 * rho2 * p22)))
                           + eta3 * (cap(d3 * p1 / (1.0 + self.g21 * rho3 * p23))
                                     - cap(e3 * p1 / (1.0 + self.g22 * rho3 * p23))))
        if lhs < 0.0:
            lhs = 0.0
        return lhs - self.rs1_rhs

    def nodpc_eval(self, double eta2, double eta3, double rho2, double rho3,
                   double gamma, double p22, double p23):
        return (self._nodpc_r2(eta2, rho2, gamma, p22),
                self._nodpc_slack(eta2, eta3, rho2, rho3, gamma, p22, p23))

    cpdef double nodpc_resolve(self, double eta2, double eta3, double rho2, double rho3,
                               double p22, double p23):
        cdef int n = self.n_scan
        cdef double step = 1.0 / (n - 1)
        cdef double g, g_prev, lo, hi, mid
        cdef int i, it
        if self._nodpc_slack(eta2, eta3, rho2, rho3, 0.0, p22, p23) >= -SILENT_TOL:
            return 0.0
        g_prev = 0.0
        for i in range(1, n):
            g = i * step if i < n - 1 else 1.0
            if self._nodpc_slack(eta2, eta3, rho2, rho3, g, p22, p23) >= 0.0:
                lo = g_prev
                hi = g
                for it in range(200):
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

    cpdef double nodpc_violation(self, double eta2, double eta3, double rho2, double rho3,
                                 double p22, double p23):
        cdef int n = self.n_scan
        cdef double step = 1.0 / (n - 1)
        cdef double best = -INFINITY
        cdef double g, v
        cdef int i
        for i in range(n):
            g = i * step if i < n - 1 else 1.0
            v = self._nodpc_slack(eta2, eta3, rho2, rho3, g, p22, p23)
            if v > best:
                best = v
        if best < 0.0:
            return -best
        return 0.0

    def nodpc_point(self, double eta2, double eta3, double rho2, double rho3,
                    double p22, double p23):
        cdef double gamma = self.nodpc_resolve(eta2, eta3, rho2, rho3, p22, p23)
        if gamma < 0.0:
            return -INFINITY, -1.0
        return self._nodpc_r2(eta2, rho2, gamma, p22), gamma
