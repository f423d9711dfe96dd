"""Closed-form AWGN rates for the multi-phase relaying schemes.

Phase 1 is the primary-only decoding phase of length ``eta1`` in which T2
learns the primary message. In phase 2 T2 sends its own message (optionally
dirty-paper coded against the primary signal), relays a fraction ``gamma`` of
its non-jamming power and jams with a fraction ``rho2``. Phase 3 is clean
relaying plus jamming. All rates are in bits per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channel import ChannelGains, equivalent_channels, relay_rotation
from .errors import DomainError, InfeasibleError, PreconditionError, UsageError

FEAS_TOL = 1e-6
SUM_TOL = 1e-9

TERM_NAMES = (
    "I(V1;Y1(1))",
    "I(V1;Y2(1))",
    "I(V1;Y1'(2))",
    "I(V1;Y2'(2))",
    "I(V2;Y2'(2))",
    "I(V1,V2;Y2'(2))",
    "I(V1;V2,Y2'(2))",
    "I(V1;V2)",
    "I(V1;Y1'(3))",
    "I(V1;Y2'(3))",
)


def c(x):
    """Gaussian capacity ``log2(1 + x)``; accepts scalars or arrays."""
    if np.ndim(x) == 0:
        x = float(x)
        if x < 0:
            raise DomainError(f"c(x) needs x >= 0, got {x}")
        return math.log1p(x) / math.log(2.0)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("c(x) needs x >= 0")
    return np.log1p(x) / np.log(2.0)


@dataclass(frozen=True)
class Scenario:
    """Channel gains and power budgets; ``r_s1_target`` defaults to the
    secrecy rate the primary achieves when T2 is silent."""

    gains: ChannelGains
    p1: float
    p2: float
    r_s1_target: float | None = None

    def __post_init__(self):
        if not self.p1 > 0:
            raise DomainError(f"p1 must be > 0, got {self.p1}")
        if self.p2 < 0:
            raise DomainError(f"p2 must be >= 0, got {self.p2}")
        if self.r_s1_target is None:
            g = self.gains
            base = max(0.0, c(abs(g.c11) ** 2 * self.p1) - c(abs(g.c12) ** 2 * self.p1))
            object.__setattr__(self, "r_s1_target", base)
        elif self.r_s1_target < 0:
            raise DomainError(f"r_s1_target must be >= 0, got {self.r_s1_target}")

    @property
    def r_s1_prime(self) -> float:
        """Rate of the randomization index, equal to the eavesdropper's phase-1 MI."""
        return c(abs(self.gains.c12) ** 2 * self.p1)

    def with_p2(self, p2: float) -> "Scenario":
        return replace(self, p2=p2)


@dataclass(frozen=True)
class SchemeParams:
    eta2: float
    eta3: float
    rho2: float
    rho3: float
    gamma: float
    p2_2: float
    p2_3: float

    def __post_init__(self):
        for name in ("eta2", "eta3", "p2_2", "p2_3"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not 0.0 <= self.rho2 < 1.0:
            raise DomainError(f"rho2 must lie in [0, 1), got {self.rho2}")
        if not 0.0 <= self.rho3 <= 1.0:
            raise DomainError(f"rho3 must lie in [0, 1], got {self.rho3}")
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 < self.eta1 < 1.0:
            raise DomainError(f"eta1 = 1 - eta2 - eta3 must lie in (0, 1), got {self.eta1}")

    @property
    def eta1(self) -> float:
        return 1.0 - self.eta2 - self.eta3

    @property
    def average_power(self) -> float:
        return self.eta2 * self.p2_2 + self.eta3 * self.p2_3

    @property
    def p_u2(self) -> float:
        """Power carrying T2's own message in phase 2."""
        return (1.0 - self.rho2) * (1.0 - self.gamma) * self.p2_2

    def as_dict(self) -> dict:
        return {"eta1": self.eta1, "eta2": self.eta2, "eta3": self.eta3, "rho2": self.rho2,
                "rho3": self.rho3, "gamma": self.gamma, "p2_2": self.p2_2, "p2_3": self.p2_3}


def silent_params(eta1: float) -> SchemeParams:
    """T2 transmits nothing; the whole post-decoding time is phase 2."""
    return SchemeParams(1.0 - eta1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class RateReport:
    scheme: str
    r2: float
    feasible: bool
    residual_reliability: float
    residual_secrecy: float
    per_phase_terms: dict = field(default_factory=dict)
    mmse_alpha: float = 0.0
    violations: tuple = ()


def baseline_secrecy_rate(sc: Scenario) -> float:
    """Primary secrecy rate with T2 silent."""
    g = sc.gains
    return max(0.0, c(abs(g.c11) ** 2 * sc.p1) - c(abs(g.c12) ** 2 * sc.p1))


def eta1_min(sc: Scenario) -> float:
    """Shortest first phase that lets T2 decode the primary codeword."""
    g = sc.gains
    if not g.decodable():
        raise InfeasibleError(
            f"decodability condition |cTT| > |c11| violated (|cTT|={abs(g.cTT):.6g}, |c11|={abs(g.c11):.6g})")
    return c(abs(g.c11) ** 2 * sc.p1) / c(abs(g.cTT) ** 2 * sc.p1)


def _common_checks(sc: Scenario, p: SchemeParams) -> list[str]:
    out = []
    if not sc.gains.decodable():
        out.append("decodability |cTT| > |c11|")
    else:
        if p.eta1 < eta1_min(sc) - SUM_TOL:
            out.append(f"eta1={p.eta1:.6g} shorter than decoding time {eta1_min(sc):.6g}")
    if p.average_power > sc.p2 + SUM_TOL:
        out.append(f"average power {p.average_power:.6g} exceeds budget {sc.p2:.6g}")
    return out


def mmse_alpha(sc: Scenario, p: SchemeParams) -> float:
    """MMSE coefficient of the dirty-paper auxiliary in phase 2."""
    g22 = abs(sc.gains.c22) ** 2
    pu2 = p.p_u2
    return g22 * pu2 / (1.0 + g22 * (pu2 + p.rho2 * p.p2_2))


def _phase_terms(sc: Scenario, p: SchemeParams, dpc: bool):
    g = sc.gains
    p1 = sc.p1
    g21, g22 = abs(g.c21) ** 2, abs(g.c22) ** 2
    eq = equivalent_channels(g, p, p1)
    d2, e2 = abs(eq.c11_p2) ** 2, abs(eq.c12_p2) ** 2
    d3, e3 = abs(eq.c11_p3) ** 2, abs(eq.c12_p3) ** 2
    pu2 = p.p_u2
    jam2 = p.rho2 * p.p2_2
    jam3 = p.rho3 * p.p2_3
    own = c(g22 * pu2 / (1.0 + g22 * jam2))
    t = {
        "I(V1;Y1(1))": c(abs(g.c11) ** 2 * p1),
        "I(V1;Y2(1))": c(abs(g.c12) ** 2 * p1),
        "I(V1;Y1'(2))": c(d2 * p1 / (1.0 + g21 * (jam2 + pu2))),
        "I(V1;Y1'(3))": c(d3 * p1 / (1.0 + g21 * jam3)),
        "I(V1;Y2'(3))": c(e3 * p1 / (1.0 + g22 * jam3)),
    }
    alpha = 0.0
    if dpc:
        alpha = mmse_alpha(sc, p)
        eaves2 = c(e2 * p1 / (1.0 + g22 * (jam2 + pu2)))
        if pu2 > 0:
            lam2 = alpha ** 2 * e2 / g22
            i_v1v2 = c(lam2 * p1 / pu2)
        else:
            i_v1v2 = 0.0
        t["I(V1;Y2'(2))"] = eaves2
        t["I(V1;V2)"] = i_v1v2
        t["I(V2;Y2'(2))"] = i_v1v2 + own
        t["I(V1,V2;Y2'(2))"] = eaves2 + own
        t["I(V1;V2,Y2'(2))"] = eaves2
    else:
        # T2's own signal is decoded first at U2 (or treated as noise), so
        # the eavesdropper sees only the jamming as extra noise.
        eaves2 = c(e2 * p1 / (1.0 + g22 * jam2))
        r2_raw = c(g22 * pu2 / (1.0 + g22 * jam2 + e2 * p1))
        t["I(V1;Y2'(2))"] = eaves2
        t["I(V1;V2)"] = 0.0
        t["I(V2;Y2'(2))"] = r2_raw
        t["I(V1,V2;Y2'(2))"] = c((e2 * p1 + g22 * pu2) / (1.0 + g22 * jam2))
        t["I(V1;V2,Y2'(2))"] = eaves2
    return {k: t[k] for k in TERM_NAMES}, alpha


def dpc_rate(sc: Scenario, p: SchemeParams) -> RateReport:
    """Secondary rate with dirty-paper coding and the two coexistence residuals.

    ``residual_reliability`` must be >= 0 and ``residual_secrecy`` must be 0
    (within :data:`FEAS_TOL`) for the primary secrecy rate to be preserved.
    """
    terms, alpha = _phase_terms(sc, p, dpc=True)
    share = 1.0 - p.eta1
    rs1p = sc.r_s1_prime
    rel = p.eta2 * terms["I(V1;Y1'(2))"] + p.eta3 * terms["I(V1;Y1'(3))"] - share * (sc.r_s1_target + rs1p)
    sec = p.eta2 * terms["I(V1;V2,Y2'(2))"] + p.eta3 * terms["I(V1;Y2'(3))"] - share * rs1p
    g22 = abs(sc.gains.c22) ** 2
    r2 = p.eta2 * c(g22 * p.p_u2 / (1.0 + g22 * p.rho2 * p.p2_2))
    bad = _common_checks(sc, p)
    if rel < -FEAS_TOL:
        bad.append(f"reliability slack {rel:.3e} < 0")
    if abs(sec) > FEAS_TOL:
        bad.append(f"secrecy residual {sec:.3e} != 0")
    return RateReport("dpc", r2, not bad, rel, sec, terms, alpha, tuple(bad))


def no_dpc_rate(sc: Scenario, p: SchemeParams) -> RateReport:
    """Secondary rate without dirty-paper coding.

    The primary signal is interference at U2. Feasibility is the single
    inequality on the post-decoding secrecy budget; it is reported as
    ``residual_reliability`` and ``residual_secrecy`` is identically 0.
    """
    terms, _ = _phase_terms(sc, p, dpc=False)
    g = sc.gains
    eq = equivalent_channels(g, p, sc.p1)
    g21, g22 = abs(g.c21) ** 2, abs(g.c22) ** 2
    d2 = abs(eq.c11_p2) ** 2
    direct2 = c(d2 * sc.p1 / (1.0 + g21 * (1.0 - p.gamma + p.gamma * p.rho2) * p.p2_2))
    lhs = (p.eta2 * (direct2 - terms["I(V1;Y2'(2))"])
           + p.eta3 * (terms["I(V1;Y1'(3))"] - terms["I(V1;Y2'(3))"]))
    slack = max(lhs, 0.0) - (1.0 - p.eta1) * sc.r_s1_target
    r2 = p.eta2 * terms["I(V2;Y2'(2))"]
    bad = _common_checks(sc, p)
    if slack < -FEAS_TOL:
        bad.append(f"secrecy slack {slack:.3e} < 0")
    return RateReport("nodpc", r2, not bad, slack, 0.0, terms, 0.0, tuple(bad))


def single_phase_rate(sc: Scenario, p: SchemeParams, dpc: bool = True) -> RateReport:
    """Scheme without a clean relaying phase: ``eta3 = 0`` and ``eta2 = 1 - eta1``."""
    e1 = eta1_min(sc)
    q = replace(p, eta2=1.0 - e1, eta3=0.0, rho3=0.0, p2_3=0.0)
    rep = dpc_rate(sc, q) if dpc else no_dpc_rate(sc, q)
    return replace(rep, scheme="dpc_single" if dpc else "nodpc_single")


def _phase3_secrecy(g: ChannelGains, p1, rho, power):
    """Per-use primary secrecy contribution of a relay+jam phase (array-friendly)."""
    rot = relay_rotation(g)
    k = np.sqrt((1.0 - rho) * power / p1) * rot
    d = np.abs(g.c11 + g.c21 * k) ** 2
    e = np.abs(g.c12 + g.c22 * k) ** 2
    return (np.log2(1.0 + d * p1 / (1.0 + abs(g.c21) ** 2 * rho * power))
            - np.log2(1.0 + e * p1 / (1.0 + abs(g.c22) ** 2 * rho * power)))


def four_phase_r1_terms(sc: Scenario, eta3_prime: float, eta4: float, p2_3prime: float,
                        p2_4: float, rho3: float, p2_3: float, eta3: float | None = None,
                        tol: float = SUM_TOL) -> tuple[float, float]:
    """Primary secrecy collected after phase 2 by the four- and three-phase schemes.

    The four-phase scheme splits the last ``eta3`` into pure relaying
    (``eta3_prime``) and pure jamming (``eta4``); both schemes must spend the
    same energy there. Returns ``(r1_4ph, r1_3ph)``.
    """
    total = eta3_prime + eta4 if eta3 is None else eta3
    if min(eta3_prime, eta4, p2_3prime, p2_4, p2_3) < 0 or not 0.0 <= rho3 <= 1.0:
        raise DomainError("four-phase arguments out of range")
    if abs(eta3_prime + eta4 - total) > tol:
        raise PreconditionError(f"time split {eta3_prime}+{eta4} != eta3={total}")
    if abs(eta3_prime * p2_3prime + eta4 * p2_4 - total * p2_3) > tol * max(1.0, total * p2_3):
        raise PreconditionError("energy of phases 3/4 differs from the three-phase phase-3 energy")
    g, p1 = sc.gains, sc.p1
    r4 = (eta3_prime * float(_phase3_secrecy(g, p1, 0.0, p2_3prime))
          + eta4 * float(_phase3_secrecy(g, p1, 1.0, p2_4)))
    r3 = total * float(_phase3_secrecy(g, p1, rho3, p2_3))
    return r4, r3


def three_phase_capacity_form(terms: Sequence[tuple[float, float]], fractions: Sequence[float]) -> float:
    """Weighted sum of per-phase legitimate-minus-eavesdropper MI."""
    if len(terms) != len(fractions):
        raise UsageError("need one (I_legit, I_eave) pair per phase fraction")
    fr = np.asarray(fractions, dtype=float)
    if np.any(fr < 0) or abs(fr.sum() - 1.0) > SUM_TOL:
        raise UsageError(f"phase fractions must be nonnegative and sum to 1, got {list(fractions)}")
    return float(sum(f * (a - b) for f, (a, b) in zip(fr, terms)))


def rate_kernel(sc: Scenario, eta1: float | None = None, kernel_cls=None, n_scan: int = 200):
    """Scalar kernel bound to ``sc`` for the optimizer's inner loop."""
    from .kernels import RateKernel

    cls = kernel_cls or RateKernel
    g = sc.gains
    e1 = eta1_min(sc) if eta1 is None else eta1
    rot = relay_rotation(g)
    rs1p = sc.r_s1_prime
    share = 1.0 - e1
    return cls(complex(g.c11), complex(g.c12), complex(g.c21 * rot), complex(g.c22 * rot), float(sc.p1),
               share * (sc.r_s1_target + rs1p), share * rs1p, share * sc.r_s1_target, n_scan)
