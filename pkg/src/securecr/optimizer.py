"""Multi-start pattern search for the secondary rate.

The decision vector is searched in a unit cube:

    eta2        = u_eta * (1 - eta1), eta3 takes the remaining time
    rho2, rho3  = jamming fractions
    power_used  = s, share of the average power budget spent
    phase2_share = f, share of the spent energy that goes to phase 2

so that ``eta2 * P22 + eta3 * P23 = s * P2`` always holds. ``gamma`` is not
searched: it is resolved from the secrecy equality (or, without DPC, as the
smallest value meeting the secrecy inequality) at every point. Each start
first walks toward the feasible set by minimizing a violation measure and then
climbs on the rate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import warnings

import numpy as np
from scipy.optimize import minimize

from .errors import UsageError
from .schemes import (Scenario, SchemeParams, RateReport, dpc_rate, eta1_min, no_dpc_rate,
                      rate_kernel, silent_params, single_phase_rate, _phase3_secrecy)

COORDS = ("eta2", "rho2", "rho3", "power_used", "phase2_share")
RHO2_MAX = 1.0 - 1e-9


class Scheme(enum.Enum):
    DPC_3PHASE = "dpc_3phase"
    NODPC_3PHASE = "nodpc_3phase"
    DPC_SINGLE = "dpc_single"
    NODPC_SINGLE = "nodpc_single"

    @property
    def dpc(self) -> bool:
        return self in (Scheme.DPC_3PHASE, Scheme.DPC_SINGLE)

    @property
    def single(self) -> bool:
        return self in (Scheme.DPC_SINGLE, Scheme.NODPC_SINGLE)


class Status(enum.Enum):
    FEASIBLE_OPT = "feasible_opt"
    NO_FEASIBLE_POINT = "no_feasible_point"


@dataclass(frozen=True)
class Budgets:
    n_starts: int = 64
    max_evals: int = 2000
    init_step: float = 0.25
    min_step: float = 1e-7
    sqp_iters: int = 200

    def __post_init__(self):
        if self.n_starts <= 0 or self.max_evals <= 0:
            raise UsageError("budgets must be positive")
        if not 0 < self.min_step < self.init_step:
            raise UsageError("need 0 < min_step < init_step")


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-6
    gamma: float = 1e-8

    def __post_init__(self):
        if self.feasibility <= 0 or self.gamma <= 0:
            raise UsageError("tolerances must be positive")


@dataclass(frozen=True)
class OptProblem:
    scenario: Scenario
    scheme: Scheme = Scheme.DPC_3PHASE
    budgets: Budgets = field(default_factory=Budgets)
    seed: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)
    # coordinate name -> value in [0, 1], removed from the search
    fixed: dict = field(default_factory=dict)
    # extra starting points, each a SchemeParams (converted to cube coords)
    warm_starts: tuple = ()

    def __post_init__(self):
        bad = set(self.fixed) - set(COORDS)
        if bad:
            raise UsageError(f"unknown fixed coordinates {sorted(bad)}; valid: {COORDS}")
        for k, v in self.fixed.items():
            if not 0.0 <= v <= 1.0:
                raise UsageError(f"fixed coordinate {k}={v} outside [0, 1]")


@dataclass(frozen=True)
class StartSummary:
    index: int
    origin: str
    start_feasible: bool
    r2: float
    evals: int


@dataclass(frozen=True)
class OptResult:
    best: SchemeParams | None
    report: RateReport | None
    trace: tuple
    status: Status
    eta1: float = float("nan")
    power_binding: bool = False
    diagnostic: str = ""

    @property
    def r2(self) -> float:
        return self.report.r2 if self.report is not None else float("-inf")


class _Problem:
    """Cube <-> parameter mapping and kernel evaluation for one OptProblem."""

    def __init__(self, prob: OptProblem, kernel_cls=None):
        sc = prob.scenario
        self.sc = sc
        self.scheme = prob.scheme
        self.eta1 = eta1_min(sc)
        self.kernel = rate_kernel(sc, self.eta1, kernel_cls)
        fixed = dict(prob.fixed)
        if prob.scheme.single:
            fixed.update(eta2=1.0, rho3=0.0, phase2_share=1.0)
        self.fixed = fixed
        self.free = [i for i, n in enumerate(COORDS) if n not in fixed]
        self.base = np.array([fixed.get(n, 0.0) for n in COORDS])
        if prob.scheme.dpc:
            self._point = self.kernel.dpc_point
            self._viol = self.kernel.dpc_violation
            self._eval = self.kernel.dpc_eval
        else:
            self._point = self.kernel.nodpc_point
            self._viol = self.kernel.nodpc_violation
            self._eval = self.kernel.nodpc_eval
        self.evals = 0

    def full(self, x):
        u = self.base.copy()
        u[self.free] = x
        return u

    def decode(self, u):
        share = 1.0 - self.eta1
        eta2 = u[0] * share
        eta3 = max(share - eta2, 0.0)
        if self.scheme.single:
            eta2, eta3 = share, 0.0
        e = u[3] * self.sc.p2
        p22 = e * u[4] / eta2 if eta2 > 0 else 0.0
        p23 = e * (1.0 - u[4]) / eta3 if eta3 > 0 else 0.0
        return eta2, eta3, min(u[1], RHO2_MAX), u[2], p22, p23

    def encode(self, p: SchemeParams):
        share = 1.0 - self.eta1
        energy = p.eta2 * p.p2_2 + p.eta3 * p.p2_3
        s = min(energy / self.sc.p2, 1.0) if self.sc.p2 > 0 else 0.0
        f = p.eta2 * p.p2_2 / energy if energy > 0 else 1.0
        u = np.array([min(p.eta2 / share, 1.0), p.rho2, p.rho3, s, f])
        return u[self.free]

    def value(self, x):
        self.evals += 1
        return self._point(*self.decode(self.full(x)))

    def violation(self, x):
        self.evals += 1
        return self._viol(*self.decode(self.full(x)))

    def at_gamma(self, x, gamma):
        """Rate and constraint values with gamma given instead of resolved."""
        eta2, eta3, rho2, rho3, p22, p23 = self.decode(self.full(x))
        return self._eval(eta2, eta3, rho2, rho3, gamma, p22, p23)


def _compass(fun, x, step, min_step, budget, prob):
    """Opportunistic compass search maximizing ``fun``; returns (x, fx)."""
    fx = fun(x)
    d = len(x)
    while step >= min_step and prob.evals < budget:
        moved = False
        for i in range(d):
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[i] = min(1.0, max(0.0, y[i] + sgn * step))
                if y[i] == x[i]:
                    continue
                fy = fun(y)
                if fy > fx:
                    x, fx, moved = y, fy, True
                    break
                if prob.evals >= budget:
                    break
            if moved or prob.evals >= budget:
                break
        if not moved:
            step *= 0.5
    return x, fx


class _Found(Exception):
    def __init__(self, x):
        self.x = x


def _sqp(prob: _Problem, z0, iters):
    """SLSQP on (free coords, sqrt(gamma)) with the coexistence conditions as
    explicit constraints; returns cube coords of the end point.

    The relay amplitude grows like sqrt(gamma), so the rates have an infinite
    slope at gamma = 0; searching over its square root keeps them smooth.
    """
    d = len(prob.free)
    cache = {}
    z0 = np.append(z0[:d], math.sqrt(min(max(z0[d], 0.0), 1.0)))

    def ev(z):
        key = z.tobytes()
        if key not in cache:
            zc = np.clip(z, 0.0, 1.0)
            cache[key] = prob.at_gamma(zc[:d], zc[d] ** 2)
        return cache[key]

    if prob.scheme.dpc:
        cons = [{"type": "ineq", "fun": lambda z: ev(z)[1]},
                {"type": "eq", "fun": lambda z: ev(z)[2]}]
    else:
        cons = [{"type": "ineq", "fun": lambda z: ev(z)[1]}]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = minimize(lambda z: -ev(z)[0], z0, method="SLSQP", bounds=[(0.0, 1.0)] * (d + 1),
                       constraints=cons, options={"maxiter": iters, "ftol": 1e-12})
    return np.clip(res.x[:d], 0.0, 1.0)


def _run_start(prob: _Problem, x0, g0, budgets: Budgets):
    """Pattern search (with feasibility restoration) and an SQP pass from the
    same start; each feasible end point is polished by pattern search."""
    prob.evals = 0
    budget = budgets.max_evals
    r, g = prob.value(x0)
    feasible0 = g >= 0.0
    ends = []
    x = x0
    if not feasible0:
        def neg_viol(y):
            if prob.value(y)[1] >= 0.0:
                raise _Found(y)
            return -prob.violation(y)

        try:
            _compass(neg_viol, x0, budgets.init_step, budgets.min_step, budget, prob)
        except _Found as hit:
            x = hit.x
        else:
            x = None
    if x is not None:
        if len(x):
            x, _ = _compass(lambda y: prob.value(y)[0], x, budgets.init_step, budgets.min_step, budget, prob)
        ends.append(x)
    if len(x0) and budgets.sqp_iters > 0:
        xs = _sqp(prob, np.append(x0, g0), budgets.sqp_iters)
        if prob.value(xs)[1] >= 0.0:
            prob.evals = 0
            xs, _ = _compass(lambda y: prob.value(y)[0], xs, budgets.init_step / 64, budgets.min_step,
                             budget, prob)
            ends.append(xs)
    best = (x0, float("-inf"), -1.0)
    for e in ends:
        r, g = prob.value(e)
        if g >= 0.0 and r > best[1]:
            best = (e, r, g)
    return best + (feasible0,)


def _build(prob: _Problem, x, gamma):
    eta2, eta3, rho2, rho3, p22, p23 = prob.decode(prob.full(x))
    params = SchemeParams(eta2, eta3, rho2, rho3, min(max(gamma, 0.0), 1.0), p22, p23)
    sc = prob.sc
    if prob.scheme.single:
        rep = single_phase_rate(sc, params, dpc=prob.scheme.dpc)
    else:
        rep = dpc_rate(sc, params) if prob.scheme.dpc else no_dpc_rate(sc, params)
    return params, rep


def solve(problem: OptProblem, kernel_cls=None) -> OptResult:
    """Maximize the secondary rate of ``problem.scheme`` over the feasible set."""
    sc = problem.scenario
    if not sc.gains.decodable():
        return OptResult(None, None, (), Status.NO_FEASIBLE_POINT,
                         diagnostic="decodability condition |cTT| > |c11| violated")
    prob = _Problem(problem, kernel_cls)
    d = len(prob.free)
    b = problem.budgets
    starts = [("silent", prob.encode(silent_params(prob.eta1)), 0.0)]
    for w in problem.warm_starts:
        starts.append(("warm", np.clip(prob.encode(w), 0.0, 1.0), w.gamma))
    rng = np.random.default_rng(problem.seed)
    for row in rng.random((b.n_starts, d + 1)):
        starts.append(("random", row[:d], row[d]))

    trace = []
    cands = []
    for idx, (origin, x0, g0) in enumerate(starts):
        x, r, g, f0 = _run_start(prob, np.asarray(x0, dtype=float), g0, b)
        trace.append(StartSummary(idx, origin, f0, r, prob.evals))
        if g >= 0.0 and math.isfinite(r):
            params, rep = _build(prob, x, g)
            if rep.feasible:
                cands.append((rep.r2, params, rep))
    if not cands:
        return OptResult(None, None, tuple(trace), Status.NO_FEASIBLE_POINT, prob.eta1,
                         diagnostic="no start reached the feasible set")
    top = max(cand[0] for cand in cands)
    ties = [cand for cand in cands if cand[0] == top]
    _, params, rep = min(ties, key=lambda cand: (cand[1].eta2, cand[1].rho2, cand[1].rho3, cand[1].gamma))
    binding = params.average_power >= sc.p2 - 1e-6
    return OptResult(params, rep, tuple(trace), Status.FEASIBLE_OPT, prob.eta1, binding)


def resolve_gamma(sc: Scenario, eta2: float, eta3: float, rho2: float, rho3: float,
                  p2_2: float, p2_3: float, dpc: bool = True, kernel_cls=None):
    """Relay fraction that meets the secrecy condition, or None.

    With DPC this is the smallest root of the secrecy equality at which the
    reliability slack is nonnegative; without DPC it is the smallest gamma with
    nonnegative secrecy slack.
    """
    k = rate_kernel(sc, 1.0 - eta2 - eta3, kernel_cls)
    g = (k.dpc_resolve if dpc else k.nodpc_resolve)(eta2, eta3, rho2, rho3, p2_2, p2_3)
    return None if g < 0.0 else g


def _refine(fun, x0, lo, hi, step=0.05, min_step=1e-9):
    """Bounded compass refinement of a grid maximizer."""
    x = np.array(x0, dtype=float)
    fx = fun(x)
    while step >= min_step:
        moved = False
        for i in range(len(x)):
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[i] = min(hi[i], max(lo[i], y[i] + sgn * step * (hi[i] - lo[i])))
                fy = fun(y)
                if fy > fx:
                    x, fx, moved = y, fy, True
        if not moved:
            step *= 0.5
    return x, fx


def solve_four_phase_comparison(sc: Scenario, eta3: float, p2_3: float, n_grid: int = 201,
                                n_refine: int = 5) -> tuple[float, float]:
    """Best post-phase-2 primary secrecy of the three- and four-phase schemes.

    Both schemes get the same time ``eta3`` and energy ``eta3 * p2_3`` and may
    use less power than that. The three-phase scheme searches ``(rho3, P)``;
    the four-phase scheme splits time into relay-only and jam-only parts and
    searches ``(time split, energy split, energy used)``. Returns
    ``(r1_3ph_star, r1_4ph_star)``.
    """
    if eta3 < 0 or p2_3 < 0:
        raise UsageError("eta3 and p2_3 must be nonnegative")
    if eta3 == 0.0:
        return 0.0, 0.0
    g, p1 = sc.gains, sc.p1

    def f3(x):
        return eta3 * float(_phase3_secrecy(g, p1, x[0], x[1] * p2_3))

    def f4(x):
        t, q, w = x
        e = w * p2_3
        val = 0.0
        if t > 0:
            val += t * float(_phase3_secrecy(g, p1, 0.0, q * e / t))
        elif q > 0:
            return -np.inf
        if t < 1:
            val += (1.0 - t) * float(_phase3_secrecy(g, p1, 1.0, (1.0 - q) * e / (1.0 - t)))
        elif q < 1:
            return -np.inf
        return eta3 * val

    # three phases: grid over (rho3, power fraction)
    r = np.linspace(0.0, 1.0, n_grid)
    R, W = np.meshgrid(r, r, indexing="ij")
    v3 = eta3 * _phase3_secrecy(g, p1, R, W * p2_3)
    best3 = -np.inf
    for flat in np.argsort(v3, axis=None)[::-1][:n_refine]:
        i, j = np.unravel_index(flat, v3.shape)
        _, fx = _refine(f3, (r[i], r[j]), (0.0, 0.0), (1.0, 1.0))
        best3 = max(best3, fx)

    # four phases: coarse 3-D grid over (t, q, w)
    m = max(21, n_grid // 4)
    s = np.linspace(0.0, 1.0, m)
    T, Q, Wt = np.meshgrid(s, s, s, indexing="ij")
    E = Wt * p2_3
    with np.errstate(divide="ignore", invalid="ignore"):
        pr = np.where(T > 0, Q * E / np.where(T > 0, T, 1.0), 0.0)
        pj = np.where(T < 1, (1.0 - Q) * E / np.where(T < 1, 1.0 - T, 1.0), 0.0)
    v4 = eta3 * (T * _phase3_secrecy(g, p1, 0.0, pr) + (1.0 - T) * _phase3_secrecy(g, p1, 1.0, pj))
    bad = ((T == 0) & (Q > 0)) | ((T == 1) & (Q < 1))
    v4 = np.where(bad, -np.inf, v4)
    best4 = -np.inf
    for flat in np.argsort(v4, axis=None)[::-1][:n_refine]:
        i, j, k = np.unravel_index(flat, v4.shape)
        _, fx = _refine(f4, (s[i], s[j], s[k]), (0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
        best4 = max(best4, fx)
    return float(best3), float(best4)
