"""AWGN outer bound on (primary secrecy rate, secondary rate), the search
for the secondary-rate bound at a fixed primary target, and DoF slope fits.

Everything here works on the standard-form channel ``(a, b, P1~, P2~)`` of
:func:`securecr.channel.standardize`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .channel import StandardizedChannel
from .errors import DomainError, UsageError

LOG2 = math.log(2.0)
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OuterBoundParams:
    alpha: float
    beta: float
    delta: float
    eta: float
    gamma: float
    rho: complex = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "delta", "eta", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        if abs(self.rho) > 1.0 + 1e-12:
            raise DomainError(f"|rho| must be <= 1, got {abs(self.rho)}")


@dataclass(frozen=True)
class BoundPoint:
    r_s1_ub: float
    r2_ub: float
    params: OuterBoundParams


def _lg(x):
    return np.log(x) / LOG2


def outer_terms(std: StandardizedChannel, alpha, beta, delta, eta, gamma, rho):
    """Vectorized bound evaluation; returns ``(r_s1_ub, r2_ub, t1, t2)`` where
    ``t1``/``t2`` are the two candidates of the primary bound."""
    a, b = std.a, std.b
    p1, p2 = std.p1_tilde, std.p2_tilde
    s = math.sqrt(p1 * p2)
    rho = np.asarray(rho)
    A = p1 + abs(a) ** 2 * p2 + 2.0 * np.real(a * rho) * s
    B = abs(b) ** 2 * p1 + p2 + 2.0 * np.real(b * rho) * s
    t1 = _lg((1.0 + A) / (1.0 + alpha * A))
    t2 = np.maximum(_lg((1.0 + gamma * A) / (1.0 + beta * B))
                    - _lg((1.0 + eta * abs(a) ** 2 * p2) / (1.0 + delta * p1)), 0.0)
    r_s1 = np.minimum(t1, t2)
    # the second log keeps |b|^2 P2~ as printed in the bound
    pen = np.maximum(_lg((1.0 + p1) / (1.0 + abs(b) ** 2 * p2))
                     - _lg((1.0 + gamma * A) / (1.0 + eta * abs(a) ** 2 * p2)), 0.0)
    r2 = np.maximum(_lg((1.0 + B) / (1.0 + beta * B)) - pen, 0.0)
    return r_s1, r2, t1, t2


def awgn_outer_point(std: StandardizedChannel, bp: OuterBoundParams) -> BoundPoint:
    r_s1, r2, _, _ = outer_terms(std, bp.alpha, bp.beta, bp.delta, bp.eta, bp.gamma, bp.rho)
    return BoundPoint(float(r_s1), float(r2), bp)


@dataclass(frozen=True)
class SearchConfig:
    n_samples: int = 20000
    eps: float = 1e-3
    n_refine: int = 10
    refine_rounds: int = 3
    seed: int = 0
    complex_rho: bool = False
    match: str = "eq"  # "eq": |R_s1^o - target| <= eps, "ge": R_s1^o >= target
    # share of each coordinate's samples placed exactly on each face of the box
    face_mass: float = 0.05

    def __post_init__(self):
        if self.n_samples <= 0 or self.eps <= 0 or self.n_refine < 0:
            raise UsageError("n_samples and eps must be > 0, n_refine >= 0")
        if not 0.0 <= self.face_mass < 0.5:
            raise UsageError("face_mass must lie in [0, 0.5)")
        if self.match not in ("eq", "ge"):
            raise UsageError(f"match must be 'eq' or 'ge', got {self.match!r}")


@dataclass(frozen=True)
class OuterResult:
    value: float
    sample_max: float
    params: OuterBoundParams | None
    n_feasible: int
    degraded: bool
    feasible: bool = True
    diagnostic: str = ""


def _alpha_for(A, target):
    """alpha putting the first primary candidate exactly at ``target`` (or 0)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        al = ((1.0 + A) / 2.0 ** target - 1.0) / A
    return np.clip(np.nan_to_num(al, nan=0.0), 0.0, 1.0)


def _match_mask(r_best_t1, t2, target, cfg):
    # with alpha free, R_s1^o ranges over [0, min(t1(0), t2)]
    top = np.minimum(r_best_t1, t2)
    if cfg.match == "ge":
        return top >= target
    return top >= target - cfg.eps


def _unpack(u, cfg):
    """Map unit-cube samples to (beta, delta, eta, gamma, rho)."""
    beta, delta, eta, gamma = u[:, 0], u[:, 1], u[:, 2], u[:, 3]
    if cfg.complex_rho:
        rad = np.sqrt(u[:, 4])
        rho = rad * np.exp(2j * np.pi * u[:, 5])
    else:
        rho = 2.0 * u[:, 4] - 1.0
    return beta, delta, eta, gamma, rho


def _score(std, u, target, cfg):
    beta, delta, eta, gamma, rho = _unpack(u, cfg)
    _, r2, t1_top, t2 = outer_terms(std, 0.0, beta, delta, eta, gamma, rho)
    ok = _match_mask(t1_top, t2, target, cfg)
    return np.where(ok, r2, -np.inf)


def _golden(f, lo, hi, iters=40):
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    best = (c, fc) if fc >= fd else (d, fd)
    for end in (lo, hi):
        fe = f(end)
        if fe > best[1]:
            best = (end, fe)
    return best


def r2_outer(std: StandardizedChannel, r_s1_target: float, cfg: SearchConfig | None = None,
             refine: bool = True) -> OuterResult:
    """Largest secondary-rate bound over parameters whose primary bound meets the target.

    ``alpha`` never enters the secondary bound and only lowers the first
    primary candidate, so it is set analytically to hit the target; the other
    parameters are sampled with a scrambled Sobol sequence.
    """
    cfg = cfg or SearchConfig()
    if r_s1_target < 0:
        raise DomainError("r_s1_target must be >= 0")
    dim = 6 if cfg.complex_rho else 5
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # n need not be a power of two
        u = qmc.Sobol(dim, scramble=True, seed=cfg.seed).random(cfg.n_samples)
    m = cfg.face_mass
    u = np.clip((u - m) / (1.0 - 2.0 * m), 0.0, 1.0)
    vals = _score(std, u, r_s1_target, cfg)
    n_ok = int(np.isfinite(vals).sum())
    if n_ok == 0:
        return OuterResult(float("nan"), float("nan"), None, 0, std.degraded, False,
                           f"no sampled parameters match target {r_s1_target:.6g} "
                           f"(match={cfg.match}, eps={cfg.eps})")
    sample_max = float(vals.max())
    best_u = u[int(np.argmax(vals))]
    best_v = sample_max
    if refine and cfg.n_refine > 0:
        order = np.argsort(vals)[::-1][: min(cfg.n_refine, n_ok)]
        for idx in order:
            x = u[idx].copy()
            fx = float(vals[idx])
            for _ in range(cfg.refine_rounds):
                for k in range(dim):
                    def f(t, k=k, x=x):
                        y = x.copy()
                        y[k] = t
                        return float(_score(std, y[None, :], r_s1_target, cfg)[0])

                    t, ft = _golden(f, 0.0, 1.0)
                    if ft > fx:
                        x[k], fx = t, ft
            if fx > best_v:
                best_v, best_u = fx, x
    beta, delta, eta, gamma, rho = (np.atleast_1d(v)[0] for v in _unpack(best_u[None, :], cfg))
    p1, p2 = std.p1_tilde, std.p2_tilde
    A = p1 + abs(std.a) ** 2 * p2 + 2.0 * np.real(std.a * rho) * math.sqrt(p1 * p2)
    alpha = float(_alpha_for(np.asarray(A), r_s1_target))
    params = OuterBoundParams(alpha, float(beta), float(delta), float(eta), float(gamma),
                              complex(rho) if cfg.complex_rho else float(np.real(rho)))
    return OuterResult(best_v, sample_max, params, n_ok, std.degraded)


def scale_ub(r2_ub: float, eta1_star: float) -> float:
    """Account for the listening phase, during which T2 cannot send."""
    if not 0.0 <= eta1_star <= 1.0:
        raise DomainError(f"eta1_star must lie in [0, 1], got {eta1_star}")
    return (1.0 - eta1_star) * r2_ub


def fit_slope(p2_grid, values, min_decades: float = 4.0) -> float:
    """Least-squares slope of ``values`` against ``log2(P2)``."""
    p = np.asarray(p2_grid, dtype=float)
    v = np.asarray(values, dtype=float)
    if p.shape != v.shape or p.ndim != 1:
        raise UsageError("p2_grid and values must be 1-D of equal length")
    if np.any(p <= 0):
        raise UsageError("P2 grid must be positive")
    if len(np.unique(p)) < 2 or math.log10(p.max() / p.min()) < min_decades - 1e-9:
        raise UsageError(f"P2 grid must span at least {min_decades} decades with >= 2 distinct values")
    x = np.log2(p)
    return float(np.polyfit(x, v, 1)[0])


@dataclass(frozen=True)
class SlopeResult:
    slope: float
    p2_grid: tuple
    values: tuple
    extra: dict = field(default_factory=dict)


def dof_ub(std_at, p2_grid, r_s1_target: float, cfg: SearchConfig | None = None) -> SlopeResult:
    """Slope of the (unscaled) secondary bound versus log2(P2).

    ``std_at`` maps a linear P2 to the standardized channel at that power.
    """
    grid = tuple(float(p) for p in p2_grid)
    vals = []
    for p in grid:
        res = r2_outer(std_at(p), r_s1_target, cfg)
        if not res.feasible:
            raise UsageError(f"outer-bound search infeasible at P2={p}: {res.diagnostic}")
        vals.append(res.value)
    return SlopeResult(fit_slope(grid, vals), grid, tuple(vals))


def dof_lb(rate_at, p2_grid) -> SlopeResult:
    """Slope of the best achievable rate versus log2(P2).

    ``rate_at`` maps a linear P2 to an optimizer result (anything with ``r2``
    and ``best`` attributes).
    """
    grid = tuple(float(p) for p in p2_grid)
    fit_slope(grid, np.zeros(len(grid)))  # validate the grid before optimizing
    results = [rate_at(p) for p in grid]
    vals = tuple(float(r.r2) for r in results)
    extra = {"rho2": tuple(r.best.rho2 if r.best is not None else float("nan") for r in results),
             "eta2": tuple(r.best.eta2 if r.best is not None else float("nan") for r in results)}
    return SlopeResult(fit_slope(grid, vals), grid, vals, extra)
