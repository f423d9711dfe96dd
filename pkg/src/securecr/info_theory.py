"""Exact finite-alphabet information measures and the DMC rate expressions.

Joint distributions are dense tensors with one named axis per variable.
Entropies are in bits with the ``0 log 0 = 0`` convention.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import nnls

from .errors import DomainError, PreconditionError, UsageError

SUM_TOL = 1e-12
SECRECY_TOL = 1e-6
MARKOV_TOL = 1e-9
DEGRADED_TOL = 1e-6


@dataclass(frozen=True)
class JointPmf:
    names: tuple
    probs: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", p)
        if len(set(names)) != len(names):
            raise UsageError(f"duplicate variable names {names}")
        if p.ndim != len(names):
            raise UsageError(f"{len(names)} names for a {p.ndim}-d tensor")
        if np.any(p < 0):
            raise DomainError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > SUM_TOL * max(1, p.size):
            raise DomainError(f"probabilities sum to {p.sum():.15g}, not 1")

    @property
    def cards(self) -> tuple:
        return self.probs.shape

    def axes(self, group: Iterable[str]) -> tuple:
        out = []
        for n in group:
            if n not in self.names:
                raise UsageError(f"unknown variable {n!r}; have {self.names}")
            out.append(self.names.index(n))
        return tuple(out)

    def marginal(self, keep: Sequence[str]) -> "JointPmf":
        keep = list(keep)
        ax = self.axes(keep)
        drop = tuple(i for i in range(len(self.names)) if i not in ax)
        m = self.probs.sum(axis=drop)
        kept_sorted = sorted(ax)
        perm = [kept_sorted.index(i) for i in ax]
        return JointPmf(tuple(keep), np.transpose(m, perm))

    def entropy(self, group: Sequence[str] = None) -> float:
        group = self.names if group is None else tuple(group)
        if not group:
            return 0.0
        return _entropy(self.marginal(group).probs)

    @classmethod
    def from_csv(cls, path) -> "JointPmf":
        """Read ``name1,...,nameK,p`` rows of integer outcomes and probabilities."""
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or len(rows[0]) < 2:
            raise UsageError(f"{path}: need a header with variable names and a probability column")
        names = tuple(h.strip() for h in rows[0][:-1])
        data = []
        for ln, r in enumerate(rows[1:], start=2):
            if not r or all(not c.strip() for c in r):
                continue
            if len(r) != len(names) + 1:
                raise UsageError(f"{path}:{ln}: expected {len(names) + 1} fields")
            try:
                data.append((tuple(int(c) for c in r[:-1]), float(r[-1])))
            except ValueError as exc:
                raise UsageError(f"{path}:{ln}: {exc}") from None
        if not data:
            raise UsageError(f"{path}: no outcomes")
        shape = tuple(max(k[i] for k, _ in data) + 1 for i in range(len(names)))
        p = np.zeros(shape)
        for k, v in data:
            if min(k) < 0:
                raise UsageError(f"{path}: negative outcome index {k}")
            p[k] += v
        return cls(names, p)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(list(self.names) + ["p"])
            for idx in itertools.product(*(range(c) for c in self.cards)):
                w.writerow(list(idx) + [repr(float(self.probs[idx]))])


def _entropy(p: np.ndarray) -> float:
    q = p[p > 0]
    return float(-(q * np.log2(q)).sum())


def _check_groups(*groups):
    seen = set()
    for g in groups:
        s = set(g)
        if seen & s:
            raise UsageError(f"variable groups overlap on {sorted(seen & s)}")
        seen |= s


def mutual_information(p: JointPmf, group_a: Sequence[str], group_b: Sequence[str]) -> float:
    """I(A;B) in bits."""
    a, b = list(group_a), list(group_b)
    if not a or not b:
        raise UsageError("mutual information needs two nonempty groups")
    _check_groups(a, b)
    return max(0.0, p.entropy(a) + p.entropy(b) - p.entropy(a + b))


def conditional_mutual_information(p: JointPmf, group_a: Sequence[str], group_b: Sequence[str],
                                   cond: Sequence[str] = ()) -> float:
    """I(A;B|C) in bits; an empty ``cond`` gives I(A;B)."""
    a, b, c = list(group_a), list(group_b), list(cond)
    if not a or not b:
        raise UsageError("mutual information needs two nonempty groups")
    _check_groups(a, b, c)
    val = p.entropy(a + c) + p.entropy(b + c) - p.entropy(a + b + c) - p.entropy(c)
    return max(0.0, val)


# --------------------------------------------------------------------------
# schemes


def _rows_ok(arr, name, n_cond):
    """Check a conditional law whose first ``n_cond`` axes are conditioned on."""
    arr = np.asarray(arr, dtype=float)
    if arr.ndim <= n_cond:
        raise UsageError(f"{name} needs more than {n_cond} axes")
    if np.any(arr < 0):
        raise DomainError(f"{name} has negative entries")
    s = arr.reshape(int(np.prod(arr.shape[:n_cond], dtype=int)), -1).sum(axis=1)
    if np.any(np.abs(s - 1.0) > SUM_TOL * 10):
        raise DomainError(f"{name} rows must sum to 1")
    return arr


# number of conditioning axes of each law
_LAWS = {"pmf_v1": 0, "cond_v2_given_v1": 1, "cond_x2_given_v1v2": 2, "channel_with_t2": 2,
         "channel_without_t2": 1, "prefix_x1_given_v1": 1, "cond_x2_given_v1_relay": 1,
         "channel_phase3": 2, "cond_x2_given_v1_phase4": 1, "channel_phase4": 2}


@dataclass(frozen=True)
class DmcScheme:
    """Channel laws and input distributions of the multiphase DMC model.

    Array layouts (last axis is the conditioned-on-nothing outcome):
      pmf_v1[v1], cond_v2_given_v1[v1, v2], cond_x2_given_v1v2[v1, v2, x2],
      prefix_x1_given_v1[v1, x1], channel_with_t2[x1, x2, y1', y2'],
      channel_without_t2[x1, y1, y2], cond_x2_given_v1_relay[v1, x2].
    Phase 3 uses ``channel_phase3`` (default: ``channel_with_t2``) with
    ``X2 ~ cond_x2_given_v1_relay``. An optional phase 4 has its own fraction,
    channel and relay law.
    """

    pmf_v1: np.ndarray
    cond_v2_given_v1: np.ndarray
    cond_x2_given_v1v2: np.ndarray
    channel_with_t2: np.ndarray
    channel_without_t2: np.ndarray
    prefix_x1_given_v1: np.ndarray
    phase_fractions: tuple = (0.5, 0.5, 0.0)
    cond_x2_given_v1_relay: np.ndarray | None = None
    channel_phase3: np.ndarray | None = None
    eta4: float = 0.0
    cond_x2_given_v1_phase4: np.ndarray | None = None
    channel_phase4: np.ndarray | None = None

    def __post_init__(self):
        for name, k in _LAWS.items():
            if getattr(self, name) is not None:
                object.__setattr__(self, name, _rows_ok(getattr(self, name), name, k))
        fr = tuple(float(f) for f in self.phase_fractions)
        object.__setattr__(self, "phase_fractions", fr)
        if len(fr) != 3:
            raise UsageError("phase_fractions must be (eta1, eta2, eta3)")
        e1, e2, e3 = fr
        if not 0.0 < e1 < 1.0 or e2 < 0 or e3 < 0 or self.eta4 < 0:
            raise DomainError(f"invalid phase fractions {fr}, eta4={self.eta4}")
        if abs(e1 + e2 + e3 + self.eta4 - 1.0) > 1e-12:
            raise DomainError(f"phase fractions sum to {e1 + e2 + e3 + self.eta4}, not 1")
        nv1 = self.pmf_v1.shape[0]
        nx1 = self.prefix_x1_given_v1.shape[1]
        if self.cond_v2_given_v1.shape[0] != nv1 or self.prefix_x1_given_v1.shape[0] != nv1:
            raise UsageError("V1 cardinality mismatch")
        if self.cond_x2_given_v1v2.shape[:2] != self.cond_v2_given_v1.shape:
            raise UsageError("cond_x2_given_v1v2 must be indexed [v1, v2, x2]")
        nx2 = self.cond_x2_given_v1v2.shape[2]
        if self.channel_with_t2.shape[:2] != (nx1, nx2):
            raise UsageError("channel_with_t2 must be indexed [x1, x2, y1', y2']")
        if self.channel_without_t2.shape[0] != nx1:
            raise UsageError("channel_without_t2 must be indexed [x1, y1, y2]")

    @property
    def eta(self):
        return self.phase_fractions

    def joint_without(self) -> JointPmf:
        """p(v1, x1, y1, y2) with T2 silent."""
        p = (self.pmf_v1[:, None, None, None] * self.prefix_x1_given_v1[:, :, None, None]
             * self.channel_without_t2[None, :, :, :])
        return JointPmf(("V1", "X1", "Y1", "Y2"), p)

    def joint_with(self) -> JointPmf:
        """p(v1, v2, x1, x2, y1', y2') in the phase where T2 sends its own message."""
        p = (self.pmf_v1[:, None, None, None, None, None]
             * self.cond_v2_given_v1[:, :, None, None, None, None]
             * self.prefix_x1_given_v1[:, None, :, None, None, None]
             * self.cond_x2_given_v1v2[:, :, None, :, None, None]
             * self.channel_with_t2[None, None, :, :, :, :])
        return JointPmf(("V1", "V2", "X1", "X2", "Y1p", "Y2p"), p)

    def _relay_joint(self, cond, chan) -> JointPmf:
        if cond is None:
            nx2 = self.cond_x2_given_v1v2.shape[2]
            cond = np.zeros((self.pmf_v1.shape[0], nx2))
            cond[:, 0] = 1.0
        chan = self.channel_with_t2 if chan is None else chan
        p = (self.pmf_v1[:, None, None, None, None]
             * self.prefix_x1_given_v1[:, :, None, None, None]
             * cond[:, None, :, None, None]
             * chan[None, :, :, :, :])
        return JointPmf(("V1", "X1", "X2", "Y1p", "Y2p"), p)

    def joint_phase3(self) -> JointPmf:
        """p(v1, x1, x2, y1', y2') during clean relaying (X2 depends on V1 only)."""
        return self._relay_joint(self.cond_x2_given_v1_relay, self.channel_phase3)

    def joint_phase4(self) -> JointPmf:
        return self._relay_joint(self.cond_x2_given_v1_phase4, self.channel_phase4)


@dataclass(frozen=True)
class DmcRateReport:
    r2: float
    r_s1: float
    r_s1_prime: float
    # "reliability": must be >= 0; "secrecy": must be 0 (within SECRECY_TOL)
    constraint_residuals: dict = field(default_factory=dict)

    def feasible(self, secrecy_mode: str = "eq", tol: float = SECRECY_TOL) -> bool:
        rel = self.constraint_residuals["reliability"]
        sec = self.constraint_residuals["secrecy"]
        ok_sec = abs(sec) <= tol if secrecy_mode == "eq" else sec <= tol
        return rel >= -tol and ok_sec


def theorem1_from_pmfs(p_with: JointPmf, p_without: JointPmf) -> DmcRateReport:
    """Single-phase rate and coexistence residuals from the two joint laws.

    ``p_with`` must contain V1, V2, Y1p, Y2p and ``p_without`` V1, Y1, Y2.
    """
    i_v1y1 = mutual_information(p_without, ["V1"], ["Y1"])
    i_v1y2 = mutual_information(p_without, ["V1"], ["Y2"])
    r_s1 = i_v1y1 - i_v1y2
    r_s1p = i_v1y2
    r2 = mutual_information(p_with, ["V2"], ["Y2p"]) - mutual_information(p_with, ["V2"], ["V1"])
    rel = mutual_information(p_with, ["V1"], ["Y1p"]) - r_s1p - r_s1
    sec = mutual_information(p_with, ["V1"], ["V2", "Y2p"]) - r_s1p
    return DmcRateReport(max(r2, 0.0), r_s1, r_s1p, {"reliability": rel, "secrecy": sec})


def theorem1_rate(s: DmcScheme) -> DmcRateReport:
    """Single-phase scheme: T2 transmits throughout the post-decoding time."""
    return theorem1_from_pmfs(s.joint_with(), s.joint_without())


def proposition1_rate(s: DmcScheme) -> DmcRateReport:
    """Three-phase (optionally four-phase) rate and coexistence residuals."""
    e1, e2, e3 = s.phase_fractions
    pw0 = s.joint_without()
    i1_y1 = mutual_information(pw0, ["V1"], ["Y1"])
    i1_y2 = mutual_information(pw0, ["V1"], ["Y2"])
    r_s1, r_s1p = i1_y1 - i1_y2, i1_y2
    pw2 = s.joint_with()
    pw3 = s.joint_phase3()
    r2_per = mutual_information(pw2, ["V2"], ["Y2p"]) - mutual_information(pw2, ["V2"], ["V1"])
    legit = (e1 * i1_y1 + e2 * mutual_information(pw2, ["V1"], ["Y1p"])
             + e3 * mutual_information(pw3, ["V1"], ["Y1p"]))
    eave = (e1 * i1_y2 + e2 * mutual_information(pw2, ["V1"], ["V2", "Y2p"])
            + e3 * mutual_information(pw3, ["V1"], ["Y2p"]))
    if s.eta4 > 0:
        pw4 = s.joint_phase4()
        legit += s.eta4 * mutual_information(pw4, ["V1"], ["Y1p"])
        eave += s.eta4 * mutual_information(pw4, ["V1"], ["Y2p"])
    return DmcRateReport(e2 * max(r2_per, 0.0), r_s1, r_s1p,
                         {"reliability": legit - (r_s1 + r_s1p), "secrecy": eave - r_s1p})


# --------------------------------------------------------------------------
# exhaustive search


def simplex_grid(k: int, step: float) -> np.ndarray:
    """All probability vectors of length ``k`` with entries on a ``step`` lattice."""
    n = round(1.0 / step)
    if abs(n * step - 1.0) > 1e-9:
        raise UsageError(f"grid step must divide 1, got {step}")
    pts = [c for c in itertools.product(range(n + 1), repeat=k - 1) if sum(c) <= n]
    arr = np.array([list(c) + [n - sum(c)] for c in pts], dtype=float) / n
    return arr


@dataclass(frozen=True)
class SearchOutcome:
    scheme: DmcScheme | None
    report: DmcRateReport | None
    n_candidates: int
    n_feasible: int


def brute_force_best_r2(template: DmcScheme, step: float = 0.05, v2_card: int | None = None,
                        secrecy_mode: str = "eq", tol: float = SECRECY_TOL,
                        max_candidates: int = 5_000_000) -> SearchOutcome:
    """Grid search of the single-phase rate over ``p(v2|v1)`` and deterministic
    maps ``x2 = f(v1, v2)``.

    The channel laws, ``p(v1)`` and ``p(x1|v1)`` come from ``template``. Rows of
    ``p(v2|v1)`` range over a simplex lattice with spacing ``step``; halving
    the step keeps every earlier lattice point, so the best rate never drops.
    """
    if step < 0.025 - 1e-12:
        raise UsageError("grid step below 0.025 is not supported (search size)")
    if secrecy_mode not in ("eq", "le"):
        raise UsageError("secrecy_mode must be 'eq' or 'le'")
    nv1 = template.pmf_v1.shape[0]
    nv2 = v2_card or template.cond_v2_given_v1.shape[1]
    nx2 = template.channel_with_t2.shape[1]
    if max(nv1, nv2, nx2, template.prefix_x1_given_v1.shape[1]) > 4:
        raise UsageError("alphabets larger than 4 are not supported")
    rows = simplex_grid(nv2, step)
    n_maps = nx2 ** (nv1 * nv2)
    total = len(rows) ** nv1 * n_maps
    if total > max_candidates:
        raise UsageError(f"{total} candidates exceed the limit of {max_candidates}")
    p_without = template.joint_without()
    i_y1 = mutual_information(p_without, ["V1"], ["Y1"])
    i_y2 = mutual_information(p_without, ["V1"], ["Y2"])
    combos = np.array(list(itertools.product(range(len(rows)), repeat=nv1)))
    conds = rows[combos]  # (B, v1, v2)
    best = None
    n_feas = 0
    for f in itertools.product(range(nx2), repeat=nv1 * nv2):
        xmap = np.zeros((nv1, nv2, nx2))
        for i, x in enumerate(f):
            xmap[i // nv2, i % nv2, x] = 1.0
        r2, i_v1y1p, i_v1_v2y2p = _theorem1_batch(template, conds, xmap)
        rel = i_v1y1p - i_y1
        sec = i_v1_v2y2p - i_y2
        ok = (rel >= -tol) & ((np.abs(sec) <= tol) if secrecy_mode == "eq" else (sec <= tol))
        n_feas += int(ok.sum())
        if not ok.any():
            continue
        k = int(np.argmax(np.where(ok, r2, -np.inf)))
        if best is None or r2[k] > best[0] + 1e-12:
            best = (r2[k], conds[k], xmap)
    if best is None:
        return SearchOutcome(None, None, total, 0)
    cand = _with_v2(template, best[1], best[2])
    return SearchOutcome(cand, theorem1_rate(cand), total, n_feas)


def _batch_h(p, keep):
    """Entropies of the marginals of a batch of joints (batch axis first)."""
    drop = tuple(i for i in range(1, p.ndim) if i not in keep)
    m = p.sum(axis=drop).reshape(p.shape[0], -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(m > 0, -m * np.log2(m), 0.0)
    return t.sum(axis=1)


def _theorem1_batch(t: DmcScheme, conds, xmap):
    """Batched single-phase terms for many ``p(v2|v1)`` at a fixed ``x2`` map.

    Returns ``(r2, I(V1;Y1'), I(V1;V2,Y2'))`` as arrays over the batch.
    """
    # axes: batch, v1, v2, y1', y2'
    chan = np.einsum("ai,abj,ijyu->abyu", t.prefix_x1_given_v1, xmap, t.channel_with_t2)
    p = t.pmf_v1[None, :, None, None, None] * conds[:, :, :, None, None] * chan[None]
    h = {k: _batch_h(p, k) for k in [(1,), (2,), (4,), (1, 2), (2, 4), (1, 2, 4), (3,), (1, 3)]}
    i_v2y2 = h[(2,)] + h[(4,)] - h[(2, 4)]
    i_v2v1 = h[(1,)] + h[(2,)] - h[(1, 2)]
    i_v1y1 = h[(1,)] + h[(3,)] - h[(1, 3)]
    i_v1_v2y2 = h[(1,)] + h[(2, 4)] - h[(1, 2, 4)]
    r2 = np.maximum(np.maximum(i_v2y2, 0.0) - np.maximum(i_v2v1, 0.0), 0.0)
    return r2, np.maximum(i_v1y1, 0.0), np.maximum(i_v1_v2y2, 0.0)


def _with_v2(t: DmcScheme, cond, xmap) -> DmcScheme:
    from dataclasses import replace
    return replace(t, cond_v2_given_v1=cond, cond_x2_given_v1v2=xmap)


# --------------------------------------------------------------------------
# outer bound


def degraded_kernel(p: JointPmf, x="X1", y1="Y1", y2="Y2"):
    """Fit ``P(y2|x) = sum_y1 P(y1|x) K(y2|y1)`` with a stochastic ``K``.

    Returns ``(K, residual)``; the residual is the Euclidean misfit.
    """
    pxy1 = p.marginal([x, y1]).probs
    pxy2 = p.marginal([x, y2]).probs
    px = pxy1.sum(axis=1)
    keep = px > 0
    a = pxy1[keep] / px[keep, None]
    b = pxy2[keep] / px[keep, None]
    n1, n2 = a.shape[1], b.shape[1]
    # unknown vec(K) with K[y1, y2]; equations: a @ K = b and rows of K sum to 1
    rows, rhs = [], []
    for i in range(a.shape[0]):
        for j in range(n2):
            r = np.zeros(n1 * n2)
            r[j::n2] = a[i]
            rows.append(r)
            rhs.append(b[i, j])
    w = 10.0
    for k in range(n1):
        r = np.zeros(n1 * n2)
        r[k * n2:(k + 1) * n2] = w
        rows.append(r)
        rhs.append(w)
    sol, res = nnls(np.array(rows), np.array(rhs))
    return sol.reshape(n1, n2), float(res)


def dmc_outer_bound(p: JointPmf, r_s1_target: float) -> tuple[float, float]:
    """Outer bound ``(r_s1_ub, r2_ub)`` for a joint law over U, V, X1, X2, Y1, Y2."""
    need = {"U", "V", "X1", "X2", "Y1", "Y2"}
    if set(p.names) != need:
        raise UsageError(f"need variables {sorted(need)}, got {p.names}")
    viol = []
    checks = [
        ("U -> X1 -> (Y1, Y2)", conditional_mutual_information(p, ["U"], ["Y1", "Y2"], ["X1"])),
        ("(U, X1) -> Y1 -> Y2", conditional_mutual_information(p, ["U", "X1"], ["Y2"], ["Y1"])),
        ("(U, V) -> X2 -> (Y1, Y2)", conditional_mutual_information(p, ["U", "V"], ["Y1", "Y2"], ["X2"])),
    ]
    for name, v in checks:
        if v > MARKOV_TOL:
            viol.append(f"{name} (conditional MI {v:.3e})")
    _, res = degraded_kernel(p)
    if res > DEGRADED_TOL:
        viol.append(f"Y2 is not a degraded version of Y1 (NNLS residual {res:.3e})")
    if viol:
        raise PreconditionError("factorization violated: " + "; ".join(viol))
    i_x1y1_v = conditional_mutual_information(p, ["X1"], ["Y1"], ["V"])
    i_x1y2_v = conditional_mutual_information(p, ["X1"], ["Y2"], ["V"])
    i_uy1 = mutual_information(p, ["U"], ["Y1"])
    i_vy2 = mutual_information(p, ["V"], ["Y2"])
    r_s1_ub = min(i_x1y1_v - i_x1y2_v, i_uy1)
    r2_ub = i_vy2 - max(r_s1_target - i_x1y1_v, 0.0)
    return r_s1_ub, r2_ub


# --------------------------------------------------------------------------
# CSV instances

WITH_NAMES = ("V1", "V2", "X1", "X2", "Y1p", "Y2p")
WITHOUT_NAMES = ("V1", "X1", "Y1", "Y2")


def _conditional(joint, n_cond):
    """Split a joint tensor into a conditional law; empty rows become uniform."""
    shape = joint.shape
    flat = joint.reshape(int(np.prod(shape[:n_cond], dtype=int)), -1)
    tot = flat.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(tot > 0, flat / tot, 1.0 / flat.shape[1])
    return cond.reshape(shape)


def scheme_from_joints(p_with: JointPmf, p_without: JointPmf,
                       phase_fractions=(0.5, 0.5, 0.0)) -> DmcScheme:
    """Recover the single-phase laws from the two joint PMFs.

    The joints must factor as p(v1)p(v2|v1)p(x1|v1)p(x2|v1,v2)W(y1',y2'|x1,x2)
    and p(v1)p(x1|v1)W0(y1,y2|x1) with matching p(v1, x1).
    """
    pw = p_with.marginal(WITH_NAMES).probs
    p0 = p_without.marginal(WITHOUT_NAMES).probs
    v1 = pw.sum(axis=(1, 2, 3, 4, 5))
    v1v2 = pw.sum(axis=(2, 3, 4, 5))
    v1x1 = pw.sum(axis=(1, 3, 4, 5))
    v1v2x2 = pw.sum(axis=(2, 4, 5))
    x1x2y = pw.sum(axis=(0, 1))
    if p0.shape[:2] != v1x1.shape or np.max(np.abs(p0.sum(axis=(2, 3)) - v1x1)) > 1e-12:
        raise PreconditionError("the two joints disagree on p(v1, x1)")
    s = DmcScheme(
        pmf_v1=v1 / v1.sum(),
        cond_v2_given_v1=_conditional(v1v2, 1),
        cond_x2_given_v1v2=_conditional(v1v2x2, 2),
        channel_with_t2=_conditional(x1x2y, 2),
        channel_without_t2=_conditional(p0.sum(axis=0), 1),
        prefix_x1_given_v1=_conditional(v1x1, 1),
        phase_fractions=phase_fractions,
    )
    if (np.max(np.abs(s.joint_with().probs - pw)) > 1e-12
            or np.max(np.abs(s.joint_without().probs - p0)) > 1e-12):
        raise PreconditionError("joint PMFs do not follow the single-phase factorization "
                                "p(v1)p(v2|v1)p(x1|v1)p(x2|v1,v2)W(y'|x1,x2), p(v1)p(x1|v1)W0(y|x1)")
    return s


def load_instance(directory, name: str) -> DmcScheme:
    """Load ``<name>_with.csv`` and ``<name>_without.csv`` from ``directory``."""
    d = Path(directory)
    return scheme_from_joints(JointPmf.from_csv(d / f"{name}_with.csv"),
                              JointPmf.from_csv(d / f"{name}_without.csv"))


def bundled_dir() -> Path:
    return Path(__file__).parent / "data" / "dmc"


def bundled_instances() -> list:
    return sorted(p.name[: -len("_with.csv")] for p in bundled_dir().glob("*_with.csv"))
