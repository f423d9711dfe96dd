"""Batch studies: geometric sweeps, power scaling, the bound-gap curve and
high-power slope fits. Every study writes a long-format CSV.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bounds import SearchConfig, dof_lb, dof_ub, r2_outer, scale_ub
from .channel import ChannelGains, Geometry, StandardizedChannel, gains_from_geometry, standardize
from .errors import DomainError, UsageError
from .optimizer import Budgets, OptProblem, OptResult, Scheme, solve
from .schemes import Scenario, baseline_secrecy_rate, eta1_min

log = logging.getLogger(__name__)

PARAM_NAMES = ("eta2", "eta3", "rho2", "rho3", "gamma", "p2_2", "p2_3")


def db_to_lin(db: float) -> float:
    return 10.0 ** (db / 10.0)


def spec_hash(obj) -> str:
    """Short stable digest of a JSON-serializable description."""
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    """Write rows with a fixed header, '.' decimals and full float precision."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(r[h]) for h in header])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


# --------------------------------------------------------------------------
# geometric sweeps


@dataclass(frozen=True)
class SweepSpec:
    x_range: tuple = (-0.5, 1.5)
    y_range: tuple = (-0.5, 1.5)
    step: float = 0.05
    t1: tuple = (0.0, 0.0)
    u1: tuple = (1.0, 0.0)
    u2: tuple = (1.0, -1.0)
    schemes: tuple = tuple(Scheme)
    p1: float = 10.0
    p2_list: tuple = (100.0,)
    seed: int = 0
    budgets: Budgets = field(default_factory=Budgets)
    normalize: bool = True
    pathloss_exponent: float = 3.0

    def __post_init__(self):
        if not self.step > 0:
            raise UsageError(f"grid step must be > 0, got {self.step}")
        for name in ("x_range", "y_range"):
            lo, hi = getattr(self, name)
            if hi < lo:
                raise UsageError(f"{name} must satisfy lo <= hi, got {(lo, hi)}")
        if not self.schemes:
            raise UsageError("at least one scheme is required")
        if not self.p2_list:
            raise UsageError("at least one P2 value is required")
        object.__setattr__(self, "schemes", tuple(Scheme(s) for s in self.schemes))

    def axis(self, rng) -> np.ndarray:
        lo, hi = rng
        n = int(math.floor((hi - lo) / self.step + 1e-9)) + 1
        return np.round(lo + self.step * np.arange(n), 12)

    def grid(self) -> list:
        """Grid points in row-major order (x outer, y inner)."""
        return [(float(x), float(y)) for x in self.axis(self.x_range) for y in self.axis(self.y_range)]

    def describe(self) -> dict:
        d = asdict(self)
        d["schemes"] = [s.value for s in self.schemes]
        return d


@dataclass(frozen=True)
class SchemeOutcome:
    r2: float
    feasible: bool
    params: dict


@dataclass(frozen=True)
class SweepRecord:
    x: float
    y: float
    p2: float
    status: str  # "ok", "not_decodable" or "colocated"
    eta1: float
    outcomes: dict  # scheme value -> SchemeOutcome

    @property
    def decodable(self) -> bool:
        return self.status == "ok"

    def r2(self, scheme: Scheme) -> float:
        return self.outcomes[scheme.value].r2

    def differences(self) -> dict:
        o = self.outcomes
        out = {}
        pairs = {"dpc_minus_nodpc": ("dpc_3phase", "nodpc_3phase"),
                 "dpc_minus_nodpc_single": ("dpc_single", "nodpc_single"),
                 "dpc_3phase_minus_single": ("dpc_3phase", "dpc_single"),
                 "nodpc_3phase_minus_single": ("nodpc_3phase", "nodpc_single")}
        for name, (a, b) in pairs.items():
            if a in o and b in o:
                out[name] = o[a].r2 - o[b].r2
        return out


def _no_outcome() -> SchemeOutcome:
    return SchemeOutcome(0.0, False, {k: float("nan") for k in PARAM_NAMES})


def _outcome(res: OptResult) -> SchemeOutcome:
    if res.best is None:
        return _no_outcome()
    p = res.best
    return SchemeOutcome(float(res.r2), True, {k: float(getattr(p, k)) for k in PARAM_NAMES})


def _solve_schemes(sc: Scenario, schemes, budgets, seed, warm=None) -> dict:
    """Solve single-phase schemes first and warm-start their three-phase peers."""
    warm = dict(warm or {})
    results = {}
    order = sorted(schemes, key=lambda s: not s.single)
    for s in order:
        ws = []
        if s in warm and warm[s].best is not None:
            ws.append(warm[s].best)
        if not s.single:
            peer = Scheme.DPC_SINGLE if s.dpc else Scheme.NODPC_SINGLE
            if peer in results and results[peer].best is not None:
                ws.append(results[peer].best)
        results[s] = solve(OptProblem(sc, s, budgets, seed, warm_starts=tuple(ws)))
    return results


def _point_gains(spec: SweepSpec, x, y):
    geo = Geometry(t1=spec.t1, u1=spec.u1, t2=(x, y), u2=spec.u2,
                   pathloss_exponent=spec.pathloss_exponent)
    return gains_from_geometry(geo, normalize=spec.normalize)


def _sweep_point(args):
    spec, (x, y) = args
    try:
        g = _point_gains(spec, x, y)
    except DomainError:
        return [SweepRecord(x, y, p2, "colocated", float("nan"),
                            {s.value: _no_outcome() for s in spec.schemes})
                for p2 in spec.p2_list]
    recs = []
    for p2 in spec.p2_list:
        sc = Scenario(g, spec.p1, p2)
        if not g.decodable():
            recs.append(SweepRecord(x, y, p2, "not_decodable", float("nan"),
                                    {s.value: _no_outcome() for s in spec.schemes}))
            continue
        res = _solve_schemes(sc, spec.schemes, spec.budgets, spec.seed)
        recs.append(SweepRecord(x, y, p2, "ok", eta1_min(sc),
                                {s.value: _outcome(res[s]) for s in spec.schemes}))
    return recs


def _map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items, chunksize=1))


def run_sweep(spec: SweepSpec, threads: int = 1) -> list:
    """One record per grid point and P2, in grid order; points where T2
    cannot decode the primary message are flagged rather than dropped."""
    pts = spec.grid()
    log.info("sweep over %d points x %d powers", len(pts), len(spec.p2_list))
    out = []
    for recs in _map(_sweep_point, [(spec, p) for p in pts], threads):
        out.extend(recs)
    return out


def sweep_rows(records, schemes):
    header = ["x", "y", "p2", "status", "eta1"]
    for s in schemes:
        header += [f"r2_{s.value}", f"feasible_{s.value}"] + [f"{k}_{s.value}" for k in PARAM_NAMES]
    diffs = list(records[0].differences()) if records else []
    header += diffs
    rows = []
    for r in records:
        row = {"x": r.x, "y": r.y, "p2": r.p2, "status": r.status, "eta1": r.eta1}
        for s in schemes:
            o = r.outcomes[s.value]
            row[f"r2_{s.value}"] = o.r2
            row[f"feasible_{s.value}"] = o.feasible
            for k in PARAM_NAMES:
                row[f"{k}_{s.value}"] = o.params[k]
        row.update(r.differences())
        rows.append(row)
    return header, rows


def write_sweep(records, spec: SweepSpec, out_dir, name: str = "sweep") -> Path:
    header, rows = sweep_rows(records, spec.schemes)
    return write_csv(Path(out_dir) / f"{name}_{spec_hash(spec.describe())}.csv", header, rows)


# --------------------------------------------------------------------------
# power scaling


@dataclass(frozen=True)
class PowerStudy:
    records: tuple  # (x, y, status, {scheme: (r2_low, r2_high)})
    p2_low: float
    p2_high: float

    def deltas(self, scheme: Scheme) -> np.ndarray:
        return np.array([r[3][scheme.value][1] - r[3][scheme.value][0]
                         for r in self.records if r[2] == "ok"])

    def median_gain_advantage(self) -> float:
        """Median over decodable points of the DPC gain minus the single-phase gain."""
        return float(np.median(self.deltas(Scheme.DPC_3PHASE) - self.deltas(Scheme.DPC_SINGLE)))


def _power_point(args):
    spec, (x, y), p_lo, p_hi, schemes = args
    try:
        g = _point_gains(spec, x, y)
    except DomainError:
        return (x, y, "colocated", {s.value: (0.0, 0.0) for s in schemes})
    if not g.decodable():
        return (x, y, "not_decodable", {s.value: (0.0, 0.0) for s in schemes})
    sc = Scenario(g, spec.p1, p_lo)
    lo = _solve_schemes(sc, schemes, spec.budgets, spec.seed)
    if p_hi == p_lo:
        hi = lo
    else:
        # the low-power optimum stays feasible with more power, so it seeds the search
        hi = _solve_schemes(sc.with_p2(p_hi), schemes, spec.budgets, spec.seed, warm=lo)
    return (x, y, "ok", {s.value: (_outcome(lo[s]).r2, _outcome(hi[s]).r2) for s in schemes})


def run_power_study(spec: SweepSpec, threads: int = 1) -> PowerStudy:
    """Compare two secondary power budgets (the first two entries of ``p2_list``)."""
    if len(spec.p2_list) != 2:
        raise UsageError("the power study needs exactly two P2 values")
    p_lo, p_hi = sorted(spec.p2_list)
    schemes = tuple(dict.fromkeys(spec.schemes + (Scheme.DPC_3PHASE, Scheme.DPC_SINGLE)))
    recs = _map(_power_point, [(spec, p, p_lo, p_hi, schemes) for p in spec.grid()], threads)
    return PowerStudy(tuple(recs), p_lo, p_hi)


def write_power_study(study: PowerStudy, spec: SweepSpec, out_dir) -> Path:
    schemes = sorted(study.records[0][3]) if study.records else []
    header = ["x", "y", "status"]
    for s in schemes:
        header += [f"r2_low_{s}", f"r2_high_{s}", f"delta_{s}"]
    rows = []
    for x, y, status, vals in study.records:
        row = {"x": x, "y": y, "status": status}
        for s in schemes:
            lo, hi = vals[s]
            row.update({f"r2_low_{s}": lo, f"r2_high_{s}": hi, f"delta_{s}": hi - lo})
        rows.append(row)
    return write_csv(Path(out_dir) / f"power_{spec_hash(spec.describe())}.csv", header, rows)


# --------------------------------------------------------------------------
# bound gap


@dataclass(frozen=True)
class BoundGapSpec:
    """Achievable rate on ``gains`` against the outer bound on the standard
    form ``(a, b, P1, p2_tilde_ratio * P2)``."""

    gains: ChannelGains = ChannelGains(1.0, 0.81, 0.05, 0.5, 10.0)
    p1: float = 10.0
    p2_grid: tuple = tuple(float(v) for v in np.linspace(0.0, 50.0, 26))
    a: complex = 0.1
    b: float = 0.9
    p2_tilde_ratio: float = 0.25
    lb_schemes: tuple = (Scheme.DPC_3PHASE, Scheme.NODPC_3PHASE)
    budgets: Budgets = field(default_factory=Budgets)
    search: SearchConfig = field(default_factory=SearchConfig)
    seed: int = 0

    def __post_init__(self):
        if any(p < 0 for p in self.p2_grid) or not self.p2_grid:
            raise UsageError("P2 grid must be nonempty and nonnegative")
        object.__setattr__(self, "lb_schemes", tuple(Scheme(s) for s in self.lb_schemes))

    def describe(self) -> dict:
        d = asdict(self)
        d["lb_schemes"] = [s.value for s in self.lb_schemes]
        return d


@dataclass(frozen=True)
class GapRecord:
    p2: float
    lb: float
    lb_scheme: str
    ub_raw: float
    ub_scaled: float
    gap: float
    eta1_star: float


def _gap_point(args):
    spec, p2, target, eta1 = args
    sc = Scenario(spec.gains, spec.p1, p2)
    best, which = 0.0, "silent"
    for s in spec.lb_schemes:
        r = solve(OptProblem(sc, s, spec.budgets, spec.seed))
        if r.best is not None and r.r2 > best:
            best, which = float(r.r2), s.value
    std = StandardizedChannel(complex(spec.a), spec.b, spec.p1, spec.p2_tilde_ratio * p2)
    ub = r2_outer(std, target, spec.search)
    ub_scaled = scale_ub(ub.value, eta1)
    return GapRecord(p2, best, which, ub.value, ub_scaled, ub_scaled - best, eta1)


def run_bound_gap(spec: BoundGapSpec, threads: int = 1) -> list:
    sc0 = Scenario(spec.gains, spec.p1, 0.0)
    target = baseline_secrecy_rate(sc0)
    eta1 = eta1_min(sc0)
    return _map(_gap_point, [(spec, p, target, eta1) for p in spec.p2_grid], threads)


def write_bound_gap(records, spec: BoundGapSpec, out_dir) -> Path:
    header = ["p2", "lb", "lb_scheme", "ub_raw", "ub_scaled", "gap", "eta1_star"]
    return write_csv(Path(out_dir) / f"boundgap_{spec_hash(spec.describe())}.csv", header,
                     [asdict(r) for r in records])


# --------------------------------------------------------------------------
# high-power slopes


@dataclass(frozen=True)
class DofSpec:
    t2: tuple = (0.5, 0.0)
    p1: float = 10.0
    p2_grid: tuple = tuple(10.0 ** k for k in range(2, 9))
    scheme: Scheme = Scheme.DPC_3PHASE
    # positions (taken from the default sweep grid) probed for rho2 at rho2_power
    rho2_positions: tuple = ((0.5, 0.0), (0.3, 0.0), (0.7, 0.0), (0.5, -0.3), (0.6, 0.2))
    rho2_power: float = 1e4
    budgets: Budgets = field(default_factory=Budgets)
    search: SearchConfig = field(default_factory=SearchConfig)
    seed: int = 0
    normalize: bool = True

    def describe(self) -> dict:
        d = asdict(self)
        d["scheme"] = Scheme(self.scheme).value
        return d


@dataclass(frozen=True)
class DofReport:
    ub_slope: float
    lb_slope: float
    eta2_high: float
    ub_values: tuple
    lb_values: tuple
    p2_grid: tuple
    rho2_at_power: tuple  # ((x, y), rho2)


def run_dof_study(spec: DofSpec, threads: int = 1) -> DofReport:
    g = gains_from_geometry(Geometry(t2=spec.t2), normalize=spec.normalize)
    sc = Scenario(g, spec.p1, spec.p2_grid[0])
    target = baseline_secrecy_rate(sc)
    ub = dof_ub(lambda p: standardize(g, spec.p1, p), spec.p2_grid, target, spec.search)

    state = {"warm": ()}

    def rate_at(p):
        r = solve(OptProblem(sc.with_p2(p), Scheme(spec.scheme), spec.budgets, spec.seed,
                             warm_starts=state["warm"]))
        if r.best is not None:
            state["warm"] = (r.best,)
        return r

    lb = dof_lb(rate_at, spec.p2_grid)
    rho = _map(_rho2_point, [(spec, pos) for pos in spec.rho2_positions], threads)
    return DofReport(ub.slope, lb.slope, float(lb.extra["eta2"][-1]), ub.values, lb.values,
                     ub.p2_grid, tuple(rho))


def _rho2_point(args):
    spec, pos = args
    g = gains_from_geometry(Geometry(t2=pos), normalize=spec.normalize)
    r = solve(OptProblem(Scenario(g, spec.p1, spec.rho2_power), Scheme(spec.scheme), spec.budgets, spec.seed))
    return (tuple(pos), float(r.best.rho2) if r.best is not None else float("nan"))


def write_dof(report: DofReport, spec: DofSpec, out_dir) -> Path:
    header = ["p2", "ub", "lb", "ub_slope", "lb_slope", "eta2_high"]
    rows = [{"p2": p, "ub": u, "lb": l, "ub_slope": report.ub_slope, "lb_slope": report.lb_slope,
             "eta2_high": report.eta2_high}
            for p, u, l in zip(report.p2_grid, report.ub_values, report.lb_values)]
    return write_csv(Path(out_dir) / f"dof_{spec_hash(spec.describe())}.csv", header, rows)
