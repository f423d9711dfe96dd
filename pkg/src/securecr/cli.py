"""Command-line front end.

    securecr [--config FILE] [--seed N] [--out DIR] [--threads N] COMMAND

Commands: rates, optimize, sweep, boundgap, dof, dmc. Settings come from a
sectioned key=value file; ``configs/example.ini`` documents every key.

Exit codes: 0 success, 1 a check against a reference file failed,
2 configuration error, 3 infeasible problem, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments as ex
from .bounds import SearchConfig
from .channel import ChannelGains, Geometry, gains_from_geometry
from .errors import DomainError, InfeasibleError, UsageError
from .info_theory import (brute_force_best_r2, bundled_dir, load_instance, proposition1_rate,
                          theorem1_rate)
from .optimizer import Budgets, OptProblem, Scheme, Status, Tolerances, solve
from .schemes import (TERM_NAMES, Scenario, SchemeParams, baseline_secrecy_rate, dpc_rate,
                      eta1_min, no_dpc_rate, silent_params, single_phase_rate)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3, 4

log = logging.getLogger("securecr")


class ConfigError(UsageError):
    pass


# --------------------------------------------------------------------------
# config parsing


class Config:
    """Typed access to an INI file; every error names its section and key."""

    def __init__(self, parser: configparser.ConfigParser, source: str = "<defaults>"):
        self.cp = parser
        self.source = source

    @classmethod
    def load(cls, path) -> "Config":
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        if path is None:
            return cls(cp)
        p = Path(path)
        try:
            with p.open() as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {p}: {exc}") from None
        return cls(cp, str(p))

    def has(self, sec, key) -> bool:
        return self.cp.has_option(sec, key)

    def raw(self, sec, key, default=None):
        if self.cp.has_option(sec, key):
            return self.cp.get(sec, key).strip()
        return default

    def _err(self, sec, key, msg):
        return ConfigError(f"[{sec}] {key}: {msg}")

    def float(self, sec, key, default=None):
        v = self.raw(sec, key)
        if v is None:
            if default is None:
                raise self._err(sec, key, "missing")
            return default
        try:
            out = float(v)
        except ValueError:
            raise self._err(sec, key, f"not a number: {v!r}") from None
        if not math.isfinite(out):
            raise self._err(sec, key, f"must be finite, got {v!r}")
        return out

    def int(self, sec, key, default=None):
        v = self.raw(sec, key)
        if v is None:
            if default is None:
                raise self._err(sec, key, "missing")
            return default
        try:
            return int(v)
        except ValueError:
            raise self._err(sec, key, f"not an integer: {v!r}") from None

    def bool(self, sec, key, default=False):
        if not self.has(sec, key):
            return default
        try:
            return self.cp.getboolean(sec, key)
        except ValueError:
            raise self._err(sec, key, f"not a boolean: {self.raw(sec, key)!r}") from None

    def power(self, sec, key, default=None):
        v = self.raw(sec, key)
        if v is None:
            if default is None:
                raise self._err(sec, key, "missing")
            return default
        return parse_power(v, f"[{sec}] {key}")

    def powers(self, sec, key, default=None):
        v = self.raw(sec, key)
        if v is None:
            if default is None:
                raise self._err(sec, key, "missing")
            return default
        return tuple(parse_power(t, f"[{sec}] {key}") for t in v.split(",") if t.strip())

    def floats(self, sec, key, n=None, default=None):
        v = self.raw(sec, key)
        if v is None:
            if default is None:
                raise self._err(sec, key, "missing")
            return default
        try:
            out = tuple(float(t) for t in v.split(","))
        except ValueError:
            raise self._err(sec, key, f"expected comma-separated numbers, got {v!r}") from None
        if n is not None and len(out) != n:
            raise self._err(sec, key, f"expected {n} values, got {len(out)}")
        return out

    def complexes(self, sec, key, n):
        v = self.raw(sec, key)
        if v is None:
            raise self._err(sec, key, "missing")
        try:
            out = tuple(complex(t.strip().replace(" ", "")) for t in v.split(","))
        except ValueError:
            raise self._err(sec, key, f"expected comma-separated (complex) numbers, got {v!r}") from None
        if len(out) != n:
            raise self._err(sec, key, f"expected {n} values, got {len(out)}")
        return out


def parse_power(text: str, where: str = "power") -> float:
    """``'20db'`` -> 100.0, ``'10lin'`` -> 10.0; bare numbers are rejected."""
    t = text.strip().lower().replace(" ", "")
    for suffix, conv in (("db", ex.db_to_lin), ("lin", float)):
        if t.endswith(suffix):
            try:
                val = float(t[: -len(suffix)])
            except ValueError:
                break
            out = conv(val)
            if not math.isfinite(out) or out < 0:
                raise ConfigError(f"{where}: power must be finite and >= 0, got {text!r}")
            return out
    raise ConfigError(f"{where}: power needs a 'db' or 'lin' suffix, got {text!r}")


def _gains(cfg: Config, sec="scenario") -> ChannelGains:
    has_geo = cfg.has(sec, "t2")
    has_raw = cfg.has(sec, "gains")
    if has_geo == has_raw:
        raise ConfigError(f"[{sec}] give exactly one of 't2' (geometry) or 'gains' (c11,c12,c21,c22,cTT)")
    normalize = cfg.bool(sec, "normalize", True)
    try:
        if has_raw:
            g = ChannelGains(*cfg.complexes(sec, "gains", 5))
            return g.normalized() if normalize else g
        geo = Geometry(
            t1=cfg.floats(sec, "t1", 2, (0.0, 0.0)),
            u1=cfg.floats(sec, "u1", 2, (1.0, 0.0)),
            t2=cfg.floats(sec, "t2", 2),
            u2=cfg.floats(sec, "u2", 2, (1.0, -1.0)),
            pathloss_exponent=cfg.float(sec, "pathloss_exponent", 3.0),
        )
        return gains_from_geometry(geo, normalize=normalize)
    except DomainError as exc:
        raise ConfigError(f"[{sec}] {exc}") from None


def _scenario(cfg: Config) -> Scenario:
    g = _gains(cfg)
    p1 = cfg.power("scenario", "p1")
    p2 = cfg.power("scenario", "p2", 0.0)
    target = cfg.float("scenario", "r_s1_target") if cfg.has("scenario", "r_s1_target") else None
    try:
        return Scenario(g, p1, p2, target)
    except DomainError as exc:
        raise ConfigError(f"[scenario] {exc}") from None


def _budgets(cfg: Config) -> Budgets:
    s = "optimizer"
    try:
        return Budgets(n_starts=cfg.int(s, "n_starts", 64), max_evals=cfg.int(s, "max_evals", 2000),
                       init_step=cfg.float(s, "init_step", 0.25), min_step=cfg.float(s, "min_step", 1e-7),
                       sqp_iters=cfg.int(s, "sqp_iters", 200))
    except UsageError as exc:
        raise ConfigError(f"[{s}] {exc}") from None


def _tolerances(cfg: Config) -> Tolerances:
    try:
        return Tolerances(cfg.float("optimizer", "feasibility_tol", 1e-6), cfg.float("optimizer", "gamma_tol", 1e-8))
    except UsageError as exc:
        raise ConfigError(f"[optimizer] {exc}") from None


def _scheme(text: str, where: str) -> Scheme:
    try:
        return Scheme(text.strip().lower())
    except ValueError:
        valid = ", ".join(s.value for s in Scheme)
        raise ConfigError(f"{where}: unknown scheme {text!r}; valid: {valid}") from None


def _schemes(cfg: Config, sec, default=tuple(Scheme)):
    v = cfg.raw(sec, "schemes")
    if v is None:
        return default
    return tuple(_scheme(t, f"[{sec}] schemes") for t in v.split(",") if t.strip())


def _search(cfg: Config, seed) -> SearchConfig:
    s = "outer_bound"
    try:
        return SearchConfig(n_samples=cfg.int(s, "n_samples", 20000), eps=cfg.float(s, "eps", 1e-3),
                            n_refine=cfg.int(s, "n_refine", 10), refine_rounds=cfg.int(s, "refine_rounds", 3),
                            seed=seed, complex_rho=cfg.bool(s, "complex_rho", False),
                            match=cfg.raw(s, "match", "eq"), face_mass=cfg.float(s, "face_mass", 0.05))
    except UsageError as exc:
        raise ConfigError(f"[{s}] {exc}") from None


def _seed(cfg: Config, args) -> int:
    seed = args.seed if args.seed is not None else cfg.int("optimizer", "seed", 0)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


# --------------------------------------------------------------------------
# commands


def cmd_rates(cfg: Config, args) -> int:
    sc = _scenario(cfg)
    scheme = _scheme(cfg.raw("params", "scheme", "dpc_3phase"), "[params] scheme")
    print(f"baseline secrecy rate R_S1 = {baseline_secrecy_rate(sc):.6f}")
    print(f"target secrecy rate       = {sc.r_s1_target:.6f}")
    try:
        e1 = eta1_min(sc)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}")
        return EXIT_INFEASIBLE
    print(f"eta1* = {e1:.4f}")
    if cfg.cp.has_section("params"):
        s = "params"
        try:
            p = SchemeParams(eta2=cfg.float(s, "eta2"), eta3=cfg.float(s, "eta3", 0.0),
                             rho2=cfg.float(s, "rho2", 0.0), rho3=cfg.float(s, "rho3", 0.0),
                             gamma=cfg.float(s, "gamma", 0.0), p2_2=cfg.power(s, "p2_2", 0.0),
                             p2_3=cfg.power(s, "p2_3", 0.0))
        except DomainError as exc:
            raise ConfigError(f"[params] {exc}") from None
    else:
        p = silent_params(e1)
    if scheme.single:
        rep = single_phase_rate(sc, p, dpc=scheme.dpc)
    else:
        rep = (dpc_rate if scheme.dpc else no_dpc_rate)(sc, p)
    print(f"scheme = {scheme.value}")
    for k, v in p.as_dict().items():
        print(f"  {k:6s} = {v:.6g}")
    for name in TERM_NAMES:
        print(f"  {name:18s} = {rep.per_phase_terms[name]:.10f}")
    print(f"r2 = {rep.r2:.10f}")
    print(f"residual_reliability = {rep.residual_reliability:.3e}")
    print(f"residual_secrecy     = {rep.residual_secrecy:.3e}")
    print(f"feasible = {rep.feasible}" + (f" ({'; '.join(rep.violations)})" if rep.violations else ""))
    if args.out:
        row = {"scheme": scheme.value, "eta1_star": e1, "r2": rep.r2, "feasible": rep.feasible,
               "residual_reliability": rep.residual_reliability, "residual_secrecy": rep.residual_secrecy}
        row.update(p.as_dict())
        row.update(rep.per_phase_terms)
        header = list(row)
        path = ex.write_csv(Path(args.out) / f"rates_{ex.spec_hash({'src': _describe(cfg), 'seed': None})}.csv",
                            header, [row])
        print(f"wrote {path}")
    return EXIT_OK


def cmd_optimize(cfg: Config, args) -> int:
    sc = _scenario(cfg)
    scheme = _scheme(cfg.raw("optimizer", "scheme", "dpc_3phase"), "[optimizer] scheme")
    seed = _seed(cfg, args)
    prob = OptProblem(sc, scheme, _budgets(cfg), seed, _tolerances(cfg))
    res = solve(prob)
    print(f"scheme = {scheme.value}")
    print(f"status = {res.status.value}")
    if res.status is Status.NO_FEASIBLE_POINT:
        print(f"infeasible: {res.diagnostic}")
        return EXIT_INFEASIBLE
    print(f"eta1* = {res.eta1:.4f}")
    print(f"r2 = {res.r2:.10f}")
    for k, v in res.best.as_dict().items():
        print(f"  {k:6s} = {float(v):.10g}")
    print(f"power budget binding = {res.power_binding}")
    if args.out:
        header = ["start", "origin", "start_feasible", "r2", "evals"]
        rows = [{"start": t.index, "origin": t.origin, "start_feasible": t.start_feasible,
                 "r2": t.r2, "evals": t.evals} for t in res.trace]
        path = ex.write_csv(Path(args.out) / f"optimize_{ex.spec_hash({'src': _describe(cfg), 'seed': seed})}.csv",
                            header, rows)
        print(f"wrote {path}")
    return EXIT_OK


def _sweep_spec(cfg: Config, seed) -> ex.SweepSpec:
    s = "sweep"
    try:
        return ex.SweepSpec(
            x_range=cfg.floats(s, "x_range", 2, (-0.5, 1.5)),
            y_range=cfg.floats(s, "y_range", 2, (-0.5, 1.5)),
            step=cfg.float(s, "step", 0.05),
            t1=cfg.floats(s, "t1", 2, (0.0, 0.0)),
            u1=cfg.floats(s, "u1", 2, (1.0, 0.0)),
            u2=cfg.floats(s, "u2", 2, (1.0, -1.0)),
            schemes=_schemes(cfg, s),
            p1=cfg.power(s, "p1", 10.0),
            p2_list=cfg.powers(s, "p2", (100.0,)),
            seed=seed,
            budgets=_budgets(cfg),
            normalize=cfg.bool(s, "normalize", True),
        )
    except UsageError as exc:
        raise ConfigError(f"[{s}] {exc}") from None


def cmd_sweep(cfg: Config, args) -> int:
    spec = _sweep_spec(cfg, _seed(cfg, args))
    out = Path(args.out or "results")
    if cfg.bool("sweep", "power_study", False):
        study = ex.run_power_study(spec, args.threads)
        path = ex.write_power_study(study, spec, out)
        print(f"median DPC gain advantage over single phase = {study.median_gain_advantage():.6f}")
    else:
        recs = ex.run_sweep(spec, args.threads)
        path = ex.write_sweep(recs, spec, out)
        n_ok = sum(r.decodable for r in recs)
        print(f"{len(recs)} records, {n_ok} decodable")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_boundgap(cfg: Config, args) -> int:
    s = "boundgap"
    seed = _seed(cfg, args)
    g = _gains(cfg)
    p1 = cfg.power("scenario", "p1")
    n = cfg.int(s, "n_points", 26)
    p2_max = cfg.power(s, "p2_max", 50.0)
    if n < 1:
        raise ConfigError(f"[{s}] n_points must be >= 1")
    try:
        spec = ex.BoundGapSpec(
            gains=g, p1=p1, p2_grid=tuple(float(v) for v in np.linspace(0.0, p2_max, n)),
            a=cfg.complexes(s, "a", 1)[0] if cfg.has(s, "a") else 0.1,
            b=cfg.float(s, "b", 0.9), p2_tilde_ratio=cfg.float(s, "p2_tilde_ratio", 0.25),
            lb_schemes=_schemes(cfg, s, (Scheme.DPC_3PHASE, Scheme.NODPC_3PHASE)),
            budgets=_budgets(cfg), search=_search(cfg, seed), seed=seed)
    except (UsageError, DomainError) as exc:
        raise ConfigError(f"[{s}] {exc}") from None
    recs = ex.run_bound_gap(spec, args.threads)
    path = ex.write_bound_gap(recs, spec, Path(args.out or "results"))
    for r in recs:
        print(f"P2={r.p2:8.3f}  LB={r.lb:.4f} ({r.lb_scheme})  UB={r.ub_scaled:.4f}  gap={r.gap:.4f}")
    print(f"max gap = {max(r.gap for r in recs):.4f}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_dof(cfg: Config, args) -> int:
    s = "dof"
    seed = _seed(cfg, args)
    lo, hi = cfg.floats(s, "log10_p2_range", 2, (2.0, 8.0))
    if hi <= lo:
        raise ConfigError(f"[{s}] log10_p2_range must be increasing")
    grid = tuple(10.0 ** k for k in np.arange(lo, hi + 1e-9, cfg.float(s, "log10_step", 1.0)))
    pos = cfg.floats(s, "rho2_positions", default=(0.5, 0.0, 0.3, 0.0, 0.7, 0.0, 0.5, -0.3, 0.6, 0.2))
    if len(pos) % 2:
        raise ConfigError(f"[{s}] rho2_positions needs x,y pairs")
    spec = ex.DofSpec(
        t2=cfg.floats(s, "t2", 2, (0.5, 0.0)), p1=cfg.power(s, "p1", 10.0), p2_grid=grid,
        scheme=_scheme(cfg.raw(s, "scheme", "dpc_3phase"), f"[{s}] scheme"),
        rho2_positions=tuple(zip(pos[0::2], pos[1::2])), rho2_power=cfg.power(s, "rho2_power", 1e4),
        budgets=_budgets(cfg), search=_search(cfg, seed), seed=seed)
    try:
        rep = ex.run_dof_study(spec, args.threads)
    except UsageError as exc:
        raise ConfigError(f"[{s}] {exc}") from None
    print(f"upper-bound slope = {rep.ub_slope:.4f}")
    print(f"lower-bound slope = {rep.lb_slope:.4f} (eta2 at highest power = {rep.eta2_high:.4f})")
    for (x, y), rho in rep.rho2_at_power:
        print(f"rho2 at T2=({x:g},{y:g}), P2={spec.rho2_power:g}: {rho:.3e}")
    path = ex.write_dof(rep, spec, Path(args.out or "results"))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_dmc(cfg: Config, args) -> int:
    s = "dmc"
    directory = Path(cfg.raw(s, "dir", str(bundled_dir())))
    name = cfg.raw(s, "instance", "bsc_2ary")
    try:
        scheme = load_instance(directory, name)
    except OSError as exc:
        raise ConfigError(f"[{s}] cannot read PMF files for {name!r} in {directory}: {exc.strerror}") from None
    except (UsageError, DomainError) as exc:
        raise ConfigError(f"[{s}] {exc}") from None
    mode = cfg.raw(s, "mode", "theorem1")
    if mode not in ("theorem1", "three_phase"):
        raise ConfigError(f"[{s}] mode must be 'theorem1' or 'three_phase', got {mode!r}")
    if mode == "three_phase":
        fr = cfg.floats(s, "phase_fractions", 3)
        try:
            scheme = replace(scheme, phase_fractions=fr)
        except (UsageError, DomainError) as exc:
            raise ConfigError(f"[{s}] {exc}") from None
        rep = proposition1_rate(scheme)
    else:
        rep = theorem1_rate(scheme)
    vals = {"r2": rep.r2, "r_s1": rep.r_s1, "r_s1_prime": rep.r_s1_prime,
            "reliability": rep.constraint_residuals["reliability"],
            "secrecy": rep.constraint_residuals["secrecy"]}
    print(f"instance = {name}")
    for k, v in vals.items():
        print(f"  {k:12s} = {v:.12f}")
    status = EXIT_OK
    golden = cfg.raw(s, "golden")
    if golden is not None:
        gpath = bundled_dir() / "golden.json" if golden == "bundled" else Path(golden)
        try:
            ref = json.loads(gpath.read_text())[name]
        except OSError as exc:
            raise ConfigError(f"[{s}] cannot read golden file {gpath}: {exc.strerror}") from None
        except (KeyError, ValueError):
            raise ConfigError(f"[{s}] golden file {gpath} has no valid entry for {name!r}") from None
        worst = max(abs(vals[k] - ref[k]) for k in vals)
        ok = worst <= 1e-10
        print(f"golden check: {'match' if ok else 'MISMATCH'} (max deviation {worst:.2e})")
        status = EXIT_OK if ok else EXIT_CHECK
    if cfg.has(s, "search_step"):
        step = cfg.float(s, "search_step")
        try:
            found = brute_force_best_r2(scheme, step, secrecy_mode=cfg.raw(s, "secrecy_mode", "eq"))
        except UsageError as exc:
            raise ConfigError(f"[{s}] {exc}") from None
        if found.report is None:
            print(f"grid search: no feasible scheme among {found.n_candidates} candidates")
        else:
            print(f"grid search: best r2 = {found.report.r2:.10f} "
                  f"({found.n_feasible} of {found.n_candidates} candidates feasible)")
        vals["search_best_r2"] = found.report.r2 if found.report else float("nan")
    if args.out:
        path = ex.write_csv(Path(args.out) / f"dmc_{ex.spec_hash(_describe(cfg))}.csv", list(vals), [vals])
        print(f"wrote {path}")
    return status


COMMANDS = {"rates": cmd_rates, "optimize": cmd_optimize, "sweep": cmd_sweep,
            "boundgap": cmd_boundgap, "dof": cmd_dof, "dmc": cmd_dmc}


def _describe(cfg: Config) -> dict:
    return {s: dict(cfg.cp.items(s)) for s in cfg.cp.sections()}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="securecr", description=__doc__.split("\n")[0])
    ap.add_argument("--config", help="INI configuration file")
    ap.add_argument("--seed", type=int, help="seed for every stochastic step (unsigned 64-bit)")
    ap.add_argument("--out", help="output directory for CSV files")
    ap.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    ap.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    ap.add_argument("command", choices=sorted(COMMANDS))
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=args.log_level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")
        cfg = Config.load(args.config)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, UsageError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
