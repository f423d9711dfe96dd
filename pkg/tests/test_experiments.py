import csv
import math

import numpy as np
import pytest

from securecr.bounds import SearchConfig
from securecr.errors import UsageError
from securecr.experiments import (BoundGapSpec, DofSpec, SweepSpec, db_to_lin, run_bound_gap, run_dof_study,
                                  run_power_study, run_sweep, spec_hash, sweep_rows, write_bound_gap,
                                  write_csv, write_dof, write_power_study, write_sweep)
from securecr.optimizer import Budgets, Scheme
from securecr.schemes import Scenario, SchemeParams, dpc_rate, no_dpc_rate, single_phase_rate

FAST = Budgets(n_starts=2, max_evals=300)


def small_spec(**kw):
    base = dict(x_range=(0.6, 0.6), y_range=(0.0, 0.0), step=0.1, budgets=FAST, p2_list=(100.0,))
    base.update(kw)
    return SweepSpec(**base)


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_db_to_lin():
    assert db_to_lin(10.0) == pytest.approx(10.0)
    assert db_to_lin(0.0) == 1.0


def test_spec_hash_stable():
    assert spec_hash({"a": 1, "b": 2}) == spec_hash({"b": 2, "a": 1})
    assert len(spec_hash(small_spec().describe())) == 12
    assert spec_hash(small_spec().describe()) != spec_hash(small_spec(seed=1).describe())


class TestSweepSpec:
    def test_grid_order(self):
        s = SweepSpec(x_range=(0.0, 0.2), y_range=(-0.1, 0.0), step=0.1)
        assert s.grid() == [(0.0, -0.1), (0.0, 0.0), (0.1, -0.1), (0.1, 0.0), (0.2, -0.1), (0.2, 0.0)]

    def test_default_size(self):
        assert len(SweepSpec().grid()) == 41 * 41

    @pytest.mark.parametrize("kw", [dict(step=0.0), dict(x_range=(1.0, 0.0)), dict(schemes=()),
                                    dict(p2_list=())])
    def test_validation(self, kw):
        with pytest.raises(UsageError):
            SweepSpec(**kw)


class TestSweep:
    def test_single_point(self, tmp_path):
        spec = small_spec()
        recs = run_sweep(spec)
        assert len(recs) == 1
        r = recs[0]
        assert r.decodable and r.status == "ok"
        assert set(r.outcomes) == {s.value for s in Scheme}
        path = write_sweep(recs, spec, tmp_path)
        rows = read(path)
        assert len(rows) == 1
        assert float(rows[0]["r2_dpc_3phase"]) == r.r2(Scheme.DPC_3PHASE)
        assert "dpc_minus_nodpc" in rows[0]

    def test_params_revalidate(self):
        spec = small_spec()
        r = run_sweep(spec)[0]
        from securecr.experiments import _point_gains
        sc = Scenario(_point_gains(spec, r.x, r.y), spec.p1, r.p2)
        for s in Scheme:
            o = r.outcomes[s.value]
            p = SchemeParams(**o.params)
            if s.single:
                rep = single_phase_rate(sc, p, dpc=s.dpc)
            else:
                rep = dpc_rate(sc, p) if s.dpc else no_dpc_rate(sc, p)
            assert rep.feasible
            assert rep.r2 == pytest.approx(o.r2, abs=1e-12)

    def test_flagged_points(self):
        # (0, 0) is T1 itself; (-0.5, 1.5) is farther from T1 than U1 is
        spec = SweepSpec(x_range=(-0.5, 0.0), y_range=(0.0, 1.5), step=0.5, budgets=FAST,
                         schemes=(Scheme.DPC_SINGLE,), p2_list=(10.0, 100.0))
        recs = run_sweep(spec)
        assert len(recs) == len(spec.grid()) * 2
        status = {(r.x, r.y): r.status for r in recs}
        assert status[(0.0, 0.0)] == "colocated"
        assert status[(-0.5, 1.5)] == "not_decodable"
        for r in recs:
            if not r.decodable:
                assert math.isnan(r.eta1)
                assert not r.outcomes["dpc_single"].feasible

    def test_threads_identical(self, tmp_path):
        spec = SweepSpec(x_range=(0.5, 0.7), y_range=(0.0, 0.0), step=0.1, budgets=FAST,
                         schemes=(Scheme.DPC_SINGLE, Scheme.NODPC_3PHASE))
        one = write_sweep(run_sweep(spec, threads=1), spec, tmp_path / "a")
        two = write_sweep(run_sweep(spec, threads=2), spec, tmp_path / "b")
        assert one.read_bytes() == two.read_bytes()

    def test_empty_rows(self):
        header, rows = sweep_rows([], (Scheme.DPC_SINGLE,))
        assert rows == [] and header[:5] == ["x", "y", "p2", "status", "eta1"]


def test_write_csv_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="cannot write"):
        write_csv(blocker / "sub" / "x.csv", ["a"], [{"a": 1}])


def test_write_csv_precision(tmp_path):
    p = write_csv(tmp_path / "x.csv", ["a", "b", "c"], [{"a": 0.1 + 0.2, "b": True, "c": np.int64(3)}])
    assert p.read_text().splitlines()[1] == "0.30000000000000004,1,3"


class TestPowerStudy:
    def test_identical_arms(self):
        spec = small_spec(p2_list=(50.0, 50.0), schemes=(Scheme.DPC_SINGLE,))
        st = run_power_study(spec)
        assert st.median_gain_advantage() == 0.0
        np.testing.assert_array_equal(st.deltas(Scheme.DPC_SINGLE), [0.0])

    def test_more_power_helps(self, tmp_path):
        spec = small_spec(p2_list=(100.0, 10.0), schemes=(Scheme.DPC_SINGLE, Scheme.DPC_3PHASE))
        st = run_power_study(spec)
        assert (st.p2_low, st.p2_high) == (10.0, 100.0)
        for s in (Scheme.DPC_SINGLE, Scheme.DPC_3PHASE):
            assert np.all(st.deltas(s) >= -1e-9)
        rows = read(write_power_study(st, spec, tmp_path))
        assert len(rows) == 1 and "delta_dpc_3phase" in rows[0]

    def test_needs_two_powers(self):
        with pytest.raises(UsageError):
            run_power_study(small_spec())


class TestBoundGap:
    def test_zero_power(self, tmp_path):
        spec = BoundGapSpec(p2_grid=(0.0,), budgets=FAST, search=SearchConfig(n_samples=2048, n_refine=2))
        (rec,) = run_bound_gap(spec)
        assert rec.lb == 0.0 and rec.lb_scheme == "silent"
        assert rec.gap == pytest.approx(rec.ub_scaled, abs=0.0)
        assert rec.ub_scaled == pytest.approx((1 - rec.eta1_star) * rec.ub_raw, abs=1e-15)
        assert rec.eta1_star == pytest.approx(0.3470806750845547, abs=1e-12)
        rows = read(write_bound_gap([rec], spec, tmp_path))
        assert float(rows[0]["gap"]) == rec.gap

    def test_gap_nonnegative(self):
        spec = BoundGapSpec(p2_grid=(10.0, 40.0), budgets=FAST, search=SearchConfig(n_samples=4096, n_refine=3))
        for rec in run_bound_gap(spec):
            assert rec.lb > 0.0
            assert rec.gap >= -1e-6

    def test_validation(self):
        with pytest.raises(UsageError):
            BoundGapSpec(p2_grid=(-1.0,))
        with pytest.raises(UsageError):
            BoundGapSpec(p2_grid=())


def test_dof_study_smoke(tmp_path):
    spec = DofSpec(p2_grid=(1e2, 1e4, 1e6), budgets=FAST, rho2_positions=((0.5, 0.0),), rho2_power=1e3,
                   search=SearchConfig(n_samples=2048, n_refine=2))
    rep = run_dof_study(spec)
    assert len(rep.ub_values) == len(rep.lb_values) == 3
    assert 0.0 < rep.eta2_high < 1.0
    assert all(b >= a - 1e-9 for a, b in zip(rep.ub_values, rep.ub_values[1:]))
    path = write_dof(rep, spec, tmp_path)
    assert path.exists()
