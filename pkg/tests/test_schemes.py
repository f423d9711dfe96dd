import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from gaussian import GaussianModel, dpc_phase2_model
from securecr.channel import ChannelGains, Geometry, equivalent_channels, gains_from_geometry
from securecr.errors import DomainError, InfeasibleError, PreconditionError, UsageError
from securecr.schemes import (TERM_NAMES, Scenario, SchemeParams, baseline_secrecy_rate, c, dpc_rate,
                              eta1_min, four_phase_r1_terms, mmse_alpha, no_dpc_rate,
                              silent_params, single_phase_rate, three_phase_capacity_form)

# high-precision decimal evaluations, frozen
BASELINE_GAP = 0.5408545641336789846
ETA1_GAP = 0.3470806750845547084


def geometry_gains(x, y):
    try:
        g = gains_from_geometry(Geometry(t2=(x, y)))
    except DomainError:
        return None
    return g if g.decodable() and abs(g.cTT) < 1e6 else None


positions = st.tuples(st.floats(-0.8, 0.95), st.floats(-0.95, 0.95)).map(lambda p: geometry_gains(*p)).filter(
    lambda g: g is not None)


@st.composite
def scheme_points(draw):
    g = draw(positions)
    sc = Scenario(g, draw(st.floats(0.1, 100.0)), draw(st.floats(0.0, 1000.0)))
    e1 = eta1_min(sc)
    assume(e1 < 0.999)
    u = draw(st.floats(0.0, 1.0))
    eta2 = u * (1 - e1)
    p = SchemeParams(eta2, (1 - e1) - eta2, draw(st.floats(0.0, 0.999)), draw(st.floats(0.0, 1.0)),
                     draw(st.floats(0.0, 1.0)), draw(st.floats(0.0, 500.0)), draw(st.floats(0.0, 500.0)))
    return sc, p


class TestCapacity:
    def test_values(self):
        assert c(0) == 0.0
        assert c(1) == 1.0
        assert c(10) == pytest.approx(3.4594316186372973, abs=1e-14)

    def test_negative(self):
        with pytest.raises(DomainError):
            c(-1e-3)

    def test_vectorized(self):
        np.testing.assert_allclose(c(np.array([0.0, 1.0, 3.0])), [0.0, 1.0, 2.0])


class TestBaseline:
    def test_gap_scenario(self, gap_gains):
        sc = Scenario(gap_gains, 10.0, 0.0)
        assert baseline_secrecy_rate(sc) == pytest.approx(BASELINE_GAP, abs=1e-14)
        assert sc.r_s1_target == pytest.approx(BASELINE_GAP, abs=1e-14)

    def test_clamped(self):
        assert baseline_secrecy_rate(Scenario(ChannelGains(1.0, 1.2, 0.1, 0.5, 3.0), 10.0, 1.0)) == 0.0

    def test_no_eavesdropper(self):
        assert baseline_secrecy_rate(Scenario(ChannelGains(1.0, 0.0, 0.1, 0.5, 3.0), 10.0, 1.0)) == c(10.0)

    def test_scenario_validation(self, gap_gains):
        with pytest.raises(DomainError):
            Scenario(gap_gains, 0.0, 1.0)
        with pytest.raises(DomainError):
            Scenario(gap_gains, 1.0, -1.0)
        with pytest.raises(DomainError):
            Scenario(gap_gains, 1.0, 1.0, -0.1)


class TestEta1:
    def test_gap_scenario(self, gap_gains):
        e1 = eta1_min(Scenario(gap_gains, 10.0, 0.0))
        assert e1 == pytest.approx(ETA1_GAP, abs=1e-14)
        assert round(e1, 4) == 0.3471

    def test_strong_link(self):
        e1 = eta1_min(Scenario(ChannelGains(1.0, 0.5, 0.1, 0.5, 1e8), 10.0, 1.0))
        assert e1 < 0.07

    def test_boundary_rejected(self):
        with pytest.raises(InfeasibleError, match="decodability"):
            eta1_min(Scenario(ChannelGains(1.0, 0.5, 0.1, 0.5, 1.0), 10.0, 1.0))


class TestSchemeParams:
    def test_validation(self):
        with pytest.raises(DomainError):
            SchemeParams(0.5, 0.5, 0, 0, 0, 0, 0)  # eta1 = 0
        with pytest.raises(DomainError):
            SchemeParams(0.3, 0.2, 1.0, 0, 0, 0, 0)
        with pytest.raises(DomainError):
            SchemeParams(0.3, 0.2, 0, 0, 1.5, 0, 0)
        with pytest.raises(DomainError):
            SchemeParams(0.3, 0.2, 0, 0, 0, -1, 0)

    def test_derived(self):
        p = SchemeParams(0.3, 0.2, 0.5, 0.0, 0.2, 10.0, 5.0)
        assert p.eta1 == pytest.approx(0.5)
        assert p.average_power == pytest.approx(4.0)
        assert p.p_u2 == pytest.approx(4.0)


class TestDpc:
    sc = Scenario(gains_from_geometry(Geometry(t2=(0.6, 0.1))), 10.0, 100.0)

    def test_zero_eta2(self):
        p = SchemeParams(0.0, 0.3, 0.1, 0.1, 0.5, 0.0, 50.0)
        assert dpc_rate(self.sc, p).r2 == 0.0

    def test_no_own_power(self):
        assert dpc_rate(self.sc, SchemeParams(0.3, 0.2, 0.0, 0.0, 1.0, 80.0, 10.0)).r2 == 0.0
        assert dpc_rate(self.sc, SchemeParams(0.3, 0.2, 1 - 1e-15, 0.0, 0.2, 80.0, 10.0)).r2 < 1e-12

    def test_rate_formula(self):
        p = SchemeParams(0.3, 0.2, 0.2, 0.3, 0.4, 120.0, 50.0)
        g22 = abs(self.sc.gains.c22) ** 2
        pu = 0.8 * 0.6 * 120.0
        expect = 0.3 * math.log2(1 + g22 * pu / (1 + g22 * 0.2 * 120.0))
        assert dpc_rate(self.sc, p).r2 == pytest.approx(expect, rel=1e-14)

    def test_terms_match_gaussian_logdet(self):
        """Closed-form phase terms against covariance log-determinants of the
        dirty-paper construction V2 = U + alpha (c12/c22) X1."""
        sc = self.sc
        g = sc.gains
        rng = np.random.default_rng(11)
        for _ in range(50):
            p = SchemeParams(0.3, 0.2, 0.9 * rng.random(), rng.random(), rng.random(),
                             200 * rng.random() + 1e-3, 100 * rng.random())
            rep = dpc_rate(sc, p)
            eq = equivalent_channels(g, p, sc.p1)
            m = dpc_phase2_model(eq.c12_p2, eq.c11_p2, g.c21, g.c22, sc.p1, p.p_u2,
                                 p.rho2 * p.p2_2, rep.mmse_alpha)
            t = rep.per_phase_terms
            checks = {
                "I(V1;V2)": (["V1"], ["V2"]),
                "I(V2;Y2'(2))": (["V2"], ["Y2"]),
                "I(V1,V2;Y2'(2))": (["V1", "V2"], ["Y2"]),
                "I(V1;V2,Y2'(2))": (["V1"], ["V2", "Y2"]),
                "I(V1;Y2'(2))": (["V1"], ["Y2"]),
                "I(V1;Y1'(2))": (["V1"], ["Y1"]),
            }
            for name, (a, b) in checks.items():
                assert t[name] == pytest.approx(m.mi(a, b), abs=1e-9), name
            # phase 3: relay plus jamming only
            m3 = GaussianModel([sc.p1, p.rho3 * p.p2_3, 1.0, 1.0])
            m3.define("V1", [1, 0, 0, 0])
            m3.define("Y1", [eq.c11_p3, g.c21, 1, 0])
            m3.define("Y2", [eq.c12_p3, g.c22, 0, 1])
            assert t["I(V1;Y1'(3))"] == pytest.approx(m3.mi(["V1"], ["Y1"]), abs=1e-9)
            assert t["I(V1;Y2'(3))"] == pytest.approx(m3.mi(["V1"], ["Y2"]), abs=1e-9)
            # the secondary rate is the Costa rate I(V2;Y2') - I(V2;V1)
            costa = m.mi(["V2"], ["Y2"]) - m.mi(["V2"], ["V1"])
            assert rep.r2 == pytest.approx(p.eta2 * costa, abs=1e-9)

    def test_mmse_alpha(self):
        p = SchemeParams(0.3, 0.2, 0.2, 0.3, 0.4, 120.0, 50.0)
        g22 = abs(self.sc.gains.c22) ** 2
        pu = p.p_u2
        assert mmse_alpha(self.sc, p) == pytest.approx(g22 * pu / (1 + g22 * (pu + 24.0)))

    def test_report_lists_all_terms(self):
        rep = dpc_rate(self.sc, SchemeParams(0.3, 0.2, 0.2, 0.3, 0.4, 120.0, 50.0))
        assert tuple(rep.per_phase_terms) == TERM_NAMES

    def test_power_violation_reported(self):
        rep = dpc_rate(self.sc, SchemeParams(0.3, 0.2, 0.0, 0.0, 0.0, 1000.0, 0.0))
        assert not rep.feasible
        assert any("power" in v for v in rep.violations)

    @given(scheme_points())
    def test_terms_nonnegative_finite(self, pt):
        sc, p = pt
        for rep in (dpc_rate(sc, p), no_dpc_rate(sc, p)):
            for v in rep.per_phase_terms.values():
                assert math.isfinite(v) and v >= 0.0

    @given(scheme_points())
    def test_dpc_dominates_pointwise(self, pt):
        sc, p = pt
        assert dpc_rate(sc, p).r2 >= no_dpc_rate(sc, p).r2 - 1e-12

    @given(scheme_points(), st.floats(0.0, 1.0))
    def test_monotone_in_own_power(self, pt, shrink):
        sc, p = pt
        from dataclasses import replace
        q = replace(p, gamma=p.gamma + (1 - p.gamma) * shrink)  # less own power, same jamming
        assert dpc_rate(sc, q).r2 <= dpc_rate(sc, p).r2 + 1e-12


class TestSilentNeutrality:
    @given(positions, st.floats(0.1, 100.0), st.floats(0.0, 1.0), st.floats(0, 0.99), st.floats(0, 1),
           st.floats(0, 1))
    def test_residuals_vanish(self, g, p1, u, rho2, rho3, gamma):
        sc = Scenario(g, p1, 10.0)
        e1 = eta1_min(sc)
        p = SchemeParams(u * (1 - e1), (1 - u) * (1 - e1), rho2, rho3, gamma, 0.0, 0.0)
        rep = dpc_rate(sc, p)
        assert rep.r2 == 0.0
        assert abs(rep.residual_secrecy) <= 1e-9
        if abs(g.c12) < 1:
            assert abs(rep.residual_reliability) <= 1e-9
        assert rep.feasible == (abs(g.c12) < 1 or rep.residual_reliability >= -1e-6)

    def test_silent_params_helper(self, gap_gains):
        sc = Scenario(gap_gains, 10.0, 5.0)
        rep = dpc_rate(sc, silent_params(eta1_min(sc)))
        assert rep.feasible and rep.r2 == 0.0


class TestNoDpc:
    sc = Scenario(gains_from_geometry(Geometry(t2=(0.6, 0.1))), 10.0, 100.0)

    def test_zero_eta2(self):
        assert no_dpc_rate(self.sc, SchemeParams(0.0, 0.3, 0.1, 0.1, 0.5, 0.0, 50.0)).r2 == 0.0

    def test_interference_in_denominator(self):
        p = SchemeParams(0.3, 0.2, 0.2, 0.3, 0.4, 120.0, 50.0)
        g = self.sc.gains
        eq = equivalent_channels(g, p, self.sc.p1)
        g22 = abs(g.c22) ** 2
        expect = 0.3 * c(g22 * p.p_u2 / (1 + g22 * 24.0 + abs(eq.c12_p2) ** 2 * 10.0))
        assert no_dpc_rate(self.sc, p).r2 == pytest.approx(expect, rel=1e-14)

    def test_vanishing_primary_power_matches_dpc(self):
        # without relaying the only primary interference at U2 is |c12|^2 P1;
        # a relayed copy would keep power gamma * P22 even as P1 vanishes
        sc = Scenario(self.sc.gains, 1e-9, 100.0)
        p = SchemeParams(0.3, 0.2, 0.2, 0.3, 0.0, 120.0, 50.0)
        assert no_dpc_rate(sc, p).r2 == pytest.approx(dpc_rate(sc, p).r2, abs=1e-8)

    def test_inequality_feasibility(self):
        e1 = eta1_min(self.sc)
        silent = no_dpc_rate(self.sc, silent_params(e1))
        assert silent.residual_secrecy == 0.0
        # heavy relaying beats the eavesdropper by a margin: a strict inequality is fine
        p = SchemeParams(0.2, 1 - e1 - 0.2, 0.0, 0.0, 1.0, 10.0, 100.0)
        rep = no_dpc_rate(self.sc, p)
        assert rep.residual_reliability > 1e-3 and rep.feasible


class TestSinglePhase:
    @given(scheme_points())
    def test_equals_dpc_with_no_relay_phase(self, pt):
        sc, p = pt
        from dataclasses import replace
        e1 = eta1_min(sc)
        q = replace(p, eta2=1 - e1, eta3=0.0, rho3=0.0, p2_3=0.0)
        a, b = single_phase_rate(sc, p, dpc=True), dpc_rate(sc, q)
        assert a.r2 == b.r2 and a.residual_secrecy == b.residual_secrecy
        assert single_phase_rate(sc, p, dpc=False).r2 == no_dpc_rate(sc, q).r2


class TestFourPhase:
    sc = Scenario(gains_from_geometry(Geometry(t2=(0.5, 0.0))), 10.0, 100.0)

    def test_collapse(self):
        r4, r3 = four_phase_r1_terms(self.sc, 0.3, 0.0, 40.0, 0.0, 0.0, 40.0)
        assert r4 == r3

    def test_pure_jamming_phase(self):
        from securecr.schemes import _phase3_secrecy
        r4, _ = four_phase_r1_terms(self.sc, 0.0, 0.3, 0.0, 40.0, 0.5, 40.0)
        assert r4 == pytest.approx(0.3 * float(_phase3_secrecy(self.sc.gains, 10.0, 1.0, 40.0)), abs=1e-12)

    def test_linking_constraints(self):
        with pytest.raises(PreconditionError):
            four_phase_r1_terms(self.sc, 0.2, 0.1, 40.0, 40.0, 0.0, 40.0, eta3=0.4)
        with pytest.raises(PreconditionError):
            four_phase_r1_terms(self.sc, 0.2, 0.1, 40.0, 40.0, 0.0, 30.0)


class TestCapacityForm:
    def test_identical_phases(self):
        assert three_phase_capacity_form([(3.0, 1.0)] * 3, [0.2, 0.3, 0.5]) == pytest.approx(2.0)

    def test_zero_length_phase(self):
        a = three_phase_capacity_form([(3.0, 1.0), (9.0, 0.0), (2.0, 1.0)], [0.5, 0.0, 0.5])
        assert a == pytest.approx(1.5)

    def test_linearity(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            terms = [tuple(rng.random(2) * 5) for _ in range(3)]
            f = rng.dirichlet(np.ones(3))
            direct = sum(fk * (a - b) for fk, (a, b) in zip(f, terms))
            assert three_phase_capacity_form(terms, f) == pytest.approx(direct, abs=1e-12)

    def test_bad_fractions(self):
        with pytest.raises(UsageError):
            three_phase_capacity_form([(1, 0)] * 3, [0.5, 0.5, 0.5])
        with pytest.raises(UsageError):
            three_phase_capacity_form([(1, 0)] * 2, [0.5, 0.5, 0.0])
