import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from securecr.channel import Geometry, gains_from_geometry
from securecr.kernels import BACKEND, PyRateKernel, compiled_kernel
from securecr.schemes import Scenario, SchemeParams, dpc_rate, eta1_min, no_dpc_rate, rate_kernel

CK = compiled_kernel()
needs_compiled = pytest.mark.skipif(CK is None, reason="compiled extension not built")

SC = Scenario(gains_from_geometry(Geometry(t2=(0.6, 0.0))), 10.0, 100.0)
E1 = eta1_min(SC)

args = st.tuples(st.floats(0.0, 1.0), st.floats(0.0, 0.999), st.floats(0.0, 1.0), st.floats(0.0, 1.0),
                 st.floats(0.0, 400.0), st.floats(0.0, 400.0))


def unpack(a):
    u, rho2, rho3, gamma, p22, p23 = a
    share = 1.0 - E1
    eta2 = u * share
    return eta2, share - eta2, rho2, rho3, gamma, p22, p23


@needs_compiled
class TestBackendAgreement:
    @given(args)
    def test_dpc_eval(self, a):
        py, cy = rate_kernel(SC, E1, PyRateKernel), rate_kernel(SC, E1, CK)
        np.testing.assert_allclose(cy.dpc_eval(*unpack(a)), py.dpc_eval(*unpack(a)), rtol=1e-12, atol=1e-12)

    @given(args)
    def test_nodpc_eval(self, a):
        py, cy = rate_kernel(SC, E1, PyRateKernel), rate_kernel(SC, E1, CK)
        np.testing.assert_allclose(cy.nodpc_eval(*unpack(a)), py.nodpc_eval(*unpack(a)), rtol=1e-12, atol=1e-12)

    @given(args)
    def test_resolved_points(self, a):
        py, cy = rate_kernel(SC, E1, PyRateKernel), rate_kernel(SC, E1, CK)
        eta2, eta3, rho2, rho3, _, p22, p23 = unpack(a)
        for name in ("dpc_point", "nodpc_point", "dpc_violation", "nodpc_violation"):
            v_py = getattr(py, name)(eta2, eta3, rho2, rho3, p22, p23)
            v_cy = getattr(cy, name)(eta2, eta3, rho2, rho3, p22, p23)
            np.testing.assert_allclose(v_cy, v_py, rtol=1e-10, atol=1e-12)


@given(args)
def test_kernel_matches_dpc_rate(a):
    eta2, eta3, rho2, rho3, gamma, p22, p23 = unpack(a)
    k = rate_kernel(SC, E1)
    r2, rel, sec = k.dpc_eval(eta2, eta3, rho2, rho3, gamma, p22, p23)
    rep = dpc_rate(SC, SchemeParams(eta2, eta3, rho2, rho3, gamma, p22, p23))
    assert r2 == pytest.approx(rep.r2, abs=1e-10)
    assert rel == pytest.approx(rep.residual_reliability, abs=1e-10)
    assert sec == pytest.approx(rep.residual_secrecy, abs=1e-10)


@given(args)
def test_kernel_matches_no_dpc_rate(a):
    eta2, eta3, rho2, rho3, gamma, p22, p23 = unpack(a)
    r2, slack = rate_kernel(SC, E1).nodpc_eval(eta2, eta3, rho2, rho3, gamma, p22, p23)
    rep = no_dpc_rate(SC, SchemeParams(eta2, eta3, rho2, rho3, gamma, p22, p23))
    assert r2 == pytest.approx(rep.r2, abs=1e-10)
    assert slack == pytest.approx(rep.residual_reliability, abs=1e-10)


def test_resolved_gamma_is_feasible():
    k = rate_kernel(SC, E1)
    share = 1.0 - E1
    r2, gamma = k.dpc_point(0.5 * share, 0.5 * share, 0.0, 0.0, 80.0, 20.0)
    if gamma >= 0:
        rep = dpc_rate(SC, SchemeParams(0.5 * share, 0.5 * share, 0.0, 0.0, gamma, 80.0, 20.0))
        assert rep.feasible
        assert rep.r2 == pytest.approx(r2, abs=1e-12)


def test_backend_name():
    assert BACKEND in ("cython", "python")
    if CK is not None and not os.environ.get("SECURECR_PURE_PYTHON"):
        assert BACKEND == "cython"


def test_pure_python_switch():
    env = dict(os.environ, SECURECR_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import securecr.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
