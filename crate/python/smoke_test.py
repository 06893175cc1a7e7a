"""Smoke test for the frame_lr_py extension.

Build and install first:
    pip install --no-build-isolation ./crates/python
then run `python3 python/smoke_test.py`.
"""

import math

import mpmath
import numpy as np

import frame_lr_py as fl


def check_theta3():
    for tau in (0.1, 0.5, 1.0, 3.0):
        expect = float(mpmath.jtheta(3, 0, mpmath.exp(-mpmath.pi * tau)))
        got = fl.theta3(tau)
        assert abs(got - expect) <= 1e-14 * expect, (tau, got, expect)


def check_overlap():
    alpha = 1.3
    z = fl.overlap((0, 0, 0), (0, 2, 1), alpha)
    d2 = (2 * alpha) ** 2 + alpha**2
    assert abs(abs(z) - math.exp(-d2 / 4)) < 1e-14
    assert fl.overlap((0, 0, 0), (1, 0, 0), alpha) == 0


def check_frame():
    pair = fl.Frame([(0, 0, 0), (0, 1, 0)], 2.0)
    g = np.array(pair.gram())
    assert g.shape == (2, 2)
    assert np.allclose(g, g.conj().T, atol=0)
    assert np.allclose(np.diag(g), 1.0)
    assert abs(g[0, 1] - math.exp(-1.0)) < 1e-15
    assert pair.regime == "overcomplete" and abs(pair.delta - 4.0) < 1e-15

    assert fl.regime(math.sqrt(2 * math.pi)) == "threshold"
    assert fl.regime(3.0) == "incomplete"

    sq = fl.Frame.square(math.sqrt(math.pi), 6)
    tau = math.pi / (4 * math.pi)
    assert abs(sq.bessel_bound() - fl.theta3(tau) ** 2) < 1e-12
    eig = np.linalg.eigvalsh(np.array(sq.gram()))
    assert eig.max() <= sq.bessel_bound() * (1 + 1e-9)
    cert = sq.certificate(1)
    assert 0 < cert["lambda_p"] < 1 and cert["s_min"] > 0


def check_lr():
    chain = fl.Frame([(0, i, 0) for i in range(3)], 1.0)
    rep = chain.lr_check(t_max=1.0, n_t=3)
    assert rep["passed"] and rep["exceedances"] == 0
    assert rep["rows"] == 3 * 9
    assert rep["csv"].startswith("t,gamma,gamma_prime,d,F,bound,ratio\n")
    c = chain.c_phi()
    assert abs(c["c_phi"] - rep["c_phi"]) < 1e-12
    control = chain.lr_check(t_max=1.0, n_t=3, v_scale=1e-6)
    assert not control["passed"] and control["exceedances"] > 0


if __name__ == "__main__":
    check_theta3()
    check_overlap()
    check_frame()
    check_lr()
    print("smoke test passed")
