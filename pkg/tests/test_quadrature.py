import math

import numpy as np
import pytest

from bertrand._quadrature import abel_kernel, endpoint_singular, gauss_legendre, graded_singular
from bertrand.apsidal import apsidal_sweep
from bertrand.errors import ToleranceNotMet
from bertrand.potentials import RadialProblem, power_law


def test_gauss_legendre_polynomial():
    val, err, order = gauss_legendre(lambda x: x**5 - 3 * x, 0.0, 2.0, 1e-13)
    assert val == pytest.approx(64 / 6 - 6, abs=1e-13)
    assert order == 16


def test_gauss_legendre_raises():
    with pytest.raises(ToleranceNotMet):
        gauss_legendre(lambda x: np.abs(x - 0.3) ** 0.5, 0.0, 1.0, 1e-15, max_order=64)


@pytest.mark.parametrize("a, b", [(0.0, 1.0), (-2.0, 5.0), (1e3, 1e3 + 1e-6)])
def test_endpoint_singular_chebyshev_weight(a, b):
    # int_a^b dx / sqrt((x - a)(b - x)) = pi
    val, _, _ = endpoint_singular(lambda x, left, right: 1 / np.sqrt(left * right), a, b, 1e-12)
    assert val == pytest.approx(math.pi, abs=1e-12)


def test_graded_singular_matches():
    a, b = 1e-8, 1.0
    breaks = [4e-8 * 4**j for j in range(10)]

    def f(x, left, right):
        return np.sqrt(x) / np.sqrt(left * right)

    plain, _, _ = endpoint_singular(f, a, b, 1e-12, max_order=4096)
    graded, _, _ = graded_singular(f, a, b, breaks, 1e-12)
    assert graded == pytest.approx(plain, abs=1e-10)


def test_abel_kernel():
    # int_0^E w / sqrt(E - w) dw = (4/3) E**1.5
    val, _, _ = abel_kernel(lambda w, off: off, 0.0, 2.0, 1e-12)
    assert val == pytest.approx(4 / 3 * 2**1.5, abs=1e-12)
    assert abel_kernel(lambda w, off: off, 1.0, 1.0, 1e-12) == (0.0, 0.0, 0)


def test_sweep_reports_tolerance_failures():
    prob = RadialProblem(power_law(0.5, attractive=True))
    rows = apsidal_sweep(prob, [0.5 * prob.V_R], [1.0], tol=1e-30)
    assert rows[0].status == "tol_fail"
