import math

import numpy as np
import pytest

import modcop


def test_generator_vectorized():
    g = modcop.parse_generator("triangular")
    x = np.linspace(0.1, 0.9, 5)
    np.testing.assert_allclose(g.density(x), 2 * x)
    np.testing.assert_allclose(g.cdf(x), x**2)
    np.testing.assert_allclose(g.inverse_cdf(x**2), x)
    assert g.id == "triangular"
    assert repr(g) == "Generator('triangular')"


def test_parse_error_is_raised():
    with pytest.raises(modcop.ParseError, match="alpha"):
        modcop.parse_generator("beta:0,1")
    assert issubclass(modcop.ParseError, modcop.Error)
    assert issubclass(modcop.Error, RuntimeError)


def test_copula_cdf_and_margins():
    m = modcop.CopulaModel(3, "beta:1.5,1.5")
    value, err = m.cdf([1.0, 0.3, 1.0])
    assert value == pytest.approx(0.3, abs=1e-10)
    assert err >= 0.0
    assert m.cdf([0.0, 0.5, 0.5])[0] == 0.0
    p = m.partial_derivative([0.4, 0.5, 0.6], 0)
    assert 0.0 <= p <= 1.0
    assert -1.0 <= m.second_partial([0.4, 0.5, 0.6], 0, 1) <= 1.0
    with pytest.raises(modcop.BoundaryError):
        m.partial_derivative([0.0, 0.5, 0.5], 0)


def test_independence_copula():
    m = modcop.CopulaModel(2, modcop.parse_generator("uniform"))
    assert m.cdf([0.3, 0.4], method="exact")[0] == pytest.approx(0.12, abs=1e-12)
    assert m.density([0.2, 0.7]) == 1.0


def test_sample_and_statistics():
    m = modcop.CopulaModel(2, "beta:0.5,0.5")
    s = m.sample(20000, seed=5)
    assert s.shape == (20000, 2)
    assert np.all((s > 0) & (s < 1))
    np.testing.assert_array_equal(s, m.sample(20000, seed=5))
    rho, se = modcop.spearman_rho_sample(s)
    assert abs(rho - modcop.spearman_rho_closed_form(m.generator)) < 4 * se
    assert modcop.kendall_tau_sample(s) <= 2 / 3 + 0.02
    stat, p = modcop.ks_uniformity(s[:, 0])
    assert p > 0.001


def test_closed_form_rho():
    assert modcop.spearman_rho_closed_form(modcop.parse_generator("beta:1.5,1.5")) == pytest.approx(0.125, abs=1e-10)


def test_probe():
    w = modcop.unboundedness_probe(0.45, 0.55, 1e9)
    assert math.isfinite(w["value"]) and w["value"] > 1e9
    assert w["q"] == (1, 2)
    assert len(w["copula_point"]) == 2


def test_tail_diagnostic():
    pts = modcop.tail_diagnostic(modcop.CopulaModel(2, "beta:1.5,1.5"), [0.1, 0.05])
    assert pts[0][1] > pts[1][1]
    assert all(ratio <= bound for _, ratio, bound in pts)


def test_verify_reports_injection():
    clean = modcop.verify(["beta:1.5,1.5"], [2], ["nonnegativity"], samples=2000)
    assert all(r["passed"] for r in clean)
    broken = modcop.verify(["beta:1.5,1.5"], [2], ["nonnegativity"], inject="negate-weight", samples=2000)
    assert not all(r["passed"] for r in broken)
    assert "rho" in modcop.check_names()
