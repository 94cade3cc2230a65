import cmath
import math

import numpy as np
import pytest

from latkam.errors import WidthError
from latkam.norms import WeightProfile
from latkam.series import (
    FTSeries,
    average,
    fourier_tail,
    poisson_bracket,
    series_product,
    split_by_degree,
    truncate_fourier,
)

W = WeightProfile(alpha=1.0, radius=8)


def random_series(rng, sites=(-1, 0, 1), max_mode=2, max_deg=2, n_terms=6,
                  s=1.0, r=1.0, real_sym=False):
    coeffs = {}
    for _ in range(n_terms):
        nu = {}
        for j in sites:
            if rng.random() < 0.5:
                v = int(rng.integers(-max_mode, max_mode + 1))
                if v:
                    nu[j] = v
        m = {}
        deg_budget = max_deg
        for j in sites:
            if deg_budget and rng.random() < 0.4:
                p = int(rng.integers(1, deg_budget + 1))
                m[j] = p
                deg_budget -= p
        c = rng.normal() + 1j * rng.normal()
        key = (tuple(sorted(nu.items())), tuple(sorted(m.items())))
        coeffs[key] = coeffs.get(key, 0j) + c
        if real_sym:
            mirror = (tuple(sorted((j, -v) for j, v in nu.items())), key[1])
            coeffs[mirror] = coeffs.get(mirror, 0j) + c.conjugate()
    return FTSeries(coeffs, s, r, W)


def sample_point(rng, series, s=None, r=None):
    s = series.s if s is None else s
    r = series.r if r is None else r
    sites = series.active_sites() or [0]
    # distribute the action budget so that sum |rho_j| w_j < s
    budget = rng.random() * s * 0.9
    parts = rng.random(len(sites))
    parts = parts / parts.sum() * budget
    rho = {}
    theta = {}
    for j, p in zip(sites, parts):
        phase = cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        rho[j] = p * series.weights.decay(j) * phase
        theta[j] = rng.uniform(0, 2 * math.pi) + 1j * rng.uniform(-0.9, 0.9) * r
    return rho, theta


def test_add_zero_and_scale_zero():
    rng = np.random.default_rng(1)
    g = random_series(rng)
    z = FTSeries.zero(W)
    assert (g + z).coeffs == g.coeffs
    scaled = g * 0.0
    assert len(scaled) == 0
    assert scaled.remainder == 0.0


def test_multiply_monomials():
    rho0 = FTSeries.term(1.0, {}, {0: 1}, W)
    sq = series_product(rho0, rho0)
    assert sq.coeff({}, {0: 2}) == pytest.approx(1.0)
    assert len(sq) == 1
    assert sq.remainder == 0.0


def test_multiply_degree_overflow_to_remainder():
    cubic = FTSeries.term(1.0, {}, {0: 3}, W)
    quartic = series_product(cubic, cubic)  # degree 6 > default cap 5
    assert len(quartic) == 0
    assert quartic.remainder == pytest.approx(1.0)  # s=1, site 0 weight 1


def test_algebra_width_rules():
    a = FTSeries.constant(1.0, W, s=1.0, r=1.0)
    b = FTSeries.constant(1.0, W, s=0.5, r=0.5)
    c = a + b
    assert c.s == 0.5 and c.r == 0.5
    tiny = FTSeries.constant(1.0, W, s=0.1, r=0.1)
    with pytest.raises(WidthError):
        a + tiny


def test_bracket_exponential_with_action():
    f = FTSeries.term(1.0, {0: 1}, {}, W)      # e^{i theta_0}
    g = FTSeries.term(1.0, {}, {0: 1}, W)      # rho_0
    br = poisson_bracket(f, g)
    assert br.coeff({0: 1}, {}) == pytest.approx(1j)
    assert len(br) == 1


def test_bracket_cos_with_quadratic():
    # {cos theta_0, rho_0^2} = -2 rho_0 sin theta_0
    f = FTSeries({(((0, 1),), ()): 0.5, (((0, -1),), ()): 0.5}, 1.0, 1.0, W)
    g = FTSeries.term(1.0, {}, {0: 2}, W)
    br = poisson_bracket(f, g)
    assert br.coeff({0: 1}, {0: 1}) == pytest.approx(1j)
    assert br.coeff({0: -1}, {0: 1}) == pytest.approx(-1j)


def test_bracket_antisymmetry_exact():
    rng = np.random.default_rng(2)
    for _ in range(20):
        f = random_series(rng)
        br = poisson_bracket(f, f)
        assert len(br) == 0


def test_bracket_bilinear():
    rng = np.random.default_rng(3)
    f, g, h = (random_series(rng) for _ in range(3))
    lhs = poisson_bracket(f, g + h)
    rhs = poisson_bracket(f, g) + poisson_bracket(f, h)
    diff = lhs - rhs
    assert diff.majorant_norm(0.5, 0.5) <= 1e-12 * max(
        1.0, lhs.majorant_norm(0.5, 0.5)
    )


def test_bracket_jacobi_identity():
    rng = np.random.default_rng(4)
    for _ in range(10):
        f = random_series(rng, max_deg=2, n_terms=4)
        g = random_series(rng, max_deg=2, n_terms=4)
        h = random_series(rng, max_deg=2, n_terms=4)
        total = (
            poisson_bracket(poisson_bracket(f, g), h)
            + poisson_bracket(poisson_bracket(g, h), f)
            + poisson_bracket(poisson_bracket(h, f), g)
        )
        scale = max(
            f.majorant_norm(0.5, 0.5)
            * g.majorant_norm(0.5, 0.5)
            * h.majorant_norm(0.5, 0.5),
            1.0,
        )
        assert total.drop_remainder().majorant_norm(0.5, 0.5) <= 1e-10 * scale


def test_bracket_leibniz():
    rng = np.random.default_rng(5)
    f = random_series(rng, max_deg=1, n_terms=3)
    g = random_series(rng, max_deg=1, n_terms=3)
    h = random_series(rng, max_deg=1, n_terms=3)
    lhs = poisson_bracket(f, series_product(g, h))
    rhs = series_product(poisson_bracket(f, g), h) + series_product(
        g, poisson_bracket(f, h)
    )
    diff = lhs - rhs
    assert diff.drop_remainder().majorant_norm(0.5, 0.5) <= 1e-12


def test_bracket_degree_law():
    rng = np.random.default_rng(6)
    for _ in range(20):
        p = int(rng.integers(0, 3))
        q = int(rng.integers(1, 3))
        f = random_series(rng, max_deg=p, n_terms=4)
        g = random_series(rng, max_deg=q, n_terms=4)
        br = poisson_bracket(f, g)
        assert br.max_degree() <= max(f.max_degree() + g.max_degree() - 1, 0)


def test_bracket_finite_difference_oracle():
    # independent check of the termwise bracket: central differences of the
    # two series at random real phase points
    rng = np.random.default_rng(7)
    f = random_series(rng, max_deg=2, n_terms=5)
    g = random_series(rng, max_deg=2, n_terms=5)
    br = poisson_bracket(f, g)
    sites = sorted(set(f.active_sites()) | set(g.active_sites()))
    h = 1e-6
    for _ in range(5):
        rho = {j: rng.uniform(0.01, 0.2) for j in sites}
        theta = {j: rng.uniform(0, 2 * math.pi) for j in sites}
        fd = 0j
        for j in sites:
            tp = dict(theta); tp[j] += h
            tm = dict(theta); tm[j] -= h
            rp = dict(rho); rp[j] += h
            rm = dict(rho); rm[j] -= h
            df_dth = (f.evaluate(rho, tp) - f.evaluate(rho, tm)) / (2 * h)
            dg_dth = (g.evaluate(rho, tp) - g.evaluate(rho, tm)) / (2 * h)
            df_drh = (f.evaluate(rp, theta) - f.evaluate(rm, theta)) / (2 * h)
            dg_drh = (g.evaluate(rp, theta) - g.evaluate(rm, theta)) / (2 * h)
            fd += df_dth * dg_drh - df_drh * dg_dth
        exact = br.evaluate(rho, theta)
        assert abs(exact - fd) <= 2e-4 * max(1.0, abs(exact))


def test_truncate_fourier():
    g = FTSeries(
        {(((0, 1),), ()): 1.0, (((0, 3),), ()): 1.0}, 1.0, 0.5, W
    )
    cut = truncate_fourier(g, 2)
    assert cut.coeff({0: 1}, {}) == pytest.approx(1.0)
    assert cut.coeff({0: 3}, {}) == 0j
    assert cut.remainder == pytest.approx(math.exp(0.5 * 3))
    tail = fourier_tail(g, 2)
    assert tail.coeff({0: 3}, {}) == pytest.approx(1.0)
    assert len(tail) == 1

    zero_mode_only = FTSeries.constant(2.0, W)
    assert truncate_fourier(zero_mode_only, 5).coeffs == zero_mode_only.coeffs
    m1 = truncate_fourier(g, 1)
    assert len(m1) == 0  # only the zero mode survives M=1


def test_average():
    g = FTSeries.term(1.0, {0: 1}, {}, W)
    assert len(average(g)) == 0
    h = FTSeries.constant(3.0, W) + FTSeries.term(1.0, {0: 1}, {1: 1}, W)
    avg = average(h)
    assert avg.coeff({}, {}) == pytest.approx(3.0)
    assert len(avg) == 1
    # (2 + cos theta_0) rho_0^2 -> 2 rho_0^2
    mix = FTSeries(
        {
            ((), ((0, 2),)): 2.0,
            (((0, 1),), ((0, 2),)): 0.5,
            (((0, -1),), ((0, 2),)): 0.5,
        },
        1.0, 1.0, W,
    )
    assert average(mix).coeff({}, {0: 2}) == pytest.approx(2.0)
    assert average(mix).remainder == 0.0


def test_split_by_degree_partition():
    rng = np.random.default_rng(8)
    g = random_series(rng, max_deg=2, n_terms=8)
    g = g + FTSeries.term(0.5, {}, {0: 3}, W) + FTSeries.term(1.0, {0: 1}, {1: 4}, W)
    g0, g1, g2, gh = split_by_degree(g)
    assert all(len(p[1]) == 0 for p in g0.coeffs)
    recomposed = g0 + g1 + g2 + gh
    assert recomposed.coeffs == g.coeffs
    assert recomposed.remainder == g.remainder
    quad = FTSeries.term(1.0, {}, {0: 2}, W)
    q0, q1, q2, qh = split_by_degree(quad)
    assert (len(q0), len(q1), len(qh)) == (0, 0, 0)
    assert q2.coeffs == quad.coeffs


def test_majorant_simple_values():
    c = FTSeries.constant(-2.5, W)
    assert c.majorant_norm(0.3, 0.3) == pytest.approx(2.5)
    rho0 = FTSeries.term(1.0, {}, {0: 1}, W)
    assert rho0.majorant_norm(0.1, 1.0) == pytest.approx(0.1)
    e0 = FTSeries.term(1.0, {0: 1}, {}, W)
    assert e0.majorant_norm(1.0, 0.5) == pytest.approx(math.exp(0.5), rel=1e-12)


def test_majorant_monotone_and_width_check():
    rng = np.random.default_rng(9)
    g = random_series(rng)
    assert g.majorant_norm(0.2, 0.2) <= g.majorant_norm(0.8, 0.8)
    with pytest.raises(WidthError):
        g.majorant_norm(2.0, 0.5)


def test_majorant_dominates_evaluation():
    rng = np.random.default_rng(10)
    g = random_series(rng, n_terms=8)
    for _ in range(100):
        rho, theta = sample_point(rng, g, s=0.5, r=0.5)
        val = abs(g.evaluate(rho, theta))
        assert val <= g.majorant_norm(0.5, 0.5) * (1 + 1e-12)


def test_reality_check():
    rng = np.random.default_rng(11)
    g = random_series(rng, real_sym=True)
    assert g.check_reality()
    bad = g + FTSeries.term(1.0 + 0.5j, {0: 2}, {}, W)
    assert not bad.check_reality()


def test_pruning_tiny_coefficients():
    g = FTSeries({((), ()): 1e-40}, 1.0, 1.0, W)
    assert len(g) == 0
    assert g.remainder == pytest.approx(1e-40)


def test_serialization_round_trip():
    rng = np.random.default_rng(12)
    g = random_series(rng, n_terms=6)
    g2 = FTSeries.from_dict(g.to_dict())
    assert g2.coeffs == g.coeffs
    assert g2.s == g.s and g2.r == g.r and g2.remainder == g.remainder


def test_derivatives():
    g = FTSeries.term(2.0, {0: 3}, {1: 2}, W)
    dth = g.dtheta(0)
    assert dth.coeff({0: 3}, {1: 2}) == pytest.approx(6j)
    drh = g.drho(1)
    assert drh.coeff({0: 3}, {1: 1}) == pytest.approx(4.0)
    assert len(g.dtheta(5)) == 0
    assert len(g.drho(0)) == 0
