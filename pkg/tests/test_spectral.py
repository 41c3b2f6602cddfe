
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from oracles import euclidean_weights_kkt, mel_weights_brentq
from taildep.exceptions import DegenerateError, InfeasibleError
from taildep.spectral import (
    DEFAULT_NU_GRID,
    BetaSmoother,
    Kind,
    beta_smooth_cdf,
    beta_smooth_density,
    cross_validate_nu,
    empirical_spectral,
    estimate_spectral,
    euclidean_spectral,
    loo_scores,
    mel_spectral,
)


def integrate01(f, m=40):
    """Integral over (0, 1) robust to x^(a-1) endpoint singularities: x = t^m near each end."""
    def piece(t, side):
        h = 0.5 * t**m
        x = h if side == 0 else 1.0 - h
        if not 0.0 < x < 1.0:
            return 0.0
        return float(f(x)) * 0.5 * m * t ** (m - 1)

    return sum(quad(piece, 0, 1, args=(side,), limit=400, epsabs=1e-13)[0] for side in (0, 1))


def feasible_angles(rng, n):
    w = rng.uniform(size=n)
    w[0], w[1] = rng.uniform(0, 0.5), rng.uniform(0.5, 1)
    return w


angle_sets = st.lists(st.floats(0.0, 1.0), min_size=3, max_size=40).filter(
    lambda v: min(v) < 0.5 < max(v)
)


def test_empirical_cdf_examples():
    est = empirical_spectral([0.2, 0.8])
    assert est.cdf(0.5) == 0.5
    assert est.cdf(1.0) == 1.0
    assert est.cdf(0.1) == 0.0
    assert est.kind is Kind.EMPIRICAL


def test_mel_examples():
    est = mel_spectral([0.3, 0.7])
    assert est.lagrange == 0.0
    np.testing.assert_array_equal(est.weights, [0.5, 0.5])
    est = mel_spectral([0.25, 0.25, 1.0])
    ref, lam = mel_weights_brentq([0.25, 0.25, 1.0])
    np.testing.assert_allclose(est.weights, ref, atol=1e-12)
    assert est.lagrange == pytest.approx(lam, abs=1e-9)
    assert est.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert est.weights @ est.angles == pytest.approx(0.5, abs=1e-10)
    with pytest.raises(InfeasibleError):
        mel_spectral([0.1, 0.2])


def test_mel_all_half():
    est = mel_spectral([0.5, 0.5, 0.5])
    np.testing.assert_array_equal(est.weights, np.full(3, 1 / 3))


def test_euclidean_examples():
    est = euclidean_spectral([0.25, 0.5, 0.75])
    np.testing.assert_allclose(est.weights, 1 / 3, atol=1e-15)
    est = euclidean_spectral([0.0, 1.0, 1.0])
    np.testing.assert_allclose(est.weights, euclidean_weights_kkt([0.0, 1.0, 1.0]), atol=1e-10)
    assert est.weights @ est.angles == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_array_equal(euclidean_spectral([0.5, 0.5]).weights, [0.5, 0.5])
    with pytest.raises(DegenerateError):
        euclidean_spectral([0.2, 0.2])


def test_negative_euclidean_weights_flagged():
    est = euclidean_spectral([0.0] + [0.45] * 9 + [0.55])
    assert est.has_negative_weights
    with pytest.warns(UserWarning, match="negative"):
        BetaSmoother(est, 5.0)


@settings(max_examples=200, deadline=None)
@given(angle_sets)
def test_constraints_and_oracles(w):
    w = np.array(w)
    mel = mel_spectral(w)
    assert mel.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert abs(mel.weights @ w - 0.5) <= 1e-10
    assert np.all(mel.weights > 0)
    euc = euclidean_spectral(w)
    assert euc.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert abs(euc.weights @ w - 0.5) <= 1e-12
    if w.size <= 12:
        np.testing.assert_allclose(euc.weights, euclidean_weights_kkt(w), atol=1e-9)
    emp = empirical_spectral(w)
    assert np.all(emp.weights > 0) and emp.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_mel_matches_brent_oracle(rng):
    for _ in range(50):
        w = feasible_angles(rng, int(rng.integers(3, 200)))
        ref, _ = mel_weights_brentq(w)
        np.testing.assert_allclose(mel_spectral(w).weights, ref, rtol=1e-8, atol=1e-13)


def test_mel_reduces_to_empirical_when_centred():
    w = np.array([0.1, 0.4, 0.6, 0.9])
    np.testing.assert_array_equal(mel_spectral(w).weights, empirical_spectral(w).weights)


@pytest.mark.parametrize("kind", ["emp", "mel", "euc"])
def test_relabelling_symmetry(rng, kind):
    w = feasible_angles(rng, 30)
    a, b = estimate_spectral(w, kind), estimate_spectral(1.0 - w, kind)
    # continuity points only: avoid the angles and their reflections
    xs = np.setdiff1d(np.linspace(0.013, 0.987, 41), np.concatenate([w, 1 - w]))
    for x in xs:
        assert b.cdf(x) == pytest.approx(1.0 - a.cdf(1.0 - x), abs=1e-12)


def test_uniform_kernel_for_single_central_angle():
    est = empirical_spectral([0.5])
    x = np.linspace(0.05, 0.95, 7)
    np.testing.assert_allclose(beta_smooth_density(est, 2.0, x), 1.0)
    assert beta_smooth_cdf(est, 2.0, 0.3) == pytest.approx(0.3)
    assert beta_smooth_cdf(est, 2.0, 0.0) == 0.0
    assert beta_smooth_cdf(est, 2.0, 1.0) == pytest.approx(1.0)


@pytest.mark.parametrize("nu", [0.5, 3.0, 40.0, 500.0])
def test_symmetric_pair_mean(nu):
    est = euclidean_spectral([0.25, 0.75])
    np.testing.assert_allclose(est.weights, 0.5)
    sm = BetaSmoother(est, nu)
    m = quad(lambda x: x * sm.pdf(x), 0, 1, limit=200)[0]
    assert m == pytest.approx(0.5, abs=1e-8)


@pytest.mark.parametrize("nu", [0.5, 2.0, 25.0, 500.0])
def test_smoothed_density_moments(rng, nu):
    w = rng.uniform(0.05, 0.95, 60)
    w[0] = 0.1
    est = euclidean_spectral(w)
    sm = BetaSmoother(est, nu)
    if nu >= 25:
        pts = list(np.sort(w))
        total = quad(sm.pdf, 0, 1, limit=500, points=pts)[0]
        mean = quad(lambda x: x * sm.pdf(x), 0, 1, limit=500, points=pts)[0]
    else:
        # kernels with parameters < 1 put mass closer to 1 than doubles resolve;
        # integrate the bounded CDF instead: mean = 1 - int H
        total = float(sm.cdf(1.0) - sm.cdf(0.0))
        mean = 1.0 - quad(sm.cdf, 0, 1, limit=500, points=list(np.sort(w)))[0]
    assert total == pytest.approx(1.0, abs=1e-6)
    assert mean == pytest.approx(est.weights @ w, abs=1e-6)
    assert sm.cdf(1.0) == pytest.approx(1.0, abs=1e-12)


def test_density_matches_scipy_beta_mixture(rng):
    from scipy.stats import beta

    w = rng.uniform(0.05, 0.95, 25)
    w[0] = 0.2
    est = euclidean_spectral(w)
    for nu in (0.5, 3.0, 80.0):
        x = np.linspace(0.01, 0.99, 33)
        ref = beta.pdf(x[:, None], w * nu, (1 - w) * nu) @ est.weights
        np.testing.assert_allclose(beta_smooth_density(est, nu, x), ref, rtol=1e-10)
        refc = beta.cdf(x[:, None], w * nu, (1 - w) * nu) @ est.weights
        np.testing.assert_allclose(beta_smooth_cdf(est, nu, x), refc, rtol=1e-10, atol=1e-14)


def test_euclidean_density_integrates_to_one_tight(rng):
    w = rng.beta(3, 3, 80)
    est = euclidean_spectral(w)
    sm = BetaSmoother(est, 20.0) if not est.has_negative_weights else None
    if sm is not None:
        assert quad(sm.pdf, 0, 1, limit=400, epsabs=1e-12)[0] == pytest.approx(1.0, abs=1e-8)


def test_boundary_angles_are_clamped_for_smoothing():
    est = empirical_spectral([0.0, 1.0, 0.5, 0.5])
    sm = BetaSmoother(est, 10.0)
    assert np.all(np.isfinite(sm.pdf(np.linspace(0.001, 0.999, 50))))
    # raw estimator keeps unclamped angles
    assert est.angles[0] == 0.0


def test_cross_validation_matches_exhaustive(rng):
    w = rng.beta(2, 2, 200)
    est = empirical_spectral(w)
    grid = np.arange(1, 51, dtype=float)
    scores = loo_scores(est, grid)
    chosen = cross_validate_nu(est, grid)
    assert chosen == grid[int(np.argmax(scores))]
    # exhaustive oracle written out directly
    def score(nu):
        total = 0.0
        for i in range(w.size):
            others = np.delete(w, i)
            from scipy.stats import beta

            total += np.log(np.mean(beta.pdf(w[i], others * nu, (1 - others) * nu)))
        return total

    direct = [score(nu) for nu in grid[::7]]
    np.testing.assert_allclose(direct, scores[::7], rtol=1e-10)


def test_cross_validation_grid_rules(rng):
    est = empirical_spectral(rng.uniform(size=20))
    assert cross_validate_nu(est, [7.0]) == 7.0
    grid = [5.0, 5.0, 1000.0]
    assert cross_validate_nu(est, grid) == 5.0
    assert len(DEFAULT_NU_GRID) == 30
    with pytest.raises(ValueError):
        cross_validate_nu(est, [-1.0, 2.0])


def test_spectral_range_checks():
    with pytest.raises(ValueError):
        empirical_spectral([])
    with pytest.raises(ValueError):
        empirical_spectral([1.5])
