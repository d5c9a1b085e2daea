import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from surromod.errors import (DegenerateColumnError, DomainError,
                             InsufficientDataError, InvalidArgumentError)
from surromod.transforms import (BoxCoxParams, StandardizeParams,
                                 apply_boxcox, apply_standardize, fit_boxcox,
                                 fit_pipeline, fit_standardize,
                                 identity_pipeline, invert_boxcox,
                                 invert_standardize, pushforward_gaussian,
                                 _boxcox_llf)


# ---------------------------------------------------------------- standardize

def test_standardize_hand_example():
    p = fit_standardize(np.array([[0.0], [2.0]]))
    assert p.mean[0] == 1.0
    assert p.std[0] == pytest.approx(np.sqrt(2.0))


def test_standardize_constant_column_rejected():
    with pytest.raises(DegenerateColumnError, match="col1"):
        fit_standardize(np.array([[1.0, 1.0], [2.0, 1.0], [3.0, 1.0]]),
                        names=["col0", "col1"])


def test_standardize_refit_idempotent(rng):
    X = rng.normal(3.0, 2.5, size=(200, 3))
    Z = apply_standardize(fit_standardize(X), X)
    p2 = fit_standardize(Z)
    np.testing.assert_allclose(p2.mean, 0.0, atol=1e-12)
    np.testing.assert_allclose(p2.std, 1.0, atol=1e-12)


def test_standardize_identity_params():
    p = StandardizeParams(np.zeros(2), np.ones(2))
    X = np.array([[1.0, -4.0], [0.5, 2.0]])
    np.testing.assert_array_equal(apply_standardize(p, X), X)


def test_standardize_arithmetic():
    p = StandardizeParams(np.array([1.0]), np.array([2.0]))
    np.testing.assert_array_equal(apply_standardize(p, np.array([[3.0]])),
                                  [[1.0]])


def test_standardize_roundtrip(rng):
    X = rng.random((50, 4)) * 10 - 3
    p = fit_standardize(X)
    np.testing.assert_allclose(invert_standardize(p, apply_standardize(p, X)),
                               X, rtol=1e-12)


def test_standardize_dimension_mismatch():
    p = StandardizeParams(np.zeros(2), np.ones(2))
    with pytest.raises(InvalidArgumentError):
        apply_standardize(p, np.zeros((3, 3)))


# -------------------------------------------------------------------- box-cox

def test_boxcox_lognormal_lambda_near_zero(rng):
    y = np.exp(rng.standard_normal((1000, 1)))
    p = fit_boxcox(y)
    assert -0.2 <= p.lam[0] <= 0.2


def test_boxcox_normal_lambda_near_one(rng):
    y = rng.normal(10.0, 1.0, size=(1000, 1))
    p = fit_boxcox(y)
    assert 0.7 <= p.lam[0] <= 1.3


def test_boxcox_shift_makes_data_positive(rng):
    y = rng.normal(-5.0, 1.0, size=(100, 1))
    p = fit_boxcox(y)
    assert p.shift[0] > 0
    assert np.all(y[:, 0] + p.shift[0] > 0)


def test_boxcox_positive_data_no_shift(rng):
    y = rng.random((100, 1)) + 5.0
    assert fit_boxcox(y).shift[0] == 0.0


def test_boxcox_insufficient_rows():
    with pytest.raises(InsufficientDataError):
        fit_boxcox(np.array([[1.0], [2.0]]))


def test_boxcox_log_of_e():
    # lambda=0 branch: pre-standardization transform of e is exactly 1
    post = StandardizeParams(np.zeros(1), np.ones(1))
    p = BoxCoxParams(np.array([0.0]), np.array([0.0]), post)
    np.testing.assert_allclose(apply_boxcox(p, np.array([[np.e]])), [[1.0]],
                               rtol=1e-15)


def test_boxcox_lambda_one_is_affine(rng):
    y = rng.random((20, 1)) + 1.0
    post = StandardizeParams(np.zeros(1), np.ones(1))
    p = BoxCoxParams(np.array([1.0]), np.array([0.0]), post)
    np.testing.assert_allclose(apply_boxcox(p, y), y - 1.0, rtol=1e-14)


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.2, 1.0, 5.0, 40.0]))
@settings(max_examples=30)
def test_boxcox_roundtrip_property(seed, scale):
    rng = np.random.default_rng(seed)
    y = rng.gamma(2.0, scale, size=(40, 2)) - (scale if seed % 2 else 0.0)
    p = fit_boxcox(y)
    back = invert_boxcox(p, apply_boxcox(p, y))
    np.testing.assert_allclose(back, y, rtol=1e-9, atol=1e-9 * scale)


def test_boxcox_monotone(rng):
    y = np.sort(rng.gamma(3.0, 2.0, size=(60, 1)), axis=0)
    p = fit_boxcox(y)
    t = apply_boxcox(p, y)
    assert np.all(np.diff(t[:, 0]) > 0)


def test_boxcox_lambda_beats_grid_oracle(rng):
    """MLE property: fitted lambda's likelihood >= 1e-3-grid scan max - 1e-6."""
    y = rng.gamma(2.0, 3.0, size=(200, 1))
    p = fit_boxcox(y)
    z = y[:, 0] + p.shift[0]
    logz_sum = float(np.log(z).sum())
    grid = np.arange(-5.0, 5.0, 1e-3)
    grid_best = max(_boxcox_llf(l, z, logz_sum) for l in grid)
    assert _boxcox_llf(p.lam[0], z, logz_sum) >= grid_best - 1e-6


def _intermittent_column(rng, n=400, zero_share=0.4):
    """A load-like column: exact zeros for a block of rows, gamma otherwise."""
    y = rng.gamma(2.0, 30.0, size=n)
    y[rng.permutation(n)[: int(zero_share * n)]] = 0.0
    return y


def test_boxcox_point_mass_guard_log_joins_spike(rng):
    Y = np.column_stack([
        _intermittent_column(rng),
        np.exp(rng.standard_normal(400)),  # continuous, lognormal-ish
    ])
    p = fit_boxcox(Y, point_mass_share=0.25)
    # spiked-at-zero column: log map, shifted by the lower decile of the
    # positive mass so the spike lands adjacent to the continuum
    assert p.lam[0] == 0.0
    pos = Y[Y[:, 0] > 0.0, 0]
    assert p.shift[0] == pytest.approx(np.percentile(pos, 5.0), rel=1e-12)
    assert -0.3 <= p.lam[1] <= 0.3  # continuous column keeps its MLE power


def test_boxcox_point_mass_guard_is_opt_in(rng):
    # without the guard the default fit keeps the tiny positivity shift and
    # the plain MLE power; the big spike-joining shift must not appear
    y = _intermittent_column(rng)
    p = fit_boxcox(y[:, None])
    assert p.shift[0] < 1e-3
    assert p.shift[0] == pytest.approx(1e-6 * (y.max() - y.min()), rel=1e-12)


def test_boxcox_point_mass_guard_interior_spike_stays_affine(rng):
    # the log join only makes sense for a spike at the minimum; a repeated
    # interior value falls back to the affine map
    y = rng.gamma(2.0, 30.0, size=400)
    y[rng.permutation(400)[:160]] = float(np.median(y))
    p = fit_boxcox(y[:, None], point_mass_share=0.25)
    assert p.lam[0] == 1.0


def test_fit_pipeline_guards_intermittent_columns(rng):
    X = rng.random((400, 3))
    Y = np.column_stack([_intermittent_column(rng),
                         rng.normal(10.0, 1.0, size=400)])
    pipe = fit_pipeline(X, Y)
    bp = pipe.output
    assert bp.lam[0] == 0.0 and bp.lam[1] != 0.0
    assert bp.shift[1] == 0.0  # continuous positive column needs no shift
    # log column: Gauss-Hermite pushforward must reproduce the analytic
    # lognormal moments (u is Gaussian in the unstandardized log space)
    mu = np.array([[0.3, 0.1], [-0.2, 0.5]])
    var = np.array([[0.01, 0.2], [0.0025, 0.3]])
    mean, v, clipped = pushforward_gaussian(bp, mu, var)
    assert not clipped[:, 0].any()
    m_u = mu[:, 0] * bp.post_standardize.std[0] + bp.post_standardize.mean[0]
    s2_u = var[:, 0] * bp.post_standardize.std[0] ** 2
    np.testing.assert_allclose(mean[:, 0],
                               np.exp(m_u + s2_u / 2.0) - bp.shift[0],
                               rtol=1e-9)
    np.testing.assert_allclose(v[:, 0],
                               np.expm1(s2_u) * np.exp(2.0 * m_u + s2_u),
                               rtol=1e-9)


def test_guarded_column_wide_latent_stays_finite(rng):
    # the log map has no finite asymptote, so even an absurdly wide latent
    # pushes forward to finite moments without leaving the domain
    X = rng.random((400, 2))
    Y = _intermittent_column(rng)[:, None]
    bp = fit_pipeline(X, Y).output
    mean, v, clipped = pushforward_gaussian(bp, np.array([[0.0]]),
                                            np.array([[100.0]]))
    assert np.isfinite(mean).all() and np.isfinite(v).all()
    assert not clipped[0, 0]
    assert mean[0, 0] > 0.0 and v[0, 0] > 0.0


def test_invert_domain_error():
    post = StandardizeParams(np.zeros(1), np.ones(1))
    p = BoxCoxParams(np.array([1.0]), np.array([0.0]), post)
    # lambda*t + 1 <= 0 is outside the image of the forward map
    with pytest.raises(DomainError):
        invert_boxcox(p, np.array([[-2.0]]))


def test_apply_on_invalid_neg_inf():
    post = StandardizeParams(np.zeros(1), np.ones(1))
    p = BoxCoxParams(np.array([0.5]), np.array([0.0]), post)
    t = apply_boxcox(p, np.array([[-1.0], [4.0]]), on_invalid="neg_inf")
    assert t[0, 0] == -np.inf
    assert np.isfinite(t[1, 0])


def test_apply_on_invalid_raise_default():
    post = StandardizeParams(np.zeros(1), np.ones(1))
    p = BoxCoxParams(np.array([0.5]), np.array([0.0]), post)
    with pytest.raises(DomainError):
        apply_boxcox(p, np.array([[-1.0]]))


# --------------------------------------------------------------- pushforward

def _identity_post():
    return StandardizeParams(np.zeros(1), np.ones(1))


def test_pushforward_affine_case():
    # lambda=1, shift=0, identity post-standardize: invert(t) = t + 1;
    # quadrature is exact for an affine map while the nodes stay in-domain
    p = BoxCoxParams(np.array([1.0]), np.array([0.0]), _identity_post())
    mean, var, clipped = pushforward_gaussian(p, np.array([[1.0]]),
                                              np.array([[0.01]]))
    assert mean[0, 0] == pytest.approx(2.0, rel=1e-12)
    assert var[0, 0] == pytest.approx(0.01, rel=1e-10)
    assert not clipped[0, 0]


def test_pushforward_lognormal_closed_form():
    p = BoxCoxParams(np.array([0.0]), np.array([0.0]), _identity_post())
    mean, var, _ = pushforward_gaussian(p, np.array([[0.0]]),
                                        np.array([[0.25]]))
    assert mean[0, 0] == pytest.approx(np.exp(0.125), rel=1e-6)
    assert var[0, 0] == pytest.approx((np.e**0.25 - 1) * np.e**0.25, rel=1e-6)


def test_pushforward_zero_variance_is_point_inverse():
    p = BoxCoxParams(np.array([0.0]), np.array([0.0]), _identity_post())
    mean, var, clipped = pushforward_gaussian(p, np.array([[1.0]]),
                                              np.array([[0.0]]))
    assert mean[0, 0] == pytest.approx(np.e, rel=1e-14)
    assert var[0, 0] == 0.0
    assert not clipped[0, 0]


def test_pushforward_clips_out_of_domain_nodes():
    # lambda=2: domain is 2t+1 > 0; a Gaussian centered near the edge loses
    # its lower tail
    p = BoxCoxParams(np.array([2.0]), np.array([0.0]), _identity_post())
    mean, var, clipped = pushforward_gaussian(p, np.array([[-0.49]]),
                                              np.array([[1.0]]))
    assert clipped[0, 0]
    assert np.isfinite(mean[0, 0]) and np.isfinite(var[0, 0])
    assert var[0, 0] >= 0


def test_pushforward_entirely_outside_domain_pins_edge():
    p = BoxCoxParams(np.array([2.0]), np.array([0.0]), _identity_post())
    mean, var, clipped = pushforward_gaussian(p, np.array([[-50.0]]),
                                              np.array([[1e-6]]))
    assert clipped[0, 0]
    assert var[0, 0] == 0.0
    assert np.isfinite(mean[0, 0])


def test_pushforward_overflow_nodes_flagged_not_nan():
    # log-transform with an absurdly wide latent: upper nodes overflow exp
    p = BoxCoxParams(np.array([0.0]), np.array([0.0]), _identity_post())
    mean, var, clipped = pushforward_gaussian(p, np.array([[0.0]]),
                                              np.array([[500.0**2]]))
    assert np.isfinite(mean[0, 0]) and np.isfinite(var[0, 0])
    assert clipped[0, 0]


def test_pushforward_rejects_negative_variance():
    p = BoxCoxParams(np.array([1.0]), np.array([0.0]), _identity_post())
    with pytest.raises(InvalidArgumentError):
        pushforward_gaussian(p, np.array([[0.0]]), np.array([[-1.0]]))


def test_pushforward_quantile_consistency(rng):
    """Median through the monotone map equals inverse of the latent median."""
    y = rng.gamma(2.0, 5.0, size=(300, 1))
    p = fit_boxcox(y)
    mu, sd = 0.4, 0.3
    qs = invert_boxcox(p, np.array([[mu + sd * norm.ppf(q)]
                                    for q in (0.25, 0.5, 0.75)]))
    assert qs[0, 0] < qs[1, 0] < qs[2, 0]


# ------------------------------------------------------------------ pipeline

def test_fit_pipeline_shapes(rng):
    X = rng.random((30, 4))
    Y = rng.gamma(2.0, 1.0, size=(30, 2))
    pipe = fit_pipeline(X, Y, [f"x{i}" for i in range(4)])
    assert pipe.input.mean.shape == (4,)
    assert pipe.output.lam.shape == (2,)
    d = pipe.to_dict()
    from surromod.transforms import TransformPipeline
    pipe2 = TransformPipeline.from_dict(d)
    np.testing.assert_array_equal(pipe2.output.lam, pipe.output.lam)
    np.testing.assert_array_equal(pipe2.input.std, pipe.input.std)


def test_identity_pipeline_is_identity(rng):
    pipe = identity_pipeline(3, 2)
    X = rng.standard_normal((10, 3))
    Y = rng.random((10, 2)) + 2.0  # power-transform domain is y > 0
    np.testing.assert_array_equal(apply_standardize(pipe.input, X), X)
    np.testing.assert_allclose(apply_boxcox(pipe.output, Y), Y, rtol=0,
                               atol=1e-12)
    mean, var, _ = pushforward_gaussian(pipe.output, Y, np.full_like(Y, 0.01))
    np.testing.assert_allclose(mean, Y, atol=1e-12)
    np.testing.assert_allclose(var, 0.01, rtol=1e-10)
