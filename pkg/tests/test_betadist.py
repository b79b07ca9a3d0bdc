import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from matbeta.betadist import (
    EVALUATORS,
    beta1_central_density,
    beta1_dnc_density,
    beta1_ncA_density,
    beta1_ncB_density,
    beta1_symmetrised_density,
    beta2_central_density,
    beta2_dnc_density,
    beta2_ncA_density,
    beta2_ncB_density,
    beta2_symmetrised_density,
    eigen_joint_density,
    norm_const_ln,
)
from matbeta.errors import (
    DegenerateSpectrumError,
    DomainError,
    UnsupportedDegreeError,
    ValidationError,
)
from matbeta.hypermat import SeriesControl
from matbeta.randmat import haar_orthogonal, random_psd
from matbeta.spectral import BetaParams, SpectralPoint
from matbeta.verify import scalar_dnc_oracle

CTRL = SeriesControl(k_max=3, tail_tol=1.0)


def scalar_point(x, kind="beta1"):
    return SpectralPoint([x], [[1.0]], kind)


def random_point(m, q, rng, kind="beta1"):
    ev = -np.sort(-rng.uniform(0.1, 0.9, q))
    return SpectralPoint(ev, haar_orthogonal(m, rng)[:, :q], kind)


def val(res):
    return (res[0] if isinstance(res, tuple) else res).value


# normalizing constant ---------------------------------------------------------

def test_norm_const_examples():
    assert norm_const_ln(BetaParams(1, 1, 2, 2)).value == pytest.approx(1.0)
    assert norm_const_ln(BetaParams(2, 1, 1, 3)).value == pytest.approx(1 / math.pi, rel=1e-13)
    # Gamma_2[2] = pi/2, Gamma_1[1/2] = sqrt(pi), Gamma_2[3/2] = pi/2, pi^{(q - m) r / 2}
    direct = (math.pi / 2) / (math.sqrt(math.pi) * (math.pi / 2)) * math.pi ** (-0.5)
    assert norm_const_ln(BetaParams(2, 1, 1, 3)).value == pytest.approx(direct, rel=1e-12)


def test_norm_const_nonsingular_scalar():
    # q = m reduces to the beta function
    c = norm_const_ln(BetaParams(1, 1, 3, 5)).value
    assert c == pytest.approx(1 / math.exp(math.lgamma(1.5) + math.lgamma(2.5) - math.lgamma(4)))


# central densities ----------------------------------------------------------------

def test_central_examples():
    assert beta1_central_density(scalar_point(0.3), BetaParams(1, 1, 2, 2)).value == pytest.approx(1.0)
    d = beta1_central_density(SpectralPoint([0.5 + 1e-9, 0.5 - 1e-9], np.eye(2)),
                              BetaParams(2, 2, 4, 4)).value
    assert d == pytest.approx(45 / (4 * math.pi), rel=1e-8)
    assert beta2_central_density(scalar_point(1.0, "beta2"), BetaParams(1, 1, 2, 2)).value == \
        pytest.approx(0.25)


def test_singular_central_diverges_like_formula():
    params = BetaParams(2, 1, 1, 3)
    for l1 in (0.9, 0.999):
        d = beta1_central_density(SpectralPoint([l1], [[1.0], [0.0]]), params).value
        assert d == pytest.approx(1 / math.pi / l1, rel=1e-12)


def test_beta2_scalar_integrates_to_one():
    params = BetaParams(1, 1, 2, 4)
    f = lambda x: beta2_central_density(scalar_point(x, "beta2"), params).value
    total, _ = integrate.quad(f, 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_domain_errors():
    with pytest.raises(DomainError):
        SpectralPoint([1.2], [[1.0]])
    with pytest.raises(ValidationError):
        beta1_central_density(scalar_point(0.5, "beta2"), BetaParams(1, 1, 2, 2))
    with pytest.raises(ValidationError):
        BetaParams(2, 1, 1, 0.5)  # s must exceed m - 1
    with pytest.raises(ValidationError):
        BetaParams(2, 2, 2, 3, omega1=-np.eye(2))


# noncentral evaluators ----------------------------------------------------------

def test_zero_noncentrality_is_central(rng):
    for m, q, r in [(2, 2, 4.5), (3, 1, 1), (2, 1, 1)]:
        params = BetaParams(m, q, r, 5)
        for kind, central in [("beta1", beta1_central_density), ("beta2", beta2_central_density)]:
            pt = random_point(m, q, rng, kind)
            ref = central(pt, params).value
            for which in ("dnc", "ncA", "ncB", "symmetrised"):
                assert val(EVALUATORS[(kind, which)](pt, params, CTRL)) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("kind", ["beta1", "beta2"])
@pytest.mark.parametrize("m,q,r", [(2, 2, 4.5), (2, 1, 1), (3, 2, 2)])
def test_collapse_chain(rng, kind, m, q, r):
    omega = random_psd(m, rng)
    pt = random_point(m, q, rng, kind)
    base = BetaParams(m, q, r, 5.5)
    dnc = EVALUATORS[(kind, "dnc")]
    only2 = base.with_omegas(omega2=omega)
    only1 = base.with_omegas(omega1=omega)
    a, b = dnc(pt, only2, CTRL)[0].value, EVALUATORS[(kind, "ncA")](pt, only2, CTRL)[0].value
    assert a == pytest.approx(b, rel=1e-12)
    a, b = dnc(pt, only1, CTRL)[0].value, EVALUATORS[(kind, "ncB")](pt, only1, CTRL)[0].value
    assert a == pytest.approx(b, rel=1e-12)


def test_nc_requires_zero_omega():
    params = BetaParams(1, 1, 3, 5, omega1=[[1.0]], omega2=[[1.0]])
    with pytest.raises(ValidationError):
        beta1_ncA_density(scalar_point(0.4), params)
    with pytest.raises(ValidationError):
        beta2_ncB_density(scalar_point(0.4, "beta2"), params)


def test_scalar_reduction_dnc():
    params = BetaParams(1, 1, 3, 5, omega1=[[1.2]], omega2=[[0.7]])
    ctrl = SeriesControl(k_max=40)
    got, ratio = beta1_dnc_density(scalar_point(0.4), params, ctrl)
    assert got.value == pytest.approx(scalar_dnc_oracle(3, 5, 1.2, 0.7, 0.4), rel=1e-6)
    assert ratio < 1e-9


def test_scalar_reduction_nc():
    ctrl = SeriesControl(k_max=40)
    params = BetaParams(1, 1, 3, 5, omega1=[[1.2]])
    got = beta1_ncB_density(scalar_point(0.4), params, ctrl)[0].value
    assert got == pytest.approx(scalar_dnc_oracle(3, 5, 1.2, 0.0, 0.4), rel=1e-8)
    params = BetaParams(1, 1, 3, 5, omega2=[[0.7]])
    got = beta1_ncA_density(scalar_point(0.4), params, ctrl)[0].value
    assert got == pytest.approx(scalar_dnc_oracle(3, 5, 0.0, 0.7, 0.4), rel=1e-8)


@pytest.mark.parametrize("which", ["dnc", "ncA", "ncB", "symmetrised"])
def test_beta2_scalar_change_of_variables(which):
    om1 = 0.0 if which == "ncA" else 1.2
    om2 = 0.0 if which == "ncB" else 0.7
    params = BetaParams(1, 1, 3, 5, omega1=[[om1]], omega2=[[om2]])
    ctrl = SeriesControl(k_max=40)
    f = 0.9
    d2 = EVALUATORS[("beta2", which)](scalar_point(f, "beta2"), params, ctrl)[0].value
    d1 = EVALUATORS[("beta1", which)](scalar_point(f / (1 + f)), params, ctrl)[0].value
    assert d2 == pytest.approx(d1 * (1 + f) ** -2, rel=1e-12)


def test_symmetrised_scalar_equals_dnc():
    params = BetaParams(1, 1, 3, 5, omega1=[[1.2]], omega2=[[0.7]])
    ctrl = SeriesControl(k_max=30)
    for kind in ("beta1", "beta2"):
        pt = scalar_point(0.4, kind)
        a = EVALUATORS[(kind, "dnc")](pt, params, ctrl)[0].value
        b = EVALUATORS[(kind, "symmetrised")](pt, params, ctrl)[0].value
        assert a == pytest.approx(b, rel=1e-13)


@pytest.mark.parametrize("fn", [beta1_dnc_density, beta2_dnc_density])
def test_orthogonal_equivariance(rng, fn):
    m, q = 3, 2
    params = BetaParams(m, q, 2, 4.5, omega1=random_psd(m, rng), omega2=random_psd(m, rng))
    kind = "beta1" if fn is beta1_dnc_density else "beta2"
    pt = random_point(m, q, rng, kind)
    H = haar_orthogonal(m, rng)
    moved = params.with_omegas(H @ params.omega1 @ H.T, H @ params.omega2 @ H.T)
    assert fn(pt.rotated(H), moved, CTRL)[0].value == pytest.approx(fn(pt, params, CTRL)[0].value,
                                                                     rel=1e-10)


def test_symmetrised_is_rotation_invariant(rng):
    m = 2
    params = BetaParams(m, 2, 3, 4, omega1=random_psd(m, rng), omega2=random_psd(m, rng))
    pt = random_point(m, 2, rng)
    H = haar_orthogonal(m, rng)
    for fn in (beta1_symmetrised_density,):
        assert fn(pt.rotated(H), params, CTRL)[0].value == pytest.approx(
            fn(pt, params, CTRL)[0].value, rel=1e-10)
    pt2 = random_point(m, 2, rng, "beta2")
    assert beta2_symmetrised_density(pt2.rotated(H), params, CTRL)[0].value == pytest.approx(
        beta2_symmetrised_density(pt2, params, CTRL)[0].value, rel=1e-10)


def test_batched_frames(rng):
    params = BetaParams(2, 2, 3, 4, omega1=random_psd(2, rng), omega2=random_psd(2, rng))
    pt = random_point(2, 2, rng)
    H = haar_orthogonal(2, rng, 4)
    batch = beta1_dnc_density(pt.rotated(H), params, CTRL)[0].value
    assert batch.shape == (4,)
    assert batch[1] == pytest.approx(beta1_dnc_density(pt.rotated(H[1]), params, CTRL)[0].value)


def test_degree_cap():
    params = BetaParams(2, 2, 3, 4, omega1=np.eye(2), omega2=np.eye(2))
    pt = SpectralPoint([0.6, 0.3], np.eye(2))
    with pytest.raises(UnsupportedDegreeError):
        beta1_dnc_density(pt, params, SeriesControl(k_max=4))


def test_scalar_has_no_degree_cap():
    params = BetaParams(1, 1, 3, 5, omega1=[[1.2]], omega2=[[0.7]])
    beta1_dnc_density(scalar_point(0.4), params, SeriesControl(k_max=25))


# eigenvalue coordinates -----------------------------------------------------------

def test_eigen_factor(rng):
    params = BetaParams(3, 1, 1, 4)
    pt = SpectralPoint([0.4], haar_orthogonal(3, rng)[:, :1])
    dens = beta1_central_density(pt, params).value
    assert eigen_joint_density(pt, params).value == pytest.approx(dens * 0.5 * 0.4 ** 2)
    params = BetaParams(1, 1, 3, 4)
    pt = scalar_point(0.4)
    assert eigen_joint_density(pt, params).value == pytest.approx(
        0.5 * beta1_central_density(pt, params).value)
    params = BetaParams(2, 2, 4, 4)
    pt = SpectralPoint([0.7, 0.2], np.eye(2))
    ref = beta1_central_density(pt, params).value * 0.25 * 0.5
    assert eigen_joint_density(pt, params).value == pytest.approx(ref)


def test_eigen_degenerate():
    params = BetaParams(2, 2, 4, 4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pt = SpectralPoint([0.5, 0.5], np.eye(2))
    with pytest.raises(DegenerateSpectrumError):
        eigen_joint_density(pt, params)
