import math
import warnings

import numpy as np
import pytest
from scipy.special import hyp1f1

from matbeta.errors import PoleError, TruncationWarning, ValidationError
from matbeta.hypermat import SeriesControl, hyper_0f0, hyper_1f1
from matbeta.randmat import haar_orthogonal, random_psd


def test_zero_argument():
    val, ratio = hyper_1f1(1.3, 2.1, np.zeros((3, 3)))
    assert val == 1.0 and ratio == 0.0


def test_e_minus_one():
    val, _ = hyper_1f1(1, 2, np.array([[1.0]]), SeriesControl(k_max=30))
    assert val == pytest.approx(math.e - 1, rel=1e-12)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5, 7.0])
@pytest.mark.parametrize("b", [0.5, 1.0, 2.5, 7.0])
@pytest.mark.parametrize("x", [-5.0, -1.3, 0.4, 2.0, 5.0])
def test_scalar_reference(a, b, x):
    val, _ = hyper_1f1(a, b, eigenvalues=[x], ctrl=SeriesControl(k_max=80, tail_tol=1.0))
    assert val == pytest.approx(hyp1f1(a, b, x), rel=1e-8, abs=1e-12)


@pytest.mark.parametrize("a,b,x", [(0.5, 2.5, 1.5), (2.5, 7.0, -3.0), (1.0, 0.5, 4.0)])
def test_kummer_scalar(a, b, x):
    ctrl = SeriesControl(k_max=80, tail_tol=1.0)
    lhs, _ = hyper_1f1(a, b, eigenvalues=[x], ctrl=ctrl)
    rhs, _ = hyper_1f1(b - a, b, eigenvalues=[-x], ctrl=ctrl)
    assert lhs == pytest.approx(math.exp(x) * rhs, rel=1e-8)


def test_etr(rng):
    Z = rng.standard_normal((3, 3))
    X = (Z + Z.T) / 2 * 0.5
    val, _ = hyper_0f0(X, SeriesControl(k_max=25))
    assert val == pytest.approx(math.exp(np.trace(X)), rel=1e-9)
    assert hyper_0f0(np.zeros((2, 2)))[0] == 1.0
    val, _ = hyper_0f0(np.diag([0.3, -0.2]), SeriesControl(k_max=20))
    assert val == pytest.approx(math.exp(0.1), abs=1e-10)


def test_tail_ratio_decreases(rng):
    # all shells are positive for a PSD argument, so past k = tr X the
    # outermost shell shrinks relative to the running total
    X = random_psd(2, rng)
    X = X / np.trace(X)
    ratios = []
    for k in range(2, 12):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            ratios.append(hyper_0f0(X, SeriesControl(k_max=k, tail_tol=1e-9))[1])
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_orthogonal_invariance(rng):
    Z = rng.standard_normal((3, 3))
    X = (Z + Z.T) / 2
    H = haar_orthogonal(3, rng)
    ctrl = SeriesControl(k_max=8, tail_tol=1.0)
    assert hyper_1f1(1.5, 2.5, H @ X @ H.T, ctrl)[0] == pytest.approx(hyper_1f1(1.5, 2.5, X, ctrl)[0],
                                                                     rel=1e-10)


def test_pole():
    with pytest.raises(PoleError):
        hyper_1f1(1.0, -1.0, np.eye(1), SeriesControl(k_max=3, tail_tol=1.0))


def test_warning_on_slow_convergence():
    with pytest.warns(TruncationWarning):
        hyper_1f1(1.0, 1.0, np.eye(2) * 3.0, SeriesControl(k_max=3))


def test_control_validation():
    with pytest.raises(ValidationError):
        SeriesControl(k_max=-1)
