import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import gammaln, poch

from matbeta.combinat import (
    LogValue,
    Partition,
    dominates,
    enumerate_partitions,
    gen_pochhammer,
    gen_pochhammer_ln,
    mv_gamma_ln,
    partition_count,
)
from matbeta.errors import PoleError, ValidationError


def brute_partitions(k):
    """Sorted distinct partitions from all compositions of k."""
    out = set()
    for n in range(1, k + 1):
        for cuts in itertools.combinations(range(1, k), n - 1):
            bounds = (0,) + cuts + (k,)
            parts = [b - a for a, b in zip(bounds, bounds[1:])]
            out.add(tuple(sorted(parts, reverse=True)))
    return out


def test_enumerate_examples():
    assert enumerate_partitions(3, 3) == [(3,), (2, 1), (1, 1, 1)]
    assert enumerate_partitions(0, 5) == [()]
    assert len(enumerate_partitions(6, 6)) == 11


@pytest.mark.parametrize("k", range(1, 9))
def test_enumerate_matches_brute_force_and_partition_function(k):
    parts = enumerate_partitions(k, k)
    assert set(map(tuple, parts)) == brute_partitions(k)
    assert len(parts) == partition_count(k)
    assert parts == sorted(parts, reverse=True)


def test_max_parts_restriction():
    assert enumerate_partitions(4, 2) == [(4,), (3, 1), (2, 2)]


def test_partition_validation():
    with pytest.raises(ValidationError):
        Partition((1, 2))
    with pytest.raises(ValidationError):
        Partition((2, 0))
    p = Partition((3, 1))
    assert p.weight == 4 and p.length == 2 and str(p) == "(3,1)"


def test_dominance():
    assert dominates(Partition((3,)), Partition((2, 1)))
    assert not dominates(Partition((3, 3)), Partition((4, 1, 1)))
    assert not dominates(Partition((4, 1, 1)), Partition((3, 3)))


def naive_poch(a, kappa):
    out = 1.0
    for i, part in enumerate(kappa, start=1):
        x = a - (i - 1) / 2
        for j in range(part):
            out *= x + j
    return out


def test_gen_pochhammer_examples():
    assert gen_pochhammer(0.7, Partition((1,))) == pytest.approx(0.7)
    assert gen_pochhammer(0.7, Partition(())) == 1.0
    assert gen_pochhammer(2.5, Partition((2, 1))) == pytest.approx(17.5, rel=1e-15)
    assert naive_poch(2.5, (2, 1)) == pytest.approx(17.5)


@given(a=st.floats(-6, 6, allow_nan=False), k=st.integers(0, 6))
def test_single_row_is_rising_factorial(a, k):
    kappa = Partition((k,)) if k else Partition(())
    assert gen_pochhammer(a, kappa) == pytest.approx(poch(a, k), rel=1e-12, abs=1e-12)


@given(a=st.floats(-4, 6, allow_nan=False), idx=st.integers(0, 10))
def test_log_pochhammer_matches_direct(a, idx):
    kappa = enumerate_partitions(5)[idx % 7]
    direct = gen_pochhammer(a, kappa)
    lv = gen_pochhammer_ln(a, kappa)
    assert lv.value == pytest.approx(direct, rel=1e-12, abs=1e-300)


def test_log_pochhammer_exact_zero():
    lv = gen_pochhammer_ln(0.5, Partition((1, 1, 1)))  # factor 0.5 - 1/2 = 0
    assert lv.sign == 0 and lv.log_magnitude == -math.inf


def test_mv_gamma_examples():
    assert mv_gamma_ln(1, 1).log_magnitude == pytest.approx(0.0, abs=1e-15)
    assert mv_gamma_ln(2, 2.5).log_magnitude == pytest.approx(math.log(3 * math.pi / 4), rel=1e-13)
    with pytest.raises(PoleError) as exc:
        mv_gamma_ln(2, 0.5)
    assert exc.value.index == 2


def test_mv_gamma_quadrature_of_integral_definition():
    # Gamma_2[a] = int_{R > 0} etr(-R) |R|^{a - 3/2} dR over (r11, r12, r22)
    a = 2.5

    def f(r12, r22, r11):
        return math.exp(-r11 - r22) * (r11 * r22 - r12 * r12) ** (a - 1.5)

    val, _ = integrate.tplquad(
        f, 0, 40, 0, 40,
        lambda r11, r22: -math.sqrt(r11 * r22), lambda r11, r22: math.sqrt(r11 * r22),
        epsrel=1e-9,
    )
    assert math.log(val) == pytest.approx(mv_gamma_ln(2, a).log_magnitude, rel=1e-7)


@settings(max_examples=50)
@given(m=st.integers(1, 6), a=st.floats(3.0, 40.0))
def test_mv_gamma_functional_equation(m, a):
    lhs = mv_gamma_ln(m, a + 1).log_magnitude - mv_gamma_ln(m, a).log_magnitude
    rhs = sum(math.log(a - (i - 1) / 2) for i in range(1, m + 1))
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5, 7.0])
def test_mv_gamma_scalar(a):
    assert mv_gamma_ln(1, a).log_magnitude == pytest.approx(float(gammaln(a)), rel=1e-13, abs=1e-15)


def test_mv_gamma_large_argument_no_overflow():
    lv = mv_gamma_ln(5, 400.0)
    assert np.isfinite(lv.log_magnitude) and lv.sign == 1


def test_logvalue_arithmetic():
    a = LogValue.from_value(-3.0)
    b = LogValue.from_value(2.0)
    assert (a * b).value == pytest.approx(-6.0)
    assert (a / b).value == pytest.approx(-1.5)
    assert (a * LogValue.zero()).sign == 0
    with pytest.raises(ZeroDivisionError):
        a / LogValue.zero()
    arr = LogValue.from_value(np.array([1.0, -2.0]))
    assert np.allclose((arr * b).value, [2.0, -4.0])
