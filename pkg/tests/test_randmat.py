import warnings

import numpy as np
import pytest
from scipy import stats

from matbeta.errors import DegenerateSpectrumWarning, NumericalError, ValidationError
from matbeta.randmat import (
    beta1_sample,
    beta2_sample,
    eigdecomp_rank_q,
    haar_orthogonal,
    make_rng,
    map_blocks,
    pseudo_wishart_sample,
    random_psd,
    so3_cubature,
    stream,
    wishart_sample,
)
from matbeta.spectral import BetaParams

N = 100_000


def test_haar_orthonormal(rng):
    H = haar_orthogonal(4, rng, 50)
    assert np.max(np.abs(np.swapaxes(H, -1, -2) @ H - np.eye(4))) < 1e-12
    assert haar_orthogonal(1, rng).shape == (1, 1)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_haar_first_moment(m):
    h = haar_orthogonal(m, make_rng(11), N)[:, 0, 0] ** 2
    se = h.std(ddof=1) / np.sqrt(N)
    assert abs(h.mean() - 1 / m) < 3 * se


def test_haar_trace_symmetric():
    t = np.trace(haar_orthogonal(2, make_rng(12), 20_000), axis1=1, axis2=2)
    t = t[np.abs(t) > 1e-12]
    p = stats.binomtest(int(np.sum(t > 0)), len(t)).pvalue
    assert p > 0.01


def test_haar_column_uniform_angle():
    h = haar_orthogonal(2, make_rng(13), N)[:, :, 0]
    u = (np.arctan2(h[:, 1], h[:, 0]) + np.pi) / (2 * np.pi)
    assert stats.kstest(u, "uniform").pvalue > 0.01


def test_so3_cubature_exact_for_low_degree():
    R, W = so3_cubature(6)
    assert W.sum() == pytest.approx(1.0)
    assert np.allclose(np.einsum("n,nij->ij", W, R), 0, atol=1e-14)
    # E[R_ij R_kl] = delta_ik delta_jl / 3
    second = np.einsum("n,nij,nkl->ijkl", W, R, R)
    ref = np.einsum("ik,jl->ijkl", np.eye(3), np.eye(3)) / 3
    assert np.allclose(second, ref, atol=1e-14)
    assert not R.flags.writeable


def test_streams():
    a = stream(5, 3).standard_normal(4)
    b = stream(5, 3).standard_normal(4)
    assert np.array_equal(a, b)
    child = np.random.SeedSequence(5).spawn(4)[3]
    spawned = np.random.Generator(np.random.Philox(child)).standard_normal(4)
    assert np.array_equal(a, spawned)
    grandchild = child.spawn(1)[0]
    assert np.array_equal(stream(child, 0).standard_normal(4),
                          np.random.Generator(np.random.Philox(grandchild)).standard_normal(4))
    assert not np.array_equal(a, stream(5, 2).standard_normal(4))


def test_map_blocks_independent_of_workers():
    fn = lambda rng, size: rng.standard_normal(size)
    one = np.concatenate(map_blocks(fn, 10_000, 3, block_size=1_000, workers=1))
    four = np.concatenate(map_blocks(fn, 10_000, 3, block_size=1_000, workers=4))
    assert one.shape == (10_000,)
    assert np.array_equal(one, four)


def test_wishart_means(rng):
    m, s = 3, 5
    B = wishart_sample(m, s, None, make_rng(21), N).matrix
    se = B.std(axis=0, ddof=1) / np.sqrt(N)
    assert np.all(np.abs(B.mean(0) - s * np.eye(m)) < 4 * se)
    omega = random_psd(m, rng) * 3
    B = wishart_sample(m, s, omega, make_rng(22), N).matrix
    se = B.std(axis=0, ddof=1) / np.sqrt(N)
    assert np.all(np.abs(B.mean(0) - (s * np.eye(m) + omega)) < 4 * se)
    assert np.all(np.linalg.eigvalsh(B[:100])[:, 0] > 0)
    assert np.max(np.abs(B - np.swapaxes(B, 1, 2))) < 1e-13


def test_pseudo_wishart(rng):
    m, r = 3, 2
    omega = random_psd(m, rng, dof=2)  # rank 2
    A = pseudo_wishart_sample(m, r, omega, make_rng(23), N).matrix
    se = A.std(axis=0, ddof=1) / np.sqrt(N)
    assert np.all(np.abs(A.mean(0) - (r * np.eye(m) + omega)) < 4 * se)
    ev = np.linalg.eigvalsh(A[:200])
    norms = np.linalg.norm(A[:200], axis=(1, 2))
    assert np.all(np.sum(ev > 1e-10 * norms[:, None], axis=1) == r)


def test_pseudo_wishart_rejects_high_rank_noncentrality():
    with pytest.raises(ValidationError):
        pseudo_wishart_sample(3, 1, np.eye(3), make_rng(0))


def test_pseudo_wishart_eigenvector_angle():
    A = pseudo_wishart_sample(2, 1, None, make_rng(24), 20_000).matrix
    _, V = np.linalg.eigh(A / np.trace(A, axis1=1, axis2=2)[:, None, None])
    v = V[:, :, -1]
    angle = np.mod(np.arctan2(v[:, 1], v[:, 0]), np.pi)  # axis, not direction
    counts, _ = np.histogram(angle, bins=20, range=(0, np.pi))
    assert stats.chisquare(counts).pvalue > 0.01


def test_dof_validation():
    with pytest.raises(ValidationError):
        wishart_sample(3, 2)
    with pytest.raises(ValidationError):
        wishart_sample(3, 3.5)
    with pytest.raises(ValidationError):
        pseudo_wishart_sample(3, 3)


def test_mean_matrix_choice_does_not_matter(rng):
    # an alternative M with M'M = omega: rotate the stacked square root
    m, s = 2, 4
    omega = np.array([[2.0, 0.5], [0.5, 1.0]])
    ev, V = np.linalg.eigh(omega)
    root = (V * np.sqrt(ev)) @ V.T
    Q = haar_orthogonal(s, make_rng(31))
    M = Q @ np.vstack([root, np.zeros((s - m, m))])
    assert np.allclose(M.T @ M, omega)
    Z = make_rng(32).standard_normal((20_000, s, m)) + M
    alt = np.swapaxes(Z, 1, 2) @ Z
    ref = wishart_sample(m, s, omega, make_rng(33), 20_000).matrix
    stat = lambda B: np.linalg.eigvalsh(B)[:, -1]
    assert stats.ks_2samp(stat(alt), stat(ref)).pvalue > 0.01


def test_beta1_support_and_rank(rng):
    params = BetaParams(3, 2, 2, 4, omega1=random_psd(3, rng, dof=2), omega2=random_psd(3, rng))
    pt = beta1_sample(params, make_rng(41), 500)
    assert pt.eigenvalues.shape == (500, 2) and pt.frame.shape == (500, 3, 2)
    assert np.all((pt.eigenvalues > 0) & (pt.eigenvalues < 1))
    assert np.all(np.diff(pt.eigenvalues, axis=1) < 0)


def test_beta1_scalar_uniform():
    pt = beta1_sample(BetaParams(1, 1, 2, 2), make_rng(42), N)
    assert stats.kstest(pt.eigenvalues[:, 0], "uniform").statistic < 0.01


def test_beta2_scalar_beta_prime():
    pt = beta2_sample(BetaParams(1, 1, 2, 4), make_rng(43), N)
    assert stats.kstest(pt.eigenvalues[:, 0], stats.betaprime(1, 2).cdf).statistic < 0.01


def test_beta1_vs_beta2_functional_link(rng):
    params = BetaParams(3, 2, 2, 5, omega1=random_psd(3, rng, dof=2), omega2=random_psd(3, rng))
    u = beta1_sample(params, make_rng(44), 20_000).eigenvalues
    f = beta2_sample(params, make_rng(45), 20_000).eigenvalues
    for i in range(2):
        assert stats.ks_2samp(u[:, i], f[:, i] / (1 + f[:, i])).pvalue > 0.01


def test_sampler_equivariance(rng):
    m = 3
    params = BetaParams(m, 2, 2, 4, omega1=random_psd(m, rng, dof=2), omega2=random_psd(m, rng))
    H = haar_orthogonal(m, rng)
    moved = params.with_omegas(H @ params.omega1 @ H.T, H @ params.omega2 @ H.T)
    a = beta1_sample(params, make_rng(46), 20_000).eigenvalues
    b = beta1_sample(moved, make_rng(47), 20_000).eigenvalues
    for i in range(2):
        assert stats.ks_2samp(a[:, i], b[:, i]).pvalue > 0.01


def test_sampler_reproducible():
    params = BetaParams(2, 1, 1, 3)
    a = beta1_sample(params, make_rng(7), 100)
    b = beta1_sample(params, make_rng(7), 100)
    assert np.array_equal(a.eigenvalues, b.eigenvalues) and np.array_equal(a.frame, b.frame)


def test_non_integer_dof_rejected_for_sampling():
    with pytest.raises(ValidationError):
        beta1_sample(BetaParams(2, 2, 2.5, 3), make_rng(0))


def test_singular_guard():
    with pytest.raises(NumericalError):
        from matbeta.randmat import _inv_sqrt
        _inv_sqrt(np.diag([1.0, 1e-14]))


def test_eigdecomp_examples(rng):
    Z = rng.standard_normal((4, 2))
    X = Z @ Z.T
    pt = eigdecomp_rank_q(X, 2)
    assert np.linalg.norm(pt.matrix() - X) <= 1e-10 * np.linalg.norm(X)
    for j in range(2):
        col = pt.frame[:, j]
        assert col[np.argmax(np.abs(col))] > 0
    with pytest.warns(DegenerateSpectrumWarning):
        pt = eigdecomp_rank_q(np.eye(3), 3)
    assert np.allclose(pt.eigenvalues, 1)
    z = rng.standard_normal(2)
    X = np.outer(z, z)
    assert eigdecomp_rank_q(X, 1).eigenvalues[0] == pytest.approx(np.trace(X))
    with pytest.raises(ValidationError):
        eigdecomp_rank_q(X, 2)
