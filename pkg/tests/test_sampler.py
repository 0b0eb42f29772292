import numpy as np
import pytest

from rucalc.sampler import (ChannelRealization, MomentProfile, WeightVector, block_sample,
                            entry_moments, haar_isometry, haar_unitary, sample_realization, stream,
                            weighted_block_isometry)


def test_weight_vector_validation():
    with pytest.raises(ValueError):
        WeightVector((0.5, 0.6))
    with pytest.raises(ValueError):
        WeightVector((1.2, -0.2))
    with pytest.raises(ValueError):
        WeightVector(())
    w = WeightVector.ramp(4)
    assert sum(w.w) == pytest.approx(1.0, abs=1e-12)
    assert w.profile(1) == 1.0 and w.profile(2) == pytest.approx(4 / 3)


def test_moment_profile():
    assert MomentProfile("uniform")(5) == 1.0
    with pytest.raises(ValueError):
        MomentProfile("explicit", (0.9, 1.0))
    with pytest.raises(ValueError):
        MomentProfile("bogus")
    t = MomentProfile("explicit", (1.0, 1.5))
    assert t(2) == 1.5
    with pytest.raises(ValueError):
        t(3)
    # the empirical profile of the ramp approaches the uniform-[0,2] moments
    assert WeightVector.ramp(400).empirical_profile(3) == pytest.approx(2.0, rel=1e-2)


def test_haar_unitary_is_unitary_and_deterministic():
    for n in (1, 2, 5, 16):
        U = haar_unitary(n, stream(1, 0, 0))
        assert np.max(np.abs(U.conj().T @ U - np.eye(n))) < 1e-12
        assert np.array_equal(U, haar_unitary(n, stream(1, 0, 0)))
    assert not np.allclose(haar_unitary(3, stream(1, 0, 0)), haar_unitary(3, stream(1, 0, 1)))
    with pytest.raises(ValueError):
        haar_unitary(0)


@pytest.mark.parametrize("n", [2, 4])
def test_entry_moments(n):
    draws = 10_000
    x = np.array([haar_unitary(n, stream(3, t))[0, 0] for t in range(draws)])
    mean2, se2 = entry_moments(x, 1)
    mean4, se4 = entry_moments(x, 2)
    assert abs(mean2 - 1 / n) <= 3 * se2
    assert abs(mean4 - 2 / (n * (n + 1))) <= 3 * se4


def test_realization_validation():
    w = WeightVector.uniform(2)
    with pytest.raises(ValueError):
        ChannelRealization(2, 2, np.ones((2, 2, 2)), w)
    with pytest.raises(ValueError):
        ChannelRealization(2, 3, np.stack([np.eye(2)] * 3), w)


def test_weighted_block_isometry():
    w = WeightVector((0.5, 0.3, 0.2))
    real = sample_realization(4, w, 9, trial=2)
    V, Vt = weighted_block_isometry(real)
    assert V.shape == Vt.shape == (12, 4)
    assert np.max(np.abs(Vt.conj().T @ Vt - np.eye(4))) < 1e-10
    assert np.allclose(V.conj().T @ V, 3 * np.eye(4))
    real_u = sample_realization(4, WeightVector.uniform(3), 9, trial=2)
    V, Vt = weighted_block_isometry(real_u)
    assert np.allclose(Vt, V / np.sqrt(3))


def test_trial_streams_are_independent_of_execution_order():
    w = WeightVector.uniform(3)
    a = [sample_realization(3, w, 5, t).unitaries for t in range(4)]
    b = [sample_realization(3, w, 5, t).unitaries for t in reversed(range(4))][::-1]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


@pytest.mark.slow
def test_block_ensemble_differs_from_truncated_haar():
    n, k, draws = 8, 2, 100_000
    block = np.array([block_sample(n, k, 11, t)[0, 0] for t in range(draws)])
    haar = np.array([haar_isometry(n, k, stream(12, t))[0, 0] for t in range(draws)])
    mb, sb = entry_moments(block, 2)
    mh, sh = entry_moments(haar, 2)
    assert abs(mb - 2 / (k * k * n * (n + 1))) <= 4 * sb
    assert abs(mh - 2 / (k * n * (k * n + 1))) <= 4 * sh
    assert abs(mb - mh) > 5 * np.hypot(sb, sh)


def test_block_independence_and_invariance():
    n, k, draws = 4, 2, 20_000
    samples = np.stack([block_sample(n, k, 21, t) for t in range(draws)])
    a, b = samples[:, 0, 0], samples[:, n, 0]
    prod = a * b.conj()
    assert abs(prod.mean()) <= 4 * prod.std(ddof=1) / np.sqrt(draws)
    x, y = np.abs(a) ** 2, np.abs(b) ** 2
    cov = (x - x.mean()) * (y - y.mean())
    assert abs(cov.mean()) <= 4 * cov.std(ddof=1) / np.sqrt(draws)
    # right multiplication by a fixed unitary leaves entry moments unchanged
    Uf = haar_unitary(n, 99)
    rotated = samples @ Uf
    for r, c in ((0, 0), (n + 1, 2)):
        m1, s1 = entry_moments(samples[:, r, c], 2)
        m2, s2 = entry_moments(rotated[:, r, c], 2)
        assert abs(m1 - m2) <= 4 * np.hypot(s1, s2)
