import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_channels
from irsdsm.channel import ChannelSet
from irsdsm.mimo import (
    batch_sum_rate,
    end_to_end_rate,
    gram_eigenvalues,
    logdet_capacity,
    precoder,
    sum_capacity,
    svd_decompose,
    water_filling,
)
from irsdsm.spgm import TWO_PI, effective_channel, spgm_objective


def bisection_level(lam, snr, U, iters=200):
    """Water level by bisection on sum(max(eta - floor, 0)) = U."""
    floor = U / (snr * np.asarray(lam, dtype=float) ** 2)
    lo, hi = 0.0, floor.max() + U
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(mid - floor, 0).sum() > U:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class TestSvd:
    def test_identity(self):
        d = svd_decompose(np.eye(3))
        np.testing.assert_allclose(d.singular_values, 1.0)
        assert d.num_streams == 3

    def test_rank_one(self, rng):
        u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        u *= 2 / np.linalg.norm(u)
        v *= 2 / np.linalg.norm(v)
        d = svd_decompose(np.outer(u, v.conj()))
        np.testing.assert_allclose(d.singular_values, [4, 0, 0], atol=1e-12)
        assert d.num_streams == 1

    def test_trace_identity_and_reconstruction(self, rng):
        h = rng.standard_normal((12, 16)) + 1j * rng.standard_normal((12, 16))
        d = svd_decompose(h)
        assert np.sum(d.singular_values**2) == pytest.approx(np.vdot(h, h).real, rel=1e-10)
        assert np.linalg.norm(d.reconstruct() - h) <= 1e-10 * np.linalg.norm(h)
        assert np.all(np.diff(d.singular_values) <= 0)
        for basis in (d.left_basis, d.right_basis):
            np.testing.assert_allclose(basis.conj().T @ basis, np.eye(basis.shape[0]), atol=1e-12)

    def test_nonfinite(self):
        with pytest.raises(ValueError):
            svd_decompose(np.array([[np.nan]]))


class TestWaterFilling:
    def test_single_stream(self):
        p, eta = water_filling([2.0], 3.0, 1)
        np.testing.assert_allclose(p, [1.0])
        assert eta == pytest.approx(1 + 1 / (3.0 * 4.0))

    @pytest.mark.parametrize("snr", [0.01, 1.0, 100.0])
    def test_equal_gains(self, snr):
        p, _ = water_filling([1.7, 1.7], snr, 2)
        np.testing.assert_allclose(p, [1, 1])

    def test_worked_example(self):
        p, eta = water_filling([2.0, 1.0], 1.0, 2)
        assert eta == pytest.approx(2.25)
        np.testing.assert_allclose(p, [1.75, 0.25])
        assert bisection_level([2.0, 1.0], 1.0, 2) == pytest.approx(2.25, rel=1e-12)

    def test_inactive_stream(self):
        p, eta = water_filling([10.0, 0.1], 1.0, 2)
        assert p[1] == 0.0
        assert p.sum() == pytest.approx(2.0)
        assert eta <= 2 / (1.0 * 0.01)

    def test_no_streams(self):
        p, eta = water_filling([], 1.0, 0)
        assert p.size == 0 and eta == 0.0

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            water_filling([1.0, 2.0], 1.0, 2)
        with pytest.raises(ValueError):
            water_filling([1.0], 0.0, 1)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=12),
        st.floats(1e-3, 1e4),
    )
    def test_kkt(self, gains, snr):
        lam = np.sort(np.array(gains))[::-1]
        U = lam.size
        p, eta = water_filling(lam, snr, U)
        floor = U / (snr * lam**2)
        assert p.sum() == pytest.approx(U, abs=1e-9 * U)
        assert np.all(p >= 0)
        on = p > 0
        np.testing.assert_allclose(p[on], eta - floor[on], rtol=1e-9, atol=1e-12)
        assert np.all(eta <= floor[~on] * (1 + 1e-9))
        assert eta == pytest.approx(bisection_level(lam, snr, U), rel=1e-9)


class TestCapacity:
    def test_zero_power(self):
        d = svd_decompose(np.eye(2))
        assert sum_capacity(d, [0.0, 0.0], 5.0) == 0.0

    def test_unit_case(self):
        d = svd_decompose(np.array([[1.0]]))
        assert sum_capacity(d, [1.0], 1.0) == pytest.approx(1.0)

    def test_power_length_checked(self):
        with pytest.raises(ValueError):
            sum_capacity(svd_decompose(np.eye(2)), [1.0], 1.0)

    def test_logdet_equivalence(self, rng):
        for _ in range(20):
            h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            d = svd_decompose(h)
            for snr in (0.1, 10.0):
                p, _ = water_filling(d.singular_values, snr, d.num_streams)
                eig = sum_capacity(d, p, snr)
                assert logdet_capacity(h, precoder(d, p), snr) == pytest.approx(eig, rel=1e-9)

    def test_waterfilling_beats_equal_power(self, rng):
        for _ in range(50):
            h = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
            d = svd_decompose(h)
            snr = 10 ** rng.uniform(-1, 2)
            p, _ = water_filling(d.singular_values, snr, d.num_streams)
            assert sum_capacity(d, p, snr) >= sum_capacity(d, np.ones(d.num_streams), snr) - 1e-12


class TestEndToEnd:
    def test_identity_link(self):
        ch = ChannelSet(np.eye(3), np.zeros((3, 2)), np.ones((2, 3)))
        r = end_to_end_rate(ch, [0.3, 0.4], 6.0)
        np.testing.assert_allclose(r.powers, 1.0)
        assert r.sum_rate == pytest.approx(3 * np.log2(1 + 6.0 / 3))
        assert r.water_level == pytest.approx(1 + 1 / 2.0)

    def test_monotone_in_snr(self, rng):
        ch = random_channels(rng, rician=True)
        theta = rng.uniform(0, TWO_PI, 8)
        assert end_to_end_rate(ch, theta, 10.0).sum_rate > end_to_end_rate(ch, theta, 1.0).sum_rate

    def test_consistent_fields(self, rng):
        ch = random_channels(rng, K=5, L=3, N=4)
        theta = rng.uniform(0, TWO_PI, 4)
        r = end_to_end_rate(ch, theta, 3.0)
        assert r.num_streams == 3
        assert r.powers.sum() == pytest.approx(3.0)
        lam = r.singular_values[:3]
        np.testing.assert_allclose(r.per_stream_rate, np.log2(1 + 3.0 * r.powers * lam**2 / 3))
        assert r.sum_rate == pytest.approx(r.per_stream_rate.sum())
        assert np.sum(r.singular_values**2) == pytest.approx(spgm_objective(ch, theta), rel=1e-10)


class TestBatch:
    @pytest.mark.parametrize("shape", [(1, 3), (2, 2), (3, 2), (4, 5)])
    def test_gram_eigenvalues(self, rng, shape):
        h = rng.standard_normal((50, *shape)) + 1j * rng.standard_normal((50, *shape))
        s = np.linalg.svd(h, compute_uv=False)
        np.testing.assert_allclose(gram_eigenvalues(h), s**2, rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("shape", [(2, 2), (3, 4), (1, 2)])
    def test_batch_rate_matches_scalar_path(self, rng, shape):
        ch = random_channels(rng, K=shape[1], L=shape[0], N=3)
        thetas = rng.uniform(0, TWO_PI, (40, 3))
        h = np.stack([effective_channel(ch, t) for t in thetas])
        for snr in (0.1, 10.0, 1000.0):
            expected = [end_to_end_rate(ch, t, snr).sum_rate for t in thetas]
            np.testing.assert_allclose(batch_sum_rate(h, snr), expected, rtol=1e-9)

    def test_batch_rank_deficient(self):
        h = np.zeros((2, 2, 2), dtype=complex)
        h[0, 0, 0] = 1.0
        out = batch_sum_rate(h, 1.0)
        np.testing.assert_allclose(out, [1.0, 0.0])


@pytest.mark.slow
def test_dsm_rate_beats_random_phases():
    from irsdsm.channel import SystemConfig, gen_channel_set
    from irsdsm.solvers import SolverOptions, dsm_solve

    # the surrogate gap grows with snr; this holds at the default system settings
    rng = np.random.default_rng(343)
    cfg, wins = SystemConfig(), 0
    snr = cfg.snr
    for _ in range(500):
        ch = gen_channel_set(cfg, rng)
        draws = rng.uniform(0, TWO_PI, (51, 16))
        theta = dsm_solve(ch, SolverOptions(), draws[0]).theta
        opt = end_to_end_rate(ch, theta, snr).sum_rate
        h = np.stack([effective_channel(ch, t) for t in draws[1:]])
        wins += opt >= batch_sum_rate(h, snr).max()
    assert wins >= 475
