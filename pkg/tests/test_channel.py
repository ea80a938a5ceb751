import numpy as np
import pytest

from irsdsm.channel import (
    ChannelSet,
    SystemConfig,
    db_to_linear,
    gen_channel_set,
    gen_rayleigh,
    gen_rician,
    trial_seed,
    ula_steering,
)


class TestSteering:
    def test_single_element(self):
        np.testing.assert_allclose(ula_steering(1, 0.7), [1.0])

    def test_broadside(self):
        np.testing.assert_allclose(ula_steering(3, 0.0), [1, 1, 1])

    def test_thirty_degrees(self):
        np.testing.assert_allclose(ula_steering(2, np.pi / 6), [1, 1j], atol=1e-15)

    @pytest.mark.parametrize("n", [1, 5, 64])
    def test_unit_modulus(self, n, rng):
        a = ula_steering(n, rng.uniform(-np.pi / 2, np.pi / 2))
        assert a.shape == (n,)
        np.testing.assert_allclose(np.abs(a), 1.0)
        assert a[0] == 1.0


class TestRayleigh:
    def test_seeded_scalar_reproducible(self):
        a = gen_rayleigh(1, 1, np.random.default_rng(5))
        b = gen_rayleigh(1, 1, np.random.default_rng(5))
        assert a.shape == (1, 1)
        assert a[0, 0] == b[0, 0]

    def test_moments(self):
        w = gen_rayleigh(1000, 1000, np.random.default_rng(1)).ravel()
        assert 0.495 <= np.var(w.real) <= 0.505
        assert abs(np.mean(w)) < 0.01


class TestRician:
    def test_pure_los_is_rank_one(self, rng):
        m = gen_rician(8, 6, 1e12, 0.3, -0.4, rng)
        s = np.linalg.svd(m, compute_uv=False)
        assert s[1] / s[0] < 1e-5

    def test_zero_beta_unit_variance(self):
        rng = np.random.default_rng(2)
        draws = np.stack([gen_rician(2, 2, 0.0, 0.1, 0.2, rng) for _ in range(100_000)])
        var = np.var(draws, axis=0)
        assert np.all((var >= 0.98) & (var <= 1.02))

    def test_ten_db_unit_power(self):
        rng = np.random.default_rng(3)
        beta = db_to_linear(10.0)
        assert beta == pytest.approx(10.0)
        draws = np.stack([gen_rician(2, 3, beta, 0.5, -1.0, rng) for _ in range(100_000)])
        power = np.mean(np.abs(draws) ** 2, axis=0)
        assert np.all((power >= 0.98) & (power <= 1.02))

    def test_negative_beta_rejected(self, rng):
        with pytest.raises(ValueError):
            gen_rician(2, 2, -1.0, 0.0, 0.0, rng)


class TestChannelSet:
    def test_default_dimensions(self, rng):
        ch = gen_channel_set(SystemConfig(K=16, L=12, N=64), rng)
        assert ch.F.shape == (12, 16)
        assert ch.G.shape == (12, 64)
        assert ch.H.shape == (64, 16)
        assert (ch.K, ch.L, ch.N) == (16, 12, 64)
        for m in (ch.F, ch.G, ch.H):
            assert np.all(np.isfinite(m))

    def test_same_seed_identical(self):
        cfg = SystemConfig(K=3, L=2, N=5, seed=11)
        a, b = gen_channel_set(cfg), gen_channel_set(cfg)
        for x, y in zip((a.F, a.G, a.H), (b.F, b.G, b.H)):
            assert np.array_equal(x, y)

    def test_different_seeds_differ(self):
        a = gen_channel_set(SystemConfig(K=3, L=2, N=5, seed=1))
        b = gen_channel_set(SystemConfig(K=3, L=2, N=5, seed=2))
        assert not np.array_equal(a.G, b.G)

    def test_unit_average_power(self):
        rng = np.random.default_rng(4)
        cfg = SystemConfig(K=2, L=2, N=2)
        sets = [gen_channel_set(cfg, rng) for _ in range(100_000)]
        for name in ("F", "G", "H"):
            power = np.mean([np.abs(getattr(s, name)) ** 2 for s in sets], axis=0)
            assert np.all(np.abs(power - 1.0) < 0.02), name

    def test_dimension_mismatch_named(self):
        with pytest.raises(ValueError, match="H"):
            ChannelSet(np.zeros((2, 3)), np.zeros((2, 4)), np.zeros((4, 2)))
        with pytest.raises(ValueError, match="G"):
            ChannelSet(np.zeros((2, 3)), np.zeros((3, 4)), np.zeros((4, 3)))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            ChannelSet(np.full((1, 1), np.nan), np.zeros((1, 1)), np.zeros((1, 1)))

    @pytest.mark.parametrize(
        "kw", [dict(K=0), dict(N=-1), dict(snr=0.0), dict(rician_beta=-0.1), dict(L=1.5)]
    )
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            SystemConfig(**kw)


class TestTrialSeed:
    def test_deterministic_and_distinct(self):
        assert trial_seed(7, 0, 16, 3) == trial_seed(7, 0, 16, 3)
        seeds = {trial_seed(7, 0, n, t) for n in (8, 16) for t in range(50)}
        assert len(seeds) == 100

    def test_negative_key_rejected(self):
        with pytest.raises(ValueError):
            trial_seed(7, -1)
