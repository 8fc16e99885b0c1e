import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpfl_pareto import fedsim
from dpfl_pareto.fedsim import (
    ClipMode,
    FedConfig,
    ProtocolError,
    add_noise,
    aggregate,
    clip_update,
    client_rng,
    client_update,
    init_rng,
    multi_seed_trace,
    round_rng,
    run_dp_fedsgd,
    sample_clients,
)
from dpfl_pareto.models import ModelParams, init_params, loss_and_grad


def make_cfg(lr_arch, **over):
    base = dict(K=5, E=2, q=1.0, sigma=0.0, T_max=5, eta=0.01, B=16,
                c_clip=1.0, arch=lr_arch, seed=0)
    base.update(over)
    return FedConfig(**base)


class TestSampleClients:
    def test_half_of_forty(self):
        ids = sample_clients(40, 0.5, round_rng(0, 0))
        assert len(ids) == 20 and len(set(ids)) == 20

    def test_all_of_ten(self):
        assert sample_clients(10, 1.0, round_rng(0, 0)) == tuple(range(10))

    def test_eighth_of_forty(self):
        ids = sample_clients(40, 0.125, round_rng(0, 3))
        assert len(ids) == 5
        assert all(0 <= i < 40 for i in ids)

    def test_minimum_one(self):
        assert len(sample_clients(10, 0.01, round_rng(0, 0))) == 1

    def test_deterministic_per_stream(self):
        assert sample_clients(40, 0.3, round_rng(7, 5)) == sample_clients(40, 0.3, round_rng(7, 5))


class TestClientUpdate:
    def test_zero_epochs(self, small_bundle, lr_arch):
        cfg = make_cfg(lr_arch, E=0)
        params = init_params(lr_arch, seed=0)
        delta = client_update(params, small_bundle.train_shards[0], cfg, client_rng(0, 0, 0))
        np.testing.assert_array_equal(delta, np.zeros_like(params.weights))

    def test_single_full_batch_step_is_gradient_step(self, small_bundle, lr_arch):
        shard = small_bundle.train_shards[1]
        cfg = make_cfg(lr_arch, E=1, B=10_000)
        params = init_params(lr_arch, seed=0)
        delta = client_update(params, shard, cfg, client_rng(0, 0, 1))
        _, grad = loss_and_grad(params, shard.samples)
        np.testing.assert_allclose(delta, -cfg.eta * grad, rtol=1e-12)

    def test_zero_momentum_matches_plain_sgd_bitwise(self, small_bundle, lr_arch):
        shard = small_bundle.train_shards[0]
        params = init_params(lr_arch, seed=0)
        d0 = client_update(params, shard, make_cfg(lr_arch, E=4), client_rng(1, 2, 0))
        d1 = client_update(params, shard, make_cfg(lr_arch, E=4, momentum=0.0),
                           client_rng(1, 2, 0))
        np.testing.assert_array_equal(d0, d1)

    def test_momentum_changes_update(self, small_bundle, lr_arch):
        shard = small_bundle.train_shards[0]
        params = init_params(lr_arch, seed=0)
        d0 = client_update(params, shard, make_cfg(lr_arch, E=4), client_rng(1, 2, 0))
        d1 = client_update(params, shard, make_cfg(lr_arch, E=4, momentum=0.5),
                           client_rng(1, 2, 0))
        assert not np.array_equal(d0, d1)


class TestClip:
    def test_squared_norm_no_clip_within_bound(self):
        delta = np.array([0.6, 0.8])  # norm 1, norm^2 1
        out = clip_update(delta, c_clip=1.0, mode=ClipMode.SQUARED_NORM)
        np.testing.assert_array_equal(out, delta)

    def test_norm_mode_unit_output(self):
        delta = np.array([3.0, 0.0])
        out = clip_update(delta, c_clip=1.0, mode=ClipMode.NORM)
        assert np.linalg.norm(out) == pytest.approx(1.0, rel=1e-12)

    def test_squared_norm_mode_scales_by_ratio(self):
        delta = np.array([0.0, 3.0])
        out = clip_update(delta, c_clip=1.0, mode=ClipMode.SQUARED_NORM)
        # factor max(1, 9/1) = 9, output norm 1/3
        np.testing.assert_allclose(out, [0.0, 1.0 / 3.0], rtol=1e-12)

    @given(
        scale=st.floats(0.01, 100), c=st.floats(0.1, 10), seed=st.integers(0, 100),
        mode=st.sampled_from([ClipMode.NORM, ClipMode.SQUARED_NORM]),
    )
    def test_clipped_norm_bounded(self, scale, c, seed, mode):
        rng = np.random.default_rng(seed)
        delta = rng.standard_normal(20) * scale
        out = clip_update(delta, c, mode)
        bound = c if mode is ClipMode.NORM else np.sqrt(c)
        assert np.linalg.norm(out) <= bound * (1 + 1e-9) or np.allclose(out, delta)
        # unclipped only when already inside the bound
        if not np.allclose(out, delta):
            assert np.linalg.norm(out) <= bound * (1 + 1e-9)


class TestNoise:
    def test_sigma_zero_identity(self, rng):
        x = rng.standard_normal(10)
        assert add_noise(x, 0.0, client_rng(0, 0, 0)) is x

    def test_same_stream_same_noise(self, rng):
        x = rng.standard_normal(10)
        a = add_noise(x, 0.5, client_rng(3, 1, 2))
        b = add_noise(x, 0.5, client_rng(3, 1, 2))
        np.testing.assert_array_equal(a, b)

    def test_monte_carlo_variance(self):
        # 10^6 draws at sigma=0.1: per-coordinate variance within 2% of 0.01
        draws = add_noise(np.zeros(1_000_000), 0.1, client_rng(0, 0, 0))
        assert np.var(draws) == pytest.approx(0.01, rel=0.02)


class TestAggregate:
    def test_single_update(self, lr_arch):
        params = init_params(lr_arch, seed=0)
        u = np.ones(lr_arch.param_count)
        out = aggregate(params, {0: u})
        np.testing.assert_allclose(out.weights, params.weights + u, rtol=1e-12)

    def test_cancellation(self, lr_arch, rng):
        params = init_params(lr_arch, seed=0)
        u = rng.standard_normal(lr_arch.param_count)
        out = aggregate(params, {0: u, 1: -u})
        np.testing.assert_allclose(out.weights, params.weights, atol=1e-15)

    def test_order_independence(self, lr_arch, rng):
        params = init_params(lr_arch, seed=0)
        updates = {i: rng.standard_normal(lr_arch.param_count) for i in range(6)}
        shuffled = dict(sorted(updates.items(), key=lambda kv: -kv[0]))
        a = aggregate(params, updates)
        b = aggregate(params, shuffled)
        np.testing.assert_array_equal(a.weights, b.weights)

    def test_empty_rejected(self, lr_arch):
        with pytest.raises(ProtocolError):
            aggregate(init_params(lr_arch, seed=0), {})


class TestRunDpFedSgd:
    def test_deterministic_trace(self, small_bundle, lr_arch):
        cfg = make_cfg(lr_arch, sigma=0.05, q=0.6, T_max=6)
        a = run_dp_fedsgd(cfg, small_bundle)
        b = run_dp_fedsgd(cfg, small_bundle)
        np.testing.assert_array_equal(a.losses, b.losses)
        assert a.param_digests == b.param_digests
        assert a.participants == b.participants

    def test_trace_lengths(self, small_bundle, lr_arch):
        cfg = make_cfg(lr_arch, T_max=7)
        tr = run_dp_fedsgd(cfg, small_bundle)
        assert len(tr.losses) == len(tr.participants) == len(tr.param_digests) == 7
        assert len(tr.clipped_norms) == 7

    def test_degenerate_equals_centralized_sgd(self, lr_arch):
        # sigma=0, q=1, K=1, E=1, full batch: bitwise equal to plain SGD
        from dpfl_pareto import datasets

        bundle = datasets.repartition(datasets.synth_dataset(2, 12, 60, 30, seed=5), 1, 5)
        cfg = make_cfg(lr_arch, K=1, E=1, B=10_000, T_max=8, c_clip=1e9)
        trace = run_dp_fedsgd(cfg, bundle)

        params = init_params(lr_arch, seed=int(init_rng(cfg.seed).integers(2**31)))
        shard = bundle.train_shards[0]
        expected = []
        for _ in range(8):
            _, g = loss_and_grad(params, shard.samples)
            params = ModelParams(arch=lr_arch, weights=params.weights - cfg.eta * g)
            from dpfl_pareto.models import eval_test_loss

            expected.append(eval_test_loss(params, bundle.test_set))
        np.testing.assert_array_equal(trace.losses, np.array(expected))

    def test_clipping_bound_every_round(self, small_bundle, lr_arch):
        for mode in (ClipMode.SQUARED_NORM, ClipMode.NORM):
            cfg = make_cfg(lr_arch, sigma=0.3, T_max=5, c_clip=0.0004, clip_mode=mode,
                           eta=0.5, E=3)
            tr = run_dp_fedsgd(cfg, small_bundle)
            bound = 0.02 if mode is ClipMode.SQUARED_NORM else 0.0004
            for round_norms in tr.clipped_norms:
                assert np.all(round_norms <= bound * (1 + 1e-9))

    def test_huge_noise_prevents_learning(self, small_bundle, lr_arch):
        cfg = make_cfg(lr_arch, sigma=1000.0, T_max=10)
        tr = run_dp_fedsgd(cfg, small_bundle)
        assert tr.losses[-1] >= 0.9 * np.log(small_bundle.num_classes)

    def test_shard_count_mismatch(self, small_bundle, lr_arch):
        cfg = make_cfg(lr_arch, K=4, q=1.0)
        with pytest.raises(ValueError):
            run_dp_fedsgd(cfg, small_bundle)


class TestMultiSeed:
    def test_single_seed_equals_run(self, small_bundle, lr_arch):
        cfg = make_cfg(lr_arch, sigma=0.1, T_max=4)
        avg = multi_seed_trace(cfg, small_bundle, [3])
        solo = run_dp_fedsgd(FedConfig(**{**cfg.__dict__, "seed": 3}), small_bundle)
        np.testing.assert_array_equal(avg, solo.losses)

    def test_seed_order_irrelevant(self, small_bundle, lr_arch):
        cfg = make_cfg(lr_arch, sigma=0.1, T_max=4)
        np.testing.assert_array_equal(
            multi_seed_trace(cfg, small_bundle, [1, 2]),
            multi_seed_trace(cfg, small_bundle, [2, 1]),
        )

    def test_averaging_reduces_variance(self, small_bundle, lr_arch):
        # single-seed traces fluctuate more than 8-seed averages
        cfg = make_cfg(lr_arch, sigma=0.4, T_max=6)
        singles = [multi_seed_trace(cfg, small_bundle, [s]) for s in range(16)]
        grouped = [
            multi_seed_trace(cfg, small_bundle, list(range(8 * g, 8 * g + 8)))
            for g in range(2)
        ]
        var_single = np.var([t[-1] for t in singles])
        var_grouped = np.var([t[-1] for t in grouped])
        assert var_grouped < var_single
