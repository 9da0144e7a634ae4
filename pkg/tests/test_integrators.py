import math

import numpy as np
import pytest

from landanneal.errors import ConfigError, DivergenceError
from landanneal.integrators import (
    CHUNK,
    MethodConfig,
    NoiseBatch,
    NoiseStream,
    _chunk,
    gaussians,
    initial_state,
    kinetic_step,
    overdamped_step,
    simulate,
    simulate_batch,
)
from landanneal.landscape import FModifier
from landanneal.potentials import QUADRATIC, RASTRIGIN, U0
from landanneal.schedules import AdaptiveC, CoolingSchedule, StepSchedule

# recorded from the Philox chunk streams; changing the generator breaks these
GOLDEN = {
    0: [-0.2059740286292238, -0.12884495093462758],
    1: [-0.28978987549091256, -1.271943284573895],
    4095: [-0.09048941968672428, -0.716173948299046],
    4096: [0.9122056479976584, -0.040930018306660654],
    1_000_000: [0.5284177560887225, 0.3184048660232428],
}


def hand_cfg(method, eta=0.1, eps=0.5, **kw):
    return MethodConfig(
        method,
        cooling=CoolingSchedule.constant(eps),
        adaptive_c=AdaptiveC.fixed(kw.pop("c", 0.0)),
        steps=StepSchedule(eta, 1, 1.0),
        **kw,
    )


def rastrigin_cfg(method, modifier=None):
    return MethodConfig(
        method,
        modifier=modifier or (FModifier.arctan(0.5) if method.startswith("I") else FModifier.zero()),
        adaptive_c=AdaptiveC.appendix(),
        cooling=CoolingSchedule.fixed(0.5),
        steps=StepSchedule(0.5, 1000, 0.999),
    )


class TestNoise:
    def test_golden_vectors(self):
        ns = NoiseStream(0, 0, 2)
        for k, expected in GOLDEN.items():
            assert gaussians(ns, k).tolist() == expected

    def test_golden_other_stream(self):
        assert gaussians(NoiseStream(42, 3, 1), 7).tolist() == [1.554372134310357]

    def test_deterministic_and_counter_addressable(self):
        a = NoiseStream(9, 2, 3)
        b = NoiseStream(9, 2, 3)
        for k in (5000, 3, 12_345):
            np.testing.assert_array_equal(gaussians(a, k), gaussians(b, k))
        seq = [a.next() for _ in range(4)]
        for k, v in enumerate(seq):
            np.testing.assert_array_equal(v, b.block(k))
        assert a.cursor == 4

    def test_batch_matches_streams(self):
        batch = NoiseBatch(3, [0, 5, 2], 2)
        for k in (0, 4095, 4096, 9000):
            block = batch.block(k)
            for row, r in zip(block, [0, 5, 2]):
                np.testing.assert_array_equal(row, NoiseStream(3, r, 2).block(k))

    def test_moments(self):
        draws = np.concatenate([_chunk(0, 0, c, 1).ravel() for c in range(245)])
        assert draws.size >= 1_000_000
        assert -0.005 < draws.mean() < 0.005
        assert 0.99 < draws.var() < 1.01

    def test_replicas_uncorrelated(self):
        n = 100_000
        chunks = math.ceil(n / CHUNK)
        r0 = np.concatenate([_chunk(0, 0, c, 1).ravel() for c in range(chunks)])[:n]
        r1 = np.concatenate([_chunk(0, 1, c, 1).ravel() for c in range(chunks)])[:n]
        assert -0.01 < np.corrcoef(r0, r1)[0, 1] < 0.01

    def test_seeds_differ(self):
        assert not np.array_equal(NoiseStream(0, 0, 2).block(0), NoiseStream(1, 0, 2).block(0))


class TestMethodConfig:
    def test_aliases(self):
        assert MethodConfig("iasa").method == "ISA"
        assert MethodConfig("IAKSA").method == "IKSA"

    def test_classical_methods_force_zero_modifier(self):
        assert MethodConfig("SA", modifier=FModifier.arctan(1.0)).modifier.is_zero
        assert MethodConfig("KSA", modifier=FModifier.arctan(1.0)).modifier.is_zero
        assert not MethodConfig("ISA", modifier=FModifier.arctan(1.0)).modifier.is_zero

    def test_rejects(self):
        with pytest.raises(ConfigError):
            MethodConfig("MALA")
        with pytest.raises(ConfigError):
            MethodConfig("KSA", kinetic_form="verlet")


class TestSteps:
    def test_overdamped_hand_example(self):
        cfg = hand_cfg("SA")
        st = initial_state(cfg, QUADRATIC, [1.0])
        out = overdamped_step(cfg, QUADRATIC, st, [1.0])
        assert out.x[0] == pytest.approx(0.9 + math.sqrt(0.1), abs=1e-15)
        assert out.x[0] == pytest.approx(1.21623, abs=1e-5)
        assert out.k == 1 and out.theta == pytest.approx(0.1)

    def test_kinetic_hand_example(self):
        cfg = hand_cfg("KSA")
        st = initial_state(cfg, QUADRATIC, [0.0], [1.0])
        out = kinetic_step(cfg, QUADRATIC, st, [0.0])
        assert out.x[0] == pytest.approx(0.1, abs=1e-15)
        assert out.y[0] == pytest.approx(0.9, abs=1e-15)

    def test_kinetic_theory_form(self):
        cfg = hand_cfg("KSA", kinetic_form="theory")
        st = initial_state(cfg, QUADRATIC, [0.0], [1.0])
        out = kinetic_step(cfg, QUADRATIC, st, [0.0])
        # friction y/eps: 1 - 2*0.1
        assert out.y[0] == pytest.approx(0.8, abs=1e-15)

    def test_kinetic_velocity_uses_old_position(self):
        cfg = hand_cfg("KSA")
        st = initial_state(cfg, QUADRATIC, [1.0], [1.0])
        out = kinetic_step(cfg, QUADRATIC, st, [0.0])
        assert out.x[0] == pytest.approx(1.1)
        # grad U at the old x = 1, eps * (1/eps) * 1 * eta = 0.1
        assert out.y[0] == pytest.approx(1.0 - 0.1 - 0.1)

    def test_improved_overdamped_noise_scale(self):
        m = FModifier.arctan(1.0)
        cfg = hand_cfg("ISA", modifier=m, c=0.0)
        st = initial_state(cfg, QUADRATIC, [2.0])
        out = overdamped_step(cfg, QUADRATIC, st, [1.0])
        sd = math.sqrt(2 * (math.atan(2.0) + 0.5))
        assert out.x[0] == pytest.approx(2.0 - 0.2 + sd * math.sqrt(0.1), abs=1e-14)

    @pytest.mark.parametrize("method", ["SA", "ISA"])
    def test_overdamped_fixed_point(self, method):
        cfg = hand_cfg(method, modifier=FModifier.arctan(0.5))
        st = initial_state(cfg, RASTRIGIN, [0.0, 0.0])
        out = overdamped_step(cfg, RASTRIGIN, st, [0.0, 0.0])
        np.testing.assert_array_equal(out.x, [0.0, 0.0])

    @pytest.mark.parametrize("method", ["KSA", "IKSA"])
    def test_kinetic_fixed_point(self, method):
        cfg = hand_cfg(method, modifier=FModifier.arctan(0.5))
        st = initial_state(cfg, RASTRIGIN, [0.0, 0.0], [0.0, 0.0])
        out = kinetic_step(cfg, RASTRIGIN, st, [0.0, 0.0])
        np.testing.assert_array_equal(out.x, [0.0, 0.0])
        np.testing.assert_array_equal(out.y, [0.0, 0.0])

    def test_wrong_stepper(self):
        with pytest.raises(ValueError):
            overdamped_step(hand_cfg("KSA"), QUADRATIC, initial_state(hand_cfg("KSA"), QUADRATIC, [0.0], [0.0]), [0.0])
        with pytest.raises(ValueError):
            kinetic_step(hand_cfg("SA"), QUADRATIC, initial_state(hand_cfg("SA"), QUADRATIC, [0.0]), [0.0])

    def test_velocity_required_iff_kinetic(self):
        with pytest.raises(ValueError):
            initial_state(hand_cfg("KSA"), QUADRATIC, [0.0])
        with pytest.raises(ValueError):
            initial_state(hand_cfg("SA"), QUADRATIC, [0.0], [0.0])

    def test_step_divergence(self):
        cfg = hand_cfg("SA", eta=3.0)
        st = initial_state(cfg, QUADRATIC, [1e150])
        with pytest.raises(DivergenceError) as exc:
            overdamped_step(cfg, QUADRATIC, st, [0.0])
        assert exc.value.step == 0


class TestReductions:
    @pytest.mark.parametrize("p,x0", [(RASTRIGIN, (9.84, 3.33)), (U0, (-3.0,))])
    def test_isa_with_zero_modifier_is_sa(self, p, x0):
        sa = simulate(rastrigin_cfg("SA"), p, x0, None, 1000, NoiseStream(4, 0, p.dim))
        isa = simulate(rastrigin_cfg("ISA", FModifier.zero()), p, x0, None, 1000, NoiseStream(4, 0, p.dim))
        np.testing.assert_array_equal(sa.x, isa.x)
        np.testing.assert_array_equal(sa.runmin, isa.runmin)

    @pytest.mark.parametrize("p,x0", [(RASTRIGIN, (9.84, 3.33)), (U0, (-3.0,))])
    def test_iksa_with_zero_modifier_is_ksa(self, p, x0):
        y0 = np.zeros(p.dim)
        ksa = simulate(rastrigin_cfg("KSA"), p, x0, y0, 1000, NoiseStream(4, 0, p.dim))
        iksa = simulate(rastrigin_cfg("IKSA", FModifier.zero()), p, x0, y0, 1000, NoiseStream(4, 0, p.dim))
        np.testing.assert_array_equal(ksa.x, iksa.x)
        np.testing.assert_array_equal(ksa.final.y, iksa.final.y)


class TestSimulate:
    def test_zero_steps(self):
        tr = simulate(rastrigin_cfg("SA"), RASTRIGIN, (9.84, 3.33), None, 0, NoiseStream(0, 0, 2))
        assert tr.steps.tolist() == [0]
        assert tr.runmin[0] == RASTRIGIN.eval([9.84, 3.33])
        assert tr.theta[0] == 0.0

    def test_rastrigin_iaksa_runmin(self):
        x0 = (9.84, 3.33)
        cps = list(range(0, 10_001, 100))
        tr = simulate(rastrigin_cfg("IKSA"), RASTRIGIN, x0, (0.0, 0.0), 10_000, NoiseStream(42, 0, 2), cps)
        assert np.all(np.diff(tr.runmin) <= 0)
        assert tr.final.runmin <= RASTRIGIN.eval(x0)

    @pytest.mark.parametrize("method", ["SA", "ISA", "KSA", "IKSA"])
    def test_runmin_is_exact_minimum(self, method):
        cfg = rastrigin_cfg(method)
        y0 = (0.0, 0.0) if cfg.kinetic else None
        tr = simulate(cfg, RASTRIGIN, (9.84, 3.33), y0, 2000, NoiseStream(1, 0, 2))
        np.testing.assert_array_equal(tr.runmin, np.minimum.accumulate(tr.u))
        np.testing.assert_allclose(tr.u, RASTRIGIN.eval(tr.x), rtol=0, atol=0)

    def test_sparse_checkpoints_still_track_minimum(self):
        cfg = rastrigin_cfg("ISA")
        full = simulate(cfg, RASTRIGIN, (9.84, 3.33), None, 500, NoiseStream(1, 0, 2))
        sparse = simulate(cfg, RASTRIGIN, (9.84, 3.33), None, 500, NoiseStream(1, 0, 2), [0, 250, 500])
        np.testing.assert_array_equal(sparse.runmin, full.runmin[[0, 250, 500]])

    def test_theta_column(self):
        cfg = rastrigin_cfg("SA")
        tr = simulate(cfg, RASTRIGIN, (9.84, 3.33), None, 3000, NoiseStream(0, 0, 2), [0, 1, 1000, 3000])
        expected = np.concatenate([[0.0], cfg.steps.thetas(3000)[[0, 999, 2999]]])
        np.testing.assert_allclose(tr.theta, expected, rtol=1e-13)

    def test_cursor_alignment_across_methods(self):
        cursors = []
        for method in ("SA", "ISA", "KSA", "IKSA"):
            cfg = rastrigin_cfg(method)
            ns = NoiseStream(0, 0, 2)
            simulate(cfg, RASTRIGIN, (9.84, 3.33), (0.0, 0.0) if cfg.kinetic else None, 321, ns)
            cursors.append(ns.cursor)
        assert cursors == [321] * 4

    def test_deterministic(self):
        cfg = rastrigin_cfg("IKSA")
        a = simulate(cfg, RASTRIGIN, (9.84, 3.33), (0.0, 0.0), 700, NoiseStream(8, 1, 2))
        b = simulate(cfg, RASTRIGIN, (9.84, 3.33), (0.0, 0.0), 700, NoiseStream(8, 1, 2))
        assert list(a.rows()) == list(b.rows())

    def test_batch_equals_single_replicas(self):
        cfg = rastrigin_cfg("ISA")
        batch = simulate_batch(cfg, RASTRIGIN, (9.84, 3.33), None, 400, NoiseBatch(2, [0, 1, 2], 2), [0, 200, 400])
        for r in range(3):
            single = simulate(cfg, RASTRIGIN, (9.84, 3.33), None, 400, NoiseStream(2, r, 2), [0, 200, 400])
            np.testing.assert_array_equal(batch.x[r], single.x)

    def test_resumes_from_cursor(self):
        cfg = hand_cfg("SA")
        ns = NoiseStream(0, 0, 1, cursor=10)
        tr = simulate(cfg, QUADRATIC, (1.0,), None, 1, ns)
        z = NoiseStream(0, 0, 1).block(10)[0]
        assert tr.x[1, 0] == pytest.approx(0.9 + math.sqrt(0.1) * z, abs=1e-15)
        assert ns.cursor == 11

    def test_divergence_carries_last_checkpoint(self):
        cfg = hand_cfg("SA", eta=3.0)
        with pytest.raises(DivergenceError) as exc:
            simulate(cfg, QUADRATIC, (1.0,), None, 5000, NoiseStream(0, 0, 1), [0, 10, 5000])
        err = exc.value
        assert 10 < err.step < 5000
        assert err.last_checkpoint[0] == 10

    def test_batch_freezes_diverged_replicas(self):
        cfg = hand_cfg("SA", eta=3.0)
        tr = simulate_batch(cfg, QUADRATIC, (1.0,), None, 2000, NoiseBatch(0, [0, 1], 1), [0, 2000])
        assert np.all(tr.failed_at >= 0)
        assert np.all(np.isfinite(tr.final_x))

    def test_mollified_and_adaptive_energy_run(self):
        cfg = MethodConfig(
            "IKSA",
            modifier=FModifier.arctan(0.5),
            adaptive_c=AdaptiveC.mollified(5, 0.1),
            cooling=CoolingSchedule.adaptive(0.5, 5),
            steps=StepSchedule(0.05, 1000, 0.999),
        )
        tr = simulate(cfg, RASTRIGIN, (9.84, 3.33), (0.0, 0.0), 300, NoiseStream(0, 0, 2))
        assert np.all(np.isfinite(tr.x))
        assert len(tr.final.runmin_history) >= 1

    def test_dimension_checks(self):
        with pytest.raises(ValueError):
            simulate(rastrigin_cfg("SA"), RASTRIGIN, (1.0, 1.0), None, 5, NoiseStream(0, 0, 1))
        with pytest.raises(ValueError):
            simulate(rastrigin_cfg("KSA"), RASTRIGIN, (1.0, 1.0), None, 5, NoiseStream(0, 0, 2))
