"""Cross-engine agreement against the committed reference dumps.

The corpus (.klay files, weight files, expected outputs) was produced by the
reference engine's CLI; this suite replays the same inputs on the JAX path.
Tolerances: 1e-10 relative on 64-bit forward values, 1e-5 on gradients.
"""

import numpy as np
import pytest

from array_consumer import decode_weights, dump_payload, forward, gradient

from conftest import read_json

FORWARD_RTOL = 1e-10
GRAD_RTOL = 1e-5


def rows_for(name: str, program) -> np.ndarray:
    return decode_weights(read_json(name), program)


def expected_roots(name: str) -> np.ndarray:
    return np.atleast_2d(np.asarray(read_json(name)["roots"]))


class TestForwardAgreement:
    def test_fig_uniform_half(self, fig_program):
        out = forward(fig_program, rows_for("w_half.json", fig_program))
        np.testing.assert_allclose(out, expected_roots("fig_half_eval.json"), rtol=FORWARD_RTOL)
        assert out[0, 0] == pytest.approx(0.8125)

    def test_fig_mixed_real(self, fig_program):
        out = forward(fig_program, rows_for("w_mixed.json", fig_program))
        np.testing.assert_allclose(out, expected_roots("fig_mixed_eval.json"), rtol=FORWARD_RTOL)

    def test_fig_mixed_log(self, fig_program):
        rows = np.log(rows_for("w_mixed.json", fig_program))
        out = forward(fig_program, rows, domain="log")
        np.testing.assert_allclose(
            out, expected_roots("fig_mixed_eval_log.json"), rtol=FORWARD_RTOL
        )

    def test_fig_mixed_log_epsilon(self, fig_program):
        rows = np.log(rows_for("w_mixed.json", fig_program))
        out = forward(fig_program, rows, domain="log", epsilon=1e-3)
        np.testing.assert_allclose(
            out, expected_roots("fig_mixed_eval_log_eps.json"), rtol=FORWARD_RTOL
        )

    def test_fig_batch(self, fig_program):
        out = forward(fig_program, rows_for("w_batch.json", fig_program))
        np.testing.assert_allclose(out, expected_roots("fig_batch_eval.json"), rtol=FORWARD_RTOL)

    def test_two_root_program(self, pair_program):
        out = forward(pair_program, rows_for("w_pair.json", pair_program))
        assert out.shape == (1, 2)
        np.testing.assert_allclose(out, expected_roots("pair_eval.json"), rtol=FORWARD_RTOL)


class TestGradientAgreement:
    def test_fig_mixed_real_grad(self, fig_program):
        rows = rows_for("w_mixed.json", fig_program)
        grad = gradient(fig_program, rows)
        np.testing.assert_allclose(
            grad, np.asarray(read_json("fig_mixed_grad.json")["grad"]), rtol=GRAD_RTOL
        )

    def test_fig_mixed_log_grad(self, fig_program):
        rows = np.log(rows_for("w_mixed.json", fig_program))
        grad = gradient(fig_program, rows, domain="log")
        np.testing.assert_allclose(
            grad,
            np.asarray(read_json("fig_mixed_grad_log.json")["grad"]),
            rtol=GRAD_RTOL,
            atol=1e-12,
        )

    def test_fig_batch_grad(self, fig_program):
        rows = rows_for("w_batch.json", fig_program)
        grad = gradient(fig_program, rows)
        np.testing.assert_allclose(
            grad, np.asarray(read_json("fig_batch_grad.json")["grad"]), rtol=GRAD_RTOL
        )

    def test_pair_grad(self, pair_program):
        rows = rows_for("w_pair.json", pair_program)
        grad = gradient(pair_program, rows)
        np.testing.assert_allclose(
            grad, np.asarray(read_json("pair_grad.json")["grad"]), rtol=GRAD_RTOL
        )


class TestShapesAndSchema:
    def test_batch_128_shape(self, fig_program):
        rng = np.random.default_rng(0)
        rows = rng.uniform(0.05, 0.95, size=(128, fig_program.num_inputs))
        out = forward(fig_program, rows)
        assert out.shape == (128, fig_program.num_roots)

    def test_shape_mismatch_rejected(self, fig_program):
        with pytest.raises(ValueError):
            forward(fig_program, np.ones((1, 3)))

    def test_dump_schema_round_trip(self, fig_program):
        rows = rows_for("w_mixed.json", fig_program)
        payload = dump_payload(forward(fig_program, rows), gradient(fig_program, rows))
        reference = read_json("fig_mixed_grad.json")
        np.testing.assert_allclose(payload["roots"], reference["roots"], rtol=FORWARD_RTOL)
        np.testing.assert_allclose(payload["grad"], reference["grad"], rtol=GRAD_RTOL)

    def test_zero_probability_stays_minus_inf(self, fig_program):
        rows = rows_for("w_half.json", fig_program)
        rows[0, :2] = 0.0  # both polarities of variable 1
        with np.errstate(divide="ignore"):
            out = forward(fig_program, np.log(rows), domain="log")
        assert np.isneginf(out[0, 0])
        assert not np.isnan(out).any()


class TestCliDump:
    def test_module_cli_matches_reference(self, tmp_path, capsys):
        import json as json_mod

        from array_consumer.__main__ import main

        from conftest import fixture_path

        code = main([fixture_path("fig_main.klay"), fixture_path("w_mixed.json"), "--grad"])
        assert code == 0
        payload = json_mod.loads(capsys.readouterr().out)
        reference = read_json("fig_mixed_grad.json")
        np.testing.assert_allclose(payload["roots"], reference["roots"], rtol=FORWARD_RTOL)
        np.testing.assert_allclose(payload["grad"], reference["grad"], rtol=GRAD_RTOL)
