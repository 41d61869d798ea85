import numpy as np
import pytest

from qcommit import oraclegame as og
from qcommit.channels import Channel
from qcommit.linalg import random_unitary


def literal_kind1_output(u, inp, d):
    """Purify the maximally mixed H ⊗ K input and apply controlled-U on H by hand."""
    dd = d * d
    phi = np.eye(dd).reshape(-1) / d                      # (H K) ⊗ (H' K')
    branches = []
    for c, amp in enumerate(inp.vector):
        op = np.kron(u if c else np.eye(d), np.eye(d))
        branches.append(amp * (np.kron(op, np.eye(dd)) @ phi))
    full = np.concatenate(branches)                       # A ⊗ (H K) ⊗ (H' K')
    t = full.reshape(2 * dd, dd)
    return t @ t.conj().T


class TestEventProbability:
    def test_limits(self):
        assert og.event_probability(3, -1) == 1 and og.event_probability(3, 1) == 0
        assert og.event_probability(1, 0) == pytest.approx(0.5)

    @pytest.mark.parametrize("d", [1, 2, 4])
    def test_inverse(self, d):
        for p in (0.5, 0.125, 0.01):
            assert og.event_probability(d, og.threshold_for(d, p)) == pytest.approx(p, rel=1e-9)

    def test_monte_carlo(self):
        us = random_unitary(3, np.random.default_rng(0), 40000)
        t = 0.3
        emp = np.mean(np.real(us[:, 0, 0]) >= t)
        assert abs(emp - og.event_probability(3, t)) < 5 * np.sqrt(0.25 / 40000)


class TestPUniform:
    def test_m0_is_haar(self):
        spec = og.PUniformSpec(2, 0)
        assert spec.p == 1
        us = og.p_uniform_sample(spec, 100)
        assert us.shape == (100, 2, 2)

    def test_m2_d2(self):
        spec = og.PUniformSpec(2, 2, seed=1)
        assert 0.125 <= spec.calibrated_p <= 0.5
        us = og.p_uniform_sample(spec, 500)
        assert np.all(np.real(us[:, 0, 0]) >= spec.threshold)

    def test_floor(self):
        with pytest.raises(og.CalibrationError):
            og.PUniformSpec(8, 30)
        with pytest.raises(og.CalibrationError):
            og.PUniformSpec(4, 0, threshold=0.9999)

    def test_envelope(self):
        assert og.envelope(2, 0) == pytest.approx(4 * np.sqrt(2))

    def test_expected_norm_point_like(self):
        # Re U00 >= 0.95 pins the first column near |0>; the other diagonal
        # phase stays free, so the mean is close to |0><0| with norm near 1
        spec = og.PUniformSpec(2, 0, threshold=0.95)
        est = og.expected_norm(spec, 2000)
        assert abs(est.mean - 1) < 0.1 and est.mean <= og.envelope(2, 0)

    def test_cross_fit_unbiased_at_zero(self):
        us = random_unitary(4, np.random.default_rng(3), 4000)
        est = og.cross_fit_norm(us)
        assert abs(est.mean) <= 4 * est.std_error
        assert est.extra["plug_in"] > est.mean


class TestOracle:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_closed_form_matches_kraus(self, d):
        rng = np.random.default_rng(d)
        u = random_unitary(d, rng)
        inp = og.OracleInput(0.6, 0.8j)
        a = np.diag(inp.vector) @ np.ones((2, 2)) @ np.diag(inp.vector.conj())
        for kind in (1, 2):
            via_kraus = og.oracle_channel(kind, u, d)(a)
            assert np.allclose(via_kraus, og.oracle_apply(kind, u, inp, d), atol=1e-12)

    def test_kind1_literal(self):
        u = random_unitary(2, np.random.default_rng(4))
        inp = og.OracleInput(np.sqrt(0.3), np.sqrt(0.7))
        assert np.allclose(og.oracle_apply(1, u, inp, 2), literal_kind1_output(u, inp, 2), atol=1e-12)

    @pytest.mark.parametrize("d", [2, 4, 8])
    def test_point_mass_gap(self, d):
        u = og.haar_unitary(d, 5)
        inp = og.OracleInput(np.sqrt(0.2), np.sqrt(0.8))
        assert abs(og.point_mass_gap(u, inp) - 2 * np.sqrt(0.2 * 0.8)) < 1e-9

    def test_hidden_checked(self):
        with pytest.raises(ValueError):
            og.oracle_channel(1, None, 2)
        with pytest.raises(ValueError):
            og.oracle_channel(3, None, 2)


class TestProtocol:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_honest(self, d):
        u = og.haar_unitary(d, d)
        assert abs(og.protocol_accept(1, u, og.honest_prover(u, d), d) - 1) < 1e-9

    def test_identity_prover(self):
        u = og.haar_unitary(2, 0)
        ident = Channel.identity(4)
        assert abs(og.protocol_accept(2, None, ident, 2) - 0.5) < 1e-12
        assert abs(og.protocol_accept(2, None, og.reset_control_prover(2), 2) - 0.25) < 1e-12
        assert og.protocol_accept(1, u, ident, 2) <= 1

    def test_search_kind2(self):
        val, ch = og.search_prover(2, None, 2, restarts=4)
        assert val <= 0.5 + 1e-9
        assert abs(og.protocol_accept(2, None, ch, 2) - val) < 1e-9

    def test_search_kind1_finds_honest(self):
        u = og.haar_unitary(2, 1)
        val, _ = og.search_prover(1, u, 2, restarts=4)
        assert val > 1 - 1e-6


class TestGap:
    def test_formula_agrees(self):
        spec = og.PUniformSpec(2, 2, seed=0)
        est = og.per_query_gap(spec, og.OracleInput(np.sqrt(0.5), np.sqrt(0.5)), 2000)
        assert abs(est.mean - est.extra["formula"]) <= est.std_error + est.extra["formula_std_error"] + 1e-9

    def test_invariance(self):
        spec = og.PUniformSpec(3, 2, seed=0)
        u = og.haar_unitary(3, 7)
        assert og.p_uniform_invariance_check(spec, u, 4000)
        assert og.p_uniform_invariance_check(spec, u, 4000, on_state=True)

    def test_sweep_rows(self):
        rows = og.scaling_sweep([2], [0, 1], 400)
        assert [r["m"] for r in rows] == [0, 1]
        assert set(rows[0]) == set(og.CSV_HEADER)
