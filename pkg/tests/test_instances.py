import numpy as np
import pytest

from qcommit.channels import Channel, Z
from qcommit.instances import (
    InstanceError,
    QCDInstance,
    QSDInstance,
    gen_pi,
    gen_qcd,
    gen_qsd,
    ideal_qcd,
    pi_bell_instance,
    pi_trade_off_instance,
    qsd_pure_pair,
)
from qcommit.linalg import partial_trace
from qcommit.norms import trace_norm

from oracles import diamond_sdp, shared_marginal_sdp


class TestQSD:
    @pytest.mark.parametrize("q", [1, 2, 3])
    def test_yes_far(self, q):
        inst = gen_qsd("Y", q, seed=q)
        assert trace_norm(inst.output(0) - inst.output(1)) >= 2 - 1e-9

    def test_entangled_garbage(self):
        inst = gen_qsd("Y", 2, entangle_garbage=True, seed=3)
        assert inst.dims == (4, 2)
        # output is mixed, so the garbage matters
        assert np.linalg.matrix_rank(inst.output(0), tol=1e-9) > 1
        with pytest.raises(ValueError):
            gen_qsd("Y", 1, entangle_garbage=True)

    def test_no_close(self):
        inst = gen_qsd("N", 2, seed=4)
        assert inst.distance() <= 1e-9
        assert not np.allclose(inst.full_state(0), inst.full_state(1))

    def test_wrong_tag_rejected(self):
        inst = gen_qsd("N", 1, seed=5)
        with pytest.raises(InstanceError):
            QSDInstance(inst.c0, inst.c1, kind="Y")

    def test_pure_pair(self):
        inst = qsd_pure_pair(np.pi / 3)
        assert np.isclose(inst.distance(), 2 * np.sin(np.pi / 3))


class TestQCD:
    def test_ideal_matches_sdp(self):
        inst = ideal_qcd()
        assert np.isclose(diamond_sdp(inst.q0, inst.q1), 2, atol=1e-6)

    @pytest.mark.parametrize("q,disc", [(1, True), (2, False), (2, True)])
    def test_generated_yes(self, q, disc):
        inst = gen_qcd("Y", q, seed=q, discards=disc)
        assert inst.meta["diamond_lower"] >= 2 - 1e-6

    def test_generated_no(self):
        inst = gen_qcd("N", 2, seed=1)
        assert inst.meta["diamond_dim_bound"] <= 1e-9

    def test_wrong_tag_rejected(self):
        with pytest.raises(InstanceError):
            QCDInstance(Channel.identity(2), Channel.unitary(Z), kind="N")
        with pytest.raises(InstanceError):
            QCDInstance(Channel.identity(2), Channel.depolarizing(2, 0.2), kind="Y")

    def test_dilations_reproduce_channels(self):
        inst = gen_qcd("Y", 1, seed=2, discards=True)
        u0, u1, a, g = inst.dilations()
        for u, ch in ((u0, inst.q0), (u1, inst.q1)):
            back = Channel.from_stinespring(u, inst.d_in, a, inst.d_out, g)
            r = np.diag([0.3, 0.7]).astype(complex)
            assert np.allclose(back(r), ch(r), atol=1e-10)


class TestPi:
    def test_bell(self):
        inst = pi_bell_instance()
        assert inst.meta["honest_average"] == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2)])
    def test_yes_marginals(self, dims):
        inst = gen_pi("Y", dims, seed=7)
        gap = np.abs(partial_trace(inst.rho0, dims, [1]) - partial_trace(inst.rho1, dims, [1])).max()
        assert gap <= 1e-10

    def test_trade_off_against_sdp(self):
        inst = pi_trade_off_instance()
        assert inst.meta["searched_value"] <= 0.5 + 1e-3
        e0, e1 = inst.effects_yx()
        assert shared_marginal_sdp(e0, e1, 2, 2) <= 0.5 + 1e-6

    def test_generated_no_against_sdp(self):
        inst = gen_pi("N", (2, 2), seed=3)
        e0, e1 = inst.effects_yx()
        exact = shared_marginal_sdp(e0, e1, 2, 2)
        assert inst.meta["searched_value"] <= exact + 1e-6
        assert exact <= 0.5 + 1e-6

    def test_dims_validated(self):
        with pytest.raises(ValueError):
            gen_pi("Y", (5, 2))
