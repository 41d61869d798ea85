import numpy as np
import pytest

from qcommit.channels import CNOT, Channel, Circuit, H, X, Z, choi, output_state, run_unitary, to_channel
from qcommit.linalg import LinalgError, ket, proj, random_density, random_unitary


def random_channel(d_in, d_out, n_kraus, rng):
    g = rng.standard_normal((n_kraus * d_out, d_in)) + 1j * rng.standard_normal((n_kraus * d_out, d_in))
    q, _ = np.linalg.qr(g)
    return Channel(tuple(q.reshape(n_kraus, d_out, d_in)))


class TestChannel:
    def test_trace_preserving_check(self):
        with pytest.raises(LinalgError):
            Channel((np.eye(2) * 2,))

    def test_depolarizing(self):
        r = random_density(3, np.random.default_rng(0))
        assert np.allclose(Channel.depolarizing(3)(r), np.eye(3) / 3, atol=1e-12)

    def test_adjoint_duality(self):
        rng = np.random.default_rng(1)
        ch = random_channel(2, 3, 3, rng)
        x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        y = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        assert np.isclose(np.trace(y.conj().T @ ch(x)), np.trace(ch.adjoint(y).conj().T @ x))

    def test_apply_on_middle(self):
        rng = np.random.default_rng(2)
        ch = Channel.unitary(random_unitary(2, rng))
        a, b, c = (random_density(2, rng) for _ in range(3))
        got = ch.apply(np.kron(np.kron(a, b), c), left=2, right=2)
        assert np.allclose(got, np.kron(np.kron(a, ch(b)), c), atol=1e-12)

    def test_stinespring_roundtrip(self):
        rng = np.random.default_rng(3)
        ch = random_channel(2, 2, 3, rng)
        u, a, g = ch.stinespring()
        assert np.allclose(u.conj().T @ u, np.eye(u.shape[1]), atol=1e-10)
        back = Channel.from_stinespring(u, 2, a, 2, g)
        r = random_density(2, rng)
        assert np.allclose(back(r), ch(r), atol=1e-10)

    def test_choi_positive_and_normalised(self):
        ch = random_channel(2, 2, 2, np.random.default_rng(4))
        j = choi(ch)
        assert np.linalg.eigvalsh(j).min() > -1e-10
        assert np.isclose(np.trace(j), 2)

    def test_measurement(self):
        m = Channel.measurement(proj(ket(1, 2)))
        assert np.isclose(m.accept_probability(proj(ket(1, 2))), 1)
        assert np.allclose(m.effect(), proj(ket(1, 2)))

    def test_json_roundtrip(self):
        ch = random_channel(2, 2, 2, np.random.default_rng(5))
        back = Channel.from_json(ch.to_json())
        r = random_density(2, np.random.default_rng(6))
        assert np.allclose(back(r), ch(r))


class TestCircuit:
    def test_bell(self):
        c = Circuit(2, [(H, (0,)), (CNOT, (0, 1))], ancillas=2)
        assert np.allclose(output_state(c), np.array([1, 0, 0, 1]) / np.sqrt(2))

    def test_cnot_reversed_targets(self):
        c = Circuit(2, [(CNOT, (1, 0))])
        assert np.allclose(run_unitary(c, np.kron(ket(0, 2), ket(1, 2))), np.kron(ket(1, 2), ket(1, 2)))

    def test_unitary_matches_kron(self):
        rng = np.random.default_rng(7)
        a, b = random_unitary(2, rng), random_unitary(2, rng)
        c = Circuit(3, [(a, (0,)), (b, (2,))])
        assert np.allclose(c.unitary(), np.kron(np.kron(a, np.eye(2)), b))

    def test_discard_gives_dephasing(self):
        # copy into an ancilla and discard: Z-basis dephasing
        c = Circuit(2, [(CNOT, (0, 1))], ancillas=1, discards=(1,))
        ch = to_channel(c)
        plus = proj((ket(0, 2) + ket(1, 2)) / np.sqrt(2))
        assert np.allclose(ch(plus), np.eye(2) / 2)

    def test_validation(self):
        with pytest.raises(LinalgError):
            Circuit(2, [(X, (2,))])
        with pytest.raises(LinalgError):
            Circuit(2, [(np.ones((2, 2)), (0,))])
        with pytest.raises(LinalgError):
            Circuit(2, [(CNOT, (0, 0))])

    def test_json_roundtrip(self):
        c = Circuit(2, [(H, (0,)), (Z, (1,))], ancillas=1, split=([0], [1]))
        back = Circuit.from_json(c.to_json())
        assert np.allclose(back.unitary(), c.unitary()) and back.split == c.split
