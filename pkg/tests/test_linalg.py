import numpy as np
import pytest

from qcommit.linalg import (
    LinalgError,
    check_density,
    herm_eig,
    ket,
    operator_from_json,
    operator_to_json,
    partial_trace,
    permute_systems,
    polar_step,
    proj,
    psd_sqrt,
    purify,
    random_density,
    random_state,
    random_unitary,
    reduced_state,
    tensor,
    uhlmann_overlap,
)

from oracles import kron_loops, partial_trace_sum

PHI_PLUS = np.array([1, 0, 0, 1]) / np.sqrt(2)


def herm(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


class TestTensor:
    def test_identity(self):
        assert np.allclose(tensor(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_bookkeeping(self):
        v = tensor(ket(0, 2), ket(1, 2))
        assert np.argmax(np.abs(v)) == 1 and np.isclose(np.abs(v).sum(), 1)

    def test_matches_loops(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            assert np.allclose(tensor(a, b), kron_loops(a, b), atol=1e-14)

    def test_associative_and_bilinear(self):
        rng = np.random.default_rng(1)
        a, b, c = (rng.standard_normal((2, 3)) for _ in range(3))
        assert np.allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), atol=1e-12)
        b2 = rng.standard_normal((2, 3))
        assert np.allclose(tensor(a, 2 * b + b2), 2 * tensor(a, b) + tensor(a, b2), atol=1e-12)


class TestPartialTrace:
    def test_product(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            r, s = random_density(3, rng), random_density(2, rng)
            assert np.allclose(partial_trace(np.kron(r, s), (3, 2), [0]), r, atol=1e-12)

    def test_bell_reduction(self):
        assert np.allclose(partial_trace(proj(PHI_PLUS), (2, 2), [0]), np.eye(2) / 2)

    def test_matches_sum_oracle(self):
        rng = np.random.default_rng(3)
        for keep in ([0], [1], [2], [0, 2], [1, 2], []):
            rho = random_density(8, rng)
            got = partial_trace(rho, (2, 2, 2), keep)
            assert np.allclose(got, partial_trace_sum(rho, (2, 2, 2), keep), atol=1e-12)
            assert np.isclose(np.trace(got), 1)

    def test_shape_mismatch(self):
        with pytest.raises(LinalgError):
            partial_trace(np.eye(4) / 4, (2, 3), [0])


def test_permute_systems_roundtrip():
    rng = np.random.default_rng(4)
    a, b, c = random_density(2, rng), random_density(3, rng), random_density(2, rng)
    out = permute_systems(tensor(a, b, c), (2, 3, 2), [2, 0, 1])
    assert np.allclose(out, tensor(c, a, b))
    v = tensor(random_state(2, rng), random_state(3, rng))
    w = permute_systems(v, (2, 3), [1, 0])
    assert np.allclose(np.kron(v.reshape(2, 3).T.reshape(-1), 1), w)


class TestHermEig:
    def test_pauli_z(self):
        w, _ = herm_eig(np.diag([1.0, -1.0]))
        assert np.allclose(w, [1, -1])

    def test_identity(self):
        w, _ = herm_eig(np.eye(5))
        assert np.allclose(w, 1)

    def test_quadratic_formula(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            h = herm(2, rng)
            tr, det = np.trace(h).real, np.linalg.det(h).real
            disc = np.sqrt(tr ** 2 - 4 * det)
            w, _ = herm_eig(h)
            assert np.allclose(w, [(tr + disc) / 2, (tr - disc) / 2], atol=1e-12)

    def test_reconstruction_sweep(self):
        rng = np.random.default_rng(6)
        for _ in range(1000):
            d = int(rng.integers(1, 17))
            h = herm(d, rng)
            w, v = herm_eig(h)
            scale = np.linalg.norm(h, 2)
            assert np.all(np.diff(w) <= 1e-12)
            assert np.abs(v @ np.diag(w) @ v.conj().T - h).max() <= 1e-10 * scale
            assert np.abs(v.conj().T @ v - np.eye(d)).max() <= 1e-10
            assert np.abs(h @ v - v * w).max() <= 1e-10 * scale

    def test_rejects_non_hermitian(self):
        with pytest.raises(LinalgError):
            herm_eig(np.array([[0, 1], [0, 0]]))


class TestPsdSqrt:
    def test_examples(self):
        assert np.allclose(psd_sqrt(np.eye(3)), np.eye(3))
        assert np.allclose(psd_sqrt(np.diag([0.25, 0.81])), np.diag([0.5, 0.9]))

    def test_roundtrip(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = random_density(5, rng, rank=3) * 3
            r = psd_sqrt(a)
            assert np.abs(r @ r - a).max() <= 1e-9 * np.linalg.norm(a, 2)
            assert np.linalg.eigvalsh(r).min() >= -1e-12

    def test_rejects_negative(self):
        with pytest.raises(LinalgError):
            psd_sqrt(np.diag([1.0, -0.1]))


class TestPurify:
    def test_pure_input(self):
        psi = random_state(3, np.random.default_rng(8))
        p = purify(proj(psi))
        assert p.size == 3                       # reference dimension 1
        assert np.isclose(abs(np.vdot(p, psi)), 1)

    def test_maximally_mixed(self):
        p = purify(np.eye(2) / 2)
        assert np.allclose(reduced_state(p, (2, 2), [0]), np.eye(2) / 2)

    def test_roundtrip_sweep(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            d = int(rng.integers(1, 9))
            rank = int(rng.integers(1, d + 1))
            rho = random_density(d, rng, rank)
            p = purify(rho)
            r = p.size // d
            assert r == rank
            assert np.abs(reduced_state(p, (d, r), [0]) - rho).max() <= 1e-10


class TestUhlmann:
    def test_equal_states(self):
        rho = random_density(3, np.random.default_rng(10))
        p = purify(rho, 3)
        assert np.isclose(abs(np.vdot(p, uhlmann_overlap(rho, rho, p))), 1)

    def test_orthogonal_supports(self):
        rho, sigma = np.diag([1, 0, 0]), np.diag([0, 0.5, 0.5])
        p = purify(rho, 2)
        assert abs(np.vdot(p, uhlmann_overlap(rho, sigma, p))) < 1e-12

    def test_matches_fidelity(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            rho, sigma = random_density(2, rng), random_density(2, rng)
            p = purify(rho, 2)
            y = uhlmann_overlap(rho, sigma, p)
            # independent fidelity through psd_sqrt and singular values
            f = np.linalg.svd(psd_sqrt(rho) @ psd_sqrt(sigma), compute_uv=False).sum()
            assert abs(abs(np.vdot(p, y)) - f) <= 1e-8
            assert np.allclose(reduced_state(y, (2, 2), [0]), sigma, atol=1e-10)

    def test_rejects_wrong_purification(self):
        rho = np.eye(2) / 2
        with pytest.raises(LinalgError):
            uhlmann_overlap(rho, rho, np.kron(ket(0, 2), ket(0, 2)))


def test_polar_step_maximises():
    rng = np.random.default_rng(12)
    n = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    v = polar_step(n)
    best = np.real(np.trace(v.conj() @ n))
    assert np.isclose(best, np.linalg.svd(n, compute_uv=False).sum())
    for _ in range(50):
        u = random_unitary(4, rng)
        assert np.real(np.trace(u.conj() @ n)) <= best + 1e-12


def test_random_unitary_batch():
    us = random_unitary(3, np.random.default_rng(13), size=5)
    for u in us:
        assert np.allclose(u.conj().T @ u, np.eye(3), atol=1e-12)


def test_json_roundtrip():
    a = np.array([[1 + 2j, 3], [0, -1j]])
    assert np.array_equal(operator_from_json(operator_to_json(a)), a)
    with pytest.raises(LinalgError):
        operator_from_json({"rows": 2, "cols": 2, "re": [1, 2, 3], "im": [0, 0, 0]})


def test_check_density_rejects():
    with pytest.raises(LinalgError):
        check_density(np.diag([0.6, 0.6]))
    with pytest.raises(LinalgError):
        check_density(np.diag([1.2, -0.2]))
