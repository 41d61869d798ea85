"""Independent reference implementations used only by the tests.

Each one takes a different computational route from the package code:
explicit index loops, closed forms, or a semidefinite program.
"""
from __future__ import annotations

import itertools

import numpy as np


def kron_loops(a, b):
    a, b = np.asarray(a), np.asarray(b)
    out = np.zeros((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), dtype=complex)
    for i, j, k, l in itertools.product(range(a.shape[0]), range(a.shape[1]),
                                        range(b.shape[0]), range(b.shape[1])):
        out[i * b.shape[0] + k, j * b.shape[1] + l] = a[i, j] * b[k, l]
    return out


def partial_trace_sum(rho, shape, keep):
    """Trace out by summing basis sandwiches ``(I ⊗ <e| ⊗ I) rho (I ⊗ |e> ⊗ I)``."""
    shape = list(shape)
    for idx in sorted(set(range(len(shape))) - set(keep), reverse=True):
        left = int(np.prod(shape[:idx]))
        right = int(np.prod(shape[idx + 1:]))
        d = shape[idx]
        acc = 0
        for e in np.eye(d):
            op = np.kron(np.kron(np.eye(left), e[None, :]), np.eye(right))
            acc = acc + op @ rho @ op.conj().T
        rho = acc
        del shape[idx]
    return rho


def qubit_fidelity(rho, sigma):
    """Closed form for 2x2 states: F² = tr(ρσ) + 2 sqrt(det ρ det σ)."""
    f2 = np.real(np.trace(rho @ sigma)) + 2 * np.sqrt(max(0.0, np.real(np.linalg.det(rho)))
                                                      * max(0.0, np.real(np.linalg.det(sigma))))
    return float(np.sqrt(max(f2, 0.0)))


def swap_operator(n: int) -> np.ndarray:
    s = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            s[j * n + i, i * n + j] = 1
    return s


def diamond_sdp(phi0, phi1) -> float:
    """Exact diamond norm of a channel difference via the Watrous SDP."""
    import cvxpy as cp
    from qcommit.channels import choi

    j = choi(phi0) - choi(phi1)          # on input ⊗ output
    d_in, d_out = phi0.d_in, phi0.d_out
    w = cp.Variable((d_in * d_out, d_in * d_out), hermitian=True)
    rho = cp.Variable((d_in, d_in), hermitian=True)
    cons = [w >> 0, rho >> 0, cp.real(cp.trace(rho)) == 1,
            w << cp.kron(rho, np.eye(d_out))]
    prob = cp.Problem(cp.Maximize(cp.real(cp.trace(j.conj().T @ w))), cons)
    prob.solve(solver="CLARABEL")
    return 2 * prob.value


def shared_marginal_sdp(m0, m1, a: int, b: int) -> float:
    """max ½(tr M0 ρ0 + tr M1 ρ1) over states with tr_B ρ0 = tr_B ρ1."""
    import cvxpy as cp

    r0 = cp.Variable((a * b, a * b), hermitian=True)
    r1 = cp.Variable((a * b, a * b), hermitian=True)
    cons = [r0 >> 0, r1 >> 0, cp.real(cp.trace(r0)) == 1,
            cp.partial_trace(r0, [a, b], axis=1) == cp.partial_trace(r1, [a, b], axis=1)]
    obj = 0.5 * cp.real(cp.trace(m0 @ r0) + cp.trace(m1 @ r1))
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver="CLARABEL")
    return float(prob.value)


def literal_swap_test_pass(rho, phi, k: int) -> float:
    """tr[(ρ ⊗ φ^{⊗k}) Π] with Π the product of literal (I + SWAP_i)/2 projectors.

    Register layout: the k blocks of ρ, then the k copies of φ; SWAP_i
    exchanges block i with copy i.
    """
    phi = np.asarray(phi, dtype=complex).ravel()
    n = phi.size
    state = rho
    for _ in range(k):
        state = np.kron(state, np.outer(phi, phi.conj()))
    total = 2 * k
    dim = n ** total
    proj_all = np.eye(dim, dtype=complex)
    for i in range(k):
        perm = list(range(total))
        perm[i], perm[k + i] = perm[k + i], perm[i]
        swap = np.zeros((dim, dim))
        for idx in itertools.product(range(n), repeat=total):
            src = int(np.ravel_multi_index(idx, (n,) * total))
            dst = int(np.ravel_multi_index(tuple(idx[p] for p in perm), (n,) * total))
            swap[dst, src] = 1
        proj_all = proj_all @ (np.eye(dim) + swap) / 2
    return float(np.real(np.trace(state @ proj_all)))
