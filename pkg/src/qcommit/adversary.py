"""Multistart ascent for cheating senders constrained to a shared marginal.

A cheater prepares a pure state ``omega`` on ``A ⊗ B ⊗ R``, hands over A,
and later applies a bit-dependent unitary ``V_b`` on ``B ⊗ R``.  The two
states ``rho_b = (I_A ⊗ V_b) omega (I_A ⊗ V_b)†`` then have identical A
marginals by construction.  The search maximises

    ½ (tr[M_0 rho_0] + tr[M_1 rho_1])

for PSD acceptance operators ``M_b`` on ``A ⊗ B``.  Both partial problems are
solved exactly: for fixed ``omega`` the objective is convex in ``V_b`` and a
polar step never decreases it; for fixed ``V_b`` the best ``omega`` is a top
eigenvector.  The result is a lower bound on the true optimum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .linalg import LinalgError, as_operator, dagger, random_state, random_unitary

DENSE_LIMIT = 1024


@dataclass
class SearchResult:
    value: float
    p0: float
    p1: float
    omega: np.ndarray          # on A ⊗ B ⊗ R
    v0: np.ndarray             # unitary on B ⊗ R
    v1: np.ndarray
    dims: tuple                # (a, b, r)
    restarts: int
    converged: bool

    def rho(self, bit: int) -> np.ndarray:
        """Pure state ``(I_A ⊗ V_bit) omega`` on A ⊗ B ⊗ R."""
        return _act(self.omega, self.v1 if bit else self.v0, self.dims)


def _act(x: np.ndarray, v: np.ndarray, dims) -> np.ndarray:
    a, b, r = dims
    return (x.reshape(a, b * r) @ v.T).reshape(-1)


def _apply_m(m: np.ndarray, y: np.ndarray, dims) -> np.ndarray:
    """``(M ⊗ I_R) y`` without forming the Kronecker product."""
    a, b, r = dims
    return (m @ y.reshape(a * b, r)).reshape(-1)


def _value(m: np.ndarray, y: np.ndarray, dims) -> float:
    return float(np.real(np.vdot(y, _apply_m(m, y, dims))))


def _best_omega(ms, vs, dims, x0: np.ndarray) -> np.ndarray:
    a, b, r = dims
    n = a * b * r

    def matvec(x):
        x = np.asarray(x).reshape(-1)
        out = np.zeros(n, dtype=complex)
        for m, v in zip(ms, vs):
            y = _act(x, v, dims)
            out += 0.5 * _act(_apply_m(m, y, dims), dagger(v), dims)
        return out

    if n <= DENSE_LIMIT:
        h = np.column_stack([matvec(e) for e in np.eye(n, dtype=complex)])
        h = (h + dagger(h)) / 2
        _, vecs = np.linalg.eigh(h)
        return vecs[:, -1]
    op = LinearOperator((n, n), matvec=matvec, dtype=complex)
    _, vecs = eigsh(op, k=1, which="LA", v0=x0, tol=1e-12)
    v = vecs[:, 0]
    return v / np.linalg.norm(v)


def shared_marginal_search(m0, m1, a: int, b: int, ref_dim: int | None = None,
                           restarts: int = 16, seed: int = 0, max_iter: int = 300,
                           tol: float = 1e-12) -> SearchResult:
    """Best found ½(tr M0 rho0 + tr M1 rho1) over rho_b sharing their A marginal.

    ``m0`` and ``m1`` act on ``A ⊗ B`` with dimensions ``a`` and ``b``.  The
    reference defaults to dimension ``a * b``, which lets any pair of states
    with equal A marginals be reached.
    """
    m0, m1 = as_operator(m0), as_operator(m1)
    if m0.shape != (a * b, a * b) or m1.shape != m0.shape:
        raise LinalgError(f"acceptance operators must be {a * b}-dimensional")
    r = a * b if ref_dim is None else int(ref_dim)
    dims = (a, b, r)
    e = b * r
    best = None
    all_conv = True
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        x = random_state(a * e, rng)
        vs = [random_unitary(e, rng), random_unitary(e, rng)]
        val, conv = -1.0, False
        for _ in range(max_iter):
            for i, m in enumerate((m0, m1)):
                y = _act(x, vs[i], dims)
                g = _apply_m(m, y, dims).reshape(a, e)
                # linearised objective is Re Σ n_jk V_jk = Re tr(conj(n)† V)
                n = dagger(g) @ x.reshape(a, e)
                u, _, vh = np.linalg.svd(n.conj())
                vs[i] = u @ vh
            x = _best_omega((m0, m1), vs, dims, x)
            new = 0.5 * (_value(m0, _act(x, vs[0], dims), dims)
                         + _value(m1, _act(x, vs[1], dims), dims))
            if new - val < tol:
                val, conv = max(val, new), True
                break
            val = new
        all_conv &= conv
        if best is None or val > best[0]:
            best = (val, x, vs[0], vs[1])
    val, x, v0, v1 = best
    p0 = _value(m0, _act(x, v0, dims), dims)
    p1 = _value(m1, _act(x, v1, dims), dims)
    return SearchResult(0.5 * (p0 + p1), p0, p1, x, v0, v1, dims, restarts, all_conv)
