"""Distance and overlap functionals, plus the optimizers built on them.

The diamond-norm routines only ever claim a lower bound: they run a
multistart alternating ascent over pure inputs on input ⊗ reference.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Channel
from .linalg import (
    ATOL,
    LinalgError,
    as_operator,
    check_density,
    dagger,
    herm_eig,
    partial_trace,
    proj,
    psd_sqrt,
    random_state,
    trace_norm_hermitian_split,
    uhlmann_overlap,
)


def trace_norm(x) -> float:
    """Sum of singular values."""
    x = as_operator(x)
    return float(np.sum(np.linalg.svd(x, compute_uv=False)))


def fidelity(rho, sigma) -> float:
    """``F(rho, sigma) = tr sqrt(sqrt(sigma) rho sqrt(sigma))`` (not squared)."""
    rho = check_density(rho)
    sigma = check_density(sigma)
    if rho.shape != sigma.shape:
        raise LinalgError(f"dimension mismatch {rho.shape} vs {sigma.shape}")
    s = psd_sqrt(sigma)
    inner = s @ rho @ s
    w = np.linalg.eigvalsh((inner + dagger(inner)) / 2)
    return float(min(1.0, np.sum(np.sqrt(np.clip(w, 0, None)))))


def marginal_fidelity(psi, phi, shape) -> float:
    """Fidelity of the first-factor marginals of two pure states on ``shape = (dA, dB)``.

    With ``X`` the amplitudes reshaped to dA x dB, ``rho = X X†`` and
    ``F = ‖X_psi† X_phi‖_tr``.  No square roots of eigenvalues are taken, so
    exactly orthogonal marginals give zero up to rounding rather than up to
    its square root.
    """
    da, db = (int(s) for s in shape)
    x = np.asarray(psi, dtype=complex).reshape(da, db)
    y = np.asarray(phi, dtype=complex).reshape(da, db)
    return float(min(1.0, trace_norm(dagger(x) @ y)))


def fvdg_bounds(rho, sigma) -> tuple[float, float, float]:
    """Return ``(1 - F, ½‖rho - sigma‖, sqrt(1 - F²))`` and check their ordering."""
    f = fidelity(rho, sigma)
    lower = 1 - f
    mid = 0.5 * trace_norm(np.asarray(rho) - np.asarray(sigma))
    upper = float(np.sqrt(max(0.0, 1 - f * f)))
    if not (lower <= mid + ATOL and mid <= upper + ATOL):
        raise AssertionError(f"Fuchs-van de Graaf ordering violated: {lower}, {mid}, {upper}")
    return lower, mid, upper


def swap_test_accept(rho, sigma) -> float:
    """Acceptance probability ``½ + ½ tr(rho sigma)`` of the swap test."""
    rho = check_density(rho)
    sigma = check_density(sigma)
    if rho.shape != sigma.shape:
        raise LinalgError("swap test needs states of equal dimension")
    return float(0.5 + 0.5 * np.real(np.trace(rho @ sigma)))


@dataclass
class FidelitySumResult:
    value: float
    optimizer_state: np.ndarray
    target: float
    converged: bool
    iterations: int

    def to_json(self) -> dict:
        return {"value": self.value, "target": self.target,
                "converged": self.converged, "iterations": self.iterations}


def fidelity_sum_opt(rho, sigma, restarts: int = 8, seed: int = 0,
                     max_iter: int = 2000, tol: float = 1e-9) -> FidelitySumResult:
    """Maximise ``F(rho, xi)² + F(xi, sigma)²`` over states ``xi`` by seesaw.

    Each round aligns purifications of ``rho`` and ``sigma`` with the current
    purification of ``xi`` (Uhlmann) and replaces ``xi`` by the reduced state
    of the normalised top eigenvector of the sum of the two aligned
    projectors.  The known optimum ``1 + F(rho, sigma)`` serves as the
    convergence certificate; the best value is returned either way.
    """
    rho = check_density(rho)
    sigma = check_density(sigma)
    if rho.shape != sigma.shape:
        raise LinalgError("dimension mismatch")
    d = rho.shape[0]
    target = 1 + fidelity(rho, sigma)
    rng = np.random.default_rng(seed)
    best = None
    total_iter = 0
    for _ in range(restarts):
        chi = random_state(d * d, rng)
        value, prev = -1.0, -1.0
        for it in range(max_iter):
            xi = partial_trace(proj(chi), (d, d), [0])
            xi = (xi + dagger(xi)) / 2
            value = fidelity(rho, xi) ** 2 + fidelity(xi, sigma) ** 2
            if abs(value - target) < tol or abs(value - prev) < 1e-15:
                break
            prev = value
            a = uhlmann_overlap(xi, rho, chi)
            b = uhlmann_overlap(xi, sigma, chi)
            ov = np.vdot(a, b)
            phase = ov / abs(ov) if abs(ov) > 0 else 1.0
            v = a + np.conj(phase) * b
            chi = v / np.linalg.norm(v)
        total_iter += it + 1
        if best is None or value > best[0]:
            best = (value, xi)
        if abs(best[0] - target) < tol:
            break
    value, xi = best
    return FidelitySumResult(float(value), xi, float(target),
                             bool(abs(value - target) < 1e-6), total_iter)


# ---------------------------------------------------------------------------
# Channel distances
# ---------------------------------------------------------------------------

@dataclass
class DiamondEstimate:
    lower_bound: float
    maximizer: np.ndarray
    restarts: int
    converged: bool

    def to_json(self) -> dict:
        return {"lower_bound": self.lower_bound, "restarts": self.restarts,
                "converged": self.converged}


def _check_pair(phi0: Channel, phi1: Channel):
    if (phi0.d_in, phi0.d_out) != (phi1.d_in, phi1.d_out):
        raise LinalgError("channels have different input/output dimensions")


def stabilized_output(phi: Channel, state) -> np.ndarray:
    """``(id_F ⊗ phi)(|state><state|)`` for a state on F ⊗ input (F first)."""
    d = phi.d_in
    m = np.asarray(state, dtype=complex).reshape(-1, d)
    out = np.zeros((m.shape[0] * phi.d_out,) * 2, dtype=complex)
    for k in phi.kraus:
        v = (m @ k.T).reshape(-1)
        out += np.outer(v, v.conj())
    return out


def _stabilized_adjoint(phi: Channel, y: np.ndarray, ref: int) -> np.ndarray:
    """Adjoint of ``id_F ⊗ phi`` applied to an operator on F ⊗ output."""
    out = np.zeros((ref * phi.d_in,) * 2, dtype=complex)
    eye = np.eye(ref)
    for k in phi.kraus:
        kk = np.kron(eye, k)
        out += dagger(kk) @ y @ kk
    return out


def diamond_lower(phi0: Channel, phi1: Channel, restarts: int = 32, seed: int = 0,
                  max_iter: int = 500, tol: float = 1e-12) -> DiamondEstimate:
    """Certified lower bound on ``‖phi0 - phi1‖_⋄``.

    Alternates between the Helstrom sign operator of the current output
    difference and the top eigenvector of its pull-back, starting from
    Haar-random inputs on reference ⊗ input with reference dimension equal
    to the input dimension.  Every step is monotone.
    """
    _check_pair(phi0, phi1)
    d = phi0.d_in
    ss = np.random.SeedSequence(seed)
    best_val, best_state, all_conv = -1.0, None, True
    for child in ss.spawn(restarts):
        rng = np.random.default_rng(child)
        state = random_state(d * d, rng)
        val, conv = -1.0, False
        for _ in range(max_iter):
            delta = stabilized_output(phi0, state) - stabilized_output(phi1, state)
            new_val = trace_norm(delta)
            if new_val - val < tol:
                val, conv = max(val, new_val), True
                break
            val = new_val
            pp, pn = trace_norm_hermitian_split(delta)
            sign = pp - pn
            a = _stabilized_adjoint(phi0, sign, d) - _stabilized_adjoint(phi1, sign, d)
            _, vecs = herm_eig(a)
            state = vecs[:, 0]
        all_conv &= conv
        if val > best_val:
            best_val, best_state = val, state
    best_val = min(best_val, 2.0)
    return DiamondEstimate(float(best_val), best_state, restarts, all_conv)


def induced_trace_norm(phi0: Channel, phi1: Channel, restarts: int = 32, seed: int = 0,
                       max_iter: int = 500, tol: float = 1e-12) -> float:
    """Multistart estimate of ``sup ‖(phi0 - phi1)(X)‖ / ‖X‖`` without a reference.

    The trace-norm unit ball is the convex hull of the rank-one ``|a><b|``,
    so the search runs over pairs of unit vectors.
    """
    _check_pair(phi0, phi1)
    d = phi0.d_in
    ss = np.random.SeedSequence(seed)
    best = 0.0
    for child in ss.spawn(restarts):
        rng = np.random.default_rng(child)
        a, b = random_state(d, rng), random_state(d, rng)
        val = -1.0
        for _ in range(max_iter):
            x = np.outer(a, b.conj())
            out = phi0(x) - phi1(x)
            new_val = trace_norm(out)
            if new_val - val < tol:
                val = max(val, new_val)
                break
            val = new_val
            u, _, vh = np.linalg.svd(out)
            w = dagger(vh) @ dagger(u)          # maximises Re tr(W out)
            m = phi0.adjoint(dagger(w)).conj().T - phi1.adjoint(dagger(w)).conj().T
            # Re tr(W Phi(|a><b|)) = Re <b| m |a> with m = Phi†(W†)†
            lu, _, lvh = np.linalg.svd(m)
            b, a = lu[:, 0], lvh[0].conj()
        best = max(best, val)
    return float(best)


def diamond_dim_bound(phi0: Channel, phi1: Channel, restarts: int = 32, seed: int = 0,
                      lower: float | None = None) -> float:
    """Dimension-factor upper estimate ``d_in × ‖phi0 - phi1‖_1``.

    The induced norm is itself a multistart estimate.  The result is checked
    against ``diamond_lower`` (recomputed unless ``lower`` is given).
    """
    bound = phi0.d_in * induced_trace_norm(phi0, phi1, restarts, seed)
    if lower is None:
        lower = diamond_lower(phi0, phi1, restarts, seed).lower_bound
    if lower > bound + 1e-6:
        raise AssertionError(f"diamond lower bound {lower} exceeds dimension bound {bound}")
    return bound


def advantage(measurement: Channel, advice, rho0, rho1) -> float:
    """Distinguishing advantage ``|Pr[D(rho0 ⊗ s) = 1] - Pr[D(rho1 ⊗ s) = 1]|``.

    ``measurement`` is a channel from state ⊗ advice onto one bit; ``advice``
    may be None for no advice.
    """
    rho0 = check_density(rho0)
    rho1 = check_density(rho1)
    if rho0.shape != rho1.shape:
        raise LinalgError("states have different dimensions")
    s = np.ones((1, 1), dtype=complex) if advice is None else check_density(advice)
    if measurement.d_in != rho0.shape[0] * s.shape[0]:
        raise LinalgError("measurement input does not match state ⊗ advice")
    p0 = measurement.accept_probability(np.kron(rho0, s))
    p1 = measurement.accept_probability(np.kron(rho1, s))
    return abs(p0 - p1)


def helstrom_measurement(rho0, rho1) -> Channel:
    """Projector onto the non-negative eigenspace of ``rho0 - rho1``, as a measurement."""
    pp, _ = trace_norm_hermitian_split(np.asarray(rho0) - np.asarray(rho1))
    return Channel.measurement(pp)
