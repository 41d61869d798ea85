"""Dense complex linear algebra over tensor-product spaces.

Operators are plain ``numpy`` arrays (``complex128``).  Pure states are 1-d
arrays; density matrices are square 2-d arrays.  Subsystem shapes are tuples
of factor dimensions, with the left-most factor the most significant index,
which is the ``np.kron`` convention.
"""
from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

# Tolerances used throughout the package.
ATOL = 1e-9        # algebraic checks (hermiticity, trace, PSD clamping)
EIG_TOL = 1e-10    # eigen-residual and unitarity checks
RANK_TOL = 1e-12   # eigenvalues above this count towards the rank


class LinalgError(ValueError):
    """Raised when an operator violates the precondition of an operation."""


def as_operator(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise LinalgError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinalgError("operator has non-finite entries")
    return a


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def proj(psi) -> np.ndarray:
    """Return the rank-one operator ``|psi><psi|``."""
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def tensor(*ops) -> np.ndarray:
    """Kronecker product of operators or vectors, left factor most significant."""
    if not ops:
        raise LinalgError("tensor needs at least one factor")
    return reduce(np.kron, [np.asarray(o, dtype=complex) for o in ops])


def is_hermitian(h, tol: float = ATOL) -> bool:
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and np.allclose(h, dagger(h), atol=tol, rtol=0)


def is_unitary(u, tol: float = EIG_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.allclose(dagger(u) @ u, np.eye(u.shape[0]), atol=tol, rtol=0)


def check_density(rho, tol: float = ATOL) -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Raises LinalgError when rho is not Hermitian, has an eigenvalue below
    ``-tol`` or a trace further than ``tol`` from one.
    """
    rho = as_operator(rho)
    if rho.shape[0] != rho.shape[1]:
        raise LinalgError(f"density matrix must be square, got {rho.shape}")
    if not is_hermitian(rho, tol):
        raise LinalgError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise LinalgError(f"density matrix has trace {np.trace(rho).real:.3g}")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise LinalgError("density matrix has a negative eigenvalue")
    return rho


def check_state(psi, tol: float = ATOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    if abs(np.vdot(psi, psi).real - 1) > tol:
        raise LinalgError("pure state is not normalised")
    return psi


def _check_shape(dim: int, shape: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(int(s) for s in shape)
    if any(s < 1 for s in shape):
        raise LinalgError(f"subsystem dimensions must be positive: {shape}")
    if int(np.prod(shape)) != dim:
        raise LinalgError(f"shape {shape} does not match dimension {dim}")
    return shape


def partial_trace(rho, shape: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor of ``shape`` not listed in ``keep``.

    The kept factors stay in their original order.
    """
    rho = as_operator(rho)
    if rho.shape[0] != rho.shape[1]:
        raise LinalgError("partial trace needs a square operator")
    shape = _check_shape(rho.shape[0], shape)
    keep = sorted(set(int(k) for k in keep))
    n = len(shape)
    if any(k < 0 or k >= n for k in keep):
        raise LinalgError(f"keep indices {keep} out of range for {n} factors")
    t = rho.reshape(shape + shape)
    # trace from the last factor so the remaining axis numbers stay valid
    alive = n
    for i in reversed(range(n)):
        if i not in keep:
            t = np.trace(t, axis1=i, axis2=i + alive)
            alive -= 1
    d = int(np.prod([shape[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def permute_systems(op, shape: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of an operator or a state vector.

    Factor ``perm[i]`` of the input becomes factor ``i`` of the output.
    """
    op = np.asarray(op, dtype=complex)
    shape = tuple(shape)
    perm = list(perm)
    if sorted(perm) != list(range(len(shape))):
        raise LinalgError(f"{perm} is not a permutation of {len(shape)} factors")
    n = len(shape)
    new_dims = [shape[p] for p in perm]
    if op.ndim == 1:
        _check_shape(op.shape[0], shape)
        return op.reshape(shape).transpose(perm).reshape(-1)
    _check_shape(op.shape[0], shape)
    t = op.reshape(shape + shape).transpose(perm + [p + n for p in perm])
    d = int(np.prod(new_dims))
    return t.reshape(d, d)


def herm_eig(h, tol: float = ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian operator.

    Returns eigenvalues in descending order and the matching orthonormal
    eigenvectors as columns.
    """
    h = as_operator(h)
    if not is_hermitian(h, tol * max(1.0, np.abs(h).max(initial=0.0))):
        raise LinalgError("herm_eig needs a Hermitian operator")
    h = (h + dagger(h)) / 2
    w, v = np.linalg.eigh(h)
    return w[::-1].copy(), v[:, ::-1].copy()


def psd_sqrt(a, tol: float = ATOL) -> np.ndarray:
    """Positive square root of a PSD operator.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero; anything more negative
    raises LinalgError.
    """
    w, v = herm_eig(a, tol)
    if w.size and w.min() < -tol:
        raise LinalgError(f"operator has eigenvalue {w.min():.3g} < -{tol}")
    w = np.clip(w, 0, None)
    return (v * np.sqrt(w)) @ dagger(v)


def trace_norm_hermitian_split(h) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the non-negative and negative eigenspaces of ``h``.

    Eigenvalues within RANK_TOL of zero go to the non-negative side.
    """
    w, v = herm_eig(h)
    pos = w >= -RANK_TOL
    vp, vn = v[:, pos], v[:, ~pos]
    return vp @ dagger(vp), vn @ dagger(vn)


def purify(rho, ref_dim: int | None = None) -> np.ndarray:
    """Purification of ``rho`` on system ⊗ reference.

    The reference has dimension ``rank(rho)`` unless a larger ``ref_dim`` is
    requested; the extra reference levels are simply unused.
    """
    rho = check_density(rho)
    w, v = herm_eig(rho)
    rank = int(np.sum(w > RANK_TOL))
    r = rank if ref_dim is None else int(ref_dim)
    if r < rank:
        raise LinalgError(f"reference dimension {r} below rank {rank}")
    d = rho.shape[0]
    m = np.zeros((d, r), dtype=complex)
    m[:, :rank] = v[:, :rank] * np.sqrt(w[:rank])
    return m.reshape(-1)


def reduced_state(psi, shape: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix of a pure state."""
    psi = np.asarray(psi, dtype=complex).ravel()
    return partial_trace(proj(psi), shape, keep)


def _sys_ref_matrix(psi, d: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size % d:
        raise LinalgError(f"state of size {psi.size} is not on a {d}-dim system ⊗ reference")
    return psi.reshape(d, psi.size // d)


def uhlmann_overlap(rho, sigma, psi_rho) -> np.ndarray:
    """Purification of ``sigma`` with maximal overlap against ``psi_rho``.

    ``psi_rho`` must purify ``rho`` on system ⊗ reference (system first).  The
    returned state lives on the same space and its overlap with ``psi_rho`` is
    real, non-negative and equal to the fidelity of ``rho`` and ``sigma``.
    """
    rho = check_density(rho)
    sigma = check_density(sigma)
    d = rho.shape[0]
    if sigma.shape != rho.shape:
        raise LinalgError("rho and sigma have different dimensions")
    x = _sys_ref_matrix(psi_rho, d)
    if not np.allclose(x @ dagger(x), rho, atol=1e-8, rtol=0):
        raise LinalgError("psi_rho does not purify rho")
    w, v = herm_eig(sigma)
    s = int(np.sum(w > RANK_TOL))
    r = x.shape[1]
    if r < s:
        raise LinalgError(f"reference dimension {r} is below rank(sigma) = {s}")
    half = v[:, :s] * np.sqrt(w[:s])          # d x s, half @ half† = sigma
    u, _, vh = np.linalg.svd(dagger(half) @ x, full_matrices=False)
    y = half @ (u @ vh)                        # d x r
    return y.reshape(-1)


def polar_step(n) -> np.ndarray:
    """Isometry ``V`` maximising ``Re tr(conj(V) @ n)``.

    This is the update used by every linearised ascent over unitaries and
    isometries in the package: for an objective that is convex in ``V`` the
    step never decreases it.
    """
    u, _, vh = np.linalg.svd(np.asarray(n, dtype=complex), full_matrices=False)
    return (u @ vh).T


def random_unitary(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random unitary (or a stack of them) via QR of a Ginibre matrix."""
    shape = (d, d) if size is None else (size, d, d)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[..., None, :]


def random_state(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix (Hilbert-Schmidt measure for full rank)."""
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def operator_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": [float(x) for x in a.real.ravel()],
        "im": [float(x) for x in a.imag.ravel()],
    }


def operator_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise LinalgError("entry count does not match rows x cols")
    return as_operator((re + 1j * im).reshape(rows, cols))
