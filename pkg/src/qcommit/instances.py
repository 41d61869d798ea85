"""Promise-problem instances (QSD, QCD, Π) and seeded generators for them.

Every instance tagged ``"Y"`` or ``"N"`` re-verifies its tag when it is
built; ``kind=None`` marks a hand-made instance that carries no promise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import adversary
from .channels import CNOT, H, X, Z, Channel, Circuit, output_state, ry, to_channel
from .linalg import (
    ATOL,
    LinalgError,
    check_density,
    dagger,
    partial_trace,
    permute_systems,
    proj,
    random_state,
    random_unitary,
)
from .norms import diamond_dim_bound, diamond_lower, trace_norm

DEFAULT_MU = 1e-6
KINDS = ("Y", "N", None)


class InstanceError(ValueError):
    """An instance failed the verification of its promise tag."""


def _check_kind(kind):
    if kind not in KINDS:
        raise ValueError(f"kind must be 'Y', 'N' or None, got {kind!r}")


# ---------------------------------------------------------------------------
# QSD
# ---------------------------------------------------------------------------

@dataclass
class QSDInstance:
    c0: Circuit
    c1: Circuit
    mu: float = DEFAULT_MU
    kind: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_kind(self.kind)
        for c in (self.c0, self.c1):
            if c.discards or c.inputs:
                raise LinalgError("QSD circuits must be unitary and start from |0...0>")
        if len(self.c0.split[0]) != len(self.c1.split[0]) or self.c0.wires != self.c1.wires:
            raise LinalgError("QSD circuits must share the (output, garbage) layout")
        dist = self.distance()
        self.meta["trace_distance"] = dist
        if self.kind == "Y" and dist < 2 - self.mu:
            raise InstanceError(f"Y instance has trace norm {dist} < 2 - mu")
        if self.kind == "N" and dist > self.mu:
            raise InstanceError(f"N instance has trace norm {dist} > mu")

    @property
    def dims(self) -> tuple[int, int]:
        """(dim O, dim G)."""
        n_o = len(self.c0.split[0])
        return 2 ** n_o, 2 ** (self.c0.wires - n_o)

    def full_state(self, b: int) -> np.ndarray:
        """``|phi_{C_b}>`` ordered as O ⊗ G."""
        return output_state(self.c1 if b else self.c0)

    def output(self, b: int) -> np.ndarray:
        """``rho^{C_b}``, the O part of the output."""
        return partial_trace(proj(self.full_state(b)), self.dims, [0])

    def distance(self) -> float:
        return trace_norm(self.output(0) - self.output(1))

    def to_json(self) -> dict:
        return {"type": "QSD", "kind": self.kind, "mu": self.mu,
                "c0": self.c0.to_json(), "c1": self.c1.to_json()}


def gen_qsd(kind: str, qubits: int, entangle_garbage: bool = False, seed: int = 0,
            garbage_qubits: int = 1, mu: float = DEFAULT_MU) -> QSDInstance:
    """Seeded QSD instance with ``qubits`` output qubits.

    Y: ``C_b`` writes ``b`` into output qubit 0 and then applies the same
    random scrambling, so the outputs have orthogonal supports.  With
    ``entangle_garbage`` the garbage qubits are entangled with the other
    output qubits first (needs at least two output qubits).
    N: both circuits share their output part and differ only by a random
    unitary on the garbage.
    """
    if kind not in ("Y", "N"):
        raise ValueError("gen_qsd needs kind 'Y' or 'N'")
    if not 1 <= qubits <= 5:
        raise ValueError("qubits must be between 1 and 5")
    if entangle_garbage and qubits < 2:
        raise ValueError("entangled garbage needs at least two output qubits")
    n_g = garbage_qubits if entangle_garbage or kind == "N" else 0
    wires = qubits + n_g
    out_w, g_w = list(range(qubits)), list(range(qubits, wires))
    rng = np.random.default_rng(seed)
    scramble_o = [random_unitary(4, rng) for _ in range(max(0, qubits - 1))] if qubits > 1 else []
    garbage_u = [random_unitary(2, rng) for _ in g_w]

    def build(b: int) -> Circuit:
        c = Circuit(wires, ancillas=wires, split=(out_w, g_w))
        if kind == "Y" and b:
            c.add(X, 0)
        for j, g in enumerate(g_w):
            if entangle_garbage:
                c.add(H, g)
                c.add(CNOT, g, 1 + j % (qubits - 1))
        for i, u in enumerate(scramble_o):
            c.add(u, i, i + 1)
        if kind == "N" and b:
            for g, u in zip(g_w, garbage_u):
                c.add(u, g)
        return c

    inst = QSDInstance(build(0), build(1), mu, kind)
    inst.meta.update(seed=seed, qubits=qubits, entangle_garbage=entangle_garbage)
    return inst


def qsd_pure_pair(theta: float) -> QSDInstance:
    """Untagged one-qubit instance with outputs |0> and cos θ|0> + sin θ|1>."""
    c0 = Circuit(1, ancillas=1, split=([0], []))
    c1 = Circuit(1, [(ry(2 * theta), (0,))], ancillas=1, split=([0], []))
    return QSDInstance(c0, c1, mu=DEFAULT_MU, kind=None)


# ---------------------------------------------------------------------------
# QCD
# ---------------------------------------------------------------------------

@dataclass
class QCDInstance:
    q0: Channel
    q1: Channel
    mu: float = DEFAULT_MU
    kind: str | None = None
    restarts: int = 32
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_kind(self.kind)
        if (self.q0.d_in, self.q0.d_out) != (self.q1.d_in, self.q1.d_out):
            raise LinalgError("QCD channels must have equal dimensions")
        if self.kind == "Y":
            est = diamond_lower(self.q0, self.q1, self.restarts, self.seed)
            self.meta["diamond_lower"] = est.lower_bound
            if est.lower_bound < 2 - self.mu:
                raise InstanceError(f"Y instance: diamond lower bound {est.lower_bound} < 2 - mu")
        elif self.kind == "N":
            bound = diamond_dim_bound(self.q0, self.q1, self.restarts, self.seed)
            self.meta["diamond_dim_bound"] = bound
            if bound > self.mu:
                raise InstanceError(f"N instance: dimension bound {bound} > mu")

    @property
    def d_in(self) -> int:
        return self.q0.d_in

    @property
    def d_out(self) -> int:
        return self.q0.d_out

    def dilations(self):
        """Stinespring unitaries of both channels with a common garbage space.

        Returns ``(u0, u1, d_anc, d_garbage)``; each ``u_b`` maps
        input ⊗ ancilla to output ⊗ garbage.
        """
        g = max(len(self.q0.kraus), len(self.q1.kraus))
        u0, a0, g0 = self.q0.stinespring(g)
        u1, a1, g1 = self.q1.stinespring(g)
        if (a0, g0) != (a1, g1):
            raise LinalgError("dilations disagree on ancilla/garbage dimensions")
        return u0, u1, a0, g0

    def to_json(self) -> dict:
        return {"type": "QCD", "kind": self.kind, "mu": self.mu,
                "q0": self.q0.to_json(), "q1": self.q1.to_json()}


def gen_qcd(kind: str, qubits: int, seed: int = 0, discards: bool = False,
            mu: float = DEFAULT_MU) -> QCDInstance:
    """Seeded QCD instance on ``qubits`` qubits.

    Y: ``W · Z^b_0 · V`` with random V, W, optionally followed by an
    X-basis dephasing of qubit 0 through a discarded ancilla.  One qubit
    without discards gives exactly identity vs conjugation by Z.
    N: two copies of the same random channel.
    """
    if kind not in ("Y", "N"):
        raise ValueError("gen_qcd needs kind 'Y' or 'N'")
    if not 1 <= qubits <= 3:
        raise ValueError("qubits must be between 1 and 3")
    rng = np.random.default_rng(seed)
    wires = qubits + (1 if discards else 0)
    anc = wires - 1 if discards else None
    plain = qubits == 1 and not discards
    v = None if plain else _random_layer(qubits, rng)
    w = None if plain else _random_layer(qubits, rng)

    def build(b: int) -> Circuit:
        c = Circuit(wires, ancillas=1 if discards else 0,
                    discards=(anc,) if discards else ())
        for g, t in v or []:
            c.add(g, *t)
        if kind == "Y" and b:
            c.add(Z, 0)
        if discards:
            c.add(H, 0)
            c.add(CNOT, 0, anc)
            c.add(H, 0)
        for g, t in w or []:
            c.add(g, *t)
        return c

    c0, c1 = build(0), build(1) if kind == "Y" else build(0)
    inst = QCDInstance(to_channel(c0), to_channel(c1), mu, kind)
    inst.meta.update(seed=seed, qubits=qubits, discards=discards,
                     circuits=(c0.to_json(), c1.to_json()))
    return inst


def _random_layer(qubits: int, rng):
    if qubits == 1:
        return [(random_unitary(2, rng), (0,))]
    return [(random_unitary(4, rng), (i, i + 1)) for i in range(qubits - 1)]


def ideal_qcd(mu: float = DEFAULT_MU) -> QCDInstance:
    """Identity vs conjugation by Z on one qubit (diamond distance exactly 2)."""
    return QCDInstance(Channel.identity(2), Channel.unitary(Z), mu, "Y")


# ---------------------------------------------------------------------------
# Π
# ---------------------------------------------------------------------------

@dataclass
class PiInstance:
    q0: Channel
    q1: Channel
    dims: tuple
    rho0: np.ndarray | None = None
    rho1: np.ndarray | None = None
    mu: float = DEFAULT_MU
    kind: str | None = None
    restarts: int = 64
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_kind(self.kind)
        dx, dy = self.dims = tuple(int(d) for d in self.dims)
        for q in (self.q0, self.q1):
            if q.d_in != dx * dy or q.d_out != 2:
                raise LinalgError("Π channels must map X ⊗ Y to one bit")
        if self.kind == "Y":
            if self.rho0 is None or self.rho1 is None:
                raise InstanceError("Y instances need witness states")
            r0, r1 = check_density(self.rho0), check_density(self.rho1)
            gap = np.abs(partial_trace(r0, self.dims, [1]) - partial_trace(r1, self.dims, [1])).max()
            avg = 0.5 * (self.q0.accept_probability(r0) + self.q1.accept_probability(r1))
            self.meta.update(marginal_gap=float(gap), honest_average=avg)
            if gap > 1e-10 or avg < 1 - ATOL:
                raise InstanceError(f"Y instance fails: marginal gap {gap}, average {avg}")
        elif self.kind == "N":
            res = self.search(self.restarts, self.seed)
            self.meta.update(searched_value=res.value, certifier="shared-marginal search",
                             certifier_restarts=self.restarts, exhaustive=False)
            if res.value > 0.5 + self.mu:
                raise InstanceError(f"N instance: searched value {res.value} > 1/2 + mu")

    def effects_yx(self):
        """Acceptance effects reordered to Y ⊗ X."""
        return tuple(permute_systems(q.effect(), self.dims, [1, 0]) for q in (self.q0, self.q1))

    def search(self, restarts: int = 64, seed: int = 0, ref_dim: int | None = None):
        """Shared-marginal search with A = Y (sent at commit) and B = X."""
        dx, dy = self.dims
        e0, e1 = self.effects_yx()
        return adversary.shared_marginal_search(e0, e1, dy, dx, ref_dim, restarts, seed)

    def to_json(self) -> dict:
        return {"type": "PI", "kind": self.kind, "mu": self.mu, "dims": list(self.dims),
                "q0": self.q0.to_json(), "q1": self.q1.to_json()}


def _random_projector(d: int, rank: int, rng) -> np.ndarray:
    u = random_unitary(d, rng)[:, :rank]
    return u @ dagger(u)


def gen_pi(kind: str, dims=(2, 2), seed: int = 0, mu: float = DEFAULT_MU,
           restarts: int = 64) -> PiInstance:
    """Seeded Π instance on X ⊗ Y.

    Y: a random pure ``rho0`` and ``rho1 = (W ⊗ I) rho0 (W ⊗ I)†``; each
    ``q_b`` measures the support of ``rho_b``.
    N: ``q0`` accepts on ``G ⊗ F`` and ``q1`` on ``I ⊗ (I - F)`` for random
    projectors G on X and F on Y.  Equal Y marginals cap the average at ½.
    """
    if kind not in ("Y", "N"):
        raise ValueError("gen_pi needs kind 'Y' or 'N'")
    dx, dy = (int(d) for d in dims)
    if not (1 <= dx <= 4 and 1 <= dy <= 4):
        raise ValueError("dX and dY must be between 1 and 4")
    rng = np.random.default_rng(seed)
    if kind == "Y":
        psi = random_state(dx * dy, rng)
        w = np.kron(random_unitary(dx, rng), np.eye(dy))
        r0, r1 = proj(psi), proj(w @ psi)
        inst = PiInstance(Channel.measurement(r0), Channel.measurement(r1), (dx, dy),
                          r0, r1, mu, "Y")
    else:
        g = _random_projector(dx, max(1, dx // 2), rng)
        f = _random_projector(dy, max(1, dy // 2), rng)
        inst = PiInstance(Channel.measurement(np.kron(g, f)),
                          Channel.measurement(np.kron(np.eye(dx), np.eye(dy) - f)),
                          (dx, dy), mu=mu, kind="N", restarts=restarts, seed=seed)
    inst.meta["seed"] = seed
    return inst


def pi_bell_instance() -> PiInstance:
    """Both witnesses |φ+><φ+| on two qubits, both channels project onto it."""
    phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    r = proj(phi)
    return PiInstance(Channel.measurement(r), Channel.measurement(r), (2, 2), r, r, kind="Y")


def pi_trade_off_instance(restarts: int = 64, seed: int = 0) -> PiInstance:
    """q0 accepts |00>, q1 accepts when Y reads |1>: the shared Y marginal forces a trade-off."""
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    return PiInstance(Channel.measurement(np.kron(p0, p0)),
                      Channel.measurement(np.kron(np.eye(2), p1)),
                      (2, 2), kind="N", restarts=restarts, seed=seed)
