"""Commitment schemes built on QSD, QCD and Π instances.

Honest runs are exact (no sampling enters the acceptance probability).
Cheating senders are either constructed from the known optimum (QSD) or
found by the shared-marginal search of :mod:`qcommit.adversary`, whose
parameterisation makes the commit-phase marginal identical for both bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adversary import SearchResult, shared_marginal_search
from .channels import Channel, permute_systems_rows
from .instances import PiInstance, QCDInstance, QSDInstance
from .linalg import (
    ATOL,
    LinalgError,
    check_density,
    dagger,
    ket,
    operator_to_json,
    partial_trace,
    permute_systems,
    proj,
    trace_norm_hermitian_split,
    uhlmann_overlap,
)
from .norms import diamond_lower, fidelity, fidelity_sum_opt, swap_test_accept, trace_norm

SCHEMES = ("QSD", "QCD_SWAP", "PI")


@dataclass
class CommitTranscript:
    scheme: str
    committed_bit: int
    commit_state: np.ndarray
    reveal_state: np.ndarray
    accepted: bool
    accept_probability: float

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme}")
        if not -ATOL <= self.accept_probability <= 1 + ATOL:
            raise ValueError("acceptance probability outside [0, 1]")

    def to_json(self) -> dict:
        return {"scheme": self.scheme, "committed_bit": self.committed_bit,
                "accepted": self.accepted, "accept_probability": self.accept_probability,
                "commit_state": operator_to_json(self.commit_state),
                "reveal_state": operator_to_json(self.reveal_state)}


@dataclass
class CheatReport:
    p_reveal_0: float
    p_reveal_1: float
    average: float
    analytic_bound: float
    strategy_note: str
    bound_applies: bool = True
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if abs(self.average - 0.5 * (self.p_reveal_0 + self.p_reveal_1)) > 1e-12:
            raise ValueError("average must be the mean of the two reveal probabilities")

    @property
    def within_bound(self) -> bool:
        return (not self.bound_applies) or self.average <= self.analytic_bound + 1e-6

    def check(self) -> "CheatReport":
        if not self.within_bound:
            raise AssertionError(
                f"cheat average {self.average} exceeds bound {self.analytic_bound}")
        return self

    def to_json(self) -> dict:
        out = {"p_reveal_0": self.p_reveal_0, "p_reveal_1": self.p_reveal_1,
               "average": self.average, "analytic_bound": self.analytic_bound,
               "bound_applies": self.bound_applies, "strategy_note": self.strategy_note}
        out.update(self.extra)
        return out


def _sample(p: float, seed: int) -> bool:
    return bool(np.random.default_rng(seed).random() < p)


# ---------------------------------------------------------------------------
# QSD scheme
# ---------------------------------------------------------------------------

def qsd_commit(inst: QSDInstance, b: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(|phi_{C_b}>, tr_G |phi_{C_b}><phi_{C_b}|)``."""
    psi = inst.full_state(b)
    return psi, partial_trace(proj(psi), inst.dims, [0])


def qsd_verify(inst: QSDInstance, b: int, full_state) -> float:
    """Run ``C_b†`` on the received O ⊗ G state and accept on |0...0>."""
    xi = check_density(full_state)
    do, dg = inst.dims
    if xi.shape[0] != do * dg:
        raise LinalgError(f"expected a state on O ⊗ G of dimension {do * dg}")
    c = inst.c1 if b else inst.c0
    order = list(c.split[0]) + list(c.split[1])
    # C_b as a matrix from wire order to O ⊗ G order
    u = permute_systems_rows(c.unitary(), c.wires, order)
    back = dagger(u) @ xi @ u
    return float(np.real(back[0, 0]))


def qsd_round(inst: QSDInstance, b: int, seed: int = 0) -> CommitTranscript:
    psi, msg = qsd_commit(inst, b)
    p = qsd_verify(inst, b, proj(psi))
    reveal = partial_trace(proj(psi), inst.dims, [1])
    return CommitTranscript("QSD", b, msg, reveal, _sample(p, seed), p)


def qsd_hiding_distance(inst: QSDInstance) -> float:
    """Trace norm between the two commit messages (statistical hiding on N instances)."""
    return trace_norm(qsd_commit(inst, 0)[1] - qsd_commit(inst, 1)[1])


def qsd_bound(inst: QSDInstance) -> float:
    if inst.kind == "Y":
        return 0.5 + np.sqrt(inst.mu) / 2
    t = inst.distance()
    return 0.5 * (1 + np.sqrt(max(0.0, 1 - t * t / 4)))


def qsd_optimal_cheat(inst: QSDInstance, restarts: int = 8, seed: int = 0) -> CheatReport:
    """Optimal binding attack: commit to the sum-fidelity optimiser ``gamma``.

    The sender holds a purification of ``gamma`` on O ⊗ (G ⊗ R') and, to
    reveal b, rotates G ⊗ R' onto the purification with maximal overlap with
    ``|phi_{C_b}> ⊗ |0>``.  Both revealed states share the O marginal gamma.
    """
    rho0, rho1 = inst.output(0), inst.output(1)
    opt = fidelity_sum_opt(rho0, rho1, restarts=restarts, seed=seed)
    gamma = opt.optimizer_state
    do, dg = inst.dims
    probs, reveals = [], []
    for b, rho in ((0, rho0), (1, rho1)):
        base = np.kron(inst.full_state(b), ket(0, do))      # O ⊗ (G ⊗ R')
        y = uhlmann_overlap(rho, gamma, base)
        xi = partial_trace(proj(y), (do, dg, do), [0, 1])
        reveals.append(xi)
        probs.append(qsd_verify(inst, b, xi))
    f = fidelity(rho0, rho1)
    rep = CheatReport(probs[0], probs[1], 0.5 * (probs[0] + probs[1]), qsd_bound(inst),
                      "commit to the sum-fidelity optimiser, reveal via Uhlmann rotations",
                      extra={"fidelity": f, "optimum": 0.5 * (1 + f),
                             "optimizer_converged": opt.converged})
    return rep


def qsd_searched_cheat(inst: QSDInstance, restarts: int = 16, seed: int = 0) -> CheatReport:
    """Shared-marginal search against the QSD verifier (a lower bound on the optimum)."""
    do, dg = inst.dims
    m0, m1 = proj(inst.full_state(0)), proj(inst.full_state(1))
    res = shared_marginal_search(m0, m1, do, dg, restarts=restarts, seed=seed)
    return CheatReport(res.p0, res.p1, res.value, qsd_bound(inst), "shared-marginal search",
                       extra={"converged": res.converged})


# ---------------------------------------------------------------------------
# QCD swap-test scheme
# ---------------------------------------------------------------------------

def qcd_advice(inst: QCDInstance, restarts: int = 32, seed: int = 0) -> np.ndarray:
    """Maximiser ``|phi*>`` on reference ⊗ input of the diamond-norm ascent."""
    if inst.kind not in ("Y", None):
        raise ValueError("advice is only defined for Y instances")
    est = diamond_lower(inst.q0, inst.q1, restarts, seed)
    if inst.kind == "Y" and est.lower_bound < 2 - inst.mu - 1e-4:
        raise ValueError(f"advice reaches only {est.lower_bound}")
    return est.maximizer


def honest_states(inst: QCDInstance, advice) -> tuple[np.ndarray, np.ndarray, tuple]:
    """``(I_F ⊗ U_b)(|phi*> ⊗ |0>)`` on F ⊗ O ⊗ G for both bits, plus (dF, dO, dG)."""
    u0, u1, d_anc, d_g = inst.dilations()
    advice = np.asarray(advice, dtype=complex).ravel()
    d_f = advice.size // inst.d_in
    if d_f * inst.d_in != advice.size:
        raise LinalgError("advice does not live on reference ⊗ input")
    x = np.kron(advice, ket(0, d_anc)).reshape(d_f, inst.d_in * d_anc)
    states = tuple((x @ u.T).reshape(-1) for u in (u0, u1))
    return states[0], states[1], (d_f, inst.d_out, d_g)


def qcd_round(inst: QCDInstance, b: int, advice, open_as: int | None = None,
              seed: int = 0) -> CommitTranscript:
    """Honest commit to ``b``; the verifier checks the opening ``open_as`` (default b)."""
    c = b if open_as is None else open_as
    u0, u1, d_anc, d_g = inst.dilations()
    psi0, psi1, (d_f, d_o, _) = honest_states(inst, advice)
    psi = psi1 if b else psi0
    rho = proj(psi)
    shape = (d_f, d_o, d_g)
    commit = partial_trace(rho, shape, [0, 1])
    reveal = partial_trace(rho, shape, [2])
    u = u1 if c else u0
    back = np.kron(np.eye(d_f), dagger(u))
    tau = back @ rho @ dagger(back)
    ref = np.kron(np.asarray(advice, dtype=complex).ravel(), ket(0, d_anc))
    p = swap_test_accept((tau + dagger(tau)) / 2, proj(ref))
    return CommitTranscript("QCD_SWAP", b, commit, reveal, _sample(p, seed), p)


def test_pass_prob(rho, phi, k: int) -> float:
    """Probability that k swap tests between the blocks of ``rho`` and fresh ``phi`` all accept.

    Equals ``tr[(rho ⊗ phi^{⊗k}) Π]`` with Π the product of the symmetric
    projectors; tracing out the copies of phi leaves
    ``tr[rho ⊗_i (I + |phi><phi|)/2]``, evaluated block by block.
    """
    phi = np.asarray(phi, dtype=complex).ravel()
    n = phi.size
    rho = np.asarray(rho, dtype=complex)
    if k < 1 or rho.shape != (n ** k, n ** k):
        raise LinalgError(f"rho must act on {k} blocks of dimension {n}")
    m = 0.5 * (np.eye(n) + proj(phi))
    t = rho.reshape((n,) * k + (n ** k,))
    for i in range(k):
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [i])), 0, i)
    return float(np.real(np.trace(t.reshape(n ** k, n ** k))))


def block_operators(inst: QCDInstance, advice, k: int):
    """Per-bit all-accept operators on A1..Ak ⊗ B1..Bk, with (a, b) block dims.

    A_i = F ⊗ O is sent at commit time and B_i = G at reveal time.
    """
    psi0, psi1, (d_f, d_o, d_g) = honest_states(inst, advice)
    a, b = d_f * d_o, d_g
    ops = []
    for psi in (psi0, psi1):
        m = 0.5 * (np.eye(a * b) + proj(psi))
        full = m
        for _ in range(k - 1):
            full = np.kron(full, m)
        perm = [2 * i for i in range(k)] + [2 * i + 1 for i in range(k)]
        ops.append(permute_systems(full, (a, b) * k, perm))
    return ops[0], ops[1], a, b


@dataclass
class RepetitionAdversary:
    """Shared state ``omega`` on A-systems ⊗ B-systems ⊗ R and two attacks on B ⊗ R."""

    shared_state: np.ndarray
    attack_0: Channel
    attack_1: Channel
    dims: tuple                    # (dim A, dim B, dim R)

    @classmethod
    def from_search(cls, res: SearchResult) -> "RepetitionAdversary":
        return cls(res.omega, Channel.unitary(res.v0), Channel.unitary(res.v1), res.dims)

    def induced(self, bit: int) -> np.ndarray:
        """Induced state on A ⊗ B (reference traced out)."""
        a, b, r = self.dims
        ch = self.attack_1 if bit else self.attack_0
        full = ch.apply(proj(self.shared_state), left=a)
        return partial_trace(full, (a, b, r), [0, 1])

    def marginal_gap(self) -> float:
        a, b, _ = self.dims
        m0 = partial_trace(self.induced(0), (a, b), [0])
        m1 = partial_trace(self.induced(1), (a, b), [0])
        return float(np.abs(m0 - m1).max())


def repetition_bound(k: int, mu: float) -> float:
    return 0.5 + 2.0 ** -(k + 1) + 2 * np.sqrt(2 * k * mu)


def repetition_cheat(inst: QCDInstance, k: int, advice, restarts: int = 16, seed: int = 0,
                     ref_dim: int | None = None) -> tuple[CheatReport, RepetitionAdversary]:
    """Searched cheating sender against k parallel swap-test rounds."""
    if not 1 <= k <= 3:
        raise ValueError("k must be 1, 2 or 3")
    m0, m1, a, b = block_operators(inst, advice, k)
    r = b ** k if ref_dim is None else ref_dim
    res = shared_marginal_search(m0, m1, a ** k, b ** k, r, restarts, seed)
    adv = RepetitionAdversary.from_search(res)
    rep = CheatReport(res.p0, res.p1, res.value, repetition_bound(k, inst.mu),
                      f"shared-marginal search, k={k}, reference dimension {r}",
                      bound_applies=inst.kind == "Y",
                      extra={"k": k, "ideal_bound": 0.5 + 2.0 ** -(k + 1),
                             "marginal_gap": adv.marginal_gap(), "converged": res.converged})
    return rep, adv


def qcd_single_round_cheat(inst: QCDInstance, advice, restarts: int = 16,
                           seed: int = 0) -> CheatReport:
    """k = 1 search with the single-round bound ¾ + √mu/4 attached."""
    rep, _ = repetition_cheat(inst, 1, advice, restarts, seed)
    rep.analytic_bound = 0.75 + np.sqrt(inst.mu) / 4
    psi0, psi1, (d_f, d_o, d_g) = honest_states(inst, advice)
    r0 = partial_trace(proj(psi0), (d_f * d_o, d_g), [0])
    r1 = partial_trace(proj(psi1), (d_f * d_o, d_g), [0])
    ideal = trace_norm(r0 - r1) >= 2 - 1e-9
    rep.extra["orthogonal_commitments"] = ideal
    rep.check()
    if ideal and rep.average < 0.75 - 1e-3:
        raise AssertionError(f"search reached only {rep.average} on an orthogonal instance")
    return rep


# ---------------------------------------------------------------------------
# Orthogonalisation
# ---------------------------------------------------------------------------

class OrthogonalizationError(ValueError):
    pass


def orthogonalize(phi0, phi1, split) -> tuple[np.ndarray, np.ndarray, float]:
    """Nearby purifications whose A marginals are exactly orthogonal.

    ``split`` is (dim A, dim B).  Returns ``(phi0', phi1', eps)`` with
    ``eps = 2 - ‖rho0 - rho1‖``; raises OrthogonalizationError when
    ``eps >= 1``.
    """
    da, db = (int(s) for s in split)
    rho0 = partial_trace(proj(phi0), (da, db), [0])
    rho1 = partial_trace(proj(phi1), (da, db), [0])
    eps = 2 - trace_norm(rho0 - rho1)
    if eps >= 1:
        raise OrthogonalizationError(f"states too close: eps = {eps:.3g}")
    pp, pn = trace_norm_hermitian_split(rho0 - rho1)
    out = []
    for rho, p, psi in ((rho0, pp, phi0), (rho1, pn, phi1)):
        cut = p @ rho @ p
        w = float(np.real(np.trace(cut)))
        cut = (cut + dagger(cut)) / (2 * w)
        out.append(uhlmann_overlap(rho, cut, psi))
    return out[0], out[1], float(eps)


# ---------------------------------------------------------------------------
# Π scheme
# ---------------------------------------------------------------------------

def pi_commit(inst: PiInstance, b: int) -> tuple[np.ndarray, np.ndarray]:
    """``(tr_Y rho^b, tr_X rho^b)``: the sender keeps X and sends Y."""
    if inst.rho0 is None:
        raise ValueError("commit needs the witness states of a Y instance")
    rho = inst.rho1 if b else inst.rho0
    return partial_trace(rho, inst.dims, [0]), partial_trace(rho, inst.dims, [1])


def pi_verify(inst: PiInstance, b: int, joint) -> float:
    joint = check_density(joint)
    if joint.shape[0] != inst.dims[0] * inst.dims[1]:
        raise LinalgError("joint state must live on X ⊗ Y")
    return (inst.q1 if b else inst.q0).accept_probability(joint)


def pi_round(inst: PiInstance, b: int, seed: int = 0) -> CommitTranscript:
    keep, msg = pi_commit(inst, b)
    rho = inst.rho1 if b else inst.rho0
    p = pi_verify(inst, b, rho)
    return CommitTranscript("PI", b, msg, keep, _sample(p, seed), p)


def witnessable_eval(q0: Channel, q1: Channel, rho0, sigma, psi: Channel
                     ) -> tuple[float, bool]:
    """Average acceptance of ``rho0`` and ``rho1 = (psi ⊗ I_Y)(sigma)``, plus the constraint check.

    ``sigma`` lives on W ⊗ X ⊗ Y and ``psi`` maps W ⊗ X to X.
    """
    rho0 = check_density(rho0)
    sigma = check_density(sigma)
    dx = psi.d_out
    dw = psi.d_in // dx
    if dw * dx != psi.d_in or sigma.shape[0] % psi.d_in:
        raise LinalgError("psi must map W ⊗ X to X and sigma must live on W ⊗ X ⊗ Y")
    dy = sigma.shape[0] // psi.d_in
    if rho0.shape[0] != dx * dy or q0.d_in != dx * dy or q1.d_in != dx * dy:
        raise LinalgError("dimension mismatch between states and channels")
    rho1 = psi.apply(sigma, right=dy)
    ok = bool(np.abs(partial_trace(sigma, (dw, dx, dy), [1, 2]) - rho0).max() <= 1e-9)
    try:
        check_density(rho1)
    except LinalgError:
        ok = False
    avg = 0.5 * (q0.accept_probability(rho0) + q1.accept_probability(rho1))
    return float(avg), ok


def witness_from_search(inst: PiInstance, res: SearchResult):
    """Turn a search result (A = Y, B = X) into ``(rho0, sigma, psi)`` with W = R."""
    dx, dy = inst.dims
    a, b, r = res.dims
    y0 = res.rho(0)                                    # Y ⊗ X ⊗ R
    s = permute_systems(y0, (dy, dx, r), [2, 1, 0])    # R ⊗ X ⊗ Y
    sigma = proj(s)
    rho0 = partial_trace(sigma, (r, dx, dy), [1, 2])
    v = res.v1 @ dagger(res.v0)                        # on X ⊗ R
    # R ⊗ X -> X ⊗ R
    swap = np.column_stack([permute_systems(e, (r, dx), [1, 0]) for e in np.eye(r * dx)])
    w = (v @ swap).reshape(dx, r, r * dx)
    psi = Channel(tuple(w[:, j, :] for j in range(r)))
    return rho0, sigma, psi


def pi_witness_search(inst: PiInstance, restarts: int = 64, seed: int = 0
                      ) -> tuple[float, bool, SearchResult]:
    """Searched witnessable pair for the instance's channels, evaluated by witnessable_eval."""
    res = inst.search(restarts, seed)
    rho0, sigma, psi = witness_from_search(inst, res)
    avg, ok = witnessable_eval(inst.q0, inst.q1, rho0, sigma, psi)
    return avg, ok, res
