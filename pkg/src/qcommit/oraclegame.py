"""Oracle experiments: Haar and p-uniform sampling, the two oracle kinds,
the verification protocol, and the quantities behind the query lower bound.

Register conventions: the oracle acts on the control qubit A and outputs
A ⊗ H ⊗ K with ``dim H = dim K = d``.  The protocol adds the verifier's
qubit B in front, so its state lives on B ⊗ A ⊗ H ⊗ K.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .channels import Channel
from .linalg import LinalgError, as_operator, dagger, is_unitary, proj, random_unitary
from .norms import trace_norm

ACCEPT_FLOOR = 1e-6
CALIBRATION_SAMPLES = 20000
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


class CalibrationError(RuntimeError):
    """The conditioning event is too rare to sample or misses its target mass."""


@dataclass
class McEstimate:
    mean: float
    std_error: float
    samples: int
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"mean": self.mean, "std_error": self.std_error, "samples": self.samples}
        out.update(self.extra)
        return out


@dataclass(frozen=True)
class OracleInput:
    alpha: complex
    beta: complex

    def __post_init__(self):
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1) > 1e-12:
            raise ValueError("control amplitudes must be normalised")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)


def haar_unitary(d: int, seed: int) -> np.ndarray:
    if not 1 <= d <= 32:
        raise ValueError("d must be between 1 and 32")
    return random_unitary(d, np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# p-uniform family
# ---------------------------------------------------------------------------

def event_probability(d: int, t: float) -> float:
    """Haar mass of ``Re <r|U|r> >= t``.

    ``U|r>`` is uniform on the unit sphere of C^d = R^{2d}, so the square of
    one real coordinate is Beta(1/2, d - 1/2) distributed.
    """
    if t <= -1:
        return 1.0
    if t >= 1:
        return 0.0
    if d == 1:
        # Re e^{iθ} >= t for uniform θ
        return float(np.arccos(t) / np.pi)
    tail = 0.5 * (1 - special.betainc(0.5, d - 0.5, t * t))
    return float(tail if t >= 0 else 1 - tail)


def threshold_for(d: int, p: float) -> float:
    if p >= 1:
        return -1.0
    if d == 1:
        return float(np.cos(np.pi * p))
    if p <= 0.5:
        return float(np.sqrt(special.betaincinv(0.5, d - 0.5, 1 - 2 * p)))
    return -float(np.sqrt(special.betaincinv(0.5, d - 0.5, 2 * p - 1)))


@dataclass
class PUniformSpec:
    """Haar measure conditioned on ``Re <r|U|r> >= threshold``, with ``r = |ref>``.

    The threshold defaults to the value giving event mass ``2^-m``; the mass
    is then confirmed by Monte Carlo.  A hand-set ``threshold`` overrides
    ``m`` and sets ``p`` to the exact event mass.
    """

    d: int
    m: int
    seed: int = 0
    ref: int = 0
    threshold: float | None = None
    p: float = field(init=False)
    calibrated_p: float | None = field(init=False, default=None)
    auto_threshold: bool = field(init=False, default=True)

    def __post_init__(self):
        if not 1 <= self.d <= 32:
            raise ValueError("d must be between 1 and 32")
        if self.m < 0 or not 0 <= self.ref < self.d:
            raise ValueError("m must be non-negative and ref a basis index")
        target = 2.0 ** -self.m
        self.auto_threshold = self.threshold is None
        if self.auto_threshold:
            self.threshold = threshold_for(self.d, target)
        self.p = event_probability(self.d, self.threshold)
        if self.p < ACCEPT_FLOOR:
            raise CalibrationError(f"event mass {self.p:.3g} below the acceptance floor")
        if self.p < 1:
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0xCA1]))
            us = random_unitary(self.d, rng, CALIBRATION_SAMPLES)
            self.calibrated_p = float(np.mean(self.event(us)))
            hits = self.calibrated_p * CALIBRATION_SAMPLES
            expected = self.p * CALIBRATION_SAMPLES
            if abs(hits - expected) > 5 * np.sqrt(expected) + 1:
                raise CalibrationError(
                    f"Monte Carlo mass {self.calibrated_p:.4g} disagrees with {self.p:.4g}")
        else:
            self.calibrated_p = 1.0
        if self.auto_threshold and not 0.5 * target <= self.calibrated_p <= 2 * target:
            raise CalibrationError("calibrated mass outside [p/2, 2p]")

    def event(self, us: np.ndarray) -> np.ndarray:
        return np.real(us[..., self.ref, self.ref]) >= self.threshold


def p_uniform_sample(spec: PUniformSpec, n: int, seed: int | None = None) -> np.ndarray:
    """``n`` draws from the conditioned measure by batched rejection sampling."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0 if seed is None else seed + 1]))
    out = []
    have = 0
    while have < n:
        batch = int(min(200000, max(64, 1.2 * (n - have) / spec.p)))
        us = random_unitary(spec.d, rng, batch)
        keep = us[spec.event(us)]
        out.append(keep)
        have += len(keep)
    return np.concatenate(out)[:n]


def expected_norm(spec: PUniformSpec, n: int, seed: int | None = None) -> McEstimate:
    """Estimate ``‖E_σ U‖_tr`` from ``n`` draws of the conditioned measure."""
    est = cross_fit_norm(p_uniform_sample(spec, n, seed))
    est.extra["envelope"] = envelope(spec.d, spec.m)
    return est


def cross_fit_norm(us: np.ndarray) -> McEstimate:
    """Two-fold cross-fitted estimate of the trace norm of the mean of ``us``.

    Each half is scored against the polar unitary of the other half's mean,
    ``x_i = Re tr(V̂† U_i)``.  A score has expectation
    ``Re tr(V̂† E U) <= ‖E U‖_tr``, so unlike the plug-in norm the estimate is
    not inflated by sampling noise.  The plug-in value is reported alongside.
    """
    us = np.asarray(us, dtype=complex)
    n = len(us)
    if n < 4:
        raise ValueError("need at least four samples")
    half = n // 2
    folds = (us[:half], us[half:])
    scores = []
    for i in (0, 1):
        u, _, vh = np.linalg.svd(folds[1 - i].mean(axis=0))
        v = u @ vh                                   # maximises Re tr(V† mean)
        scores.append(np.real(np.einsum("ij,nij->n", v.conj(), folds[i])))
    x = np.concatenate(scores)
    return McEstimate(float(x.mean()), float(x.std(ddof=1) / np.sqrt(n)), n,
                      {"plug_in": trace_norm(us.mean(axis=0))})


def envelope(d: int, m: int) -> float:
    return float(4 * np.sqrt(d * (1 + m * np.log(2))))


# ---------------------------------------------------------------------------
# Oracles and protocol
# ---------------------------------------------------------------------------

def oracle_channel(kind: int, hidden, d: int) -> Channel:
    """Kraus form of the oracle, A -> A ⊗ H ⊗ K.

    Kind 1: ``K_m = (1/d) Σ_i |i><i| ⊗ (U^i ⊗ I)|m>``.
    Kind 2: ``K_{m,i} = (1/d) |i><i| ⊗ |m>``.
    """
    dd = d * d
    if kind == 1:
        u = _check_hidden(hidden, d)
        big = np.kron(u, np.eye(d))
        ks = []
        for m in range(dd):
            k = np.zeros((2 * dd, 2), dtype=complex)
            k[m, 0] = 1 / d
            k[dd:, 1] = big[:, m] / d
            ks.append(k)
        return Channel(tuple(ks))
    if kind == 2:
        ks = []
        for m in range(dd):
            for i in range(2):
                k = np.zeros((2 * dd, 2), dtype=complex)
                k[i * dd + m, i] = 1 / d
                ks.append(k)
        return Channel(tuple(ks))
    raise ValueError("oracle kind must be 1 or 2")


def _check_hidden(hidden, d: int) -> np.ndarray:
    if hidden is None:
        raise ValueError("kind 1 needs a hidden unitary")
    u = as_operator(hidden)
    if u.shape != (d, d) or not is_unitary(u):
        raise LinalgError(f"hidden operator must be a {d}x{d} unitary")
    return u


def oracle_output(kind: int, mean_u, inp: OracleInput, d: int) -> np.ndarray:
    """Closed-form output on A ⊗ H ⊗ K; ``mean_u`` may be an average of unitaries."""
    dd = d * d
    a, b = inp.alpha, inp.beta
    eye = np.eye(dd) / dd
    out = np.zeros((2 * dd, 2 * dd), dtype=complex)
    out[:dd, :dd] = abs(a) ** 2 * eye
    out[dd:, dd:] = abs(b) ** 2 * eye
    if kind == 1:
        cross = a * np.conj(b) * np.kron(dagger(np.asarray(mean_u)), np.eye(d)) / dd
        out[:dd, dd:] = cross
        out[dd:, :dd] = dagger(cross)
    elif kind != 2:
        raise ValueError("oracle kind must be 1 or 2")
    return out


def oracle_apply(kind: int, hidden, inp: OracleInput, d: int) -> np.ndarray:
    """Exact oracle output on A ⊗ H ⊗ K for the control state ``inp``."""
    u = _check_hidden(hidden, d) if kind == 1 else None
    return oracle_output(kind, u, inp, d)


def honest_prover(hidden, d: int) -> Channel:
    """Controlled-U† on A ⊗ H."""
    u = _check_hidden(hidden, d)
    c = np.zeros((2 * d, 2 * d), dtype=complex)
    c[:d, :d] = np.eye(d)
    c[d:, d:] = dagger(u)
    return Channel.unitary(c)


def reset_control_prover(d: int) -> Channel:
    """Discard the control qubit and replace it by |0>; H is left alone."""
    ks = []
    for i in range(2):
        k = np.zeros((2 * d, 2 * d), dtype=complex)
        k[:d, i * d:(i + 1) * d] = np.eye(d)
        ks.append(k)
    return Channel(tuple(ks))


def _after_oracle(kind: int, hidden, d: int) -> np.ndarray:
    """State on B ⊗ A ⊗ H ⊗ K after the verifier queries with half of |φ+>."""
    ch = oracle_channel(kind, hidden, d)
    return ch.apply(proj(PHI_PLUS), left=2)


def _accept(state: np.ndarray, d: int) -> float:
    t = state.reshape(4, d * d, 4, d * d)
    ba = np.einsum("ikjk->ij", t)
    return float(np.real(np.vdot(PHI_PLUS, ba @ PHI_PLUS)))


def protocol_accept(kind: int, hidden, prover: Channel, d: int) -> float:
    """Acceptance probability of the |φ+> test on B ⊗ A after the prover acts on A ⊗ H."""
    if prover.d_in != 2 * d or prover.d_out != 2 * d:
        raise LinalgError("prover must act on A ⊗ H")
    state = _after_oracle(kind, hidden, d)
    state = prover.apply(state, left=2, right=d)
    return _accept(state, d)


def search_prover(kind: int, hidden, d: int, restarts: int = 32, seed: int = 0,
                  max_iter: int = 300, tol: float = 1e-12) -> tuple[float, Channel]:
    """Multistart polar ascent over isometries A ⊗ H -> A ⊗ H ⊗ E, ``dim E = 2d``.

    Acceptance is a convex quadratic in the isometry W, equal to
    ``tr(W T(W))`` with ``T`` linear in ``conj(W)``; maximising
    ``Re tr(W' T(W))`` by a polar step never lowers it.  Returns the best
    acceptance and the prover channel (E traced out) attaining it.
    """
    n, e = 2 * d, 2 * d
    r = _after_oracle(kind, hidden, d).reshape(2, n, d, 2, n, d)   # B (A H) K
    pf = proj(PHI_PLUS).reshape(2, 2, 2, 2)
    best = (-1.0, None)
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        w = random_unitary(n * e, rng)[:, :n]                 # (A H E) x (A H)
        val = -1.0
        for _ in range(max_iter):
            t = _linear_term(r, w, pf, d, e)
            new = float(np.real(np.trace(w @ t)))
            if new - val < tol:
                val = max(val, new)
                break
            val = new
            u, _, vh = np.linalg.svd(t, full_matrices=False)
            w = dagger(u @ vh)
        if val > best[0]:
            best = (val, w)
    val, w = best
    wt = w.reshape(n, e, n)
    return val, Channel(tuple(wt[:, j, :] for j in range(e)))


def _linear_term(r, w, pf, d, e):
    """``T[x, (a h f)] = Σ r[b x k; c y k] conj(W)[(a' h f), y] P[b a; c a']``."""
    wt = w.reshape(2, d, e, 2 * d)
    t = np.einsum("bxkcyk,dhfy,bacd->xahf", r, wt.conj(), pf, optimize=True)
    return t.reshape(2 * d, 2 * d * e)


# ---------------------------------------------------------------------------
# Hybrid-argument quantities
# ---------------------------------------------------------------------------

def _bootstrap(us: np.ndarray, stat, rng, reps: int = 200) -> float:
    n = len(us)
    vals = [stat(us[rng.integers(0, n, n)].mean(axis=0)) for _ in range(reps)]
    return float(np.std(vals, ddof=1))


def per_query_gap(spec: PUniformSpec, inp: OracleInput, n: int, seed: int | None = None,
                  bootstrap: int = 200) -> McEstimate:
    """``‖O1(ν) - O2(ν)‖_tr`` for ν the control input and U drawn from ``spec``.

    The direct value averages the kind-1 outputs over the draws and takes the
    trace norm of the difference with the kind-2 output; the formula value is
    ``(2|α||β|/d) ‖mean U‖_tr``.  Both get bootstrap standard errors and must
    agree within their combined error plus 1e-9.
    """
    d = spec.d
    us = p_uniform_sample(spec, n, seed)
    o2 = oracle_output(2, None, inp, d)

    def direct(mean_u):
        return trace_norm(oracle_output(1, mean_u, inp, d) - o2)

    def formula(mean_u):
        return 2 * abs(inp.alpha) * abs(inp.beta) / d * trace_norm(mean_u)

    # averaging the outputs is the same as feeding the mean unitary, since
    # the output is affine in U
    mean_u = us.mean(axis=0)
    o1_avg = sum(oracle_output(1, u, inp, d) for u in us) / n
    gap_direct = trace_norm(o1_avg - o2)
    gap_formula = formula(mean_u)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0xB00]))
    se_d = _bootstrap(us, direct, rng, bootstrap)
    se_f = _bootstrap(us, formula, rng, bootstrap)
    if abs(gap_direct - gap_formula) > se_d + se_f + 1e-9:
        raise AssertionError(f"direct gap {gap_direct} and formula {gap_formula} disagree")
    return McEstimate(gap_direct, se_d, n, {"formula": gap_formula, "formula_std_error": se_f})


def point_mass_gap(u, inp: OracleInput) -> float:
    """Exact ``‖O1(ν) - O2(ν)‖_tr`` for the point mass at ``u``."""
    u = as_operator(u)
    d = u.shape[0]
    return trace_norm(oracle_apply(1, u, inp, d) - oracle_apply(2, None, inp, d))


# ---------------------------------------------------------------------------
# Invariance of p-uniformity
# ---------------------------------------------------------------------------

def _haar_bin_mass(d: int, edges: np.ndarray) -> np.ndarray:
    """Haar mass of ``|<v|U|0>|^2`` in each bin; the statistic is Beta(1, d-1)."""
    cdf = 1 - (1 - edges) ** (d - 1) if d > 1 else (edges >= 1).astype(float)
    return np.diff(cdf)


def p_uniform_invariance_check(spec: PUniformSpec, u, n: int, seed: int | None = None,
                               on_state: bool = False, bins: int = 10,
                               sigmas: float = 3.0) -> bool:
    """Check statistically that ``u·σ`` stays below ``Haar / p``.

    The statistic is ``|<0|W|0>|^2`` for ``W = u V`` (or ``|<v|W|0>|^2`` for a
    fixed random unit vector ``v`` when ``on_state``, i.e. the pushforward
    state ``W|0>``).  Each bin frequency must stay below the exact Haar mass
    divided by p, up to ``sigmas`` binomial standard errors.
    """
    u = as_operator(u)
    if not is_unitary(u):
        raise LinalgError("u must be unitary")
    d = spec.d
    vs = p_uniform_sample(spec, n, seed)
    ws = u @ vs
    if on_state:
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0x57A7]))
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        v /= np.linalg.norm(v)
        stat = np.abs(np.einsum("i,ni->n", v.conj(), ws[:, :, 0])) ** 2
    else:
        stat = np.abs(ws[:, 0, 0]) ** 2
    if d == 1:
        return True
    edges = np.linspace(0, 1, bins + 1)
    freq = np.histogram(stat, bins=edges)[0] / n
    cap = _haar_bin_mass(d, edges) / spec.p
    se = np.sqrt(np.maximum(freq * (1 - freq), 1 / n) / n)
    return bool(np.all(freq <= cap + sigmas * se + 1e-12))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

CSV_HEADER = ("d", "m", "n", "estimate", "std_error", "envelope")


def scaling_sweep(ds, ms, n: int, seed: int = 0) -> list[dict]:
    rows = []
    for d in ds:
        for m in ms:
            spec = PUniformSpec(d, m, seed=seed)
            est = expected_norm(spec, n)
            rows.append({"d": d, "m": m, "n": n, "estimate": est.mean,
                         "std_error": est.std_error, "envelope": envelope(d, m)})
    return rows
