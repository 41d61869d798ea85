"""Quantum channels and qubit circuits.

A :class:`Channel` stores a Kraus decomposition.  Circuits are lists of small
unitaries on qubit wires; :func:`to_channel` turns a circuit with ancillas and
discarded wires into its Stinespring dilation and from there into Kraus form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from .linalg import (
    ATOL,
    EIG_TOL,
    LinalgError,
    as_operator,
    dagger,
    is_unitary,
    ket,
    operator_from_json,
    operator_to_json,
    permute_systems,
    proj,
    psd_sqrt,
)


@dataclass(frozen=True, eq=False)
class Channel:
    """Completely positive trace-preserving map in Kraus form.

    ``dilation`` optionally records a Stinespring unitary ``U`` together with
    ``(d_anc, d_garbage)`` such that ``Phi(rho) = tr_G U (rho ⊗ |0><0|) U†``
    with ``U`` written in (out ⊗ garbage) × (in ⊗ ancilla) ordering.
    """

    kraus: tuple
    dilation: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        ks = tuple(as_operator(k) for k in self.kraus)
        if not ks:
            raise LinalgError("channel needs at least one Kraus operator")
        if len({k.shape for k in ks}) != 1:
            raise LinalgError("Kraus operators have different shapes")
        total = sum(dagger(k) @ k for k in ks)
        if not np.allclose(total, np.eye(ks[0].shape[1]), atol=ATOL, rtol=0):
            raise LinalgError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", ks)

    @property
    def d_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus[0].shape[0]

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return sum(k @ rho @ dagger(k) for k in self.kraus)

    def apply(self, rho, left: int = 1, right: int = 1) -> np.ndarray:
        """Apply the channel to the middle factor of ``left ⊗ in ⊗ right``."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape[0] != left * self.d_in * right:
            raise LinalgError(
                f"operator of dimension {rho.shape[0]} does not match "
                f"{left} x {self.d_in} x {right}")
        t = rho.reshape(left, self.d_in, right, left, self.d_in, right)
        out = np.zeros((left, self.d_out, right, left, self.d_out, right), dtype=complex)
        for k in self.kraus:
            out += np.einsum("ai,xiyzjw,bj->xayzbw", k, t, k.conj(), optimize=True)
        d = left * self.d_out * right
        return out.reshape(d, d)

    def adjoint(self, y) -> np.ndarray:
        """Heisenberg-picture map ``Y -> sum_k K_k† Y K_k``."""
        y = np.asarray(y, dtype=complex)
        return sum(dagger(k) @ y @ k for k in self.kraus)

    def compose(self, first: "Channel") -> "Channel":
        """The channel ``self ∘ first``."""
        if first.d_out != self.d_in:
            raise LinalgError("channel dimensions do not chain")
        return Channel(tuple(a @ b for a in self.kraus for b in first.kraus))

    def accept_probability(self, rho) -> float:
        """Probability of outcome 1 for a channel onto a single classical bit."""
        if self.d_out != 2:
            raise LinalgError("acceptance needs a channel with one output bit")
        return float(np.real(self(rho)[1, 1]))

    def stinespring(self, garbage_dim: int | None = None) -> tuple[np.ndarray, int, int]:
        """Unitary dilation ``(U, d_anc, d_garbage)`` of the channel.

        The garbage space holds one level per Kraus operator, padded so that
        ``d_in * d_anc == d_out * d_garbage``.
        """
        if self.dilation is not None and garbage_dim in (None, self.dilation[2]):
            return self.dilation
        n_k = len(self.kraus)
        g = n_k if garbage_dim is None else int(garbage_dim)
        if g < n_k:
            raise LinalgError(f"garbage dimension {g} below Kraus count {n_k}")
        while (self.d_out * g) % self.d_in:
            g += 1
        a = self.d_out * g // self.d_in
        iso = np.zeros((self.d_out, g, self.d_in), dtype=complex)
        for i, k in enumerate(self.kraus):
            iso[:, i, :] = k
        iso = iso.reshape(self.d_out * g, self.d_in)
        u = np.zeros((self.d_out * g, self.d_in * a), dtype=complex)
        cols = np.arange(self.d_in) * a
        u[:, cols] = iso
        if a > 1:
            rest = [c for c in range(self.d_in * a) if c % a]
            u[:, rest] = null_space(dagger(iso))
        return u, a, g

    @classmethod
    def from_stinespring(cls, u, d_in: int, d_anc: int, d_out: int, d_garbage: int) -> "Channel":
        u = as_operator(u)
        if u.shape != (d_out * d_garbage, d_in * d_anc):
            raise LinalgError("Stinespring unitary has the wrong shape")
        if not is_unitary(u, EIG_TOL):
            raise LinalgError("Stinespring operator is not unitary")
        iso = u.reshape(d_out, d_garbage, d_in, d_anc)[:, :, :, 0]
        kraus = tuple(iso[:, g, :] for g in range(d_garbage))
        kraus = tuple(k for k in kraus if np.abs(k).max() > 0) or kraus[:1]
        return cls(kraus, dilation=(u, d_anc, d_garbage))

    @classmethod
    def identity(cls, d: int) -> "Channel":
        return cls((np.eye(d, dtype=complex),))

    @classmethod
    def unitary(cls, u) -> "Channel":
        u = as_operator(u)
        if not is_unitary(u):
            raise LinalgError("not a unitary")
        return cls((u,))

    @classmethod
    def depolarizing(cls, d: int, p: float = 1.0) -> "Channel":
        """``rho -> (1-p) rho + p tr(rho) I/d`` via generalized Paulis."""
        shift = np.roll(np.eye(d), 1, axis=0)
        clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
        ks = []
        for a in range(d):
            for b in range(d):
                w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
                coef = 1 - p + p / d**2 if (a, b) == (0, 0) else p / d**2
                ks.append(np.sqrt(coef) * w)
        return cls(tuple(ks))

    @classmethod
    def replacement(cls, state, d_in: int) -> "Channel":
        """Discard the input and prepare ``state`` (vector or density matrix)."""
        state = np.asarray(state, dtype=complex)
        rho = proj(state) if state.ndim == 1 else state
        s = psd_sqrt(rho)
        d_out = rho.shape[0]
        ks = [s[:, [j]] @ ket(i, d_in)[None, :]
              for i in range(d_in) for j in range(d_out)]
        return cls(tuple(ks))

    @classmethod
    def measurement(cls, effect) -> "Channel":
        """Two-outcome measurement with acceptance effect ``effect``; output is one bit."""
        e = as_operator(effect)
        d = e.shape[0]
        kraus = []
        for bit, op in ((0, np.eye(d) - e), (1, e)):
            root = psd_sqrt(op)
            kraus += [np.outer(ket(bit, 2), root[j]) for j in range(d)
                      if np.abs(root[j]).max() > 0]
        return cls(tuple(kraus))

    def effect(self) -> np.ndarray:
        """Acceptance effect of a one-bit channel, ``Phi†(|1><1|)``."""
        if self.d_out != 2:
            raise LinalgError("effect needs a channel with one output bit")
        return self.adjoint(proj(ket(1, 2)))

    def to_json(self) -> dict:
        return {"kraus": [operator_to_json(k) for k in self.kraus]}

    @classmethod
    def from_json(cls, obj: dict) -> "Channel":
        return cls(tuple(operator_from_json(k) for k in obj["kraus"]))


def choi(ch: Channel) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| ⊗ ch(|i><j|)``."""
    d = ch.d_in
    out = np.zeros((d * ch.d_out, d * ch.d_out), dtype=complex)
    for i in range(d):
        for j in range(d):
            eij = np.zeros((d, d), dtype=complex)
            eij[i, j] = 1
            out[i * ch.d_out:(i + 1) * ch.d_out, j * ch.d_out:(j + 1) * ch.d_out] = ch(eij)
    return out


# ---------------------------------------------------------------------------
# Circuits
# ---------------------------------------------------------------------------

@dataclass
class Circuit:
    """Qubit circuit: ``wires`` qubits, the last ``ancillas`` of them start in |0>.

    ``discards`` are wires traced out at the end; ``split`` partitions the
    surviving wires into two registers, e.g. (output, garbage).
    """

    wires: int
    gates: list = field(default_factory=list)
    ancillas: int = 0
    discards: tuple = ()
    split: tuple | None = None

    def __post_init__(self):
        if self.wires < 1:
            raise LinalgError("a circuit needs at least one wire")
        if not 0 <= self.ancillas <= self.wires:
            raise LinalgError("ancilla count out of range")
        gates = []
        for g, targets in self.gates:
            g = as_operator(g)
            targets = tuple(int(t) for t in targets)
            if not 1 <= len(targets) <= 2 or len(set(targets)) != len(targets):
                raise LinalgError(f"gate targets {targets} must be one or two distinct wires")
            if any(t < 0 or t >= self.wires for t in targets):
                raise LinalgError(f"gate targets {targets} out of range")
            if g.shape != (2 ** len(targets),) * 2 or not is_unitary(g, EIG_TOL):
                raise LinalgError("gate is not a unitary of matching size")
            gates.append((g, targets))
        self.gates = gates
        self.discards = tuple(sorted(int(w) for w in self.discards))
        if any(w < 0 or w >= self.wires for w in self.discards):
            raise LinalgError("discard wire out of range")
        kept = self.kept_wires
        if self.split is None:
            self.split = (kept, ())
        self.split = tuple(tuple(int(w) for w in part) for part in self.split)
        if sorted(self.split[0] + self.split[1]) != list(kept):
            raise LinalgError("split must partition the surviving wires")

    @property
    def inputs(self) -> int:
        return self.wires - self.ancillas

    @property
    def kept_wires(self) -> tuple:
        return tuple(w for w in range(self.wires) if w not in self.discards)

    def add(self, gate, *targets) -> "Circuit":
        self.gates.append((as_operator(gate), tuple(targets)))
        self.__post_init__()
        return self

    def unitary(self) -> np.ndarray:
        """Full ``2^wires`` matrix of the gate sequence."""
        d = 2 ** self.wires
        m = np.eye(d, dtype=complex)
        for g, targets in self.gates:
            m = _apply_gate(m, g, targets, self.wires)
        return m

    def to_json(self) -> dict:
        return {
            "wires": self.wires,
            "ancillas": self.ancillas,
            "gates": [{"matrix": operator_to_json(g), "targets": list(t)} for g, t in self.gates],
            "discards": list(self.discards),
            "split": [list(p) for p in self.split],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Circuit":
        return cls(
            wires=int(obj["wires"]),
            ancillas=int(obj.get("ancillas", 0)),
            gates=[(operator_from_json(g["matrix"]), tuple(g["targets"])) for g in obj.get("gates", [])],
            discards=tuple(obj.get("discards", ())),
            split=tuple(tuple(p) for p in obj["split"]) if obj.get("split") is not None else None,
        )


def _apply_gate(state: np.ndarray, gate: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Apply ``gate`` to ``targets`` of an n-qubit vector or the rows of a matrix."""
    extra = state.shape[1:]
    t = state.reshape((2,) * n + extra)
    k = len(targets)
    g = gate.reshape((2,) * (2 * k))
    t = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(targets)))
    t = np.moveaxis(t, list(range(k)), list(targets))
    return t.reshape(state.shape)


def run_unitary(c: Circuit, state=None) -> np.ndarray:
    """Run a circuit without discards on ``state`` ⊗ |0...0> (ancillas).

    ``state`` lives on the non-ancilla wires and defaults to |0...0>.  The
    full output vector in wire order is returned.
    """
    if c.discards:
        raise LinalgError("run_unitary needs a circuit without discarded wires")
    d_in = 2 ** c.inputs
    psi = ket(0, d_in) if state is None else np.asarray(state, dtype=complex).ravel()
    if psi.size != d_in:
        raise LinalgError(f"input of size {psi.size} does not match {c.inputs} input wires")
    psi = np.kron(psi, ket(0, 2 ** c.ancillas))
    for g, targets in c.gates:
        psi = _apply_gate(psi, g, targets, c.wires)
    return psi


def to_channel(c: Circuit) -> Channel:
    """Channel implemented by a circuit, built from its Stinespring dilation.

    The output register is the surviving wires in increasing order.
    """
    u = c.unitary()
    kept = list(c.kept_wires)
    perm = kept + list(c.discards)
    u = permute_systems_rows(u, c.wires, perm)
    d_out = 2 ** len(kept)
    d_garbage = 2 ** len(c.discards)
    return Channel.from_stinespring(u, 2 ** c.inputs, 2 ** c.ancillas, d_out, d_garbage)


def permute_systems_rows(u: np.ndarray, n: int, perm: Sequence[int]) -> np.ndarray:
    """Reorder the output (row) qubits of a 2^n x m matrix."""
    m = u.shape[1]
    t = u.reshape((2,) * n + (m,)).transpose(list(perm) + [n])
    return t.reshape(2 ** n, m)


def register_order(c: Circuit) -> tuple[list, list]:
    """Wire permutation putting the first split register before the second."""
    first, second = c.split
    return list(first), list(second)


def output_state(c: Circuit) -> np.ndarray:
    """``C|0>`` reordered so the first register of the split comes first."""
    psi = run_unitary(c)
    first, second = register_order(c)
    return permute_systems(psi, (2,) * c.wires, first + second)


# Common gates
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)
