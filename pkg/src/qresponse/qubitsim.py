"""Dense statevector simulator for register + ancilla qubits.

Qubit q is bit q of the basis-state index (little endian).  The register
holds the Jordan-Wigner image of a determinant space (qubit m <-> spin orbital
m), and ancilla k sits at qubit ``n_reg + k`` so the register block of any
fixed ancilla pattern is a contiguous slice.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, DomainError
from .fock import FockVector, as_state, basis_for, deinterleave, popcount

_NORM_TOL = 1e-10

# test hook: flips the sign of every Jordan-Wigner string with a nonempty Z tail
_FAULTS: set = set()


@contextmanager
def inject_fault(name: str):
    """Temporarily enable a named fault (only ``"jw-tail"`` exists)."""
    if name != "jw-tail":
        raise DomainError(f"unknown fault {name!r}")
    _FAULTS.add(name)
    try:
        yield
    finally:
        _FAULTS.discard(name)


# ---------------------------------------------------------------------------
# Pauli strings

_LETTERS = "IXYZ"


@dataclass(frozen=True)
class PauliString:
    """phase * P_0 P_1 ... with letters[q] acting on qubit q."""

    phase: complex
    letters: str

    def __post_init__(self):
        if any(c not in _LETTERS for c in self.letters):
            raise DomainError(f"bad Pauli letters {self.letters!r}")
        ph = complex(self.phase)
        if min(abs(ph - u) for u in (1, -1, 1j, -1j)) > 1e-12:
            raise DomainError(f"Pauli phase {ph} not in {{1, -1, i, -i}}")

    @property
    def n_qubits(self):
        return len(self.letters)

    @property
    def flip_mask(self):
        return sum(1 << q for q, c in enumerate(self.letters) if c in "XY")

    @property
    def z_mask(self):
        return sum(1 << q for q, c in enumerate(self.letters) if c in "YZ")

    @property
    def n_y(self):
        return self.letters.count("Y")

    def __mul__(self, other: "PauliString") -> "PauliString":
        n = max(self.n_qubits, other.n_qubits)
        a = self.letters.ljust(n, "I")
        b = other.letters.ljust(n, "I")
        phase = complex(self.phase) * complex(other.phase)
        out = []
        table = {
            ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
            ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
            ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
        }
        for x, y in zip(a, b):
            if x == "I":
                out.append(y)
            elif y == "I":
                out.append(x)
            elif x == y:
                out.append("I")
            else:
                ph, c = table[(x, y)]
                phase *= ph
                out.append(c)
        return PauliString(phase, "".join(out))

    def scaled(self, c) -> "PauliString":
        return PauliString(complex(self.phase) * c, self.letters)

    def apply(self, vec: np.ndarray, controls=(), n_total=None) -> np.ndarray:
        """Apply to a statevector (optionally controlled on (qubit, polarity) pairs)."""
        idx = np.arange(len(vec), dtype=np.int64)
        sel = np.ones(len(vec), dtype=bool)
        for q, pol in controls:
            sel &= ((idx >> q) & 1) == pol
        src = idx[sel]
        fac = complex(self.phase) * (1j ** self.n_y) * (1 - 2 * (popcount(src & self.z_mask) & 1))
        out = vec.copy()
        out[src ^ self.flip_mask] = fac * vec[src]
        return out

    def matrix(self) -> np.ndarray:
        dim = 2**self.n_qubits
        return np.stack([self.apply(col) for col in np.eye(dim, dtype=complex)], axis=1)


def jw_majorana(m: int, kappa: int, n_qubits: int) -> PauliString:
    """U_0 = a_m + a+_m = Z_{<m} X_m and U_1 = a_m - a+_m = Z_{<m} (i Y_m)."""
    if not 0 <= m < n_qubits:
        raise DomainError(f"spin orbital {m} outside register of {n_qubits} qubits")
    letters = ["Z"] * m + ["X" if kappa == 0 else "Y"] + ["I"] * (n_qubits - m - 1)
    phase = 1 if kappa == 0 else 1j
    if "jw-tail" in _FAULTS and m > 0:
        phase = -phase
    return PauliString(phase, "".join(letters))


# ---------------------------------------------------------------------------
# gates


def _ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """One (possibly controlled) operation.

    kind is 'H', 'X', 'RY' (param theta), 'PHASE' (param phi), 'GPHASE'
    (global phase e^{i param}, meaningful only with controls), 'PAULI'
    (``pauli`` acting on the register qubits 0..len-1), 'UNITARY' (dense
    ``matrix`` over ``targets``, first target least significant) or 'BLOCK'
    (``body`` gates).  ``controls`` holds (qubit, polarity) pairs; polarity 0
    is an open circle.
    """

    kind: str
    targets: tuple = ()
    param: float = 0.0
    controls: tuple = ()
    pauli: PauliString | None = None
    matrix: np.ndarray | None = field(default=None, compare=False)
    body: tuple = ()
    label: str = ""

    def qubits(self) -> set:
        if self.kind == "PAULI":
            return {q for q, c in enumerate(self.pauli.letters) if c != "I"}
        if self.kind == "BLOCK":
            out = set()
            for g in self.body:
                out |= g.qubits() | {q for q, _ in g.controls}
            return out
        if self.kind == "GPHASE":
            return set()
        return set(self.targets)

    def single_qubit_matrix(self):
        if self.kind == "H":
            return _H
        if self.kind == "X":
            return _X
        if self.kind == "RY":
            return _ry(self.param)
        if self.kind == "PHASE":
            return np.diag([1.0, np.exp(1j * self.param)])
        raise DomainError(f"{self.kind} is not a single-qubit gate")


def H(q):
    return Gate("H", (q,))


def X(q, controls=()):
    return Gate("X", (q,), controls=tuple(controls))


def RY(q, theta):
    return Gate("RY", (q,), param=float(theta))


def PHASE(q, phi):
    return Gate("PHASE", (q,), param=float(phi))


def GPHASE(phi):
    return Gate("GPHASE", param=float(phi))


def PAULI(p: PauliString, label=""):
    return Gate("PAULI", pauli=p, label=label)


def UNITARY(targets, matrix, label=""):
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (2 ** len(targets),) * 2:
        raise ConfigurationError("unitary size does not match target count")
    if not np.allclose(m.conj().T @ m, np.eye(len(m)), atol=1e-12):
        raise ConfigurationError("matrix is not unitary to 1e-12")
    return Gate("UNITARY", tuple(targets), matrix=m, label=label)


def BLOCK(body, label=""):
    return Gate("BLOCK", body=tuple(body), label=label)


def controlled(g: Gate, controls) -> Gate:
    """Add controls to a gate (recursively for blocks)."""
    controls = tuple(controls)
    if g.kind == "BLOCK":
        return replace(g, body=tuple(controlled(b, controls) for b in g.body))
    return replace(g, controls=controls + g.controls)


def _validate(g: Gate, n_qubits: int):
    ctrl = [q for q, _ in g.controls]
    tgt = g.qubits()
    if len(set(ctrl)) != len(ctrl):
        raise ConfigurationError("repeated control qubit")
    if set(ctrl) & tgt:
        raise ConfigurationError(f"control qubits {sorted(set(ctrl) & tgt)} overlap targets")
    for q in list(tgt) + ctrl:
        if not 0 <= q < n_qubits:
            raise ConfigurationError(f"qubit {q} outside [0, {n_qubits})")
    for _, pol in g.controls:
        if pol not in (0, 1):
            raise ConfigurationError("control polarity must be 0 or 1")


def _apply_dense(vec, n, targets, mat, controls):
    psi = vec.reshape((2,) * n)
    axis = lambda q: n - 1 - q  # noqa: E731
    index = [slice(None)] * n
    for q, pol in controls:
        index[axis(q)] = pol
    index = tuple(index)
    sub = psi[index]
    # axes of sub after integer indexing removed the control axes
    remaining = [a for a in range(n) if not isinstance(index[a], int)]
    k = len(targets)
    tgt_axes = [remaining.index(axis(q)) for q in reversed(targets)]
    m = mat.reshape((2,) * (2 * k))
    res = np.tensordot(m, sub, axes=(list(range(k, 2 * k)), tgt_axes))
    res = np.moveaxis(res, list(range(k)), tgt_axes)
    out = psi.copy()
    out[index] = res
    return out.reshape(-1)


@dataclass
class QubitState:
    """Statevector over ``n_reg`` register and ``n_anc`` ancilla qubits."""

    n_reg: int
    n_anc: int
    amps: np.ndarray

    @property
    def n_qubits(self):
        return self.n_reg + self.n_anc

    def ancilla(self, k):
        return self.n_reg + k

    def copy(self):
        return QubitState(self.n_reg, self.n_anc, self.amps.copy())

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def register_block(self, bits) -> np.ndarray:
        """Register amplitudes for ancilla values ``bits`` (bits[k] = ancilla k)."""
        off = sum(int(b) << k for k, b in enumerate(bits))
        size = 2**self.n_reg
        return self.amps[off * size:(off + 1) * size]


def apply_gate(state: QubitState, g: Gate) -> QubitState:
    n = state.n_qubits
    _validate(g, n)
    if g.kind == "BLOCK":
        for sub in g.body:
            state = apply_gate(state, sub)
        return state
    if g.kind == "GPHASE":
        idx = np.arange(len(state.amps), dtype=np.int64)
        sel = np.ones(len(idx), dtype=bool)
        for q, pol in g.controls:
            sel &= ((idx >> q) & 1) == pol
        amps = np.where(sel, np.exp(1j * g.param) * state.amps, state.amps)
    elif g.kind == "PAULI":
        if g.pauli.n_qubits > n:
            raise ConfigurationError("Pauli string wider than the state")
        amps = g.pauli.apply(state.amps, g.controls)
    elif g.kind == "UNITARY":
        amps = _apply_dense(state.amps, n, list(g.targets), g.matrix, g.controls)
    else:
        amps = _apply_dense(state.amps, n, list(g.targets), g.single_qubit_matrix(), g.controls)
    return QubitState(state.n_reg, state.n_anc, amps)


def apply_gates(state: QubitState, gates) -> QubitState:
    for g in gates:
        state = apply_gate(state, g)
    return state


def gate_matrix(g: Gate, n_qubits: int) -> np.ndarray:
    """Full 2^n matrix of a gate (for tests and small circuits)."""
    dim = 2**n_qubits
    cols = []
    for i in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[i] = 1
        cols.append(apply_gate(QubitState(n_qubits, 0, e), g).amps)
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# measurement


def outcome_probabilities(state: QubitState, qubits) -> dict:
    """Born probability of every bit pattern on ``qubits``."""
    idx = np.arange(len(state.amps), dtype=np.int64)
    key = np.zeros(len(idx), dtype=np.int64)
    for i, q in enumerate(qubits):
        key |= ((idx >> q) & 1) << i
    probs = np.bincount(key, np.abs(state.amps) ** 2, minlength=2 ** len(qubits))
    return {tuple((k >> i) & 1 for i in range(len(qubits))): float(probs[k]) for k in range(len(probs))}


def _project(state, qubits, outcome):
    idx = np.arange(len(state.amps), dtype=np.int64)
    sel = np.ones(len(idx), dtype=bool)
    for q, b in zip(qubits, outcome):
        sel &= ((idx >> q) & 1) == b
    amps = np.where(sel, state.amps, 0)
    return amps, float(np.vdot(amps, amps).real)


def project_branch(state: QubitState, qubits, outcome) -> tuple[QubitState, float]:
    """Deterministic post-selection; raises DomainError for a zero-probability branch."""
    if len(set(qubits)) != len(qubits):
        raise DomainError("measured qubits must be distinct")
    amps, prob = _project(state, qubits, outcome)
    if prob <= 0.0:
        raise DomainError(f"outcome {tuple(outcome)} has zero probability")
    return QubitState(state.n_reg, state.n_anc, amps / np.sqrt(prob)), prob


def measure(state: QubitState, qubits, rng) -> tuple[tuple, QubitState, float]:
    """Sample an outcome with Born probabilities and collapse."""
    if len(set(qubits)) != len(qubits):
        raise DomainError("measured qubits must be distinct")
    probs = outcome_probabilities(state, qubits)
    keys = list(probs)
    p = np.array([probs[k] for k in keys])
    choice = keys[int(np.searchsorted(np.cumsum(p) / p.sum(), rng.random(), side="right"))]
    collapsed, prob = project_branch(state, qubits, choice)
    return choice, collapsed, prob


# ---------------------------------------------------------------------------
# register <-> Fock space


def _state_parts(v):
    if isinstance(v, FockVector):
        return [v]
    return list(v.values())


def prepare_register(v, ancilla_count: int = 0) -> QubitState:
    """Load a FockVector (or dict of sector parts) into the register, ancillae in |0>."""
    parts = _state_parts(v)
    if not parts:
        raise DomainError("empty state")
    n_orbs = parts[0].basis.n_orbs
    n_reg = 2 * n_orbs
    amps = np.zeros(2 ** (n_reg + ancilla_count), dtype=complex)
    for part in parts:
        if part.basis.valid and part.basis.size:
            amps[part.basis.jw_indices()] += part.amps
    nrm = np.linalg.norm(amps)
    if abs(nrm - 1.0) > _NORM_TOL:
        raise DomainError(f"input state has norm {nrm}, expected 1")
    return QubitState(n_reg, ancilla_count, amps)


def register_to_state(vec: np.ndarray, n_orbs: int, tol=0.0) -> dict:
    """Split register amplitudes into sector-tagged FockVectors (nonzero sectors only)."""
    idx = np.nonzero(np.abs(vec) > tol)[0]
    if len(idx) == 0:
        return {}
    alpha, beta = deinterleave(idx, n_orbs)
    na, nb = popcount(alpha), popcount(beta)
    parts = []
    for sec in sorted(set(zip(na.tolist(), nb.tolist()))):
        basis = basis_for(n_orbs, sec)
        parts.append(FockVector(basis, vec[basis.jw_indices()]))
    return as_state(*parts)


def read_register(state: QubitState, n_orbs: int, ancilla_bits=None) -> dict:
    """Register content for a given ancilla pattern (default all zeros), by sector."""
    bits = ancilla_bits if ancilla_bits is not None else (0,) * state.n_anc
    return register_to_state(state.register_block(bits), n_orbs)
