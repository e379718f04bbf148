"""Ancilla circuits that prepare O|psi> probabilistically.

Two families live here:

* the generic linear-combination-of-unitaries construction (``solve_lcu_angles``
  and ``build_lcu_circuit``), which post-selects sum_k c_k U_k |psi> on the
  all-zeros ancilla outcome;
* the specialised response circuits built from Majorana-like unitaries
  U_0 = a + a+ and U_1 = a - a+ (``build_response_circuit``).

Ancilla k is qubit ``n_reg + k`` and is written q_k.  Outcome keys list the
measured ancilla bits in the order given by ``ResponseCircuit.measured``
(highest ancilla first, matching the |q2 q1 q0> notation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DomainError
from .fock import (
    ALPHA,
    BETA,
    FockVector,
    apply_excitation,
    apply_hole,
    apply_ladder,
    apply_number,
    apply_spin,
    as_state,
    spin_orbital,
    state_add,
    state_scale,
)
from .qubitsim import (
    BLOCK,
    GPHASE,
    PAULI,
    PHASE,
    RY,
    Gate,
    H,
    PauliString,
    QubitState,
    X,
    apply_gates,
    controlled,
    jw_majorana,
    outcome_probabilities,
    register_to_state,
)

C8 = np.exp(1j * np.pi / 4)  # e^{i pi/4}


# ---------------------------------------------------------------------------
# Fock-space operator helpers (the oracles the circuits are checked against)

StateOp = Callable[[dict], dict]


def _lift(fn) -> StateOp:
    """Turn a FockVector -> FockVector|dict map into a dict-state operator."""
    def op(state):
        if isinstance(state, FockVector):
            state = as_state(state)
        parts = []
        for v in state.values():
            r = fn(v)
            parts.extend(r.values() if isinstance(r, dict) else [r])
        return as_state(*parts)
    return op


def lincomb(*terms) -> StateOp:
    """sum_i c_i O_i for (c_i, O_i) pairs of dict-state operators."""
    def op(state):
        out: dict = {}
        for c, o in terms:
            out = state_add(out, o(state), c)
        return out
    return op


def op_number(m: int) -> StateOp:
    return _lift(lambda v: apply_number(m // 2, m % 2, v))


def op_hole(m: int) -> StateOp:
    return _lift(lambda v: apply_hole(m // 2, m % 2, v))


def op_excitation(m1: int, m2: int) -> StateOp:
    """a+_{m1} a_{m2}."""
    return _lift(lambda v: apply_excitation(m1, m2, v))


def op_ladder_pair(k1: str, m1: int, k2: str, m2: int) -> StateOp:
    """x_{m1} y_{m2} with each factor 'create' or 'annihilate' (rightmost acts first)."""
    return _lift(lambda v: apply_ladder(m1, k1, apply_ladder(m2, k2, v)))


def op_spin(p: int, j: str) -> StateOp:
    return _lift(lambda v: as_state(*apply_spin(p, j, v)))


def op_spin_tilde(p: int, j: str) -> StateOp:
    """Companion of s_pj in the Majorana decomposition.

    x: (a_pa a_pb - a+_pa a+_pb)/2;  y: -i (a_pa a_pb + a+_pa a+_pb)/2.
    """
    ma, mb = spin_orbital(p, ALPHA), spin_orbital(p, BETA)
    anni = op_ladder_pair("annihilate", ma, "annihilate", mb)
    crea = op_ladder_pair("create", ma, "create", mb)
    if j == "x":
        return lincomb((0.5, anni), (-0.5, crea))
    if j == "y":
        return lincomb((-0.5j, anni), (-0.5j, crea))
    raise DomainError(f"spin component {j!r} has no Majorana circuit (only x, y)")


def op_majorana(m: int, kappa: int) -> StateOp:
    """a_m + a+_m (kappa 0) or a_m - a+_m (kappa 1) at Fock level."""
    sign = 1.0 if kappa == 0 else -1.0
    return lincomb(
        (1.0, _lift(lambda v: apply_ladder(m, "annihilate", v))),
        (sign, _lift(lambda v: apply_ladder(m, "create", v))),
    )


# ---------------------------------------------------------------------------
# Majorana unitaries as Pauli strings


def charge_unitary(m1: int, m2: int, k1: int, k2: int, n_reg: int) -> PauliString:
    """U_{k1}(m1) U_{k2}(m2); with m1 = m2 = m this is U^{(p)}_{k1 k2 sigma}."""
    return jw_majorana(m1, k1, n_reg) * jw_majorana(m2, k2, n_reg)


def spin_unitary(p: int, j: str, kappa: int, n_reg: int) -> PauliString:
    """U^{(p)}_{kappa j}: U0x = U0a U1b, U1x = -U1a U0b, U0y = -i U0a U0b, U1y = i U1a U1b."""
    ma, mb = spin_orbital(p, ALPHA), spin_orbital(p, BETA)
    if j == "x":
        ka, kb, ph = (0, 1, 1) if kappa == 0 else (1, 0, -1)
    elif j == "y":
        ka, kb, ph = (0, 0, -1j) if kappa == 0 else (1, 1, 1j)
    else:
        raise DomainError(f"spin component {j!r} has no Majorana circuit (only x, y)")
    return (jw_majorana(ma, ka, n_reg) * jw_majorana(mb, kb, n_reg)).scaled(ph)


def _pair_block(m1, m2, q_hi, q_lo, n_reg, label):
    """Four controlled U_k(m1) U_k'(m2), k on q_hi and k' on q_lo."""
    body = []
    for k in (0, 1):
        for kk in (0, 1):
            g = PAULI(charge_unitary(m1, m2, k, kk, n_reg), f"{label}[{k}{kk}]")
            body.append(controlled(g, [(q_hi, k), (q_lo, kk)]))
    return BLOCK(body, label)


def _spin_block(p, j, q, n_reg, label):
    body = [controlled(PAULI(spin_unitary(p, j, k, n_reg), f"{label}[{k}]"), [(q, k)])
            for k in (0, 1)]
    return BLOCK(body, label)


# ---------------------------------------------------------------------------
# circuit containers


@dataclass(frozen=True)
class OutcomeEntry:
    """What a measured ancilla outcome prepares.

    The projected (unnormalized) register content equals ``scale * op(psi)``
    with the unmeasured ancillae in the pattern ``ancilla_bits`` (indexed by
    ancilla number); all other patterns vanish.  Discard entries only close
    the probability bookkeeping.  ``op`` may be None when the prepared
    operator is not a Fock-space expression (the generic LCU case).
    """

    label: str
    op: StateOp | None = None
    scale: complex = 1.0
    ancilla_bits: tuple = ()
    discard: bool = False


@dataclass(frozen=True)
class ResponseCircuit:
    kind: str
    indices: tuple
    n_reg: int
    ancilla_count: int
    gates: tuple
    measured: tuple  # ancilla numbers, in outcome-key order
    outcome_table: dict = field(default_factory=dict)

    @property
    def n_qubits(self):
        return self.n_reg + self.ancilla_count

    def measured_qubits(self):
        return tuple(self.n_reg + k for k in self.measured)

    def outcome(self, key) -> OutcomeEntry:
        key = tuple(int(b) for b in key)
        if key not in self.outcome_table:
            raise DomainError(f"outcome {key} is not in the table of {self.kind}")
        return self.outcome_table[key]


def run_circuit(circ: ResponseCircuit, psi) -> QubitState:
    """Load ``psi`` (FockVector or normalized register QubitState) and run all gates."""
    from .qubitsim import prepare_register

    if isinstance(psi, QubitState):
        if psi.n_reg != circ.n_reg or psi.n_anc != circ.ancilla_count:
            raise ConfigurationError("input state layout does not match the circuit")
        state = psi
    else:
        state = prepare_register(psi, circ.ancilla_count)
        if state.n_reg != circ.n_reg:
            raise ConfigurationError("register width does not match the circuit")
    return apply_gates(state, circ.gates)


def outcome_distribution(circ: ResponseCircuit, final: QubitState) -> dict:
    return outcome_probabilities(final, circ.measured_qubits())


def branch_vector(circ: ResponseCircuit, final: QubitState, key) -> np.ndarray:
    """Unnormalized statevector projected onto outcome ``key``."""
    circ.outcome(key)
    idx = np.arange(len(final.amps), dtype=np.int64)
    sel = np.ones(len(idx), dtype=bool)
    for q, b in zip(circ.measured_qubits(), key):
        sel &= ((idx >> q) & 1) == b
    return np.where(sel, final.amps, 0)


def branch_register_states(circ: ResponseCircuit, final: QubitState, key, n_orbs) -> list:
    """Register contents (dict states) of every ancilla pattern compatible with ``key``."""
    vec = branch_vector(circ, final, key)
    size = 2**circ.n_reg
    out = []
    for pattern in range(2**circ.ancilla_count):
        block = vec[pattern * size:(pattern + 1) * size]
        if np.any(block != 0):
            out.append(register_to_state(block, n_orbs))
    return out


ZERO_BRANCH = 1e-24


@dataclass(frozen=True)
class PostselectResult:
    state: QubitState | None
    probability: float
    ok: bool


def run_postselect(circ: ResponseCircuit, psi, outcome) -> PostselectResult:
    """Run the circuit and project onto ``outcome``.

    A zero-probability branch (below ``ZERO_BRANCH``, which absorbs gate
    round-off) returns ``ok=False`` with no state rather than raising.
    """
    key = tuple(int(b) for b in outcome)
    circ.outcome(key)
    final = run_circuit(circ, psi)
    vec = branch_vector(circ, final, key)
    prob = float(np.vdot(vec, vec).real)
    if prob <= ZERO_BRANCH:
        return PostselectResult(None, 0.0, False)
    return PostselectResult(QubitState(final.n_reg, final.n_anc, vec / np.sqrt(prob)), prob, True)


# ---------------------------------------------------------------------------
# linear combination of unitaries


@dataclass(frozen=True)
class AngleTree:
    """Rotation angles theta^{(j)}_lambda, j = 1..n.

    ``levels[j - 1]`` has 2^{n-j} entries; entry lambda is the integer whose
    binary digits are the ancilla values (q_{n-1} ... q_j).
    """

    n: int
    levels: tuple
    norm: float = 1.0

    def angle(self, j: int, lam: int) -> float:
        return float(self.levels[j - 1][lam])

    @property
    def count(self):
        return sum(len(a) for a in self.levels)


def solve_lcu_angles(c) -> AngleTree:
    """Angles for which the all-zeros branch carries sum_k c_k U_k / (2^{n/2} ||c||).

    ``c`` has length 2^n and real entries; bit j of k is the value of
    ancilla q_j attached to U_k.  Level 1 pairs (c_{lam 0}, c_{lam 1}) through
    atan2, higher levels pair the norms of the two subtrees, so vanishing
    coefficients never divide by zero.
    """
    c = np.asarray(c)
    if np.iscomplexobj(c):
        if np.any(np.abs(c.imag) > 0):
            raise DomainError("solve_lcu_angles takes real coefficients; absorb phases first")
        c = c.real
    c = c.astype(float)
    n = int(round(np.log2(len(c)))) if len(c) else -1
    if n < 1 or 2**n != len(c):
        raise DomainError(f"need 2^n coefficients with n >= 1, got {len(c)}")
    if not np.all(np.isfinite(c)):
        raise DomainError("coefficients must be finite")
    if not np.any(c):
        raise DomainError("all coefficients are zero")
    levels = []
    rho = c
    for _ in range(n):
        lo, hi = rho[0::2], rho[1::2]
        levels.append(np.arctan2(hi, lo))
        rho = np.hypot(lo, hi)
    return AngleTree(n, tuple(levels), float(rho[0]))


def _lcu_partial(tree: AngleTree, j: int, lam: int, unitaries, n_reg) -> list:
    if j == 0:
        return [unitaries[lam]]
    q = n_reg + j - 1
    out = []
    for b in (0, 1):
        for g in _lcu_partial(tree, j - 1, 2 * lam + b, unitaries, n_reg):
            out.append(controlled(g, [(q, b)]))
    out.append(RY(q, -2 * tree.angle(j, lam)))
    return out


def build_lcu_circuit(tree: AngleTree, unitaries, n_reg: int) -> ResponseCircuit:
    """Hadamards on the ancillae followed by the recursive partial circuit C^{(n)}.

    ``unitaries`` are 2^n register gates (Gate objects or PauliStrings).  The
    all-zeros entry's scale is 2^{-n/2} / ||c||.
    """
    n = tree.n
    if len(unitaries) != 2**n:
        raise ConfigurationError(f"{2**n} unitaries required, got {len(unitaries)}")
    gates_u = []
    for u in unitaries:
        g = PAULI(u) if isinstance(u, PauliString) else u
        if any(q >= n_reg for q in g.qubits()) or any(q >= n_reg for q, _ in g.controls):
            raise ConfigurationError("LCU unitaries must act on the register only")
        gates_u.append(g)
    gates = [H(n_reg + k) for k in range(n)]
    gates += _lcu_partial(tree, n, 0, gates_u, n_reg)
    table = {(0,) * n: OutcomeEntry("sum_k c_k U_k", None, 2 ** (-n / 2) / tree.norm, (0,) * n)}
    return ResponseCircuit("lcu_generic", tuple(range(2**n)), n_reg, n, tuple(gates),
                           tuple(range(n - 1, -1, -1)), table)


def lcu_prepare(coeffs, unitaries, n_reg: int) -> tuple[AngleTree, ResponseCircuit]:
    """LCU circuit for complex coefficients: each phase is folded into its unitary."""
    c = np.asarray(coeffs, dtype=complex)
    phases = np.angle(c)
    wrapped = []
    for u, ph in zip(unitaries, phases):
        g = PAULI(u) if isinstance(u, PauliString) else u
        wrapped.append(BLOCK([g, GPHASE(ph)]) if ph != 0 else g)
    tree = solve_lcu_angles(np.abs(c))
    return tree, build_lcu_circuit(tree, wrapped, n_reg)


# ---------------------------------------------------------------------------
# response circuits

KINDS = {
    "charge_diag": 2,
    "charge_offdiag": 3,
    "spin_diag": 1,
    "spin_offdiag": 2,
    "spin_charge": 3,
    "generic_diag": 2,
    "generic_offdiag": 3,
}


def _check_orb(p, n_orbs):
    if not 0 <= p < n_orbs:
        raise DomainError(f"orbital {p} outside [0, {n_orbs})")


def _check_spin_label(j):
    if j not in ("x", "y"):
        raise DomainError(f"spin circuits exist for x and y only, got {j!r}")


def _half_pm(o1: StateOp, o2: StateOp, sign: int) -> StateOp:
    """(o1 + sign e^{i pi/4} o2) / 2."""
    return lincomb((0.5, o1), (0.5 * sign * C8, o2))


def build_response_circuit(kind: str, indices, n_orbs: int) -> ResponseCircuit:
    """Specialised circuit of a given kind.

    indices per kind (spin labels 'x'/'y', spin projections 0 = alpha, 1 = beta):

    * charge_diag: (p, s)
    * charge_offdiag: (p, s, p', s')
    * spin_diag: (p, j)
    * spin_offdiag: (p, j, p', j')
    * spin_charge: (p, j, p', s', sign) with sign = +1 or -1
    * generic_diag: (m1, m2)  -> a+_{m1} a_{m2}
    * generic_offdiag: (m2, m1, m3, m4) -> (a+_{m2} a_{m1} +- e^{i pi/4} a+_{m3} a_{m4}) / 2
    """
    if kind not in KINDS:
        raise DomainError(f"unknown circuit kind {kind!r}")
    n_reg = 2 * n_orbs
    nanc = KINDS[kind]
    q = [n_reg + k for k in range(nanc)]
    idx = tuple(indices)
    table = {}

    if kind == "charge_diag":
        p, s = idx
        _check_orb(p, n_orbs)
        m = spin_orbital(p, s)
        gates = [H(q[1]), H(q[0]), _pair_block(m, m, q[1], q[0], n_reg, f"U(n{p}{s})"),
                 H(q[1]), H(q[0])]
        measured = (0,)
        table[(0,)] = OutcomeEntry(f"n[{p},{s}]", op_number(m), 1.0, (0, 1))
        table[(1,)] = OutcomeEntry(f"ntilde[{p},{s}]", op_hole(m), 1.0, (1, 0))

    elif kind == "generic_diag":
        m1, m2 = idx
        for m_ in (m1, m2):
            _check_orb(m_ // 2, n_orbs)
        gates = [H(q[1]), H(q[0]), _pair_block(m1, m2, q[1], q[0], n_reg, f"U({m1},{m2})"),
                 H(q[1]), H(q[0])]
        measured = (1, 0)
        table[(1, 0)] = OutcomeEntry(f"E[{m1},{m2}]", op_excitation(m1, m2), 1.0, (0, 1))
        for key in ((0, 0), (0, 1), (1, 1)):
            table[key] = OutcomeEntry("discard", discard=True)

    elif kind == "charge_offdiag":
        p, s, pp, ss = idx
        _check_orb(p, n_orbs)
        _check_orb(pp, n_orbs)
        if (p, s) == (pp, ss):
            raise DomainError("off-diagonal circuit needs two different (p, s) pairs")
        m, mm = spin_orbital(p, s), spin_orbital(pp, ss)
        gates = [H(q[2]), H(q[1]), H(q[0]),
                 controlled(_pair_block(m, m, q[1], q[0], n_reg, f"U(n{p}{s})"), [(q[2], 0)]),
                 controlled(_pair_block(mm, mm, q[1], q[0], n_reg, f"U(n{pp}{ss})"), [(q[2], 1)]),
                 PHASE(q[2], np.pi / 4),
                 H(q[2]), H(q[1]), H(q[0])]
        measured = (2, 1)
        for b2, sign in ((0, 1), (1, -1)):
            tag = "+" if sign > 0 else "-"
            table[(b2, 1)] = OutcomeEntry(f"n{tag}[{p}{s},{pp}{ss}]",
                                          _half_pm(op_number(m), op_number(mm), sign),
                                          1.0, (0, 1, b2))
            table[(b2, 0)] = OutcomeEntry(f"ntilde{tag}[{p}{s},{pp}{ss}]",
                                          _half_pm(op_hole(m), op_hole(mm), sign),
                                          1.0, (1, 0, b2))

    elif kind == "spin_diag":
        p, j = idx
        _check_orb(p, n_orbs)
        _check_spin_label(j)
        gates = [H(q[0]), _spin_block(p, j, q[0], n_reg, f"U(s{p}{j})"), H(q[0])]
        measured = (0,)
        table[(0,)] = OutcomeEntry(f"2s[{p}{j}]", op_spin(p, j), 2.0, (0,))
        table[(1,)] = OutcomeEntry(f"2stilde[{p}{j}]", op_spin_tilde(p, j), 2.0, (1,))

    elif kind == "spin_offdiag":
        p, j, pp, jj = idx
        _check_orb(p, n_orbs)
        _check_orb(pp, n_orbs)
        _check_spin_label(j)
        _check_spin_label(jj)
        if (p, j) == (pp, jj):
            raise DomainError("off-diagonal circuit needs two different (p, j) pairs")
        gates = [H(q[1]), H(q[0]),
                 controlled(_spin_block(p, j, q[0], n_reg, f"U(s{p}{j})"), [(q[1], 0)]),
                 controlled(_spin_block(pp, jj, q[0], n_reg, f"U(s{pp}{jj})"), [(q[1], 1)]),
                 PHASE(q[1], np.pi / 4),
                 H(q[1]), H(q[0])]
        measured = (1, 0)
        for b1, sign in ((0, 1), (1, -1)):
            tag = "+" if sign > 0 else "-"
            table[(b1, 0)] = OutcomeEntry(f"2s{tag}[{p}{j},{pp}{jj}]",
                                          _half_pm(op_spin(p, j), op_spin(pp, jj), sign),
                                          2.0, (0, b1))
            table[(b1, 1)] = OutcomeEntry(f"2stilde{tag}[{p}{j},{pp}{jj}]",
                                          _half_pm(op_spin_tilde(p, j), op_spin_tilde(pp, jj), sign),
                                          2.0, (1, b1))

    elif kind == "spin_charge":
        p, j, pp, ss, sign = idx
        _check_orb(p, n_orbs)
        _check_orb(pp, n_orbs)
        _check_spin_label(j)
        if sign not in (1, -1):
            raise DomainError("spin-charge sign must be +1 or -1")
        mm = spin_orbital(pp, ss)
        gates = [H(q[2]), H(q[1]), H(q[0]),
                 controlled(_spin_block(p, j, q[0], n_reg, f"U(s{p}{j})"), [(q[2], 0)]),
                 controlled(_pair_block(mm, mm, q[1], q[0], n_reg, f"U(n{pp}{ss})"), [(q[2], 1)]),
                 PHASE(q[2], sign * np.pi / 4),
                 H(q[1]), H(q[0]),
                 X(q[1], [(q[2], 1)]),
                 H(q[2])]
        measured = (2, 0)
        tag = "+" if sign > 0 else "-"
        v = lincomb((1.0, op_spin(p, j)), (0.5 * C8**sign, op_number(mm)))
        table[(0, 0)] = OutcomeEntry(f"v{tag}[{p}{j},{pp}{ss}]", v, 1.0, (0, 0, 0))
        for key in ((0, 1), (1, 0), (1, 1)):
            table[key] = OutcomeEntry("discard", discard=True)

    else:  # generic_offdiag
        m2, m1, m3, m4 = idx
        for m_ in idx:
            _check_orb(m_ // 2, n_orbs)
        if (m2, m1) == (m3, m4):
            raise DomainError("off-diagonal circuit needs two different index pairs")
        gates = [H(q[2]), H(q[1]), H(q[0]),
                 controlled(_pair_block(m2, m1, q[1], q[0], n_reg, f"U({m2},{m1})"), [(q[2], 0)]),
                 controlled(_pair_block(m3, m4, q[1], q[0], n_reg, f"U({m3},{m4})"), [(q[2], 1)]),
                 PHASE(q[2], np.pi / 4),
                 H(q[2]), H(q[1]), H(q[0])]
        measured = (2, 1, 0)
        for b2, sign in ((0, 1), (1, -1)):
            tag = "+" if sign > 0 else "-"
            table[(b2, 1, 0)] = OutcomeEntry(
                f"f{tag}[{m2}{m1},{m3}{m4}]",
                _half_pm(op_excitation(m2, m1), op_excitation(m3, m4), sign), 1.0, (0, 1, b2))
        for b2 in (0, 1):
            for b1 in (0, 1):
                for b0 in (0, 1):
                    table.setdefault((b2, b1, b0), OutcomeEntry("discard", discard=True))

    return ResponseCircuit(kind, idx, n_reg, nanc, tuple(gates), measured, table)


def expected_register(entry: OutcomeEntry, psi) -> dict:
    """Oracle: scale * op(psi) as a dict state."""
    if entry.discard or entry.op is None:
        raise DomainError("discard outcomes have no prepared operator")
    return state_scale(entry.op(psi), entry.scale)


# ---------------------------------------------------------------------------
# text dump

def _fmt_controls(controls):
    if not controls:
        return ""
    return " ctrl=" + ",".join(f"q{q}:{pol}" for q, pol in controls)


def _dump_gate(g: Gate, lines, indent=""):
    if g.kind == "BLOCK":
        lines.append(f"{indent}BEGIN {g.label or 'block'}")
        for sub in g.body:
            _dump_gate(sub, lines, indent + "  ")
        lines.append(f"{indent}END")
        return
    if g.kind == "PAULI":
        ph = complex(g.pauli.phase)
        sym = {1: "+1", -1: "-1", 1j: "+i", -1j: "-i"}[complex(round(ph.real), round(ph.imag))]
        body = f"PAULI {sym} {g.pauli.letters}"
    elif g.kind in ("RY", "PHASE"):
        body = f"{g.kind} q{g.targets[0]} {g.param!r}"
    elif g.kind == "GPHASE":
        body = f"GPHASE {g.param!r}"
    elif g.kind == "UNITARY":
        body = "UNITARY " + " ".join(f"q{t}" for t in g.targets) + (f" {g.label}" if g.label else "")
    else:
        body = f"{g.kind} q{g.targets[0]}"
    lines.append(indent + body + _fmt_controls(g.controls))


def dump_circuit(circ: ResponseCircuit) -> str:
    """One gate per line.

    Grammar::

        line    := indent (gate | "BEGIN" label | "END")
        gate    := "H" qubit | "X" qubit | "RY" qubit angle | "PHASE" qubit angle
                 | "GPHASE" angle | "PAULI" phase letters | "UNITARY" qubit+ [label]
        gate   += [" ctrl=" qubit ":" polarity ("," qubit ":" polarity)*]
        qubit   := "q" integer       phase := "+1" | "-1" | "+i" | "-i"

    PAULI letters are written for qubit 0 first.  A header line gives the kind,
    register width and ancilla count.
    """
    lines = [f"# {circ.kind} indices={circ.indices} n_reg={circ.n_reg} "
             f"ancillas={circ.ancilla_count} measured=" +
             ",".join(f"q{circ.n_reg + k}" for k in circ.measured)]
    for g in circ.gates:
        _dump_gate(g, lines)
    return "\n".join(lines) + "\n"
