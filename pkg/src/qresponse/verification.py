"""Self-checks run by ``qresponse verify`` on small built-in systems."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import circuits as C
from .fci import ground_state, solve_all_sectors
from .fock import FockVector, as_state, basis_for, state_scale
from .lehmann import EigenLevels, exact_response, transition_set
from .model import build_hubbard_dimer, random_hamiltonian
from .qubitsim import QubitState, UNITARY, gate_matrix, jw_majorana, prepare_register, register_to_state
from .sampling import required_sectors


@dataclass
class SuiteResult:
    name: str
    tolerance: float
    worst: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return {"suite": self.name, "tolerance": self.tolerance, "worst": self.worst,
                "passed": self.passed, **self.detail}


def _result(name, tol, worst, **detail):
    worst = float(worst)
    return SuiteResult(name, tol, worst, bool(worst <= tol), detail)


def random_state(n_orbs, rng, max_sectors=4) -> dict:
    """Normalized random superposition over a few random sectors."""
    secs = [(a, b) for a in range(n_orbs + 1) for b in range(n_orbs + 1)]
    pick = rng.choice(len(secs), size=rng.integers(1, max_sectors + 1), replace=False)
    parts = [FockVector.random(basis_for(n_orbs, secs[i]), rng) * complex(rng.normal(), rng.normal())
             for i in pick]
    st = as_state(*parts)
    nrm = np.sqrt(sum(np.vdot(v.amps, v.amps).real for v in st.values()))
    return state_scale(st, 1 / nrm)


def embed_expected(entry, psi, n_orbs, ancilla_count) -> np.ndarray:
    size = 4**n_orbs
    out = np.zeros(size * 2**ancilla_count, dtype=complex)
    off = sum(b << k for k, b in enumerate(entry.ancilla_bits))
    for v in C.expected_register(entry, psi).values():
        out[off * size + v.basis.jw_indices()] += v.amps
    return out


def circuit_cases(n_orbs=2):
    ns = 2 * n_orbs
    orbs = range(n_orbs)
    cases = [("charge_diag", (p, s)) for p in orbs for s in (0, 1)]
    cases += [("generic_diag", (a, b)) for a in range(ns) for b in range(ns)]
    cases += [("charge_offdiag", (p, s, q, t)) for p, s, q, t in itertools.product(orbs, (0, 1), orbs, (0, 1))
              if (p, s) != (q, t)]
    cases += [("spin_diag", (p, j)) for p in orbs for j in "xy"]
    cases += [("spin_offdiag", (p, j, q, k)) for p, j, q, k in itertools.product(orbs, "xy", orbs, "xy")
              if (p, j) != (q, k)]
    cases += [("spin_charge", (p, j, q, s, sg)) for p, j, q, s, sg in
              itertools.product(orbs, "xy", orbs, (0, 1), (1, -1))]
    cases += [("generic_offdiag", idx) for idx in itertools.product(range(ns), repeat=4)
              if idx[:2] != idx[2:]]
    return cases


def check_circuits(trials=1000, seed=0, n_orbs=2) -> tuple[float, float]:
    """(worst branch deviation from the Fock oracle, worst |sum of outcome probabilities - 1|)."""
    rng = np.random.default_rng(seed)
    cases = circuit_cases(n_orbs)
    built = {}
    worst = worst_total = 0.0
    for t in range(trials):
        kind, idx = cases[t % len(cases)]
        circ = built.get((kind, idx)) or built.setdefault((kind, idx), C.build_response_circuit(kind, idx, n_orbs))
        psi = random_state(n_orbs, rng)
        final = C.run_circuit(circ, psi)
        worst_total = max(worst_total, abs(sum(C.outcome_distribution(circ, final).values()) - 1))
        for key, entry in circ.outcome_table.items():
            if entry.discard:
                continue
            got = C.branch_vector(circ, final, key)
            want = embed_expected(entry, psi, n_orbs, circ.ancilla_count)
            worst = max(worst, float(np.abs(got - want).max()))
    return worst, worst_total


def random_unitary(dim, rng):
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def check_lcu(trials=200, seed=0, n_values=(1, 2, 3), n_reg=2) -> float:
    """Worst deviation of the post-selected branch from 2^{-n/2} sum c_k U_k psi / ||c||."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    dim = 2**n_reg
    for n in n_values:
        for _ in range(trials):
            c = rng.normal(size=2**n)
            us = [random_unitary(dim, rng) for _ in range(2**n)]
            psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            psi /= np.linalg.norm(psi)
            tree = C.solve_lcu_angles(c)
            circ = C.build_lcu_circuit(tree, [UNITARY(list(range(n_reg)), u) for u in us], n_reg)
            start = np.zeros(dim * 2**n, dtype=complex)
            start[:dim] = psi
            final = C.run_circuit(circ, QubitState(n_reg, n, start))
            got = final.amps[:dim]
            direct = sum(ck * u @ psi for ck, u in zip(c, us))
            want = direct * 2 ** (-n / 2) / np.linalg.norm(c)
            worst = max(worst, float(np.abs(got - want).max()))
    return worst


def check_lcu_two_level(trials=100, seed=0) -> float:
    """Relative residual of the n = 2 angle conditions (tangent and cosine-ratio forms)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        c = rng.normal(size=4)
        tree = C.solve_lcu_angles(c)
        t10, t11, t2 = tree.angle(1, 0), tree.angle(1, 1), tree.angle(2, 0)
        pairs = [(np.tan(t10), c[1] / c[0]),
                 (np.tan(t11), c[3] / c[2]),
                 (np.cos(t11) / np.cos(t10) * np.tan(t2), c[2] / c[0])]
        for got, want in pairs:
            worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    return worst


def check_jw(seed=0, n_orbs=2) -> float:
    """Pauli-string Majoranas against Fock-level a +- a+ on random states."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for m in range(2 * n_orbs):
        for kappa in (0, 1):
            psi = random_state(n_orbs, rng)
            reg = prepare_register(psi)
            got = jw_majorana(m, kappa, 2 * n_orbs).apply(reg.amps)
            want = np.zeros_like(got)
            for v in C.op_majorana(m, kappa)(psi).values():
                want[v.basis.jw_indices()] += v.amps
            worst = max(worst, float(np.abs(got - want).max()))
    return worst


def check_unitarity(n_orbs=2) -> float:
    """Every response-circuit gate sequence is unitary."""
    worst = 0.0
    for kind, idx in circuit_cases(n_orbs)[::7]:
        circ = C.build_response_circuit(kind, idx, n_orbs)
        n = circ.n_qubits
        u = np.eye(2**n, dtype=complex)
        for g in circ.gates:
            u = gate_matrix(g, n) @ u
        worst = max(worst, float(np.abs(u.conj().T @ u - np.eye(2**n)).max()))
    return worst


def _dimer_setup(t=1.0, U=4.0):
    ham = build_hubbard_dimer(t, U)
    g = ground_state(ham)
    gs = g.solution.vector(0)
    levels = EigenLevels(solve_all_sectors(ham, required_sectors(g.sector, ham.n_orbs), 10**6))
    return ham, g, gs, levels


def check_sum_rules(seed=0) -> float:
    """sum_lambda <gs|O|lambda><lambda|O'|gs> = <gs|O O'|gs> on a full eigenbasis."""
    rng = np.random.default_rng(seed)
    ham = random_hamiltonian(3, 3, rng)
    g = ground_state(ham)
    gs = g.solution.vector(0)
    levels = EigenLevels(solve_all_sectors(ham, required_sectors(g.sector, 3), 10**6))
    ts = transition_set(gs, levels, g.energy)
    worst = 0.0
    n = ham.n_orbs
    for m in range(2 * n):
        for mm in range(2 * n):
            # number operators keep the sector, so <n_m n_mm> is a plain vdot
            want = np.vdot(gs.amps, C.op_number(m)(C.op_number(mm)(gs))[gs.sector].amps) \
                if C.op_number(mm)(gs) else 0.0
            worst = max(worst, abs(ts.N[:, m, mm].sum() - want))
    for a in range(3 * n):
        p, j = divmod(a, 3)
        sv = C.op_spin(p, "xyz"[j])(gs)
        want = sum(np.vdot(v.amps, v.amps).real for v in sv.values())
        worst = max(worst, abs(ts.S[:, a, a].sum() - want))
    return float(worst)


def check_symmetry() -> float:
    """chi_OO(-w) = conj(chi_OO(w)) for the diagonal (Hermitian) components."""
    _, g, gs, levels = _dimer_setup()
    om = np.linspace(0.05, 5.0, 100)
    pos = exact_response(gs, levels, g.energy, om)
    neg = exact_response(gs, levels, g.energy, -om)
    n = gs.basis.n_orbs
    worst = 0.0
    for p in range(n):
        for c in range(4):
            worst = max(worst, float(np.abs(neg.values[:, p, c, p, c] - np.conj(pos.values[:, p, c, p, c])).max()))
    return worst


def check_roundtrip(seed=0) -> float:
    rng = np.random.default_rng(seed)
    psi = random_state(2, rng)
    back = register_to_state(prepare_register(psi).amps, 2)
    return max(float(np.abs(back[k].amps - v.amps).max()) for k, v in psi.items())


def run_all(quick=False) -> list[SuiteResult]:
    trials = 200 if quick else 1000
    circ_dev, prob_dev = check_circuits(trials)
    return [
        _result("jw_consistency", 1e-12, check_jw()),
        _result("register_roundtrip", 1e-15, check_roundtrip()),
        _result("circuit_oracle", 1e-10, circ_dev, trials=trials),
        _result("outcome_probabilities", 1e-12, prob_dev),
        _result("gate_unitarity", 1e-12, check_unitarity()),
        _result("lcu_generality", 1e-10, check_lcu(40 if quick else 200)),
        _result("lcu_two_level_angles", 1e-10, check_lcu_two_level()),
        _result("sum_rules", 1e-10, check_sum_rules()),
        _result("chi_symmetry", 1e-12, check_symmetry()),
    ]
