"""Linear combination of unitaries on a two-qubit register.

Builds the ancilla circuit for four random Pauli-string unitaries, checks the
post-selected branch against the direct sum and prints the gate listing.
"""

import numpy as np

from qresponse.circuits import build_lcu_circuit, dump_circuit, outcome_distribution, run_circuit, solve_lcu_angles
from qresponse.qubitsim import PauliString, QubitState

rng = np.random.default_rng(1)
c = rng.normal(size=4)
paulis = [PauliString(1, w) for w in ("XI", "ZY", "YY", "IZ")]

tree = solve_lcu_angles(c)
print("coefficients", np.round(c, 4))
for j, level in enumerate(tree.levels, start=1):
    print(f"level {j} angles", np.round(level, 6))

circ = build_lcu_circuit(tree, paulis, n_reg=2)
psi = rng.normal(size=4) + 1j * rng.normal(size=4)
psi /= np.linalg.norm(psi)
start = np.zeros(16, dtype=complex)
start[:4] = psi
final = run_circuit(circ, QubitState(2, 2, start))

direct = sum(ck * p.matrix() @ psi for ck, p in zip(c, paulis))
want = direct / (2 * np.linalg.norm(c))
print("max |branch - sum c_k U_k psi / (2 |c|)| =", np.abs(final.amps[:4] - want).max())
print("success probability", outcome_distribution(circ, final)[(0, 0)],
      "expected", np.linalg.norm(direct) ** 2 / (4 * np.sum(c**2)))
print()
print(dump_circuit(circ))
