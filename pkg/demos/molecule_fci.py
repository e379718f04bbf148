"""FCI ground states of C2 and N2 in STO-6G from the bundled integral files.

The files were produced with an external quantum chemistry package (see
tools/make_sto6g_data.py).  Takes under a minute.
"""

import time
from pathlib import Path

from qresponse import HARTREE_TO_EV, load_fcidump, sector_dimension, solve_sector

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

for name, sector in (("c2", (6, 6)), ("n2", (7, 7))):
    t = time.perf_counter()
    ham = load_fcidump(DATA / f"{name}_sto6g.fcidump")
    sol = solve_sector(ham, sector, 3, seed=0)
    print(f"{name.upper()}: {ham.n_orbs} orbitals, sector {sector}, dim {sector_dimension(ham.n_orbs, sector)}")
    for e, r in zip(sol.energies, sol.residuals):
        print(f"   E = {e:.8f} Ha = {e * HARTREE_TO_EV:.4f} eV   residual {r:.1e}")
    print(f"   {time.perf_counter() - t:.1f} s")
