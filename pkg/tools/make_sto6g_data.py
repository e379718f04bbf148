"""Generate the C2 / N2 STO-6G integral and dipole files used by the test suite.

Requires PySCF, which is *not* a dependency of qresponse: integrals are produced
externally and only ingested by the library.

    python tools/make_sto6g_data.py tests/data
"""
import sys
from pathlib import Path

import numpy as np
from pyscf import gto, scf
from pyscf.tools import fcidump

MOLECULES = {
    "c2": ("C", 1.242),
    "n2": ("N", 1.098),
}


def write_dipoles(mf, path):
    mol = mf.mol
    c = mf.mo_coeff
    # electronic position integrals only; nuclear part does not enter the response
    with mol.with_common_orig((0.0, 0.0, 0.0)):
        r_ao = mol.intor_symmetric("int1e_r", comp=3)
    with open(path, "w") as f:
        f.write("# label p q <phi_p|r_j|phi_q> (bohr), MO basis, 1-based\n")
        for label, comp in zip("xyz", r_ao):
            r_mo = c.T @ comp @ c
            n = r_mo.shape[0]
            for p in range(n):
                for q in range(p, n):
                    if abs(r_mo[p, q]) > 1e-12:
                        f.write(f"{label} {p + 1} {q + 1} {float(r_mo[p, q])!r}\n")


def main(outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, (atom, bond) in MOLECULES.items():
        mol = gto.M(
            atom=f"{atom} 0 0 0; {atom} 0 0 {bond}",
            basis="sto-6g",
            cart=True,
            unit="Angstrom",
            verbose=0,
        )
        mf = scf.RHF(mol).run()
        fcidump.from_scf(mf, str(outdir / f"{name}_sto6g.fcidump"), tol=1e-12)
        write_dipoles(mf, outdir / f"{name}_sto6g.dipoles")
        print(name, "E_RHF =", mf.e_tot, "Ha")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
