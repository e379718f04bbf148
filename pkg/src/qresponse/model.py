"""Second-quantized Hamiltonians and one-body operators.

Integrals are ingested from FCIDUMP-style text files (or built for small model
systems); they are never computed here.  All energies are Hartree.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BoundsError, ConflictError, FormatError

HARTREE_TO_EV = 27.211386245988
SPEED_OF_LIGHT_AU = 137.035999084

# interleaved spin-orbital masks must fit a signed 64-bit word
MAX_ORBITALS = 31

_EQUIV_TOL = 1e-10


def ha_to_ev(energy):
    return np.asarray(energy) * HARTREE_TO_EV if np.ndim(energy) else energy * HARTREE_TO_EV


def ev_to_ha(energy):
    return np.asarray(energy) / HARTREE_TO_EV if np.ndim(energy) else energy / HARTREE_TO_EV


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Electronic Hamiltonian over ``n_orbs`` spatial orbitals.

    ``eri[p, q, r, s]`` is the chemists'-notation integral (pq|rs); the array
    is always stored fully expanded with its 8-fold permutational symmetry.
    """

    n_orbs: int
    h: np.ndarray
    eri: np.ndarray
    e_core: float
    n_electrons: int

    def __post_init__(self):
        n = self.n_orbs
        if n < 1 or n > MAX_ORBITALS:
            raise FormatError(f"n_orbs={n} outside supported range 1..{MAX_ORBITALS}")
        if not 0 < self.n_electrons <= 2 * n:
            raise FormatError(f"n_electrons={self.n_electrons} incompatible with n_orbs={n}")
        object.__setattr__(self, "h", _readonly(self.h))
        object.__setattr__(self, "eri", _readonly(self.eri))
        object.__setattr__(self, "e_core", float(self.e_core))
        if self.h.shape != (n, n) or self.eri.shape != (n, n, n, n):
            raise FormatError("integral array shapes do not match n_orbs")

    def __eq__(self, other):
        if not isinstance(other, Hamiltonian):
            return NotImplemented
        return (
            self.n_orbs == other.n_orbs
            and self.n_electrons == other.n_electrons
            and self.e_core == other.e_core
            and np.array_equal(self.h, other.h)
            and np.array_equal(self.eri, other.eri)
        )

    __hash__ = None

    def content_hash(self) -> str:
        digest = hashlib.sha256()
        digest.update(np.array([self.n_orbs, self.n_electrons], dtype=np.int64).tobytes())
        digest.update(np.float64(self.e_core).tobytes())
        digest.update(np.ascontiguousarray(self.h).tobytes())
        digest.update(np.ascontiguousarray(self.eri).tobytes())
        return digest.hexdigest()


@dataclass(frozen=True, eq=False)
class OneBodyOperator:
    """Spatial-orbital matrix O_pq of a one-body operator sum_pq O_pq a+_p a_q.

    With ``spin_diagonal`` the spin-orbital matrix is O_pq * delta(s, s').
    """

    label: str
    mat: np.ndarray
    spin_diagonal: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mat", _readonly(self.mat))

    @property
    def n_orbs(self):
        return self.mat.shape[0]

    def spin_orbital_matrix(self) -> np.ndarray:
        """Matrix over spin orbitals m = 2p + s."""
        n = self.n_orbs
        out = np.zeros((2 * n, 2 * n))
        out[0::2, 0::2] = self.mat
        out[1::2, 1::2] = self.mat
        return out


# ---------------------------------------------------------------------------
# FCIDUMP

_HEADER_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=")


def _parse_header(text):
    fields = {}
    matches = list(_HEADER_KEY.finditer(text))
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        raw = text[m.end():end]
        values = [v for v in re.split(r"[,\s]+", raw) if v]
        fields[m.group(1).upper()] = values
    return fields


def _canonical_eri(i, j, k, l):
    ij = (i, j) if i >= j else (j, i)
    kl = (k, l) if k >= l else (l, k)
    return (ij + kl) if ij >= kl else (kl + ij)


def _store(table, key, value, lineno, what):
    old = table.get(key)
    if old is None:
        table[key] = value
    elif abs(old - value) > _EQUIV_TOL * max(1.0, abs(old)):
        raise ConflictError(
            f"line {lineno}: {what} {key} given as {value!r}, previously {old!r}"
        )


def load_fcidump(path) -> Hamiltonian:
    """Read an FCIDUMP-style file into a :class:`Hamiltonian`.

    Body lines are ``value i j k l`` with 1-based indices; ``0 0 0 0`` carries
    the core energy, ``i j 0 0`` one-electron and all-nonzero two-electron
    integrals.  Any symmetry-equivalent index order is accepted.  Symmetry
    labels (ORBSYM/ISYM) are ignored.
    """
    lines = Path(path).read_text().splitlines()
    header_parts = []
    body_start = None
    in_header = False
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        upper = stripped.upper()
        if not in_header and upper.startswith("&FCI"):
            in_header = True
            stripped = stripped[4:]
            upper = upper[4:]
        if in_header:
            end = re.search(r"&END|^/$|(?<=\s)/\s*$", upper)
            if end is not None:
                header_parts.append(stripped[: end.start()])
                body_start = lineno
                break
            header_parts.append(stripped)
            continue
        raise FormatError(f"line {lineno}: expected '&FCI' header")
    if body_start is None:
        raise FormatError("unterminated or missing &FCI header")

    fields = _parse_header(" ".join(header_parts))
    for required in ("NORB", "NELEC"):
        if required not in fields or not fields[required]:
            raise FormatError(f"FCIDUMP header is missing field {required}")
    try:
        norb = int(fields["NORB"][0])
        nelec = int(fields["NELEC"][0])
    except ValueError as exc:
        raise FormatError(f"non-integer NORB/NELEC in header: {exc}") from None
    if norb > MAX_ORBITALS:
        raise FormatError(f"NORB={norb} exceeds bitmask capacity ({MAX_ORBITALS})")

    one, two = {}, {}
    e_core = None
    for lineno in range(body_start + 1, len(lines) + 1):
        stripped = lines[lineno - 1].strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 5:
            raise FormatError(f"line {lineno}: expected 'value i j k l', got {stripped!r}")
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError:
            raise FormatError(f"line {lineno}: cannot parse {stripped!r}") from None
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise BoundsError(f"line {lineno}: index {idx} outside [1, {norb}]")
        if i == j == k == l == 0:
            if e_core is not None and abs(e_core - value) > _EQUIV_TOL * max(1.0, abs(e_core)):
                raise ConflictError(f"line {lineno}: core energy given twice")
            e_core = value if e_core is None else e_core
        elif k == 0 and l == 0 and i > 0 and j > 0:
            key = (max(i, j) - 1, min(i, j) - 1)
            _store(one, key, value, lineno, "one-electron integral")
        elif min(i, j, k, l) > 0:
            key = _canonical_eri(i - 1, j - 1, k - 1, l - 1)
            _store(two, key, value, lineno, "two-electron integral")
        else:
            raise FormatError(f"line {lineno}: invalid index pattern {i} {j} {k} {l}")

    h = np.zeros((norb, norb))
    for (p, q), v in one.items():
        h[p, q] = h[q, p] = v
    eri = np.zeros((norb,) * 4)
    for (p, q, r, s), v in two.items():
        for a, b in ((p, q), (q, p)):
            for c, d in ((r, s), (s, r)):
                eri[a, b, c, d] = v
                eri[c, d, a, b] = v
    return Hamiltonian(norb, h, eri, e_core or 0.0, nelec)


def write_fcidump(ham: Hamiltonian, path, tol=0.0):
    """Write ``ham`` in FCIDUMP format with round-trip-exact float formatting."""
    n = ham.n_orbs
    out = [
        f" &FCI NORB={n},NELEC={ham.n_electrons},MS2={ham.n_electrons % 2},",
        "  ORBSYM=" + "1," * n,
        "  ISYM=1,",
        " &END",
    ]
    for p in range(n):
        for q in range(p + 1):
            for r in range(n):
                for s in range(r + 1):
                    if (p, q) < (r, s):
                        continue
                    v = ham.eri[p, q, r, s]
                    if v != 0.0 and abs(v) > tol:
                        out.append(f"{float(v)!r} {p + 1} {q + 1} {r + 1} {s + 1}")
    for p in range(n):
        for q in range(p + 1):
            v = ham.h[p, q]
            if v != 0.0 and abs(v) > tol:
                out.append(f"{float(v)!r} {p + 1} {q + 1} 0 0")
    out.append(f"{float(ham.e_core)!r} 0 0 0 0")
    Path(path).write_text("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# one-body operator files

_LABEL = re.compile(r"^[A-Za-z0-9_]+$")


def load_onebody_operator(path, n_orbs: int) -> list[OneBodyOperator]:
    """Read ``label p q value`` lines into one operator per distinct label.

    Entries are mirrored so the stored matrices are symmetric; giving both
    (p, q) and (q, p) is allowed when the values agree.
    """
    entries: dict[str, dict] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 4:
            raise FormatError(f"line {lineno}: expected 'label p q value', got {stripped!r}")
        label = tokens[0]
        if not _LABEL.match(label):
            raise FormatError(f"line {lineno}: invalid operator label {label!r}")
        try:
            p, q = int(tokens[1]), int(tokens[2])
            value = float(tokens[3])
        except ValueError:
            raise FormatError(f"line {lineno}: cannot parse {stripped!r}") from None
        for idx in (p, q):
            if idx < 1 or idx > n_orbs:
                raise BoundsError(f"line {lineno}: index {idx} outside [1, {n_orbs}]")
        key = (min(p, q) - 1, max(p, q) - 1)
        _store(entries.setdefault(label, {}), key, value, lineno, f"element of {label!r}")

    ops = []
    for label, table in entries.items():
        mat = np.zeros((n_orbs, n_orbs))
        for (p, q), v in table.items():
            mat[p, q] = mat[q, p] = v
        ops.append(OneBodyOperator(label, mat))
    return ops


def build_hubbard_dimer(t: float, U: float) -> Hamiltonian:
    """Two-site Hubbard model at half filling: hopping ``t``, on-site ``U``."""
    h = np.array([[0.0, -t], [-t, 0.0]])
    eri = np.zeros((2, 2, 2, 2))
    eri[0, 0, 0, 0] = U
    eri[1, 1, 1, 1] = U
    return Hamiltonian(2, h, eri, 0.0, 2)


def random_hamiltonian(n_orbs: int, n_electrons: int, rng, scale=1.0) -> Hamiltonian:
    """Random real Hamiltonian with the full 8-fold integral symmetry (for tests/demos)."""
    n = n_orbs
    h = rng.normal(scale=scale, size=(n, n))
    h = (h + h.T) / 2
    eri = rng.normal(scale=scale / 2, size=(n,) * 4)
    eri = eri + eri.transpose(1, 0, 2, 3)
    eri = eri + eri.transpose(0, 1, 3, 2)
    eri = eri + eri.transpose(2, 3, 0, 1)
    return Hamiltonian(n, h, eri / 8, rng.normal(), n_electrons)
