"""Regenerate the shipped 4-qubit H2 Hamiltonian (STO-3G, Jordan-Wigner).

Spin orbitals are interleaved (0a, 0b, 1a, 1b) so that the Hartree-Fock
reference is |1100>. Requires pyscf, which is not a runtime dependency.

    python tools/gen_h2_hamiltonian.py 0.7414 > src/himit/data/h2_sto3g.txt
"""

import itertools
import sys

import numpy as np
from pyscf import ao2mo, gto, scf

PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0 + 0j, -1.0]),
}


def kron_all(mats):
    out = np.eye(1)
    for m in mats:
        out = np.kron(out, m)
    return out


def annihilator(j, n):
    # JW: a_j = Z...Z (|0><1|)_j I...I ; occupied = |1>
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    return kron_all([PAULI["Z"]] * j + [lower] + [PAULI["I"]] * (n - j - 1))


def build(bond_length):
    mol = gto.M(atom=f"H 0 0 0; H 0 0 {bond_length}", basis="sto-3g", unit="Angstrom")
    mf = scf.RHF(mol).run(verbose=0)
    c = mf.mo_coeff
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), c.shape[1])  # chemist (pq|rs)
    n_orb = c.shape[1]
    n = 2 * n_orb
    a = [annihilator(j, n) for j in range(n)]
    ad = [x.conj().T for x in a]
    ham = mol.energy_nuc() * np.eye(2**n, dtype=complex)
    for p, q in itertools.product(range(n), repeat=2):
        if p % 2 == q % 2:
            ham += h1[p // 2, q // 2] * ad[p] @ a[q]
    for p, q, r, s in itertools.product(range(n), repeat=4):
        if p % 2 == s % 2 and q % 2 == r % 2:
            v = eri[p // 2, s // 2, q // 2, r // 2]
            if abs(v) > 1e-14:
                ham += 0.5 * v * ad[p] @ ad[q] @ a[r] @ a[s]
    terms = []
    for letters in itertools.product("IXYZ", repeat=n):
        coeff = np.trace(kron_all([PAULI[l] for l in letters]) @ ham) / 2**n
        if abs(coeff) > 1e-10:
            assert abs(coeff.imag) < 1e-12
            terms.append((coeff.real, "".join(letters)))
    return terms, np.linalg.eigvalsh(ham)[0]


if __name__ == "__main__":
    r = float(sys.argv[1]) if len(sys.argv) > 1 else 0.7414
    terms, e0 = build(r)
    print(f"# H2 STO-3G, R = {r} Angstrom, Jordan-Wigner, spin orbitals (0a,0b,1a,1b)")
    print(f"# exact ground energy {e0:.10f} Ha")
    for coeff, label in terms:
        print(f"{coeff: .12f} {label}")
