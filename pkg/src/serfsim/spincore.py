"""Exact operator algebra for alkali-like atoms with half-integer nuclear spin.

Ground-state atoms with one valence electron (S=1/2) and nuclear spin I
split into two hyperfine manifolds F = I +/- 1/2.  This module builds the
coupled |F,m> basis, the spin operators S, I, F in that basis, spin
temperature states, the secular (manifold-block) Zeeman Hamiltonian, and
the singlet/triplet structure of the two-atom product space.

Conventions
-----------
* hbar = 1; all operators are dense complex matrices.
* Level ordering is manifold-major: the upper manifold a (F = I + 1/2)
  first, then the lower manifold b (F = I - 1/2), with m descending
  inside each manifold.  This ordering is fixed so stored reference data
  stays bit-stable.
* Inter-manifold (hyperfine) coherences are dropped by every dynamical
  routine in this package; `hyperfine_projection` is the canonical way
  to do it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, sqrt

import numpy as np

__all__ = [
    "NuclearSpin",
    "AtomBasis",
    "OperatorSet",
    "PairOperatorSet",
    "clebsch_gordan",
    "angular_momentum_operators",
    "build_basis",
    "spin_operators",
    "spin_temperature_state",
    "opposed_spin_temperature_state",
    "stretched_state",
    "manifold_hamiltonian",
    "pair_operators",
    "hyperfine_projection",
    "rotation",
    "check_density_matrix",
]

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10


@dataclass(frozen=True)
class NuclearSpin:
    """Nuclear spin quantum number stored as 2I to stay integer-exact."""

    two_I: int

    def __post_init__(self):
        if self.two_I < 1:
            raise ValueError(f"two_I must be >= 1, got {self.two_I}")
        if self.two_I % 2 == 0:
            raise ValueError(
                f"two_I must be odd (half-integer I paired with electron spin 1/2), got {self.two_I}"
            )

    @property
    def I(self) -> float:
        return self.two_I / 2.0

    @classmethod
    def from_I(cls, I: float) -> "NuclearSpin":
        two_I = round(2 * I)
        if abs(two_I - 2 * I) > 1e-12:
            raise ValueError(f"I must be half-integer, got {I}")
        return cls(two_I)


@dataclass(frozen=True)
class AtomBasis:
    """Coupled |F,m> level structure of a single atom.

    ``levels`` lists (F, m) pairs, each scaled by 2 to remain integer
    (two_F, two_m), ordered manifold-major with m descending.
    """

    I: NuclearSpin
    dim: int
    levels: tuple = field(repr=False)

    @property
    def two_F_upper(self) -> int:
        return self.I.two_I + 1

    @property
    def two_F_lower(self) -> int:
        return self.I.two_I - 1

    @property
    def F_values(self) -> np.ndarray:
        """F quantum number of each level."""
        return np.array([lv[0] for lv in self.levels]) / 2.0

    @property
    def m_values(self) -> np.ndarray:
        """m quantum number of each level."""
        return np.array([lv[1] for lv in self.levels]) / 2.0

    @property
    def upper_indices(self) -> np.ndarray:
        return np.arange(0, self.two_F_upper + 1)

    @property
    def lower_indices(self) -> np.ndarray:
        return np.arange(self.two_F_upper + 1, self.dim)


@dataclass(frozen=True)
class OperatorSet:
    """Spin operators of one atom in the coupled |F,m> basis."""

    basis: AtomBasis
    S: tuple  # (S_x, S_y, S_z)
    I: tuple  # (I_x, I_y, I_z)
    F: tuple  # (F_x, F_y, F_z)
    Pi_a: np.ndarray
    Pi_b: np.ndarray
    F_plus_a: np.ndarray  # Pi_a (F_x + i F_y) Pi_a

    @property
    def dim(self) -> int:
        return self.basis.dim


@dataclass(frozen=True)
class PairOperatorSet:
    """Singlet/triplet structure of the two-atom tensor space."""

    basis_a: AtomBasis
    basis_b: AtomBasis
    Pi_S: np.ndarray
    Pi_T: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis_a.dim * self.basis_b.dim

    def lift_a(self, op: np.ndarray) -> np.ndarray:
        """Operator on atom a acting on the pair space."""
        return np.kron(op, np.eye(self.basis_b.dim))

    def lift_b(self, op: np.ndarray) -> np.ndarray:
        """Operator on atom b acting on the pair space."""
        return np.kron(np.eye(self.basis_a.dim), op)


def clebsch_gordan(j1: float, j2: float, m1: float, m2: float, J: float, M: float) -> float:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley phase)."""
    if abs(m1 + m2 - M) > 1e-9:
        return 0.0
    if J < abs(j1 - j2) - 1e-9 or J > j1 + j2 + 1e-9:
        return 0.0
    if abs(m1) > j1 + 1e-9 or abs(m2) > j2 + 1e-9 or abs(M) > J + 1e-9:
        return 0.0

    def fct(x: float) -> float:
        xi = round(x)
        if abs(x - xi) > 1e-9 or xi < 0:
            raise ValueError(f"factorial of non-integer or negative value: {x}")
        return float(factorial(xi))

    pref = sqrt(
        (2 * J + 1)
        * fct(J + j1 - j2)
        * fct(J - j1 + j2)
        * fct(j1 + j2 - J)
        / fct(j1 + j2 + J + 1)
    )
    pref *= sqrt(
        fct(J + M) * fct(J - M) * fct(j1 - m1) * fct(j1 + m1) * fct(j2 - m2) * fct(j2 + m2)
    )
    s = 0.0
    k = 0
    while True:
        args = (
            j1 + j2 - J - k,
            j1 - m1 - k,
            j2 + m2 - k,
            J - j2 + m1 + k,
            J - j1 - m2 + k,
        )
        if min(args[:3]) < -1e-9 and k > 0:
            break
        if all(a > -1e-9 for a in args):
            s += (-1) ** k / (
                fct(k) * fct(args[0]) * fct(args[1]) * fct(args[2]) * fct(args[3]) * fct(args[4])
            )
        k += 1
        if k > round(2 * (j1 + j2 + J)) + 2:
            break
    return pref * s


def angular_momentum_operators(j: float) -> tuple:
    """(J_x, J_y, J_z) for a single spin j in the |j,m> basis, m descending."""
    two_j = round(2 * j)
    dim = two_j + 1
    m = j - np.arange(dim)
    Jz = np.diag(m).astype(complex)
    # raising operator: <m+1|J+|m> = sqrt(j(j+1) - m(m+1)); m descending puts it above the diagonal
    jp = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        mm = m[k]
        jp[k - 1, k] = sqrt(j * (j + 1) - mm * (mm + 1))
    Jx = (jp + jp.conj().T) / 2
    Jy = (jp - jp.conj().T) / (2j)
    return Jx, Jy, Jz


def build_basis(I: NuclearSpin) -> AtomBasis:
    """Coupled-basis level list for nuclear spin I: upper manifold first, m descending."""
    two_Fa = I.two_I + 1
    two_Fb = I.two_I - 1
    levels = []
    for two_F in (two_Fa, two_Fb):
        for two_m in range(two_F, -two_F - 2, -2):
            levels.append((two_F, two_m))
    dim = 2 * (I.two_I + 1)
    assert len(levels) == dim
    return AtomBasis(I=I, dim=dim, levels=tuple(levels))


def _coupling_matrix(basis: AtomBasis) -> np.ndarray:
    """Unitary from the Zeeman product basis |m_I, m_S> to the coupled |F,m> basis.

    Product-basis ordering: nuclear m_I descending (outer), electron m_S
    descending (inner), matching kron(nuclear, electron).
    """
    I = basis.I.I
    dim = basis.dim
    n_I = basis.I.two_I + 1
    mI_list = [I - k for k in range(n_I)]
    mS_list = [0.5, -0.5]
    U = np.zeros((dim, dim), dtype=complex)
    for col, (two_F, two_m) in enumerate(basis.levels):
        F = two_F / 2.0
        m = two_m / 2.0
        for i_n, mI in enumerate(mI_list):
            for i_e, mS in enumerate(mS_list):
                row = i_n * 2 + i_e
                U[row, col] = clebsch_gordan(I, 0.5, mI, mS, F, m)
    return U


def spin_operators(basis: AtomBasis) -> OperatorSet:
    """S, I, F operators and manifold projectors in the coupled basis."""
    I_val = basis.I.I
    sx, sy, sz = angular_momentum_operators(0.5)
    ix, iy, iz = angular_momentum_operators(I_val)
    n_I = basis.I.two_I + 1
    eye_I = np.eye(n_I)
    eye_S = np.eye(2)

    S_prod = tuple(np.kron(eye_I, s) for s in (sx, sy, sz))
    I_prod = tuple(np.kron(i, eye_S) for i in (ix, iy, iz))

    U = _coupling_matrix(basis)
    S_ops = tuple(U.conj().T @ op @ U for op in S_prod)
    I_ops = tuple(U.conj().T @ op @ U for op in I_prod)
    F_ops = tuple(s + i for s, i in zip(S_ops, I_ops))

    upper = np.zeros(basis.dim)
    upper[basis.upper_indices] = 1.0
    Pi_a = np.diag(upper).astype(complex)
    Pi_b = np.eye(basis.dim) - Pi_a

    F_plus = F_ops[0] + 1j * F_ops[1]
    F_plus_a = Pi_a @ F_plus @ Pi_a
    return OperatorSet(basis=basis, S=S_ops, I=I_ops, F=F_ops, Pi_a=Pi_a, Pi_b=Pi_b, F_plus_a=F_plus_a)


def check_density_matrix(rho: np.ndarray, atol_herm: float = HERMITICITY_TOL,
                         atol_trace: float = TRACE_TOL, eig_floor: float = EIGENVALUE_FLOOR) -> None:
    """Raise ValueError unless rho is Hermitian, unit trace and positive."""
    if np.abs(rho - rho.conj().T).max() > atol_herm:
        raise ValueError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > atol_trace or abs(np.trace(rho).imag) > atol_trace:
        raise ValueError("density matrix trace differs from 1")
    w = np.linalg.eigvalsh(rho)
    if w.min() < eig_floor:
        raise ValueError(f"density matrix has negative eigenvalue {w.min():.3e}")


def _axis_vector(axis) -> np.ndarray:
    v = np.asarray(axis, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise ValueError("axis vector must be nonzero")
    return v / n


def spin_temperature_state(ops: OperatorSet, P: float, axis=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Spin temperature state rho ~ exp(beta F.axis) with electron polarization P.

    beta = ln((1+P)/(1-P)) makes <2 S.axis> equal P; the constructor
    verifies this to 1e-10 so a wrong temperature relation cannot pass
    silently.
    """
    if not 0.0 <= P < 1.0:
        raise ValueError(f"polarization must satisfy 0 <= P < 1, got {P} "
                         "(use stretched_state for the P -> 1 limit)")
    n = _axis_vector(axis)
    beta = np.log((1.0 + P) / (1.0 - P))
    Fn = sum(ni * Fi for ni, Fi in zip(n, ops.F))
    w, V = np.linalg.eigh(Fn)
    rho = (V * np.exp(beta * w)) @ V.conj().T
    rho /= np.trace(rho).real
    Sn = sum(ni * Si for ni, Si in zip(n, ops.S))
    pol = 2.0 * np.trace(Sn @ rho).real
    if abs(pol - P) > 1e-10:
        raise AssertionError(
            f"spin temperature state failed polarization check: <2 S.n> = {pol}, expected {P}"
        )
    return rho


def opposed_spin_temperature_state(ops: OperatorSet, P: float, axis=(1.0, 0.0, 0.0)) -> np.ndarray:
    """Thermal-like state with the lower manifold's orientation inverted.

    rho ~ exp(beta [Pi_a F.n Pi_a - Pi_b F.n Pi_b]): each manifold keeps a
    spin temperature distribution but along opposite axes.  This is what a
    transverse spin temperature state turns into after a quarter period of
    manifold-opposed precession, and it is the state on which exchange
    collisions act nontrivially (a plain spin temperature state is their
    fixed point).
    """
    if not 0.0 <= P < 1.0:
        raise ValueError(f"polarization must satisfy 0 <= P < 1, got {P}")
    n = _axis_vector(axis)
    beta = np.log((1.0 + P) / (1.0 - P))
    Fn = sum(ni * Fi for ni, Fi in zip(n, ops.F))
    A = ops.Pi_a @ Fn @ ops.Pi_a - ops.Pi_b @ Fn @ ops.Pi_b
    w, V = np.linalg.eigh(A)
    rho = (V * np.exp(beta * w)) @ V.conj().T
    return rho / np.trace(rho).real


def stretched_state(ops: OperatorSet, axis=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Pure stretched state |F = I + 1/2, m = F> along the given axis (the P -> 1 limit)."""
    n = _axis_vector(axis)
    Fn = sum(ni * Fi for ni, Fi in zip(n, ops.F))
    w, V = np.linalg.eigh(Fn)
    top = V[:, np.argmax(w)]
    return np.outer(top, top.conj())


def rotation(ops: OperatorSet, axis, angle: float) -> np.ndarray:
    """Rotation matrix exp(-i angle F.axis)."""
    n = _axis_vector(axis)
    Fn = sum(ni * Fi for ni, Fi in zip(n, ops.F))
    w, V = np.linalg.eigh(Fn)
    return (V * np.exp(-1j * angle * w)) @ V.conj().T


def manifold_hamiltonian(ops: OperatorSet, B, gamma_e: float) -> np.ndarray:
    """Secular Zeeman Hamiltonian: both manifolds precess at gamma_e/(2I+1), in opposite senses.

    H = gamma_e/(2I+1) * [Pi_a (F.B) Pi_a - Pi_b (F.B) Pi_b]; hyperfine
    splitting is omitted, so inter-manifold blocks are exactly zero.
    """
    B = np.asarray(B, dtype=float)
    gamma = gamma_e / (ops.basis.I.two_I + 1)  # gamma_e / (2I+1)
    FB = sum(Bi * Fi for Bi, Fi in zip(B, ops.F))
    return gamma * (ops.Pi_a @ FB @ ops.Pi_a - ops.Pi_b @ FB @ ops.Pi_b)


def hyperfine_projection(basis: AtomBasis, rho: np.ndarray) -> np.ndarray:
    """Zero all coherences between the two hyperfine manifolds."""
    na = basis.two_F_upper + 1
    out = np.zeros_like(rho)
    out[:na, :na] = rho[:na, :na]
    out[na:, na:] = rho[na:, na:]
    return out


def pair_operators(basis_a: AtomBasis, basis_b: AtomBasis) -> PairOperatorSet:
    """Electron singlet/triplet projectors on the two-atom product space.

    Pi_S lifts the two-electron singlet projector 1/4 - S_a.S_b; both
    projectors act trivially on the nuclear factors.
    """
    ops_a = spin_operators(basis_a)
    ops_b = spin_operators(basis_b)
    da, db = basis_a.dim, basis_b.dim
    SdotS = sum(np.kron(ops_a.S[i], ops_b.S[i]) for i in range(3))
    Pi_S = 0.25 * np.eye(da * db) - SdotS
    Pi_T = np.eye(da * db) - Pi_S
    return PairOperatorSet(basis_a=basis_a, basis_b=basis_b, Pi_S=Pi_S, Pi_T=Pi_T)
