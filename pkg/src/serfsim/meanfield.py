"""Mean-field spin dynamics of a single species under exchange collisions.

The density matrix of one atom evolves under magnetic precession, a
finite lifetime T1 (uniform decay toward the maximally mixed state) and
spin-exchange collisions in their low-polarization linear form.  The
exchange superoperator combines the electron-randomizing kernel
phi(rho) = rho/4 + sum_i S_i rho S_i with the linear polarization
feedback (4/dim) sum_k Tr(S_k rho) S_k; the feedback term restores the
ensemble electron polarization after a collision and makes the exchange
term conserve every component of <F>, which is what suppresses exchange
relaxation entirely for I = 1/2.

The transverse decoherence rate Gamma and effective gyromagnetic ratio
gamma_eff at a field B_z are read off the dominant eigenmode of the
Liouvillian restricted to the single-quantum (|Delta m| = 1) coherence
sector.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf

import numpy as np

from .spincore import (
    AtomBasis,
    NuclearSpin,
    OperatorSet,
    build_basis,
    manifold_hamiltonian,
    spin_operators,
)

__all__ = [
    "MeanFieldParams",
    "RelaxationResult",
    "liouvillian",
    "transverse_mode",
    "sweep_field",
    "evolve",
    "default_field_grid",
    "GEOMAGNETIC_FIELD_T",
]

# geomagnetic-scale reference field (tens of uT), recorded in sweep metadata
GEOMAGNETIC_FIELD_T = 50e-6


@dataclass(frozen=True)
class MeanFieldParams:
    """Single-species parameters: nuclear spin, exchange rate, lifetime, field."""

    I: NuclearSpin
    R_se: float  # spin-exchange rate, 1/s
    T1: float  # longitudinal lifetime, s (may be math.inf)
    gamma_e: float  # electron gyromagnetic ratio, rad/(s T)
    B_z: float  # tesla

    def __post_init__(self):
        if self.R_se < 0:
            raise ValueError("R_se must be >= 0")
        if not self.T1 > 0:
            raise ValueError("T1 must be positive (math.inf allowed)")

    def with_field(self, B_z: float) -> "MeanFieldParams":
        return MeanFieldParams(self.I, self.R_se, self.T1, self.gamma_e, B_z)


@dataclass(frozen=True)
class RelaxationResult:
    """Dominant transverse mode at one field point."""

    B_z: float
    Gamma: float  # 1/s, -Re(lambda)
    omega: float  # rad/s, |Im(lambda)|
    gamma_eff: float  # rad/(s T), omega / B_z
    mode_overlap: float  # in (0, 1]
    degenerate: bool  # top-two overlaps split by < 5%


def _vec_index(dim: int, i: int, j: int) -> int:
    # row-major vectorization: vec(rho)[i*dim + j] = rho[i, j]
    return i * dim + j


def _build_operators(params: MeanFieldParams) -> tuple[AtomBasis, OperatorSet]:
    basis = build_basis(params.I)
    return basis, spin_operators(basis)


def _hyperfine_sector_mask(basis: AtomBasis) -> np.ndarray:
    F = basis.F_values
    keep = F[:, None] == F[None, :]
    return keep.reshape(-1)


def liouvillian(params: MeanFieldParams, ops: OperatorSet | None = None) -> np.ndarray:
    """Superoperator L with d vec(rho)/dt = L vec(rho), inter-manifold coherences projected out.

    Terms: -i[H, rho] with the secular manifold Hamiltonian,
    R_se * (phi(rho) + (4/dim) sum_k Tr(S_k rho) S_k - rho), and
    (1/T1) * (identity/dim - rho).
    """
    basis = build_basis(params.I)
    if ops is None:
        ops = spin_operators(basis)
    dim = basis.dim
    eye = np.eye(dim)

    H = manifold_hamiltonian(ops, (0.0, 0.0, params.B_z), params.gamma_e)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))

    if params.R_se > 0:
        phi = 0.25 * np.kron(eye, eye).astype(complex)
        for S in ops.S:
            phi += np.kron(S, S.T)
        feedback = np.zeros((dim * dim, dim * dim), dtype=complex)
        for S in ops.S:
            feedback += np.outer(S.reshape(-1), S.T.reshape(-1))
        feedback *= 4.0 / dim
        L = L + params.R_se * (phi + feedback - np.kron(eye, eye))

    if params.T1 != inf:
        ident_vec = eye.reshape(-1) / dim
        trace_row = eye.reshape(-1)
        L = L + (np.outer(ident_vec, trace_row) - np.kron(eye, eye)) / params.T1

    keep = _hyperfine_sector_mask(basis)
    P = np.diag(keep.astype(float))
    return P @ L @ P


def _single_quantum_indices(basis: AtomBasis) -> np.ndarray:
    """Vectorized indices of intra-manifold matrix elements with m_row - m_col = +1."""
    F = basis.F_values
    m = basis.m_values
    idx = []
    for i in range(basis.dim):
        for j in range(basis.dim):
            if F[i] == F[j] and abs(m[i] - m[j] - 1.0) < 1e-9:
                idx.append(_vec_index(basis.dim, i, j))
    return np.array(idx, dtype=int)


def transverse_mode(params: MeanFieldParams, ops: OperatorSet | None = None) -> RelaxationResult:
    """Dominant single-quantum eigenmode: Gamma, precession frequency and gamma_eff.

    The Liouvillian block-diagonalizes over coherence order; the
    |Delta m| = 1 block is eigendecomposed and the mode with the largest
    overlap with the upper-manifold transverse observable F_plus_a is
    returned.  Ties within 5% of overlap are flagged as degenerate.
    """
    if params.B_z <= 0:
        raise ValueError("transverse_mode requires B_z > 0")
    basis = build_basis(params.I)
    if ops is None:
        ops = spin_operators(basis)
    L = liouvillian(params, ops)
    sector = _single_quantum_indices(basis)
    Ls = L[np.ix_(sector, sector)]

    evals, evecs = np.linalg.eig(Ls)
    f = ops.F_plus_a.reshape(-1)[sector]
    f = f / np.linalg.norm(f)
    overlaps = np.abs(evecs.conj().T @ f) / np.linalg.norm(evecs, axis=0)

    order = np.argsort(overlaps)[::-1]
    best = order[0]
    degenerate = False
    if len(order) > 1:
        o1, o2 = overlaps[order[0]], overlaps[order[1]]
        if o1 > 0 and (o1 - o2) / o1 < 0.05:
            degenerate = True
    lam = evals[best]
    Gamma = -lam.real
    omega = abs(lam.imag)
    return RelaxationResult(
        B_z=params.B_z,
        Gamma=Gamma,
        omega=omega,
        gamma_eff=omega / params.B_z,
        mode_overlap=float(overlaps[best]),
        degenerate=degenerate,
    )


def sweep_field(params: MeanFieldParams, B_grid) -> list[RelaxationResult]:
    """transverse_mode at each field of an ascending positive grid."""
    B_grid = list(B_grid)
    if any(b <= 0 for b in B_grid):
        raise ValueError("field grid must be positive")
    if any(b2 < b1 for b1, b2 in zip(B_grid, B_grid[1:])):
        raise ValueError("field grid must be sorted ascending")
    basis = build_basis(params.I)
    ops = spin_operators(basis)
    return [transverse_mode(params.with_field(B), ops) for B in B_grid]


def default_field_grid(params: MeanFieldParams, n_points: int = 60,
                       ratio_min: float = 1e-3, ratio_max: float = 1e3) -> np.ndarray:
    """Logarithmic field grid spanning gamma_e * B / R_se in [ratio_min, ratio_max]."""
    R = params.R_se if params.R_se > 0 else 1e6
    return np.geomspace(ratio_min * R / params.gamma_e, ratio_max * R / params.gamma_e, n_points)


def evolve(rho0: np.ndarray, params: MeanFieldParams, t_grid) -> np.ndarray:
    """Trajectory of rho on t_grid under the Liouvillian (exact eigendecomposition stepping)."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid[0] < 0 or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be ascending and start at t >= 0")
    basis = build_basis(params.I)
    dim = basis.dim
    if rho0.shape != (dim, dim):
        raise ValueError(f"rho0 has shape {rho0.shape}, expected {(dim, dim)}")
    L = liouvillian(params)
    evals, V = np.linalg.eig(L)
    v0 = np.linalg.solve(V, rho0.reshape(-1))
    out = np.empty((len(t_grid), dim, dim), dtype=complex)
    for k, t in enumerate(t_grid):
        out[k] = (V @ (np.exp(evals * t) * v0)).reshape(dim, dim)
    return out
