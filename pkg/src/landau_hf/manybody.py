"""Antisymmetric N-particle space over the truncated basis.

Conventions: a determinant is a strictly increasing tuple of occupied
single-particle indices; the reference many-body basis vector for occupation
(p_1 < ... < p_N) is the wedge e_{p_1} ^ ... ^ e_{p_N}.  Two-body matrix
elements are stored in physicists' order,

    v[a, b, g, d] = <e_a (x) e_b | V_12 | e_g (x) e_d>,

so a and g belong to the first particle, b and d to the second.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .basis import OrbitalSet
from .config import Grid, PhysicalConstants
from .errors import (ConvergenceFailure, DimensionMismatch, LengthMismatch,
                     NotOrthonormal, TooLarge, TruncationTooSmall)
from .potentials import PotentialSpec

DET_SPACE_CAP = 200_000


@dataclass(frozen=True)
class DeterminantBasis:
    K: int
    N: int
    occupations: np.ndarray          # (dim, N) int, rows sorted lexicographically
    index: dict

    @property
    def dim(self) -> int:
        return self.occupations.shape[0]

    def lookup(self, occ) -> int:
        return self.index[tuple(occ)]


def enumerate_determinants(K: int, N: int, cap: int = DET_SPACE_CAP) -> DeterminantBasis:
    """All C(K, N) increasing occupation tuples in lexicographic order."""
    if not (1 <= N <= K):
        raise DimensionMismatch(f"need 1 <= N <= K, got N={N}, K={K}")
    dim = math.comb(K, N)
    if dim > cap:
        raise TooLarge(f"determinant space C({K},{N}) = {dim} exceeds cap {cap}")
    occupations = np.array(list(itertools.combinations(range(K), N)), dtype=np.int64)
    index = {tuple(row): i for i, row in enumerate(occupations)}
    return DeterminantBasis(K=K, N=N, occupations=occupations, index=index)


@dataclass
class ManyBodyState:
    basis: DeterminantBasis
    coefficients: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))


def slater_overlap(orbs_a: np.ndarray, orbs_b: np.ndarray) -> complex:
    """det of the orbital overlap matrix; columns are orbitals."""
    A = np.asarray(orbs_a)
    B = np.asarray(orbs_b)
    if A.shape != B.shape:
        raise LengthMismatch(f"orbital sets have shapes {A.shape} vs {B.shape}")
    return complex(np.linalg.det(A.conj().T @ B))


@dataclass(frozen=True)
class InteractionTensor:
    """Dense v[a, b, g, d] with exchange symmetry and hermiticity enforced."""

    values: np.ndarray
    sup_norm: float

    @property
    def K(self) -> int:
        return self.values.shape[0]

    def is_zero(self) -> bool:
        return self.values.size == 0 or not np.any(self.values)


def two_body_tensor(potential: PotentialSpec, orbitals: OrbitalSet, grid: Grid,
                    threads: int = 1, sym_tol: float = 1e-8) -> InteractionTensor:
    """Quadrature of conj(phi_a(x)) conj(phi_b(y)) V(x;y) phi_g(x) phi_d(y).

    Separable kernels contract one rank at a time; tabulated kernels go
    through the dense pair matrix.  The raw tensor is checked against its
    exchange/hermiticity symmetries and then symmetrized.
    """
    oset = orbitals.sampled_on(grid)
    K = oset.size
    phi = oset.matrix()                      # (K, P)
    w = grid.weight
    potential.check_symmetry(grid)

    terms = potential.separable_terms(grid)
    v = np.zeros((K, K, K, K), dtype=np.complex128)
    if terms is not None:
        def one_term(term):
            c, f, g = term
            A = (phi.conj() * f.ravel()) @ phi.T * w      # <a| f |g>
            B = (phi.conj() * g.ravel()) @ phi.T * w      # <b| g |d>
            return c, A, B

        if threads > 1 and len(terms) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(one_term, terms))
        else:
            results = [one_term(t) for t in terms]
        for c, A, B in results:               # fixed order: deterministic sum
            v += c * np.einsum("ag,bd->abgd", A, B)
    else:
        vals = potential.pair_values(grid)
        dens = phi.conj()[:, None, :] * phi[None, :, :] * w   # (K, K, P)
        D = dens.reshape(K * K, -1)
        if threads > 1:
            rows = np.array_split(np.arange(D.shape[0]), threads)
            W = np.empty((D.shape[0], vals.shape[1]), dtype=np.complex128)

            def fill(block):
                W[block, :] = D[block, :] @ vals

            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(fill, rows))
        else:
            W = D @ vals
        v = (W @ D.T).reshape(K, K, K, K).transpose(0, 2, 1, 3)

    scale = max(float(np.max(np.abs(v))), 1.0)
    exch = np.max(np.abs(v - v.transpose(1, 0, 3, 2)))
    herm = np.max(np.abs(v - v.transpose(2, 3, 0, 1).conj()))
    if exch > sym_tol * scale or herm > sym_tol * scale:
        from .errors import SymmetryViolation
        raise SymmetryViolation(
            f"tensor symmetry deviation: exchange {exch:.3e}, hermitian {herm:.3e}")
    v = 0.5 * (v + v.transpose(1, 0, 3, 2))
    v = 0.5 * (v + v.transpose(2, 3, 0, 1).conj())
    return InteractionTensor(values=v, sup_norm=potential.sup_norm())


def _pair_element(v: np.ndarray, p, q, r, s) -> complex:
    """Antisymmetrized pair element <pq||rs> = v[p,q,r,s] - v[p,q,s,r]."""
    return v[p, q, r, s] - v[p, q, s, r]


def assemble_hamiltonian(basis: DeterminantBasis, energies: np.ndarray,
                         tensor: InteractionTensor | None) -> sp.csr_matrix:
    """One-body diagonal plus two-body elements between determinants
    differing in at most two occupied indices, with fermionic signs from
    aligning the occupation lists.
    """
    energies = np.asarray(energies, dtype=float)
    if energies.shape[0] != basis.K:
        raise DimensionMismatch(
            f"{energies.shape[0]} one-body energies for K={basis.K}")
    occ = basis.occupations
    dim, N = occ.shape
    diag_1b = energies[occ].sum(axis=1).astype(np.complex128)

    if tensor is None or tensor.is_zero():
        return sp.diags(diag_1b, format="csr")

    v = tensor.values
    if v.shape[0] != basis.K:
        raise DimensionMismatch(f"tensor rank {v.shape[0]} for K={basis.K}")

    rows, cols, vals = [], [], []
    full = range(basis.K)
    for i in range(dim):
        occ_i = occ[i]
        occ_set = set(occ_i.tolist())
        pos = {p: k for k, p in enumerate(occ_i.tolist())}
        virt = [q for q in full if q not in occ_set]

        elem = diag_1b[i]
        for k, p in enumerate(occ_i):
            for r in occ_i[k + 1:]:
                elem += _pair_element(v, p, r, p, r)
        rows.append(i); cols.append(i); vals.append(elem)

        # single replacement p -> q, upper triangle only
        for p in occ_i:
            for q in virt:
                new = sorted(occ_set - {p} | {q})
                j = basis.index[tuple(new)]
                if j <= i:
                    continue
                lo, hi = (p, q) if p < q else (q, p)
                between = sum(1 for r in occ_i if lo < r < hi)
                sign = -1.0 if between % 2 else 1.0
                elem = sign * sum(_pair_element(v, p, r, q, r)
                                  for r in occ_i if r != p)
                rows.append(i); cols.append(j); vals.append(elem)

        # double replacement (p1, p2) -> (q1, q2), upper triangle only
        for (p1, p2) in itertools.combinations(occ_i.tolist(), 2):
            for (q1, q2) in itertools.combinations(virt, 2):
                new = sorted(occ_set - {p1, p2} | {q1, q2})
                j = basis.index[tuple(new)]
                if j <= i:
                    continue
                new_pos = {r: k for k, r in enumerate(new)}
                parity = pos[p1] + pos[p2] + new_pos[q1] + new_pos[q2]
                sign = -1.0 if parity % 2 else 1.0
                elem = sign * _pair_element(v, p1, p2, q1, q2)
                rows.append(i); cols.append(j); vals.append(elem)

    upper = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim),
                          dtype=np.complex128).tocsr()
    lower = sp.triu(upper, k=1).conj().T
    return (upper + lower).tocsr()


@dataclass(frozen=True)
class FillingSpec:
    """N = (filled_levels) * M + remainder, remainder in 0..M-1.

    filled_levels counts completely filled levels; for N < M it is zero and
    the partially filled level is the lowest one.
    """

    N: int
    M: int
    filled_levels: int
    remainder: int

    @classmethod
    def from_counts(cls, N: int, M: int) -> "FillingSpec":
        if N < 1 or M < 1:
            raise DimensionMismatch("need N >= 1 and M >= 1")
        q, r = divmod(N, M)
        return cls(N=N, M=M, filled_levels=q, remainder=r)

    def __post_init__(self):
        if self.filled_levels * self.M + self.remainder != self.N:
            raise DimensionMismatch("inconsistent filling decomposition")

    @property
    def nu(self) -> int:
        """Index of the highest completely filled level (-1 if none)."""
        return self.filled_levels - 1

    @property
    def degeneracy(self) -> int:
        return math.comb(self.M, self.remainder)


def noninteracting_ground_state(filling: FillingSpec, level_energies) -> tuple[float, list]:
    """Minimal total one-body energy and every occupation set attaining it.

    Fill the lowest levels completely (M states each) and distribute the
    remainder over the next level in all C(M, r) ways.
    """
    level_energies = np.asarray(level_energies, dtype=float)
    q, r, M = filling.filled_levels, filling.remainder, filling.M
    levels_needed = q + (1 if r > 0 else 0)
    if levels_needed > level_energies.shape[0]:
        raise TruncationTooSmall(
            f"need level {levels_needed - 1} but only "
            f"{level_energies.shape[0]} levels supplied")
    energy = float(M * level_energies[:q].sum())
    if r > 0:
        energy += r * float(level_energies[q])
    core = [n * M + m for n in range(q) for m in range(M)]
    if r == 0:
        return energy, [tuple(core)]
    sets = [tuple(core + [q * M + m for m in combo])
            for combo in itertools.combinations(range(M), r)]
    return energy, sets


def embed_wedge(columns: np.ndarray, basis: DeterminantBasis) -> np.ndarray:
    """Coefficients of column_1 ^ ... ^ column_N on the reference determinants.

    The coefficient on occupation D is det of the N x N submatrix of rows D;
    the map is multilinear and needs no orthonormality.
    """
    C = np.asarray(columns)
    if C.shape != (basis.K, basis.N):
        raise DimensionMismatch(f"expected ({basis.K}, {basis.N}), got {C.shape}")
    sub = C[basis.occupations, :]            # (dim, N, N)
    return np.linalg.det(sub)


def embed_slater(phase: complex, orbitals: np.ndarray,
                 basis: DeterminantBasis, gram_tol: float = 1e-6) -> ManyBodyState:
    """Many-body coefficients of phase * (orthonormal orbital wedge)."""
    C = np.asarray(orbitals)
    gram = C.conj().T @ C
    dev = float(np.max(np.abs(gram - np.eye(C.shape[1]))))
    if dev > gram_tol:
        raise NotOrthonormal(f"orbital Gram deviates by {dev:.3e}")
    return ManyBodyState(basis=basis, coefficients=phase * embed_wedge(C, basis))


class ExactPropagator:
    """exp(-i H t / hbar) through a cached dense eigendecomposition."""

    def __init__(self, H, hbar: float = 1.0):
        Hd = H.toarray() if sp.issparse(H) else np.asarray(H)
        self.hbar = hbar
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(Hd)

    def advance(self, psi0: np.ndarray, t: float) -> np.ndarray:
        amps = self.eigenvectors.conj().T @ psi0
        amps = amps * np.exp(-1j * self.eigenvalues * t / self.hbar)
        return self.eigenvectors @ amps


def _lanczos_expm(H, psi: np.ndarray, t: float, hbar: float,
                  tol: float = 1e-10, m_max: int = 40,
                  max_substeps: int = 100_000) -> np.ndarray:
    """Krylov propagation with full reorthogonalization and step control.

    Each substep builds a Lanczos basis from the current vector, exponentiates
    the tridiagonal projection, and halves the substep until the residual
    estimate beta_next * |last component| * tau / hbar meets the tolerance.
    """
    dim = psi.shape[0]
    m_max = min(m_max, dim)
    remaining = t
    current = psi.astype(np.complex128).copy()
    substeps = 0
    sign = 1.0 if t >= 0 else -1.0
    while sign * remaining > 0:
        beta0 = np.linalg.norm(current)
        if beta0 == 0.0:
            return current
        V = np.empty((m_max, dim), dtype=np.complex128)
        alpha = np.zeros(m_max)
        beta = np.zeros(max(m_max - 1, 1))
        V[0] = current / beta0
        m = m_max
        beta_next = 0.0
        invariant = False
        for j in range(m_max):
            w = H @ V[j]
            alpha[j] = np.real(np.vdot(V[j], w))
            w = w - alpha[j] * V[j]
            if j > 0:
                w = w - beta[j - 1] * V[j - 1]
            # full reorthogonalization keeps the basis clean at small m
            for k in range(j + 1):
                w -= np.vdot(V[k], w) * V[k]
            nrm = float(np.linalg.norm(w))
            if j == m_max - 1:
                beta_next = nrm
                break
            if nrm < 1e-14:
                m = j + 1
                invariant = True
                break
            beta[j] = nrm
            V[j + 1] = w / nrm
        if m == dim:
            invariant = True

        tau = remaining
        while True:
            evals, evecs = eigh_tridiagonal(alpha[:m], beta[:m - 1])
            small = evecs @ (np.exp(-1j * evals * tau / hbar) * evecs[0, :].conj())
            err = 0.0 if invariant else (beta0 * beta_next * abs(tau) / hbar
                                         * abs(small[m - 1]))
            if err <= tol:
                break
            if abs(tau) < 1e-12 * max(abs(t), 1e-30):
                raise ConvergenceFailure("Krylov step size underflow")
            tau *= 0.5
            substeps += 1
            if substeps > max_substeps:
                raise ConvergenceFailure("too many Krylov substeps")
        current = beta0 * (V[:m].T @ small)
        remaining -= tau
        substeps += 1
        if substeps > max_substeps:
            raise ConvergenceFailure("too many Krylov substeps")
    return current


def evolve_exact(state: ManyBodyState, H, t: float,
                 constants: PhysicalConstants, dense_cutoff: int = 2000,
                 krylov_tol: float = 1e-10) -> ManyBodyState:
    """exp(-i H t / hbar) applied to the state.

    Dense eigendecomposition below the cutoff dimension, Lanczos/Krylov with
    per-step tolerance above it.
    """
    psi = state.coefficients
    if psi.shape[0] != H.shape[0]:
        raise DimensionMismatch(
            f"state dim {psi.shape[0]} vs operator dim {H.shape[0]}")
    if H.shape[0] <= dense_cutoff:
        out = ExactPropagator(H, constants.hbar).advance(psi, t)
    else:
        out = _lanczos_expm(H, psi, t, constants.hbar, tol=krylov_tol)
    return ManyBodyState(basis=state.basis, coefficients=out)
