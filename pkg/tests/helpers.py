"""Independent oracles used by the test suite.

Everything here works in the full K^N tensor product space via explicit
permutation sums and Kronecker products, deliberately avoiding the
determinant-based code paths under test.
"""

import itertools
import math

import numpy as np


def perm_sign(perm) -> float:
    s = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm))
            if perm[i] > perm[j])
    return -1.0 if s % 2 else 1.0


def wedge_tensor(columns: np.ndarray) -> np.ndarray:
    """(1/sqrt(N!)) sum_sigma sign(sigma) c_{sigma(1)} x ... x c_{sigma(N)}."""
    K, N = columns.shape
    out = np.zeros(K ** N, dtype=complex)
    for perm in itertools.permutations(range(N)):
        vec = columns[:, perm[0]]
        for k in perm[1:]:
            vec = np.kron(vec, columns[:, k])
        out += perm_sign(perm) * vec
    return out / math.sqrt(math.factorial(N))


def occupation_tensor(occ, K: int) -> np.ndarray:
    cols = np.zeros((K, len(occ)), dtype=complex)
    for j, p in enumerate(occ):
        cols[p, j] = 1.0
    return wedge_tensor(cols)


def dense_hamiltonian(K: int, N: int, energies, v: np.ndarray) -> np.ndarray:
    """One-body sum plus all pair interactions, on the K^N tensor space."""
    dim = K ** N
    H = np.zeros((dim, dim), dtype=complex)
    h1 = np.diag(np.asarray(energies, dtype=float)).astype(complex)
    eye = np.eye(K, dtype=complex)
    for i in range(N):
        mats = [h1 if k == i else eye for k in range(N)]
        op = mats[0]
        for m in mats[1:]:
            op = np.kron(op, m)
        H += op
    for i, j in itertools.combinations(range(N), 2):
        T = np.eye(dim, dtype=complex).reshape([K] * N + [dim])
        T2 = np.moveaxis(T, (i, j), (0, 1))
        out = np.einsum("abgd,gd...->ab...", v, T2)
        H += np.moveaxis(out, (0, 1), (i, j)).reshape(dim, dim)
    return H


def projected_hamiltonian(det_basis, energies, v: np.ndarray) -> np.ndarray:
    """Tensor-space Hamiltonian projected onto the reference determinants."""
    K, N = det_basis.K, det_basis.N
    Hd = dense_hamiltonian(K, N, energies, v)
    S = np.stack([occupation_tensor(occ, K) for occ in det_basis.occupations])
    return S.conj() @ Hd @ S.T


def partial_trace_rdm(psi_tensor: np.ndarray, K: int, N: int) -> np.ndarray:
    """N * trace over particles 2..N of |psi><psi|."""
    psi = psi_tensor.reshape(K, K ** (N - 1))
    return N * psi @ psi.conj().T


def random_interaction_tensor(rng, K: int, P: int = 9, scale: float = 1.0):
    """Symmetric, Hermitian 4-index tensor from a random symmetric kernel."""
    Vmat = rng.normal(size=(P, P)) * scale
    Vmat = 0.5 * (Vmat + Vmat.T)
    phi = rng.normal(size=(K, P)) + 1j * rng.normal(size=(K, P))
    w = 1.0 / P
    G = (phi.conj() @ phi.T) * w
    L = np.linalg.cholesky(G)
    phi = np.linalg.solve(L, phi)
    D = (phi.conj()[:, None, :] * phi[None, :, :] * w).reshape(K * K, P)
    v = (D @ Vmat @ D.T).reshape(K, K, K, K).transpose(0, 2, 1, 3)
    return v, float(np.abs(Vmat).max())


def midpoint_quad_1d(f, lo: float, hi: float, n: int) -> float:
    x = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    return float(np.sum(f(x)) * (hi - lo) / n)
