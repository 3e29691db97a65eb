"""Finite-volume eigenbasis of a charged particle in a uniform magnetic field.

Gauge convention: vector potential A = B * (0, x1) throughout, with the dual
potential A_dual = B * (x2, 0) hard-coded inside the magnetic translations.
In this gauge the kinetic operator acting on a wavefunction f reads

    H f = (hbar^2 / 2m) * (-d11 f - d22 f + 2i b x1 d2 f + b^2 x1^2 f),

with b = qB/(hbar c), and the boundary conditions on the box are

    f(-L1/2, x2) = exp(-i 2 pi M x2 / L2) f(L1/2, x2),
    f(x1, -L2/2) = f(x1, L2/2).

The orthonormal eigenbasis phi_{n,m} (n = level index, m = 0..M-1) is built by
summing translated copies of the normalized infinite-volume eigenstates over
the x1 lattice until the Gaussian tail is negligible; level n has energy
E_n = (hbar^2 / 2m) b (2n + 1), independent of m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import Grid, PhysicalConstants, SimulationConfig, inner_product
from .errors import (DegreeOutOfRange, GridTooCoarse, OffGridDisplacement,
                     OrthonormalityFailure, TruncationTooSmall)

MAX_HERMITE_DEGREE = 512


class HermiteEvaluator:
    """Orthonormal Hermite functions by the stable three-term recurrence.

    h_0(z) = pi^(-1/4) exp(-z^2 / 2)
    h_1(z) = sqrt(2) z h_0(z)
    h_{n+1}(z) = sqrt(2/(n+1)) z h_n(z) - sqrt(n/(n+1)) h_{n-1}(z)

    Normalized so that integral h_n h_m dz = delta_{nm}; factorials and powers
    of two are never formed explicitly.
    """

    def __init__(self, max_degree: int = MAX_HERMITE_DEGREE):
        if max_degree < 0:
            raise DegreeOutOfRange("max_degree must be >= 0")
        self.max_degree = max_degree

    def table(self, z) -> np.ndarray:
        """All h_n(z) for n = 0..max_degree, stacked on the leading axis."""
        z = np.asarray(z, dtype=float)
        out = np.empty((self.max_degree + 1,) + z.shape)
        h0 = np.pi ** (-0.25) * np.exp(-0.5 * z * z)
        out[0] = h0
        if self.max_degree >= 1:
            out[1] = math.sqrt(2.0) * z * h0
        for n in range(1, self.max_degree):
            out[n + 1] = (math.sqrt(2.0 / (n + 1)) * z * out[n]
                          - math.sqrt(n / (n + 1)) * out[n - 1])
        return out

    def value(self, n: int, z):
        if not (0 <= n <= self.max_degree):
            raise DegreeOutOfRange(f"degree {n} outside [0, {self.max_degree}]")
        z = np.asarray(z, dtype=float)
        hm1 = np.zeros_like(z)
        h = np.pi ** (-0.25) * np.exp(-0.5 * z * z)
        for k in range(n):
            h, hm1 = (math.sqrt(2.0 / (k + 1)) * z * h
                      - math.sqrt(k / (k + 1)) * hm1), h
        return h


def hermite_function(n: int, z, max_degree: int = MAX_HERMITE_DEGREE):
    """h_n(z) for scalar or array z."""
    return HermiteEvaluator(max_degree).value(n, z)


def landau_level(n: int, constants: PhysicalConstants) -> float:
    """E_n = (hbar^2 / 2m) b (2n+1), equivalently hbar*omega_c*(n + 1/2)."""
    if n < 0:
        raise DegreeOutOfRange("level index must be >= 0")
    b = constants.reduced_field
    return constants.hbar ** 2 / (2.0 * constants.mass) * b * (2 * n + 1)


def infinite_volume_profile(n: int, k2: float, x1, reduced_field: float):
    """x1 profile of the plane-wave eigenstate: b^(1/4) h_n(sqrt(b)(x1 - k2/b))."""
    b = reduced_field
    return b ** 0.25 * hermite_function(n, math.sqrt(b) * (np.asarray(x1) - k2 / b))


def infinite_volume_orbital(n: int, k2: float, x1, x2, reduced_field: float):
    """Plane wave in x2 times a displaced oscillator profile in x1."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return np.exp(1j * k2 * x2) * infinite_volume_profile(n, k2, x1, reduced_field)


@dataclass(frozen=True)
class OrbitalField:
    """Complex field sampled on a grid, optionally tagged with (n, m) labels."""

    grid: Grid
    values: np.ndarray
    n: int | None = None
    m: int | None = None
    flux_count: int | None = None

    def norm(self) -> float:
        return math.sqrt(abs(inner_product(self.values, self.values, self.grid)))


def grid_reduced_field(grid: Grid, flux_count: int) -> float:
    """b consistent with the quantization identity on this box."""
    return 2.0 * math.pi * flux_count / (grid.L1 * grid.L2)


def finite_volume_orbital(n: int, m: int, grid: Grid, flux_count: int,
                          lattice_cut: int = 0,
                          tail_tol: float = 1e-14) -> OrbitalField:
    """Eigenstate of the boxed kinetic operator with labels (n, m).

    Built as the lattice sum over x1 translations of the infinite-volume
    states; each summand is an outer product of an x1 profile and an x2
    harmonic, so the sum is assembled separably.  With lattice_cut = 0 the
    sum is extended until the next shell's sampled maximum falls below
    tail_tol times the accumulated peak; an explicit cut is checked the same
    way and rejected if too small.
    """
    M = flux_count
    if not (0 <= m < M):
        raise DegreeOutOfRange(f"degeneracy index m={m} outside 0..{M - 1}")
    b = grid_reduced_field(grid, M)
    sqrt_b = math.sqrt(b)
    prefactor = b ** 0.25 / math.sqrt(grid.L2)
    evaluator = HermiteEvaluator(max(n, 1))

    def shell(l1: int) -> tuple[np.ndarray, np.ndarray, float]:
        profile = evaluator.value(n, sqrt_b * (grid.x1 + (l1 - m / M) * grid.L1))
        harmonic = np.exp(2j * np.pi * (m - M * l1) * grid.x2 / grid.L2)
        return profile, harmonic, float(np.max(np.abs(profile)))

    turn = math.sqrt(2 * n + 1.0) / sqrt_b + grid.L1  # beyond this, shells decay
    values = np.zeros((grid.G1, grid.G2), dtype=np.complex128)
    peak = 0.0
    if lattice_cut > 0:
        cuts = range(-lattice_cut, lattice_cut + 1)
        for l1 in cuts:
            profile, harmonic, mx = shell(l1)
            peak = max(peak, mx)
            values += np.outer(profile, harmonic)
        for l1 in (lattice_cut + 1, -(lattice_cut + 1)):
            _, _, mx = shell(l1)
            if mx > tail_tol * peak:
                raise TruncationTooSmall(
                    f"lattice_cut={lattice_cut} leaves tail {mx / peak:.2e} "
                    f"of peak for orbital (n={n}, m={m})")
    else:
        l1 = 0
        while True:
            hit = False
            for sgn in ((1,) if l1 == 0 else (1, -1)):
                profile, harmonic, mx = shell(sgn * l1)
                center = abs((sgn * l1 - m / M)) * grid.L1
                if mx > tail_tol * max(peak, 1e-300) or center <= turn:
                    values += np.outer(profile, harmonic)
                    peak = max(peak, mx)
                    hit = True
            if not hit:
                break
            l1 += 1
            if l1 > 10_000:
                raise TruncationTooSmall("lattice sum failed to converge")
    values *= prefactor
    return OrbitalField(grid=grid, values=values, n=n, m=m, flux_count=M)


def magnetic_translate(field: OrbitalField, a, flux_count: int | None = None) -> OrbitalField:
    """Translate by a = (a1, a2) and multiply by exp(-i b a1 x2).

    Displacements must be integer multiples of the grid spacing so the shift
    is exact.  Samples pulled across the x1 seam pick up the boundary phase
    exp(i 2 pi M x2 / L2) per crossing (the x2 seam is plainly periodic), i.e.
    the grid data is read through its boundary-condition-consistent extension.
    """
    grid = field.grid
    M = flux_count if flux_count is not None else field.flux_count
    if M is None:
        raise ValueError("flux_count needed: pass it or use a labelled field")
    a1, a2 = float(a[0]), float(a[1])
    s1f, s2f = a1 / grid.h1, a2 / grid.h2
    s1, s2 = round(s1f), round(s2f)
    if abs(s1f - s1) > 1e-9 or abs(s2f - s2) > 1e-9:
        raise OffGridDisplacement(
            f"displacement {a} is not an integer multiple of ({grid.h1}, {grid.h2})")
    b = grid_reduced_field(grid, M)
    idx = np.arange(grid.G1) + s1
    src = idx % grid.G1
    wraps = idx // grid.G1                      # crossings of the x1 seam
    shifted = np.roll(field.values, -s2, axis=1)[src, :]
    phase_bc = np.exp(2j * np.pi * M * np.outer(wraps, grid.x2 + a2) / grid.L2)
    phase_tr = np.exp(-1j * b * a1 * grid.x2)[None, :]
    return OrbitalField(grid=grid, values=phase_tr * phase_bc * shifted,
                        n=field.n, m=field.m, flux_count=M)


def _shift_x1(values: np.ndarray, s: int, grid: Grid, flux_count: int) -> np.ndarray:
    """values at (x1 + s*h1, x2) read through the twisted-periodic extension."""
    idx = np.arange(grid.G1) + s
    out = values[idx % grid.G1, :].copy()
    wraps = idx // grid.G1
    rows = wraps != 0
    if np.any(rows):
        phase = np.exp(2j * np.pi * flux_count
                       * np.outer(wraps[rows], grid.x2) / grid.L2)
        out[rows, :] *= phase
    return out


def apply_landau_hamiltonian(field: OrbitalField, constants: PhysicalConstants,
                             flux_count: int | None = None) -> OrbitalField:
    """Kinetic operator via 4th-order centered differences.

    Stencil points crossing the box edge are evaluated through the magnetic-
    periodic extension, so the residual against E_n * phi measures only the
    O(h^4) finite-difference truncation for a true eigenstate.
    """
    grid = field.grid
    M = flux_count if flux_count is not None else field.flux_count
    if M is None:
        raise ValueError("flux_count needed: pass it or use a labelled field")
    b = constants.reduced_field
    ell_B = 1.0 / math.sqrt(b)
    if grid.h1 > ell_B / 8.0 or grid.h2 > ell_B / 8.0:
        raise GridTooCoarse(
            f"need >= 8 points per magnetic length {ell_B:.3g}; "
            f"spacings are ({grid.h1:.3g}, {grid.h2:.3g})")

    f = field.values
    fp1 = _shift_x1(f, 1, grid, M)
    fm1 = _shift_x1(f, -1, grid, M)
    fp2 = _shift_x1(f, 2, grid, M)
    fm2 = _shift_x1(f, -2, grid, M)
    d11 = (-fp2 + 16.0 * fp1 - 30.0 * f + 16.0 * fm1 - fm2) / (12.0 * grid.h1 ** 2)

    gp1 = np.roll(f, -1, axis=1)
    gm1 = np.roll(f, 1, axis=1)
    gp2 = np.roll(f, -2, axis=1)
    gm2 = np.roll(f, 2, axis=1)
    d22 = (-gp2 + 16.0 * gp1 - 30.0 * f + 16.0 * gm1 - gm2) / (12.0 * grid.h2 ** 2)
    d2 = (-gp2 + 8.0 * gp1 - 8.0 * gm1 + gm2) / (12.0 * grid.h2)

    x1 = grid.x1[:, None]
    out = (-d11 - d22 + 2j * b * x1 * d2 + (b * x1) ** 2 * f)
    out *= constants.hbar ** 2 / (2.0 * constants.mass)
    return OrbitalField(grid=grid, values=out, n=field.n, m=field.m, flux_count=M)


@lru_cache(maxsize=None)
def _edge_weights(p: int) -> np.ndarray:
    """Lagrange weights extrapolating midpoint samples to the nearest box edge.

    Nodes sit at distances (j + 1/2) * h from the edge, j = 0..p-1; the
    returned weights evaluate the degree-(p-1) interpolant at distance 0.
    """
    d = np.arange(p) + 0.5
    w = np.empty(p)
    for j in range(p):
        others = np.delete(d, j)
        w[j] = np.prod(others / (others - d[j]))
    return w


def boundary_residuals(field: OrbitalField, flux_count: int | None = None,
                       stencil: int = 12) -> tuple[float, float]:
    """Boundary-condition mismatch at the two seams.

    The grid holds midpoint samples only, so the field is extrapolated to
    each box edge one-sidedly (degree stencil-1 polynomial) from both sides
    and the two edge values are compared, with the x1 comparison twisted by
    exp(-i 2 pi M x2 / L2).  Smooth compliant fields give residuals at the
    extrapolation-error level; incompatible fields give O(1).
    """
    grid = field.grid
    M = flux_count if flux_count is not None else field.flux_count
    if M is None:
        raise ValueError("flux_count needed: pass it or use a labelled field")
    f = field.values
    p1 = min(stencil, grid.G1)
    p2 = min(stencil, grid.G2)
    w1 = _edge_weights(p1)
    w2 = _edge_weights(p2)

    left = np.tensordot(w1, f[:p1, :], axes=(0, 0))          # value at x1=-L1/2
    right = np.tensordot(w1, f[grid.G1 - 1 - np.arange(p1), :], axes=(0, 0))
    twist = np.exp(-2j * np.pi * M * grid.x2 / grid.L2)
    res1 = float(np.max(np.abs(left - twist * right)))

    bottom = np.tensordot(w2, f[:, :p2], axes=(0, 1))        # value at x2=-L2/2
    top = np.tensordot(w2, f[:, grid.G2 - 1 - np.arange(p2)], axes=(0, 1))
    res2 = float(np.max(np.abs(bottom - top)))
    return res1, res2


def check_magnetic_bc(field: OrbitalField, flux_count: int | None = None) -> float:
    """Max boundary-condition residual over both seams (see boundary_residuals)."""
    r1, r2 = boundary_residuals(field, flux_count)
    return max(r1, r2)


@dataclass(frozen=True)
class OrbitalSet:
    """Orthonormal truncated basis, ordered (n, m) lexicographically."""

    orbitals: tuple[OrbitalField, ...]
    gram: np.ndarray
    energies: np.ndarray
    n_max: int
    flux_count: int
    grid: Grid
    lattice_cut: int
    tail_tol: float

    @property
    def size(self) -> int:
        return len(self.orbitals)

    def index(self, n: int, m: int) -> int:
        return n * self.flux_count + m

    def matrix(self) -> np.ndarray:
        """(K, P) array of orbital samples, rows ordered like the basis."""
        return np.stack([orb.values.ravel() for orb in self.orbitals])

    def gram_deviation(self) -> float:
        return float(np.max(np.abs(self.gram - np.eye(self.size))))

    def sampled_on(self, grid: Grid, gram_tol: float = 1e-8) -> "OrbitalSet":
        """Re-evaluate the same labelled basis on another grid."""
        if grid == self.grid:
            return self
        return _build(self.n_max, self.flux_count, grid, self.lattice_cut,
                      self.tail_tol, self.energies, gram_tol=gram_tol)


def _nyquist_guard(n_max: int, flux_count: int, grid: Grid, cut_hint: int):
    """Reject grids whose harmonics alias at non-negligible amplitude."""
    b = grid_reduced_field(grid, flux_count)
    # x2 harmonics reach |m - M*l1| for the shells that carry weight
    shells = max(cut_hint, 2) + 1
    kmax2 = flux_count * shells
    if kmax2 >= grid.G2 // 2:
        raise GridTooCoarse(
            f"G2={grid.G2} cannot carry x2 harmonic {kmax2} (Nyquist {grid.G2 // 2})")
    # x1 bandwidth of the widest profile, plus Gaussian roll-off margin
    k1_needed = math.sqrt(b) * (math.sqrt(2.0 * n_max + 1.0) + 8.0)
    if math.pi * grid.G1 / grid.L1 < k1_needed:
        raise GridTooCoarse(
            f"G1={grid.G1} under-resolves the level-{n_max} profile")


def _build(n_max: int, flux_count: int, grid: Grid, lattice_cut: int,
           tail_tol: float, energies: np.ndarray, gram_tol: float | None) -> OrbitalSet:
    _nyquist_guard(n_max, flux_count, grid, lattice_cut)
    orbitals = []
    for n in range(n_max + 1):
        for m in range(flux_count):
            orbitals.append(finite_volume_orbital(
                n, m, grid, flux_count, lattice_cut, tail_tol))
    mat = np.stack([orb.values.ravel() for orb in orbitals])
    gram = (mat.conj() @ mat.T) * grid.weight
    oset = OrbitalSet(orbitals=tuple(orbitals), gram=gram, energies=energies,
                      n_max=n_max, flux_count=flux_count, grid=grid,
                      lattice_cut=lattice_cut, tail_tol=tail_tol)
    if gram_tol is not None:
        dev = np.abs(gram - np.eye(len(orbitals)))
        worst = np.unravel_index(np.argmax(dev), dev.shape)
        if dev[worst] > gram_tol:
            a, bidx = worst
            raise OrthonormalityFailure(
                f"Gram deviation {dev[worst]:.3e} > {gram_tol:.1e} between "
                f"orbitals {a} and {bidx}")
    return oset


def build_orbital_set(config: SimulationConfig, grid: Grid | None = None) -> OrbitalSet:
    """All (n_max+1)*M orbitals on the given grid (default: config.grid)."""
    grid = grid or config.grid
    M = config.domain.M
    energies = np.array([landau_level(n, config.constants)
                         for n in range(config.n_max + 1)
                         for _ in range(M)])
    return _build(config.n_max, M, grid, config.lattice_cut,
                  config.lattice_tail_tol, energies, config.gram_tol)
