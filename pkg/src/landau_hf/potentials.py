"""Bounded, doubly periodic two-body kernels V(x; y) = V(y; x).

Every kind is a bounded real kernel on the box, periodic in each argument,
so the pair-interaction operator it generates is bounded with norm controlled
by sup|V|.  Kinds:

  zero               V = 0
  separable-cosine   V(x;y) = strength * g(x) * g(y),
                     g(x) = cos(2 pi k1 x1 / L1) * cos(2 pi k2 x2 / L2)
  periodic-gaussian  V(x;y) = strength * P(x - y) / P(0), with P the lattice
                     periodization of exp(-|d|^2 / (2 sigma^2))
  tabulated          values on grid x grid, supplied as an array (escape hatch)

For quadrature the kernel is always handled through an exact (on the grid)
separable expansion V(x;y) = sum_r c_r f_r(x) g_r(y); the translation-invariant
Gaussian kind obtains its expansion from the discrete Fourier transform of its
difference table, the tabulated kind falls back to the dense pair matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidValue, SymmetryViolation

KINDS = ("zero", "separable-cosine", "periodic-gaussian", "tabulated")

# discrete Fourier modes below this relative weight are dropped from the
# separable expansion of translation-invariant kernels
_MODE_FLOOR = 1e-16


@dataclass(frozen=True)
class PotentialSpec:
    kind: str
    strength: float = 0.0
    harmonic1: int = 1
    harmonic2: int = 1
    sigma: float = 1.0
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidValue("kind", f"must be one of {KINDS}")
        if not math.isfinite(self.strength):
            raise InvalidValue("strength", "must be finite")
        if self.kind == "periodic-gaussian" and not (self.sigma > 0):
            raise InvalidValue("sigma", "must be > 0")
        if self.kind == "tabulated":
            if self.table is None:
                raise InvalidValue("path", "tabulated kind needs a value table")
            t = np.asarray(self.table)
            if t.ndim != 2 or t.shape[0] != t.shape[1]:
                raise InvalidValue("path", "table must be a square (P, P) array")

    @classmethod
    def from_params(cls, kind, strength=0.0, harmonic1=1, harmonic2=1,
                    sigma=1.0, path=None) -> "PotentialSpec":
        table = None
        if kind == "tabulated":
            if path is None:
                raise InvalidValue("path", "tabulated kind needs path=<.npy file>")
            table = np.load(path)
        return cls(kind=kind, strength=strength, harmonic1=harmonic1,
                   harmonic2=harmonic2, sigma=sigma, table=table)

    # -- norms -----------------------------------------------------------

    def sup_norm(self) -> float:
        """sup |V|; exact for the analytic kinds, table max otherwise."""
        if self.kind == "zero":
            return 0.0
        if self.kind in ("separable-cosine", "periodic-gaussian"):
            return abs(self.strength)
        return float(np.max(np.abs(self.table)))

    # -- evaluation --------------------------------------------------------

    def _cosine_factor(self, grid) -> np.ndarray:
        X1, X2 = grid.mesh()
        return (np.cos(2.0 * np.pi * self.harmonic1 * X1 / grid.L1)
                * np.cos(2.0 * np.pi * self.harmonic2 * X2 / grid.L2))

    def _difference_table(self, grid) -> np.ndarray:
        """Periodized Gaussian at grid offsets, normalized to 1 at zero offset."""
        d1 = np.arange(grid.G1) * grid.h1
        d2 = np.arange(grid.G2) * grid.h2
        n1 = int(math.ceil(9.0 * self.sigma / grid.L1)) + 1
        n2 = int(math.ceil(9.0 * self.sigma / grid.L2)) + 1
        tab = np.zeros((grid.G1, grid.G2))
        s2 = 2.0 * self.sigma ** 2
        for a in range(-n1, n1 + 1):
            e1 = np.exp(-((d1 + a * grid.L1) ** 2) / s2)
            for b in range(-n2, n2 + 1):
                e2 = np.exp(-((d2 + b * grid.L2) ** 2) / s2)
                tab += np.outer(e1, e2)
        return tab / tab[0, 0]

    def separable_terms(self, grid):
        """Expansion V(x;y) = sum_r c_r f_r(x) g_r(y), or None for tabulated.

        Terms are exact on the grid (Fourier modes below the relative floor
        are dropped for the Gaussian kind).  Ordering is deterministic.
        """
        if self.kind == "zero":
            return []
        if self.kind == "separable-cosine":
            g = self._cosine_factor(grid).astype(np.complex128)
            return [(self.strength, g, g)]
        if self.kind == "periodic-gaussian":
            tab = self._difference_table(grid) * self.strength
            what = np.fft.fft2(tab) / (grid.G1 * grid.G2)
            # real symmetric difference table -> real mode weights
            what = what.real
            i1 = np.arange(grid.G1)
            i2 = np.arange(grid.G2)
            terms = []
            floor = _MODE_FLOOR * max(abs(self.strength), 1.0)
            for k1 in range(grid.G1):
                row = np.exp(2j * np.pi * k1 * i1 / grid.G1)
                for k2 in range(grid.G2):
                    c = what[k1, k2]
                    if abs(c) <= floor:
                        continue
                    mode = np.outer(row, np.exp(2j * np.pi * k2 * i2 / grid.G2))
                    terms.append((float(c), mode, mode.conj()))
            return terms
        return None

    def pair_values(self, grid) -> np.ndarray:
        """Dense (P, P) matrix of V at all grid point pairs (row: x, col: y)."""
        P = grid.G1 * grid.G2
        if self.kind == "zero":
            return np.zeros((P, P))
        if self.kind == "separable-cosine":
            g = self._cosine_factor(grid).ravel()
            return self.strength * np.outer(g, g)
        if self.kind == "periodic-gaussian":
            tab = self._difference_table(grid) * self.strength
            i1 = np.arange(grid.G1)
            i2 = np.arange(grid.G2)
            D1 = (i1[:, None] - i1[None, :]) % grid.G1     # (G1, G1)
            D2 = (i2[:, None] - i2[None, :]) % grid.G2     # (G2, G2)
            vals = tab[D1[:, None, :, None], D2[None, :, None, :]]
            return vals.reshape(P, P)
        table = np.asarray(self.table, dtype=float)
        if table.shape != (P, P):
            raise InvalidValue(
                "path", f"table shape {table.shape} does not match grid ({P}, {P})")
        return table

    def check_symmetry(self, grid, tol: float = 1e-8) -> float:
        """Max |V(x;y) - V(y;x)| over grid pairs; raises beyond tol."""
        if self.kind in ("zero", "separable-cosine", "periodic-gaussian"):
            return 0.0  # symmetric by construction
        vals = self.pair_values(grid)
        dev = float(np.max(np.abs(vals - vals.T)))
        scale = max(float(np.max(np.abs(vals))), 1.0)
        if dev > tol * scale:
            raise SymmetryViolation(
                f"tabulated kernel asymmetric: max deviation {dev:.3e}")
        return dev
