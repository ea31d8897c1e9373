"""Lattice geometry: chains, Heisenberg combs, and custom coupling matrices.

Comb sites carry coordinates (x, y) with x = 0..L-1 along the backbone and
y in {1, 2} (y = 2 is the pendant spin); they linearize to index 2x + (y - 1).
Staggering signs are computed from lattice coordinates, (-1)^(x+y) on the comb
and (-1)^j on the chain, never from the linear index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("chain", "comb", "custom")


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry plus couplings; energies are in units of J (hbar = 1)."""

    kind: str = "chain"
    L: int = 2
    J: float = 1.0
    J_p: float = 1.0
    couplings: tuple[tuple[float, ...], ...] | None = None  # custom only, symmetric

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.kind == "custom":
            if self.couplings is None:
                raise ValueError("custom lattice requires a couplings matrix")
            mat = np.asarray(self.couplings, dtype=float)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ValueError("couplings must be a square matrix")
            if not np.allclose(mat, mat.T, atol=1e-12):
                raise ValueError("couplings matrix must be symmetric")
            object.__setattr__(self, "couplings",
                               tuple(tuple(row) for row in mat))
            object.__setattr__(self, "L", mat.shape[0])
        elif self.L < 2:
            raise ValueError(f"lattice length must be >= 2, got {self.L}")

    @property
    def nsites(self) -> int:
        if self.kind == "comb":
            return 2 * self.L
        return self.L


def site_index(x: int, y: int) -> int:
    """Linear index of comb site (x, y), y in {1, 2}."""
    if y not in (1, 2):
        raise ValueError(f"comb y coordinate must be 1 or 2, got {y}")
    return 2 * x + (y - 1)


def bonds(spec: LatticeSpec) -> list[tuple[int, int, float]]:
    """Coupled pairs (i, j, J_ij) with i < j; open boundaries."""
    if spec.kind == "chain":
        return [(j, j + 1, spec.J) for j in range(spec.L - 1)]
    if spec.kind == "comb":
        out = [(site_index(x, 1), site_index(x + 1, 1), spec.J)
               for x in range(spec.L - 1)]
        out += [(site_index(x, 1), site_index(x, 2), spec.J_p)
                for x in range(spec.L)]
        return out
    mat = np.asarray(spec.couplings)
    n = mat.shape[0]
    return [(i, j, float(mat[i, j]))
            for i in range(n) for j in range(i + 1, n)
            if mat[i, j] != 0.0]


def coupling_matrix(spec: LatticeSpec) -> np.ndarray:
    n = spec.nsites
    out = np.zeros((n, n))
    for i, j, w in bonds(spec):
        out[i, j] = out[j, i] = w
    return out


def stagger_signs(spec: LatticeSpec) -> np.ndarray:
    """Alternating-sign pattern per site: (-1)^(x+y) on the comb, (-1)^j otherwise."""
    if spec.kind == "comb":
        signs = np.empty(spec.nsites, dtype=int)
        for x in range(spec.L):
            for y in (1, 2):
                signs[site_index(x, y)] = (-1) ** (x + y)
        return signs
    return np.array([(-1) ** j for j in range(spec.nsites)], dtype=int)


def aligned_neel_bits(spec: LatticeSpec) -> int:
    """Basis index of the Neel product state favored by the staggered penalty.

    The penalty term (h_P/2) * sum_i s_i Z_i with s = stagger_signs is minimized
    by spin down (bit 1) wherever s_i = +1.
    """
    bits = 0
    for j, s in enumerate(stagger_signs(spec)):
        if s > 0:
            bits |= 1 << j
    return bits


def flip_sites(spec: LatticeSpec) -> list[int]:
    """Sites flipped by the basis-change X that maps all-down to the aligned Neel state."""
    return [j for j, s in enumerate(stagger_signs(spec)) if s < 0]


# -- Rydberg geometry -----------------------------------------------------

def rydberg_couplings(positions: np.ndarray, v0: float) -> np.ndarray:
    """Van der Waals matrix J_ij = v0 / |x_i - x_j|^6 for all pairs."""
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2:
        raise ValueError("positions must be an (natoms, ndim) array")
    diff = pos[:, None, :] - pos[None, :, :]
    dist2 = np.sum(diff * diff, axis=-1)
    n = pos.shape[0]
    off = ~np.eye(n, dtype=bool)
    if np.any(dist2[off] < 1e-24):
        raise ValueError("coincident atom positions")
    out = np.zeros((n, n))
    out[off] = v0 / dist2[off] ** 3
    return out


def comb_positions(L: int, spacing: float = 1.0, alternating: bool = True) -> np.ndarray:
    """Atom layout for a comb: backbone along x, pendant atoms offset vertically.

    With ``alternating`` the pendants sit above/below the backbone on alternating
    columns, which suppresses pendant-pendant next-nearest-neighbor couplings.
    Linear ordering matches site_index.
    """
    pos = np.zeros((2 * L, 2))
    for x in range(L):
        pos[site_index(x, 1)] = (x * spacing, 0.0)
        sign = (-1) ** x if alternating else 1
        pos[site_index(x, 2)] = (x * spacing, sign * spacing)
    return pos
