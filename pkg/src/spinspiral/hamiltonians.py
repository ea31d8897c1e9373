"""Builders for every Hamiltonian in the protocol family.

Time-dependent Hamiltonians are represented by :class:`ParamHamiltonian`, a
fixed string layout with time-varying coefficients, so that evolution loops
can reuse compiled term data across steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lattice import LatticeSpec, bonds, flip_sites, stagger_signs
from .pauli import PauliString, PauliSum, single, two_site
from .schedule import Schedule

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class ParamHamiltonian:
    """Fixed Pauli strings with coefficients given by a function of time."""

    strings: tuple[PauliString, ...]
    coeff_fn: Callable[[float], np.ndarray]
    nsites: int

    def at(self, t: float) -> PauliSum:
        coeffs = self.coeff_fn(t)
        return PauliSum(zip(coeffs, self.strings), self.nsites)

    def __call__(self, t: float) -> PauliSum:
        return self.at(t)


def build_heisenberg_chain(L: int, J: float = 1.0) -> PauliSum:
    """Open anti-ferromagnetic chain: J * sum_j (XX + YY + ZZ) on neighbors."""
    if L < 2:
        raise ValueError(f"chain length must be >= 2, got {L}")
    terms = [(J, two_site(a, j, a, j + 1)) for j in range(L - 1) for a in "XYZ"]
    return PauliSum(terms, L)


def build_heisenberg_comb(spec: LatticeSpec) -> PauliSum:
    """Backbone + pendant Heisenberg couplings, open boundary in x."""
    if spec.kind != "comb":
        raise ValueError(f"expected a comb lattice, got {spec.kind!r}")
    terms = [(w, two_site(a, i, a, j)) for i, j, w in bonds(spec) for a in "XYZ"]
    return PauliSum(terms, spec.nsites)


def heisenberg_probe(spec: LatticeSpec) -> PauliSum:
    """The target Heisenberg Hamiltonian used to score prepared states."""
    if spec.kind == "chain":
        return build_heisenberg_chain(spec.L, spec.J)
    if spec.kind == "comb":
        return build_heisenberg_comb(spec)
    terms = [(w, two_site(a, i, a, j)) for i, j, w in bonds(spec) for a in "XYZ"]
    return PauliSum(terms, spec.nsites)


def _spiral_layout(spec: LatticeSpec) -> tuple[tuple[PauliString, ...], np.ndarray, np.ndarray]:
    """Common string layout (ZZ bonds, then Z_j, then X_j) plus bond weights and signs."""
    n = spec.nsites
    zz = [two_site("Z", i, "Z", j) for i, j, _ in bonds(spec)]
    zs = [single("Z", j) for j in range(n)]
    xs = [single("X", j) for j in range(n)]
    weights = np.array([w for _, _, w in bonds(spec)], dtype=float)
    return tuple(zz + zs + xs), weights, stagger_signs(spec).astype(float)


def spiral_param_hamiltonian(spec: LatticeSpec, sched: Schedule) -> ParamHamiltonian:
    """Driving Hamiltonian of the adiabatic spiral in the Neel-start basis.

    Chain: sum_j [J ZZ + (omega/2)(Z/sqrt3 + f(t) X) + (h_P(t)/2)(-1)^j Z].
    Comb: the ZZ couplings carry an extra 1/4 while the single-site terms keep
    the same form with staggering (-1)^(x+y).
    """
    strings, weights, signs = _spiral_layout(spec)
    n = spec.nsites
    zz = weights * (0.25 if spec.kind == "comb" else 1.0)
    om = sched.omega

    def coeffs(t: float) -> np.ndarray:
        z = om / (2 * SQRT3) + 0.5 * sched.hP(t) * signs
        x = np.full(n, 0.5 * om * sched.f(t))
        return np.concatenate((zz, z, x))

    return ParamHamiltonian(strings, coeffs, n)


def tilde_param_hamiltonian(spec: LatticeSpec, sched: Schedule) -> ParamHamiltonian:
    """Flipped-basis spiral Hamiltonian: sign-reversed ZZ, staggered drive, uniform penalty."""
    strings, weights, signs = _spiral_layout(spec)
    n = spec.nsites
    zz = -weights * (0.25 if spec.kind == "comb" else 1.0)
    om = sched.omega
    # drive sign is +1 on unflipped sites; flipped sites are exactly those with
    # negative staggering, so the drive pattern equals the staggering itself
    drive = signs

    def coeffs(t: float) -> np.ndarray:
        z = om / (2 * SQRT3) * drive + 0.5 * sched.hP(t)
        x = np.full(n, 0.5 * om * sched.f(t))
        return np.concatenate((zz, z, x))

    return ParamHamiltonian(strings, coeffs, n)


def _check_time(t: float, T: float):
    if not -1e-12 <= t <= T + 1e-12:
        raise ValueError(f"time {t} outside [0, {T}]")


def build_spiral_hamiltonian(spec: LatticeSpec, sched: Schedule, t: float) -> PauliSum:
    _check_time(t, sched.T)
    return spiral_param_hamiltonian(spec, sched).at(t)


def build_tilde_hamiltonian(spec: LatticeSpec, sched: Schedule, t: float) -> PauliSum:
    _check_time(t, sched.T)
    return tilde_param_hamiltonian(spec, sched).at(t)


def basis_flip_string(spec: LatticeSpec) -> PauliString:
    """Product of X on every other site, mapping all-down to the aligned Neel state."""
    return PauliString(tuple((j, "X") for j in flip_sites(spec)))


def linear_adiabatic_param(couplings: np.ndarray, hP: float, T: float,
                           signs: np.ndarray | None = None) -> ParamHamiltonian:
    """Ising-to-Heisenberg ramp: J_ij (ZZ + (t/T)(XX + YY)) + h_P (1 - t/T) staggered Z."""
    couplings = np.asarray(couplings, dtype=float)
    n = couplings.shape[0]
    if signs is None:
        signs = np.array([(-1) ** i for i in range(n)], dtype=float)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)
             if couplings[i, j] != 0.0]
    weights = np.array([couplings[i, j] for i, j in pairs])
    strings = tuple([two_site("Z", i, "Z", j) for i, j in pairs]
                    + [two_site("X", i, "X", j) for i, j in pairs]
                    + [two_site("Y", i, "Y", j) for i, j in pairs]
                    + [single("Z", k) for k in range(n)])

    def coeffs(t: float) -> np.ndarray:
        ramp = t / T
        return np.concatenate((weights, ramp * weights, ramp * weights,
                               hP * (1.0 - ramp) * signs))

    return ParamHamiltonian(strings, coeffs, n)


def build_linear_adiabatic(couplings: np.ndarray, hP: float, t: float, T: float,
                           signs: np.ndarray | None = None) -> PauliSum:
    _check_time(t, T)
    return linear_adiabatic_param(couplings, hP, T, signs).at(t)


def ising_coupling_sum(couplings: np.ndarray, nsites: int | None = None) -> PauliSum:
    """sum_{i<j} J_ij Z_i Z_j as a PauliSum."""
    couplings = np.asarray(couplings, dtype=float)
    n = nsites or couplings.shape[0]
    terms = [(float(couplings[i, j]), two_site("Z", i, "Z", j))
             for i in range(couplings.shape[0]) for j in range(i + 1, couplings.shape[0])
             if couplings[i, j] != 0.0]
    return PauliSum(terms, n)
