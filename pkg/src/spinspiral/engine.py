"""Dense state-vector mechanics: apply Pauli sums, exponentiate, integrate, diagonalize.

Time evolution uses piecewise-constant midpoint steps with the step exponential
computed exactly on the applied action (scaled Taylor series), and automatic
step halving until successive refinements agree in state norm-distance.  Each
step is renormalized, so unitarity holds to machine precision.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .backend import CompiledTerms, compile_pauli_sum, compile_strings
from .hamiltonians import ParamHamiltonian
from .lattice import LatticeSpec, aligned_neel_bits
from .pauli import PauliSum

MAX_EVOLVE_SITES = 14   # dense state vectors only; larger systems are rejected
MAX_EIG_SITES = 12      # dense Hermitian eigensolver cap

_TAYLOR_THETA = 0.5     # max |dt| * ||H||_1 per Taylor block
_TAYLOR_MAX_TERMS = 60


class ConvergenceError(RuntimeError):
    """Step-halving exceeded the configured step cap without converging."""


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the 2^n computational basis states.

    Instances are treated as immutable; all operations return new vectors.
    """

    amplitudes: np.ndarray
    nsites: int

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2 ** self.nsites,):
            raise ValueError(
                f"amplitude vector of length {amps.shape} does not match "
                f"nsites={self.nsites}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.amplitudes / self.norm(), self.nsites)

    def overlap(self, other: "StateVector") -> complex:
        _check_sites(self.nsites, other.nsites)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _check_sites(a: int, b: int):
    if a != b:
        raise ValueError(f"dimension mismatch: {a} vs {b} sites")


def _check_scale(n: int):
    if n > MAX_EVOLVE_SITES:
        raise ValueError(
            f"{n} sites exceeds the dense desk-scale cap of {MAX_EVOLVE_SITES}")


def basis_state(nsites: int, index: int) -> StateVector:
    amps = np.zeros(2 ** nsites, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps, nsites)


def neel_state(nsites: int, first_up: bool = True) -> StateVector:
    """Alternating product state; site 0 is up unless first_up is False."""
    if nsites < 1:
        raise ValueError("need at least one site")
    bits = 0
    for j in range(nsites):
        down = (j % 2 == 1) if first_up else (j % 2 == 0)
        if down:
            bits |= 1 << j
    return basis_state(nsites, bits)


def aligned_neel_state(spec: LatticeSpec) -> StateVector:
    """The Neel product state favored by the staggered penalty on this lattice."""
    return basis_state(spec.nsites, aligned_neel_bits(spec))


def all_down_state(nsites: int) -> StateVector:
    return basis_state(nsites, 2 ** nsites - 1)


def apply_pauli_sum(H: PauliSum, psi: StateVector) -> StateVector:
    """H|psi> computed term-by-term; the result is generally unnormalized."""
    _check_sites(H.nsites, psi.nsites)
    ct = compile_pauli_sum(H)
    out = np.empty_like(psi.amplitudes)
    ct.apply(psi.amplitudes, out)
    return StateVector(out, psi.nsites)


def expectation(H: PauliSum, psi: StateVector) -> float:
    """<psi|H|psi> for a normalized psi; a large imaginary part flags a non-Hermitian bug."""
    _check_sites(H.nsites, psi.nsites)
    val = complex(np.vdot(psi.amplitudes, apply_pauli_sum(H, psi).amplitudes))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(
            f"expectation has imaginary part {val.imag:g}; H is not Hermitian")
    return val.real


class _Workspace:
    """Scratch buffers reused across step exponentials in one evolution."""

    __slots__ = ("out", "term", "scratch")

    def __init__(self, dim: int):
        self.out = np.empty(dim, dtype=complex)
        self.term = np.empty(dim, dtype=complex)
        self.scratch = np.empty(dim, dtype=complex)


def _expm_apply(ct: CompiledTerms, dt: float, psi: np.ndarray,
                ws: _Workspace | None = None) -> np.ndarray:
    """exp(-i dt H) psi via the backend's blocked Taylor kernel."""
    if ws is None:
        ws = _Workspace(len(psi))
    try:
        ct.expm_into(float(dt), psi, ws.out, ws.term, ws.scratch,
                     theta=_TAYLOR_THETA, max_terms=_TAYLOR_MAX_TERMS)
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from exc
    return ws.out.copy()


def evolve_const(H: PauliSum, dt: float, psi: StateVector) -> StateVector:
    """exp(-i H dt)|psi>; dt may be negative; norm is preserved."""
    _check_sites(H.nsites, psi.nsites)
    _check_scale(H.nsites)
    ct = compile_pauli_sum(H)
    return StateVector(_expm_apply(ct, float(dt), psi.amplitudes), psi.nsites)


@dataclass
class EvolutionResult:
    """Trajectory summary: sampled probe energies plus the final state."""

    final_state: StateVector
    times: np.ndarray
    energies: np.ndarray
    steps: int

    def __post_init__(self):
        if len(self.times) != len(self.energies):
            raise ValueError("times and energies must have equal length")

    def to_csv(self, path: str) -> None:
        write_csv(path, ("t", "energy"), zip(self.times, self.energies))

    def to_json(self, path: str, include_amplitudes: bool = False) -> None:
        payload = {
            "nsites": self.final_state.nsites,
            "steps": self.steps,
            "times": [float(t) for t in self.times],
            "energies": [float(e) for e in self.energies],
        }
        if include_amplitudes:
            amps = self.final_state.amplitudes
            payload["final_amplitudes"] = {
                "re": amps.real.tolist(), "im": amps.imag.tolist()}
        write_json(path, payload)


def _make_evaluator(h_of_t, t_first: float) -> tuple[Callable[[float], CompiledTerms], int]:
    """Wrap a time-dependent Hamiltonian as t -> CompiledTerms, reusing masks."""
    if isinstance(h_of_t, ParamHamiltonian):
        ct = compile_strings(h_of_t.strings, h_of_t.nsites)

        def evaluate(t: float) -> CompiledTerms:
            ct.set_coeffs(h_of_t.coeff_fn(t))
            return ct

        return evaluate, h_of_t.nsites

    probe_sum = h_of_t(t_first)
    if not isinstance(probe_sum, PauliSum):
        raise TypeError("h_of_t must return a PauliSum or be a ParamHamiltonian")
    cache: dict = {"keys": None, "ct": None}

    def evaluate(t: float) -> CompiledTerms:
        H = h_of_t(t)
        keys = H.string_keys()
        if cache["keys"] != keys:
            cache["ct"] = compile_pauli_sum(H)
            cache["keys"] = keys
        else:
            cache["ct"].set_coeffs(H.coefficients())
        return cache["ct"]

    return evaluate, probe_sum.nsites


def evolve_timedep(h_of_t, t0: float, t1: float, psi: StateVector,
                   tol: float = 1e-8, probe: PauliSum | None = None,
                   nsamples: int = 200, sample_times: np.ndarray | None = None,
                   max_steps: int = 5_000_000) -> EvolutionResult:
    """Time-ordered evolution from t0 to t1 with adaptive midpoint stepping.

    ``tol`` budgets the accumulated state norm-distance across the whole run.
    Probe energies are recorded at the sample times (uniform by default).
    """
    if t1 <= t0:
        raise ValueError(f"need t1 > t0, got [{t0}, {t1}]")
    evaluate, nsites = _make_evaluator(h_of_t, t0)
    _check_sites(nsites, psi.nsites)
    _check_scale(nsites)

    if sample_times is None:
        sample_times = np.linspace(t0, t1, max(2, nsamples))
    else:
        sample_times = np.asarray(sample_times, dtype=float)
        if sample_times[0] != t0 or sample_times[-1] != t1 or \
                np.any(np.diff(sample_times) <= 0):
            raise ValueError("sample times must increase from t0 to t1")

    probe_ct = compile_pauli_sum(probe) if probe is not None else None
    dim = len(psi.amplitudes)
    ws = _Workspace(dim)
    coarse = np.empty(dim, dtype=complex)
    half = np.empty(dim, dtype=complex)
    fine = np.empty(dim, dtype=complex)
    cur = psi.amplitudes.copy()

    def probe_energy(arr: np.ndarray) -> float:
        probe_ct.apply(arr, ws.scratch)
        return float(np.vdot(arr, ws.scratch).real)

    energies = [probe_energy(cur)] if probe_ct is not None else []
    total = t1 - t0
    rate = tol / total          # allowed error per unit time
    steps = 0
    h = total / (len(sample_times) - 1)

    for ta, tb in zip(sample_times[:-1], sample_times[1:]):
        t = ta
        while t < tb - 1e-13 * total:
            h = min(h, tb - t)
            ct = evaluate(t + 0.5 * h)
            ct.expm_into(h, cur, coarse, ws.term, ws.scratch)
            ct = evaluate(t + 0.25 * h)
            ct.expm_into(0.5 * h, cur, half, ws.term, ws.scratch)
            ct = evaluate(t + 0.75 * h)
            ct.expm_into(0.5 * h, half, fine, ws.term, ws.scratch)
            err = float(np.linalg.norm(coarse - fine))
            steps += 3
            if steps > max_steps:
                raise ConvergenceError(
                    f"exceeded {max_steps} steps before reaching t={t1}")
            # the kept two-half-step result has roughly a third of the measured
            # coarse-fine gap as its own local error (second-order stepping)
            if err <= 3.0 * rate * h:
                cur, fine = fine, cur
                t += h
                if err <= 0.375 * rate * h:
                    h *= 2.0
            else:
                h *= 0.5
        if probe_ct is not None:
            energies.append(probe_energy(cur))

    final = StateVector(cur, psi.nsites).normalized()
    energy_arr = np.array(energies) if energies else np.zeros(0)
    times_arr = sample_times if probe_ct is not None else np.zeros(0)
    return EvolutionResult(final, times_arr, energy_arr, steps)


def eigensolve_lowest(H: PauliSum, k: int) -> list[tuple[float, StateVector]]:
    """k lowest eigenpairs from a dense Hermitian solve, energies ascending."""
    if H.nsites > MAX_EIG_SITES:
        raise ValueError(
            f"{H.nsites} sites exceeds the dense eigensolver cap of {MAX_EIG_SITES}")
    dim = 2 ** H.nsites
    if not 1 <= k <= dim:
        raise ValueError(f"k must be in [1, {dim}], got {k}")
    vals, vecs = scipy.linalg.eigh(H.to_matrix(), subset_by_index=(0, k - 1))
    return [(float(vals[i]), StateVector(vecs[:, i], H.nsites)) for i in range(k)]


def ground_space_overlap(H: PauliSum, psi: StateVector, kmax: int = 8,
                         degeneracy_tol: float = 1e-8) -> float:
    """|projection of psi onto the (possibly degenerate) ground space of H|^2."""
    pairs = eigensolve_lowest(H, min(kmax, 2 ** H.nsites))
    e0 = pairs[0][0]
    total = 0.0
    for e, vec in pairs:
        if e - e0 > degeneracy_tol * max(1.0, abs(e0)):
            break
        total += abs(vec.overlap(psi)) ** 2
    return min(total, 1.0)


# -- small serialization helpers shared by result types --------------------

def write_csv(path: str, header: tuple[str, ...], rows) -> None:
    """Atomic CSV write, full double precision."""
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{float(v):.17g}" for v in row) + "\n")
    os.replace(tmp, path)


def write_json(path: str, payload) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
