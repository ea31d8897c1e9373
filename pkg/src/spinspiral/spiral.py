"""The adiabatic-spiral protocol: runs, parameter sweeps, Floquet diagnostics,
and the variational optimizers for the initial penalty and the switching path.
"""
from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
import scipy.optimize

from .engine import (ConvergenceError, EvolutionResult, StateVector,
                     aligned_neel_state, all_down_state, apply_pauli_sum,
                     eigensolve_lowest, evolve_timedep, expectation,
                     ground_space_overlap, write_csv)
from .hamiltonians import (basis_flip_string, heisenberg_probe,
                           spiral_param_hamiltonian, tilde_param_hamiltonian)
from .lattice import LatticeSpec, coupling_matrix, stagger_signs
from .pauli import PauliSum, single, two_site
from .schedule import Schedule

MAGIC_ANGLE = math.acos(1.0 / math.sqrt(3.0))  # drive tilt reached at t = T

BASES = ("neel", "flipped")


@dataclass(frozen=True)
class SpiralConfig:
    """Everything needed to run one adiabatic spiral."""

    spec: LatticeSpec
    sched: Schedule
    basis: str = "neel"
    probe: PauliSum | None = None   # defaults to the lattice Heisenberg model
    tol: float = 1e-6
    nsamples: int = 201

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}, got {self.basis!r}")
        if self.probe is not None and self.probe.nsites != self.spec.nsites:
            raise ValueError("probe does not match the lattice site count")

    def resolved_probe(self) -> PauliSum:
        return self.probe if self.probe is not None else heisenberg_probe(self.spec)


@dataclass
class SpiralResult:
    evolution: EvolutionResult
    final_energy: float
    ground_overlap: float


@dataclass
class SweepResult:
    """One protocol run per parameter value, with eigensolver reference energies."""

    label: str
    values: np.ndarray
    energies: np.ndarray
    overlaps: np.ndarray
    e0: float
    e1: float

    def __post_init__(self):
        if np.any(np.diff(self.values) <= 0):
            raise ValueError("sweep values must be strictly increasing")

    def to_csv(self, path: str) -> None:
        rows = ((v, e, o, self.e0, self.e1) for v, e, o in
                zip(self.values, self.energies, self.overlaps))
        write_csv(path, ("param", "energy", "overlap", "E0", "E1"), rows)


def run_spiral(cfg: SpiralConfig) -> SpiralResult:
    """Evolve the penalty-aligned initial state through the spiral and score it.

    In the flipped basis the evolution starts from all-down under the
    sign-reversed Hamiltonian and the basis-change X is applied before probing.
    """
    probe = cfg.resolved_probe()
    if cfg.basis == "neel":
        ham = spiral_param_hamiltonian(cfg.spec, cfg.sched)
        psi0 = aligned_neel_state(cfg.spec)
        traj_probe = probe
    else:
        ham = tilde_param_hamiltonian(cfg.spec, cfg.sched)
        psi0 = all_down_state(cfg.spec.nsites)
        traj_probe = probe.conjugate_by(basis_flip_string(cfg.spec))
    result = evolve_timedep(ham, 0.0, cfg.sched.T, psi0, tol=cfg.tol,
                            probe=traj_probe, nsamples=cfg.nsamples)
    final = result.final_state
    if cfg.basis == "flipped":
        final = apply_pauli_sum(basis_flip_string_sum(cfg.spec), final).normalized()
    energy = expectation(probe, final)
    overlap = ground_space_overlap(probe, final)
    return SpiralResult(result, energy, overlap)


def basis_flip_string_sum(spec: LatticeSpec) -> PauliSum:
    return PauliSum([(1.0, basis_flip_string(spec))], spec.nsites)


def _reference_energies(probe: PauliSum) -> tuple[float, float]:
    pairs = eigensolve_lowest(probe, 2)
    return pairs[0][0], pairs[1][0]


def _run_point(cfg: SpiralConfig) -> tuple[float, float]:
    res = run_spiral(cfg)
    return res.final_energy, res.ground_overlap


def _omega_point(cfg: SpiralConfig, omega: float) -> tuple[float, float]:
    sched = cfg.sched.replace(omega=omega, hP0=0.0, f_form="linear", betas=())
    return _run_point(replace(cfg, sched=sched))


def _time_point(cfg: SpiralConfig, T: float) -> tuple[float, float]:
    return _run_point(replace(cfg, sched=cfg.sched.replace(T=T)))


def _pmap(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sweep_omega(cfg: SpiralConfig, omegas, workers: int = 1) -> SweepResult:
    """Final energy vs drive frequency with the penalty off and a linear path."""
    values = np.asarray(sorted(omegas), dtype=float)
    if np.any(values <= 0):
        raise ValueError("drive frequencies must be positive")
    points = _pmap(functools.partial(_omega_point, cfg), values, workers)
    e0, e1 = _reference_energies(cfg.resolved_probe())
    return SweepResult("omega", values, np.array([p[0] for p in points]),
                       np.array([p[1] for p in points]), e0, e1)


def sweep_time(cfg: SpiralConfig, times, workers: int = 1) -> SweepResult:
    """Final energy vs total switching time; linear or sine-augmented paths."""
    values = np.asarray(sorted(times), dtype=float)
    if np.any(values <= 0):
        raise ValueError("switching times must be positive")
    points = _pmap(functools.partial(_time_point, cfg), values, workers)
    e0, e1 = _reference_energies(cfg.resolved_probe())
    return SweepResult("T", values, np.array([p[0] for p in points]),
                       np.array([p[1] for p in points]), e0, e1)


# -- Floquet diagnostic -----------------------------------------------------

def floquet_deviation(spec: LatticeSpec, omega: float,
                      theta: float | None = None, h_p: float = 0.0) -> float:
    """Operator-norm gap between one stroboscopic period and its engineered target.

    Compares exp(-i (2pi/omega) H_Ising) against
    U_B^dag exp(-i (2pi/omega) H_eff) U_B with the local basis change
    U_B = prod_j exp(i theta Y_j / 2).  The exact global drive phase (-1)^n per
    period is factored out.  A staggered penalty of scale ``h_p`` adds
    h_p s_j / 2 Z_j to the resource and cos(theta) h_p s_j / 2 Z_j to the target.
    """
    if omega <= 0:
        raise ValueError("drive frequency must be positive")
    theta = MAGIC_ANGLE if theta is None else float(theta)
    n = spec.nsites
    couplings = coupling_matrix(spec)
    signs = stagger_signs(spec).astype(float)
    ct, st = math.cos(theta), math.sin(theta)

    ising = [(float(couplings[i, j]), two_site("Z", i, "Z", j))
             for i in range(n) for j in range(i + 1, n) if couplings[i, j] != 0.0]
    ising += [(omega / 2 * ct + h_p * signs[j] / 2, single("Z", j)) for j in range(n)]
    ising += [(omega / 2 * st, single("X", j)) for j in range(n)]
    h_ising = PauliSum(ising, n)

    eff = []
    for i in range(n):
        for j in range(i + 1, n):
            if couplings[i, j] != 0.0:
                w = float(couplings[i, j])
                eff.append((w * ct ** 2, two_site("Z", i, "Z", j)))
                eff.append((w * st ** 2 / 2, two_site("X", i, "X", j)))
                eff.append((w * st ** 2 / 2, two_site("Y", i, "Y", j)))
    eff += [(ct * h_p * signs[j] / 2, single("Z", j)) for j in range(n)]
    h_eff = PauliSum(eff, n)

    period = 2 * math.pi / omega
    u_exact = _expm_dense(h_ising.to_matrix(), period)
    rot = np.array([[math.cos(theta / 2), math.sin(theta / 2)],
                    [-math.sin(theta / 2), math.cos(theta / 2)]], dtype=complex)
    u_basis = np.array([[1.0 + 0j]])
    for _ in range(n):
        u_basis = np.kron(rot, u_basis)
    u_floquet = (u_basis.conj().T @ _expm_dense(h_eff.to_matrix(), period)
                 @ u_basis) * (-1.0) ** n
    return float(np.linalg.norm(u_exact - u_floquet, 2))


def _expm_dense(h: np.ndarray, t: float) -> np.ndarray:
    vals, vecs = scipy.linalg.eigh(h)
    return (vecs * np.exp(-1j * t * vals)) @ vecs.conj().T


def floquet_slope(spec: LatticeSpec, omegas, theta: float | None = None,
                  h_p: float = 0.0) -> tuple[float, list[float]]:
    """Log-log slope of the deviation vs drive frequency (expected near -2)."""
    devs = [floquet_deviation(spec, om, theta, h_p) for om in omegas]
    slope = float(np.polyfit(np.log(list(omegas)), np.log(devs), 1)[0])
    return slope, devs


# -- variational optimizers --------------------------------------------------

@dataclass
class OptimizeResult:
    best: dict
    energy: float
    trace: list            # [(params dict, energy), ...] in evaluation order
    iterations: int
    converged: bool

    def to_json_payload(self) -> dict:
        return {
            "best": self.best,
            "energy": self.energy,
            "iterations": self.iterations,
            "converged": self.converged,
            "trace": [{"params": p, "energy": e} for p, e in self.trace],
        }


def golden_section(f, a: float, b: float, max_iter: int = 30,
                   xtol: float | None = None):
    """Derivative-free 1D minimization on [a, b]; returns (x, f(x), trace)."""
    if not b > a:
        raise ValueError("need b > a")
    if xtol is None:
        xtol = 1e-3 * (b - a)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    trace = []

    def eval_at(x):
        fx = f(x)
        trace.append((x, fx))
        return fx

    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = eval_at(c), eval_at(d)
    converged = False
    for _ in range(max_iter):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = eval_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = eval_at(d)
        if b - a <= xtol:
            converged = True
            break
    x = c if fc < fd else d
    fx = min(fc, fd)
    return x, fx, trace, converged


def optimize_penalty(cfg: SpiralConfig, bracket: tuple[float, float] = (0.0, 1.0),
                     max_iter: int = 30, xtol: float | None = None) -> OptimizeResult:
    """Variational search for the initial penalty that minimizes the final energy."""
    lo, hi = bracket
    if not 0.0 <= lo < hi <= cfg.sched.omega:
        raise ValueError(f"bracket {bracket} must lie within [0, omega]")

    def objective(hp0: float) -> float:
        return _run_point(replace(cfg, sched=cfg.sched.replace(hP0=float(hp0))))[0]

    x, fx, trace, converged = golden_section(objective, lo, hi, max_iter, xtol)
    if not converged:
        raise ConvergenceError(
            f"penalty search did not reach xtol within {max_iter} iterations")
    return OptimizeResult({"hP0": float(x)}, float(fx),
                          [({"hP0": float(p)}, float(e)) for p, e in trace],
                          len(trace), converged)


def _path_max(betas: np.ndarray, ngrid: int = 2049) -> float:
    x = np.linspace(0.0, 1.0, ngrid)
    g = x.copy()
    for n, beta in enumerate(betas, start=1):
        g += beta * np.sin(n * np.pi * x)
    return float(np.max(g))


def project_feasible(betas: np.ndarray, max_fraction: float = 1.0) -> np.ndarray:
    """Shrink a path toward the linear one until its peak obeys the drive cap.

    The peak of t/T + s * sum beta_n sin(n pi t/T) is monotone in the shrink
    factor s, so a bisection finds the boundary.
    """
    betas = np.asarray(betas, dtype=float)
    if _path_max(betas) <= max_fraction + 1e-12:
        return betas
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _path_max(mid * betas) <= max_fraction:
            lo = mid
        else:
            hi = mid
    return lo * betas


def optimize_path(cfg: SpiralConfig, n_coeffs: int,
                  max_fraction: float = 1.0, maxfev: int = 60,
                  seed: int | None = None, restarts: int = 1) -> OptimizeResult:
    """Simplex search over the sine-path coefficients under the drive-amplitude cap.

    ``n_coeffs`` is the N of the truncation (coefficients beta_1..beta_{N-1}).
    Iterates restart from the linear path; extra restarts jitter the start.
    """
    if n_coeffs < 2:
        raise ValueError("need n_coeffs >= 2 for at least one free coefficient")
    if max_fraction < 1.0 - 1e-12:
        raise ValueError(
            "infeasible constraint: even the linear path peaks at the endpoint")
    ndim = n_coeffs - 1
    trace = []

    def objective(raw: np.ndarray) -> float:
        betas = project_feasible(raw, max_fraction)
        sched = cfg.sched.replace(f_form="sine", betas=tuple(betas))
        energy = _run_point(replace(cfg, sched=sched))[0]
        trace.append(({"betas": [float(b) for b in betas]}, float(energy)))
        return energy

    rng = np.random.default_rng(seed)
    best_x, best_f = np.zeros(ndim), math.inf
    for attempt in range(max(1, restarts)):
        x0 = np.zeros(ndim) if attempt == 0 else rng.normal(0.0, 0.1, ndim)
        res = scipy.optimize.minimize(
            objective, x0, method="Nelder-Mead",
            options={"maxfev": maxfev, "xatol": 1e-3, "fatol": 1e-6,
                     "initial_simplex": _initial_simplex(x0)})
        if res.fun < best_f:
            best_x, best_f = project_feasible(res.x, max_fraction), float(res.fun)
    return OptimizeResult({"betas": [float(b) for b in best_x]}, best_f,
                          trace, len(trace), True)


def _initial_simplex(x0: np.ndarray, step: float = 0.15) -> np.ndarray:
    ndim = len(x0)
    simplex = np.tile(x0, (ndim + 1, 1))
    for i in range(ndim):
        simplex[i + 1, i] += step
    return simplex
