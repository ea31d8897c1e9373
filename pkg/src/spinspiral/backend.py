"""Kernel backend selection and the compiled term layout shared by both backends.

The Cython extension is used when importable; set SPINSPIRAL_KERNEL=pure to
force the numpy fallback (or call :func:`use`).  Both backends implement the
same ``apply_terms`` contract and agree to floating-point rounding.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py as _pure
from .pauli import PauliString, PauliSum, _popcount

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built; pure fallback still fully functional
    _compiled = None

_BACKENDS = {"pure": _pure}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_env = os.environ.get("SPINSPIRAL_KERNEL", "").strip().lower()
_active = _BACKENDS.get(_env or ("compiled" if _compiled else "pure"), _pure)


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def backend_name() -> str:
    return "compiled" if _active is _compiled else "pure"


def use(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    _active = _BACKENDS[name]


class CompiledTerms:
    """Term masks of a Pauli sum preprocessed for fast repeated application.

    The string layout is fixed at compile time; coefficients can be swapped per
    time step with :meth:`set_coeffs`, which is what makes time-dependent
    evolution cheap.
    """

    __slots__ = ("nsites", "dim", "_diag_signs", "_off_perms", "_off_weights",
                 "_diag_pos", "_off_pos", "_diag", "_off_coeffs", "_norm1")

    def __init__(self, strings: tuple[PauliString, ...], nsites: int):
        self.nsites = nsites
        self.dim = 2 ** nsites
        idx = np.arange(self.dim)
        diag_rows, diag_pos, off_perms, off_weights, off_pos = [], [], [], [], []
        for pos, string in enumerate(strings):
            xm, zm, factor = string.action_masks(nsites)
            signs = 1.0 - 2.0 * (_popcount(idx & zm) & 1)
            if xm == 0:
                diag_rows.append(factor.real * signs)
                diag_pos.append(pos)
            else:
                off_perms.append(idx ^ xm)
                off_weights.append(factor * signs)
                off_pos.append(pos)
        self._diag_signs = (np.array(diag_rows) if diag_rows
                            else np.zeros((0, self.dim)))
        self._off_perms = (np.array(off_perms, dtype=np.intp) if off_perms
                           else np.zeros((0, self.dim), dtype=np.intp))
        self._off_weights = (np.array(off_weights) if off_weights
                             else np.zeros((0, self.dim), dtype=complex))
        self._diag_pos = np.array(diag_pos, dtype=np.intp)
        self._off_pos = np.array(off_pos, dtype=np.intp)
        self._diag = np.zeros(self.dim, dtype=complex)
        self._off_coeffs = np.zeros(len(off_pos))
        self._norm1 = 0.0

    def set_coeffs(self, coeffs: np.ndarray) -> None:
        coeffs = np.asarray(coeffs, dtype=float)
        self._diag.real = coeffs[self._diag_pos] @ self._diag_signs
        self._diag.imag = 0.0
        self._off_coeffs = np.ascontiguousarray(coeffs[self._off_pos])
        self._norm1 = float(np.sum(np.abs(coeffs)))

    def one_norm(self) -> float:
        return self._norm1

    def apply(self, psi: np.ndarray, out: np.ndarray) -> np.ndarray:
        _active.apply_terms(out, psi, self._diag, self._off_perms,
                            self._off_weights, self._off_coeffs)
        return out

    def expm_into(self, dt: float, psi: np.ndarray, out: np.ndarray,
                  term: np.ndarray, scratch: np.ndarray,
                  theta: float = 0.5, tol: float = 1e-14,
                  max_terms: int = 60) -> None:
        """out = exp(-i dt H) psi, blocks sized so |dt| * ||H||_1 <= theta each."""
        nblocks = max(1, int(np.ceil(abs(dt) * self._norm1 / theta)))
        status = _active.expm_apply(out, psi, term, scratch, self._diag,
                                    self._off_perms, self._off_weights,
                                    self._off_coeffs, -1j * dt, nblocks,
                                    tol, max_terms)
        if status != 0:
            raise RuntimeError("Taylor series for the step exponential stalled")


def compile_strings(strings: tuple[PauliString, ...], nsites: int) -> CompiledTerms:
    return CompiledTerms(strings, nsites)


def compile_pauli_sum(H: PauliSum) -> CompiledTerms:
    ct = CompiledTerms(tuple(PauliString(s) for s in H.string_keys()), H.nsites)
    ct.set_coeffs(H.coefficients())
    return ct
