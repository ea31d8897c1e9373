# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Pauli-sum application and the step exponential acting on a state."""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline void _apply_core(double complex[::1] out,
                             const double complex[::1] psi,
                             const double complex[::1] diag,
                             const cnp.intp_t[:, ::1] perms,
                             const double complex[:, ::1] weights,
                             const double[::1] coeffs) noexcept nogil:
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t noff = perms.shape[0]
    cdef Py_ssize_t b, k
    cdef double c
    for b in range(dim):
        out[b] = diag[b] * psi[b]
    for k in range(noff):
        c = coeffs[k]
        for b in range(dim):
            out[perms[k, b]] = out[perms[k, b]] + c * weights[k, b] * psi[b]


def apply_terms(double complex[::1] out,
                const double complex[::1] psi,
                const double complex[::1] diag,
                const cnp.intp_t[:, ::1] perms,
                const double complex[:, ::1] weights,
                const double[::1] coeffs):
    """out = diag*psi + sum_k coeffs[k] * scatter(weights[k]*psi, perms[k])."""
    with nogil:
        _apply_core(out, psi, diag, perms, weights, coeffs)
    return None


def expm_apply(double complex[::1] out,
               const double complex[::1] psi,
               double complex[::1] term,
               double complex[::1] scratch,
               const double complex[::1] diag,
               const cnp.intp_t[:, ::1] perms,
               const double complex[:, ::1] weights,
               const double[::1] coeffs,
               double complex step,
               int nblocks,
               double tol,
               int max_terms):
    """out = exp(step * H) psi via nblocks Taylor blocks; returns 0, or -1 if stalled.

    ``step`` is the full (typically imaginary) exponent scale; each block uses
    step/nblocks, which the caller sizes so the series converges quickly.  The
    result is rescaled to the input norm (the exact result is unitary for
    anti-Hermitian exponents).
    """
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t b
    cdef int blk, k
    cdef double complex c
    cdef double norm_in = 0.0, nrm, target
    cdef int ok = 1
    with nogil:
        for b in range(dim):
            out[b] = psi[b]
            norm_in += psi[b].real * psi[b].real + psi[b].imag * psi[b].imag
        norm_in = sqrt(norm_in)
        if norm_in > 0.0 and step != 0.0:
            target = tol * norm_in
            for blk in range(nblocks):
                for b in range(dim):
                    term[b] = out[b]
                ok = 0
                for k in range(1, max_terms + 1):
                    _apply_core(scratch, term, diag, perms, weights, coeffs)
                    c = step / (nblocks * k)
                    nrm = 0.0
                    for b in range(dim):
                        term[b] = c * scratch[b]
                        out[b] = out[b] + term[b]
                        nrm += term[b].real * term[b].real + term[b].imag * term[b].imag
                    if sqrt(nrm) <= target:
                        ok = 1
                        break
                if not ok:
                    break
            if ok:
                nrm = 0.0
                for b in range(dim):
                    nrm += out[b].real * out[b].real + out[b].imag * out[b].imag
                nrm = norm_in / sqrt(nrm)
                for b in range(dim):
                    out[b] = out[b] * nrm
    return 0 if ok else -1
