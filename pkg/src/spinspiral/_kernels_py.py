"""Pure-numpy implementation of the hot kernels; same contract as the Cython versions."""
import numpy as np


def apply_terms(out, psi, diag, perms, weights, coeffs):
    """out = diag*psi + sum_k coeffs[k] * scatter(weights[k]*psi, perms[k]).

    ``perms[k]`` is the bijection b -> b ^ xmask_k, so the fancy-indexed
    in-place add never hits duplicate indices.
    """
    np.multiply(diag, psi, out=out)
    for k in range(len(coeffs)):
        out[perms[k]] += coeffs[k] * (weights[k] * psi)
    return out


def expm_apply(out, psi, term, scratch, diag, perms, weights, coeffs,
               step, nblocks, tol, max_terms):
    """out = exp(step * H) psi via nblocks Taylor blocks; returns 0, or -1 if stalled."""
    np.copyto(out, psi)
    norm_in = float(np.linalg.norm(psi))
    if norm_in == 0.0 or step == 0.0:
        return 0
    target = tol * norm_in
    for _ in range(nblocks):
        np.copyto(term, out)
        converged = False
        for k in range(1, max_terms + 1):
            apply_terms(scratch, term, diag, perms, weights, coeffs)
            np.multiply(scratch, step / (nblocks * k), out=term)
            out += term
            if float(np.linalg.norm(term)) <= target:
                converged = True
                break
        if not converged:
            return -1
    out *= norm_in / float(np.linalg.norm(out))
    return 0
