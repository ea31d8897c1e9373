"""Pauli-string algebra: tensor products of single-site Paulis and Hermitian weighted sums.

Conventions used throughout the package:

* site ``j`` maps to bit ``j`` of the computational-basis index (site 0 is the
  least significant bit),
* ``|0> = |up>`` with ``Z|0> = +|0>``, ``|1> = |down>`` with ``Z|1> = -|1>``.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Iterator

import numpy as np

AXES = ("X", "Y", "Z")

# single-site products: (a, b) -> (phase, result axis or None for identity)
_PRODUCT = {
    ("X", "X"): (1, None), ("Y", "Y"): (1, None), ("Z", "Z"): (1, None),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_PHASES = (1 + 0j, -1 + 0j, 1j, -1j)


def _canonical_phase(phase: complex) -> complex:
    for p in _PHASES:
        if abs(phase - p) < 1e-12:
            return p
    raise ValueError(f"phase {phase!r} is not a fourth root of unity")


class PauliString:
    """A phase times a product of single-site Pauli operators on distinct sites.

    ``sites`` is a tuple of ``(site_index, axis)`` pairs with strictly increasing
    site indices; the empty tuple with phase 1 is the identity.
    """

    __slots__ = ("sites", "phase")

    def __init__(self, sites: Iterable[tuple[int, str]] = (), phase: complex = 1):
        sites = tuple((int(j), a) for j, a in sites)
        for j, a in sites:
            if a not in AXES:
                raise ValueError(f"unknown Pauli axis {a!r}")
            if j < 0:
                raise ValueError(f"negative site index {j}")
        if any(sites[k][0] >= sites[k + 1][0] for k in range(len(sites) - 1)):
            raise ValueError("site indices must be strictly increasing")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "phase", _canonical_phase(complex(phase)))

    def __setattr__(self, name, value):
        raise AttributeError("PauliString is immutable")

    def __reduce__(self):
        return (PauliString, (self.sites, self.phase))

    # -- algebra --------------------------------------------------------
    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply_pauli_strings(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.sites, -self.phase)

    def conjugate_phase(self) -> "PauliString":
        return PauliString(self.sites, np.conj(self.phase))

    # -- queries --------------------------------------------------------
    @property
    def max_site(self) -> int:
        return self.sites[-1][0] if self.sites else -1

    def weight(self) -> int:
        return len(self.sites)

    def action_masks(self, nsites: int) -> tuple[int, int, complex]:
        """(xmask, zmask, factor): string|b> = factor * (-1)^popcount(b & zmask) |b ^ xmask>."""
        if self.max_site >= nsites:
            raise ValueError(f"string touches site {self.max_site} >= nsites={nsites}")
        xmask = zmask = 0
        ny = 0
        for j, a in self.sites:
            if a != "Z":
                xmask |= 1 << j
            if a != "X":
                zmask |= 1 << j
            if a == "Y":
                ny += 1
        return xmask, zmask, self.phase * (1j) ** (ny % 4)

    def to_matrix(self, nsites: int) -> np.ndarray:
        labels = dict(self.sites)
        out = np.array([[self.phase]], dtype=complex)
        for j in range(nsites):
            out = np.kron(_MATRICES[labels.get(j, "I")], out)
        return out

    # -- dunder ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        return (isinstance(other, PauliString)
                and self.sites == other.sites and self.phase == other.phase)

    def __hash__(self) -> int:
        return hash((self.sites, self.phase))

    def __repr__(self) -> str:
        body = "".join(f"{a}{j}" for j, a in self.sites) or "I"
        pre = {1 + 0j: "", -1 + 0j: "-", 1j: "i*", -1j: "-i*"}[self.phase]
        return f"{pre}{body}"


IDENTITY = PauliString()


def single(axis: str, site: int) -> PauliString:
    return PauliString(((site, axis),))


def two_site(axis_a: str, site_a: int, axis_b: str, site_b: int) -> PauliString:
    if site_a > site_b:
        site_a, site_b, axis_a, axis_b = site_b, site_a, axis_b, axis_a
    return PauliString(((site_a, axis_a), (site_b, axis_b)))


def multiply_pauli_strings(a: PauliString, b: PauliString) -> PauliString:
    """Canonical product ``a * b`` with the accumulated fourth-root-of-unity phase."""
    phase = a.phase * b.phase
    out: list[tuple[int, str]] = []
    ia, ib = 0, 0
    sa, sb = a.sites, b.sites
    while ia < len(sa) and ib < len(sb):
        ja, aa = sa[ia]
        jb, ab = sb[ib]
        if ja < jb:
            out.append((ja, aa)); ia += 1
        elif jb < ja:
            out.append((jb, ab)); ib += 1
        else:
            p, axis = _PRODUCT[(aa, ab)]
            phase *= p
            if axis is not None:
                out.append((ja, axis))
            ia += 1; ib += 1
    out.extend(sa[ia:])
    out.extend(sb[ib:])
    return PauliString(out, phase)


class PauliSum:
    """Hermitian sum of Pauli strings with real coefficients.

    Terms sharing the same string are merged at construction, string phases
    (which must be +-1) are folded into the coefficients, and near-zero terms
    are dropped.  Instances are immutable and safe to share across workers.
    """

    __slots__ = ("nsites", "_terms")

    def __init__(self, terms: Iterable[tuple[float, PauliString]], nsites: int):
        merged: dict[tuple, float] = {}
        max_site = -1
        for coeff, string in terms:
            w = complex(coeff) * string.phase
            if abs(w.imag) > 1e-12 * max(1.0, abs(w.real)):
                raise ValueError(
                    f"non-Hermitian term {coeff!r} * {string!r}: coefficient times "
                    "phase must be real")
            merged[string.sites] = merged.get(string.sites, 0.0) + w.real
            max_site = max(max_site, string.max_site)
        nsites = int(nsites)
        if max_site >= nsites:
            raise ValueError(f"term touches site {max_site} >= nsites={nsites}")
        if nsites < 1:
            raise ValueError("nsites must be >= 1")
        scale = max([1.0] + [abs(c) for c in merged.values()])
        object.__setattr__(self, "nsites", nsites)
        object.__setattr__(
            self, "_terms",
            {s: c for s, c in merged.items() if abs(c) > 1e-15 * scale})

    def __setattr__(self, name, value):
        raise AttributeError("PauliSum is immutable")

    def __reduce__(self):
        return (PauliSum, (self.terms, self.nsites))

    # -- views ----------------------------------------------------------
    @property
    def terms(self) -> list[tuple[float, PauliString]]:
        return [(c, PauliString(s)) for s, c in self._terms.items()]

    def coefficient(self, string: PauliString) -> float:
        return self._terms.get(string.sites, 0.0) * string.phase.real

    def string_keys(self) -> tuple[tuple, ...]:
        return tuple(self._terms.keys())

    def coefficients(self) -> np.ndarray:
        return np.fromiter(self._terms.values(), dtype=float, count=len(self._terms))

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[float, PauliString]]:
        return iter(self.terms)

    # -- algebra --------------------------------------------------------
    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        n = max(self.nsites, other.nsites)
        pairs = [(c, PauliString(s)) for s, c in self._terms.items()]
        pairs += [(c, PauliString(s)) for s, c in other._terms.items()]
        return PauliSum(pairs, n)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum([(c * float(scalar), PauliString(s))
                         for s, c in self._terms.items()], self.nsites)

    __rmul__ = __mul__

    def conjugate_by(self, string: PauliString) -> "PauliSum":
        """P H P for a Hermitian involution P (a phase-1 letter string)."""
        if string.phase not in (1 + 0j, -1 + 0j):
            raise ValueError("conjugation string must have real phase")
        out = []
        for s, c in self._terms.items():
            prod = string * PauliString(s) * string
            out.append((c * prod.phase.real, PauliString(prod.sites)))
        return PauliSum(out, self.nsites)

    # -- numerics -------------------------------------------------------
    def one_norm(self) -> float:
        return float(sum(abs(c) for c in self._terms.values()))

    def to_matrix(self) -> np.ndarray:
        dim = 2 ** self.nsites
        idx = np.arange(dim)
        out = np.zeros((dim, dim), dtype=complex)
        for s, c in self._terms.items():
            xm, zm, factor = PauliString(s).action_masks(self.nsites)
            signs = 1.0 - 2.0 * (_popcount(idx & zm) & 1)
            out[idx ^ xm, idx] += c * factor * signs
        return out

    def allclose(self, other: "PauliSum", atol: float = 1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= atol
                   for k in keys)

    def __repr__(self) -> str:
        inner = " + ".join(f"{c:g}*{PauliString(s)!r}" for s, c in
                           itertools.islice(self._terms.items(), 8))
        more = "" if len(self._terms) <= 8 else f" + ... ({len(self._terms)} terms)"
        return f"PauliSum[{self.nsites} sites]({inner}{more})"


def _popcount(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr)


def decompose_dense(matrix: np.ndarray, nsites: int) -> dict[tuple, complex]:
    """Coefficients tr(P M)/2^n over all letter strings P; inverse of to_matrix.

    Intended for small verification problems (n <= 8).
    """
    dim = 2 ** nsites
    if matrix.shape != (dim, dim):
        raise ValueError(f"matrix shape {matrix.shape} does not match nsites={nsites}")
    if nsites > 8:
        raise ValueError("dense decomposition limited to 8 sites")
    idx = np.arange(dim)
    out: dict[tuple, complex] = {}
    for labels in itertools.product("IXYZ", repeat=nsites):
        sites = tuple((j, a) for j, a in enumerate(labels) if a != "I")
        xm, zm, factor = PauliString(sites).action_masks(nsites)
        signs = 1.0 - 2.0 * (_popcount(idx & zm) & 1)
        # tr(P M) = sum_b P[b^xm, b] M[b, b^xm]
        coeff = np.sum(factor * signs * matrix[idx, idx ^ xm]) / dim
        if abs(coeff) > 1e-14:
            out[sites] = complex(coeff)
    return out
