"""Switching schedules: the drive tilt f(t) and the decaying penalty h_P(t).

Boundary conditions f(0) = 0, f(T) = sqrt(2/3) and h_P(T) = 0 are built into
both functional forms; the sine-augmented path with all beta_n = 0 coincides
with the linear path pointwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

F_END = math.sqrt(2.0 / 3.0)
F_FORMS = ("linear", "sine")


@dataclass(frozen=True)
class Schedule:
    T: float
    omega: float
    hP0: float = 0.0
    f_form: str = "linear"
    betas: tuple[float, ...] = ()

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError(f"total time T must be positive, got {self.T}")
        if self.omega <= 0:
            raise ValueError(f"drive frequency must be positive, got {self.omega}")
        if self.hP0 < 0:
            raise ValueError(f"initial penalty must be >= 0, got {self.hP0}")
        if self.f_form not in F_FORMS:
            raise ValueError(f"unknown f form {self.f_form!r}; choose from {F_FORMS}")
        if self.f_form == "linear" and self.betas:
            raise ValueError("beta coefficients only apply to the sine-augmented form")
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))

    def f(self, t: float | np.ndarray) -> float | np.ndarray:
        x = np.multiply(t, 1.0 / self.T)
        val = x
        if self.f_form == "sine":
            for n, beta in enumerate(self.betas, start=1):
                val = val + beta * np.sin(n * np.pi * x)
        return F_END * val

    def hP(self, t: float | np.ndarray) -> float | np.ndarray:
        return self.hP0 * (1.0 - np.multiply(t, 1.0 / self.T))

    def replace(self, **kwargs) -> "Schedule":
        data = {"T": self.T, "omega": self.omega, "hP0": self.hP0,
                "f_form": self.f_form, "betas": self.betas}
        data.update(kwargs)
        return Schedule(**data)


def max_f_fraction(sched: Schedule, ngrid: int = 4096) -> float:
    """max_t f(t) / f(T), sampled on a uniform grid; 1.0 means no overshoot."""
    t = np.linspace(0.0, sched.T, ngrid)
    return float(np.max(sched.f(t)) / F_END)


def path_feasible(betas, tol: float = 1e-9, ngrid: int = 4096) -> bool:
    """Whether the path t/T + sum beta_n sin(n pi t/T) stays within its endpoint."""
    x = np.linspace(0.0, 1.0, ngrid)
    g = x.copy()
    for n, beta in enumerate(betas, start=1):
        g += beta * np.sin(n * np.pi * x)
    return float(np.max(g)) <= 1.0 + tol
