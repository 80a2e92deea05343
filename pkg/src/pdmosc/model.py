"""Physical parameters, mass and potential profiles, and ordering parameters.

The oscillator lives on one half-line, selected by ``ModelParams.branch``:

    m(x) = a / x,    V(x) = a (2 omega^2 x + 1 / (8 x)),
    H(x, p) = x p^2 / (2 a) + V(x).

All functions accept scalars or numpy arrays for positions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError

Branch = Literal["positive", "negative"]

#: Positions closer than this to the origin are rejected instead of evaluated.
WALL = 1e-12

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Frequency ``omega``, mass scale ``a`` and the half-line the motion lives on.

    The branch defaults to the sign of ``a`` so that the mass a/x is positive.
    An explicit branch that would make the mass negative is rejected.
    """

    omega: float
    a: float
    branch: Branch | None = None

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"omega must be a positive finite number, got {self.omega!r}")
        if not math.isfinite(self.a) or self.a == 0:
            raise ValueError(f"a must be a nonzero finite number, got {self.a!r}")
        natural = "positive" if self.a > 0 else "negative"
        if self.branch is None:
            object.__setattr__(self, "branch", natural)
        elif self.branch not in ("positive", "negative"):
            raise ValueError(f"branch must be 'positive' or 'negative', got {self.branch!r}")
        elif self.branch != natural:
            raise ValueError(
                f"branch {self.branch!r} with a={self.a} gives a negative mass; "
                f"use branch {natural!r} or flip the sign of a"
            )

    @property
    def sign(self) -> int:
        """+1 on the positive half-line, -1 on the negative one."""
        return 1 if self.branch == "positive" else -1

    def mirrored(self) -> "ModelParams":
        """Parameters under a -> -a, which moves the motion to the other half-line."""
        return ModelParams(self.omega, -self.a)


@dataclass(frozen=True)
class AmbiguityTriple:
    """von Roos ordering exponents. gamma is derived so that alpha + beta + gamma = -1."""

    alpha: float
    beta: float

    @classmethod
    def from_triple(cls, alpha: float, beta: float, gamma: float) -> "AmbiguityTriple":
        if abs(alpha + beta + gamma + 1.0) > _SUM_TOL:
            raise ValueError(
                f"ordering exponents must satisfy alpha + beta + gamma = -1, "
                f"got sum {alpha + beta + gamma!r}"
            )
        return cls(alpha, beta)

    @property
    def gamma(self) -> float:
        return -1.0 - self.alpha - self.beta

    @property
    def epsilon(self) -> float:
        return epsilon_from_ambiguity(self)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


#: Orderings commonly used in the literature, keyed by short name.
ORDERINGS = {
    "bendaniel-duke": AmbiguityTriple(0.0, -1.0),
    "zhu-kroemer": AmbiguityTriple(-0.5, 0.0),
    "li-kuhn": AmbiguityTriple(0.0, -0.5),
    "gora-williams": AmbiguityTriple(-1.0, 0.0),
    "mustafa-mazharimousavi": AmbiguityTriple(-0.25, -0.5),
}


@dataclass(frozen=True)
class ClassicalState:
    x: float
    xdot: float


def check_domain(x, params: ModelParams, wall: float = WALL):
    """Return ``x`` as a float array after checking it lies on the branch half-line."""
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)):
        raise DomainError("position must be finite")
    if np.any(np.abs(x) < wall):
        raise DomainError(f"position within {wall:g} of the singular point x = 0")
    if np.any(np.sign(x) != params.sign):
        raise DomainError(f"position lies outside the {params.branch} half-line")
    return x


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def mass_profile(x, params: ModelParams):
    x = check_domain(x, params)
    return _out(params.a / x)


def potential(x, params: ModelParams):
    x = check_domain(x, params)
    w = params.omega
    return _out(params.a * (2.0 * w * w * x + 1.0 / (8.0 * x)))


def potential_minimum(params: ModelParams) -> tuple[float, float]:
    """Location and value of the potential minimum, (+-1/(4 omega), |a| omega)."""
    x = params.sign / (4.0 * params.omega)
    return x, abs(params.a) * params.omega


def momentum(x, xdot, params: ModelParams):
    """Canonical momentum p = m(x) xdot = a xdot / x."""
    x = check_domain(x, params)
    return _out(params.a * np.asarray(xdot, dtype=float) / x)


def hamiltonian(x, p, params: ModelParams):
    """H = x p^2 / (2a) + V(x) in canonical variables."""
    x = check_domain(x, params)
    p = np.asarray(p, dtype=float)
    return _out(x * p * p / (2.0 * params.a) + potential(x, params))


def hamiltonian_state(state: ClassicalState, params: ModelParams) -> float:
    """H evaluated from position and velocity."""
    return hamiltonian(state.x, momentum(state.x, state.xdot, params), params)


def lienard_coefficients(x, params: ModelParams):
    """Coefficients (f, g) of xddot + f(x) xdot^2 + g(x) = 0."""
    x = check_domain(x, params)
    w = params.omega
    f = -1.0 / (2.0 * x)
    g = 2.0 * w * w * x - 1.0 / (8.0 * x)
    return _out(f), _out(g)


def epsilon_from_ambiguity(t: AmbiguityTriple) -> float:
    # + 0.0 turns a signed zero into +0
    return 4.0 * t.alpha * t.gamma + 0.0


def bound_state_condition(a: float, epsilon: float) -> bool:
    """True when the effective inverse-square coupling admits bound states."""
    return a * a + epsilon >= 0.25
