"""Closed-form quantum solution.

With the von Roos ordering the stationary equation reads, for m(x) = a/x,

    x psi'' + psi' - (eps / 4) psi / x + 2a (E - V(x)) psi = 0,   eps = 4 alpha gamma.

The substitution x = eta xi^2 with eta = m0 / (4a), followed by phi = sqrt(xi) psi,
turns it into a constant-mass problem in the isotonic potential

    V_eff(xi) = m0 omega^2 xi^2 / 2 + (a^2 + eps - 1/4) / (2 m0 xi^2),

whose levels are E_n = omega (2n + 1 + sqrt(a^2 + eps)).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import specfun
from .errors import AdmissibilityError, DomainError, SingularEndpointWarning
from .model import AmbiguityTriple, ModelParams, bound_state_condition, check_domain, potential

#: Gaussian envelope cutoff exp(-m0 omega xi^2) used to truncate normalization integrals.
ENVELOPE_CUTOFF = 1e-40


@dataclass(frozen=True)
class QuantumConfig:
    params: ModelParams
    ambiguity: AmbiguityTriple
    m0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.m0) and self.m0 > 0):
            raise ValueError(f"m0 must be positive, got {self.m0!r}")
        a, eps = self.params.a, self.ambiguity.epsilon
        if not bound_state_condition(a, eps):
            raise AdmissibilityError(
                f"no bound states: a^2 + eps = {a * a + eps:.6g} < 1/4 "
                f"(a = {a:g}, eps = 4 alpha gamma = {eps:g})"
            )
        if self.boundary_case:
            warnings.warn(
                "a^2 + eps = 1/4: the inverse-square term vanishes and the origin is a "
                "limit-circle endpoint; Dirichlet results carry reduced confidence",
                SingularEndpointWarning, stacklevel=2)

    @property
    def epsilon(self) -> float:
        return self.ambiguity.epsilon

    @property
    def coupling(self) -> float:
        """a^2 + eps."""
        return self.params.a ** 2 + self.epsilon

    @property
    def root(self) -> float:
        """sqrt(a^2 + eps); the level offset in units of omega is 1 + root."""
        return math.sqrt(self.coupling)

    @property
    def nu(self) -> float:
        """Small-xi exponent of phi_n: 1/2 + sqrt(a^2 + eps)."""
        return 0.5 + self.root

    @property
    def eta(self) -> float:
        """Scale of x = eta xi^2; carries the sign of a, and so of the branch."""
        return self.m0 / (4.0 * self.params.a)

    @property
    def boundary_case(self) -> bool:
        return abs(self.coupling - 0.25) <= 1e-12

    @property
    def omega(self) -> float:
        return self.params.omega


@dataclass(frozen=True)
class SpectrumTable:
    n: np.ndarray
    E: np.ndarray
    method: str
    metadata: str = "closed-form"

    def __post_init__(self):
        if np.any(np.diff(self.n) <= 0) or np.any(np.diff(self.E) <= 0):
            raise ValueError("levels must be sorted by n and strictly increasing in energy")

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.E)


def effective_potential(xi, cfg: QuantumConfig):
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise DomainError("xi must be positive")
    m0, w = cfg.m0, cfg.omega
    v = 0.5 * m0 * w * w * xi * xi + (cfg.coupling - 0.25) / (2.0 * m0 * xi * xi)
    return float(v) if v.ndim == 0 else v


def coordinate_map(x, cfg: QuantumConfig):
    """xi = sqrt(x / eta)."""
    x = check_domain(x, cfg.params, wall=0.0)
    xi = np.sqrt(x / cfg.eta)
    return float(xi) if xi.ndim == 0 else xi


def inverse_map(xi, cfg: QuantumConfig):
    """x = eta xi^2."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise DomainError("xi must be positive")
    x = cfg.eta * xi * xi
    return float(x) if x.ndim == 0 else x


def analytic_energy(n: int, cfg: QuantumConfig) -> float:
    """E_n = omega (2n + 1 + sqrt(a^2 + eps)); m0 does not enter."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return cfg.omega * (2 * n + 1 + cfg.root)


def analytic_spectrum(cfg: QuantumConfig, levels: int) -> SpectrumTable:
    n = np.arange(levels)
    return SpectrumTable(n, cfg.omega * (2 * n + 1 + cfg.root), "analytic")


def analytic_gaps(cfg: QuantumConfig, levels: int) -> np.ndarray:
    """E_(n+1) - E_n from the closed form, with the ordering-dependent offset
    cancelled before any rounding: omega ((2(n+1) + 1) - (2n + 1))."""
    n = np.arange(levels - 1)
    return cfg.omega * ((2 * (n + 1) + 1) - (2 * n + 1)).astype(float)


def ground_state_ratio(cfg: QuantumConfig) -> float:
    """E_0 / (a omega) = sqrt(1 + eps/a^2) + 1/a."""
    a = cfg.params.a
    return math.sqrt(1.0 + cfg.epsilon / a**2) + 1.0 / a


def _phi_shape(n: int, xi, cfg: QuantumConfig):
    # unnormalized phi_n: xi^nu exp(-u/2) 1F1(-n; nu + 1/2; u), u = m0 omega xi^2
    u = cfg.m0 * cfg.omega * xi * xi
    return xi ** cfg.nu * np.exp(-0.5 * u) * specfun.kummer_terminating(n, cfg.nu + 0.5, u)


def xi_cutoff(n: int, cfg: QuantumConfig) -> float:
    """Upper truncation point for integrals over phi_n^2.

    The Gaussian envelope exp(-m0 omega xi^2) has dropped below ENVELOPE_CUTOFF
    beyond the bulk of the polynomial factor u^(2n + nu - 1/2), whose peak sits
    at u = 2n + nu - 1/2.
    """
    u_max = -math.log(ENVELOPE_CUTOFF) + 2.0 * (2 * n + cfg.nu)
    return math.sqrt(u_max / (cfg.m0 * cfg.omega))


@lru_cache(maxsize=512)
def normalize(n: int, cfg: QuantumConfig) -> float:
    """c_n > 0 with int_0^inf phi_n^2 dxi = 1, by adaptive Gauss-Legendre quadrature.

    The integrand is split into panels that are geometrically graded towards
    xi = 0, where phi_n ~ xi^nu is not analytic.
    """
    hi = xi_cutoff(n, cfg)
    inner = hi * np.geomspace(1e-8, 1.0 / 16.0, 24)
    edges = np.concatenate([[0.0], inner, np.linspace(hi / 16.0, hi, 33)[1:]])
    total = specfun.panel_integrals(lambda s: _phi_shape(n, s, cfg) ** 2, edges,
                                    order=20, rtol=1e-14).sum()
    return 1.0 / math.sqrt(total)


@dataclass(frozen=True)
class Wavefunction:
    """Normalized eigenfunction in the ``xi`` or ``x`` coordinate."""

    n: int
    nu: float
    c: float
    coordinate: str
    cfg: QuantumConfig

    def __call__(self, s):
        if self.coordinate == "xi":
            return wavefunction_phi(self.n, s, self.cfg)
        return wavefunction_psi(self.n, s, self.cfg)

    @property
    def energy(self) -> float:
        return analytic_energy(self.n, self.cfg)


def wavefunction(n: int, cfg: QuantumConfig, coordinate: str = "xi") -> Wavefunction:
    if coordinate not in ("xi", "x"):
        raise ValueError("coordinate must be 'xi' or 'x'")
    return Wavefunction(n, cfg.nu, normalize(n, cfg), coordinate, cfg)


def wavefunction_phi(n: int, xi, cfg: QuantumConfig):
    """phi_n(xi) = c_n xi^nu exp(-m0 omega xi^2 / 2) 1F1(-n; nu + 1/2; m0 omega xi^2)."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise DomainError("xi must be positive")
    out = normalize(n, cfg) * _phi_shape(n, xi, cfg)
    return float(out) if out.ndim == 0 else out


def wavefunction_psi(n: int, x, cfg: QuantumConfig):
    """psi_n(x) = phi_n(xi(x)) / sqrt(xi(x)).

    Normalization is inherited from phi, so int psi_n^2 dx = 2 |eta|.
    """
    xi = coordinate_map(x, cfg)
    out = wavefunction_phi(n, xi, cfg) / np.sqrt(xi)
    return float(out) if np.ndim(out) == 0 else out


def x_norm_factor(cfg: QuantumConfig) -> float:
    """int psi_n^2 dx for the xi-normalized states (dx = 2 eta xi dxi)."""
    return 2.0 * abs(cfg.eta)


# sixth-order central stencils for first and second derivatives
_D1 = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])
_D2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


def _derivatives(f, s, h):
    s = np.asarray(s, dtype=float)
    h = np.asarray(h, dtype=float) * np.ones_like(s)
    pts = s[:, None] + h[:, None] * np.arange(-3, 4)[None, :]
    vals = f(pts)
    return vals[:, 3], vals @ _D1 / h, vals @ _D2 / (h * h)


def _fd_step(s, length):
    return 2e-3 * np.minimum(np.abs(s), length)


def tise_xi_residual(n: int, cfg: QuantumConfig, xi) -> np.ndarray:
    """|-phi''/(2 m0) + V_eff phi - E_n phi| at the given points, scaled by the
    largest of the three terms at each point. Derivatives by finite differences."""
    xi = np.asarray(xi, dtype=float)
    length = 1.0 / math.sqrt(cfg.m0 * cfg.omega)
    phi, _, d2 = _derivatives(lambda s: wavefunction_phi(n, s, cfg), xi, _fd_step(xi, length))
    kinetic = -d2 / (2.0 * cfg.m0)
    pot = effective_potential(xi, cfg) * phi
    en = analytic_energy(n, cfg) * phi
    scale = np.maximum.reduce([np.abs(kinetic), np.abs(pot), np.abs(en)])
    return np.abs(kinetic + pot - en) / scale


def tise_xspace_residual(n: int, cfg: QuantumConfig, x) -> np.ndarray:
    """Residual of x psi'' + psi' - (eps/4) psi / x + 2a (E_n - V) psi for the
    closed-form psi_n, scaled by the largest term at each point.

    The ordering enters only through alpha (alpha + beta + 1) = -eps / 4.
    """
    x = np.asarray(x, dtype=float)
    p = cfg.params
    t = cfg.ambiguity
    length = abs(cfg.eta) / (cfg.m0 * cfg.omega)
    psi, d1, d2 = _derivatives(lambda s: wavefunction_psi(n, s, cfg), x, _fd_step(x, length))
    terms = [
        x * d2,
        d1,
        t.alpha * (t.alpha + t.beta + 1.0) * psi / x,
        2.0 * p.a * (analytic_energy(n, cfg) - potential(x, p)) * psi,
    ]
    scale = np.maximum.reduce([np.abs(v) for v in terms])
    return np.abs(sum(terms)) / scale


def count_nodes(values, deadband: float = 1e-12) -> int:
    """Strict sign changes, ignoring samples within ``deadband`` of zero relative
    to the largest magnitude."""
    v = np.asarray(values, dtype=float)
    v = v[np.abs(v) > deadband * np.max(np.abs(v))]
    return int(np.count_nonzero(np.signbit(v[1:]) != np.signbit(v[:-1])))
