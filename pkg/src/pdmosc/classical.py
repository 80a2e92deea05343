"""Classical dynamics of xddot - xdot^2/(2x) + 2 omega^2 x - 1/(8x) = 0.

Numerical trajectories come from an adaptive Runge-Kutta integrator with dense
output; the closed-form orbit, the first integral, the fixed points and the
nonlocal linearization witness are provided alongside so that each can be
checked against the others.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import specfun
from .errors import (
    AmplitudeDomainError,
    DegenerateAmplitude,
    DomainError,
    InsufficientSpan,
    IntegrationError,
    SingularWallHit,
    StepSizeUnderflow,
)
from .model import WALL, ClassicalState, ModelParams, check_domain

TOL_RANGE = (1e-13, 1e-3)

#: Orbits with E/(|a| omega) - 1 below this are treated as sitting on the fixed point.
DEGENERATE_EXCESS = 1e-6

# scipy refuses rtol below 100 * machine epsilon
_MIN_RTOL = 2.3e-14


@dataclass(frozen=True)
class Trajectory:
    """Sampled classical motion with the energy recorded at every sample.

    ``dense`` maps an array of times to a (2, len(t)) array of (x, xdot); it is
    None for trajectories that were not produced by the integrator.
    """

    times: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    energies: np.ndarray
    params: ModelParams
    tol: float = math.nan
    dense: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.times.ndim != 1 or not (self.times.shape == self.x.shape == self.xdot.shape
                                        == self.energies.shape):
            raise ValueError("trajectory arrays must be one-dimensional and of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        check_domain(self.x, self.params)

    @property
    def states(self) -> list[ClassicalState]:
        return [ClassicalState(float(a), float(b)) for a, b in zip(self.x, self.xdot)]

    @property
    def energy_drift(self) -> float:
        """max |H(t) - H(0)| / |H(0)|."""
        return float(np.max(np.abs(self.energies - self.energies[0])) / abs(self.energies[0]))

    def evaluate(self, t) -> np.ndarray:
        if self.dense is None:
            raise ValueError("trajectory has no dense output")
        return self.dense(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class OrbitSolution:
    """Closed-form bounded orbit with energy ``E`` and phase ``theta0``."""

    E: float
    theta0: float
    params: ModelParams

    def __post_init__(self):
        ratio = self.E / (self.params.a * self.params.omega)
        if not abs(ratio) > 1.0:
            raise AmplitudeDomainError(
                f"bounded motion needs |E/(a omega)| > 1, got {ratio!r}; "
                f"at |E/(a omega)| = 1 the orbit collapses to the fixed point x = +-1/(4 omega)"
            )
        if self.E < 0:
            raise AmplitudeDomainError("orbit energy must be positive")

    @property
    def centre(self) -> float:
        return self.E / (4.0 * self.params.omega**2 * self.params.a)

    @property
    def modulation(self) -> float:
        """Relative amplitude sqrt(1 - (a omega / E)^2)."""
        return math.sqrt(1.0 - (self.params.a * self.params.omega / self.E) ** 2)

    @property
    def extremes(self) -> tuple[float, float]:
        c, k = self.centre, self.modulation
        lo, hi = c * (1 - k), c * (1 + k)
        return (min(lo, hi), max(lo, hi))


def rhs(state: ClassicalState, params: ModelParams):
    """(xdot, xddot) at a state; accepts arrays of positions and velocities."""
    x = check_domain(state.x, params)
    y = np.asarray(state.xdot, dtype=float)
    w = params.omega
    acc = y * y / (2.0 * x) - 2.0 * w * w * x + 1.0 / (8.0 * x)
    if acc.ndim == 0:
        return float(y), float(acc)
    return np.broadcast_to(y, acc.shape).copy(), acc


def _vector_field(params: ModelParams):
    w2 = params.omega**2

    def f(t, u):
        x, y = u
        return [y, y * y / (2.0 * x) - 2.0 * w2 * x + 1.0 / (8.0 * x)]

    return f


def energy_from_state(state: ClassicalState, params: ModelParams) -> float:
    """First integral E = a (xdot^2/2 + 2 omega^2 x^2 + 1/8) / x."""
    x = check_domain(state.x, params)
    y = np.asarray(state.xdot, dtype=float)
    e = params.a * (0.5 * y * y + 2.0 * params.omega**2 * x * x + 0.125) / x
    return float(e) if e.ndim == 0 else e


def turning_state(E: float, params: ModelParams, which: str = "max") -> ClassicalState:
    """Rest point of the orbit with energy E, from xdot = 0 in the first integral.

    ``which`` selects the outer ("max") or inner ("min") turning point, by distance
    from the origin.
    """
    a, w = params.a, params.omega
    disc = (E / a) ** 2 - w * w
    if disc <= 0 or E <= 0:
        raise AmplitudeDomainError(f"no bounded orbit with E = {E!r} (|E/(a omega)| must exceed 1)")
    root = math.sqrt(disc)
    mag = (abs(E / a) + (root if which == "max" else -root)) / (4.0 * w * w)
    return ClassicalState(params.sign * mag, 0.0)


def analytic_orbit(sol: OrbitSolution, t):
    """x(t) = (E / (4 omega^2 a)) [1 + sqrt(1 - (a omega/E)^2) sin(2 omega t + theta0)]."""
    t = np.asarray(t, dtype=float)
    x = sol.centre * (1.0 + sol.modulation * np.sin(2.0 * sol.params.omega * t + sol.theta0))
    return float(x) if x.ndim == 0 else x


def analytic_velocity(sol: OrbitSolution, t):
    t = np.asarray(t, dtype=float)
    w = sol.params.omega
    v = sol.centre * sol.modulation * 2.0 * w * np.cos(2.0 * w * t + sol.theta0)
    return float(v) if v.ndim == 0 else v


def orbit_state(sol: OrbitSolution, t: float = 0.0) -> ClassicalState:
    return ClassicalState(analytic_orbit(sol, t), analytic_velocity(sol, t))


def integrate(initial: ClassicalState, t_end: float, tol: float, params: ModelParams,
              n_samples: int | None = None, wall: float = 1e-9) -> Trajectory:
    """Integrate the equation of motion from ``initial`` over [0, t_end].

    Uses the 8(5,3) Dormand-Prince pair with dense output. ``tol`` bounds the
    relative local error; the solver runs with rtol = tol / 10 so that energy
    drift over a few tens of periods stays within 10 * tol. Samples are taken on
    a uniform grid (64 per period by default) from the dense output.

    Raises SingularWallHit if |x| drops below ``wall`` and StepSizeUnderflow if
    the step size collapses.
    """
    if not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise ValueError(f"tol must lie in [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}], got {tol!r}")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    x0 = float(check_domain(initial.x, params))
    rtol = max(tol / 10.0, _MIN_RTOL)
    scale = max(abs(x0), 1.0 / (4.0 * params.omega))
    atol = [1e-3 * rtol * scale, 1e-3 * rtol * scale * params.omega]

    def hit_wall(t, u):
        return params.sign * u[0] - wall

    hit_wall.terminal = True
    hit_wall.direction = -1

    sol = solve_ivp(_vector_field(params), (0.0, t_end), [x0, initial.xdot], method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True, events=hit_wall)
    if sol.status == 1:
        raise SingularWallHit(f"trajectory reached |x| = {wall:g} at t = {sol.t_events[0][0]:.6g}")
    if sol.status != 0:
        msg = sol.message or "integration failed"
        if "step size" in msg.lower():
            raise StepSizeUnderflow(msg)
        raise IntegrationError(msg)

    if n_samples is None:
        n_samples = max(201, int(math.ceil(64 * t_end * params.omega / math.pi)) + 1)
    times = np.linspace(0.0, t_end, n_samples)
    dense = sol.sol

    u = dense(times)
    try:
        energies = energy_from_state(ClassicalState(u[0], u[1]), params)
    except DomainError as exc:
        raise SingularWallHit(str(exc)) from exc
    return Trajectory(times, u[0], u[1], np.atleast_1d(energies), params, tol, dense)


def down_crossings(traj: Trajectory, xtol: float = 1e-12) -> np.ndarray:
    """Times where the velocity changes sign from + to - (outward turning points),
    refined with Brent's method on the dense output."""
    sgn = np.sign(traj.xdot) * traj.params.sign
    idx = np.nonzero((sgn[:-1] > 0) & (sgn[1:] <= 0))[0]
    if traj.dense is None:
        raise ValueError("period measurement needs a trajectory with dense output")

    def v(t):
        return float(traj.dense(np.array([t]))[1, 0]) * traj.params.sign

    roots = []
    for i in idx:
        lo, hi = traj.times[i], traj.times[i + 1]
        if v(hi) == 0.0:
            roots.append(hi)
        else:
            roots.append(brentq(v, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))
    return np.unique(np.asarray(roots))


def measure_period(traj: Trajectory) -> float:
    """Oscillation period averaged over all complete cycles in the trajectory.

    At least three successive outward turning points are needed.
    """
    p = traj.params
    excess = float(np.mean(traj.energies)) / (abs(p.a) * p.omega) - 1.0
    if excess < DEGENERATE_EXCESS:
        raise DegenerateAmplitude(
            f"E/(|a| omega) - 1 = {excess:.3g} is below {DEGENERATE_EXCESS:g}; "
            "the orbit sits on the fixed point"
        )
    roots = down_crossings(traj)
    if roots.size < 3:
        raise InsufficientSpan(f"found {roots.size} turning points, need at least 3")
    return float((roots[-1] - roots[0]) / (roots.size - 1))


def fixed_points(params: ModelParams) -> list[ClassicalState]:
    """Equilibria of the planar system on the parameter branch.

    The single equilibrium coincides with the potential minimum and is stable.
    """
    return [ClassicalState(params.sign / (4.0 * params.omega), 0.0)]


def jacobian(state: ClassicalState, params: ModelParams) -> np.ndarray:
    """Jacobian of (xdot, ydot) with respect to (x, y)."""
    x, y, w = state.x, state.xdot, params.omega
    return np.array([[0.0, 1.0],
                     [-y * y / (2 * x * x) - 2 * w * w - 1 / (8 * x * x), y / x]])


# --- nonlocal linearization -------------------------------------------------

def transform_F(x):
    return 1.0 / (2.0 * np.asarray(x, dtype=float))


def transform_G(x):
    return 1j / (4.0 * np.asarray(x, dtype=float))


def determining_residuals(x, omega: float):
    """Residuals of the three conditions on (F, G) for the transform to map the
    motion onto Xddot + omega^2 X = 0, evaluated with F = 1/(2x), G = i/(4x).

    Returns (F' + F^2 + F/(2x), G' + 2 F G, G^2 - F g(x) + omega^2), each scaled
    by the magnitude of its largest term.
    """
    x = np.asarray(x, dtype=float)
    F, G = transform_F(x), transform_G(x)
    dF = -1.0 / (2.0 * x * x)
    dG = -1j / (4.0 * x * x)
    g = 2.0 * omega**2 * x - 1.0 / (8.0 * x)
    r1 = (dF + F * F + F / (2 * x)) / np.abs(dF)
    r2 = (dG + 2 * F * G) / np.abs(dG)
    r3 = (G * G - F * g + omega**2) / np.maximum(np.abs(F * g), omega**2)
    return r1, r2, r3


@dataclass(frozen=True)
class WitnessSeries:
    """Transformed coordinate X(t) and the harmonic residual |Xddot + omega^2 X|."""

    times: np.ndarray
    X: np.ndarray
    residual: np.ndarray
    omega: float

    @property
    def scale(self) -> float:
        """max |omega^2 X| over the series; residuals are judged relative to it."""
        return float(self.omega**2 * np.max(np.abs(self.X)))

    @property
    def relative_max(self) -> float:
        return float(np.max(self.residual) / self.scale)


# sixth-order central second difference
_D2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


def linearization_witness(traj: Trajectory, step: float | None = None,
                          quad_rtol: float = 1e-14) -> WitnessSeries:
    """Apply X = sqrt|x| exp(i int_0^t dt'/(4x)) along the trajectory and measure
    how well X obeys the harmonic equation Xddot + omega^2 X = 0.

    The second derivative uses a seven-point central stencil on the dense output;
    the phase integral uses adaptive Gauss-Legendre panels. Samples whose stencil
    would leave [0, t_end] are dropped.
    """
    if traj.dense is None:
        raise ValueError("witness needs a trajectory with dense output")
    w = traj.params.omega
    h = step if step is not None else 1e-2 / w
    t_end = traj.times[-1]
    keep = (traj.times - 3 * h >= 0) & (traj.times + 3 * h <= t_end)
    ts = traj.times[keep]
    if ts.size == 0:
        raise InsufficientSpan("trajectory too short for the finite-difference stencil")
    offsets = h * np.arange(-3, 4)
    pts = (ts[:, None] + offsets[None, :]).ravel()
    grid, inverse = np.unique(np.concatenate([[0.0], pts]), return_inverse=True)

    def inv4x(t):
        shape = np.shape(t)
        x = traj.dense(np.ravel(t))[0]
        return (0.25 / x).reshape(shape)

    phase = np.concatenate([[0.0], np.cumsum(specfun.panel_integrals(inv4x, grid, order=8,
                                                                      rtol=quad_rtol))])
    xs = traj.dense(grid)[0]
    Xg = np.sqrt(np.abs(xs)) * np.exp(1j * phase)
    Xs = Xg[inverse[1:]].reshape(ts.size, 7)
    Xdd = Xs @ _D2 / (h * h)
    X = Xs[:, 3]
    res = np.abs(Xdd + w * w * X)
    return WitnessSeries(ts, X, res, w)


def mirror_map(traj: Trajectory) -> Trajectory:
    """Image of a trajectory under a -> -a, x -> -x.

    Energies are unchanged: both the kinetic term x p^2/(2a) and the potential
    a(2 omega^2 x + 1/(8x)) are invariant under the joint sign flip.
    """
    dense = None
    if traj.dense is not None:
        inner = traj.dense

        def dense(t):
            return -inner(t)

    return replace(traj, x=-traj.x, xdot=-traj.xdot, params=traj.params.mirrored(), dense=dense)


def stationary_trajectory(params: ModelParams, t_end: float, n_samples: int = 201) -> Trajectory:
    """Exact trajectory resting at the fixed point."""
    xf = fixed_points(params)[0].x
    times = np.linspace(0.0, t_end, n_samples)
    e = abs(params.a) * params.omega

    def dense(t):
        t = np.asarray(t, dtype=float)
        return np.vstack([np.full(t.shape, xf), np.zeros(t.shape)])

    return Trajectory(times, np.full(n_samples, xf), np.zeros(n_samples), np.full(n_samples, e),
                      params, 0.0, dense)


def wall_distance(traj: Trajectory) -> float:
    return float(np.min(np.abs(traj.x)))


__all__ = [
    "Trajectory", "OrbitSolution", "WitnessSeries", "rhs", "integrate", "analytic_orbit",
    "analytic_velocity", "orbit_state", "energy_from_state", "turning_state", "measure_period",
    "down_crossings", "fixed_points", "jacobian", "linearization_witness", "determining_residuals",
    "mirror_map", "stationary_trajectory", "WALL",
]
