"""Special functions and quadrature used by the quantum solution.

Only the terminating (polynomial) branch of the confluent hypergeometric
function is provided; it is all that bound states with integer quantum
number need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, NonConvergence, QuadratureFailure


def pochhammer(x: float, k: int) -> float:
    """Rising factorial (x)_k = x (x+1) ... (x+k-1), with (x)_0 = 1."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = 1.0
    for j in range(k):
        out *= x + j
    return out


_SPLIT = 134217729.0  # 2^27 + 1, Dekker's splitting constant


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@lru_cache(maxsize=1024)
def _kummer_coefficients(n: int, b: float) -> tuple[np.ndarray, np.ndarray]:
    # c_k = (-n)_k / ((b)_k k!) formed exactly in rationals, stored as double-double
    bq = Fraction(b)
    c = Fraction(1)
    hi, lo = [], []
    for k in range(n + 1):
        h = float(c)
        hi.append(h)
        lo.append(float(c - Fraction(h)))
        c = c * (k - n) / ((bq + k) * (k + 1))
    return np.array(hi), np.array(lo)


def kummer_terminating(n: int, b: float, z):
    """1F1(-n; b; z) = sum_{k=0}^{n} (-n)_k z^k / ((b)_k k!).

    The alternating series cancels heavily at large z (at n = 20, z = 50 the
    terms reach 1e16 for a result of order 1e8), so plain summation loses about
    eight digits. The coefficients are formed exactly and the polynomial is
    evaluated with a compensated Horner scheme (error-free TwoSum/TwoProduct),
    which is as accurate as double-double evaluation rounded once.
    """
    if n < 0 or int(n) != n:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    if b <= 0 and float(b).is_integer():
        raise DomainError(f"b = {b} is a nonpositive integer")
    z = np.asarray(z, dtype=float)
    c_hi, c_lo = _kummer_coefficients(n, float(b))
    rh = np.full(z.shape, c_hi[n])
    rl = np.full(z.shape, c_lo[n])
    for k in range(n - 1, -1, -1):
        ph, pe = _two_prod(rh, z)
        sh, se = _two_sum(ph, c_hi[k])
        rl = rl * z + pe + se + c_lo[k]
        rh, rl = _two_sum(sh, rl)
    total = rh + rl
    return float(total) if total.ndim == 0 else total


def assoc_laguerre(n: int, alpha: float, z):
    """Generalized Laguerre polynomial L_n^(alpha)(z) by the three-term recurrence."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    z = np.asarray(z, dtype=float)
    prev = np.ones_like(z)
    if n == 0:
        return float(prev) if prev.ndim == 0 else prev
    cur = 1.0 + alpha - z
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - z) * cur - (k + alpha) * prev) / (k + 1)
    return float(cur) if cur.ndim == 0 else cur


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def mapped(self, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights for the interval [lo, hi]."""
        half = 0.5 * (hi - lo)
        return lo + half * (self.nodes + 1.0), half * self.weights

    def integrate(self, f, lo: float = -1.0, hi: float = 1.0) -> float:
        x, w = self.mapped(lo, hi)
        return float(np.dot(w, f(x)))


def _legendre_and_derivative(n: int, x: np.ndarray):
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    # P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=64)
def gauss_legendre(order: int, tol: float = 1e-15, max_iter: int = 100) -> QuadratureRule:
    """Gauss-Legendre nodes and weights of the given order.

    Newton iteration on P_n starting from Tricomi's asymptotic node estimate.
    Nodes are returned in ascending order.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    n = order
    if n == 1:
        return QuadratureRule(np.array([0.0]), np.array([2.0]), 1)
    i = np.arange(1, n + 1)
    theta = np.pi * (4 * i - 1) / (4 * n + 2)
    x = np.cos(theta) * (1.0 - (n - 1) / (8.0 * n**3))
    for _ in range(max_iter):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    else:
        raise NonConvergence(f"Gauss-Legendre nodes of order {n} did not converge")
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    idx = np.argsort(x)
    # symmetrize: the exact rule is odd in the nodes and even in the weights
    nodes = 0.5 * (x[idx] - x[idx][::-1])
    weights = 0.5 * (w[idx] + w[idx][::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, n)


def panel_integrals(f, edges, order: int = 16, rtol: float = 1e-13, atol: float = 0.0,
                    max_depth: int = 40):
    """Integrals of a vectorized ``f`` over each panel [edges[i], edges[i+1]].

    Each panel is estimated with rules of ``order`` and ``2*order`` points; panels
    where the two disagree are bisected and retried. A panel is accepted when the
    disagreement is within rtol of its own value, within ``atol``, or within
    rtol * T * sqrt(width / span), T being the first-pass total of |f|. The square
    root keeps the budget summable along a bisection chain that closes in on an
    endpoint singularity such as sqrt(x).
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    low_rule, high_rule = gauss_legendre(order), gauss_legendre(2 * order)
    owner = np.arange(lo.size)
    out = None
    budget = 0.0
    for _ in range(max_depth):
        if owner.size == 0:
            return out
        half = 0.5 * (hi - lo)[:, None]
        mid = 0.5 * (hi + lo)[:, None]
        coarse = (half * low_rule.weights * f(mid + half * low_rule.nodes)).sum(axis=1)
        fine = (half * high_rule.weights * f(mid + half * high_rule.nodes)).sum(axis=1)
        if out is None:
            out = np.zeros(lo.shape, dtype=fine.dtype)
            span = edges[-1] - edges[0]
            if span > 0:
                budget = rtol * np.abs(fine).sum() / math.sqrt(span)
        tol = np.maximum(np.maximum(atol, rtol * np.abs(fine)), budget * np.sqrt(hi - lo))
        done = np.abs(fine - coarse) <= tol
        np.add.at(out, owner[done], fine[done])
        keep = ~done
        c = 0.5 * (lo[keep] + hi[keep])
        lo, hi = np.concatenate([lo[keep], c]), np.concatenate([c, hi[keep]])
        owner = np.concatenate([owner[keep], owner[keep]])
    if owner.size:
        raise QuadratureFailure(f"{owner.size} panels failed to converge")
    return out


def integrate(f, lo: float, hi: float, panels: int = 8, **kwargs) -> float:
    """Adaptive Gauss-Legendre integral of ``f`` over [lo, hi]."""
    return float(panel_integrals(f, np.linspace(lo, hi, panels + 1), **kwargs).sum())
