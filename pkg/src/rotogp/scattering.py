"""Zero-energy s-wave scattering length of a radial pair potential.

The reduced radial problem is integrated outward,

    u''(r) = factor * w(r) u(r),     u ~ const * (r - a)  beyond the range,

and the scattering length a is read off from an affine least-squares fit
of u on [R, 2R] where w vanishes.  The default factor is 2 (pair problem
in units where hbar = 2m = 1, so the reduced-mass kinetic term carries an
extra 2); factor=1 gives the single-particle convention.

A hard core of radius r_c is handled exactly by starting the integration
at r_c with u(r_c) = 0.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .backend import njit


@dataclass(frozen=True)
class RadialPotential:
    """Nonnegative-range radial pair potential w(r), zero beyond `rrange`."""

    rrange: float                      # w(r) = 0 for r > rrange
    func: Callable[[np.ndarray], np.ndarray]
    core: float = 0.0                  # hard-core radius (w = +inf below)

    def __post_init__(self):
        if self.rrange <= 0 or self.core < 0 or self.core > self.rrange:
            raise ValueError("need 0 <= core <= rrange, rrange > 0")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.rrange, self.func(r), 0.0)

    def scaled(self, n: float) -> "RadialPotential":
        """The short-range rescaling w_n(r) = n^2 w(n r)."""
        if n <= 0:
            raise ValueError("scale must be positive")
        f = self.func
        return RadialPotential(
            rrange=self.rrange / n,
            func=lambda r, _f=f, _n=n: _n**2 * _f(_n * r),
            core=self.core / n,
        )


def hard_sphere(radius: float) -> RadialPotential:
    return RadialPotential(rrange=radius, func=lambda r: np.zeros_like(r), core=radius)


def square_barrier(radius: float, height: float) -> RadialPotential:
    if height < 0:
        raise ValueError("barrier height must be nonnegative")
    return RadialPotential(
        rrange=radius, func=lambda r: np.full_like(np.asarray(r, float), height)
    )


def square_well(radius: float, depth: float) -> RadialPotential:
    return RadialPotential(
        rrange=radius, func=lambda r: np.full_like(np.asarray(r, float), -abs(depth))
    )


def from_samples(r, w) -> RadialPotential:
    """Piecewise-linear potential through (r, w) sample points."""
    r = np.asarray(r, dtype=float)
    w = np.asarray(w, dtype=float)
    if r.ndim != 1 or r.shape != w.shape or r.size < 2:
        raise ValueError("need matching 1D sample arrays")
    if np.any(np.diff(r) <= 0):
        raise ValueError("sample radii must be strictly increasing")
    return RadialPotential(
        rrange=float(r[-1]), func=lambda x: np.interp(x, r, w, left=w[0], right=0.0)
    )


@njit(cache=True)
def _rk4_outward(h, wvals, factor):  # pragma: no cover - jit path
    """RK4 for u'' = factor*w*u from (u, u') = (0, 1); w on half-step nodes.

    Returns the u samples and the final derivative u'.
    """
    m = (wvals.size - 1) // 2
    us = np.empty(m + 1)
    u = 0.0
    v = 1.0
    us[0] = u
    for k in range(m):
        w0 = factor * wvals[2 * k]
        wh = factor * wvals[2 * k + 1]
        w1 = factor * wvals[2 * k + 2]
        k1u = v
        k1v = w0 * u
        k2u = v + 0.5 * h * k1v
        k2v = wh * (u + 0.5 * h * k1u)
        k3u = v + 0.5 * h * k2v
        k3v = wh * (u + 0.5 * h * k2u)
        k4u = v + h * k3v
        k4v = w1 * (u + h * k3u)
        u += h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
        v += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
        us[k + 1] = u
    return us, v


def radial_solution(pot: RadialPotential, n_steps: int = 20000, factor: float = 2.0):
    """(r, u) for the zero-energy radial solution out to 2 * rrange.

    Integration stops at rrange, where w may be discontinuous; past it the
    equation is u'' = 0 and the solution is continued affinely, which is
    exact.
    """
    r0 = pot.core
    rr = pot.rrange
    if rr > r0:
        h = (rr - r0) / n_steps
        half_nodes = r0 + 0.5 * h * np.arange(2 * n_steps + 1)
        us, v_end = _rk4_outward(h, pot.func(half_nodes), factor)
        r_in = r0 + h * np.arange(n_steps + 1)
    else:  # pure hard sphere: nothing to integrate
        us, v_end = np.array([0.0]), 1.0
        r_in = np.array([r0])
    r_out = np.linspace(rr, 2.0 * rr, n_steps + 1)[1:]
    u_out = us[-1] + v_end * (r_out - rr)
    return np.concatenate([r_in, r_out]), np.concatenate([us, u_out])


def scattering_length(
    pot: RadialPotential, n_steps: int = 20000, factor: float = 2.0
) -> float:
    """Scattering length from an affine fit of u on [rrange, 2*rrange]."""
    r, u = radial_solution(pot, n_steps=n_steps, factor=factor)
    mask = r >= pot.rrange
    slope, intercept = np.polyfit(r[mask], u[mask], 1)
    if slope == 0.0:
        raise ArithmeticError("outer solution is flat; scattering length undefined")
    return float(-intercept / slope)


def square_barrier_length(radius: float, height: float, factor: float = 2.0) -> float:
    """Closed form a = R - tanh(kappa R)/kappa, kappa = sqrt(factor*height)."""
    if height == 0.0:
        return 0.0
    kappa = np.sqrt(factor * height)
    return float(radius - np.tanh(kappa * radius) / kappa)
